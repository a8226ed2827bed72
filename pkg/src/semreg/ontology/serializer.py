"""Deterministic RDF/XML serializer.

Entities are emitted sorted by IRI with a fixed prefix table, so the same
graph always serializes to the same bytes. Foreign namespaces used in element
position get generated prefixes ns1..nsN in sorted order.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .model import (
    ClassDef,
    InstanceDef,
    Iri,
    Literal,
    OntologyGraph,
    PropertyAssertion,
)
from .vocab import DAML_NS, RDF_NS, RDFS_NS, namespace_of

_FIXED_PREFIXES = {RDF_NS: "rdf", RDFS_NS: "rdfs", DAML_NS: "daml"}


def _attr(value: str) -> str:
    return escape(value, {'"': "&quot;"})


class _Writer:
    def __init__(self, graph: OntologyGraph, base: Iri):
        self.graph = graph
        self.base = base.rstrip("#")
        self.default_ns = self.base + "#"
        self.prefixes = dict(_FIXED_PREFIXES)
        for ns in self._foreign_namespaces():
            self.prefixes[ns] = f"ns{len(self.prefixes) - len(_FIXED_PREFIXES) + 1}"
        self.lines: list[str] = []

    def _foreign_namespaces(self) -> list[str]:
        used: set[str] = set()
        for inst in self.graph.instances.values():
            used.add(namespace_of(inst.class_id))
            for a in inst.assertions:
                used.add(namespace_of(a.prop))
        for cls in self.graph.classes.values():
            for a in cls.assertions:
                used.add(namespace_of(a.prop))
        used.discard(self.default_ns)
        for ns in _FIXED_PREFIXES:
            used.discard(ns)
        return sorted(used)

    def qname(self, iri: Iri) -> str:
        ns = namespace_of(iri)
        local = iri[len(ns):]
        if ns == self.default_ns:
            return local
        prefix = self.prefixes.get(ns)
        if prefix is None:
            raise ValueError(f"no declared prefix for namespace {ns}")
        return f"{prefix}:{local}"

    def ref(self, iri: Iri) -> str:
        if iri.startswith(self.default_ns):
            return "#" + iri[len(self.default_ns):]
        return iri

    def id_attr(self, iri: Iri) -> str:
        if iri.startswith(self.default_ns):
            local = iri[len(self.default_ns):]
            if "#" not in local and "/" not in local:
                return f'rdf:ID="{_attr(local)}"'
        return f'rdf:about="{_attr(iri)}"'

    def out(self, line: str) -> None:
        self.lines.append(line)

    def write_assertion(self, a: PropertyAssertion, indent: str) -> None:
        name = self.qname(a.prop)
        if isinstance(a.value, Literal):
            self.out(f"{indent}<{name}>{escape(a.value.lexical)}</{name}>")
        else:
            self.out(f'{indent}<{name} rdf:resource="{_attr(self.ref(a.value))}"/>')

    def write_member(self, member: Iri, fallback_class: Iri, indent: str) -> None:
        inst = self.graph.instances.get(member)
        class_id = inst.class_id if inst is not None else fallback_class
        name = self.qname(class_id)
        assertions = inst.assertions if inst is not None else ()
        if assertions:
            self.out(f"{indent}<{name} {self.id_attr(member)}>")
            for a in assertions:
                self.write_assertion(a, indent + "  ")
            self.out(f"{indent}</{name}>")
        else:
            self.out(f"{indent}<{name} {self.id_attr(member)}/>")

    def write_class(self, cls: ClassDef) -> None:
        self.out(f"  <daml:Class {self.id_attr(cls.id)}>")
        for sup in sorted(cls.super_classes):
            self.out(f'    <rdfs:subClassOf rdf:resource="{_attr(self.ref(sup))}"/>')
        for r in cls.restrictions:
            self.out("    <rdfs:subClassOf>")
            self.out("      <daml:Restriction>")
            self.out(f'        <daml:onProperty rdf:resource="{_attr(self.ref(r.on_property))}"/>')
            self.out(f'        <daml:toClass rdf:resource="{_attr(self.ref(r.to_class))}"/>')
            self.out("      </daml:Restriction>")
            self.out("    </rdfs:subClassOf>")
        if cls.one_of is not None:
            self.out('    <daml:oneOf rdf:parseType="daml:collection">')
            for member in cls.one_of:
                self.write_member(member, cls.id, "      ")
            self.out("    </daml:oneOf>")
        for a in cls.assertions:
            self.write_assertion(a, "    ")
        self.out("  </daml:Class>")

    def write_property(self, pid: Iri) -> None:
        prop = self.graph.properties[pid]
        tag = "daml:UniqueProperty" if prop.unique else "rdf:Property"
        self.out(f"  <{tag} {self.id_attr(pid)}>")
        for sup in sorted(prop.super_properties):
            self.out(f'    <rdfs:subPropertyOf rdf:resource="{_attr(self.ref(sup))}"/>')
        if prop.domain is not None:
            self.out(f'    <rdfs:domain rdf:resource="{_attr(self.ref(prop.domain))}"/>')
        if prop.range is not None:
            self.out(f'    <rdfs:range rdf:resource="{_attr(self.ref(prop.range))}"/>')
        self.out(f"  </{tag}>")

    def write_instance(self, inst: InstanceDef) -> None:
        name = self.qname(inst.class_id)
        if inst.assertions:
            self.out(f"  <{name} {self.id_attr(inst.id)}>")
            for a in inst.assertions:
                self.write_assertion(a, "    ")
            self.out(f"  </{name}>")
        else:
            self.out(f"  <{name} {self.id_attr(inst.id)}/>")

    def render(self) -> bytes:
        self.out('<?xml version="1.0" encoding="UTF-8"?>')
        self.out("<rdf:RDF")
        self.out(f'    xmlns="{_attr(self.default_ns)}"')
        for ns, prefix in sorted(self.prefixes.items(), key=lambda kv: kv[1]):
            self.out(f'    xmlns:{prefix}="{_attr(ns)}"')
        self.out("    >")
        one_of_members: set[Iri] = set()
        for cls in self.graph.classes.values():
            if cls.one_of:
                one_of_members.update(cls.one_of)
        for cid in sorted(self.graph.classes):
            self.write_class(self.graph.classes[cid])
        for pid in sorted(self.graph.properties):
            self.write_property(pid)
        for iid in sorted(self.graph.instances):
            if iid in one_of_members:
                continue
            self.write_instance(self.graph.instances[iid])
        self.out("</rdf:RDF>")
        return ("\n".join(self.lines) + "\n").encode("utf-8")


def serialize_graph(graph: OntologyGraph, base: Iri) -> bytes:
    """Render a graph as RDF/XML; stable byte-for-byte for equal graphs."""
    return _Writer(graph, base).render()
