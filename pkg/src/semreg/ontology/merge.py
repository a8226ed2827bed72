"""Merging parsed documents into a graph, plus graph validation."""

from __future__ import annotations

import re
from decimal import Decimal
from typing import Iterable, Mapping, Sequence

from ..errors import ConflictingDefinition, CyclicHierarchy
from .model import (
    ClassDef,
    Finding,
    InstanceDef,
    Iri,
    Literal,
    OntologyDocument,
    OntologyGraph,
    PropertyAssertion,
    PropertyDef,
    ValidationReport,
)
from .vocab import XSD_DECIMAL, is_external

_DECIMAL_LEXICAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")


def _find_cycle(edges: Mapping[Iri, Iterable[Iri]]) -> tuple[Iri, ...] | None:
    """Return one cycle from a directed graph, or None. Edges to nodes not in
    the mapping (external references) are ignored."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {node: WHITE for node in edges}
    parent: dict[Iri, Iri] = {}
    for start in sorted(edges):
        if color[start] != WHITE:
            continue
        color[start] = GRAY
        stack = [(start, iter(sorted(edges[start])))]
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt not in color:
                    continue
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    parent[nxt] = node
                    stack.append((nxt, iter(sorted(edges[nxt]))))
                    advanced = True
                    break
                if color[nxt] == GRAY:
                    cycle = [nxt]
                    cur = node
                    while cur != nxt:
                        cycle.append(cur)
                        cur = parent[cur]
                    cycle.reverse()
                    return tuple(cycle)
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


def _decimal_properties(properties: Mapping[Iri, PropertyDef]) -> frozenset[Iri]:
    return frozenset(pid for pid, p in properties.items() if p.range == XSD_DECIMAL)


def _retype_assertions(
    assertions: tuple[PropertyAssertion, ...], decimal_props: frozenset[Iri]
) -> tuple[PropertyAssertion, ...]:
    out = []
    for a in assertions:
        value = a.value
        if (
            a.prop in decimal_props
            and isinstance(value, Literal)
            and value.datatype != "decimal"
            and _DECIMAL_LEXICAL.match(value.lexical)
        ):
            normalized = str(Decimal(value.lexical))
            out.append(PropertyAssertion(a.prop, Literal(normalized, "decimal")))
        else:
            out.append(a)
    return tuple(out)


def merge(documents: Sequence[OntologyDocument]) -> OntologyGraph:
    """Union of documents. Identical redefinitions collapse; a definition with
    the same IRI but different content raises ConflictingDefinition. Raises
    CyclicHierarchy when the merged subclass or subproperty graph has a cycle.
    """
    classes: dict[Iri, ClassDef] = {}
    properties: dict[Iri, PropertyDef] = {}
    instances: dict[Iri, InstanceDef] = {}
    sources: dict[Iri, list[str]] = {}
    kinds: dict[Iri, str] = {}

    def add(table: dict, entity, kind: str, source: str) -> None:
        eid = entity.id
        if eid in kinds and kinds[eid] != kind:
            raise ConflictingDefinition(eid, tuple(sorted(set(sources[eid] + [source]))))
        existing = table.get(eid)
        if existing is not None and existing != entity:
            raise ConflictingDefinition(eid, tuple(sorted(set(sources[eid] + [source]))))
        table[eid] = entity
        kinds[eid] = kind
        sources.setdefault(eid, []).append(source)

    for doc in documents:
        for cls in doc.classes:
            add(classes, cls, "class", doc.source)
        for prop in doc.properties:
            add(properties, prop, "property", doc.source)
        for inst in doc.instances:
            add(instances, inst, "instance", doc.source)

    cycle = _find_cycle({cid: cls.super_classes for cid, cls in classes.items()})
    if cycle is not None:
        raise CyclicHierarchy("subclass", cycle)
    cycle = _find_cycle({pid: p.super_properties for pid, p in properties.items()})
    if cycle is not None:
        raise CyclicHierarchy("subproperty", cycle)

    decimal_props = _decimal_properties(properties)
    if decimal_props:
        for cid in list(classes):
            cls = classes[cid]
            retyped = _retype_assertions(cls.assertions, decimal_props)
            if retyped != cls.assertions:
                classes[cid] = ClassDef(
                    cls.id, cls.super_classes, cls.restrictions, cls.one_of, retyped
                )
        for iid in list(instances):
            inst = instances[iid]
            retyped = _retype_assertions(inst.assertions, decimal_props)
            if retyped != inst.assertions:
                instances[iid] = InstanceDef(inst.id, inst.class_id, retyped)

    provenance = {eid: tuple(sorted(set(srcs))) for eid, srcs in sources.items()}
    return OntologyGraph(
        classes={k: classes[k] for k in sorted(classes)},
        properties={k: properties[k] for k in sorted(properties)},
        instances={k: instances[k] for k in sorted(instances)},
        provenance=provenance,
    )


def _superclass_chain(graph: OntologyGraph, class_id: Iri) -> list[Iri]:
    chain: list[Iri] = []
    seen = {class_id}
    frontier = [class_id]
    while frontier:
        nxt: list[Iri] = []
        for cid in frontier:
            cls = graph.classes.get(cid)
            if cls is None:
                continue
            for sup in sorted(cls.super_classes):
                if sup not in seen:
                    seen.add(sup)
                    chain.append(sup)
                    nxt.append(sup)
        frontier = nxt
    return chain


def validate(graph: OntologyGraph) -> ValidationReport:
    """Referential and structural checks over a merged graph."""
    findings: list[Finding] = []
    defined = graph.entity_ids()

    def resolvable(iri: Iri) -> bool:
        return iri in defined or is_external(iri)

    def check_ref(owner: Iri, ref: Iri, what: str) -> None:
        if not resolvable(ref):
            findings.append(
                Finding("error", "UnresolvedReference", owner, f"{what} {ref} is not defined")
            )

    for cid, cls in graph.classes.items():
        for sup in sorted(cls.super_classes):
            check_ref(cid, sup, "superclass")
        for r in cls.restrictions:
            check_ref(cid, r.on_property, "restricted property")
            check_ref(cid, r.to_class, "restriction class")
        if cls.one_of is not None:
            if not cls.one_of:
                findings.append(
                    Finding("error", "EmptyEnumeration", cid, "oneOf enumeration has no members")
                )
            for member in cls.one_of:
                if member not in graph.instances:
                    findings.append(
                        Finding(
                            "error",
                            "UnresolvedReference",
                            cid,
                            f"enumeration member {member} is not defined",
                        )
                    )
        for a in cls.assertions:
            check_ref(cid, a.prop, "asserted property")
            if isinstance(a.value, str):
                check_ref(cid, a.value, "asserted value")

    for pid, prop in graph.properties.items():
        if prop.domain is not None:
            check_ref(pid, prop.domain, "domain")
        if prop.range is not None:
            check_ref(pid, prop.range, "range")
        for sup in sorted(prop.super_properties):
            check_ref(pid, sup, "superproperty")

    for iid, inst in graph.instances.items():
        check_ref(iid, inst.class_id, "class")
        for a in inst.assertions:
            check_ref(iid, a.prop, "asserted property")
            if isinstance(a.value, str):
                check_ref(iid, a.value, "asserted value")

    # unique properties carry at most one distinct value per subject
    unique_props = {pid for pid, p in graph.properties.items() if p.unique}
    decimal_props = _decimal_properties(graph.properties)

    def check_assertions(owner: Iri, assertions: tuple[PropertyAssertion, ...]) -> None:
        for pid in unique_props:
            values = {a.value for a in assertions if a.prop == pid}
            if len(values) > 1:
                findings.append(
                    Finding(
                        "error",
                        "UniquePropertyViolation",
                        owner,
                        f"{len(values)} distinct values for unique property {pid}",
                    )
                )
        for a in assertions:
            if a.prop in decimal_props and isinstance(a.value, Literal):
                if a.value.datatype != "decimal" or not _DECIMAL_LEXICAL.match(a.value.lexical):
                    findings.append(
                        Finding(
                            "error",
                            "InvalidDecimalLiteral",
                            owner,
                            f"value {a.value.lexical!r} of {a.prop} is not a decimal",
                        )
                    )

    for cid, cls in graph.classes.items():
        check_assertions(cid, cls.assertions)
    for iid, inst in graph.instances.items():
        check_assertions(iid, inst.assertions)

    # restriction coverage: an instance of a class restricting P should assert P,
    # and an asserted value should belong to the target enumeration when there is one
    for iid, inst in graph.instances.items():
        chain = [inst.class_id] + _superclass_chain(graph, inst.class_id)
        for cid in chain:
            cls = graph.classes.get(cid)
            if cls is None:
                continue
            for r in cls.restrictions:
                values = inst.values_of(r.on_property)
                if not values:
                    findings.append(
                        Finding(
                            "warning",
                            "MissingRestrictedProperty",
                            iid,
                            f"no value for restricted property {r.on_property} "
                            f"(restriction declared on {cid})",
                        )
                    )
                    continue
                target = graph.classes.get(r.to_class)
                if target is not None and target.one_of:
                    for v in values:
                        if isinstance(v, str) and v not in target.one_of:
                            findings.append(
                                Finding(
                                    "warning",
                                    "ValueOutsideEnumeration",
                                    iid,
                                    f"value {v} of {r.on_property} is not a member "
                                    f"of {r.to_class}",
                                )
                            )

    # defensive: merged graphs are acyclic by construction, but validate
    # independently so hand-built graphs are covered too
    cycle = _find_cycle({cid: cls.super_classes for cid, cls in graph.classes.items()})
    if cycle is not None:
        findings.append(
            Finding(
                "error",
                "CyclicHierarchy",
                min(cycle),
                "subclass cycle through " + ", ".join(sorted(cycle)),
            )
        )
    cycle = _find_cycle({pid: p.super_properties for pid, p in graph.properties.items()})
    if cycle is not None:
        findings.append(
            Finding(
                "error",
                "CyclicHierarchy",
                min(cycle),
                "subproperty cycle through " + ", ".join(sorted(cycle)),
            )
        )

    findings.sort(key=lambda f: (f.level, f.code, f.entity, f.message))
    return ValidationReport(tuple(findings))
