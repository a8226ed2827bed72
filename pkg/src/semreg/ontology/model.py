"""Immutable data model for the ontology subset.

Everything is a frozen dataclass. Documents keep entities in source order;
graphs key them by IRI. Equality on the entity types is structural and is
what conflict detection during merge relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Union

Iri = str


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str = "string"  # "string" or "decimal"


Value = Union[Iri, Literal]


@dataclass(frozen=True)
class PropertyAssertion:
    prop: Iri
    value: Value


@dataclass(frozen=True)
class Restriction:
    on_property: Iri
    to_class: Iri


@dataclass(frozen=True)
class ClassDef:
    id: Iri
    super_classes: frozenset[Iri] = frozenset()
    restrictions: tuple[Restriction, ...] = ()
    one_of: tuple[Iri, ...] | None = None
    assertions: tuple[PropertyAssertion, ...] = ()


@dataclass(frozen=True)
class PropertyDef:
    id: Iri
    domain: Iri | None = None
    range: Iri | None = None
    super_properties: frozenset[Iri] = frozenset()
    unique: bool = False


@dataclass(frozen=True)
class InstanceDef:
    id: Iri
    class_id: Iri
    assertions: tuple[PropertyAssertion, ...] = ()

    def values_of(self, prop: Iri) -> tuple[Value, ...]:
        return tuple(a.value for a in self.assertions if a.prop == prop)


@dataclass(frozen=True)
class ParseWarning:
    message: str


@dataclass(frozen=True)
class OntologyDocument:
    base: Iri
    source: str
    classes: tuple[ClassDef, ...] = ()
    properties: tuple[PropertyDef, ...] = ()
    instances: tuple[InstanceDef, ...] = ()
    warnings: tuple[ParseWarning, ...] = ()

    def is_empty(self) -> bool:
        return not (self.classes or self.properties or self.instances)


@dataclass(frozen=True)
class OntologyGraph:
    classes: Mapping[Iri, ClassDef] = field(default_factory=dict)
    properties: Mapping[Iri, PropertyDef] = field(default_factory=dict)
    instances: Mapping[Iri, InstanceDef] = field(default_factory=dict)
    # entity IRI -> sorted tuple of source labels that defined it
    provenance: Mapping[Iri, tuple[str, ...]] = field(default_factory=dict)

    def entity_ids(self) -> frozenset[Iri]:
        return frozenset(self.classes) | frozenset(self.properties) | frozenset(self.instances)

    def with_class_assertion(self, class_id: Iri, assertion: PropertyAssertion) -> "OntologyGraph":
        cls = self.classes[class_id]
        if assertion in cls.assertions:
            return self
        classes = dict(self.classes)
        classes[class_id] = replace(cls, assertions=cls.assertions + (assertion,))
        return replace(self, classes=classes)

    def with_instance_assertion(self, instance_id: Iri, assertion: PropertyAssertion) -> "OntologyGraph":
        inst = self.instances[instance_id]
        if assertion in inst.assertions:
            return self
        instances = dict(self.instances)
        instances[instance_id] = replace(inst, assertions=inst.assertions + (assertion,))
        return replace(self, instances=instances)


def entities_equal(a: OntologyGraph, b: OntologyGraph) -> bool:
    """Entity-wise equality, ignoring provenance."""
    return (
        dict(a.classes) == dict(b.classes)
        and dict(a.properties) == dict(b.properties)
        and dict(a.instances) == dict(b.instances)
    )


@dataclass(frozen=True)
class Finding:
    level: str  # "error" or "warning"
    code: str
    entity: Iri
    message: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.level == "error")

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.level == "warning")

    def ok(self) -> bool:
        return not self.errors
