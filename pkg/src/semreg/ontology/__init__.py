"""Ontology core: RDF/XML subset parsing, merging, validation, serialization."""

from .model import (
    ClassDef,
    Finding,
    InstanceDef,
    Iri,
    Literal,
    OntologyDocument,
    OntologyGraph,
    ParseWarning,
    PropertyAssertion,
    PropertyDef,
    Restriction,
    ValidationReport,
    Value,
    entities_equal,
)
from .merge import merge, validate
from .parser import parse_document, resolve_ref
from .serializer import serialize_graph

__all__ = [
    "ClassDef",
    "Finding",
    "InstanceDef",
    "Iri",
    "Literal",
    "OntologyDocument",
    "OntologyGraph",
    "ParseWarning",
    "PropertyAssertion",
    "PropertyDef",
    "Restriction",
    "ValidationReport",
    "Value",
    "entities_equal",
    "merge",
    "validate",
    "parse_document",
    "resolve_ref",
    "serialize_graph",
]
