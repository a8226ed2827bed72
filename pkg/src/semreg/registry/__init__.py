"""UDDI-style registry: records, checked taxonomies, persistent store."""

from .model import (
    MATCH_ALL,
    MATCH_ANY,
    BusinessEntity,
    BusinessService,
    CategoryBag,
    KeyedReference,
    TModel,
)
from .store import RegistryStore
from .taxonomy import (
    DAML_SPEC,
    GEOGRAPHY,
    UDDI_TYPES,
    UNSPSC,
    WSDL_SPEC,
    Taxonomy,
    builtin_taxonomies,
    load_taxonomy_file,
    parse_taxonomy,
)

__all__ = [
    "MATCH_ALL",
    "MATCH_ANY",
    "BusinessEntity",
    "BusinessService",
    "CategoryBag",
    "KeyedReference",
    "TModel",
    "RegistryStore",
    "DAML_SPEC",
    "GEOGRAPHY",
    "UDDI_TYPES",
    "UNSPSC",
    "WSDL_SPEC",
    "Taxonomy",
    "builtin_taxonomies",
    "load_taxonomy_file",
    "parse_taxonomy",
]
