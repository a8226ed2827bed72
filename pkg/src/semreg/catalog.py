"""Electronic catalogs: descriptors, the flat XML item format, and
conjunctive predicate queries over item attributes.

Numeric comparison uses decimal arithmetic throughout; binary floating
point never touches attribute values.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Callable, Mapping, Union

from .errors import (
    DuplicateItemId,
    FetchFailed,
    MalformedDescriptor,
    MalformedQuery,
    ParseFailed,
    TypeMismatch,
    UnsupportedSchemaType,
)
from .ontology.model import InstanceDef, Literal, OntologyGraph
from .ontology.vocab import (
    CATALOG_SCHEMA,
    CATALOG_SCHEMA_TYPE,
    CATALOG_URI,
    ELECTRONIC_CATALOG,
    HAS_QUERY_CATALOG,
    INPUT_CATALOG,
)

XML_GENERIC = "xml-generic"
WELL_KNOWN_SCHEMA_TYPES = frozenset({XML_GENERIC})

EQUALITY_OPS = ("=", "!=")
ORDERING_OPS = ("<", "<=", ">", ">=")
OPERATORS = EQUALITY_OPS + ORDERING_OPS + ("contains",)

AttributeValue = Union[str, Decimal]

Fetcher = Callable[[str], bytes]


@dataclass(frozen=True)
class ElectronicCatalogDescriptor:
    catalog_uri: str
    schema_type: str = XML_GENERIC
    schema_ref: str | None = None

    def __post_init__(self):
        if not self.catalog_uri:
            raise MalformedDescriptor("catalog descriptor lacks a catalog URI")
        if self.schema_type not in WELL_KNOWN_SCHEMA_TYPES and not self.schema_ref:
            raise MalformedDescriptor(
                f"schema type {self.schema_type!r} is not well known and no "
                "schema reference is given"
            )


@dataclass(frozen=True)
class CatalogItem:
    id: str
    attributes: Mapping[str, AttributeValue] = field(default_factory=dict)


@dataclass(frozen=True)
class Catalog:
    uri: str
    items: tuple[CatalogItem, ...] = ()


@dataclass(frozen=True)
class Predicate:
    attribute: str
    op: str
    value: AttributeValue

    def __post_init__(self):
        if self.op not in OPERATORS:
            raise MalformedQuery(f"unknown operator {self.op!r}")
        if self.op in ORDERING_OPS and not isinstance(self.value, Decimal):
            raise TypeMismatch(
                f"operator {self.op} requires a decimal value, got {self.value!r}"
            )
        if self.op == "contains" and not isinstance(self.value, str):
            raise TypeMismatch("operator contains requires a string value")


@dataclass(frozen=True)
class CatalogQuery:
    predicates: tuple[Predicate, ...]

    def __post_init__(self):
        if not self.predicates:
            raise MalformedQuery("a catalog query needs at least one predicate")


@dataclass(frozen=True)
class CatalogQueryResult:
    catalog_uri: str
    items: tuple[CatalogItem, ...]


def file_fetcher(root: str | Path) -> Fetcher:
    """Fetcher resolving plain paths and file: URIs beneath a root directory."""
    rootp = Path(root)

    def fetch(uri: str) -> bytes:
        path = uri
        if path.startswith("file://"):
            path = path[len("file://"):]
        p = Path(path)
        if not p.is_absolute():
            p = rootp / p
        try:
            return p.read_bytes()
        except OSError as exc:
            raise FetchFailed(f"cannot fetch {uri}: {exc}") from None

    return fetch


def parse_catalog(data: bytes, uri: str) -> Catalog:
    """Parse the flat XML catalog format:

    <catalog>
      <item id="...">
        <attribute name="..." type="string|decimal">value</attribute>
      </item>
    </catalog>
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise ParseFailed(f"{uri}: {exc}") from None
    if root.tag != "catalog":
        raise ParseFailed(f"{uri}: root element is {root.tag!r}, expected 'catalog'")
    items: list[CatalogItem] = []
    seen: set[str] = set()
    for el in root:
        if el.tag != "item":
            raise ParseFailed(f"{uri}: unexpected element {el.tag!r} under catalog")
        item_id = el.get("id")
        if not item_id:
            raise ParseFailed(f"{uri}: item without id attribute")
        if item_id in seen:
            raise DuplicateItemId(f"{uri}: duplicate item id {item_id!r}")
        seen.add(item_id)
        attributes: dict[str, AttributeValue] = {}
        for attr in el:
            if attr.tag != "attribute":
                raise ParseFailed(f"{uri}: unexpected element {attr.tag!r} under item")
            name = attr.get("name")
            if not name:
                raise ParseFailed(f"{uri}: attribute without name in item {item_id!r}")
            kind = attr.get("type", "string")
            text = (attr.text or "").strip()
            if kind == "string":
                attributes[name] = text
            elif kind == "decimal":
                try:
                    attributes[name] = Decimal(text)
                except InvalidOperation:
                    raise ParseFailed(
                        f"{uri}: attribute {name!r} of item {item_id!r} is not a "
                        f"decimal: {text!r}"
                    ) from None
            else:
                raise ParseFailed(
                    f"{uri}: attribute {name!r} of item {item_id!r} has unknown "
                    f"type {kind!r}"
                )
        items.append(CatalogItem(id=item_id, attributes=attributes))
    return Catalog(uri=uri, items=tuple(items))


def load_catalog(descriptor: ElectronicCatalogDescriptor, fetcher: Fetcher) -> Catalog:
    if descriptor.schema_type not in WELL_KNOWN_SCHEMA_TYPES:
        raise UnsupportedSchemaType(
            f"schema type {descriptor.schema_type!r} is not supported"
        )
    data = fetcher(descriptor.catalog_uri)
    return parse_catalog(data, descriptor.catalog_uri)


def _as_decimal(value: AttributeValue) -> Decimal | None:
    if isinstance(value, Decimal):
        return value
    try:
        return Decimal(value)
    except InvalidOperation:
        return None


def evaluate_predicate(pred: Predicate, item: CatalogItem) -> bool:
    """One predicate against one item; a missing attribute never matches."""
    if pred.attribute not in item.attributes:
        return False
    actual = item.attributes[pred.attribute]
    if pred.op in EQUALITY_OPS:
        if isinstance(actual, Decimal) or isinstance(pred.value, Decimal):
            left = _as_decimal(actual)
            right = _as_decimal(pred.value)
            equal = left is not None and right is not None and left == right
        else:
            equal = actual == pred.value
        return equal if pred.op == "=" else not equal
    if pred.op == "contains":
        text = str(actual) if isinstance(actual, Decimal) else actual
        return pred.value in text
    # ordering operators: both sides must be decimal
    if not isinstance(actual, Decimal):
        raise TypeMismatch(
            f"attribute {pred.attribute!r} is not decimal-typed in item {item.id!r}"
        )
    if pred.op == "<":
        return actual < pred.value
    if pred.op == "<=":
        return actual <= pred.value
    if pred.op == ">":
        return actual > pred.value
    return actual >= pred.value


def execute_query(catalog: Catalog, query: CatalogQuery) -> CatalogQueryResult:
    """Conjunction of predicates; item order of the catalog is preserved."""
    matched = tuple(
        item
        for item in catalog.items
        if all(evaluate_predicate(p, item) for p in query.predicates)
    )
    return CatalogQueryResult(catalog_uri=catalog.uri, items=matched)


def _literal_value(inst: InstanceDef, prop: str) -> str | None:
    for v in inst.values_of(prop):
        if isinstance(v, Literal):
            return v.lexical
    return None


def _is_electronic_catalog(graph: OntologyGraph, class_id: str) -> bool:
    seen = set()
    frontier = [class_id]
    while frontier:
        cid = frontier.pop()
        if cid == ELECTRONIC_CATALOG:
            return True
        if cid in seen:
            continue
        seen.add(cid)
        cls = graph.classes.get(cid)
        if cls is not None:
            frontier.extend(cls.super_classes)
    return False


def extract_query_catalog(
    graph: OntologyGraph, instance: InstanceDef
) -> ElectronicCatalogDescriptor | None:
    """Follow has_Query_Catalog from a service instance to its catalog
    descriptor. Returns None when the instance advertises no catalog; raises
    MalformedDescriptor when it advertises one that is unusable."""
    targets = [v for v in instance.values_of(HAS_QUERY_CATALOG) if isinstance(v, str)]
    if not targets:
        return None
    target = graph.instances.get(targets[0])
    if target is None:
        raise MalformedDescriptor(
            f"{instance.id} references missing query catalog {targets[0]}"
        )
    # either a QueryCatalog pointing at the ElectronicCatalog via inputCatalog,
    # or the ElectronicCatalog instance directly
    catalog_inst = target
    if not _is_electronic_catalog(graph, target.class_id):
        refs = [v for v in target.values_of(INPUT_CATALOG) if isinstance(v, str)]
        if not refs:
            raise MalformedDescriptor(
                f"query catalog {target.id} carries no inputCatalog reference"
            )
        catalog_inst = graph.instances.get(refs[0])
        if catalog_inst is None:
            raise MalformedDescriptor(
                f"query catalog {target.id} references missing catalog {refs[0]}"
            )
    uri = _literal_value(catalog_inst, CATALOG_URI)
    if not uri:
        raise MalformedDescriptor(f"catalog {catalog_inst.id} carries no CatalogURI")
    schema_type = _literal_value(catalog_inst, CATALOG_SCHEMA_TYPE) or XML_GENERIC
    schema_ref = _literal_value(catalog_inst, CATALOG_SCHEMA)
    return ElectronicCatalogDescriptor(
        catalog_uri=uri, schema_type=schema_type, schema_ref=schema_ref
    )
