"""RDF/XML parser for the supported DAML+OIL subset.

Built on xml.etree. Entity references are handled by injecting a DOCTYPE
internal subset carrying the built-in entity table; expat expands internal
entities everywhere (including attribute values) and binds the FIRST
declaration of a name, so document-local declarations take precedence simply
by appearing earlier in the subset.

Unknown elements and attributes are skipped with a warning. The only
construct-level fatal error is an rdf:parseType other than daml:collection.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET

from ..errors import UnsupportedConstructFatal, XmlMalformed
from .model import (
    ClassDef,
    InstanceDef,
    Iri,
    Literal,
    OntologyDocument,
    ParseWarning,
    PropertyAssertion,
    PropertyDef,
    Restriction,
)
from .vocab import BUILTIN_ENTITIES, DAML_NS, RDF_NS, RDFS_NS

RDF_RDF = "{%s}RDF" % RDF_NS
RDF_ID = "{%s}ID" % RDF_NS
RDF_ABOUT = "{%s}about" % RDF_NS
RDF_RESOURCE = "{%s}resource" % RDF_NS
RDF_PARSETYPE = "{%s}parseType" % RDF_NS
RDF_PROPERTY = "{%s}Property" % RDF_NS
DAML_CLASS = "{%s}Class" % DAML_NS
DAML_UNIQUE_PROPERTY = "{%s}UniqueProperty" % DAML_NS
DAML_RESTRICTION = "{%s}Restriction" % DAML_NS
DAML_ONE_OF = "{%s}oneOf" % DAML_NS
DAML_ON_PROPERTY = "{%s}onProperty" % DAML_NS
DAML_TO_CLASS = "{%s}toClass" % DAML_NS
RDFS_SUBCLASS_OF = "{%s}subClassOf" % RDFS_NS
RDFS_SUBPROPERTY_OF = "{%s}subPropertyOf" % RDFS_NS
RDFS_DOMAIN = "{%s}domain" % RDFS_NS
RDFS_RANGE = "{%s}range" % RDFS_NS

XML_ATTR_NS = "{http://www.w3.org/XML/1998/namespace}"

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_XML_DECL = re.compile(r"^\s*<\?xml[^>]*\?>")

_ID_ATTRS = frozenset({RDF_ID, "ID", RDF_ABOUT, "about"})
_REF_ATTRS = frozenset({RDF_RESOURCE, "resource"})
_PARSETYPE_ATTRS = frozenset({RDF_PARSETYPE, "parseType"})


def resolve_ref(ref: str, base: Iri) -> Iri:
    """Resolve a reference attribute value against the document base."""
    if ref.startswith("#"):
        return base + ref
    if _SCHEME.match(ref):
        return ref
    return base + "#" + ref


def _tag_iri(tag: str, base: Iri) -> Iri:
    if tag.startswith("{"):
        ns, local = tag[1:].split("}", 1)
        return ns + local
    return base + "#" + tag


def _entity_id(el: ET.Element, base: Iri) -> Iri | None:
    value = el.get(RDF_ID)
    if value is None:
        value = el.get("ID")
    if value is not None:
        return base + "#" + value
    value = el.get(RDF_ABOUT)
    if value is None:
        value = el.get("about")
    if value is not None:
        return resolve_ref(value, base)
    return None


def _resource(el: ET.Element) -> str | None:
    value = el.get(RDF_RESOURCE)
    if value is None:
        value = el.get("resource")
    return value


def _entity_declarations() -> str:
    return "".join(
        f'<!ENTITY {name} "{value}">' for name, value in BUILTIN_ENTITIES.items()
    )


def _inject_entities(text: str) -> str:
    """Add the built-in entity table to the document's DOCTYPE.

    Local declarations keep precedence because expat binds the first
    declaration of each entity name, and locals come first in the subset.
    """
    decls = _entity_declarations()
    idx = text.find("<!DOCTYPE")
    if idx == -1:
        m = _XML_DECL.match(text)
        pos = m.end() if m else 0
        return text[:pos] + "<!DOCTYPE rdf:RDF [" + decls + "]>" + text[pos:]
    open_bracket = text.find("[", idx)
    gt = text.find(">", idx)
    if gt == -1:
        return text
    if open_bracket == -1 or open_bracket > gt:
        return text[:gt] + " [" + decls + "]" + text[gt:]
    # walk to the closing ']' of the internal subset, skipping quoted values
    i = open_bracket + 1
    quote: str | None = None
    while i < len(text):
        c = text[i]
        if quote is not None:
            if c == quote:
                quote = None
        elif c in "'\"":
            quote = c
        elif c == "]":
            break
        i += 1
    if i >= len(text):
        return text
    return text[:i] + decls + text[i:]


class _DocumentBuilder:
    def __init__(self, base: Iri, source: str):
        self.base = base
        self.source = source
        self.classes: list[ClassDef] = []
        self.properties: list[PropertyDef] = []
        self.instances: list[InstanceDef] = []
        self.warnings: list[ParseWarning] = []

    def warn(self, message: str) -> None:
        self.warnings.append(ParseWarning(message))

    def build(self) -> OntologyDocument:
        return OntologyDocument(
            base=self.base,
            source=self.source,
            classes=tuple(self.classes),
            properties=tuple(self.properties),
            instances=tuple(self.instances),
            warnings=tuple(self.warnings),
        )

    def check_attrs(self, el: ET.Element, allowed: frozenset[str], context: str) -> None:
        for name in el.attrib:
            if name in allowed or name.startswith(XML_ATTR_NS):
                continue
            self.warn(f"unknown attribute {name} on {context} (skipped)")

    def parse_class(self, el: ET.Element) -> None:
        cid = _entity_id(el, self.base)
        if cid is None:
            self.warn("daml:Class without rdf:ID or rdf:about (skipped)")
            return
        self.check_attrs(el, _ID_ATTRS, f"class {cid}")
        supers: set[Iri] = set()
        restrictions: list[Restriction] = []
        one_of: tuple[Iri, ...] | None = None
        assertions: list[PropertyAssertion] = []
        for child in el:
            tag = child.tag
            if tag == RDFS_SUBCLASS_OF:
                self.check_attrs(child, _REF_ATTRS, f"subClassOf of {cid}")
                ref = _resource(child)
                if ref is not None:
                    supers.add(resolve_ref(ref, self.base))
                    continue
                nested = list(child)
                if len(nested) == 1 and nested[0].tag == DAML_RESTRICTION:
                    restriction = self.parse_restriction(nested[0], cid)
                    if restriction is not None:
                        restrictions.append(restriction)
                else:
                    self.warn(
                        f"subClassOf of {cid} carries neither a resource nor a "
                        "single daml:Restriction (skipped)"
                    )
            elif tag == DAML_ONE_OF:
                one_of = self.parse_one_of(child, cid)
            else:
                assertion = self.parse_assertion(child, f"class {cid}")
                if assertion is not None:
                    assertions.append(assertion)
        self.classes.append(
            ClassDef(
                id=cid,
                super_classes=frozenset(supers),
                restrictions=tuple(restrictions),
                one_of=one_of,
                assertions=tuple(assertions),
            )
        )

    def parse_restriction(self, el: ET.Element, owner: Iri) -> Restriction | None:
        on_property: Iri | None = None
        to_class: Iri | None = None
        for child in el:
            if child.tag == DAML_ON_PROPERTY:
                ref = _resource(child)
                if ref is not None:
                    on_property = resolve_ref(ref, self.base)
            elif child.tag == DAML_TO_CLASS:
                ref = _resource(child)
                if ref is not None:
                    to_class = resolve_ref(ref, self.base)
            else:
                self.warn(f"unknown element {child.tag} in restriction on {owner} (skipped)")
        if on_property is None or to_class is None:
            self.warn(f"incomplete daml:Restriction on {owner} (skipped)")
            return None
        return Restriction(on_property=on_property, to_class=to_class)

    def parse_one_of(self, el: ET.Element, owner: Iri) -> tuple[Iri, ...]:
        parse_type = el.get(RDF_PARSETYPE)
        if parse_type is None:
            parse_type = el.get("parseType")
        if parse_type != "daml:collection":
            raise UnsupportedConstructFatal(
                f"rdf:parseType={parse_type!r} on daml:oneOf of {owner}; "
                "only daml:collection is supported"
            )
        self.check_attrs(el, _PARSETYPE_ATTRS, f"oneOf of {owner}")
        members: list[Iri] = []
        for child in el:
            inst = self.parse_instance(child)
            if inst is not None:
                members.append(inst.id)
        return tuple(members)

    def parse_property(self, el: ET.Element, unique: bool) -> None:
        kind = "daml:UniqueProperty" if unique else "rdf:Property"
        pid = _entity_id(el, self.base)
        if pid is None:
            self.warn(f"{kind} without rdf:ID or rdf:about (skipped)")
            return
        self.check_attrs(el, _ID_ATTRS, f"property {pid}")
        domain: Iri | None = None
        range_: Iri | None = None
        supers: set[Iri] = set()
        for child in el:
            tag = child.tag
            ref = _resource(child)
            if tag == RDFS_SUBPROPERTY_OF and ref is not None:
                supers.add(resolve_ref(ref, self.base))
            elif tag == RDFS_DOMAIN and ref is not None:
                if domain is not None:
                    self.warn(f"duplicate rdfs:domain on {pid} (first wins)")
                    continue
                domain = resolve_ref(ref, self.base)
            elif tag == RDFS_RANGE and ref is not None:
                if range_ is not None:
                    self.warn(f"duplicate rdfs:range on {pid} (first wins)")
                    continue
                range_ = resolve_ref(ref, self.base)
            else:
                self.warn(f"unknown element {tag} on property {pid} (skipped)")
        self.properties.append(
            PropertyDef(
                id=pid,
                domain=domain,
                range=range_,
                super_properties=frozenset(supers),
                unique=unique,
            )
        )

    def parse_instance(self, el: ET.Element) -> InstanceDef | None:
        class_id = _tag_iri(el.tag, self.base)
        iid = _entity_id(el, self.base)
        if iid is None:
            self.warn(f"typed element {class_id} without identifier (skipped)")
            return None
        self.check_attrs(el, _ID_ATTRS, f"instance {iid}")
        assertions = []
        for child in el:
            assertion = self.parse_assertion(child, f"instance {iid}")
            if assertion is not None:
                assertions.append(assertion)
        inst = InstanceDef(id=iid, class_id=class_id, assertions=tuple(assertions))
        self.instances.append(inst)
        return inst

    def parse_assertion(self, el: ET.Element, context: str) -> PropertyAssertion | None:
        prop = _tag_iri(el.tag, self.base)
        ref = _resource(el)
        if ref is not None:
            self.check_attrs(el, _REF_ATTRS, f"{prop} in {context}")
            return PropertyAssertion(prop=prop, value=resolve_ref(ref, self.base))
        if len(el) > 0:
            self.warn(f"nested element under {prop} in {context} (skipped)")
            return None
        text = (el.text or "").strip()
        if text:
            return PropertyAssertion(prop=prop, value=Literal(lexical=text))
        self.warn(f"unknown element {prop} in {context} (skipped)")
        return None


def parse_document(data: bytes | str, base: Iri, source: str | None = None) -> OntologyDocument:
    """Parse one RDF/XML document into an OntologyDocument.

    `base` resolves rdf:ID and relative references; `source` labels
    provenance (defaults to the base IRI).
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise XmlMalformed(f"document is not valid UTF-8: {exc}") from None
    else:
        text = data
    base = base.rstrip("#")
    builder = _DocumentBuilder(base, source if source is not None else base)
    try:
        root = ET.fromstring(_inject_entities(text))
    except ET.ParseError as exc:
        line, column = getattr(exc, "position", (0, 0))
        raise XmlMalformed(str(exc), line, column) from None
    if root.tag != RDF_RDF:
        builder.warn(f"root element {root.tag} is not rdf:RDF; document treated as empty")
        return builder.build()
    for child in root:
        tag = child.tag
        if tag == DAML_CLASS:
            builder.parse_class(child)
        elif tag == RDF_PROPERTY:
            builder.parse_property(child, unique=False)
        elif tag == DAML_UNIQUE_PROPERTY:
            builder.parse_property(child, unique=True)
        else:
            builder.parse_instance(child)
    return builder.build()
