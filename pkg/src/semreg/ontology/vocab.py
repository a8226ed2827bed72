"""Well-known IRIs, XML namespaces, and the built-in entity table."""

from __future__ import annotations

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
DAML_DOC = "http://www.daml.org/2001/03/daml+oil"
DAML_NS = DAML_DOC + "#"
XSD_DOC = "http://www.w3.org/2000/10/XMLSchema"
XSD_NS = XSD_DOC + "#"
PROFILE_DOC = "http://www.daml.org/services/daml-s/2001/05/Profile.daml"
PROFILE_NS = PROFILE_DOC + "#"
SERVICE_DOC = "http://www.daml.org/services/daml-s/2001/05/Service.daml"
SERVICE_NS = SERVICE_DOC + "#"

POEC_BASE = "http://example.org/poec"
POEC = POEC_BASE + "#"

# Entity table applied to every parsed document; a document-local declaration
# of the same name wins over the built-in.
BUILTIN_ENTITIES: dict[str, str] = {
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "daml": DAML_DOC,
    "xsd": XSD_DOC,
    "profile": PROFILE_DOC,
    "service": SERVICE_DOC,
    "poec": POEC,
}

# Namespaces whose members are accepted as externally defined references.
EXTERNAL_NAMESPACES = (
    RDF_NS,
    RDFS_NS,
    DAML_NS,
    XSD_NS,
    PROFILE_NS,
    SERVICE_NS,
)

# Bare document IRIs that may be referenced without a fragment part.
EXTERNAL_DOCS = frozenset({DAML_DOC, XSD_DOC, PROFILE_DOC, SERVICE_DOC})

DAML_THING = DAML_NS + "Thing"
RDFS_RESOURCE = RDFS_NS + "Resource"
XSD_DECIMAL = XSD_NS + "decimal"
XSD_STRING = XSD_NS + "string"

SERVICE_TYPE = PROFILE_NS + "serviceType"
PROFILE_INPUT = PROFILE_NS + "input"
PROFILE_OUTPUT = PROFILE_NS + "output"
SERVICE_PROFILE = SERVICE_NS + "ServiceProfile"

# Core upper-ontology terms the discovery layer depends on.
PRODUCT = POEC + "Product"
PHYSICAL_PRODUCT = POEC + "Physical_Product"
VIRTUAL_PRODUCT = POEC + "Virtual_Product"
POEC_SERVICE = POEC + "PoecService"
SERVICE_TYPES = POEC + "ServiceTypes"
GENERIC = POEC + "Generic"
IMPLEMENTATION = POEC + "Implementation"
ADDED_VALUE = POEC + "Added_Value"
ADD_ON_TO = POEC + "AddOn_To"
UNSPSC_CODE = POEC + "unspscCode"
SERVICE_PARAMETERS = POEC + "serviceParameters"
HAS_QUERY_CATALOG = POEC + "has_Query_Catalog"
ELECTRONIC_CATALOG = POEC + "ElectronicCatalog"
QUERY_CATALOG = POEC + "QueryCatalog"
CATALOG_URI = POEC + "CatalogURI"
CATALOG_SCHEMA = POEC + "CatalogSchema"
CATALOG_SCHEMA_TYPE = POEC + "CatalogSchemaType"
INPUT_CATALOG = POEC + "inputCatalog"
INPUT_QUERY = POEC + "inputQuery"
QUERY_RESULT = POEC + "QueryResult"
TMODEL_KEY = POEC + "tModelKey"


def is_external(iri: str) -> bool:
    return iri in EXTERNAL_DOCS or iri.startswith(EXTERNAL_NAMESPACES)


def local_name(iri: str) -> str:
    """Fragment or last path segment of an IRI."""
    if "#" in iri:
        return iri.rsplit("#", 1)[1]
    return iri.rstrip("/").rsplit("/", 1)[-1]


def namespace_of(iri: str) -> str:
    """Everything up to and including the last '#' or '/'."""
    if "#" in iri:
        return iri.rsplit("#", 1)[0] + "#"
    if "/" in iri:
        return iri.rsplit("/", 1)[0] + "/"
    return ""
