"""Shared fixtures: parsed base ontologies, a fully seeded marketplace
scenario on disk, and document-building helpers."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path

import pytest

from semreg.config import load_config, packaged_data_path
from semreg.ontology.merge import merge
from semreg.ontology.parser import parse_document
from semreg.ontology.vocab import POEC_BASE
from semreg.registry.model import BusinessEntity, BusinessService, CategoryBag, KeyedReference
from semreg.registry.store import RegistryStore
from semreg.registry.taxonomy import GEOGRAPHY, UNSPSC, builtin_taxonomies
from semreg.runtime import AppState

DOMAIN = "poec"

DOC_HEADER = (
    '<?xml version="1.0" encoding="UTF-8"?>\n'
    "<rdf:RDF\n"
    '    xmlns="http://example.org/poec#"\n'
    '    xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"\n'
    '    xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"\n'
    '    xmlns:daml="http://www.daml.org/2001/03/daml+oil#"\n'
    '    xmlns:profile="http://www.daml.org/services/daml-s/2001/05/Profile.daml#">\n'
)


def daml_document(body: str) -> bytes:
    return (DOC_HEADER + body + "\n</rdf:RDF>\n").encode("utf-8")


def registration_document(cls: str, inst: str, catalog_uri: str | None = None) -> bytes:
    """An advertisement: one Implementation instance of cls, optionally wired
    to an electronic catalog through a generic QueryCatalog instance."""
    body = f'\n<{cls} rdf:ID="{inst}">\n  <profile:serviceType rdf:resource="#Implementation"/>\n'
    if catalog_uri is not None:
        body += f'  <has_Query_Catalog rdf:resource="#{inst}_Query"/>\n'
    body += f"</{cls}>\n"
    if catalog_uri is not None:
        body += (
            f'\n<QueryCatalog rdf:ID="{inst}_Query">\n'
            '  <profile:serviceType rdf:resource="#Generic"/>\n'
            f'  <inputCatalog rdf:resource="#{inst}_Catalog"/>\n'
            "</QueryCatalog>\n"
            f'\n<ElectronicCatalog rdf:ID="{inst}_Catalog">\n'
            f"  <CatalogURI>{catalog_uri}</CatalogURI>\n"
            "  <CatalogSchemaType>xml-generic</CatalogSchemaType>\n"
            "</ElectronicCatalog>\n"
        )
    return daml_document(body)


def catalog_xml(items) -> bytes:
    """Flat catalog XML from [(item_id, {attribute: value})]; Decimal values
    become decimal-typed attributes, strings stay strings."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<catalog>"]
    for item_id, attrs in items:
        lines.append(f'  <item id="{item_id}">')
        for name, value in attrs.items():
            kind = "decimal" if isinstance(value, Decimal) else "string"
            lines.append(f'    <attribute name="{name}" type="{kind}">{value}</attribute>')
        lines.append("  </item>")
    lines.append("</catalog>")
    return "\n".join(lines).encode("utf-8")


@pytest.fixture(scope="session", autouse=True)
def _clean_environment():
    """Environment overrides would redirect every bootstrap in the suite."""
    saved = {}
    for name in ("SEMREG_LISTEN", "SEMREG_DATA_DIR", "SEMREG_TOKEN"):
        if name in os.environ:
            saved[name] = os.environ.pop(name)
    yield
    os.environ.update(saved)


# --- parsed base ontologies ---------------------------------------------------


@pytest.fixture(scope="session")
def upper_doc():
    path = packaged_data_path("upper_ontology.daml")
    return parse_document(path.read_bytes(), POEC_BASE, source="upper")


@pytest.fixture(scope="session")
def taxonomy_doc():
    path = packaged_data_path("example_taxonomy.daml")
    return parse_document(path.read_bytes(), POEC_BASE, source="taxonomy")


@pytest.fixture(scope="session")
def poec_graph(upper_doc, taxonomy_doc):
    return merge([upper_doc, taxonomy_doc])


@pytest.fixture
def store():
    s = RegistryStore()
    for taxonomy in builtin_taxonomies():
        s.register_taxonomy(taxonomy)
    return s


@pytest.fixture
def fresh_state(tmp_path):
    """An empty bootstrapped application in its own data directory."""
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"data_dir": str(tmp_path / "data")}), "utf-8")
    return AppState.bootstrap(load_config(config_path))


# --- the seeded marketplace ----------------------------------------------------


@dataclass
class Scenario:
    config_path: str
    data_dir: Path
    state: AppState
    businesses: dict = field(default_factory=dict)  # name -> key
    services: dict = field(default_factory=dict)  # name -> key


CATALOGS = {
    "catalogs/bytebazaar.xml": [
        ("bb-1", {"brand": "IBM", "condition": "second hand", "price": Decimal("350")}),
        ("bb-2", {"brand": "IBM", "condition": "new", "price": Decimal("900")}),
        ("bb-3", {"brand": "Dell", "condition": "second hand", "price": Decimal("280")}),
    ],
    "catalogs/retro.xml": [
        ("rc-1", {"brand": "IBM", "condition": "second hand", "price": Decimal("475")}),
        ("rc-2", {"brand": "Compaq", "condition": "second hand", "price": Decimal("150")}),
    ],
    "catalogs/freshsilicon.xml": [
        ("fs-1", {"brand": "IBM", "condition": "new", "price": Decimal("1100")}),
        ("fs-2", {"brand": "Dell", "condition": "second hand", "price": Decimal("320")}),
    ],
    "catalogs/classiccars.xml": [
        ("cc-1", {"model": "Chevrolet Model 1956", "price": Decimal("120")}),
        ("cc-2", {"model": "Ford Model T", "price": Decimal("95")}),
    ],
}

# (business, contact, geography code or None)
BUSINESSES = [
    ("Byte Bazaar", "sales@bytebazaar.example", "TR-06"),
    ("Retro Computing", "hello@retrocomputing.example", "TR-34"),
    ("Fresh Silicon", "contact@freshsilicon.example", "TR-06"),
    ("Bulk Office", "orders@bulkoffice.example", None),
    ("Capital Couriers", "dispatch@capitalcouriers.example", "TR-06"),
    ("Classic Car Rentals", "desk@classiccars.example", "TR-34"),
    ("City Car Rentals", "fleet@citycars.example", "TR-06"),
    ("Prime Chauffeurs", "booking@primechauffeurs.example", None),
    ("Anatolia Rentals", "info@anatolia.example", "TR-35"),
]

# (service name, business, generic class, instance id, catalog uri or None)
SEMANTIC_SERVICES = [
    ("ByteBazaar Computer Sales", "Byte Bazaar", "Sell_Computer_Service",
     "ByteBazaar_Sales", "catalogs/bytebazaar.xml"),
    ("Retro Computing Sales", "Retro Computing", "Sell_Computer_Service",
     "Retro_Sales", "catalogs/retro.xml"),
    ("Fresh Silicon Sales", "Fresh Silicon", "Sell_Computer_Service",
     "Fresh_Silicon_Sales", "catalogs/freshsilicon.xml"),
    ("Bulk Office Sales", "Bulk Office", "Sell_Computer_Service",
     "Bulk_Office_Sales", None),
    ("Capital Couriers Delivery", "Capital Couriers", "Delivery",
     "Capital_Couriers_Delivery", None),
    ("Classic Car Rentals", "Classic Car Rentals", "Car_Rental_Service",
     "Classic_Car_Rental_Service", "catalogs/classiccars.xml"),
    ("City Car Rentals", "City Car Rentals", "Rent_Vehicle_Service",
     "City_Car_Rentals_Service", None),
    ("Prime Chauffeurs", "Prime Chauffeurs", "Chauffeur",
     "Prime_Chauffeurs_Service", None),
    ("Anatolia Car Rental", "Anatolia Rentals", "Car_Rental_Service",
     "My_Car_Rental_Service", None),
]

# (service name, business, unspsc code or None, geography code or None)
PLAIN_SERVICES = [
    ("ByteBazaar Scanner Sales", "Byte Bazaar", "43211711", "TR-06"),
    ("Retro Printer Sales", "Retro Computing", "43212110", None),
    ("Fresh Silicon Desktop Outlet", "Fresh Silicon", "43211507", "TR-06"),
    ("Bulk Office Mail Room", "Bulk Office", None, "TR-34"),
    ("Capital Couriers Freight", "Capital Couriers", "78101803", None),
    ("City Fleet Hire", "City Car Rentals", "78111803", None),
]


def seed_scenario(root: Path) -> Scenario:
    """Build the marketplace into root: write the config and the catalog
    files, bootstrap, publish 9 businesses and 15 services (9 of them with
    ontology advertisements), and persist everything."""
    data_dir = root / "data"
    config_path = root / "config.json"
    config_path.write_text(json.dumps({"data_dir": str(data_dir)}), "utf-8")
    state = AppState.bootstrap(load_config(config_path))

    for rel, items in CATALOGS.items():
        path = data_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(catalog_xml(items))

    geo_key = state.store.taxonomy_key(GEOGRAPHY)
    unspsc_key = state.store.taxonomy_key(UNSPSC)
    scenario = Scenario(config_path=str(config_path), data_dir=data_dir, state=state)

    for name, contact, geo in BUSINESSES:
        bag = CategoryBag((KeyedReference(geo_key, GEOGRAPHY, geo),) if geo else ())
        saved = state.store.save_business(
            BusinessEntity(key="", name=name, contact=contact, category_bag=bag)
        )
        scenario.businesses[name] = saved.key

    for name, business, cls, inst, catalog_uri in SEMANTIC_SERVICES:
        doc = parse_document(
            registration_document(cls, inst, catalog_uri), POEC_BASE, source=name
        )
        draft = BusinessService(
            key="",
            business_key=scenario.businesses[business],
            name=name,
            binding_urls=(f"https://{business.lower().replace(' ', '')}.example/api",),
        )
        service, _ = state.manager.register_semantic_service(DOMAIN, doc, draft)
        scenario.services[name] = service.key

    for name, business, code, geo in PLAIN_SERVICES:
        refs = []
        if code:
            refs.append(KeyedReference(unspsc_key, UNSPSC, code))
        if geo:
            refs.append(KeyedReference(geo_key, GEOGRAPHY, geo))
        saved = state.store.save_service(
            BusinessService(
                key="",
                business_key=scenario.businesses[business],
                name=name,
                binding_urls=(),
                category_bag=CategoryBag(tuple(refs)),
            )
        )
        scenario.services[name] = saved.key

    state.persist()
    return scenario


@pytest.fixture(scope="session")
def scenario(tmp_path_factory) -> Scenario:
    """Session-wide seeded marketplace. Tests must treat it as read-only;
    mutation tests build their own state (fresh_state or seed_scenario)."""
    return seed_scenario(tmp_path_factory.mktemp("scenario"))
