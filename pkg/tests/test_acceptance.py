"""Acceptance gate: the six guarantees this package ships with. One test —
and therefore one pass/fail line under `pytest -v` — per criterion, with the
stated runtime budgets enforced inside the tests themselves.

  1. shipped-taxonomy fixture queries answer exactly as documented   (< 1 s)
  2. seeded-marketplace CLI discovery end to end                     (< 2 s)
  3. reasoner and catalog engine match brute-force oracles, 200+200  (< 30 s)
  4. discovery algebra: subsumption / filter soundness / ALL-ANY, 100 cases
  5. round-trips: fragments parse, serialize-reparse equality, snapshot bytes
  6. integrity after 50 randomized register/publish/delete interleavings
"""

from __future__ import annotations

import json
import random
import time
from decimal import Decimal

import pytest

import oracles
from conftest import (
    CATALOGS,
    DOMAIN,
    registration_document,
    seed_scenario,
)
from generators import random_catalog, random_graph, random_query
from semreg.catalog import execute_query
from semreg.cli import main
from semreg.config import load_config, packaged_data_path
from semreg.errors import SemRegError, TypeMismatch
from semreg.ontology.merge import merge
from semreg.ontology.model import entities_equal
from semreg.ontology.parser import parse_document
from semreg.ontology.serializer import serialize_graph
from semreg.ontology.vocab import ADDED_VALUE, POEC, POEC_BASE
from semreg.reasoner import implementations_of, inherited_values, subclasses_of
from semreg.runtime import AppState
from semreg.registry.model import (
    MATCH_ALL,
    MATCH_ANY,
    BusinessEntity,
    BusinessService,
    CategoryBag,
    KeyedReference,
    TModel,
)
from test_reasoner import assert_graph_agrees_with_oracles

FRAGMENTS = ("service_types", "addon_properties", "tmodel_key", "catalog_service")

# generic service classes of the shipped schema that registrations may target
SERVICE_CLASSES = (
    "Sell_Computer_Service",
    "Car_Rental_Service",
    "Rent_Vehicle_Service",
    "Delivery",
    "Chauffeur",
    "Sell",
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def service_keys(discovery_set):
    return {r.service.key for r in discovery_set.results}


# --- 1: fixture queries on the shipped taxonomy ------------------------------


def test_acceptance_1_fixture_queries(poec_graph):
    start = time.perf_counter()

    rentals = subclasses_of(poec_graph, POEC + "Rent_Vehicle_Service")
    assert POEC + "Car_Rental_Service" in rentals.members
    # exact-set agreement with the independent fixpoint oracle
    assert set(rentals.members) == oracles.subclasses(
        poec_graph, POEC + "Rent_Vehicle_Service"
    )

    impls = implementations_of(poec_graph, POEC + "Rent_Vehicle_Service")
    assert {i.id for i in impls} == {POEC + "My_Car_Rental_Service"}

    car_rental = inherited_values(poec_graph, POEC + "Car_Rental_Service", ADDED_VALUE)
    car_rental_facts = {(iv.value, iv.declared_on) for iv in car_rental.values}
    assert (POEC + "Chauffeur", POEC + "Rent_Vehicle_Service") in car_rental_facts
    assert {(iv.prop, iv.value, iv.declared_on) for iv in car_rental.values} == (
        oracles.inherited(poec_graph, POEC + "Car_Rental_Service", ADDED_VALUE)
    )

    desktop = inherited_values(poec_graph, POEC + "desktop", ADDED_VALUE)
    desktop_facts = {(iv.value, iv.declared_on) for iv in desktop.values}
    assert (POEC + "scanner", POEC + "computer") in desktop_facts
    assert {(iv.prop, iv.value, iv.declared_on) for iv in desktop.values} == (
        oracles.inherited(poec_graph, POEC + "desktop", ADDED_VALUE)
    )

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"fixture queries took {elapsed:.3f}s"
    print(f"ACCEPTANCE 1: PASS - fixture queries exact ({elapsed:.3f}s)")


# --- 2: end-to-end discovery over the seeded marketplace ---------------------


def test_acceptance_2_marketplace_cli(scenario, capsys):
    assert len(scenario.state.store.businesses()) >= 8
    assert len(scenario.state.store.services()) >= 15
    assert len(CATALOGS) == 4
    for rel in CATALOGS:
        assert (scenario.data_dir / rel).is_file()

    start = time.perf_counter()
    code, out, err = run_cli(
        capsys,
        "discover", "product",
        "--class", "Sell_Computer_Service",
        "--where", "brand:=:IBM",
        "--where", "condition:=:second hand",
        "--config", scenario.config_path, "--json",
    )
    assert code == 0 and err == ""
    payload = json.loads(out)
    names = sorted(r["service"]["name"] for r in payload["results"])
    assert names == ["ByteBazaar Computer Sales", "Retro Computing Sales"]
    prices = {
        pair[1]
        for r in payload["results"]
        for pair in r["evidence"]["supporting"]
        if pair[0] == "item_price"
    }
    assert prices == {"bb-1=350", "rc-1=475"}

    code, out, err = run_cli(
        capsys,
        "discover", "complement", "--class", "Sell_Computer_Service",
        "--config", scenario.config_path, "--json",
    )
    assert code == 0 and err == ""
    payload = json.loads(out)
    assert [r["service"]["name"] for r in payload["results"]] == [
        "Capital Couriers Delivery"
    ]

    elapsed = time.perf_counter() - start
    assert elapsed < 2.0, f"marketplace queries took {elapsed:.3f}s"
    print(f"ACCEPTANCE 2: PASS - marketplace discovery exact ({elapsed:.3f}s)")


# --- 3: differential equivalence against the brute-force oracles -------------


def _run_both(catalog, query):
    try:
        got = [item.id for item in execute_query(catalog, query).items]
    except TypeMismatch:
        got = TypeMismatch
    try:
        expected = oracles.scan_catalog(catalog.items, query.predicates)
    except TypeMismatch:
        expected = TypeMismatch
    return got, expected


def test_acceptance_3_oracle_equivalence():
    start = time.perf_counter()

    for seed in range(200):
        rng = random.Random(31_000 + seed)
        graph = random_graph(rng, max_classes=15, max_instances=10)
        assert_graph_agrees_with_oracles(graph)

    for seed in range(200):
        rng = random.Random(74_000 + seed)
        catalog = random_catalog(rng, max_items=100)
        for _ in range(3):
            query = random_query(rng)
            got, expected = _run_both(catalog, query)
            assert got == expected, f"seed {seed}: {got!r} != {expected!r}"

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"differential suite took {elapsed:.3f}s"
    print(f"ACCEPTANCE 3: PASS - 200 graphs + 200 catalogs, zero mismatches ({elapsed:.1f}s)")


# --- 4: discovery algebra on randomized registry states ----------------------


def _randomize_state(scenario, rng, tag):
    """Mutate a freshly seeded marketplace into a distinct registry state."""
    state = scenario.state
    for i in range(rng.randint(1, 3)):
        cls = rng.choice(SERVICE_CLASSES)
        inst = f"Rand_{tag}_{i}"
        business = state.store.save_business(
            BusinessEntity(key="", name=f"Random Shop {tag}-{i}", contact="x@r")
        )
        doc = parse_document(registration_document(cls, inst), POEC_BASE)
        draft = BusinessService(
            key="", business_key=business.key, name=f"Random Service {tag}-{i}",
            binding_urls=("https://random.example",),
        )
        state.manager.register_semantic_service(DOMAIN, doc, draft)
    plain = [s for s in state.store.services() if not s.binding_urls]
    for victim in rng.sample(plain, k=min(len(plain), rng.randint(0, 2))):
        state.store.delete_service(victim.key)


def test_acceptance_4_discovery_algebra(tmp_path):
    cases = 0
    for state_seed in (5, 6, 7):
        rng = random.Random(state_seed)
        root = tmp_path / f"state{state_seed}"
        root.mkdir()
        scenario = seed_scenario(root)
        _randomize_state(scenario, rng, state_seed)
        manager = scenario.state.manager
        store = scenario.state.store
        graph = manager.domain(DOMAIN).schema

        # subsumption consistency: C below C' => results(C) subset results(C')
        pairs = [
            (sub, anchor)
            for anchor in sorted(graph.classes)
            for sub in subclasses_of(graph, anchor).members
            if sub != anchor
        ]
        for sub, anchor in rng.sample(pairs, k=min(14, len(pairs))):
            narrower = service_keys(manager.find_by_functionality(DOMAIN, sub))
            wider = service_keys(manager.find_by_functionality(DOMAIN, anchor))
            assert narrower <= wider, f"{sub} results escape {anchor}"
            cases += 1

        # filter soundness: product-instance answers are functionality answers
        for _ in range(10):
            generic = rng.choice(SERVICE_CLASSES)
            query = random_query(rng)
            filtered = service_keys(
                manager.find_by_product_instance(DOMAIN, generic, query)
            )
            assert filtered <= service_keys(
                manager.find_by_functionality(DOMAIN, generic)
            )
            cases += 1

        # ALL results are always contained in ANY results
        known = [
            (e.tmodel_key, e.key_value)
            for s in store.services()
            for e in s.category_bag.entries
        ]
        assert known, "randomized state lost every categorized service"
        for _ in range(10):
            filters = tuple(
                KeyedReference(key, "", value if rng.random() < 0.7 else "junk")
                for key, value in (
                    rng.choice(known) for _ in range(rng.randint(1, 3))
                )
            )
            every = {s.key for s in store.find_services(filters, MATCH_ALL)}
            some = {s.key for s in store.find_services(filters, MATCH_ANY)}
            assert every <= some
            cases += 1

    assert cases >= 100, f"property suite ran only {cases} cases"
    print(f"ACCEPTANCE 4: PASS - discovery algebra over {cases} cases, zero violations")


# --- 5: round-trips ----------------------------------------------------------

QUERY_SUITE = (
    ("discover", "functionality", "--class", "PoecService"),
    ("discover", "functionality", "--class", "Rent_Vehicle_Service"),
    ("discover", "complement", "--class", "Sell_Computer_Service"),
    ("discover", "complement", "--class", "Car_Rental_Service"),
    ("discover", "addon", "--product", "desktop"),
    ("discover", "product", "--class", "Sell_Computer_Service",
     "--where", "brand:=:IBM", "--where", "condition:=:second hand"),
    ("discover", "product", "--class", "Car_Rental_Service",
     "--where", "model:=:Chevrolet Model 1956"),
)


def test_acceptance_5_round_trips(tmp_path, capsys):
    # the four shipped schema fragments parse clean and survive
    # parse -> serialize -> parse with graph equality
    for name in FRAGMENTS:
        data = packaged_data_path(f"fragments/{name}.daml").read_bytes()
        doc = parse_document(data, POEC_BASE, source=name)
        assert doc.warnings == ()
        graph = merge([doc])
        reparsed = merge(
            [parse_document(serialize_graph(graph, POEC_BASE), POEC_BASE, source=name)]
        )
        assert entities_equal(graph, reparsed), f"{name} round-trip drifted"

    # snapshot -> restart -> identical bytes for the fixed query suite
    # (every CLI invocation bootstraps a fresh process state from disk)
    scenario = seed_scenario(tmp_path)

    def run_suite():
        outputs = []
        for argv in QUERY_SUITE:
            code, out, err = run_cli(
                capsys, *argv, "--config", scenario.config_path, "--json"
            )
            assert code == 0 and err == ""
            outputs.append(out.encode("utf-8"))
        return outputs

    before = run_suite()
    code, out, err = run_cli(capsys, "snapshot", "--config", scenario.config_path)
    assert code == 0 and "snapshot written to" in out
    after = run_suite()
    assert before == after

    print(f"ACCEPTANCE 5: PASS - fragments + serializer + {len(QUERY_SUITE)}-query snapshot bytes")


# --- 6: integrity under randomized interleavings ------------------------------


def _random_op(state, rng, i, tag):
    roll = rng.randrange(6)
    if roll == 0:
        state.store.save_business(
            BusinessEntity(key="", name=f"Biz {tag}-{i}", contact="x@biz")
        )
    elif roll == 1:
        businesses = state.store.businesses()
        business_key = (
            rng.choice(businesses).key if businesses and rng.random() < 0.8
            else "00000000-0000-0000-0000-00000000dead"
        )
        refs = ()
        if rng.random() < 0.5:
            donor = rng.choice(state.store.find_tmodels())
            refs = (KeyedReference(donor.key, donor.name, "val"),)
        state.store.save_service(
            BusinessService(
                key="", business_key=business_key, name=f"Svc {tag}-{i}",
                category_bag=CategoryBag(refs),
            )
        )
    elif roll == 2:
        state.store.save_tmodel(TModel(key="", name=f"tm-{rng.randint(0, 4)}"))
    elif roll == 3:
        cls = rng.choice(SERVICE_CLASSES + ("No_Such_Service",))
        inst = f"Rand_{tag}_{rng.randint(0, 9)}"
        businesses = state.store.businesses()
        business_key = (
            rng.choice(businesses).key if businesses and rng.random() < 0.8
            else "00000000-0000-0000-0000-00000000dead"
        )
        doc = parse_document(registration_document(cls, inst), POEC_BASE)
        draft = BusinessService(
            key="", business_key=business_key, name=f"Sem {tag}-{i}",
            binding_urls=("https://sem.example",),
        )
        state.manager.register_semantic_service(DOMAIN, doc, draft)
    elif roll == 4:
        services = state.store.services()
        key = (
            rng.choice(services).key if services and rng.random() < 0.8
            else "00000000-0000-0000-0000-00000000dead"
        )
        state.store.delete_service(key)
    else:
        tmodels = state.store.find_tmodels()
        key = (
            rng.choice(tmodels).key if rng.random() < 0.8
            else "00000000-0000-0000-0000-00000000dead"
        )
        state.store.delete_tmodel(key)


@pytest.mark.parametrize("seed", [11, 47, 83])
def test_acceptance_6_registration_integrity(tmp_path, seed):
    scenario = seed_scenario(tmp_path)
    state = scenario.state
    rng = random.Random(seed)

    performed = 0
    for i in range(50):
        try:
            _random_op(state, rng, i, seed)
        except SemRegError:
            pass  # rejected operations must leave the store untouched
        performed += 1
    assert performed == 50

    assert state.store.referential_integrity_errors() == ()
    assert state.manager.check_binding_bijection(DOMAIN) == ()

    # the persisted image reloads just as clean
    state.persist()
    reloaded = AppState.bootstrap(load_config(scenario.config_path))
    assert reloaded.store.referential_integrity_errors() == ()
    assert reloaded.manager.check_binding_bijection(DOMAIN) == ()

    print(f"ACCEPTANCE 6: PASS - 50 randomized ops (seed {seed}), integrity clean")
