"""Serialization round-trips: parse -> serialize -> parse preserves the graph,
and equal graphs render to identical bytes."""

from __future__ import annotations

import pytest

from conftest import daml_document
from semreg.config import packaged_data_path
from semreg.ontology.merge import merge
from semreg.ontology.model import entities_equal
from semreg.ontology.parser import parse_document
from semreg.ontology.serializer import serialize_graph
from semreg.ontology.vocab import POEC, POEC_BASE

FIXTURES = [
    "upper_ontology.daml",
    "example_taxonomy.daml",
    "fragments/service_types.daml",
    "fragments/addon_properties.daml",
    "fragments/tmodel_key.daml",
    "fragments/catalog_service.daml",
]


def roundtrip(graph):
    data = serialize_graph(graph, POEC_BASE)
    return merge([parse_document(data, POEC_BASE, source="roundtrip")]), data


@pytest.mark.parametrize("relpath", FIXTURES)
def test_fixture_roundtrip_preserves_graph(relpath):
    doc = parse_document(
        packaged_data_path(relpath).read_bytes(), POEC_BASE, source=relpath
    )
    graph = merge([doc])
    reparsed, _ = roundtrip(graph)
    assert entities_equal(graph, reparsed)


@pytest.mark.parametrize("relpath", FIXTURES)
def test_fixture_serialization_is_byte_stable(relpath):
    doc = parse_document(
        packaged_data_path(relpath).read_bytes(), POEC_BASE, source=relpath
    )
    graph = merge([doc])
    first = serialize_graph(graph, POEC_BASE)
    reparsed = merge([parse_document(first, POEC_BASE, source="again")])
    second = serialize_graph(reparsed, POEC_BASE)
    assert first == second


def test_combined_schema_roundtrip(poec_graph):
    reparsed, data = roundtrip(poec_graph)
    assert entities_equal(poec_graph, reparsed)
    # twice more for stability
    assert serialize_graph(reparsed, POEC_BASE) == data


def test_reparse_warnings_are_empty(poec_graph):
    data = serialize_graph(poec_graph, POEC_BASE)
    doc = parse_document(data, POEC_BASE, source="again")
    assert doc.warnings == ()


def test_foreign_namespace_gets_generated_prefix():
    doc = parse_document(
        daml_document(
            '<Widget rdf:ID="w"><profile:serviceType rdf:resource="#Implementation"/></Widget>'
        ),
        POEC_BASE,
    )
    graph = merge([doc])
    data = serialize_graph(graph, POEC_BASE)
    text = data.decode("utf-8")
    assert 'xmlns:ns1="http://www.daml.org/services/daml-s/2001/05/Profile.daml#"' in text
    assert "<ns1:serviceType" in text or 'ns1:serviceType rdf:resource' in text
    reparsed = merge([parse_document(data, POEC_BASE, source="again")])
    assert entities_equal(graph, reparsed)


def test_literal_values_are_escaped():
    doc = parse_document(
        daml_document('<Widget rdf:ID="w"><label>a &amp; b &lt; c</label></Widget>'),
        POEC_BASE,
    )
    graph = merge([doc])
    reparsed, _ = roundtrip(graph)
    assert entities_equal(graph, reparsed)
    (inst,) = reparsed.instances.values()
    assert inst.assertions[0].value.lexical == "a & b < c"


def test_external_id_uses_rdf_about():
    doc = parse_document(
        daml_document('<daml:Class rdf:about="http://other.example/ns#A"/>'),
        POEC_BASE,
    )
    graph = merge([doc])
    data = serialize_graph(graph, POEC_BASE)
    assert b'rdf:about="http://other.example/ns#A"' in data
    reparsed, _ = roundtrip(graph)
    assert entities_equal(graph, reparsed)


def test_one_of_members_render_inside_the_enumeration(poec_graph):
    data = serialize_graph(poec_graph, POEC_BASE).decode("utf-8")
    # Generic/Implementation appear exactly once, inside the oneOf collection
    assert data.count('rdf:ID="Generic"') == 1
    assert data.count('rdf:ID="Implementation"') == 1
    one_of_start = data.index('<daml:oneOf rdf:parseType="daml:collection">')
    one_of_end = data.index("</daml:oneOf>")
    assert one_of_start < data.index('rdf:ID="Generic"') < one_of_end


def test_equal_graphs_from_different_document_orders_serialize_identically(
    upper_doc, taxonomy_doc
):
    a = serialize_graph(merge([upper_doc, taxonomy_doc]), POEC_BASE)
    b = serialize_graph(merge([taxonomy_doc, upper_doc]), POEC_BASE)
    assert a == b
