"""Closure and inheritance queries over ontology graphs.

Traversal order everywhere is breadth-first with (depth, lexicographic)
tie-breaking, so results are deterministic for a given graph.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping

from .errors import UnknownClass, UnknownProperty
from .ontology.model import InstanceDef, Iri, OntologyGraph, Value
from .ontology.vocab import IMPLEMENTATION, SERVICE_TYPE


@dataclass(frozen=True)
class ClosureResult:
    root: Iri
    members: tuple[Iri, ...]
    externals: tuple[Iri, ...] = ()


def _bfs(start: Iri, edges: Mapping[Iri, list[Iri]]) -> tuple[Iri, ...]:
    visited = {start}
    order: list[Iri] = []
    frontier = [start]
    while frontier:
        nxt: list[Iri] = []
        for node in frontier:
            for succ in edges.get(node, ()):
                if succ not in visited:
                    visited.add(succ)
                    nxt.append(succ)
        nxt = sorted(set(nxt))
        order.extend(nxt)
        frontier = nxt
    return tuple(order)


def subclasses_of(
    graph: OntologyGraph, class_id: Iri, reflexive: bool = False
) -> ClosureResult:
    """All transitive subclasses of class_id; the root itself is included
    only when reflexive is set."""
    if class_id not in graph.classes:
        raise UnknownClass(class_id)
    children: dict[Iri, list[Iri]] = defaultdict(list)
    for cid, cls in graph.classes.items():
        for sup in cls.super_classes:
            children[sup].append(cid)
    members = _bfs(class_id, children)
    if reflexive:
        members = (class_id,) + members
    return ClosureResult(root=class_id, members=members)


def superclasses_of(
    graph: OntologyGraph, class_id: Iri, reflexive: bool = False
) -> ClosureResult:
    """All transitive superclasses within the graph; references leading out of
    the graph are collected in externals rather than traversed."""
    if class_id not in graph.classes:
        raise UnknownClass(class_id)
    visited = {class_id}
    members: list[Iri] = [class_id] if reflexive else []
    externals: set[Iri] = set()
    frontier = [class_id]
    while frontier:
        nxt: list[Iri] = []
        for node in frontier:
            cls = graph.classes.get(node)
            if cls is None:
                continue
            for sup in cls.super_classes:
                if sup in visited:
                    continue
                if sup in graph.classes:
                    visited.add(sup)
                    nxt.append(sup)
                else:
                    externals.add(sup)
        nxt = sorted(set(nxt))
        members.extend(nxt)
        frontier = nxt
    return ClosureResult(
        root=class_id, members=tuple(members), externals=tuple(sorted(externals))
    )


def subproperties_of(graph: OntologyGraph, prop: Iri) -> ClosureResult:
    """All transitive subproperties of prop, excluding prop itself."""
    if prop not in graph.properties:
        raise UnknownProperty(prop)
    children: dict[Iri, list[Iri]] = defaultdict(list)
    for pid, p in graph.properties.items():
        for sup in p.super_properties:
            children[sup].append(pid)
    return ClosureResult(root=prop, members=_bfs(prop, children))


def is_implementation(inst: InstanceDef) -> bool:
    """An instance counts as an Implementation unless it explicitly carries a
    serviceType assertion naming something else."""
    values = inst.values_of(SERVICE_TYPE)
    if not values:
        return True
    return any(v == IMPLEMENTATION for v in values if isinstance(v, str))


def implementations_of(graph: OntologyGraph, generic: Iri) -> tuple[InstanceDef, ...]:
    """Implementation instances of the generic class or any subclass, sorted by id."""
    if generic not in graph.classes:
        raise UnknownClass(generic)
    class_ids = {generic} | set(subclasses_of(graph, generic).members)
    return tuple(
        inst
        for iid, inst in sorted(graph.instances.items())
        if inst.class_id in class_ids and is_implementation(inst)
    )


@dataclass(frozen=True)
class InheritedValue:
    value: Value
    prop: Iri
    declared_on: Iri


@dataclass(frozen=True)
class InheritedValueSet:
    anchor: Iri
    prop: Iri
    values: tuple[InheritedValue, ...]


def inherited_values(graph: OntologyGraph, anchor: Iri, prop: Iri) -> InheritedValueSet:
    """Values of prop (or any subproperty) asserted on anchor or inherited
    from its superclasses, nearest declaration first, with provenance."""
    if anchor not in graph.classes:
        raise UnknownClass(anchor)
    if prop not in graph.properties:
        raise UnknownProperty(prop)
    props = {prop} | set(subproperties_of(graph, prop).members)
    chain = [anchor] + list(superclasses_of(graph, anchor).members)
    collected: list[InheritedValue] = []
    seen: set[tuple] = set()
    for cid in chain:
        cls = graph.classes.get(cid)
        if cls is None:
            continue
        for a in cls.assertions:
            if a.prop in props:
                key = (a.prop, a.value, cid)
                if key in seen:
                    continue
                seen.add(key)
                collected.append(InheritedValue(value=a.value, prop=a.prop, declared_on=cid))
    return InheritedValueSet(anchor=anchor, prop=prop, values=tuple(collected))
