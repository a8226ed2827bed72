"""Semantic discovery: the bridge between domain ontologies and the registry.

Each domain keeps a combined schema graph (upper ontology + taxonomy + every
registered instance document) and a binding map pairing ontology entities
with tModel keys. Bindings are also written INTO the schema as tModelKey
assertions, so a restored schema document is enough to rebuild the map.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .catalog import (
    CatalogQuery,
    Fetcher,
    extract_query_catalog,
    file_fetcher,
    load_catalog,
    execute_query,
)
from .errors import (
    ConfigError,
    ConflictingDefinition,
    CyclicHierarchy,
    DuplicateItemId,
    FetchFailed,
    InvalidInstanceDocument,
    MalformedDescriptor,
    OntologyMergeConflict,
    ParseFailed,
    SemRegError,
    TypeMismatch,
    UnknownClass,
    UnknownDomain,
    UnknownGenericClass,
    UnsupportedSchemaType,
)
from .ontology.model import (
    Literal,
    OntologyDocument,
    OntologyGraph,
    PropertyAssertion,
)
from .ontology.merge import merge, validate
from .ontology.serializer import serialize_graph
from .ontology.vocab import (
    ADD_ON_TO,
    ADDED_VALUE,
    POEC_SERVICE,
    TMODEL_KEY,
    UNSPSC_CODE,
    local_name,
)
from .reasoner import (
    implementations_of,
    inherited_values,
    is_implementation,
    subclasses_of,
    subproperties_of,
    superclasses_of,
)
from .registry.model import (
    MATCH_ANY,
    BusinessService,
    CategoryBag,
    KeyedReference,
    TModel,
)
from .registry.store import RegistryStore
from .registry.taxonomy import DAML_SPEC, UDDI_TYPES, UNSPSC

KIND_SCHEMA = "DomainSchema"
KIND_GENERIC = "GenericClass"
KIND_IMPLEMENTATION = "ImplementationInstance"


def key_to_decimal(key: str) -> str:
    """UUID key -> decimal rendering stored in tModelKey assertions."""
    return str(uuid.UUID(key).int)


def decimal_to_key(dec: str) -> str:
    return str(uuid.UUID(int=int(dec)))


@dataclass(frozen=True)
class SemanticBinding:
    entity: str
    tmodel_key: str
    kind: str


@dataclass(frozen=True)
class Evidence:
    generic_class: str
    via: str  # functionality | complement | addon_product | product_instance
    supporting: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class DiscoveryResult:
    service: BusinessService
    evidence: Evidence


@dataclass(frozen=True)
class DiscoverySet:
    results: tuple[DiscoveryResult, ...] = ()
    warnings: tuple[str, ...] = ()


class Domain:
    def __init__(
        self,
        identifier: str,
        base: str,
        documents: tuple[OntologyDocument, ...],
        schema: OntologyGraph,
        schema_tmodel_key: str,
    ):
        self.identifier = identifier
        self.base = base
        self.documents = documents
        self.schema = schema
        self.schema_tmodel_key = schema_tmodel_key
        self.bindings: dict[str, SemanticBinding] = {}
        self.lock = threading.RLock()


class DiscoveryManager:
    def __init__(
        self,
        store: RegistryStore,
        fetcher: Fetcher | None = None,
        document_dir: str | Path | None = None,
    ):
        self.store = store
        self.fetcher = fetcher if fetcher is not None else file_fetcher(Path.cwd())
        self.document_dir = Path(document_dir) if document_dir is not None else None
        self._domains: dict[str, Domain] = {}
        self._lock = threading.RLock()

    # --- domains ---

    def domain(self, identifier: str) -> Domain:
        with self._lock:
            dom = self._domains.get(identifier)
            if dom is None:
                raise UnknownDomain(identifier)
            return dom

    def domains(self) -> tuple[str, ...]:
        with self._lock:
            return tuple(sorted(self._domains))

    def _doc_url(self, identifier: str, relpath: str) -> str:
        if self.document_dir is not None:
            return (self.document_dir / identifier / relpath).resolve().as_uri()
        return f"urn:semreg:{identifier}:{relpath}"

    def _damlspec_bag(self) -> CategoryBag:
        key = self.store.taxonomy_key(UDDI_TYPES)
        return CategoryBag((KeyedReference(key, UDDI_TYPES, DAML_SPEC),))

    def add_domain(
        self,
        identifier: str,
        documents: Sequence[OntologyDocument],
        base: str | None = None,
    ) -> Domain:
        """Install a domain from its ontology documents. Rebuilds the binding
        map from tModelKey assertions found in the documents, so restoring
        from a persisted schema document is the same call."""
        if not documents:
            raise ConfigError(f"domain {identifier}: no ontology documents")
        with self._lock:
            if identifier in self._domains:
                raise ConfigError(f"domain {identifier} already exists")
            domain_base = base if base is not None else documents[0].base
            graph = merge(list(documents))
            report = validate(graph)
            if not report.ok():
                first = report.errors[0]
                raise ConfigError(
                    f"domain {identifier}: ontology validation failed: "
                    f"{first.code} on {first.entity}: {first.message} "
                    f"({len(report.errors)} error(s))"
                )
            schema_tmodel = self.store.save_tmodel(
                TModel(
                    key="",
                    name=f"{identifier}-ontology",
                    overview_doc=self._doc_url(identifier, "schema.daml"),
                    category_bag=self._damlspec_bag(),
                )
            )
            dom = Domain(
                identifier=identifier,
                base=domain_base,
                documents=tuple(documents),
                schema=graph,
                schema_tmodel_key=schema_tmodel.key,
            )
            dom.bindings[domain_base] = SemanticBinding(
                domain_base, schema_tmodel.key, KIND_SCHEMA
            )
            self.store.pin_tmodel(schema_tmodel.key, f"domain {identifier} schema")
            self._rebuild_bindings(dom)
            self._domains[identifier] = dom
            return dom

    def _pin(self, binding: SemanticBinding, identifier: str) -> None:
        try:
            self.store.pin_tmodel(
                binding.tmodel_key, f"domain {identifier} binding for {binding.entity}"
            )
        except SemRegError:
            pass  # a missing tModel is reported by check_binding_bijection

    def _rebuild_bindings(self, dom: Domain) -> None:
        def record(entity: str, value, kind: str) -> None:
            if not isinstance(value, Literal):
                return
            try:
                key = decimal_to_key(value.lexical)
            except (ValueError, OverflowError):
                return
            binding = SemanticBinding(entity, key, kind)
            dom.bindings[entity] = binding
            self._pin(binding, dom.identifier)

        for cid, cls in dom.schema.classes.items():
            for a in cls.assertions:
                if a.prop == TMODEL_KEY:
                    record(cid, a.value, KIND_GENERIC)
        for iid, inst in dom.schema.instances.items():
            for a in inst.assertions:
                if a.prop == TMODEL_KEY:
                    record(iid, a.value, KIND_IMPLEMENTATION)

    def _with_bound_keys(self, doc: OntologyDocument, dom: Domain) -> OntologyDocument:
        """Inject recorded tModelKey assertions into entities of doc that are
        already bound. The schema keeps those assertions once an entity is
        bound, so a re-registration of the same advertisement (which arrives
        without them) would otherwise conflict instead of collapsing."""

        def injected(entity, kind):
            binding = dom.bindings.get(entity.id)
            if (
                binding is None
                or binding.kind != kind
                or any(a.prop == TMODEL_KEY for a in entity.assertions)
            ):
                return entity
            # parse-level form: documents carry untyped text literals, and the
            # merge retypes them against the property range afterwards
            assertion = PropertyAssertion(
                TMODEL_KEY, Literal(key_to_decimal(binding.tmodel_key), "string")
            )
            return replace(entity, assertions=entity.assertions + (assertion,))

        classes = tuple(injected(c, KIND_GENERIC) for c in doc.classes)
        instances = tuple(injected(i, KIND_IMPLEMENTATION) for i in doc.instances)
        if classes == doc.classes and instances == doc.instances:
            return doc
        return replace(doc, classes=classes, instances=instances)

    def _apply_bindings(self, graph: OntologyGraph, dom: Domain) -> OntologyGraph:
        for binding in dom.bindings.values():
            assertion = PropertyAssertion(
                TMODEL_KEY, Literal(key_to_decimal(binding.tmodel_key), "decimal")
            )
            if binding.kind == KIND_GENERIC and binding.entity in graph.classes:
                graph = graph.with_class_assertion(binding.entity, assertion)
            elif binding.kind == KIND_IMPLEMENTATION and binding.entity in graph.instances:
                graph = graph.with_instance_assertion(binding.entity, assertion)
        return graph

    def bindings(self, identifier: str) -> tuple[SemanticBinding, ...]:
        dom = self.domain(identifier)
        with dom.lock:
            return tuple(
                dom.bindings[e] for e in sorted(dom.bindings)
            )

    # --- registration ---

    def _reaches_poec_service(self, graph: OntologyGraph, class_id: str) -> bool:
        if class_id == POEC_SERVICE:
            return True
        if class_id not in graph.classes:
            return False
        return POEC_SERVICE in superclasses_of(graph, class_id).members

    def _service_for_tmodel(self, tmodel_key: str) -> BusinessService | None:
        for service in self.store.services():
            if service.category_bag.references(tmodel_key):
                return service
        return None

    def register_semantic_service(
        self,
        identifier: str,
        instance_doc: OntologyDocument,
        draft: BusinessService,
    ) -> tuple[BusinessService, tuple[SemanticBinding, ...]]:
        """Register a service advertisement: merge the instance document into
        the domain schema, create/reuse the generic and instance tModels, and
        save the service with semantic category references."""
        dom = self.domain(identifier)
        with dom.lock:
            instance_doc = self._with_bound_keys(instance_doc, dom)
            try:
                candidate = merge(list(dom.documents) + [instance_doc])
            except (ConflictingDefinition, CyclicHierarchy) as exc:
                raise OntologyMergeConflict(str(exc)) from None
            candidate = self._apply_bindings(candidate, dom)
            report = validate(candidate)
            if not report.ok():
                detail = "; ".join(
                    f"{f.code} on {f.entity}: {f.message}" for f in report.errors[:5]
                )
                raise InvalidInstanceDocument(f"document fails validation: {detail}")
            impls = [
                inst
                for inst in instance_doc.instances
                if self._reaches_poec_service(candidate, inst.class_id)
                and is_implementation(inst)
            ]
            if len(impls) != 1:
                raise InvalidInstanceDocument(
                    "document must contain exactly one Implementation instance "
                    f"of a service class, found {len(impls)}"
                )
            inst = impls[0]
            generic = inst.class_id
            if generic not in dom.schema.classes:
                raise UnknownGenericClass(generic)

            existing = dom.bindings.get(inst.id)
            if existing is not None:
                service = self._service_for_tmodel(existing.tmodel_key)
                if service is not None:
                    return service, self.bindings(identifier)
            elif inst.values_of(TMODEL_KEY):
                raise InvalidInstanceDocument(
                    f"instance {inst.id} asserts tModelKey without a known binding"
                )

            # keys already bound to some entity: save_tmodel may hand one back
            # on a content match, and such a key must never be re-bound to a
            # different entity or rolled back as if this call had created it
            keys_in_use = {b.tmodel_key for b in dom.bindings.values()}
            created: list[str] = []
            try:
                generic_binding = dom.bindings.get(generic)
                if generic_binding is None:
                    gen_tmodel = self.store.save_tmodel(
                        TModel(
                            key="",
                            name=local_name(generic),
                            overview_doc=self._doc_url(identifier, "schema.daml"),
                            category_bag=self._damlspec_bag(),
                        )
                    )
                    if gen_tmodel.key in keys_in_use:
                        raise InvalidInstanceDocument(
                            f"tModel for class {generic} collides with an "
                            "entity already bound under the same name"
                        )
                    created.append(gen_tmodel.key)
                    generic_binding = SemanticBinding(
                        generic, gen_tmodel.key, KIND_GENERIC
                    )
                doc_rel = f"instances/{local_name(inst.id)}.daml"
                inst_tmodel = self.store.save_tmodel(
                    TModel(
                        key="",
                        name=local_name(inst.id),
                        overview_doc=self._doc_url(identifier, doc_rel),
                        category_bag=self._damlspec_bag(),
                    )
                )
                if existing is not None and inst_tmodel.key == existing.tmodel_key:
                    pass  # re-registering after the service was deleted
                elif inst_tmodel.key in keys_in_use:
                    raise InvalidInstanceDocument(
                        f"tModel for instance {inst.id} collides with an "
                        "entity already bound under the same name"
                    )
                else:
                    created.append(inst_tmodel.key)
                inst_binding = SemanticBinding(
                    inst.id, inst_tmodel.key, KIND_IMPLEMENTATION
                )
                extra = (
                    KeyedReference(
                        dom.schema_tmodel_key, f"{identifier}-ontology", dom.base
                    ),
                    KeyedReference(
                        generic_binding.tmodel_key, local_name(generic), generic
                    ),
                    KeyedReference(inst_binding.tmodel_key, local_name(inst.id), inst.id),
                )
                service = self.store.save_service(
                    replace(draft, category_bag=draft.category_bag.extended(extra))
                )
            except SemRegError:
                for key in created:
                    try:
                        self.store.delete_tmodel(key)
                    except SemRegError:
                        pass
                raise

            dom.bindings[generic_binding.entity] = generic_binding
            dom.bindings[inst_binding.entity] = inst_binding
            self._pin(generic_binding, identifier)
            self._pin(inst_binding, identifier)
            # store the document with its freshly assigned keys so the next
            # registration of the same advertisement collapses against it
            instance_doc = self._with_bound_keys(instance_doc, dom)
            dom.documents = dom.documents + (instance_doc,)
            candidate = self._apply_bindings(candidate, dom)
            dom.schema = candidate
            if self.document_dir is not None:
                doc_path = self.document_dir / identifier / doc_rel
                doc_path.parent.mkdir(parents=True, exist_ok=True)
                doc_path.write_bytes(serialize_graph(merge([instance_doc]), dom.base))
            return service, self.bindings(identifier)

    # --- discovery ---

    def _resolve_class(self, dom: Domain, name: str, exc_type=UnknownGenericClass) -> str:
        if name in dom.schema.classes:
            return name
        candidate = dom.base + "#" + name
        if candidate in dom.schema.classes:
            return candidate
        raise exc_type(name)

    def _functionality_targets(
        self, dom: Domain, generic: str
    ) -> list[tuple[str, str]]:
        targets = [(generic, "matched_class")]
        targets.extend(
            (member, "matched_class")
            for member in subclasses_of(dom.schema, generic).members
        )
        targets.extend(
            (inst.id, "matched_instance")
            for inst in implementations_of(dom.schema, generic)
        )
        return targets

    def _functionality_hits(
        self, dom: Domain, generic: str
    ) -> list[tuple[BusinessService, set[tuple[str, str]]]]:
        """Services matching the generic class, each with supporting pairs."""
        agg: dict[str, tuple[BusinessService, set[tuple[str, str]]]] = {}
        for entity, how in self._functionality_targets(dom, generic):
            binding = dom.bindings.get(entity)
            if binding is None:
                continue
            services = self.store.find_services(
                [KeyedReference(binding.tmodel_key)], MATCH_ANY
            )
            for service in services:
                if service.key not in agg:
                    agg[service.key] = (service, set())
                agg[service.key][1].add((how, entity))
                agg[service.key][1].add(("tmodel_key", binding.tmodel_key))
        return sorted(agg.values(), key=lambda pair: pair[0].key)

    def find_by_functionality(self, identifier: str, generic: str) -> DiscoverySet:
        dom = self.domain(identifier)
        with dom.lock:
            generic = self._resolve_class(dom, generic)
            hits = self._functionality_hits(dom, generic)
        results = tuple(
            DiscoveryResult(
                service,
                Evidence(
                    generic_class=generic,
                    via="functionality",
                    supporting=tuple(sorted(supporting)),
                ),
            )
            for service, supporting in hits
        )
        return DiscoverySet(results=results)

    def _addon_targets(self, dom: Domain, anchor: str) -> list[tuple[str, str]]:
        """(add-on class, declared_on) pairs for an anchor class: forward
        Added_Value values inherited along the superclass chain, plus inverse
        AddOn_To edges pointing at the anchor or one of its superclasses."""
        pairs: set[tuple[str, str]] = set()
        schema = dom.schema
        if ADDED_VALUE in schema.properties:
            for iv in inherited_values(schema, anchor, ADDED_VALUE).values:
                if isinstance(iv.value, str):
                    pairs.add((iv.value, iv.declared_on))
        if ADD_ON_TO in schema.properties:
            props = {ADD_ON_TO} | set(subproperties_of(schema, ADD_ON_TO).members)
            chain = {anchor} | set(superclasses_of(schema, anchor).members)
            for cid, cls in schema.classes.items():
                for a in cls.assertions:
                    if a.prop in props and isinstance(a.value, str) and a.value in chain:
                        pairs.add((cid, a.value))
        return sorted(pairs)

    def find_complementary(self, identifier: str, anchor: str) -> DiscoverySet:
        dom = self.domain(identifier)
        warnings: list[str] = []
        agg: dict[str, tuple[BusinessService, str, set[tuple[str, str]]]] = {}
        with dom.lock:
            anchor = self._resolve_class(dom, anchor)
            for addon, declared_on in self._addon_targets(dom, anchor):
                if addon not in dom.schema.classes:
                    warnings.append(
                        f"add-on class {addon} is not defined in the domain schema"
                    )
                    continue
                for service, supporting in self._functionality_hits(dom, addon):
                    extra = {
                        ("addon_class", addon),
                        ("declared_on", declared_on),
                        ("anchor", anchor),
                    }
                    if service.key not in agg:
                        agg[service.key] = (service, addon, set())
                    agg[service.key][2].update(supporting | extra)
        results = tuple(
            DiscoveryResult(
                service,
                Evidence(
                    generic_class=addon,
                    via="complement",
                    supporting=tuple(sorted(supporting)),
                ),
            )
            for service, addon, supporting in sorted(
                agg.values(), key=lambda triple: triple[0].key
            )
        )
        return DiscoverySet(results=results, warnings=tuple(warnings))

    def _closest_unspsc_code(self, dom: Domain, product: str) -> tuple[str, str] | None:
        chain = [product] + list(superclasses_of(dom.schema, product).members)
        for cid in chain:
            cls = dom.schema.classes.get(cid)
            if cls is None:
                continue
            for a in cls.assertions:
                if a.prop == UNSPSC_CODE and isinstance(a.value, Literal):
                    return a.value.lexical, cid
        return None

    def find_addon_product_services(self, identifier: str, product: str) -> DiscoverySet:
        dom = self.domain(identifier)
        warnings: list[str] = []
        agg: dict[str, tuple[BusinessService, str, set[tuple[str, str]]]] = {}
        with dom.lock:
            anchor = self._resolve_class(dom, product, exc_type=UnknownClass)
            unspsc_key = self.store.taxonomy_key(UNSPSC)
            for addon, declared_on in self._addon_targets(dom, anchor):
                if addon not in dom.schema.classes:
                    warnings.append(
                        f"add-on product {addon} is not defined in the domain schema"
                    )
                    continue
                found = self._closest_unspsc_code(dom, addon)
                if found is None:
                    warnings.append(
                        "MissingUnspscAnnotation: no UNSPSC code on "
                        f"{addon} or any of its superclasses"
                    )
                    continue
                code, code_class = found
                services = self.store.find_services(
                    [KeyedReference(unspsc_key, UNSPSC, code)], MATCH_ANY
                )
                for service in services:
                    extra = {
                        ("product", addon),
                        ("declared_on", declared_on),
                        ("unspsc_code", code),
                        ("code_class", code_class),
                        ("anchor", anchor),
                    }
                    if service.key not in agg:
                        agg[service.key] = (service, addon, set())
                    agg[service.key][2].update(extra)
        results = tuple(
            DiscoveryResult(
                service,
                Evidence(
                    generic_class=addon,
                    via="addon_product",
                    supporting=tuple(sorted(supporting)),
                ),
            )
            for service, addon, supporting in sorted(
                agg.values(), key=lambda triple: triple[0].key
            )
        )
        return DiscoverySet(results=results, warnings=tuple(warnings))

    def find_by_product_instance(
        self, identifier: str, generic: str, query: CatalogQuery
    ) -> DiscoverySet:
        dom = self.domain(identifier)
        warnings: list[str] = []
        results: list[DiscoveryResult] = []
        with dom.lock:
            generic = self._resolve_class(dom, generic)
            hits = self._functionality_hits(dom, generic)
            schema = dom.schema
        for service, supporting in hits:
            instance_ids = sorted(e for how, e in supporting if how == "matched_instance")
            pairs: set[tuple[str, str]] = set()
            matched_any = False
            for iid in instance_ids:
                inst = schema.instances.get(iid)
                if inst is None:
                    continue
                try:
                    descriptor = extract_query_catalog(schema, inst)
                except MalformedDescriptor as exc:
                    warnings.append(f"{service.name}: {exc}")
                    continue
                if descriptor is None:
                    continue
                try:
                    catalog = load_catalog(descriptor, self.fetcher)
                    outcome = execute_query(catalog, query)
                except (
                    FetchFailed,
                    ParseFailed,
                    DuplicateItemId,
                    UnsupportedSchemaType,
                    TypeMismatch,
                ) as exc:
                    warnings.append(f"{service.name}: {exc.code}: {exc}")
                    continue
                if not outcome.items:
                    continue
                matched_any = True
                pairs.add(("matched_instance", iid))
                pairs.add(("catalog_uri", descriptor.catalog_uri))
                for item in outcome.items:
                    pairs.add(("matched_item", item.id))
                    price = item.attributes.get("price")
                    if price is not None:
                        pairs.add(("item_price", f"{item.id}={price}"))
            if matched_any:
                results.append(
                    DiscoveryResult(
                        service,
                        Evidence(
                            generic_class=generic,
                            via="product_instance",
                            supporting=tuple(sorted(pairs)),
                        ),
                    )
                )
        return DiscoverySet(results=tuple(results), warnings=tuple(warnings))

    # --- introspection ---

    def schema_document(self, identifier: str) -> bytes:
        dom = self.domain(identifier)
        with dom.lock:
            return serialize_graph(dom.schema, dom.base)

    def check_binding_bijection(self, identifier: str) -> tuple[str, ...]:
        """Consistency walk: bindings are a bijection between schema entities
        and tModel keys, all keys resolve, and the schema's tModelKey
        assertions agree with the map."""
        dom = self.domain(identifier)
        problems: list[str] = []
        with dom.lock:
            by_key: dict[str, str] = {}
            for binding in dom.bindings.values():
                if binding.tmodel_key in by_key:
                    problems.append(
                        f"tModel {binding.tmodel_key} bound to both "
                        f"{by_key[binding.tmodel_key]} and {binding.entity}"
                    )
                by_key[binding.tmodel_key] = binding.entity
                try:
                    self.store.get_tmodel(binding.tmodel_key)
                except SemRegError:
                    problems.append(
                        f"binding for {binding.entity} references missing tModel "
                        f"{binding.tmodel_key}"
                    )
                if binding.kind == KIND_GENERIC and binding.entity not in dom.schema.classes:
                    problems.append(f"bound class {binding.entity} missing from schema")
                if (
                    binding.kind == KIND_IMPLEMENTATION
                    and binding.entity not in dom.schema.instances
                ):
                    problems.append(f"bound instance {binding.entity} missing from schema")

            def check_assertions(entity: str, assertions) -> None:
                for a in assertions:
                    if a.prop != TMODEL_KEY or not isinstance(a.value, Literal):
                        continue
                    binding = dom.bindings.get(entity)
                    if binding is None:
                        problems.append(f"{entity} asserts tModelKey but has no binding")
                    elif key_to_decimal(binding.tmodel_key) != a.value.lexical:
                        problems.append(
                            f"{entity} asserts tModelKey {a.value.lexical} but is "
                            f"bound to {binding.tmodel_key}"
                        )

            for cid, cls in dom.schema.classes.items():
                check_assertions(cid, cls.assertions)
            for iid, inst in dom.schema.instances.items():
                check_assertions(iid, inst.assertions)
        return tuple(problems)
