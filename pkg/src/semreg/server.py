"""HTTP/JSON surface over the registry and discovery operations.

Every response is an envelope: {"status": "ok", "payload": ...} or
{"status": "error", "error": {"code", "message", "details"}}. Error codes
are the library exception class names, verbatim. Request bodies are parsed
by hand (json with Decimal numbers) so malformed input surfaces as
InvalidRequest rather than a framework-specific shape.
"""

from __future__ import annotations

import json
from contextlib import asynccontextmanager
from decimal import Decimal

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from .catalog import CatalogQuery, Predicate
from .discovery import DiscoveryResult, DiscoverySet, SemanticBinding
from .errors import InvalidRequest, SemRegError, Unauthorized
from .ontology.parser import parse_document
from .registry.model import (
    MATCH_ALL,
    MATCH_ANY,
    BusinessEntity,
    BusinessService,
    CategoryBag,
    KeyedReference,
    TModel,
)
from .runtime import AppState

TOKEN_HEADER = "x-semreg-token"

_STATUS_BY_CODE = {
    "Unauthorized": 401,
    "NotFound": 404,
    "UnknownTModelKey": 404,
    "UnknownBusinessKey": 404,
    "UnknownDomain": 404,
    "UnknownClass": 404,
    "UnknownGenericClass": 404,
    "UnknownProperty": 404,
    "TModelInUse": 409,
    "ConflictingDefinition": 409,
    "OntologyMergeConflict": 409,
}


def _error_body(code: str, message: str, details: dict | None = None) -> dict:
    return {
        "status": "error",
        "error": {"code": code, "message": message, "details": details or {}},
    }


def _ok(payload) -> dict:
    return {"status": "ok", "payload": payload}


def bag_to_json(bag: CategoryBag) -> list[dict]:
    return [
        {"tmodel_key": e.tmodel_key, "key_name": e.key_name, "key_value": e.key_value}
        for e in bag.entries
    ]


def service_to_json(s: BusinessService) -> dict:
    return {
        "key": s.key,
        "business_key": s.business_key,
        "name": s.name,
        "binding_urls": list(s.binding_urls),
        "category_bag": bag_to_json(s.category_bag),
    }


def business_to_json(b: BusinessEntity) -> dict:
    return {
        "key": b.key,
        "name": b.name,
        "contact": b.contact,
        "category_bag": bag_to_json(b.category_bag),
    }


def tmodel_to_json(t: TModel) -> dict:
    return {
        "key": t.key,
        "name": t.name,
        "overview_doc": t.overview_doc,
        "category_bag": bag_to_json(t.category_bag),
    }


def binding_to_json(b: SemanticBinding) -> dict:
    return {"entity": b.entity, "tmodel_key": b.tmodel_key, "kind": b.kind}


def result_to_json(r: DiscoveryResult) -> dict:
    return {
        "service": service_to_json(r.service),
        "evidence": {
            "generic_class": r.evidence.generic_class,
            "via": r.evidence.via,
            "supporting": [list(pair) for pair in r.evidence.supporting],
        },
    }


def discovery_to_json(ds: DiscoverySet) -> dict:
    return {
        "results": [result_to_json(r) for r in ds.results],
        "warnings": list(ds.warnings),
    }


def _parse_body(raw: bytes) -> dict:
    try:
        body = json.loads(raw.decode("utf-8"), parse_float=Decimal)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidRequest(f"request body is not valid JSON: {exc}") from None
    if not isinstance(body, dict):
        raise InvalidRequest("request body must be a JSON object")
    return body


def _string_field(body: dict, name: str, required: bool = True, default: str = "") -> str:
    value = body.get(name, None)
    if value is None:
        if required:
            raise InvalidRequest(f"field {name!r} is required")
        return default
    if not isinstance(value, str):
        raise InvalidRequest(f"field {name!r} must be a string")
    return value


def bag_from_json(entries, what: str = "category_bag") -> CategoryBag:
    if entries is None:
        return CategoryBag()
    if not isinstance(entries, list):
        raise InvalidRequest(f"{what} must be a list")
    refs = []
    for e in entries:
        if not isinstance(e, dict):
            raise InvalidRequest(f"{what} entries must be objects")
        key = e.get("tmodel_key")
        if not isinstance(key, str) or not key:
            raise InvalidRequest(f"{what} entries need a tmodel_key string")
        name = e.get("key_name", "")
        value = e.get("key_value", "")
        if not isinstance(name, str) or not isinstance(value, str):
            raise InvalidRequest(f"{what} key_name/key_value must be strings")
        refs.append(KeyedReference(key, name, value))
    return CategoryBag(tuple(refs))


def _binding_urls(body: dict) -> tuple[str, ...]:
    urls = body.get("binding_urls", [])
    if not isinstance(urls, list) or not all(isinstance(u, str) for u in urls):
        raise InvalidRequest("binding_urls must be a list of strings")
    return tuple(urls)


def predicates_from_json(entries) -> CatalogQuery:
    if not isinstance(entries, list):
        raise InvalidRequest("predicates must be a list")
    preds = []
    for e in entries:
        if not isinstance(e, dict):
            raise InvalidRequest("predicates entries must be objects")
        attribute = e.get("attribute")
        op = e.get("op")
        if not isinstance(attribute, str) or not attribute:
            raise InvalidRequest("predicate needs an attribute string")
        if not isinstance(op, str):
            raise InvalidRequest("predicate needs an op string")
        value = e.get("value")
        if isinstance(value, bool) or value is None:
            raise InvalidRequest("predicate value must be a string or a number")
        if isinstance(value, int):
            value = Decimal(value)
        if not isinstance(value, (str, Decimal)):
            raise InvalidRequest("predicate value must be a string or a number")
        preds.append(Predicate(attribute=attribute, op=op, value=value))
    return CatalogQuery(predicates=tuple(preds))


def create_app(state: AppState) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        state.persist()
        yield
        state.persist()

    app = FastAPI(title="semreg", lifespan=lifespan)

    def require_token(request: Request) -> None:
        presented = request.headers.get(TOKEN_HEADER)
        if presented != state.config.token:
            raise Unauthorized("missing or invalid publisher token")

    @app.exception_handler(SemRegError)
    async def semreg_error_handler(request: Request, exc: SemRegError):
        return JSONResponse(
            status_code=_STATUS_BY_CODE.get(exc.code, 400),
            content=_error_body(exc.code, str(exc), exc.details()),
        )

    @app.exception_handler(Exception)
    async def unexpected_error_handler(request: Request, exc: Exception):
        return JSONResponse(
            status_code=500,
            content=_error_body(type(exc).__name__, str(exc)),
        )

    # --- publish (token gated) ---

    @app.post("/tmodels")
    async def post_tmodel(request: Request):
        require_token(request)
        body = _parse_body(await request.body())
        draft = TModel(
            key=_string_field(body, "key", required=False),
            name=_string_field(body, "name"),
            overview_doc=body.get("overview_doc"),
            category_bag=bag_from_json(body.get("category_bag")),
        )
        if draft.overview_doc is not None and not isinstance(draft.overview_doc, str):
            raise InvalidRequest("overview_doc must be a string")
        saved = state.store.save_tmodel(draft)
        state.persist()
        return _ok(tmodel_to_json(saved))

    @app.post("/businesses")
    async def post_business(request: Request):
        require_token(request)
        body = _parse_body(await request.body())
        saved = state.store.save_business(
            BusinessEntity(
                key=_string_field(body, "key", required=False),
                name=_string_field(body, "name"),
                contact=_string_field(body, "contact", required=False),
                category_bag=bag_from_json(body.get("category_bag")),
            )
        )
        state.persist()
        return _ok(business_to_json(saved))

    @app.post("/services")
    async def post_service(request: Request):
        require_token(request)
        body = _parse_body(await request.body())
        saved = state.store.save_service(
            BusinessService(
                key=_string_field(body, "key", required=False),
                business_key=_string_field(body, "business_key"),
                name=_string_field(body, "name"),
                binding_urls=_binding_urls(body),
                category_bag=bag_from_json(body.get("category_bag")),
            )
        )
        state.persist()
        return _ok(service_to_json(saved))

    @app.post("/domains/{identifier}/register")
    async def post_register(identifier: str, request: Request):
        require_token(request)
        body = _parse_body(await request.body())
        document = _string_field(body, "document")
        service_body = body.get("service")
        if not isinstance(service_body, dict):
            raise InvalidRequest("field 'service' must be an object")
        dom = state.manager.domain(identifier)
        doc = parse_document(document, dom.base, source=f"register:{identifier}")
        draft = BusinessService(
            key=_string_field(service_body, "key", required=False),
            business_key=_string_field(service_body, "business_key"),
            name=_string_field(service_body, "name"),
            binding_urls=_binding_urls(service_body),
            category_bag=bag_from_json(service_body.get("category_bag")),
        )
        service, bindings = state.manager.register_semantic_service(identifier, doc, draft)
        state.persist()
        return _ok(
            {
                "service": service_to_json(service),
                "bindings": [binding_to_json(b) for b in bindings],
            }
        )

    # --- lookup ---

    @app.get("/tmodels/{key}")
    async def get_tmodel(key: str):
        return _ok(tmodel_to_json(state.store.get_tmodel(key)))

    @app.get("/services/{key}")
    async def get_service(key: str):
        return _ok(service_to_json(state.store.get_service(key)))

    @app.get("/services")
    async def find_services(
        tmodel_key: str | None = Query(None),
        key_value: str = Query(""),
        match: str = Query(MATCH_ALL),
    ):
        if tmodel_key is None:
            raise InvalidRequest("query parameter 'tmodel_key' is required")
        found = state.store.find_services(
            [KeyedReference(tmodel_key, "", key_value)], match
        )
        return _ok([service_to_json(s) for s in found])

    # --- discovery ---

    @app.get("/domains/{identifier}/discover/functionality")
    async def discover_functionality(
        identifier: str, generic: str | None = Query(None, alias="class")
    ):
        if generic is None:
            raise InvalidRequest("query parameter 'class' is required")
        return _ok(discovery_to_json(state.manager.find_by_functionality(identifier, generic)))

    @app.get("/domains/{identifier}/discover/complementary")
    async def discover_complementary(
        identifier: str, generic: str | None = Query(None, alias="class")
    ):
        if generic is None:
            raise InvalidRequest("query parameter 'class' is required")
        return _ok(discovery_to_json(state.manager.find_complementary(identifier, generic)))

    @app.get("/domains/{identifier}/discover/addon-products")
    async def discover_addon_products(
        identifier: str, product: str | None = Query(None)
    ):
        if product is None:
            raise InvalidRequest("query parameter 'product' is required")
        return _ok(
            discovery_to_json(state.manager.find_addon_product_services(identifier, product))
        )

    @app.post("/domains/{identifier}/discover/product-instance")
    async def discover_product_instance(identifier: str, request: Request):
        body = _parse_body(await request.body())
        generic = _string_field(body, "class")
        query = predicates_from_json(body.get("predicates"))
        return _ok(
            discovery_to_json(
                state.manager.find_by_product_instance(identifier, generic, query)
            )
        )

    # --- introspection ---

    @app.get("/domains/{identifier}/schema")
    async def domain_schema(identifier: str):
        return Response(
            content=state.manager.schema_document(identifier),
            media_type="application/rdf+xml",
        )

    @app.get("/domains/{identifier}/bindings")
    async def domain_bindings(identifier: str):
        return _ok([binding_to_json(b) for b in state.manager.bindings(identifier)])

    @app.get("/domains")
    async def list_domains():
        return _ok(list(state.manager.domains()))

    return app


def serve(state: AppState) -> None:
    """Run uvicorn until interrupted; the lifespan hook flushes a snapshot
    on shutdown."""
    import uvicorn

    uvicorn.run(
        create_app(state),
        host=state.config.host,
        port=state.config.port,
        log_level="warning",
    )
