"""Command-line interface.

Exit codes: 0 success, 1 user error (including every domain error from the
library, whose class name is printed as the error code), 2 internal error.
`--json` switches output to deterministic JSON (sorted keys) so repeated
queries against the same state compare byte-for-byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .catalog import ORDERING_OPS, CatalogQuery, Predicate
from .config import DEFAULT_DOMAIN, load_config
from .errors import InvalidRequest, NotFound, SemRegError
from .ontology.merge import merge, validate
from .ontology.parser import parse_document
from .ontology.vocab import POEC_BASE
from .registry.model import BusinessEntity, BusinessService, CategoryBag, KeyedReference, TModel
from .runtime import AppState
from .server import (
    binding_to_json,
    business_to_json,
    discovery_to_json,
    service_to_json,
    tmodel_to_json,
)


def _emit(args, payload, lines) -> None:
    """Print either the JSON payload or the human-readable lines."""
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        for line in lines:
            print(line)


def _parse_where(values: list[str]) -> CatalogQuery:
    predicates = []
    for raw in values:
        parts = raw.split(":", 2)
        if len(parts) != 3:
            raise InvalidRequest(f"--where {raw!r} is not attr:op:value")
        attribute, op, value = parts
        if op in ORDERING_OPS:
            try:
                predicates.append(Predicate(attribute, op, Decimal(value)))
                continue
            except InvalidOperation:
                pass  # let Predicate raise the TypeMismatch
        predicates.append(Predicate(attribute, op, value))
    return CatalogQuery(predicates=tuple(predicates))


def _parse_categories(state: AppState, values: list[str]) -> CategoryBag:
    """Each --category is '<taxonomy-name-or-tmodel-key>|<key_name>|<key_value>'."""
    refs = []
    for raw in values:
        parts = raw.split("|", 2)
        if len(parts) != 3:
            raise InvalidRequest(
                f"--category {raw!r} is not '<taxonomy-or-key>|<name>|<value>'"
            )
        selector, key_name, key_value = parts
        try:
            tmodel_key = state.store.taxonomy_key(selector)
        except NotFound:
            tmodel_key = selector
        refs.append(KeyedReference(tmodel_key, key_name, key_value))
    return CategoryBag(tuple(refs))


def _service_lines(services) -> list[str]:
    return [
        f"{s.key}  {s.name}  (business {s.business_key})" for s in services
    ]


def _discovery_lines(ds) -> list[str]:
    lines = _service_lines(r.service for r in ds.results)
    for r in ds.results:
        for kind, value in r.evidence.supporting:
            lines.append(f"    {r.service.key}  {kind}: {value}")
    for w in ds.warnings:
        lines.append(f"warning: {w}")
    if not ds.results:
        lines.insert(0, "no services matched")
    return lines


# --- subcommand handlers (each returns the process exit code) ---


def _cmd_load_ontology(args) -> int:
    base = args.base or POEC_BASE
    documents = []
    for path in args.paths:
        data = Path(path).read_bytes()
        documents.append(parse_document(data, base, source=str(path)))
    if args.check:
        graph = merge(documents)
        report = validate(graph)
        payload = {
            "classes": len(graph.classes),
            "properties": len(graph.properties),
            "instances": len(graph.instances),
            "findings": [
                {"level": f.level, "code": f.code, "entity": f.entity, "message": f.message}
                for f in report.findings
            ],
        }
        lines = [
            f"{len(graph.classes)} classes, {len(graph.properties)} properties, "
            f"{len(graph.instances)} instances"
        ]
        lines += [f"{f.level}: {f.code} on {f.entity}: {f.message}" for f in report.findings]
        _emit(args, payload, lines)
        return 0 if report.ok() else 1
    state = AppState.bootstrap(load_config(args.config))
    dom = state.manager.add_domain(args.domain, documents, base=base)
    state.persist()
    _emit(
        args,
        {"domain": dom.identifier, "base": dom.base, "schema_tmodel_key": dom.schema_tmodel_key},
        [f"domain {dom.identifier} loaded (schema tModel {dom.schema_tmodel_key})"],
    )
    return 0


def _cmd_publish_tmodel(args) -> int:
    state = AppState.bootstrap(load_config(args.config))
    saved = state.store.save_tmodel(
        TModel(
            key=args.key or "",
            name=args.name,
            overview_doc=args.overview_doc,
            category_bag=_parse_categories(state, args.category),
        )
    )
    state.persist()
    _emit(args, tmodel_to_json(saved), [f"tModel {saved.key}  {saved.name}"])
    return 0


def _cmd_publish_business(args) -> int:
    state = AppState.bootstrap(load_config(args.config))
    saved = state.store.save_business(
        BusinessEntity(
            key=args.key or "",
            name=args.name,
            contact=args.contact or "",
            category_bag=_parse_categories(state, args.category),
        )
    )
    state.persist()
    _emit(args, business_to_json(saved), [f"business {saved.key}  {saved.name}"])
    return 0


def _cmd_publish_service(args) -> int:
    state = AppState.bootstrap(load_config(args.config))
    saved = state.store.save_service(
        BusinessService(
            key=args.key or "",
            business_key=args.business,
            name=args.name,
            binding_urls=tuple(args.binding_url),
            category_bag=_parse_categories(state, args.category),
        )
    )
    state.persist()
    _emit(args, service_to_json(saved), [f"service {saved.key}  {saved.name}"])
    return 0


def _cmd_register(args) -> int:
    state = AppState.bootstrap(load_config(args.config))
    dom = state.manager.domain(args.domain)
    data = Path(args.document).read_bytes()
    doc = parse_document(data, dom.base, source=str(args.document))
    draft = BusinessService(
        key="",
        business_key=args.business,
        name=args.name,
        binding_urls=tuple(args.binding_url),
        category_bag=_parse_categories(state, args.category),
    )
    service, bindings = state.manager.register_semantic_service(args.domain, doc, draft)
    state.persist()
    _emit(
        args,
        {
            "service": service_to_json(service),
            "bindings": [binding_to_json(b) for b in bindings],
        },
        [f"service {service.key}  {service.name}"]
        + [f"    {b.kind}  {b.entity} -> {b.tmodel_key}" for b in bindings],
    )
    return 0


def _cmd_discover(args) -> int:
    state = AppState.bootstrap(load_config(args.config))
    if args.question == "functionality":
        ds = state.manager.find_by_functionality(args.domain, args.cls)
    elif args.question == "complement":
        ds = state.manager.find_complementary(args.domain, args.cls)
    elif args.question == "addon":
        ds = state.manager.find_addon_product_services(args.domain, args.product)
    else:  # product
        query = _parse_where(args.where)
        ds = state.manager.find_by_product_instance(args.domain, args.cls, query)
    _emit(args, discovery_to_json(ds), _discovery_lines(ds))
    return 0


def _cmd_snapshot(args) -> int:
    state = AppState.bootstrap(load_config(args.config))
    state.persist()
    problems = list(state.store.referential_integrity_errors())
    for identifier in state.manager.domains():
        problems += list(state.manager.check_binding_bijection(identifier))
    payload = {"snapshot": str(state.snapshot_path), "problems": problems}
    lines = [f"snapshot written to {state.snapshot_path}"]
    lines += [f"problem: {p}" for p in problems]
    _emit(args, payload, lines)
    return 0 if not problems else 1


def _cmd_serve(args) -> int:
    from .server import serve

    config = load_config(args.config)
    state = AppState.bootstrap(config)
    print(f"semreg listening on {config.listen} (data in {state.data_dir})")
    serve(state)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(prog="semreg", description="semantic service registry")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load-ontology", parents=[common], help="install a domain ontology")
    p.add_argument("paths", nargs="+", metavar="DAML_FILE")
    p.add_argument("--domain", default=DEFAULT_DOMAIN)
    p.add_argument("--base", help=f"document base IRI (default {POEC_BASE})")
    p.add_argument("--check", action="store_true", help="validate only, change nothing")
    p.set_defaults(func=_cmd_load_ontology)

    p = sub.add_parser("publish-tmodel", parents=[common], help="save a tModel")
    p.add_argument("--name", required=True)
    p.add_argument("--key", help="preset key (normally omitted)")
    p.add_argument("--overview-doc", dest="overview_doc")
    p.add_argument("--category", action="append", default=[],
                   metavar="TAX|NAME|VALUE")
    p.set_defaults(func=_cmd_publish_tmodel)

    p = sub.add_parser("publish-business", parents=[common], help="save a business")
    p.add_argument("--name", required=True)
    p.add_argument("--key")
    p.add_argument("--contact")
    p.add_argument("--category", action="append", default=[], metavar="TAX|NAME|VALUE")
    p.set_defaults(func=_cmd_publish_business)

    p = sub.add_parser("publish-service", parents=[common], help="save a service")
    p.add_argument("--name", required=True)
    p.add_argument("--key")
    p.add_argument("--business", required=True, metavar="BUSINESS_KEY")
    p.add_argument("--binding-url", dest="binding_url", action="append", default=[])
    p.add_argument("--category", action="append", default=[], metavar="TAX|NAME|VALUE")
    p.set_defaults(func=_cmd_publish_service)

    p = sub.add_parser(
        "register", parents=[common],
        help="register a service with its ontology instance document",
    )
    p.add_argument("--domain", default=DEFAULT_DOMAIN)
    p.add_argument("--document", required=True, metavar="DAML_FILE")
    p.add_argument("--business", required=True, metavar="BUSINESS_KEY")
    p.add_argument("--name", required=True)
    p.add_argument("--binding-url", dest="binding_url", action="append", default=[])
    p.add_argument("--category", action="append", default=[], metavar="TAX|NAME|VALUE")
    p.set_defaults(func=_cmd_register)

    p = sub.add_parser("discover", parents=[common], help="semantic discovery queries")
    q = p.add_subparsers(dest="question", required=True)

    pq = q.add_parser("functionality", parents=[common])
    pq.add_argument("--domain", default=DEFAULT_DOMAIN)
    pq.add_argument("--class", dest="cls", required=True)
    pq.set_defaults(func=_cmd_discover)

    pq = q.add_parser("complement", parents=[common])
    pq.add_argument("--domain", default=DEFAULT_DOMAIN)
    pq.add_argument("--class", dest="cls", required=True)
    pq.set_defaults(func=_cmd_discover)

    pq = q.add_parser("addon", parents=[common])
    pq.add_argument("--domain", default=DEFAULT_DOMAIN)
    pq.add_argument("--product", required=True)
    pq.set_defaults(func=_cmd_discover)

    pq = q.add_parser("product", parents=[common])
    pq.add_argument("--domain", default=DEFAULT_DOMAIN)
    pq.add_argument("--class", dest="cls", required=True)
    pq.add_argument("--where", action="append", default=[], metavar="ATTR:OP:VALUE")
    pq.set_defaults(func=_cmd_discover)

    p = sub.add_parser("snapshot", parents=[common],
                       help="flush state and run the integrity walk")
    p.set_defaults(func=_cmd_snapshot)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP server")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; that's a user error here
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except SemRegError as exc:
        if args.json:
            print(
                json.dumps(
                    {
                        "status": "error",
                        "error": {"code": exc.code, "message": str(exc), "details": exc.details()},
                    },
                    indent=2,
                    sort_keys=True,
                    default=str,
                )
            )
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
