"""Application state shared by the HTTP server and the CLI.

Bootstrap wires together the registry store (restored from a snapshot when
one exists), the built-in checked taxonomies, and the configured ontology
domains; persist() writes everything back so a later bootstrap reproduces
the same state. Domains added at runtime (load-ontology) leave a
domain.json marker beside their schema so bootstrap picks them up without
a config entry.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .catalog import file_fetcher
from .config import ServerConfig
from .discovery import DiscoveryManager
from .errors import ConfigError
from .ontology.parser import parse_document
from .registry.store import RegistryStore
from .registry.taxonomy import builtin_taxonomies

SNAPSHOT_NAME = "registry.json"
SCHEMA_NAME = "schema.daml"
DOMAIN_META_NAME = "domain.json"


class AppState:
    def __init__(self, config: ServerConfig, store: RegistryStore, manager: DiscoveryManager):
        self.config = config
        self.store = store
        self.manager = manager

    @property
    def data_dir(self) -> Path:
        return Path(self.config.data_dir)

    @property
    def snapshot_path(self) -> Path:
        return self.data_dir / SNAPSHOT_NAME

    def domains_dir(self) -> Path:
        return self.data_dir / "domains"

    @classmethod
    def bootstrap(cls, config: ServerConfig) -> "AppState":
        data_dir = Path(config.data_dir)
        try:
            data_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create data directory {data_dir}: {exc}") from None
        if not os.access(data_dir, os.W_OK):
            raise ConfigError(f"data directory {data_dir} is not writable")

        snapshot = data_dir / SNAPSHOT_NAME
        if snapshot.exists():
            store = RegistryStore.load_snapshot(snapshot)
        else:
            store = RegistryStore()
        for taxonomy in builtin_taxonomies():
            store.register_taxonomy(taxonomy)

        domains_dir = data_dir / "domains"
        manager = DiscoveryManager(
            store, fetcher=file_fetcher(data_dir), document_dir=domains_dir
        )
        for dc in config.domains:
            schema_path = domains_dir / dc.identifier / SCHEMA_NAME
            if schema_path.exists():
                documents = [
                    parse_document(schema_path.read_bytes(), dc.base, source=str(schema_path))
                ]
            else:
                documents = []
                for path in dc.ontology_paths:
                    p = Path(path)
                    try:
                        data = p.read_bytes()
                    except OSError as exc:
                        raise ConfigError(
                            f"domain {dc.identifier}: cannot read ontology {p}: {exc}"
                        ) from None
                    documents.append(parse_document(data, dc.base, source=str(p)))
            manager.add_domain(dc.identifier, documents, base=dc.base)

        # domains created at runtime and persisted with a domain.json marker
        configured = {dc.identifier for dc in config.domains}
        if domains_dir.is_dir():
            for meta_path in sorted(domains_dir.glob(f"*/{DOMAIN_META_NAME}")):
                try:
                    meta = json.loads(meta_path.read_text("utf-8"))
                except (OSError, json.JSONDecodeError) as exc:
                    raise ConfigError(f"cannot read {meta_path}: {exc}") from None
                identifier = meta.get("identifier")
                base = meta.get("base")
                if not isinstance(identifier, str) or not isinstance(base, str):
                    raise ConfigError(f"{meta_path} lacks identifier/base strings")
                if identifier in configured:
                    continue
                schema_path = meta_path.parent / SCHEMA_NAME
                if not schema_path.exists():
                    raise ConfigError(f"domain {identifier}: {schema_path} is missing")
                documents = [
                    parse_document(schema_path.read_bytes(), base, source=str(schema_path))
                ]
                manager.add_domain(identifier, documents, base=base)
        return cls(config, store, manager)

    def persist(self) -> None:
        """Flush a consistent snapshot: registry records plus the combined
        schema document (and marker) of every domain."""
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.store.save_snapshot(self.snapshot_path)
        for identifier in self.manager.domains():
            dom = self.manager.domain(identifier)
            domain_dir = self.domains_dir() / identifier
            domain_dir.mkdir(parents=True, exist_ok=True)
            schema_path = domain_dir / SCHEMA_NAME
            tmp = schema_path.with_name(schema_path.name + ".tmp")
            tmp.write_bytes(self.manager.schema_document(identifier))
            os.replace(tmp, schema_path)
            meta_path = domain_dir / DOMAIN_META_NAME
            meta = json.dumps(
                {"identifier": identifier, "base": dom.base}, sort_keys=True
            ) + "\n"
            if not meta_path.exists() or meta_path.read_text("utf-8") != meta:
                meta_path.write_text(meta, "utf-8")
