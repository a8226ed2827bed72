"""In-memory registry store with JSON snapshot persistence.

All mutation goes through a single lock, so writes are serialized; reads
work on snapshots taken under the lock. Keys are UUID strings assigned by
the store.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path
from typing import Callable, Iterable, Sequence

from ..errors import (
    CheckedTaxonomyViolation,
    ConfigError,
    InvalidRequest,
    MissingOverviewDoc,
    NotFound,
    TModelInUse,
    UnknownBusinessKey,
    UnknownTModelKey,
)
from .model import (
    MATCH_ALL,
    MATCH_ANY,
    BusinessEntity,
    BusinessService,
    CategoryBag,
    KeyedReference,
    TModel,
)
from .taxonomy import DAML_SPEC, UDDI_TYPES, Taxonomy

SNAPSHOT_FORMAT = "semreg-registry"
SNAPSHOT_VERSION = 1


def _bag_to_json(bag: CategoryBag) -> list[dict]:
    return [
        {"tmodel_key": e.tmodel_key, "key_name": e.key_name, "key_value": e.key_value}
        for e in bag.entries
    ]


def _bag_from_json(data: list[dict]) -> CategoryBag:
    return CategoryBag(
        tuple(
            KeyedReference(e["tmodel_key"], e.get("key_name", ""), e.get("key_value", ""))
            for e in data
        )
    )


class RegistryStore:
    def __init__(self, key_factory: Callable[[], str] | None = None):
        self._lock = threading.RLock()
        self._tmodels: dict[str, TModel] = {}
        self._businesses: dict[str, BusinessEntity] = {}
        self._services: dict[str, BusinessService] = {}
        self._taxonomies: dict[str, Taxonomy] = {}  # name -> taxonomy
        self._taxonomy_keys: dict[str, str] = {}  # name -> tmodel key
        self._pinned: dict[str, str] = {}  # tmodel key -> reason it must stay
        self._key_factory = key_factory or (lambda: str(uuid.uuid4()))

    # --- taxonomies ---

    def register_taxonomy(self, taxonomy: Taxonomy) -> TModel:
        """Install (or refresh) a checked taxonomy and its tModel."""
        with self._lock:
            self._taxonomies[taxonomy.name] = taxonomy
            key = self._taxonomy_keys.get(taxonomy.name)
            if key is not None:
                return self._tmodels[key]
            key = self._key_factory()
            tmodel = TModel(key=key, name=taxonomy.name)
            self._tmodels[key] = tmodel
            self._taxonomy_keys[taxonomy.name] = key
            return tmodel

    def taxonomy_key(self, name: str) -> str:
        with self._lock:
            key = self._taxonomy_keys.get(name)
            if key is None:
                raise NotFound(f"taxonomy {name} is not registered")
            return key

    def taxonomies(self) -> tuple[Taxonomy, ...]:
        with self._lock:
            return tuple(self._taxonomies[n] for n in sorted(self._taxonomies))

    def _taxonomy_for_key(self, tmodel_key: str) -> Taxonomy | None:
        for name, key in self._taxonomy_keys.items():
            if key == tmodel_key:
                return self._taxonomies[name]
        return None

    # --- validation helpers ---

    def _validate_bag(self, bag: CategoryBag) -> None:
        for e in bag.entries:
            if e.tmodel_key not in self._tmodels:
                raise UnknownTModelKey(e.tmodel_key)
            taxonomy = self._taxonomy_for_key(e.tmodel_key)
            if taxonomy is not None and not taxonomy.has_code(e.key_value):
                raise CheckedTaxonomyViolation(
                    f"{e.key_value!r} is not a valid {taxonomy.name} code"
                )

    def is_damlspec(self, tmodel: TModel) -> bool:
        key = self._taxonomy_keys.get(UDDI_TYPES)
        if key is None:
            return False
        return any(
            e.key_value == DAML_SPEC for e in tmodel.category_bag.references(key)
        )

    # --- tModels ---

    def save_tmodel(self, draft: TModel) -> TModel:
        with self._lock:
            self._validate_bag(draft.category_bag)
            if self.is_damlspec(draft) and not (
                draft.overview_doc and not any(c.isspace() for c in draft.overview_doc)
            ):
                raise MissingOverviewDoc(
                    f"damlSpec tModel {draft.name!r} requires an overview_doc URL"
                )
            for existing in self._tmodels.values():
                if (
                    existing.name == draft.name
                    and existing.overview_doc == draft.overview_doc
                    and existing.category_bag == draft.category_bag
                ):
                    return existing
            if draft.key:
                if draft.key in self._tmodels:
                    raise InvalidRequest(f"tModel key {draft.key} already exists")
                key = draft.key
            else:
                key = self._key_factory()
            tmodel = TModel(key, draft.name, draft.overview_doc, draft.category_bag)
            self._tmodels[key] = tmodel
            return tmodel

    def get_tmodel(self, key: str) -> TModel:
        with self._lock:
            tmodel = self._tmodels.get(key)
            if tmodel is None:
                raise NotFound(f"no tModel with key {key}")
            return tmodel

    def find_tmodels(
        self, name_prefix: str = "", category: KeyedReference | None = None
    ) -> tuple[TModel, ...]:
        with self._lock:
            out = []
            for tmodel in self._tmodels.values():
                if name_prefix and not tmodel.name.startswith(name_prefix):
                    continue
                if category is not None and not self._entry_matches(
                    tmodel.category_bag, category
                ):
                    continue
                out.append(tmodel)
            return tuple(sorted(out, key=lambda t: (t.name, t.key)))

    def pin_tmodel(self, key: str, reason: str) -> None:
        """Protect a tModel from deletion even while no category bag references
        it (semantic bindings keep their tModels alive this way)."""
        with self._lock:
            if key not in self._tmodels:
                raise NotFound(f"no tModel with key {key}")
            self._pinned[key] = reason

    def delete_tmodel(self, key: str) -> None:
        with self._lock:
            if key not in self._tmodels:
                raise NotFound(f"no tModel with key {key}")
            if key in self._taxonomy_keys.values():
                raise TModelInUse(f"tModel {key} is registered as a checked taxonomy")
            if key in self._pinned:
                raise TModelInUse(f"tModel {key} is in use: {self._pinned[key]}")
            referrers = []
            for t in self._tmodels.values():
                if t.key != key and t.category_bag.references(key):
                    referrers.append(t.key)
            for b in self._businesses.values():
                if b.category_bag.references(key):
                    referrers.append(b.key)
            for s in self._services.values():
                if s.category_bag.references(key):
                    referrers.append(s.key)
            if referrers:
                raise TModelInUse(
                    f"tModel {key} is referenced by {len(referrers)} record(s)"
                )
            del self._tmodels[key]

    # --- businesses ---

    def save_business(self, draft: BusinessEntity) -> BusinessEntity:
        with self._lock:
            self._validate_bag(draft.category_bag)
            for existing in self._businesses.values():
                if (
                    existing.name == draft.name
                    and existing.contact == draft.contact
                    and existing.category_bag == draft.category_bag
                ):
                    return existing
            if draft.key:
                if draft.key in self._businesses:
                    raise InvalidRequest(f"business key {draft.key} already exists")
                key = draft.key
            else:
                key = self._key_factory()
            business = BusinessEntity(key, draft.name, draft.contact, draft.category_bag)
            self._businesses[key] = business
            return business

    def get_business(self, key: str) -> BusinessEntity:
        with self._lock:
            business = self._businesses.get(key)
            if business is None:
                raise NotFound(f"no business with key {key}")
            return business

    def businesses(self) -> tuple[BusinessEntity, ...]:
        with self._lock:
            return tuple(self._businesses[k] for k in sorted(self._businesses))

    # --- services ---

    def save_service(self, draft: BusinessService) -> BusinessService:
        with self._lock:
            if draft.business_key not in self._businesses:
                raise UnknownBusinessKey(draft.business_key)
            self._validate_bag(draft.category_bag)
            for existing in self._services.values():
                if (
                    existing.business_key == draft.business_key
                    and existing.name == draft.name
                    and existing.binding_urls == draft.binding_urls
                    and existing.category_bag == draft.category_bag
                ):
                    return existing
            if draft.key:
                if draft.key in self._services:
                    raise InvalidRequest(f"service key {draft.key} already exists")
                key = draft.key
            else:
                key = self._key_factory()
            service = BusinessService(
                key, draft.business_key, draft.name, draft.binding_urls, draft.category_bag
            )
            self._services[key] = service
            return service

    def get_service(self, key: str) -> BusinessService:
        with self._lock:
            service = self._services.get(key)
            if service is None:
                raise NotFound(f"no service with key {key}")
            return service

    def services(self) -> tuple[BusinessService, ...]:
        with self._lock:
            return tuple(self._services[k] for k in sorted(self._services))

    def delete_service(self, key: str) -> None:
        with self._lock:
            if key not in self._services:
                raise NotFound(f"no service with key {key}")
            del self._services[key]

    @staticmethod
    def _entry_matches(bag: CategoryBag, f: KeyedReference) -> bool:
        """A filter with empty key_value matches any entry for its tModel."""
        for e in bag.entries:
            if e.tmodel_key == f.tmodel_key and (not f.key_value or e.key_value == f.key_value):
                return True
        return False

    def find_services(
        self, filters: Sequence[KeyedReference], match: str = MATCH_ALL
    ) -> tuple[BusinessService, ...]:
        if match not in (MATCH_ALL, MATCH_ANY):
            raise InvalidRequest(f"unknown match mode {match!r}")
        if not filters:
            raise InvalidRequest("find_services requires at least one filter")
        with self._lock:
            for f in filters:
                if f.tmodel_key not in self._tmodels:
                    raise UnknownTModelKey(f.tmodel_key)
            combine = all if match == MATCH_ALL else any
            out = [
                s
                for s in self._services.values()
                if combine(self._entry_matches(s.category_bag, f) for f in filters)
            ]
            return tuple(sorted(out, key=lambda s: s.key))

    # --- persistence ---

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "format": SNAPSHOT_FORMAT,
                "version": SNAPSHOT_VERSION,
                "tmodels": [
                    {
                        "key": t.key,
                        "name": t.name,
                        "overview_doc": t.overview_doc,
                        "category_bag": _bag_to_json(t.category_bag),
                    }
                    for t in (self._tmodels[k] for k in sorted(self._tmodels))
                ],
                "businesses": [
                    {
                        "key": b.key,
                        "name": b.name,
                        "contact": b.contact,
                        "category_bag": _bag_to_json(b.category_bag),
                    }
                    for b in (self._businesses[k] for k in sorted(self._businesses))
                ],
                "services": [
                    {
                        "key": s.key,
                        "business_key": s.business_key,
                        "name": s.name,
                        "binding_urls": list(s.binding_urls),
                        "category_bag": _bag_to_json(s.category_bag),
                    }
                    for s in (self._services[k] for k in sorted(self._services))
                ],
                "taxonomies": [
                    {
                        "name": name,
                        "tmodel_key": self._taxonomy_keys[name],
                        "codes": dict(sorted(self._taxonomies[name].codes.items())),
                    }
                    for name in sorted(self._taxonomies)
                ],
            }

    @classmethod
    def restore(
        cls, data: dict, key_factory: Callable[[], str] | None = None
    ) -> "RegistryStore":
        if data.get("format") != SNAPSHOT_FORMAT:
            raise ConfigError("snapshot format not recognized")
        if data.get("version") != SNAPSHOT_VERSION:
            raise ConfigError(f"unsupported snapshot version {data.get('version')!r}")
        store = cls(key_factory=key_factory)
        for t in data.get("tmodels", ()):
            store._tmodels[t["key"]] = TModel(
                t["key"], t["name"], t.get("overview_doc"), _bag_from_json(t["category_bag"])
            )
        for b in data.get("businesses", ()):
            store._businesses[b["key"]] = BusinessEntity(
                b["key"], b["name"], b.get("contact", ""), _bag_from_json(b["category_bag"])
            )
        for s in data.get("services", ()):
            store._services[s["key"]] = BusinessService(
                s["key"],
                s["business_key"],
                s["name"],
                tuple(s.get("binding_urls", ())),
                _bag_from_json(s["category_bag"]),
            )
        for tax in data.get("taxonomies", ()):
            store._taxonomies[tax["name"]] = Taxonomy(tax["name"], dict(tax["codes"]))
            store._taxonomy_keys[tax["name"]] = tax["tmodel_key"]
        problems = store.referential_integrity_errors()
        if problems:
            raise ConfigError("snapshot is inconsistent: " + "; ".join(problems))
        return store

    def save_snapshot(self, path: str | Path) -> None:
        p = Path(path)
        data = json.dumps(self.snapshot(), indent=2, sort_keys=True) + "\n"
        tmp = p.with_name(p.name + ".tmp")
        tmp.write_text(data, "utf-8")
        os.replace(tmp, p)

    @classmethod
    def load_snapshot(
        cls, path: str | Path, key_factory: Callable[[], str] | None = None
    ) -> "RegistryStore":
        try:
            data = json.loads(Path(path).read_text("utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read snapshot {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"snapshot {path} is not valid JSON: {exc}") from None
        return cls.restore(data, key_factory=key_factory)

    # --- integrity ---

    def referential_integrity_errors(self) -> tuple[str, ...]:
        """Full-store walk; empty result means every reference resolves and
        every damlSpec/taxonomy invariant holds."""
        with self._lock:
            problems: list[str] = []

            def check_bag(owner: str, bag: CategoryBag) -> None:
                for e in bag.entries:
                    if e.tmodel_key not in self._tmodels:
                        problems.append(
                            f"{owner} references missing tModel {e.tmodel_key}"
                        )
                        continue
                    taxonomy = self._taxonomy_for_key(e.tmodel_key)
                    if taxonomy is not None and not taxonomy.has_code(e.key_value):
                        problems.append(
                            f"{owner} carries invalid {taxonomy.name} code {e.key_value!r}"
                        )

            for t in self._tmodels.values():
                check_bag(f"tModel {t.key}", t.category_bag)
                if self.is_damlspec(t) and not t.overview_doc:
                    problems.append(f"damlSpec tModel {t.key} lacks an overview_doc")
            for b in self._businesses.values():
                check_bag(f"business {b.key}", b.category_bag)
            for s in self._services.values():
                check_bag(f"service {s.key}", s.category_bag)
                if s.business_key not in self._businesses:
                    problems.append(
                        f"service {s.key} references missing business {s.business_key}"
                    )
            for name, key in self._taxonomy_keys.items():
                if key not in self._tmodels:
                    problems.append(f"taxonomy {name} references missing tModel {key}")
            return tuple(problems)
