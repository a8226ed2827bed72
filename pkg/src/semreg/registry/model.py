"""Registry record types: tModels, businesses, services, category bags."""

from __future__ import annotations

from dataclasses import dataclass, field

MATCH_ALL = "ALL"
MATCH_ANY = "ANY"


@dataclass(frozen=True)
class KeyedReference:
    tmodel_key: str
    key_name: str = ""
    key_value: str = ""


@dataclass(frozen=True)
class CategoryBag:
    entries: tuple[KeyedReference, ...] = ()

    def __post_init__(self):
        # duplicate (tmodel_key, key_value) pairs collapse to the first entry
        seen: set[tuple[str, str]] = set()
        deduped = []
        for e in self.entries:
            key = (e.tmodel_key, e.key_value)
            if key in seen:
                continue
            seen.add(key)
            deduped.append(e)
        if len(deduped) != len(self.entries):
            object.__setattr__(self, "entries", tuple(deduped))

    def references(self, tmodel_key: str) -> tuple[KeyedReference, ...]:
        return tuple(e for e in self.entries if e.tmodel_key == tmodel_key)

    def extended(self, extra: tuple[KeyedReference, ...]) -> "CategoryBag":
        return CategoryBag(self.entries + extra)


@dataclass(frozen=True)
class TModel:
    key: str
    name: str
    overview_doc: str | None = None
    category_bag: CategoryBag = field(default_factory=CategoryBag)


@dataclass(frozen=True)
class BusinessEntity:
    key: str
    name: str
    contact: str = ""
    category_bag: CategoryBag = field(default_factory=CategoryBag)


@dataclass(frozen=True)
class BusinessService:
    key: str
    business_key: str
    name: str
    binding_urls: tuple[str, ...] = ()
    category_bag: CategoryBag = field(default_factory=CategoryBag)
