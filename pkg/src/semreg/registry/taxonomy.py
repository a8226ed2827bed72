"""Checked taxonomies and the built-in seed set.

File format (tab separated, '#' comments and blank lines ignored):

    taxonomy<TAB><name>
    <code><TAB><label>
    ...
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..errors import ConfigError

UDDI_TYPES = "uddi-org:types"
UNSPSC = "unspsc-org:unspsc"
GEOGRAPHY = "uddi-org:geography"

DAML_SPEC = "damlSpec"
WSDL_SPEC = "wsdlSpec"


@dataclass(frozen=True)
class Taxonomy:
    name: str
    codes: Mapping[str, str] = field(default_factory=dict)

    def has_code(self, code: str) -> bool:
        return code in self.codes


def parse_taxonomy(text: str, origin: str = "<string>") -> Taxonomy:
    name: str | None = None
    codes: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ConfigError(f"{origin}:{lineno}: expected two tab-separated fields")
        left, right = parts[0].strip(), parts[1].strip()
        if name is None:
            if left != "taxonomy":
                raise ConfigError(f"{origin}:{lineno}: first line must be 'taxonomy\\t<name>'")
            name = right
            continue
        if left in codes:
            raise ConfigError(f"{origin}:{lineno}: duplicate code {left!r}")
        codes[left] = right
    if name is None:
        raise ConfigError(f"{origin}: no taxonomy declaration found")
    return Taxonomy(name=name, codes=codes)


def load_taxonomy_file(path: str | Path) -> Taxonomy:
    p = Path(path)
    try:
        text = p.read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read taxonomy file {p}: {exc}") from None
    return parse_taxonomy(text, origin=str(p))


def builtin_taxonomies() -> tuple[Taxonomy, ...]:
    """The packaged seed taxonomies, in load order."""
    base = resources.files("semreg").joinpath("data/taxonomies")
    out = []
    for name in ("uddi_org_types.tsv", "unspsc.tsv", "geography.tsv"):
        text = base.joinpath(name).read_text("utf-8")
        out.append(parse_taxonomy(text, origin=name))
    return tuple(out)
