"""Server/CLI configuration: JSON file plus environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .ontology.vocab import POEC_BASE

ENV_LISTEN = "SEMREG_LISTEN"
ENV_DATA_DIR = "SEMREG_DATA_DIR"
ENV_TOKEN = "SEMREG_TOKEN"

DEFAULT_LISTEN = "127.0.0.1:8370"
DEFAULT_DATA_DIR = "semreg-data"
DEFAULT_TOKEN = "semreg-dev-token"
DEFAULT_DOMAIN = "poec"


def packaged_data_path(relpath: str) -> Path:
    """Filesystem path of a file shipped under semreg/data."""
    root = resources.files("semreg") / "data"
    path = Path(str(root / relpath))
    if not path.is_file():
        raise ConfigError(f"packaged data file {relpath} not found at {path}")
    return path


@dataclass(frozen=True)
class DomainConfig:
    identifier: str
    ontology_paths: tuple[str, ...]
    base: str = POEC_BASE


def default_domains() -> tuple[DomainConfig, ...]:
    return (
        DomainConfig(
            identifier=DEFAULT_DOMAIN,
            ontology_paths=(
                str(packaged_data_path("upper_ontology.daml")),
                str(packaged_data_path("example_taxonomy.daml")),
            ),
            base=POEC_BASE,
        ),
    )


@dataclass(frozen=True)
class ServerConfig:
    listen: str = DEFAULT_LISTEN
    data_dir: str = DEFAULT_DATA_DIR
    token: str = DEFAULT_TOKEN
    domains: tuple[DomainConfig, ...] = field(default_factory=default_domains)

    @property
    def host(self) -> str:
        return split_listen(self.listen)[0]

    @property
    def port(self) -> int:
        return split_listen(self.listen)[1]


def split_listen(listen: str) -> tuple[str, int]:
    host, sep, port = listen.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"listen address {listen!r} is not host:port")
    try:
        port_num = int(port)
    except ValueError:
        raise ConfigError(f"listen port {port!r} is not a number") from None
    if not 0 < port_num < 65536:
        raise ConfigError(f"listen port {port_num} out of range")
    return host, port_num


def _expect(value, kind, what: str):
    if not isinstance(value, kind):
        raise ConfigError(f"config field {what} must be {kind.__name__}")
    return value


def _domain_from_json(entry: dict, config_dir: Path) -> DomainConfig:
    _expect(entry, dict, "domains[]")
    unknown = set(entry) - {"identifier", "ontology_paths", "base"}
    if unknown:
        raise ConfigError(f"unknown domain config keys: {sorted(unknown)}")
    identifier = _expect(entry.get("identifier", ""), str, "domains[].identifier")
    if not identifier:
        raise ConfigError("domain config needs an identifier")
    paths = entry.get("ontology_paths")
    if not isinstance(paths, list) or not all(isinstance(p, str) for p in paths) or not paths:
        raise ConfigError(
            f"domain {identifier}: ontology_paths must be a non-empty list of strings"
        )
    resolved = tuple(
        str(p if Path(p).is_absolute() else config_dir / p) for p in paths
    )
    base = _expect(entry.get("base", POEC_BASE), str, "domains[].base")
    return DomainConfig(identifier=identifier, ontology_paths=resolved, base=base)


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServerConfig:
    """Build the effective configuration.

    Precedence: environment overrides > config file > defaults. Relative
    paths inside the file resolve against the file's directory.
    """
    environ = os.environ if env is None else env
    listen = DEFAULT_LISTEN
    data_dir = DEFAULT_DATA_DIR
    token = DEFAULT_TOKEN
    domains = default_domains()

    if path is not None:
        p = Path(path)
        try:
            raw = json.loads(p.read_text("utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {p} is not valid JSON: {exc}") from None
        _expect(raw, dict, "(top level)")
        unknown = set(raw) - {"listen", "data_dir", "token", "domains"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        config_dir = p.resolve().parent
        if "listen" in raw:
            listen = _expect(raw["listen"], str, "listen")
        if "data_dir" in raw:
            value = _expect(raw["data_dir"], str, "data_dir")
            data_dir = str(value if Path(value).is_absolute() else config_dir / value)
        if "token" in raw:
            token = _expect(raw["token"], str, "token")
        if "domains" in raw:
            entries = _expect(raw["domains"], list, "domains")
            domains = tuple(_domain_from_json(e, config_dir) for e in entries)
            seen: set[str] = set()
            for d in domains:
                if d.identifier in seen:
                    raise ConfigError(f"duplicate domain identifier {d.identifier!r}")
                seen.add(d.identifier)

    if environ.get(ENV_LISTEN):
        listen = environ[ENV_LISTEN]
    if environ.get(ENV_DATA_DIR):
        data_dir = environ[ENV_DATA_DIR]
    if environ.get(ENV_TOKEN):
        token = environ[ENV_TOKEN]

    split_listen(listen)  # fail fast on malformed addresses
    return ServerConfig(listen=listen, data_dir=data_dir, token=token, domains=domains)
