"""Error vocabulary shared by every layer.

Each exception class name doubles as the machine-readable error code that the
HTTP envelope and the CLI surface verbatim, so renaming a class here is a
wire-format change.
"""

from __future__ import annotations


class SemRegError(Exception):
    """Base class for all domain errors."""

    @property
    def code(self) -> str:
        return type(self).__name__

    def details(self) -> dict:
        """Structured attributes (positions, entities, cycles) for envelopes."""
        out = {}
        for name, value in vars(self).items():
            if name.startswith("_"):
                continue
            out[name] = list(value) if isinstance(value, tuple) else value
        return out


# --- ontology parsing / merging ---

class XmlMalformed(SemRegError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(message)
        self.line = line
        self.column = column


class UnsupportedConstructFatal(SemRegError):
    pass


class ConflictingDefinition(SemRegError):
    def __init__(self, entity: str, sources: tuple[str, ...]):
        super().__init__(
            f"conflicting definitions for {entity} from sources {', '.join(sources)}"
        )
        self.entity = entity
        self.sources = sources


class CyclicHierarchy(SemRegError):
    def __init__(self, kind: str, cycle: tuple[str, ...]):
        super().__init__(f"cyclic {kind} hierarchy through {', '.join(cycle)}")
        self.kind = kind
        self.cycle = cycle


# --- reasoner ---

class UnknownClass(SemRegError):
    pass


class UnknownProperty(SemRegError):
    pass


# --- registry ---

class UnknownTModelKey(SemRegError):
    pass


class UnknownBusinessKey(SemRegError):
    pass


class CheckedTaxonomyViolation(SemRegError):
    pass


class MissingOverviewDoc(SemRegError):
    pass


class TModelInUse(SemRegError):
    pass


class NotFound(SemRegError):
    pass


# --- catalogs ---

class FetchFailed(SemRegError):
    pass


class ParseFailed(SemRegError):
    pass


class DuplicateItemId(SemRegError):
    pass


class TypeMismatch(SemRegError):
    pass


class MalformedDescriptor(SemRegError):
    pass


class UnsupportedSchemaType(SemRegError):
    pass


class MalformedQuery(SemRegError):
    pass


# --- semantic discovery ---

class UnknownGenericClass(SemRegError):
    pass


class OntologyMergeConflict(SemRegError):
    pass


class InvalidInstanceDocument(SemRegError):
    pass


class UnknownDomain(SemRegError):
    pass


# --- server / config ---

class ConfigError(SemRegError):
    pass


class Unauthorized(SemRegError):
    pass


class InvalidRequest(SemRegError):
    pass
