"""Loading JSON fixture documents into domain objects.

A document is a JSON object whose ``kind`` is one of ``frame``, ``hset``,
``presheaf``, ``sheaf_structure``, ``hstructure``, ``language``, ``family``,
``boolean_power`` or ``sequents``. When ``kind`` is missing it is inferred
from the keys. Frame references are inline frame objects or the names of the
bundled frames ``F2``, ``S3``, ``B4`` and ``CHAIN4``.

Usage:
    from heytingkit.workspace import load_model

    m = load_model("fix_rc")          # bundled fixture
    m = load_model("my_model.json")   # file on disk
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Any

from .config import DEFAULT_SETTINGS, Settings
from .exceptions import FixtureError, HeytingKitError
from .frame import Filter, Frame, parse_filter
from .hmodel import HStructure, Sequent, validate_hstructure
from .hset import HSet
from .logic import Language, OrdinaryStructure, parse
from .sheaf import Presheaf, SheafOfStructures, boolean_power, discrete_family, lift_structure

logger = logging.getLogger(__name__)

# Bundled documents by lookup name
BUNDLED = {
    "f2": "f2.json",
    "s3": "s3.json",
    "b4": "b4.json",
    "chain4": "chain4.json",
    "fix_rc": "fix_rc.json",
    "fix_fam": "fix_fam.json",
    "fix_neg": "fix_neg.json",
    "sequents": "sequents.json",
}

FRAMES = ("f2", "s3", "b4", "chain4")

KINDS = (
    "frame",
    "hset",
    "presheaf",
    "sheaf_structure",
    "hstructure",
    "language",
    "family",
    "boolean_power",
    "sequents",
)


@contextmanager
def _located(source: str, path: str) -> Iterator[None]:
    """Re-raise construction errors as FixtureError at ``path``."""
    try:
        yield
    except FixtureError:
        raise
    except KeyError as e:
        raise FixtureError(f"missing key {e}", source, path) from e
    except (HeytingKitError, AttributeError, TypeError, ValueError) as e:
        raise FixtureError(str(e), source, path) from e


def _bundled_name(ref: str) -> str | None:
    key = ref.lower().removesuffix(".json")
    return BUNDLED.get(key)


def _read_bundled(filename: str) -> str:
    return (files("heytingkit") / "data" / filename).read_text(encoding="utf-8")


def read_document(ref: str | Path) -> tuple[dict[str, Any], str]:
    """Read a JSON object from a file or a bundled fixture.

    A path that exists on disk wins over a bundled name.

    Returns:
        The parsed object and a source name for diagnostics.

    Raises:
        FixtureError: If the file cannot be read or holds no JSON object.
    """
    path = Path(ref)
    bundled = _bundled_name(str(ref)) if isinstance(ref, str) else None
    if not path.exists() and bundled is not None:
        source = f"<bundled {bundled}>"
        text = _read_bundled(bundled)
    else:
        source = str(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise FixtureError(f"cannot read file: {e.strerror or e}", source) from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FixtureError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}", source) from e
    if not isinstance(data, dict):
        raise FixtureError("a fixture document must be a JSON object", source)
    logger.debug("Read %s", source)
    return data, source


def infer_kind(data: Mapping[str, Any], source: str = "<memory>") -> str:
    """The document kind, explicit or inferred from its keys."""
    kind = data.get("kind")
    if kind is not None:
        if kind not in KINDS:
            raise FixtureError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", source, "$.kind")
        return kind
    keys = set(data)
    if "factors" in keys:
        return "family"
    if "sequents" in keys:
        return "sequents"
    if "algebra" in keys and "structure" in keys:
        return "boolean_power"
    if "sections" in keys:
        return "sheaf_structure" if "language" in keys else "presheaf"
    if "delta" in keys:
        return "hstructure"
    if "alpha" in keys:
        return "hset"
    if {"elements", "leq"} <= keys or {"points", "opens"} <= keys:
        return "frame"
    if keys and keys <= {"functions", "relations"}:
        return "language"
    raise FixtureError("cannot tell which kind of document this is", source)


# -- Single-schema loaders --


def load_frame(ref: Any, source: str = "<memory>", path: str = "$") -> Frame:
    """A frame from an inline object or a bundled frame name."""
    if isinstance(ref, str):
        key = ref.lower()
        if key not in FRAMES:
            raise FixtureError(f"unknown frame {ref!r}; bundled frames are F2, S3, B4, CHAIN4", source, path)
        with _located(f"<bundled {BUNDLED[key]}>", "$"):
            return Frame.from_dict(json.loads(_read_bundled(BUNDLED[key])))
    if not isinstance(ref, Mapping):
        raise FixtureError("a frame must be an object or a bundled frame name", source, path)
    with _located(source, path):
        return Frame.from_dict(ref)


def load_language(data: Any, source: str = "<memory>", path: str = "$") -> Language:
    if not isinstance(data, Mapping):
        raise FixtureError("a language must be an object", source, path)
    with _located(source, path):
        return Language.from_dict(data)


def _element_table(frame: Frame, rows: Any, source: str, path: str) -> list[list[int]]:
    with _located(source, path):
        return [[frame.index(x) for x in row] for row in rows]


def load_hset(data: Mapping[str, Any], source: str = "<memory>") -> HSet:
    frame = load_frame(data.get("frame"), source, "$.frame")
    alpha = _element_table(frame, data.get("alpha", []), source, "$.alpha")
    with _located(source, "$"):
        return HSet(frame, data["carrier"], alpha)


def load_presheaf(data: Mapping[str, Any], source: str = "<memory>") -> Presheaf:
    frame = load_frame(data.get("frame"), source, "$.frame")
    with _located(source, "$.sections"):
        return Presheaf.from_dict(frame, data)


def load_sheaf_structure(data: Mapping[str, Any], source: str = "<memory>") -> SheafOfStructures:
    presheaf = load_presheaf(data, source)
    language = load_language(data.get("language"), source, "$.language")
    with _located(source, "$.functions"):
        return SheafOfStructures.from_dict(presheaf, language, data)


def load_hstructure(data: Mapping[str, Any], source: str = "<memory>") -> HStructure:
    frame = load_frame(data.get("frame"), source, "$.frame")
    language = load_language(data["language"], source, "$.language") if "language" in data else None
    delta = _element_table(frame, data.get("delta", []), source, "$.delta")
    functions = {
        f: _element_table(frame, table, source, f"$.functions.{f}") for f, table in data.get("functions", {}).items()
    }
    relations = {}
    for r, vector in data.get("relations", {}).items():
        with _located(source, f"$.relations.{r}"):
            relations[r] = [frame.index(x) for x in vector]
    with _located(source, "$"):
        return validate_hstructure(frame, data["carrier"], delta, functions, relations, language)


def _ordinary(language: Language, data: Any, source: str, path: str) -> OrdinaryStructure:
    if not isinstance(data, Mapping):
        raise FixtureError("a structure must be an object", source, path)
    with _located(source, path):
        return OrdinaryStructure.from_labels(
            language, data["universe"], data.get("functions", {}), data.get("relations", {})
        )


def load_family(data: Mapping[str, Any], source: str = "<memory>") -> dict[str, OrdinaryStructure]:
    """The factors of a discrete family, in document order."""
    language = load_language(data.get("language"), source, "$.language")
    factors = data.get("factors")
    if not isinstance(factors, Mapping) or not factors:
        raise FixtureError("a family needs a nonempty factors object", source, "$.factors")
    return {str(x): _ordinary(language, m, source, f"$.factors.{x}") for x, m in factors.items()}


def _sequents(data: Mapping[str, Any], source: str) -> tuple[Language, list[Sequent]]:
    language = load_language(data.get("language"), source, "$.language")
    result = []
    for i, item in enumerate(data.get("sequents", [])):
        with _located(source, f"$.sequents[{i}]"):
            context = item.get("context", [])
            result.append(
                Sequent(
                    parse(item["premise"], language, context),
                    parse(item["conclusion"], language, context),
                    item.get("name", f"sequent {i}"),
                )
            )
    return language, result


def load_sequents(ref: str | Path = "sequents") -> list[Sequent]:
    """Sequents from a ``sequents`` document; the bundled list by default."""
    data, source = read_document(ref)
    return _sequents(data, source)[1]


# -- Documents --


@dataclass
class Fixture:
    """A loaded document with whatever structures it determines."""

    kind: str
    source: str
    value: Any
    frame: Frame | None = None
    sheaf: SheafOfStructures | None = None
    factors: dict[str, OrdinaryStructure] | None = None
    language: Language | None = None
    _model: HStructure | None = field(default=None, repr=False)

    @property
    def model(self) -> HStructure | None:
        """The Heyting-valued structure; sheaves are lifted on first access."""
        if self._model is None and self.sheaf is not None:
            self._model = lift_structure(self.sheaf)
        return self._model


def load_document(ref: str | Path) -> Fixture:
    """Load any fixture document.

    Raises:
        FixtureError: Naming the source, the JSON path and the violated rule.
    """
    data, source = read_document(ref)
    kind = infer_kind(data, source)
    if kind == "frame":
        frame = load_frame(data, source)
        return Fixture(kind, source, frame, frame)
    if kind == "language":
        return Fixture(kind, source, load_language(data, source))
    if kind == "hset":
        hset = load_hset(data, source)
        return Fixture(kind, source, hset, hset.frame)
    if kind == "presheaf":
        p = load_presheaf(data, source)
        return Fixture(kind, source, p, p.frame)
    if kind == "sheaf_structure":
        s = load_sheaf_structure(data, source)
        return Fixture(kind, source, s, s.frame, sheaf=s)
    if kind == "hstructure":
        m = load_hstructure(data, source)
        return Fixture(kind, source, m, m.frame, _model=m)
    if kind == "family":
        factors = load_family(data, source)
        with _located(source, "$.factors"):
            s = discrete_family(factors)
        return Fixture(kind, source, s, s.frame, sheaf=s, factors=factors)
    if kind == "boolean_power":
        algebra = load_frame(data.get("algebra"), source, "$.algebra")
        language = load_language(data.get("language"), source, "$.language")
        structure = _ordinary(language, data.get("structure"), source, "$.structure")
        with _located(source, "$"):
            s = boolean_power(algebra, structure)
        return Fixture(kind, source, s, s.frame, sheaf=s)
    language, sequents = _sequents(data, source)
    return Fixture(kind, source, sequents, language=language)


def load_model(ref: str | Path) -> HStructure:
    """An HStructure from an ``hstructure``, ``sheaf_structure``, ``family`` or ``boolean_power`` document."""
    fixture = load_document(ref)
    if fixture.model is None:
        raise FixtureError(f"a {fixture.kind} document does not describe a structure", fixture.source)
    return fixture.model


class Workspace:
    """Loaded fixtures by name together with the settings scans run under.

    Names default to the file stem and must stay unique.
    """

    def __init__(self, settings: Settings | None = None) -> None:
        self.settings = settings or DEFAULT_SETTINGS
        self.fixtures: dict[str, Fixture] = {}

    def load(self, ref: str | Path, name: str | None = None) -> Fixture:
        key = name or Path(str(ref)).stem.lower()
        fixture = load_document(ref)
        known = self.fixtures.get(key)
        if known is not None and known.source != fixture.source:
            raise FixtureError(f"name {key!r} is already used by {known.source}", fixture.source)
        self.fixtures[key] = fixture
        return fixture

    def __getitem__(self, name: str) -> Fixture:
        try:
            return self.fixtures[name]
        except KeyError:
            raise FixtureError(f"no fixture named {name!r}") from None

    def filter(self, frame: Frame, text: str) -> Filter:
        """Resolve ``up:<element>`` or a member list against ``frame``."""
        with _located("<argument>", "--filter"):
            return parse_filter(frame, text)

    @property
    def limit(self) -> int:
        return self.settings.max_enumeration
