"""heytingkit - finite Heyting-valued model theory.

Frames, Heyting-valued sets, sheaves of structures, forcing values of
first-order formulas, filter quotients and Łoś-type transfer, all over
finite data and checked exhaustively up to a formula depth.

Example usage:
    from heytingkit import Filter, forcing_value, load_model, los_check, parse

    m = load_model("fix_rc")
    value = forcing_value(m, parse("~~R(c1)", m.language, parameters=m.labels()))
    m.frame.name(value.value)  # "1"

    report = los_check(m, Filter.principal(m.frame, "u"), depth=3)
    report.ok  # True
"""

from __future__ import annotations

from ._logging import disable_debug, enable_debug
from .config import DEFAULT_SETTINGS, Settings, get_config_path, load_settings, save_settings
from .exceptions import (
    AssumptionFailedError,
    EmptyFactorWithoutConstantError,
    EmptyUniverseWarning,
    FixtureError,
    FormulaSyntaxError,
    FrameError,
    HeytingKitError,
    HSetLawError,
    ImproperFilterError,
    InvariantError,
    NotAFilterError,
    PresheafError,
    SizeGuardError,
)
from .frame import Filter, Frame, FrameHom, QuotientHA, RegularAlgebra, filters, parse_filter, regular_algebra
from .hmodel import (
    HStructure,
    forcing_value,
    gamma_structure,
    godel_stability_check,
    max_principle_check,
    soundness_check,
    validate_hstructure,
    verify_paths,
)
from .hset import HMorphism, HSet, StrictRelation, change_of_base, subobjects
from .logic import FormulaInContext, Language, OrdinaryStructure, format_formula, parse, tarski_eval
from .losquot import characterization_check, classical_ultraproduct, filter_quotient, is_generic, los_check
from .sheaf import (
    Presheaf,
    SheafOfStructures,
    boolean_power,
    discrete_family,
    lift_structure,
    sections_and_quotient,
    theta,
)
from .workspace import Workspace, load_document, load_model, load_sequents

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SETTINGS",
    "AssumptionFailedError",
    "EmptyFactorWithoutConstantError",
    "EmptyUniverseWarning",
    "Filter",
    "FixtureError",
    "FormulaInContext",
    "FormulaSyntaxError",
    "Frame",
    "FrameError",
    "FrameHom",
    "HMorphism",
    "HSet",
    "HSetLawError",
    "HStructure",
    "HeytingKitError",
    "ImproperFilterError",
    "InvariantError",
    "Language",
    "NotAFilterError",
    "OrdinaryStructure",
    "Presheaf",
    "PresheafError",
    "QuotientHA",
    "RegularAlgebra",
    "Settings",
    "SheafOfStructures",
    "SizeGuardError",
    "StrictRelation",
    "Workspace",
    "__version__",
    "boolean_power",
    "change_of_base",
    "characterization_check",
    "classical_ultraproduct",
    "disable_debug",
    "discrete_family",
    "enable_debug",
    "filter_quotient",
    "filters",
    "forcing_value",
    "format_formula",
    "gamma_structure",
    "get_config_path",
    "godel_stability_check",
    "is_generic",
    "lift_structure",
    "load_document",
    "load_model",
    "load_sequents",
    "load_settings",
    "los_check",
    "max_principle_check",
    "parse",
    "parse_filter",
    "regular_algebra",
    "save_settings",
    "sections_and_quotient",
    "soundness_check",
    "subobjects",
    "tarski_eval",
    "theta",
    "validate_hstructure",
    "verify_paths",
]


def __getattr__(name: str):
    """Lazy import of the command-line entry point."""
    if name == "main":
        from .cli import main

        return main
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
