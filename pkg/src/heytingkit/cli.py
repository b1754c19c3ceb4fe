"""Command-line front-end.

Every subcommand loads JSON fixtures (files or bundled names such as
``fix_rc``), runs one module operation and prints a report on stdout. With
``--format json`` the report is one JSON object per line, ending with a
summary object.

Exit status: 0 when every check passes, 1 when a check fails, 2 when an
input cannot be loaded or parsed.
"""

from __future__ import annotations

import functools
import json
import logging
import random
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import click

from . import __version__
from ._logging import enable_debug
from .config import Settings, load_settings
from .exceptions import HeytingKitError, InvariantError
from .frame import filters
from .hmodel import HStructure, forcing_value, random_hstructure, soundness_check
from .logic import parse
from .losquot import characterization_check, classical_ultraproduct, filter_quotient, is_generic, los_check
from .sheaf import validate_presheaf
from .workspace import Fixture, Workspace, load_frame

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


@dataclass
class _State:
    workspace: Workspace
    fmt: str


class Reporter:
    """Writes report rows in text or JSON Lines form as they are produced."""

    def __init__(self, fmt: str) -> None:
        self.fmt = fmt

    def row(self, data: dict[str, Any], text: str) -> None:
        if self.fmt == "json":
            click.echo(json.dumps(data, ensure_ascii=False))
        else:
            click.echo(text)

    def summary(self, data: dict[str, Any], lines: Iterable[str] = ()) -> None:
        if self.fmt == "json":
            click.echo(json.dumps({"summary": data}, ensure_ascii=False))
        else:
            for line in lines:
                click.echo(line)


def _handle_errors(func: Callable[..., int]) -> Callable[..., None]:
    """Map the command's return value and HeytingKitError to exit codes."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        ctx = click.get_current_context()
        try:
            code = func(*args, **kwargs)
        except InvariantError as e:
            click.echo(f"error: invariant failed: {e}", err=True)
            ctx.exit(EXIT_FAILED)
        except HeytingKitError as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(EXIT_INPUT)
        ctx.exit(code)

    return wrapper


def _report_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Options every report command accepts; they override the group's."""
    func = click.option("--format", "fmt", type=click.Choice(["text", "json"]), default=None, help="Report format.")(func)
    func = click.option("--depth", type=click.IntRange(min=0), default=None, help="Formula depth bound.")(func)
    func = click.option("--seed", type=int, default=None, help="Seed for randomized checks.")(func)
    func = click.option("--verify", is_flag=True, default=None, help="Run universal-property cross-checks.")(func)
    return func


def _setup(fmt: str | None, depth: int | None, seed: int | None, verify: bool | None) -> tuple[Workspace, Reporter]:
    state: _State = click.get_current_context().find_object(_State)
    settings = state.workspace.settings.override(depth=depth, seed=seed, verify=verify)
    state.workspace.settings = settings
    return state.workspace, Reporter(fmt or state.fmt)


def _scan_args(settings: Settings) -> dict[str, Any]:
    return {
        "depth": settings.depth,
        "arity": settings.scan_arity,
        "term_depth": settings.term_depth,
        "limit": settings.max_enumeration,
    }


def _model(ws: Workspace, ref: str) -> tuple[Fixture, HStructure]:
    fixture = ws.load(ref)
    if fixture.model is None:
        raise HeytingKitError(f"{fixture.source}: a {fixture.kind} document does not describe a structure")
    return fixture, fixture.model


@click.group()
@click.version_option(__version__, prog_name="heytingkit")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", help="Report format.")
@click.option("--depth", type=click.IntRange(min=0), default=None, help="Formula depth bound.")
@click.option("--seed", type=int, default=None, help="Seed for randomized checks.")
@click.option("--verify", is_flag=True, default=None, help="Run universal-property cross-checks.")
@click.option("--debug", is_flag=True, help="Log to stderr.")
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Settings file (defaults to the platform config location).",
)
@click.pass_context
def cli(
    ctx: click.Context,
    fmt: str,
    depth: int | None,
    seed: int | None,
    verify: bool | None,
    debug: bool,
    config_path: Path | None,
) -> None:
    """Finite Heyting-valued model theory: forcing values, filter quotients and Łoś checks."""
    if debug:
        enable_debug()
    try:
        settings = load_settings(config_path).override(depth=depth, seed=seed, verify=verify)
    except HeytingKitError as e:
        click.echo(f"error: {e}", err=True)
        ctx.exit(EXIT_INPUT)
    ctx.obj = _State(Workspace(settings), fmt)


# -- Subcommands --


@cli.command()
@click.argument("document")
@click.option("--samples", type=click.IntRange(min=0), default=20, help="Random structures per frame for sequents.")
@_report_options
@_handle_errors
def validate(document: str, samples: int, fmt: str | None, depth: int | None, seed: int | None, verify: bool | None) -> int:
    """Load any fixture document and print its validation flags.

    A ``sequents`` document is checked for soundness on seeded random
    structures over S3 and B4.
    """
    ws, out = _setup(fmt, depth, seed, verify)
    fixture = ws.load(document)
    flags: dict[str, Any] = {"kind": fixture.kind, "source": fixture.source}
    if fixture.kind == "frame":
        frame = fixture.value
        flags |= {
            "elements": frame.size,
            "boolean": frame.is_boolean,
            "maximal_filters": [f.label for f in filters(frame) if f.is_maximal],
        }
    elif fixture.kind == "hset":
        hset = fixture.value
        flags |= {"separated": hset.is_separated, "complete": hset.is_complete(ws.limit)}
    elif fixture.kind == "sequents":
        rng = random.Random(ws.settings.seed)
        failures = []
        for name in ("S3", "B4"):
            frame = load_frame(name)
            for _ in range(samples):
                failures += soundness_check(random_hstructure(frame, rng, fixture.language), fixture.value)
        flags |= {"sequents": len(fixture.value), "samples": 2 * samples, "violations": len(failures)}
        for failure in failures:
            out.row(
                {"sequent": failure.detail.get("sequent"), "params": list(failure.params), **failure.detail},
                f"VIOLATION {failure.detail.get('sequent')} at {failure.params}",
            )
        out.summary(flags, [f"{k}: {v}" for k, v in flags.items()])
        return EXIT_FAILED if failures else EXIT_OK
    if fixture.kind in ("presheaf", "sheaf_structure", "family", "boolean_power"):
        presheaf = fixture.value if fixture.kind == "presheaf" else fixture.value.presheaf
        report = validate_presheaf(presheaf, limit=ws.limit)
        flags |= {"functorial": report.functorial, "separated": report.separated, "sheaf": report.sheaf}
    if fixture.model is not None:
        m = fixture.model
        flags |= {"carrier": m.size, "witness_choices": m.witness_count()}
    out.summary(flags, [f"{k}: {v}" for k, v in flags.items()])
    return EXIT_OK


@cli.command(name="eval")
@click.option("--model", "model_ref", required=True, help="Structure document or bundled name.")
@click.option("--formula", "text", required=True, help="Formula text.")
@click.option("--params", default="", help="Comma-separated carrier labels for the free variables.")
@click.option("--path", type=click.Choice(["recursion", "categorical"]), default="recursion")
@click.option("--trace", is_flag=True, help="Print the recursion trace.")
@_report_options
@_handle_errors
def eval_command(
    model_ref: str,
    text: str,
    params: str,
    path: str,
    trace: bool,
    fmt: str | None,
    depth: int | None,
    seed: int | None,
    verify: bool | None,
) -> int:
    """Print the forcing value of a formula at parameters."""
    ws, out = _setup(fmt, depth, seed, verify)
    _, m = _model(ws, model_ref)
    fic = parse(text, m.language, parameters=m.labels())
    values = [p.strip() for p in params.split(",") if p.strip()]
    report = forcing_value(m, fic, values, path, trace=trace)
    if ws.settings.verify:
        other = forcing_value(m, fic, values, "categorical" if path == "recursion" else "recursion")
        if other.value != report.value:
            raise InvariantError(f"Paths disagree on {text}: {m.frame.name(report.value)} vs {m.frame.name(other.value)}")
    for step in report.trace:
        out.row(
            {"formula": step.formula, "assignment": dict(step.assignment), "value": step.value},
            f"  {step.formula} {dict(step.assignment)} = {step.value}",
        )
    value = m.frame.name(report.value)
    out.summary({"formula": text, "params": values, "value": value, "path": path}, [value])
    return EXIT_OK


@cli.command()
@click.option("--model", "model_ref", required=True)
@click.option("--filter", "filter_text", required=True, help="up:<element> or a member list.")
@_report_options
@_handle_errors
def quotient(model_ref: str, filter_text: str, fmt: str | None, depth: int | None, seed: int | None, verify: bool | None) -> int:
    """Print the classes of M/f and the structure of its global elements."""
    ws, out = _setup(fmt, depth, seed, verify)
    fixture, m = _model(ws, model_ref)
    f = ws.filter(m.frame, filter_text)
    q = filter_quotient(m, f, sheaf=fixture.sheaf)
    qm = q.structure
    for i, members in enumerate(q.classes):
        extent = qm.frame.name(qm.carrier.extent(i))
        names = [m.name(a) for a in members]
        out.row(
            {"class": qm.name(i), "members": names, "extent": extent, "global": i in q.global_classes},
            f"{qm.name(i)} = {{{', '.join(names)}}}  extent {extent}",
        )
    gamma = q.gamma
    relations = {r: sorted([str(gamma.universe[x]) for x in t] for t in rows) for r, rows in gamma.relations.items()}
    constants = {c: str(gamma.universe[gamma.apply(c, ())]) for c in m.language.constants}
    summary = {
        "filter": f.label,
        "classes": len(q.classes),
        "gamma": [str(x) for x in gamma.universe],
        "constants": constants,
        "relations": relations,
    }
    out.summary(
        summary,
        [
            f"Γ(M/{f.label}) = {{{', '.join(summary['gamma'])}}}",
            *(f"  {c} = {v}" for c, v in constants.items()),
            *(f"  {r}: {rows}" for r, rows in relations.items()),
        ],
    )
    return EXIT_OK


@cli.command(name="check-generic")
@click.option("--model", "model_ref", required=True)
@click.option("--filter", "filter_text", required=True)
@_report_options
@_handle_errors
def check_generic(
    model_ref: str, filter_text: str, fmt: str | None, depth: int | None, seed: int | None, verify: bool | None
) -> int:
    """Check the bounded genericity conditions for a filter."""
    ws, out = _setup(fmt, depth, seed, verify)
    _, m = _model(ws, model_ref)
    report = is_generic(m, ws.filter(m.frame, filter_text), **_scan_args(ws.settings))
    data = report.to_dict()
    lines = [f"{report.filter}: {report.label}", f"atomic stability: {report.atomic_stable}"]
    for key in ("dichotomy_witness", "witness_failure", "atomic_witness"):
        if data[key] is not None:
            lines.append(f"  {key}: {data[key]['formula']} at {data[key]['params']}")
    out.summary(data, lines)
    return EXIT_OK if report.generic else EXIT_FAILED


@cli.command(name="check-los")
@click.option("--model", "model_ref", required=True)
@click.option("--filter", "filter_text", required=True)
@click.option("--corollary", is_flag=True, help="Also compare plain forcing values on ∀-free formulas.")
@_report_options
@_handle_errors
def check_los(
    model_ref: str,
    filter_text: str,
    corollary: bool,
    fmt: str | None,
    depth: int | None,
    seed: int | None,
    verify: bool | None,
) -> int:
    """Compare Γ(M/f) with Gödel forcing values on every formula up to the depth."""
    ws, out = _setup(fmt, depth, seed, verify)
    _, m = _model(ws, model_ref)
    report = los_check(m, ws.filter(m.frame, filter_text), corollary=corollary, **_scan_args(ws.settings))
    for row in report.rows:
        out.row(
            row.to_dict(),
            f"{'PASS' if row.passed else 'FAIL'}  {row.formula}  [{', '.join(row.params)}]  "
            f"Γ⊨ {row.gamma_sat}  value {row.forcing_value}  in filter {row.in_filter}  ({row.mode})",
        )
    g = report.genericity
    summary = {
        "filter": report.filter,
        "depth": report.depth,
        "rows": len(report.rows),
        "failures": len(report.failures),
        "ok": report.ok,
        "generic": g.generic,
        "atomic_stable": g.atomic_stable,
    }
    out.summary(
        summary,
        [
            f"{len(report.failures)} of {len(report.rows)} rows fail for {report.filter} at depth {report.depth}",
            f"{report.filter} is {g.label}; atomic stability {g.atomic_stable}",
        ],
    )
    return EXIT_OK if report.ok else EXIT_FAILED


@cli.command(name="check-char")
@click.option("--model", "model_ref", required=True)
@_report_options
@_handle_errors
def check_char(model_ref: str, fmt: str | None, depth: int | None, seed: int | None, verify: bool | None) -> int:
    """Check the variant maximum principle against genericity and Łoś for maximal filters."""
    ws, out = _setup(fmt, depth, seed, verify)
    _, m = _model(ws, model_ref)
    report = characterization_check(m, **_scan_args(ws.settings))
    for cover in report.covers:
        out.row(
            {
                "formula": cover.formula,
                "params": list(cover.params),
                "target": sorted(cover.target),
                "pieces": [sorted(p) for p in cover.pieces],
                "covered": cover.covered,
            },
            f"{'COVER' if cover.covered else 'GAP'}  {cover.formula}  [{', '.join(cover.params)}]",
        )
    summary = {
        "depth": report.depth,
        "variant_max_principle": report.variant_holds,
        "maximal_generic": report.maximal_generic,
        "maximal_los": report.maximal_los,
        "equivalent": report.equivalent,
        "covers": report.covers_hold,
        "ultrafilters": report.ultrafilters,
    }
    out.summary(summary, [f"{k}: {v}" for k, v in summary.items()])
    ok = report.variant_holds and report.maximal_generic and report.maximal_los and report.covers_hold
    return EXIT_OK if ok else EXIT_FAILED


@cli.command()
@click.option("--family", "family_ref", required=True, help="Family document or bundled name.")
@click.option("--filter", "filter_text", required=True, help="up:<index set>, for example up:{x}.")
@_report_options
@_handle_errors
def ultraproduct(
    family_ref: str, filter_text: str, fmt: str | None, depth: int | None, seed: int | None, verify: bool | None
) -> int:
    """Build the classical ultraproduct of a family and compare it with the sheaf side."""
    ws, out = _setup(fmt, depth, seed, verify)
    fixture = ws.load(family_ref)
    if fixture.factors is None or fixture.sheaf is None:
        raise HeytingKitError(f"{fixture.source}: a {fixture.kind} document is not a family")
    u = ws.filter(fixture.sheaf.frame, filter_text)
    report = classical_ultraproduct(fixture.factors, u, ws.settings.depth, limit=ws.limit)
    for formula in report.disagreements:
        out.row({"formula": formula}, f"DISAGREE  {formula}")
    summary = {
        "index": report.index,
        "universe": [str(x) for x in report.structure.universe],
        "matches_factor": report.matches_factor,
        "matches_sections": report.matches_sections,
        "matches_gamma": report.matches_gamma,
        "disagreements": len(report.disagreements),
        "ok": report.ok,
    }
    out.summary(summary, [f"{k}: {v}" for k, v in summary.items()])
    return EXIT_OK if report.ok else EXIT_FAILED


@cli.command(name="list-filters")
@click.option("--frame", "frame_ref", required=True, help="Bundled frame name or frame document.")
@_report_options
@_handle_errors
def list_filters(frame_ref: str, fmt: str | None, depth: int | None, seed: int | None, verify: bool | None) -> int:
    """Print every filter of a frame with its classification."""
    ws, out = _setup(fmt, depth, seed, verify)
    frame = ws.load(frame_ref).frame
    if frame is None:
        raise HeytingKitError(f"{frame_ref} does not determine a frame")
    for f in filters(frame):
        members = sorted(frame.name(a) for a in f.members)
        out.row(
            {"filter": f.label, "members": members, "proper": f.is_proper, "prime": f.is_prime, "maximal": f.is_maximal},
            f"{f.label:<12} proper={f.is_proper} prime={f.is_prime} maximal={f.is_maximal}",
        )
    return EXIT_OK


def main() -> None:
    """Console script entry point."""
    cli(prog_name="heytingkit")


if __name__ == "__main__":
    main()
