#!/usr/bin/env python
"""
Command line front end of geonoether.

Check the listed symmetries of a built-in scenario:
```
geonoether noether-check --scenario sphere:row=1:K=1
geonoether lie-check --scenario newtonian:lie-first:3 --alternative
```

Search for Noether symmetries of another potential on the sphere:
```
geonoether noether-find --scenario sphere:K=1 --potential "cos(theta)*sin(phi)"
```

Solve the determining equations of flat space (negative signatures need the `=` form):
```
geonoether solve-killing --dim 3 --signature +++ --kind KV
geonoether solve-killing --dim 2 --signature=-+ --kind AC
```

Reproduce the cataloged tables at desk scale:
```
GEONOETHER_SEED=0 geonoether report --table all --output_dir report --csv
```

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or input errors.
"""

import functools
import json
import os
import sys
from os import path as osp
from typing import Literal

import aiofiles
from loguru import logger
from pydantic import BaseModel, Field
from tabulate import tabulate

from evaluation.cli import CommandGroup
from evaluation.recorder import log_formatter
from evaluation.report import REPORT_TABLES, run_report
from evaluation.scenario_file import ScenarioFile, load_scenario_file
from evaluation.spaces import SPACES, SpaceName, parse_signature
from geonoether.base import CheckSettings, ConditionReport, GeonoetherError, ScenarioError
from geonoether.collineation import CollineationBasis, bracket_residual, solve_determining_equations, verify_basis
from geonoether.dynamics import IntegrationMethod, conservation_drift, integrate, trajectory_csv
from geonoether.expr import is_zero
from geonoether.geometry import Metric, SampleBox, halton_samples
from geonoether.scenario import ExpectedSymmetry, Scenario, load_scenario
from geonoether.symmetry import (
    NoetherSymmetry,
    find_noether_symmetries,
    lie_conditions,
    lie_conditions_alternative,
    span_dimension,
)


NEGATIVE_CONTROL_RESIDUAL = 1e-2

commands = CommandGroup("geonoether", "Lie and Noether point symmetries of second order systems")


# ======================================================================================================================
# SHARED CONFIG
# ======================================================================================================================


class ScenarioSource(BaseModel):
    scenario: str | None = Field(description="Scenario address, e.g. 'sphere:K=1' or 'bianchi:II:zero'", default=None)
    file: str | None = Field(description="Scenario file (JSON) instead of an address", default=None)
    tol: float | None = Field(description="Residual tolerance (default 1e-8)", default=None)
    samples: int | None = Field(description="Number of sample points (default 200)", default=None)
    seed: int | None = Field(description="Sample sequence seed (default 0, or GEONOETHER_SEED)", default=None)
    margin: float | None = Field(description="Distance kept from the excluded locus (default 0.1)", default=None)

    def load(self) -> tuple[Scenario, CheckSettings, ScenarioFile | None]:
        if (self.scenario is None) == (self.file is None):
            raise ScenarioError("Give exactly one of --scenario or --file")
        document = None
        if self.file is not None:
            document = load_scenario_file(self.file)
            scenario = document.to_scenario(self.file)
            settings = document.settings()
        else:
            scenario = load_scenario(self.scenario)
            settings = CheckSettings()
        overrides = {k: getattr(self, k) for k in ("tol", "samples", "seed", "margin") if getattr(self, k) is not None}
        settings = settings.model_copy(update=overrides)
        logger.info(f"Scenario {scenario.name}: seed {settings.seed}, {settings.samples} samples, tol {settings.tol:g}")
        return scenario, settings, document


def _verdict(passed: bool) -> str:
    return "ok" if passed else "FAIL"


def _entry_row(entry: ExpectedSymmetry, report: ConditionReport) -> tuple[list, bool]:
    if entry.holds:
        passed = report.passed
    else:
        passed = report.maximum >= NEGATIVE_CONTROL_RESIDUAL
    blocks = ", ".join(f"{name} {value:.1e}" for name, value in report.residuals().items())
    expected = "pass" if entry.holds else "fail"
    row = [entry.name, entry.case, entry.provenance, expected, f"{report.maximum:.3e}", blocks, _verdict(passed)]
    return row, passed


def _print_entries(rows: list[list], fmt: str, headers: list[str]) -> None:
    if fmt == "json":
        print(json.dumps([dict(zip(headers, row)) for row in rows], indent=2, ensure_ascii=False))
    else:
        print(tabulate(rows, headers=headers, tablefmt="simple", disable_numparse=True))


ENTRY_HEADERS = ["vector", "case", "provenance", "expected", "residual", "blocks", "result"]


# ======================================================================================================================
# COLLINEATIONS
# ======================================================================================================================


class CatalogConfig(BaseModel):
    space: SpaceName = Field(description="Built-in space whose collineation catalog is listed", default="sphere")


def _claim_rows(basis: CollineationBasis) -> list[list[str]]:
    rows = []
    for claim in basis:
        factor = claim.phi if claim.kind in ("PC", "SPC") else claim.psi
        gradient = "" if claim.gradient_function is None else str(claim.gradient_function)
        rows.append([claim.name, claim.kind, str(factor), gradient, claim.vector.describe()])
    return rows


@commands.command("catalog")
def catalog(config: CatalogConfig) -> None:
    """List the collineation catalog of a built-in space."""
    basis = SPACES[config.space].catalog()
    print(f"{config.space}: {basis.metric!r}")
    headers = ["name", "kind", "ψ or φ", "gradient of", "vector"]
    print(tabulate(_claim_rows(basis), headers=headers, tablefmt="simple", disable_numparse=True))
    counts = ", ".join(f"{n} {kind}" for kind, n in basis.counts().items())
    print(f"\n{len(basis)} vectors: {counts}")


class SolveKillingConfig(BaseModel):
    dim: int = Field(description="Dimension of the flat space", default=3)
    signature: str | None = Field(description="Signs of the metric diagonal, e.g. '+++' or '-++'", default=None)
    kind: Literal["KV", "HV", "AC", "SPC"] = Field(description="Collineation kind to solve for", default="KV")
    degree: int = Field(description="Maximum polynomial degree of the ansatz", default=2)
    metric: str | None = Field(description="Scenario file whose (constant) metric is used instead", default=None)
    samples: int = Field(description="Sample points for verifying the basis", default=100)
    tol: float = Field(description="Residual tolerance of the verification", default=1e-12)


@commands.command("solve-killing")
def solve_killing(config: SolveKillingConfig) -> bool:
    """Solve the determining equations of a constant metric exactly and verify the basis."""
    if config.metric is not None:
        metric = load_scenario_file(config.metric).to_scenario(config.metric).metric
    else:
        metric = Metric.flat(parse_signature(config.signature, config.dim))
    basis = solve_determining_equations(metric, config.kind, max_degree=config.degree)

    n = metric.dimension
    box = SampleBox(lower=[-1.0] * n, upper=[1.0] * n)
    samples = halton_samples(metric.chart, box, config.samples, seed=CheckSettings().seed)
    reports = verify_basis(basis, samples, config.tol)
    headers = ["name", "kind", "ψ or φ", "gradient of", "vector", "residual"]
    rows = [row + [f"{r.maximum:.3e}"] for row, r in zip(_claim_rows(basis), reports)]
    print(tabulate(rows, headers=headers, tablefmt="simple", disable_numparse=True))
    print(f"\n{len(basis)} {config.kind} basis vectors")
    return all(r.passed for r in reports)


class VerifyCollineationConfig(BaseModel):
    space: SpaceName = Field(description="Built-in space whose catalog is verified", default="sphere")
    samples: int = Field(description="Number of sample points", default=100)
    tol: float | None = Field(description="Residual tolerance (default per space)", default=None)
    seed: int | None = Field(description="Sample sequence seed", default=None)


@commands.command("verify-collineation")
def check_collineations(config: VerifyCollineationConfig) -> bool:
    """Check every cataloged collineation of a space against its defining equation."""
    space = SPACES[config.space]
    basis = space.catalog()
    tol = config.tol if config.tol is not None else space.tol
    seed = config.seed if config.seed is not None else CheckSettings().seed
    samples = halton_samples(basis.metric.chart, space.box, config.samples, seed=seed)

    reports = verify_basis(basis, samples, tol)
    rows = []
    for r in reports:
        blocks = ", ".join(f"{k} {v:.1e}" for k, v in r.residuals().items())
        rows.append([r.subject, r.kind, f"{r.maximum:.3e}", blocks, _verdict(r.passed)])
    passed = all(r.passed for r in reports)
    if space.structure is not None:
        residual = bracket_residual(basis, space.structure, samples)
        rows.append(["[Y_a, Y_b]", "bracket", f"{residual:.3e}", "structure constants", _verdict(residual <= tol)])
        passed = passed and residual <= tol
    headers = ["vector", "kind", "residual", "blocks", "result"]
    print(tabulate(rows, headers=headers, tablefmt="simple", disable_numparse=True))
    return passed


# ======================================================================================================================
# SYMMETRY CHECKS
# ======================================================================================================================


class LieCheckConfig(ScenarioSource):
    vector: list[str] | None = Field(description="Only check these vectors", default=None)
    alternative: bool = Field(description="Also evaluate the alternative form of the first two blocks", default=False)
    format: Literal["table", "json"] = Field(description="Output format", default="table")


def _selected(entries: list[ExpectedSymmetry], names: list[str] | None) -> list[ExpectedSymmetry]:
    if names is None:
        return entries
    known = {e.name for e in entries}
    unknown = [n for n in names if n not in known]
    if unknown:
        raise ScenarioError(f"Unknown vectors {unknown}; the scenario lists {sorted(known)}")
    return [e for e in entries if e.name in names]


@commands.command("lie-check")
def lie_check(config: LieCheckConfig) -> bool:
    """Evaluate the Lie symmetry conditions for the scenario's listed generators."""
    scenario, settings, _ = config.load()
    entries = scenario.lie_entries(holds=None)
    if not entries:
        # every Noether point symmetry is a Lie point symmetry of the Euler-Lagrange equations
        entries = [e.model_copy(update={"kind": "lie"}) for e in scenario.noether_entries(holds=None)]
    entries = _selected(entries, config.vector)
    if not entries:
        raise ScenarioError(f"{scenario.name} lists no generators to check")

    samples = scenario.samples(settings)
    rows, passed = [], True
    headers = ENTRY_HEADERS + (["alternative", "paths differ by"] if config.alternative else [])
    for entry in entries:
        report = lie_conditions(entry.vector, scenario.metric, scenario.force, samples, settings.tol)
        row, ok = _entry_row(entry, report)
        if config.alternative:
            other = lie_conditions_alternative(entry.vector, scenario.metric, scenario.force, samples, settings.tol)
            difference = max(abs(a - b) for a, b in zip(report.residuals().values(), other.residuals().values()))
            row += [f"{other.maximum:.3e}", f"{difference:.1e}"]
        rows.append(row)
        passed = passed and ok
    _print_entries(rows, config.format, headers)
    return passed


class NoetherCheckConfig(ScenarioSource):
    vector: list[str] | None = Field(description="Only check these vectors", default=None)
    format: Literal["table", "json"] = Field(description="Output format", default="table")


@commands.command("noether-check")
def noether_check(config: NoetherCheckConfig) -> bool:
    """Evaluate the Noether conditions, gauge included, for the scenario's listed generators."""
    scenario, settings, _ = config.load()
    entries = _selected(scenario.noether_entries(holds=None), config.vector)
    if not entries:
        raise ScenarioError(f"{scenario.name} lists no Noether symmetries")
    samples = scenario.samples(settings)
    rows, passed = [], True
    for entry in entries:
        row, ok = _entry_row(entry, scenario.check(entry, samples, settings.tol))
        rows.append(row)
        passed = passed and ok
    _print_entries(rows, config.format, ENTRY_HEADERS)
    return passed


class NoetherFindConfig(ScenarioSource):
    potential: str | None = Field(description="Replace the scenario's potential", default=None)


def describe_integral(s: NoetherSymmetry) -> str:
    """I = ξE − g(η, ẋ) + G written out for one symmetry."""
    terms = []
    if not is_zero(s.vector.xi):
        terms.append("E" if str(s.vector.xi) == "1" else f"({s.vector.xi})E")
    if any(not is_zero(e) for e in s.vector.eta):
        terms.append(f"- g(({', '.join(str(e) for e in s.vector.eta)}), ẋ)")
    if not is_zero(s.gauge):
        terms.append(f"+ {s.gauge}")
    return " ".join(terms).lstrip("+ ") or "0"


@commands.command("noether-find")
def noether_find(config: NoetherFindConfig) -> None:
    """Search the scenario's collineation catalog for Noether point symmetries and print their integrals."""
    scenario, settings, _ = config.load()
    if config.potential is not None:
        scenario = scenario.with_potential(config.potential)
    if scenario.catalog is None or scenario.potential is None:
        raise ScenarioError(f"{scenario.name} needs a catalog and a potential to search")

    samples = scenario.samples(settings)
    fresh = scenario.samples(settings, fresh=True)
    found = find_noether_symmetries(scenario.catalog, scenario.potential, samples, fresh, settings.tol)
    rows = [
        [
            s.name,
            s.case,
            f"{s.psi:g}",
            f"{s.p:g}",
            "" if s.m is None else f"{s.m:g}",
            str(s.gauge),
            describe_integral(s),
        ]
        for s in found
    ]
    print(f"V = {scenario.potential}")
    headers = ["symmetry", "case", "ψ", "p", "m", "gauge", "integral"]
    print(tabulate(rows, headers=headers, tablefmt="simple", disable_numparse=True))
    dimension = span_dimension([s.vector for s in found], samples)
    print(f"\n{dimension} independent Noether point symmetries")


# ======================================================================================================================
# DYNAMICS
# ======================================================================================================================


class SimulateConfig(ScenarioSource):
    x0: list[float] | None = Field(description="Initial position", default=None)
    v0: list[float] | None = Field(description="Initial velocity", default=None)
    t_span: tuple[float, float] | None = Field(description="Start and end time", default=None)
    method: IntegrationMethod | None = Field(description="RK4 (fixed step) or RK45 (adaptive)", default=None)
    step: float | None = Field(description="RK4 step", default=None)
    integration_tol: float | None = Field(description="RK45 absolute and relative tolerance", default=None)
    output: str | None = Field(description="CSV path; standard output when omitted", default=None)

    def run_parameters(self, document: ScenarioFile | None) -> dict:
        section = document.simulate.model_dump() if document is not None and document.simulate is not None else {}
        flags = {"x0": self.x0, "v0": self.v0, "t_span": self.t_span, "method": self.method, "step": self.step}
        flags["tol"] = self.integration_tol
        parameters = {**section, **{k: v for k, v in flags.items() if v is not None}}
        if "x0" not in parameters or "v0" not in parameters:
            raise ScenarioError("An initial state needs --x0 and --v0 (or a 'simulate' section in the file)")
        return parameters


def _listed_integrals(scenario: Scenario):
    return [scenario.integral(e) for e in scenario.noether_entries() if e.case != "autonomous"]


@commands.command("simulate")
async def simulate(config: SimulateConfig) -> None:
    """Integrate the equations of motion and write the trajectory with E and the listed integrals as CSV."""
    scenario, _, document = config.load()
    if scenario.potential is None:
        raise ScenarioError(f"{scenario.name} has no potential; the CSV needs the energy column")
    parameters = config.run_parameters(document)
    trajectory = integrate(scenario.equations_of_motion(), **parameters)
    text = trajectory_csv(trajectory, scenario.energy(), _listed_integrals(scenario))
    if config.output is None:
        sys.stdout.write(text)
        return
    if osp.dirname(config.output):
        os.makedirs(osp.dirname(config.output), exist_ok=True)
    async with aiofiles.open(config.output, "w", newline="") as f:
        await f.write(text)
    logger.info(f"Wrote {len(trajectory)} states to {config.output}")


class ConserveCheckConfig(SimulateConfig):
    max_drift: float = Field(description="Largest accepted relative drift", default=1e-7)


@commands.command("conserve-check")
def conserve_check(config: ConserveCheckConfig) -> bool:
    """Integrate and check that E and every listed Noether integral stay constant."""
    scenario, _, document = config.load()
    if scenario.potential is None:
        raise ScenarioError(f"{scenario.name} has no potential, so no integrals to check")
    trajectory = integrate(scenario.equations_of_motion(), **config.run_parameters(document))
    report = conservation_drift(trajectory, [scenario.energy(), *_listed_integrals(scenario)])
    limit = config.max_drift
    rows = [
        [d.name, f"{d.initial:.10g}", f"{d.absolute:.3e}", f"{d.relative:.3e}", _verdict(d.relative <= limit)]
        for d in report.drifts
    ]
    print(f"{report.method}, {report.points} points" + (f", halted: {trajectory.halted}" if trajectory.halted else ""))
    headers = ["integral", "initial", "absolute drift", "relative drift", "result"]
    print(tabulate(rows, headers=headers, tablefmt="simple", disable_numparse=True))
    return report.maximum_relative <= config.max_drift and not trajectory.halted


# ======================================================================================================================
# REPORT
# ======================================================================================================================


class ReportConfig(BaseModel):
    table: Literal["flat", "sphere", "newtonian", "bianchi", "all"] = Field(description="Table to check", default="all")
    output_dir: str = Field(description="Directory receiving one folder per table", default="report")
    concurrency: int = Field(description="Rows checked at the same time", default=4)
    csv: bool = Field(description="Also write the trajectories of the conservation rows", default=False)
    tol: float | None = Field(description="Residual tolerance (default 1e-8)", default=None)
    samples: int | None = Field(description="Number of sample points (default 200)", default=None)
    seed: int | None = Field(description="Sample sequence seed (default 0, or GEONOETHER_SEED)", default=None)


@commands.command("report")
async def report(config: ReportConfig) -> bool:
    """Check every cataloged row and write a markdown summary per table."""
    tables = list(REPORT_TABLES) if config.table == "all" else [config.table]
    overrides = {k: getattr(config, k) for k in ("tol", "samples", "seed") if getattr(config, k) is not None}
    settings = CheckSettings(**overrides)
    reports = await run_report(tables, settings, config.output_dir, config.concurrency, config.csv)
    for r in reports:
        n_passed = sum(1 for row in r.rows if row.passed)
        print(f"{r.table:<10} {n_passed}/{len(r.rows)} {osp.join(config.output_dir, r.table, 'report.md')}")
    return all(r.passed for r in reports)


# ======================================================================================================================
# ENTRY POINT
# ======================================================================================================================


def run(argv: list[str] | None = None) -> int:
    logger.remove()
    logger.add(sys.stderr, format=functools.partial(log_formatter, colorize=True), level="INFO")
    try:
        passed = commands.dispatch(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except (GeonoetherError, ValueError, OSError) as exc:
        logger.error(str(exc))
        return 2
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(run())
