from typing import Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, computed_field
from tabulate import SEPARATING_LINE, tabulate


CheckKind = Literal["noether", "lie", "collineation", "bracket", "finder", "count", "drift"]


class RowResult(BaseModel):
    table: str
    row: str = Field(description="Catalog row, e.g. 'II/zero' or 'noether-second/3'")
    check: CheckKind
    subject: str = Field(description="Generator, integral or quantity that was checked")
    expected: Literal["pass", "fail"] = Field(description="'fail' for negative controls", default="pass")
    provenance: str = "listed"
    residual: float | None = Field(description="Largest residual or relative drift, if the check has one", default=None)
    detail: str = ""
    passed: bool = Field(description="Whether the outcome matched `expected`")


class Crashed(BaseModel):
    table: str
    row: str
    passed: bool = False
    exception: str | None = None
    traceback: str | None = None


class TableReport(BaseModel):
    table: str
    title: str
    seed: int
    samples: int
    tol: float
    rows: list[RowResult | Crashed]

    @computed_field  # type: ignore[misc]
    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self) -> list[RowResult | Crashed]:
        return [r for r in self.rows if not r.passed]


class UnitTimings(BaseModel):
    """Wall time of every report unit of one table, keyed by row."""

    seconds: dict[str, float] = Field(default_factory=dict)

    def record(self, row: str, seconds: float) -> None:
        self.seconds[row] = self.seconds.get(row, 0.0) + seconds

    @property
    def total(self) -> float:
        return sum(self.seconds.values())

    @property
    def slowest(self) -> tuple[str, float] | None:
        return max(self.seconds.items(), key=lambda item: item[1], default=None)


def show_timing_summary(timings: dict[str, UnitTimings]) -> None:
    durations = np.array([s for timing in timings.values() for s in timing.seconds.values()])

    logger.info("")
    logger.info("=" * 60)
    if durations.size == 0:
        logger.info("Timing Summary: No rows checked")
        logger.info("=" * 60)
        return
    logger.info("Timing Summary")
    logger.info("=" * 60)
    for table, timing in timings.items():
        logger.info(f"  {table:<12} {len(timing.seconds):>5} units {timing.total:>10.2f} s")
        if (slowest := timing.slowest) is not None:
            logger.info(f"  {'':<12} slowest {slowest[0]} ({slowest[1]:.2f} s)")
    logger.info("-" * 60)
    logger.info(f"  Mean time per unit:        {durations.mean():>10.3f} s")
    logger.info(f"  P95 time per unit:         {np.percentile(durations, 95):>10.3f} s")


def show_results(reports: list[TableReport]) -> None:
    logger.info("")
    logger.info("=" * 90)
    logger.info("Detailed Results")
    logger.info("=" * 90)

    for report in reports:
        for i, row in enumerate(report.rows):
            if isinstance(row, Crashed):
                logger.error(f"  [{i:3d}] {report.table:10s} | {row.row:28s} | crashed: {row.exception}")
            elif not row.passed:
                residual = "n/a" if row.residual is None else f"{row.residual:.3e}"
                logger.error(
                    f"  [{i:3d}] {report.table:10s} | {row.row:28s} | {row.check} {row.subject} "
                    f"expected {row.expected}, residual {residual}"
                )

    table_rows = []
    totals = [0, 0, 0]
    for report in reports:
        n_passed = sum(1 for r in report.rows if r.passed)
        n_crashed = sum(1 for r in report.rows if isinstance(r, Crashed))
        n_failed = len(report.rows) - n_passed - n_crashed
        table_rows.append([report.title, n_passed, n_failed, n_crashed])
        for k, value in enumerate((n_passed, n_failed, n_crashed)):
            totals[k] += value
    table_rows.append(SEPARATING_LINE)
    table_rows.append(["Overall", *totals])

    table_str = tabulate(
        table_rows,
        headers=["Table", "passed", "failed", "crashed"],
        tablefmt="simple",
        stralign="right",
        numalign="right",
        colalign=("left",),
    )
    logger.info("")
    for line in table_str.split("\n"):
        logger.info(line)
