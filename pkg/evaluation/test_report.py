import json

from evaluation import report as report_module
from evaluation.report import (
    REPORT_TABLES,
    TABLE_UNITS,
    ReportUnit,
    UnitResult,
    render_markdown,
    run_report,
)
from evaluation.stats import Crashed, RowResult, TableReport
from geonoether.base import CheckSettings, instantiate
from geonoether.newtonian import NEWTONIAN_ROWS
from geonoether.sphere import SPHERE_ROWS


def test_every_table_has_units():
    assert set(TABLE_UNITS) == set(REPORT_TABLES)


def test_every_cataloged_row_is_covered():
    rows = {unit.row for unit in TABLE_UNITS["sphere"]()}
    assert {f"K={K}/row {r.row}" for K in (1, -1) for r in SPHERE_ROWS} <= rows

    rows = {unit.row for unit in TABLE_UNITS["newtonian"]()}
    assert {f"{r.family}/{r.row}" for r in NEWTONIAN_ROWS} <= rows

    rows = {unit.row for unit in TABLE_UNITS["bianchi"]()}
    assert len([r for r in rows if r.count("/") == 1 and not r.endswith("catalog")]) == 30

    rows = {unit.row for unit in TABLE_UNITS["flat"]()}
    assert {"euclidean3/KV", "euclidean3/SPC", "minkowski2/AC", "euclidean2/HV"} <= rows


def test_markdown_header_and_verdicts():
    table = TableReport(
        table="sphere",
        title="Sphere",
        seed=3,
        samples=50,
        tol=1e-8,
        rows=[
            RowResult(table="sphere", row="K=1/row 1", check="noether", subject="Y1", residual=1e-15, passed=True),
            RowResult(
                table="sphere", row="K=1/row 6", check="noether", subject="Y2 + 2*Y3", expected="fail", passed=False
            ),
            Crashed(table="sphere", row="K=1/row 7", exception="boom"),
        ],
    )
    text = render_markdown(table)
    assert text.startswith("# Sphere\n\nseed: 3 | samples: 50 | tol: 1e-08\n")
    assert "K=1/row 1" in text
    assert "MISMATCH" in text
    assert "CRASHED" in text
    assert "**1/3 rows as expected**" in text


async def test_sphere_table_passes_and_is_reproducible(tmp_path):
    settings = CheckSettings(seed=0)
    first = await run_report(["sphere"], settings, str(tmp_path / "a"), concurrency=4, write_csv=True)
    second = await run_report(["sphere"], settings, str(tmp_path / "b"), concurrency=2, write_csv=True)

    (table,) = first
    assert table.passed, [r for r in table.failures]
    for name in ("report.md", "trajectories/sphere-K=1.csv"):
        assert (tmp_path / "a" / "sphere" / name).read_bytes() == (tmp_path / "b" / "sphere" / name).read_bytes()
    assert second[0].rows == table.rows

    saved = json.loads((tmp_path / "a" / "sphere" / "result.json").read_text(encoding="utf-8"))
    assert saved["passed"] is True
    assert instantiate(saved) == table


async def test_newtonian_table_passes(tmp_path):
    (table,) = await run_report(["newtonian"], CheckSettings(), str(tmp_path))
    assert table.passed, table.failures
    assert not (tmp_path / "newtonian" / "trajectories").exists()
    checks = {r.check for r in table.rows}
    assert {"noether", "lie", "finder", "drift"} <= checks
    assert any(r.expected == "fail" for r in table.rows)


async def test_flat_table_passes(tmp_path):
    (table,) = await run_report(["flat"], CheckSettings(), str(tmp_path))
    assert table.passed, table.failures
    details = {r.row: r.detail for r in table.rows if r.check == "collineation" and r.subject.endswith("basis")}
    assert details["euclidean3/KV"] == "dimension 6 (expected 6)"
    assert details["minkowski2/AC"] == "dimension 4 (expected 4)"


async def test_bianchi_table_passes(tmp_path):
    (table,) = await run_report(["bianchi"], CheckSettings(), str(tmp_path), concurrency=8)
    assert table.passed, table.failures


async def test_crashing_units_become_crashed_rows(tmp_path, monkeypatch):
    def explode(settings):
        raise RuntimeError("no such row")

    def fine(settings):
        row = RowResult(table="sphere", row="ok", check="count", subject="ok", passed=True)
        return UnitResult([row])

    units = [ReportUnit("sphere", "broken", explode), ReportUnit("sphere", "ok", fine)]
    monkeypatch.setitem(report_module.TABLE_UNITS, "sphere", lambda: units)

    (table,) = await run_report(["sphere"], CheckSettings(), str(tmp_path))
    assert not table.passed
    crashed, ok = table.rows
    assert isinstance(crashed, Crashed)
    assert crashed.exception == "no such row"
    assert "RuntimeError" in crashed.traceback
    assert ok.passed
    assert "CRASHED" in (tmp_path / "sphere" / "report.md").read_text(encoding="utf-8")
