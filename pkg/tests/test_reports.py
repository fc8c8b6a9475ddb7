"""Tests for bound reports and sweep tables."""

import csv
import io
import json
import math

from polyopf.reports import (
    BoundReport,
    ReportStatus,
    SweepTable,
    bound_text,
    load_reports,
    render_csv,
    render_history_csv,
    render_json,
    render_sweep,
    render_table,
    save_reports,
)


def report(**kwargs):
    defaults = dict(method="sparse", lower_bound=905.7612, status=ReportStatus.GLOBAL_CERTIFIED,
                    case="WB2", formulation="op2", level=1)
    defaults.update(kwargs)
    return BoundReport(**defaults)


class TestBoundReport:
    def test_exit_codes(self):
        assert report().exit_code == 0
        assert report(status=ReportStatus.BOUND_ONLY).exit_code == 2
        assert report(status="SolverFailure").exit_code == 3

    def test_bound_text(self):
        assert bound_text(report()) == "905.76*"
        assert bound_text(report(status=ReportStatus.BOUND_ONLY, lower_bound=888.084)) == "888.08"
        assert bound_text(report(lower_bound=None)) == "-"

    def test_non_finite_values_serialize_as_null(self):
        data = report(rank_gap=math.inf).to_dict()
        assert data["rank_gap"] is None
        assert data["status"] == "GlobalCertified"
        json.dumps(data)

    def test_round_trip_through_json_file(self, tmp_path):
        original = report(extracted_x=[1.0, 0.98, 0.0, -0.02], history=[{"iteration": 0, "bound": 1.0}])
        path = save_reports(tmp_path / "reports.json", [original])
        (loaded,) = load_reports(path)
        assert loaded == original

    def test_label(self):
        assert report(method="dense", formulation="op4", level=2).label == "dense-op4-2"


class TestRenderers:
    def test_table_lists_messages(self):
        text = render_table([report(), report(status=ReportStatus.BOUND_ONLY, message="rank gap 1e-2")])
        lines = text.splitlines()
        assert lines[0].split() == ["case", "method", "form", "level", "bound", "status", "rank_gap", "iter", "time[s]"]
        assert "905.76" in lines[1]
        assert lines[-1] == "# WB2 sparse-op2-1: rank gap 1e-2"

    def test_json_document(self):
        doc = json.loads(render_json([report()]))
        assert doc["schema_version"] == 1
        assert doc["reports"][0]["lower_bound"] == 905.7612

    def test_csv_keeps_full_precision(self):
        rows = list(csv.DictReader(io.StringIO(render_csv([report(dimensions={"rows": 12, "scalars": 30})]))))
        assert float(rows[0]["lower_bound"]) == 905.7612
        assert rows[0]["rows"] == "12"

    def test_history_csv(self):
        text = render_history_csv([{"iteration": 0, "bound": 1.5, "subproblem_objective": -0.1, "seconds": 0.2}])
        assert text.splitlines() == ["iteration,bound,subproblem_objective,seconds", "0,1.5,-0.1,0.2"]


class TestSweepTable:
    def table(self):
        table = SweepTable(case="WB2", parameter="V2max", values=[0.976, 1.022], methods=["sparse-op2-1", "sparse-op4-1"])
        table.set(0.976, "sparse-op2-1", report())
        table.set(0.976, "sparse-op4-1", report(formulation="op4"))
        table.set(1.022, "sparse-op2-1", report(status=ReportStatus.BOUND_ONLY, lower_bound=888.08))
        table.set(1.022, "sparse-op4-1", "SolverFailureError: stalled")
        return table

    def test_column(self):
        assert self.table().column("sparse-op2-1") == [905.7612, 888.08]
        assert self.table().column("sparse-op4-1") == [905.7612, None]

    def test_failed_cell_sets_exit_code(self):
        table = self.table()
        assert table.exit_code == 3
        table.set(1.022, "sparse-op4-1", report(status=ReportStatus.BOUND_ONLY))
        assert table.exit_code == 0

    def test_render(self):
        lines = render_sweep(self.table()).splitlines()
        assert lines[0] == "# WB2"
        assert lines[1].split() == ["V2max", "sparse-op2-1", "sparse-op4-1"]
        assert lines[2].split() == ["0.976", "905.76*", "905.76*"]
        assert lines[3].split() == ["1.022", "888.08", "error"]

    def test_to_dict(self):
        doc = self.table().to_dict()
        assert doc["parameter"] == "V2max"
        assert doc["rows"][1]["cells"]["sparse-op4-1"] == {"error": "SolverFailureError: stalled"}
        assert doc["rows"][0]["cells"]["sparse-op2-1"]["status"] == "GlobalCertified"
