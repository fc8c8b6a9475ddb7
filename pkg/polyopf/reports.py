"""Bound reports and their text, JSON and CSV renderings."""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from . import config


class ReportStatus(str, Enum):
    GLOBAL_CERTIFIED = "GlobalCertified"
    BOUND_ONLY = "BoundOnly"
    SOLVER_FAILURE = "SolverFailure"

    @property
    def exit_code(self) -> int:
        return {"GlobalCertified": 0, "BoundOnly": 2, "SolverFailure": 3}[self.value]


@dataclass
class BoundReport:
    """Outcome of one relaxation run.

    ``lower_bound`` is in $/h. A GlobalCertified report carries the
    extracted voltage vector, a residual violation within the feasibility
    tolerance and an objective within the certification tolerance of the
    bound.
    """

    method: str
    lower_bound: Optional[float] = None
    status: ReportStatus = ReportStatus.SOLVER_FAILURE
    extracted_x: Optional[List[float]] = None
    rank_gap: Optional[float] = None
    iterations: int = 0
    wall_time: float = 0.0
    case: str = ""
    overrides: Dict[str, str] = field(default_factory=dict)
    formulation: str = ""
    level: int = 1
    solver_status: str = ""
    objective_at_x: Optional[float] = None
    max_violation: Optional[float] = None
    timings: Dict[str, float] = field(default_factory=dict)
    dimensions: Dict[str, int] = field(default_factory=dict)
    history: List[Dict[str, float]] = field(default_factory=list)
    message: str = ""
    created_at: str = ""

    def __post_init__(self):
        self.status = ReportStatus(self.status)
        if not self.created_at:
            self.created_at = datetime.now().isoformat(timespec="seconds")

    @property
    def certified(self) -> bool:
        return self.status is ReportStatus.GLOBAL_CERTIFIED

    @property
    def exit_code(self) -> int:
        return self.status.exit_code

    @property
    def label(self) -> str:
        return f"{self.method}-{self.formulation}-{self.level}"

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["status"] = self.status.value
        for key in ("lower_bound", "rank_gap", "objective_at_x", "max_violation"):
            data[key] = _finite(data[key])
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BoundReport":
        return cls(
            method=data.get("method", ""),
            lower_bound=data.get("lower_bound"),
            status=data.get("status", ReportStatus.SOLVER_FAILURE.value),
            extracted_x=data.get("extracted_x"),
            rank_gap=data.get("rank_gap"),
            iterations=int(data.get("iterations", 0)),
            wall_time=float(data.get("wall_time", 0.0)),
            case=data.get("case", ""),
            overrides=dict(data.get("overrides", {})),
            formulation=data.get("formulation", ""),
            level=int(data.get("level", 1)),
            solver_status=data.get("solver_status", ""),
            objective_at_x=data.get("objective_at_x"),
            max_violation=data.get("max_violation"),
            timings=dict(data.get("timings", {})),
            dimensions=dict(data.get("dimensions", {})),
            history=list(data.get("history", [])),
            message=data.get("message", ""),
            created_at=data.get("created_at", ""),
        )


def _finite(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def _num(value: Optional[float], fmt: str) -> str:
    if value is None or not math.isfinite(value):
        return "-"
    return format(value, fmt)


def bound_text(report: BoundReport) -> str:
    """Bound rounded to cents; certified bounds are starred."""
    text = _num(report.lower_bound, ".2f")
    return text + "*" if report.certified and text != "-" else text


_COLUMNS = ("case", "method", "form", "level", "bound", "status", "rank_gap", "iter", "time[s]")


def _row(report: BoundReport) -> List[str]:
    return [
        report.case,
        report.method,
        report.formulation,
        str(report.level),
        _num(report.lower_bound, ".2f"),
        report.status.value,
        _num(report.rank_gap, ".2e"),
        str(report.iterations),
        _num(report.wall_time, ".2f"),
    ]


def _align(rows: List[List[str]]) -> str:
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def render_table(reports: Sequence[BoundReport]) -> str:
    rows = [list(_COLUMNS)] + [_row(r) for r in reports]
    text = _align(rows)
    for r in reports:
        if r.message:
            text += f"# {r.case} {r.label}: {r.message}\n"
    return text


def render_json(reports: Sequence[BoundReport]) -> str:
    doc = {"schema_version": config.JSON_SCHEMA_VERSION, "reports": [r.to_dict() for r in reports]}
    return json.dumps(doc, indent=2)


def render_csv(reports: Sequence[BoundReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["case", "method", "formulation", "level", "lower_bound", "status", "rank_gap",
         "iterations", "wall_time", "rows", "scalars"]
    )
    for r in reports:
        writer.writerow([
            r.case, r.method, r.formulation, r.level,
            "" if r.lower_bound is None else repr(float(r.lower_bound)),
            r.status.value,
            "" if r.rank_gap is None else repr(float(r.rank_gap)),
            r.iterations, f"{r.wall_time:.3f}",
            r.dimensions.get("rows", ""), r.dimensions.get("scalars", ""),
        ])
    return buf.getvalue()


HISTORY_FIELDS = ("iteration", "bound", "subproblem_objective", "seconds")


def render_history_csv(history: Sequence[Dict[str, float]]) -> str:
    """DIGS trace: one row per master solve."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=HISTORY_FIELDS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for entry in history:
        writer.writerow({k: entry.get(k, "") for k in HISTORY_FIELDS})
    return buf.getvalue()


def render(reports: Sequence[BoundReport], output: str) -> str:
    renderers = {"table": render_table, "json": render_json, "csv": render_csv}
    return renderers[output](reports)


# --- sweeps -----------------------------------------------------------------

@dataclass
class SweepTable:
    """Rows are parameter values, columns are method specs."""

    case: str
    parameter: str
    values: List[float]
    methods: List[str]
    cells: Dict[str, Dict[str, Union[BoundReport, str]]] = field(default_factory=dict)

    @staticmethod
    def key(value: float) -> str:
        return f"{value:g}"

    def set(self, value: float, method: str, cell: Union[BoundReport, str]) -> None:
        self.cells.setdefault(self.key(value), {})[method] = cell

    def get(self, value: float, method: str) -> Union[BoundReport, str, None]:
        return self.cells.get(self.key(value), {}).get(method)

    def column(self, method: str) -> List[Optional[float]]:
        out = []
        for v in self.values:
            cell = self.get(v, method)
            out.append(cell.lower_bound if isinstance(cell, BoundReport) else None)
        return out

    @property
    def exit_code(self) -> int:
        codes = [c.exit_code if isinstance(c, BoundReport) else 3 for row in self.cells.values() for c in row.values()]
        return 3 if 3 in codes else 0

    def to_dict(self) -> Dict[str, Any]:
        rows = []
        for v in self.values:
            cells = {}
            for m in self.methods:
                cell = self.get(v, m)
                if isinstance(cell, BoundReport):
                    cells[m] = cell.to_dict()
                else:
                    cells[m] = {"error": cell or "not run"}
            rows.append({"value": v, "cells": cells})
        return {
            "schema_version": config.JSON_SCHEMA_VERSION,
            "case": self.case,
            "parameter": self.parameter,
            "methods": list(self.methods),
            "rows": rows,
        }


def render_sweep(table: SweepTable) -> str:
    """Aligned sweep table; certified bounds are starred, failures print ``error``."""
    header = [table.parameter] + list(table.methods)
    rows = [header]
    for v in table.values:
        row = [table.key(v)]
        for m in table.methods:
            cell = table.get(v, m)
            if isinstance(cell, BoundReport):
                row.append(bound_text(cell) if cell.lower_bound is not None else cell.status.value)
            else:
                row.append("error")
        rows.append(row)
    return f"# {table.case}\n" + _align(rows)


# --- persistence --------------------------------------------------------------

def save_reports(path: Path, reports: Sequence[BoundReport]) -> Path:
    path = Path(path)
    path.write_text(render_json(reports) + "\n")
    return path


def load_reports(path: Path) -> List[BoundReport]:
    with open(path) as f:
        doc = json.load(f)
    return [BoundReport.from_dict(r) for r in doc.get("reports", [])]
