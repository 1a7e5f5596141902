"""Report models and their text / JSON / CSV renderings."""
import csv
import io
import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, field_validator

FORMATS = ("text", "json", "csv")
REPORT_CSV_HEADER = ("quantity", "value", "reference", "verdict")
SCAN_CSV_HEADER = ("eta", "quantum", "local", "pnc")


class Verdict(str, Enum):
    VIOLATES = "violates"
    SATISFIES = "satisfies"
    EQUALS = "equals"


def verdict_for(value: float, reference: Optional[float], tol: float) -> Optional[Verdict]:
    if reference is None:
        return None
    if abs(value - reference) <= tol:
        return Verdict.EQUALS
    return Verdict.VIOLATES if value > reference else Verdict.SATISFIES


def _finite(value):
    if value is not None and not math.isfinite(value):
        raise ValueError(f"report values must be finite, got {value!r}")
    return value


def _num(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.12g}"


# --- Pydantic Models ---

class ReportRow(BaseModel):
    quantity: str
    value: float
    reference: Optional[float] = None
    verdict: Optional[Verdict] = None
    detail: Optional[dict] = None

    @field_validator("value", "reference")
    @classmethod
    def _finite_values(cls, value):
        return _finite(value)


class Report(BaseModel):
    scenario_name: str
    rows: list[ReportRow] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    def add(self, quantity: str, value: float, reference: Optional[float] = None, tol: float = 1e-6, detail=None):
        row = ReportRow(
            quantity=quantity,
            value=value,
            reference=reference,
            verdict=verdict_for(value, reference, tol),
            detail=detail,
        )
        self.rows.append(row)
        return row


class ScanRow(BaseModel):
    eta: float
    quantum: float
    local: float
    pnc: Optional[float] = None
    regime: str

    @field_validator("eta", "quantum", "local", "pnc")
    @classmethod
    def _finite_values(cls, value):
        return _finite(value)


class ScanReport(BaseModel):
    scenario_name: str
    side: str
    rows: list[ScanRow] = Field(default_factory=list)
    crossings: dict[str, float] = Field(default_factory=dict)


# --- Rendering ---

def _report_text(report: Report) -> str:
    lines = [f"scenario: {report.scenario_name}"]
    width = max([len(row.quantity) for row in report.rows] + [8])
    lines.append(f"{'quantity':<{width}}  {'value':>20}  {'reference':>20}  verdict")
    for row in report.rows:
        verdict = row.verdict.value if row.verdict else ""
        lines.append(f"{row.quantity:<{width}}  {_num(row.value):>20}  {_num(row.reference):>20}  {verdict}")
    lines.extend(f"note: {note}" for note in report.notes)
    return "\n".join(lines) + "\n"


def _report_csv(report: Report) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_CSV_HEADER)
    for row in report.rows:
        writer.writerow([row.quantity, _num(row.value), _num(row.reference), row.verdict.value if row.verdict else ""])
    return buffer.getvalue()


def _scan_text(scan: ScanReport) -> str:
    lines = [f"scenario: {scan.scenario_name} (smeared side: {scan.side})"]
    lines.append(f"{'eta':>20}  {'quantum':>20}  {'local':>20}  {'pnc':>20}  regime")
    for row in scan.rows:
        lines.append(
            f"{_num(row.eta):>20}  {_num(row.quantum):>20}  {_num(row.local):>20}  {_num(row.pnc):>20}  {row.regime}"
        )
    lines.extend(f"crossing {name} at eta={_num(eta)}" for name, eta in scan.crossings.items())
    return "\n".join(lines) + "\n"


def _scan_csv(scan: ScanReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SCAN_CSV_HEADER)
    for row in scan.rows:
        writer.writerow([_num(row.eta), _num(row.quantum), _num(row.local), _num(row.pnc)])
    for name, eta in scan.crossings.items():
        buffer.write(f"# crossing {name} eta={_num(eta)}\n")
    return buffer.getvalue()


def render(report, fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format '{fmt}'; expected one of {', '.join(FORMATS)}")
    if fmt == "json":
        return report.model_dump_json(indent=2) + "\n"
    if isinstance(report, ScanReport):
        return _scan_text(report) if fmt == "text" else _scan_csv(report)
    return _report_text(report) if fmt == "text" else _report_csv(report)
