"""
Daily sales table ingestion and the empirical Hardy probability.

The table has one row per day with responded/abandoned call counts and the
Toman sales amounts of absent and present operators, optionally closed by a
SUM row of declared totals. q is the share of sales made while the credited
operator was absent.
"""
import io
import json
import re
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import NamedTuple

import numpy as np
import pandas as pd

from src.callcenter_sim import NoSales
from src.config import BOOTSTRAP_LEVEL, BOOTSTRAP_MIN_RESAMPLES, DEFAULT_SEED, REPORT_DECIMALS, SIM_CALENDAR_START
from src.hna_core import HardyWitness, JointDistribution, Outcome, SettingPair, build_distribution, hardy_q

VALUE_COLUMNS = ["responded", "abandoned", "absent_sales", "present_sales"]
SUM_LABEL = "SUM"

_INTEGER = re.compile(r"^\d+$")

SALES_CONDITIONED_CAVEAT = (
    "q is conditioned on a sale having occurred: the denominator is total sales, "
    "not the full joint event space over all calls"
)
STRUCTURAL_ZEROS_CAVEAT = (
    "The three zero conditions are structural zeros of the sales process; "
    "the daily table has no per-call records to estimate them from"
)


class MalformedTable(ValueError):
    """Input table cannot be parsed."""


class EmptyInput(MalformedTable):
    """No data rows."""


class MalformedRow(MalformedTable):
    """A row has a missing, non-integer or negative field."""


class NonMonotonicDates(MalformedTable):
    """Row dates are not strictly increasing."""


class WeightUnavailable(ValueError):
    """The requested probability weighting cannot be computed from daily totals."""


class Totals(NamedTuple):
    responded: int
    abandoned: int
    absent_sales: int
    present_sales: int


@dataclass(frozen=True)
class DailyRecord:
    date: date
    responded: int
    abandoned: int
    absent_sales: int
    present_sales: int
    interrupted: bool = False

    def __post_init__(self):
        for name in VALUE_COLUMNS:
            if getattr(self, name) < 0:
                raise MalformedRow(f"{self.date}: {name} is negative")

    @property
    def total_sales(self) -> int:
        return self.absent_sales + self.present_sales


@dataclass(frozen=True)
class Dataset:
    rows: tuple[DailyRecord, ...]
    declared_totals: Totals | None = None

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.rows:
            raise EmptyInput("Dataset has no rows")
        for prev, cur in zip(self.rows, self.rows[1:]):
            if cur.date <= prev.date:
                raise NonMonotonicDates(f"Date {cur.date} does not follow {prev.date}")

    def included(self, exclude_interrupted: bool = False) -> list[DailyRecord]:
        return [r for r in self.rows if not (exclude_interrupted and r.interrupted)]

    def totals(self, exclude_interrupted: bool = False) -> Totals:
        rows = self.included(exclude_interrupted)
        return Totals(*(sum(getattr(r, name) for r in rows) for name in VALUE_COLUMNS))


@dataclass(frozen=True)
class Finding:
    kind: str
    message: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message}


@dataclass
class AnalysisReport:
    q: float
    per_day_q: list[tuple[date, float | None]]
    totals: Totals
    ci_low: float | None = None
    ci_high: float | None = None
    ci_level: float | None = None
    resamples: int = 0
    validation_findings: list[Finding] = field(default_factory=list)
    witness: HardyWitness | None = None
    rows_used: int = 0
    excluded_interrupted: bool = False
    caveats: list[str] = field(default_factory=list)


# === PARSING ===

def parse_table(text: str, start_date: str = SIM_CALENDAR_START) -> Dataset:
    """
    Parse a daily sales table.

    Accepts the published schema (`date` column, ISO dates, optional
    `interrupted` 0/1 column) and the simulator schema (`day` column holding
    a day index counted from start_date). A final row labelled SUM becomes
    the declared totals.

    Args:
        text: CSV content
        start_date: Calendar date of day index 0 for the simulator schema

    Returns:
        Dataset
    """
    if not text or not text.strip():
        raise EmptyInput("Input is empty")

    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise MalformedTable(f"Unreadable table: {e}") from None

    columns = [c.strip() for c in frame.columns]
    key = columns[0] if columns else ""
    expected = [key] + VALUE_COLUMNS
    if key not in ("date", "day") or columns[:5] != expected or columns[5:] not in ([], ["interrupted"]):
        raise MalformedTable(
            f"Header must be date|day,{','.join(VALUE_COLUMNS)}[,interrupted]; got {','.join(columns)}"
        )
    frame.columns = columns

    anchor = date.fromisoformat(start_date)
    records, declared = [], None
    for line_no, row in enumerate(frame.to_dict("records"), start=2):
        label = row[key].strip()
        if declared is not None:
            raise MalformedRow(f"Line {line_no}: rows after the {SUM_LABEL} row")
        values = [_parse_count(row[c], c, line_no) for c in VALUE_COLUMNS]
        if label == SUM_LABEL:
            declared = Totals(*values)
            continue
        records.append(DailyRecord(
            _parse_date(label, key, anchor, line_no),
            *values,
            interrupted=_parse_flag(row.get("interrupted", ""), line_no),
        ))

    if not records:
        raise EmptyInput("Table has no data rows")
    return Dataset(tuple(records), declared)


def _parse_count(raw: str, column: str, line_no: int) -> int:
    text = raw.strip() if isinstance(raw, str) else ""
    if not _INTEGER.match(text):
        raise MalformedRow(f"Line {line_no}: {column} must be a non-negative integer, got {raw!r}")
    return int(text)


def _parse_date(label: str, key: str, anchor: date, line_no: int) -> date:
    try:
        if key == "day":
            if not _INTEGER.match(label):
                raise ValueError(label)
            return anchor + timedelta(days=int(label))
        return date.fromisoformat(label)
    except ValueError:
        raise MalformedRow(f"Line {line_no}: invalid {key} {label!r}") from None


def _parse_flag(raw: str, line_no: int) -> bool:
    text = raw.strip() if isinstance(raw, str) else ""
    if text in ("", "0"):
        return False
    if text == "1":
        return True
    raise MalformedRow(f"Line {line_no}: interrupted must be 0 or 1, got {raw!r}")


def serialize_table(ds: Dataset) -> str:
    """CSV text in the published schema; parse_table(serialize_table(ds)) == ds."""
    lines = [
        [r.date.isoformat(), *(str(getattr(r, c)) for c in VALUE_COLUMNS), "1" if r.interrupted else "0"]
        for r in ds.rows
    ]
    if ds.declared_totals is not None:
        lines.append([SUM_LABEL, *(str(v) for v in ds.declared_totals), ""])
    frame = pd.DataFrame(lines, columns=["date", *VALUE_COLUMNS, "interrupted"], dtype=object)
    return frame.to_csv(index=False, lineterminator="\n")


# === VALIDATION ===

def validate_dataset(ds: Dataset) -> list[Finding]:
    """Audit column sums against the declared totals and flag interrupted days."""
    findings = []
    if ds.declared_totals is None:
        findings.append(Finding("no_declared_totals", "no declared totals"))
    else:
        computed = ds.totals()
        for name, declared, actual in zip(VALUE_COLUMNS, ds.declared_totals, computed):
            if declared != actual:
                findings.append(Finding(
                    "mismatch",
                    f"{name}: declared {declared}, computed {actual} (delta {actual - declared:+d})",
                ))

    for r in ds.rows:
        if r.interrupted:
            findings.append(Finding("interrupted", f"{r.date.isoformat()}: communications were interrupted"))
    return findings


# === PROBABILITIES ===

def _ratio(absent: int, total: int) -> float:
    return absent / total


def compute_q(ds: Dataset, exclude_interrupted: bool = False, weight: str = "amount") -> float:
    """
    Absent-operator share of total sales, weighted by Toman amount.

    Raises:
        WeightUnavailable: weight="count"; the table records amounts per day,
            not the number of sales, so a count-weighted q is undefined
        NoSales: included rows have no sales
    """
    if weight == "count":
        raise WeightUnavailable(
            "Count weighting needs per-sale records; the daily table only carries "
            "sales amounts, so q is defined by amount"
        )
    if weight != "amount":
        raise ValueError(f"Unknown weight {weight!r}; expected 'amount' or 'count'")

    totals = ds.totals(exclude_interrupted)
    total = totals.absent_sales + totals.present_sales
    if total == 0:
        raise NoSales("Included rows have no sales")
    return _ratio(totals.absent_sales, total)


def per_day_q(ds: Dataset, exclude_interrupted: bool = False) -> list[tuple[date, float | None]]:
    """q for each day; None marks a day without sales."""
    return [
        (r.date, _ratio(r.absent_sales, r.total_sales) if r.total_sales else None)
        for r in ds.included(exclude_interrupted)
    ]


def bootstrap_ci(
    ds: Dataset,
    resamples: int = 10000,
    level: float = BOOTSTRAP_LEVEL,
    seed: int = DEFAULT_SEED,
    exclude_interrupted: bool = False,
) -> tuple[float, float]:
    """
    Percentile bootstrap interval for q over day resampling.

    Days are drawn with replacement and q is pooled per resample. Resamples
    without sales are redrawn, up to 10 * resamples draws in total.

    Returns:
        (ci_low, ci_high)
    """
    if resamples < BOOTSTRAP_MIN_RESAMPLES:
        raise ValueError(f"resamples must be >= {BOOTSTRAP_MIN_RESAMPLES}, got {resamples}")
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")

    rows = ds.included(exclude_interrupted)
    absent = np.array([r.absent_sales for r in rows], dtype=np.int64)
    total = np.array([r.total_sales for r in rows], dtype=np.int64)
    if not total.any():
        raise NoSales("Included rows have no sales")

    rng = np.random.default_rng(seed)
    n = len(rows)
    accepted, drawn = [], 0
    while sum(len(a) for a in accepted) < resamples:
        if drawn >= 10 * resamples:
            raise NoSales(f"Fewer than {resamples} resamples with sales after {drawn} draws")
        batch = min(resamples - sum(len(a) for a in accepted), 10 * resamples - drawn)
        idx = rng.integers(0, n, size=(batch, n))
        drawn += batch
        sums_absent = absent[idx].sum(axis=1)
        sums_total = total[idx].sum(axis=1)
        keep = sums_total > 0
        accepted.append(sums_absent[keep] / sums_total[keep])

    qs = np.concatenate(accepted)
    tail = (1 - level) / 2
    low, high = np.quantile(qs, [tail, 1 - tail])
    return float(low), float(high)


def empirical_distribution(ds: Dataset, exclude_interrupted: bool = False) -> JointDistribution:
    """
    Joint distribution implied by the table.

    Call counts fill the settings involving a1, sales amounts fill those
    involving a2, and the three forbidden events carry exact zeros, so the
    (2,2) entry Pr(+,+) equals compute_q.
    """
    t = ds.totals(exclude_interrupted)
    if t.responded + t.abandoned == 0:
        raise MalformedTable("No calls recorded: responded and abandoned are zero on every included row")
    plus, minus = Outcome.PLUS, Outcome.MINUS
    return build_distribution({
        SettingPair(1, 1): {(plus, minus): t.abandoned, (minus, plus): t.responded},
        SettingPair(1, 2): {(plus, minus): t.abandoned, (minus, minus): t.responded},
        SettingPair(2, 1): {(plus, plus): t.absent_sales + t.present_sales},
        SettingPair(2, 2): {(plus, plus): t.absent_sales, (plus, minus): t.present_sales},
    })


# === REPORT ===

def analyze(
    ds: Dataset,
    exclude_interrupted: bool = False,
    weight: str = "amount",
    resamples: int = 0,
    level: float = BOOTSTRAP_LEVEL,
    seed: int = DEFAULT_SEED,
) -> AnalysisReport:
    """
    Full pipeline: validate, compute q and per-day q, optionally bootstrap.

    Args:
        ds: Parsed dataset
        exclude_interrupted: Drop rows flagged as interrupted
        weight: "amount" (the only supported weighting) or "count"
        resamples: Bootstrap resamples; 0 skips the interval
        level: Confidence level of the interval
        seed: Bootstrap seed

    Returns:
        AnalysisReport
    """
    findings = validate_dataset(ds)
    q = compute_q(ds, exclude_interrupted, weight)

    report = AnalysisReport(
        q=q,
        per_day_q=per_day_q(ds, exclude_interrupted),
        totals=ds.totals(exclude_interrupted),
        validation_findings=findings,
        witness=hardy_q(empirical_distribution(ds, exclude_interrupted)),
        rows_used=len(ds.included(exclude_interrupted)),
        excluded_interrupted=exclude_interrupted,
        caveats=[SALES_CONDITIONED_CAVEAT, STRUCTURAL_ZEROS_CAVEAT],
    )
    if resamples:
        report.ci_low, report.ci_high = bootstrap_ci(ds, resamples, level, seed, exclude_interrupted)
        report.ci_level = level
        report.resamples = resamples
    return report


def report_to_dict(report: AnalysisReport) -> dict:
    ci = None
    if report.ci_low is not None:
        ci = {"low": report.ci_low, "high": report.ci_high, "level": report.ci_level, "resamples": report.resamples}
    return {
        "q": report.q,
        "per_day_q": [{"date": d.isoformat(), "q": value} for d, value in report.per_day_q],
        "totals": report.totals._asdict(),
        "ci": ci,
        "findings": [f.to_dict() for f in report.validation_findings],
        "witness": report.witness.to_dict() if report.witness else None,
        "rows_used": report.rows_used,
        "excluded_interrupted": report.excluded_interrupted,
        "caveats": report.caveats,
    }


def report_to_json(report: AnalysisReport) -> str:
    return json.dumps(report_to_dict(report), indent=2)


def report_to_text(report: AnalysisReport) -> str:
    """Format an analysis report for console output."""
    d = REPORT_DECIMALS
    t = report.totals
    output = []
    output.append("=" * 70)
    output.append(f"HARDY PROBABILITY FROM DAILY SALES ({report.rows_used} days)")
    output.append("=" * 70)
    output.append("")
    output.append(f"q = {report.q:.{d}f}")
    if report.ci_low is not None:
        output.append(
            f"{report.ci_level:.0%} CI: [{report.ci_low:.{d}f}, {report.ci_high:.{d}f}] "
            f"({report.resamples} resamples)"
        )
    if report.witness:
        output.append(f"Verdict: {report.witness.verdict.value}")
    output.append("")

    output.append("TOTALS:")
    output.append(f"  Responded calls:      {t.responded}")
    output.append(f"  Abandoned calls:      {t.abandoned}")
    output.append(f"  Absent-operator sales:  {t.absent_sales}")
    output.append(f"  Present-operator sales: {t.present_sales}")
    output.append("")

    qs = [value for _, value in report.per_day_q if value is not None]
    if qs:
        output.append(f"PER-DAY q: min {min(qs):.{d}f} | max {max(qs):.{d}f}")
        output.append("")

    if report.validation_findings:
        output.append("FINDINGS:")
        for f in report.validation_findings:
            output.append(f"  [{f.kind.upper()}] {f.message}")
        output.append("")

    output.append("CAVEATS:")
    for c in report.caveats:
        output.append(f"  - {c}")
    return "\n".join(output)
