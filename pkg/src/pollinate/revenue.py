"""Advertising revenue indices from per-platform usage statistics.

For each platform with daily minutes TIME and weekly visits FREQ:

    ln_time = ln(60 * TIME)                 # seconds per day
    pct_mt  = TIME / sum(TIME)
    depth   = FREQ * ln_time
    cwri    = cpc * pct_mt * depth
    mwri    = cpm * FREQ * TIME / 100
    d_cwri  = pct_mt * cwri                 # uplift per pollination
    d_mwri  = pct_mt * mwri
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, replace
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path

from .errors import DuplicatePlatform, EmptyDataset, MalformedRow, NonPositiveValue

SCHEMA_VERSION = 1
CSV_HEADER = ("platform", "time_min_per_day", "freq_visits_per_week")
TABLE_COLUMNS = ("platform", "time", "ln_time", "pct_mt", "freq", "depth",
                 "cwri", "mwri", "d_cwri", "d_mwri")
CURRENCY_COLUMNS = ("cwri", "mwri", "d_cwri", "d_mwri")


@dataclass(frozen=True)
class UsageRow:
    platform: str
    time_min_per_day: float
    freq_visits_per_week: float


@dataclass(frozen=True)
class RevenueParams:
    cpc: float = 2.00
    cpm: float = 7.00

    def __post_init__(self):
        if not (self.cpc > 0 and self.cpm > 0):
            raise ValueError(f"cpc and cpm must be positive, got {self.cpc}, {self.cpm}")


@dataclass(frozen=True)
class RevenueRow:
    platform: str
    time: float
    ln_time: float
    pct_mt: float
    freq: float
    depth: float
    cwri: float
    mwri: float
    d_cwri: float | None = None
    d_mwri: float | None = None


def _parse_positive(text, line, column):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise MalformedRow(line, f"{column} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise MalformedRow(line, f"{column} is not finite: {text!r}")
    if value <= 0:
        raise NonPositiveValue(line, f"{column} must be > 0, got {text!r}")
    return value


def parse_usage_csv(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise EmptyDataset("usage CSV is empty")
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise MalformedRow(1, f"expected header {','.join(CSV_HEADER)}")
    rows, seen = [], set()
    for line, record in enumerate(reader, start=2):
        if not record or all(not c.strip() for c in record):
            continue
        if len(record) != 3:
            raise MalformedRow(line, f"expected 3 fields, got {len(record)}")
        name = record[0].strip()
        if not name:
            raise MalformedRow(line, "empty platform name")
        if name in seen:
            raise DuplicatePlatform(name, line)
        seen.add(name)
        rows.append(UsageRow(
            name,
            _parse_positive(record[1].strip(), line, "time_min_per_day"),
            _parse_positive(record[2].strip(), line, "freq_visits_per_week"),
        ))
    return rows


def ingest_usage_csv(path) -> list:
    """Read ``platform,time_min_per_day,freq_visits_per_week`` rows from a CSV file."""
    text = Path(path).read_text(encoding="utf-8-sig")
    return parse_usage_csv(text)


def usage_2023() -> list:
    """The bundled ten-platform usage dataset (July to September 2023)."""
    text = resources.files("pollinate.data").joinpath("usage_2023.csv").read_text("utf-8")
    return parse_usage_csv(text)


def usage_2023_path():
    return resources.files("pollinate.data").joinpath("usage_2023.csv")


def usage_2023_published() -> list:
    """Published derived cells for the bundled dataset, as dicts of floats."""
    text = resources.files("pollinate.data").joinpath("usage_2023_published.csv").read_text("utf-8")
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        out.append({k: (v if k == "platform" else float(v)) for k, v in rec.items()})
    return out


def compute_revenue_table(rows, params: RevenueParams = RevenueParams()) -> list:
    if not rows:
        raise EmptyDataset("no usage rows")
    total = math.fsum(r.time_min_per_day for r in rows)
    out = []
    for r in rows:
        ln_time = math.log(60.0 * r.time_min_per_day)
        pct = r.time_min_per_day / total
        depth = r.freq_visits_per_week * ln_time
        out.append(RevenueRow(
            platform=r.platform,
            time=r.time_min_per_day,
            ln_time=ln_time,
            pct_mt=pct,
            freq=r.freq_visits_per_week,
            depth=depth,
            cwri=params.cpc * pct * depth,
            mwri=params.cpm * r.freq_visits_per_week * r.time_min_per_day / 100.0,
        ))
    return out


def pollination_uplift(table) -> list:
    return [replace(r, d_cwri=r.pct_mt * r.cwri, d_mwri=r.pct_mt * r.mwri) for r in table]


def revenue_table(rows, params: RevenueParams = RevenueParams()) -> list:
    return pollination_uplift(compute_revenue_table(rows, params))


def depth_chart_data(table) -> list:
    """(platform, depth) pairs, deepest engagement first."""
    return [(r.platform, r.depth) for r in sorted(table, key=lambda r: -r.depth)]


@dataclass(frozen=True)
class DominanceReport:
    agrees: bool
    uplift_order: tuple
    share_order: tuple
    inversions: tuple  # (higher share, lower share) pairs whose uplift order is reversed


def uplift_dominance_check(table) -> DominanceReport:
    """Compare the ordering of CPC uplift with the ordering of time share."""
    by_uplift = tuple(r.platform for r in sorted(table, key=lambda r: -r.d_cwri))
    by_share = tuple(r.platform for r in sorted(table, key=lambda r: -r.pct_mt))
    rank = {p: i for i, p in enumerate(by_uplift)}
    inversions = []
    for i, hi in enumerate(by_share):
        for lo in by_share[i + 1:]:
            if rank[hi] > rank[lo]:
                inversions.append((hi, lo))
    return DominanceReport(by_uplift == by_share, by_uplift, by_share, tuple(inversions))


# ---------------------------------------------------------------------------
# output

def _money(x: float) -> Decimal:
    return Decimal(repr(x)).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP)


def _cell(column, value):
    if column == "platform":
        return value
    if value is None:
        return ""
    if column in CURRENCY_COLUMNS:
        return str(_money(value))
    return repr(float(value))


def table_to_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in table:
        d = asdict(r)
        w.writerow([_cell(c, d[c]) for c in TABLE_COLUMNS])
    return buf.getvalue()


def depth_chart_to_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["platform", "depth"])
    for platform, depth in depth_chart_data(table):
        w.writerow([platform, repr(depth)])
    return buf.getvalue()


def table_to_json(table, params: RevenueParams) -> str:
    rows = []
    for r in table:
        d = asdict(r)
        for c in CURRENCY_COLUMNS:
            if d[c] is not None:
                d[c] = str(_money(d[c]))
        rows.append(d)
    dom = uplift_dominance_check(table) if all(r.d_cwri is not None for r in table) else None
    payload = {
        "schema_version": SCHEMA_VERSION,
        "params": asdict(params),
        "rows": rows,
        "depth_chart": [{"platform": p, "depth": d} for p, d in depth_chart_data(table)],
        "uplift_dominance": None if dom is None else {
            "agrees": dom.agrees,
            "uplift_order": list(dom.uplift_order),
            "share_order": list(dom.share_order),
            "inversions": [list(p) for p in dom.inversions],
        },
    }
    return json.dumps(payload, indent=2) + "\n"
