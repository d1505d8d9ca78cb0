"""Hour-of-day summaries of station price archives around a reform instant.

Conventions (the published figures do not state theirs):

* quartiles use the median of the lower and upper halves, excluding the
  overall median when the count is odd;
* the 90% interval of an hourly difference is the two-sample normal
  approximation with z = 1.6449 and sample variances (ddof = 1); it is left
  empty when either side has fewer than two quotes;
* timestamps are local wall-clock; the hour is read as written, any UTC
  offset is discarded;
* prices are parsed as decimals and quantised to 4 fractional digits.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import ArchiveFormatError
from .formatting import fmt

HEADER = ("station_id", "timestamp", "price")
HOURLY_DIFF_HEADER = ("hour", "mean_before", "mean_after", "diff", "ci90_lo", "ci90_hi", "n_before", "n_after")
BOX_HEADER = ("hour", "regime", "min", "q1", "median", "q3", "max", "n")
Z90 = 1.6449
MAX_SKIP_FRACTION = 0.10
_QUANTUM = Decimal("0.0001")

BEFORE = "Before"
AFTER = "After"


@dataclass(frozen=True)
class PriceRecord:
    station_id: str
    timestamp: datetime
    price: float


@dataclass
class ParsedArchive:
    records: list[PriceRecord]
    diagnostics: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class HourlyDiffRow:
    hour: int
    mean_before: float | None
    mean_after: float | None
    diff: float | None
    ci90_lo: float | None
    ci90_hi: float | None
    n_before: int
    n_after: int


@dataclass(frozen=True)
class BoxWhiskerRow:
    hour: int
    regime: str
    min: float
    q1: float
    median: float
    q3: float
    max: float
    n: int


def parse_timestamp(text: str) -> datetime:
    ts = datetime.fromisoformat(text.strip())
    return ts.replace(tzinfo=None)


def parse_archive(stream: IO[bytes] | IO[str] | bytes | str) -> ParsedArchive:
    """Read a ``station_id,timestamp,price`` CSV.

    Leading lines starting with '#' are ignored. Malformed rows are skipped with a diagnostic naming the line; more than
    10% skipped rows, or a missing header, raises :class:`ArchiveFormatError`.
    """
    if isinstance(stream, bytes):
        text = stream.decode("utf-8-sig")
    elif isinstance(stream, str):
        text = stream
    else:
        raw = stream.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw
    lines = text.splitlines(keepends=True)
    # leading '#' lines carry run metadata
    skip = 0
    while skip < len(lines) and lines[skip].startswith("#"):
        skip += 1
    reader = csv.reader(io.StringIO("".join(lines[skip:])))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != HEADER:
        raise ArchiveFormatError(f"missing header {','.join(HEADER)!r}")

    records, diagnostics = [], []
    rows = 0
    for lineno, row in enumerate(reader, start=skip + 2):
        if not row or all(not cell.strip() for cell in row):
            continue
        rows += 1
        if len(row) != 3:
            diagnostics.append(f"line {lineno}: expected 3 fields, got {len(row)}")
            continue
        sid, ts_text, price_text = (cell.strip() for cell in row)
        if not sid:
            diagnostics.append(f"line {lineno}: empty station_id")
            continue
        try:
            ts = parse_timestamp(ts_text)
        except ValueError:
            diagnostics.append(f"line {lineno}: unparseable timestamp")
            continue
        try:
            price = Decimal(price_text).quantize(_QUANTUM, rounding=ROUND_HALF_EVEN)
        except InvalidOperation:
            diagnostics.append(f"line {lineno}: unparseable price")
            continue
        if not price.is_finite() or price <= 0:
            diagnostics.append(f"line {lineno}: price must be positive")
            continue
        records.append(PriceRecord(sid, ts, float(price)))

    skipped = len(diagnostics)
    if rows and skipped / rows > MAX_SKIP_FRACTION:
        raise ArchiveFormatError(
            f"{skipped} of {rows} rows skipped (more than 10%); first problems: "
            + "; ".join(diagnostics[:5])
        )
    return ParsedArchive(records, diagnostics)


def archive_to_csv(records: Iterable[PriceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in records:
        w.writerow([r.station_id, r.timestamp.isoformat(), f"{r.price:.4f}"])
    return buf.getvalue()


def _split(records: Iterable[PriceRecord], reform: datetime):
    buckets = {BEFORE: defaultdict(list), AFTER: defaultdict(list)}
    for r in records:
        side = BEFORE if r.timestamp < reform else AFTER
        buckets[side][r.timestamp.hour].append(r.price)
    return buckets


def _as_instant(reform) -> datetime:
    return parse_timestamp(reform) if isinstance(reform, str) else reform.replace(tzinfo=None)


def hourly_diff(records: Iterable[PriceRecord], reform_instant) -> list[HourlyDiffRow]:
    """Mean after minus mean before for each clock hour, with a 90% normal interval."""
    buckets = _split(records, _as_instant(reform_instant))
    rows = []
    for hour in range(24):
        # sorted inputs and exactly rounded sums keep results independent of record order
        before = np.sort(np.array(buckets[BEFORE].get(hour, []), dtype=float))
        after = np.sort(np.array(buckets[AFTER].get(hour, []), dtype=float))
        nb, na = before.size, after.size
        mb = math.fsum(before) / nb if nb else None
        ma = math.fsum(after) / na if na else None
        diff = lo = hi = None
        if nb and na:
            diff = ma - mb
            if nb > 1 and na > 1:
                half = Z90 * math.sqrt(before.var(ddof=1) / nb + after.var(ddof=1) / na)
                lo, hi = diff - half, diff + half
        rows.append(HourlyDiffRow(hour, mb, ma, diff, lo, hi, nb, na))
    return rows


def five_numbers(values: Sequence[float]) -> tuple[float, float, float, float, float]:
    """(min, q1, median, q3, max) with median-of-halves quartiles."""
    x = sorted(values)
    n = len(x)
    if n == 0:
        raise ValueError("five_numbers of an empty sample")

    def median(v):
        m = len(v)
        return v[m // 2] if m % 2 else 0.5 * (v[m // 2 - 1] + v[m // 2])

    med = median(x)
    if n == 1:
        return x[0], x[0], x[0], x[0], x[0]
    lower, upper = x[: n // 2], x[(n + 1) // 2 :]
    return x[0], median(lower), med, median(upper), x[-1]


def box_whisker(
    records: Iterable[PriceRecord], window: str, reform_instant, diagnostics: list[str] | None = None
) -> list[BoxWhiskerRow]:
    """Five-number summary per clock hour for one side of the reform; empty hours are omitted."""
    if window not in (BEFORE, AFTER):
        raise ValueError(f"window must be {BEFORE!r} or {AFTER!r}")
    buckets = _split(records, _as_instant(reform_instant))[window]
    rows = []
    for hour in range(24):
        vals = buckets.get(hour)
        if not vals:
            if diagnostics is not None:
                diagnostics.append(f"{window} hour {hour}: no quotes, row omitted")
            continue
        mn, q1, med, q3, mx = five_numbers(vals)
        rows.append(BoxWhiskerRow(hour, window, mn, q1, med, q3, mx, len(vals)))
    return rows


def hourly_diff_to_csv(rows: Sequence[HourlyDiffRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HOURLY_DIFF_HEADER)
    for r in rows:
        w.writerow(
            [r.hour, fmt(r.mean_before), fmt(r.mean_after), fmt(r.diff), fmt(r.ci90_lo), fmt(r.ci90_hi), r.n_before, r.n_after]
        )
    return buf.getvalue()


def box_whisker_to_csv(rows: Sequence[BoxWhiskerRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BOX_HEADER)
    for r in rows:
        w.writerow([r.hour, r.regime, fmt(r.min), fmt(r.q1), fmt(r.median), fmt(r.q3), fmt(r.max), r.n])
    return buf.getvalue()
