"""Usage analytics: readership statistics, the per-country research model,
power-law fits, and utility-time reports.

Utility minutes are exact rationals internally (Fraction); rounding happens
only at presentation. One FTE research year is 2000 hours.
"""

from __future__ import annotations

import csv
import math
import statistics
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from .corpus import ACCESS_TYPES, READ_CODES, CountryRecord, ReadLog
from .errors import InvalidQueryError, ParseError, ValidationError

# Minimum yearly query count for a country to enter model comparisons
# (about the usage of two very active individuals).
ACTIVE_COUNTRY_THRESHOLD = 1737

# Estimated yearly article reads through non-electronic means, the baseline
# the electronic full-text read count is compared against.
NONELECTRONIC_BASELINE = 1_200_000

FTE_MINUTES_PER_YEAR = 2000 * 60

FULLTEXT_CODES = ("E", "F", "G")


# ---------------------------------------------------------------------------
# Readership statistics
# ---------------------------------------------------------------------------

def month_bounds(month: str) -> tuple[int, int]:
    """Translate ``YYYY-MM`` into a UTC ``[start_ms, end_ms)`` interval."""
    parts = month.split("-")
    try:
        if len(parts) != 2:
            raise ValueError
        year, mon = int(parts[0]), int(parts[1])
        if not 1 <= mon <= 12:
            raise ValueError
    except ValueError:
        raise InvalidQueryError(f"bad month {month!r}, expected YYYY-MM") from None
    start = datetime(year, mon, 1, tzinfo=timezone.utc)
    end = datetime(year + (mon == 12), mon % 12 + 1, 1, tzinfo=timezone.utc)
    return int(start.timestamp() * 1000), int(end.timestamp() * 1000)


def _month_read_pairs(log: ReadLog, month: str) -> set[tuple[str, str]]:
    start, end = month_bounds(month)
    return {
        (e.user, e.doc)
        for e in log.events
        if e.access_type in READ_CODES and start <= e.timestamp_ms < end
    }


def unique_reads(log: ReadLog, month: str) -> int:
    """Distinct (user, doc) read pairs in a month; repeat reads of the same
    article by the same user count once."""
    return len(_month_read_pairs(log, month))


@dataclass(frozen=True)
class MonthlyUserStats:
    month: str
    heavy_threshold: int
    counts: Mapping[str, int]
    total_unique: int
    heavy_users: tuple[str, ...]
    heavy_unique: int
    median_heavy: float | None
    heavy_share: float


def user_month_stats(log: ReadLog, month: str, heavy_threshold: int = 10) -> MonthlyUserStats:
    """Per-user unique-read counts for a month, the median among heavy users
    (count >= threshold), and the heavy users' share of all unique reads."""
    if heavy_threshold <= 0:
        raise InvalidQueryError("heavy_threshold must be positive")
    pairs = _month_read_pairs(log, month)
    counts = Counter(user for user, _ in pairs)
    total = sum(counts.values())
    heavy = tuple(sorted(u for u, n in counts.items() if n >= heavy_threshold))
    heavy_unique = sum(counts[u] for u in heavy)
    median_heavy = float(statistics.median([counts[u] for u in heavy])) if heavy else None
    share = heavy_unique / total if total else 0.0
    return MonthlyUserStats(
        month=month,
        heavy_threshold=heavy_threshold,
        counts=dict(sorted(counts.items())),
        total_unique=total,
        heavy_users=heavy,
        heavy_unique=heavy_unique,
        median_heavy=median_heavy,
        heavy_share=share,
    )


@dataclass(frozen=True)
class CountryUsage:
    iso: str
    raw_entries: int
    adjusted_requests: float


def country_usage(log: ReadLog, resolver: Mapping[str, str]) -> dict[str, CountryUsage]:
    """Raw log-entry counts per country, with users resolved through the
    mapping (unmapped users fall under ZZ). Raw entries run about twice the
    true number of requests, so halved counts are emitted alongside."""
    raw: Counter[str] = Counter()
    for event in log.all_events():
        raw[resolver.get(event.user, "ZZ")] += 1
    return {
        iso: CountryUsage(iso=iso, raw_entries=n, adjusted_requests=n / 2)
        for iso, n in sorted(raw.items())
    }


def count_access_types(log: ReadLog) -> dict[str, int]:
    """Tally of every parsed log entry by access type."""
    counts = Counter(e.access_type for e in log.all_events())
    return dict(sorted(counts.items()))


# ---------------------------------------------------------------------------
# Country research model
# ---------------------------------------------------------------------------

def filter_active_countries(
    records: Sequence[CountryRecord], threshold: int = ACTIVE_COUNTRY_THRESHOLD
) -> list[CountryRecord]:
    """Keep countries whose usage is at or above the threshold."""
    return [r for r in records if r.usage >= threshold]


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    log_coeff: float
    residual_rms: float
    n: int

    @property
    def coefficient(self) -> float:
        return math.exp(self.log_coeff)


def fit_power_law(xs: Sequence[float], ys: Sequence[float]) -> PowerLawFit:
    """Least-squares line through (ln x, ln y); the slope is the exponent."""
    if len(xs) != len(ys):
        raise ValueError("xs and ys must have equal length")
    if len(xs) < 2:
        raise ValueError("need at least 2 samples")
    if any(x <= 0 for x in xs) or any(y <= 0 for y in ys):
        raise ValueError("samples must be strictly positive")
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    residuals = ly - (slope * lx + intercept)
    rms = float(np.sqrt(np.mean(residuals * residuals)))
    return PowerLawFit(exponent=float(slope), log_coeff=float(intercept), residual_rms=rms, n=len(xs))


@dataclass(frozen=True)
class CultureConstants:
    """Per-culture multiplier c and the mean GDP per scientist k (USD)."""

    c_european: float = math.sqrt(3)
    c_asian: float = 1 / math.sqrt(3)
    c_other: float = 0.0
    k: float = 4.3e9

    def c_for(self, culture: str) -> float:
        try:
            return {"european": self.c_european, "asian": self.c_asian, "other": self.c_other}[culture]
        except KeyError:
            raise ValidationError(f"unknown culture {culture!r}") from None


DEFAULT_CONSTANTS = CultureConstants()


def predict_scientists(record: CountryRecord, constants: CultureConstants = DEFAULT_CONSTANTS) -> float:
    """Scientists predicted from wealth: c(culture)/k * GDP."""
    return constants.c_for(record.culture) / constants.k * record.gdp


def predict_research(record: CountryRecord, scientists: float) -> float:
    """Research output proxy: scientists times per-capita GDP."""
    return scientists * record.gdp / record.population


def fit_usage_per_capita(records: Sequence[CountryRecord]) -> PowerLawFit:
    """Fit per-capita usage against per-capita GDP across countries.

    Data following usage/pop ∝ (gdp/pop)^2 recovers exponent 2.
    """
    xs = [r.gdp / r.population for r in records]
    ys = [r.usage / r.population for r in records]
    return fit_power_law(xs, ys)


@dataclass(frozen=True)
class CultureSplit:
    above: int = 0
    below: int = 0
    on_line: int = 0


@dataclass(frozen=True)
class BifurcationReport:
    """Counts per culture class on each side of the scientists = GDP/k line.

    Sides name the inequality: ``above`` means iau_members > gdp/k.
    """

    k: float
    splits: Mapping[str, CultureSplit]
    sides: Mapping[str, str]


def bifurcation_report(
    records: Sequence[CountryRecord], constants: CultureConstants = DEFAULT_CONSTANTS
) -> BifurcationReport:
    tallies: dict[str, dict[str, int]] = {}
    sides: dict[str, str] = {}
    for r in sorted(records, key=lambda r: r.iso):
        diff = r.iau_members - r.gdp / constants.k
        side = "above" if diff > 0 else "below" if diff < 0 else "on_line"
        sides[r.iso] = side
        bucket = tallies.setdefault(r.culture, {"above": 0, "below": 0, "on_line": 0})
        bucket[side] += 1
    splits = {culture: CultureSplit(**counts) for culture, counts in sorted(tallies.items())}
    return BifurcationReport(k=constants.k, splits=splits, sides=sides)


# ---------------------------------------------------------------------------
# Utility time
# ---------------------------------------------------------------------------

_DEFAULT_MINUTES = {"A": 5, "C": 5, "R": 5, "E": 15, "F": 15, "G": 15, "Q": 1}


@dataclass(frozen=True)
class UtilityTable:
    """Minutes of research time gained per access, by access type."""

    minutes: Mapping[str, Fraction]

    @classmethod
    def default(cls) -> "UtilityTable":
        table = {code: Fraction(_DEFAULT_MINUTES.get(code, 0)) for code in sorted(ACCESS_TYPES)}
        return cls(minutes=table)

    def with_overrides(self, overrides: Mapping[str, Fraction | int | float | str]) -> "UtilityTable":
        table = dict(self.minutes)
        for code, value in overrides.items():
            if code not in ACCESS_TYPES:
                raise ValidationError(f"unknown access code {code!r}")
            minutes = Fraction(str(value)) if isinstance(value, float) else Fraction(value)
            if minutes < 0:
                raise ValidationError(f"minutes for {code} must be non-negative")
            table[code] = minutes
        return UtilityTable(minutes=table)


@dataclass(frozen=True)
class UtilityRow:
    code: str
    count: int
    minutes: Fraction
    fte_years: Fraction


@dataclass(frozen=True)
class UtilityReport:
    rows: tuple[UtilityRow, ...]
    total_fte_years: Fraction


def utility_report(counts: Mapping[str, int], table: UtilityTable | None = None) -> UtilityReport:
    """Research time gained: per row fte = count * minutes / 60 / 2000."""
    table = table or UtilityTable.default()
    rows = []
    for code in sorted(counts):
        if code not in ACCESS_TYPES:
            raise ValidationError(f"unknown access code {code!r}")
        count = counts[code]
        if count < 0:
            raise ValidationError(f"count for {code} must be non-negative")
        minutes = table.minutes[code]
        fte = Fraction(count) * minutes / FTE_MINUTES_PER_YEAR
        rows.append(UtilityRow(code=code, count=count, minutes=minutes, fte_years=fte))
    total = sum((row.fte_years for row in rows), Fraction(0))
    return UtilityReport(rows=tuple(rows), total_fte_years=total)


def fulltext_reads(counts: Mapping[str, int]) -> int:
    """Electronic full-text accesses: HTML, PDF, and scanned-image views."""
    return sum(counts.get(code, 0) for code in FULLTEXT_CODES)


def readership_ratio(electronic_reads: int, baseline: int = NONELECTRONIC_BASELINE) -> float:
    """Electronic full-text reads relative to the non-electronic baseline."""
    if baseline <= 0:
        raise ValueError("baseline must be positive")
    return electronic_reads / baseline


# ---------------------------------------------------------------------------
# Reads share vs. citation/publication shares
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShareRow:
    """One country's percent share of worldwide reads, cites, and papers."""

    country: str
    reads_pct: float
    cites_pct: float
    papers_pct: float

    @property
    def mean_cites_papers(self) -> float:
        return (self.cites_pct + self.papers_pct) / 2

    @property
    def relative_deviation(self) -> float:
        """How far the reads share sits from the cite/paper average."""
        return (self.reads_pct - self.mean_cites_papers) / self.mean_cites_papers


@dataclass(frozen=True)
class ShareReport:
    rows: tuple[ShareRow, ...]
    median_abs_deviation: float


def share_report(rows: Sequence[ShareRow]) -> ShareReport:
    """Relative deviation of each country's reads share from the mean of its
    citation and paper shares, with the median absolute deviation."""
    for row in rows:
        if row.mean_cites_papers <= 0:
            raise ValidationError(f"{row.country}: cite/paper shares must average above zero")
    ordered = tuple(sorted(rows, key=lambda r: r.country))
    median = float(statistics.median(abs(r.relative_deviation) for r in ordered)) if ordered else 0.0
    return ShareReport(rows=ordered, median_abs_deviation=median)


# ---------------------------------------------------------------------------
# File surfaces
# ---------------------------------------------------------------------------

def load_utility_table(path: str | Path) -> UtilityTable:
    """Load a ``code,minutes`` CSV as overrides on the default table."""
    path = Path(path)
    overrides: dict[str, Fraction] = {}
    with path.open(encoding="utf-8", newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", path=str(path), line=lineno)
            code = row[0].strip()
            try:
                minutes = Fraction(row[1].strip())
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"bad minutes {row[1]!r}", path=str(path), line=lineno) from None
            overrides[code] = minutes
    try:
        return UtilityTable.default().with_overrides(overrides)
    except ValidationError as exc:
        raise ValidationError(exc.message, path=str(path)) from None


def load_access_counts(path: str | Path) -> dict[str, int]:
    """Load a ``code,count`` CSV of access tallies."""
    path = Path(path)
    counts: dict[str, int] = {}
    with path.open(encoding="utf-8", newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", path=str(path), line=lineno)
            code = row[0].strip()
            if code not in ACCESS_TYPES:
                raise ParseError(f"unknown access code {code!r}", path=str(path), line=lineno)
            try:
                count = int(row[1].strip().replace(",", ""))
            except ValueError:
                raise ParseError(f"bad count {row[1]!r}", path=str(path), line=lineno) from None
            if count < 0:
                raise ParseError("counts must be non-negative", path=str(path), line=lineno)
            counts[code] = counts.get(code, 0) + count
    return counts


def load_share_table(path: str | Path) -> list[ShareRow]:
    """Load a ``country,reads,cites,papers`` CSV of percent shares."""
    path = Path(path)
    rows: list[ShareRow] = []
    with path.open(encoding="utf-8", newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", path=str(path), line=lineno)
            try:
                rows.append(
                    ShareRow(
                        country=row[0].strip(),
                        reads_pct=float(row[1]),
                        cites_pct=float(row[2]),
                        papers_pct=float(row[3]),
                    )
                )
            except ValueError:
                raise ParseError("bad share value", path=str(path), line=lineno) from None
    return rows
