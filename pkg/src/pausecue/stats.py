"""Statistics over coded records: grouped means, counts, and the three tests.

Regenerates the published summary tables (operation and marker counts, mean
pause durations by operation, by initial token and operation, and by
marked/unmarked status) and runs a one-way ANOVA, a Pearson correlation and
a pooled two-sample t-test over pause durations.

p-values are computed from the regularized incomplete beta function,
evaluated by continued fraction (modified Lentz).  For the F distribution,
    P(F > f) = I_x(d2/2, d1/2)      with x = d2 / (d2 + d1 f),
and for Student's t (two-sided),
    p = I_x(df/2, 1/2)              with x = df / (df + t^2).
The Pearson p-value uses the transform t = r sqrt((n-2) / (1-r^2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

from .focus import OpKind
from .fragments import CodedRecord
from .pauses import PauseRecord, round_tenth

OP_ORDER = ("Initiate", "Retain", "Return", "Replace")
CANONICAL_TOKEN_ROWS = ("And", "But", "Now", "Oh", "So", "Well", "Y'know", "Ordinal")
TAIL_TOKEN_ROWS = ("Acknowledgment", "Filled Pause", "Unmarked")


class ZeroVariance(Exception):
    """A test that needs spread was handed constant data."""


# ---------------------------------------------------------------------------
# Regularized incomplete beta (continued fraction) and the derived p-values
# ---------------------------------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz iteration."""
    max_iter = 300
    eps = 3e-15
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(f: float, df1: int, df2: int) -> float:
    """Upper tail of the F distribution."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    x = df2 / (df2 + df1 * f)
    return reg_inc_beta(df2 / 2.0, df1 / 2.0, x)


def f_cdf(f: float, df1: int, df2: int) -> float:
    return 1.0 - f_sf(f, df1, df2)


def t_two_sided(t: float, df: int) -> float:
    """Two-sided p-value for Student's t."""
    if t == 0:
        return 1.0
    x = df / (df + t * t)
    return reg_inc_beta(df / 2.0, 0.5, x)


def t_cdf(t: float, df: int) -> float:
    p = t_two_sided(abs(t), df) / 2.0
    return 1.0 - p if t >= 0 else p


# ---------------------------------------------------------------------------
# Result containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellStat:
    mean: float
    count: int
    sd: float | None = None

    def to_dict(self) -> dict:
        return {"mean": self.mean, "count": self.count, "sd": self.sd}


@dataclass(frozen=True)
class GroupedMeans:
    """Cell means with count-weighted row, column and grand margins."""

    cells: dict[tuple[str, str], CellStat]
    row_margins: dict[str, CellStat]
    col_margins: dict[str, CellStat]
    grand: CellStat
    row_order: tuple[str, ...]
    col_order: tuple[str, ...]

    def cell(self, row: str, col: str) -> CellStat | None:
        return self.cells.get((row, col))

    def to_dict(self) -> dict:
        return {
            "rows": list(self.row_order),
            "cols": list(self.col_order),
            "cells": {row: {col: self.cells[(row, col)].to_dict()
                            for col in self.col_order if (row, col) in self.cells}
                      for row in self.row_order},
            "row_margins": {row: stat.to_dict() for row, stat in self.row_margins.items()},
            "col_margins": {col: stat.to_dict() for col, stat in self.col_margins.items()},
            "grand": self.grand.to_dict(),
        }


@dataclass(frozen=True)
class AnovaResult:
    F: float
    df_between: int
    df_within: int
    p: float

    def to_dict(self) -> dict:
        return {"F": self.F, "df_between": self.df_between,
                "df_within": self.df_within, "p": self.p}


@dataclass(frozen=True)
class CorrResult:
    r: float
    n: int
    p: float

    def to_dict(self) -> dict:
        return {"r": self.r, "n": self.n, "p": self.p}


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p: float
    mean_a: float
    mean_b: float
    sd_a: float
    sd_b: float
    n_a: int
    n_b: int

    def to_dict(self) -> dict:
        return {"t": self.t, "df": self.df, "p": self.p,
                "mean_a": self.mean_a, "mean_b": self.mean_b,
                "sd_a": self.sd_a, "sd_b": self.sd_b,
                "n_a": self.n_a, "n_b": self.n_b}


def _stat(values: Sequence[float]) -> CellStat:
    # summing in sorted order keeps aggregates identical under permutation
    ordered = sorted(values)
    n = len(ordered)
    mean = sum(ordered) / n
    sd = None
    if n >= 2:
        sd = math.sqrt(sum((v - mean) ** 2 for v in ordered) / (n - 1))
    return CellStat(mean=mean, count=n, sd=sd)


def grouped_means(triples: Iterable[tuple[str, str, float]],
                  row_order: Sequence[str] | None = None,
                  col_order: Sequence[str] | None = None) -> GroupedMeans:
    """Build a table of cell means from (row, col, value) triples.

    Absent cells stay absent rather than reading as zero.  Margins are
    count-weighted, so permuting the input leaves every statistic unchanged.
    """
    by_cell: dict[tuple[str, str], list[float]] = {}
    by_row: dict[str, list[float]] = {}
    by_col: dict[str, list[float]] = {}
    everything: list[float] = []
    for row, col, value in triples:
        by_cell.setdefault((row, col), []).append(value)
        by_row.setdefault(row, []).append(value)
        by_col.setdefault(col, []).append(value)
        everything.append(value)
    if not everything:
        raise ValueError("no values to aggregate")

    rows = tuple(row_order) if row_order is not None else tuple(sorted(by_row))
    cols = tuple(col_order) if col_order is not None else tuple(sorted(by_col))
    return GroupedMeans(
        cells={key: _stat(vals) for key, vals in by_cell.items()},
        row_margins={row: _stat(vals) for row, vals in by_row.items()},
        col_margins={col: _stat(vals) for col, vals in by_col.items()},
        grand=_stat(everything),
        row_order=rows,
        col_order=cols,
    )


# ---------------------------------------------------------------------------
# Distribution panels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountPanel:
    cells: dict[tuple[str, str], int]
    row_order: tuple[str, ...]
    col_order: tuple[str, ...]

    def cell(self, row: str, col: str) -> int:
        return self.cells.get((row, col), 0)

    def row_total(self, row: str) -> int:
        return sum(self.cell(row, col) for col in self.col_order)

    def col_total(self, col: str) -> int:
        return sum(self.cell(row, col) for row in self.row_order)

    @property
    def total(self) -> int:
        return sum(self.cells.values())

    def to_dict(self) -> dict:
        return {"rows": list(self.row_order), "cols": list(self.col_order),
                "cells": {row: {col: self.cell(row, col) for col in self.col_order}
                          for row in self.row_order}}


@dataclass(frozen=True)
class PausePanel:
    """Histogram of reported pause durations at 0.1 s bins by position."""

    bins: tuple[float, ...]
    counts: dict[tuple[float, str], int]
    totals: dict[str, int]
    averages: dict[str, float | None]

    def count(self, bin_s: float, position: str) -> int:
        return self.counts.get((bin_s, position), 0)

    def to_dict(self) -> dict:
        return {
            "bins": list(self.bins),
            "initial": [self.count(b, "fragment_initial") for b in self.bins],
            "internal": [self.count(b, "fragment_internal") for b in self.bins],
            "totals": dict(self.totals),
            "averages": dict(self.averages),
        }


@dataclass(frozen=True)
class DistributionTables:
    operation_marked: CountPanel
    token_position: CountPanel
    pause_panel: PausePanel

    def to_dict(self) -> dict:
        return {"operation_marked_counts": self.operation_marked.to_dict(),
                "token_position_counts": self.token_position.to_dict(),
                "pause_histogram": self.pause_panel.to_dict()}


def _token_rows(records: Sequence[CodedRecord]) -> tuple[str, ...]:
    present = {rec.row_label() for rec in records}
    head = [row for row in CANONICAL_TOKEN_ROWS if row in present]
    extras = sorted(present - set(CANONICAL_TOKEN_ROWS) - set(TAIL_TOKEN_ROWS))
    tail = [row for row in TAIL_TOKEN_ROWS if row in present]
    return tuple(head + extras + tail)


def table_distributions(records: Sequence[CodedRecord],
                        pauses: Sequence[PauseRecord] | None = None) -> DistributionTables:
    """Count panels for operations, initial tokens and pause durations.

    The token panel splits rows into segment-initial fragments (the
    operation changed the stack) and segment-internal ones (Retain).  The
    pause histogram prefers a measured pause inventory when one is supplied;
    otherwise it bins the records' own preceding pauses, which are
    fragment-initial by construction.
    """
    op_cells: dict[tuple[str, str], int] = {}
    token_cells: dict[tuple[str, str], int] = {}
    for rec in records:
        mark = "marked" if rec.marked else "unmarked"
        op_key = (rec.operation.kind.value, mark)
        op_cells[op_key] = op_cells.get(op_key, 0) + 1
        pos = "internal" if rec.operation.kind is OpKind.RETAIN else "initial"
        tok_key = (rec.row_label(), pos)
        token_cells[tok_key] = token_cells.get(tok_key, 0) + 1

    if pauses is not None:
        hist_pairs = [(round_tenth(p.reported_duration_s), p.position) for p in pauses]
    else:
        hist_pairs = [(round_tenth(rec.pause_before_s), "fragment_initial")
                      for rec in records if rec.pause_before_s is not None]
    bins = tuple(sorted({b for b, _ in hist_pairs}))
    counts: dict[tuple[float, str], int] = {}
    sums: dict[str, float] = {"fragment_initial": 0.0, "fragment_internal": 0.0}
    totals: dict[str, int] = {"fragment_initial": 0, "fragment_internal": 0}
    for bin_s, position in hist_pairs:
        counts[(bin_s, position)] = counts.get((bin_s, position), 0) + 1
        totals[position] += 1
        sums[position] += bin_s
    averages = {pos: (sums[pos] / totals[pos] if totals[pos] else None)
                for pos in totals}

    return DistributionTables(
        operation_marked=CountPanel(cells=op_cells, row_order=OP_ORDER,
                                    col_order=("marked", "unmarked")),
        token_position=CountPanel(cells=token_cells, row_order=_token_rows(records),
                                  col_order=("initial", "internal")),
        pause_panel=PausePanel(bins=bins, counts=counts, totals=totals,
                               averages=averages),
    )


def _measured(records: Sequence[CodedRecord]) -> list[CodedRecord]:
    return [rec for rec in records if rec.pause_before_s is not None]


def mean_pause_by_operation(records: Sequence[CodedRecord]) -> GroupedMeans:
    """Mean preceding pause per focusing operation (count and sd included)."""
    rows = [(rec.operation.kind.value, "ALL", rec.pause_before_s)
            for rec in _measured(records)]
    return grouped_means(rows, row_order=OP_ORDER, col_order=("ALL",))


def mean_pause_by_token_and_operation(records: Sequence[CodedRecord]) -> GroupedMeans:
    """Mean preceding pause for each initial token and co-occurring operation."""
    measured = _measured(records)
    rows = [(rec.row_label(), rec.operation.kind.value, rec.pause_before_s)
            for rec in measured]
    return grouped_means(rows, row_order=_token_rows(measured), col_order=OP_ORDER)


def marked_unmarked_table(records: Sequence[CodedRecord]) -> GroupedMeans:
    """Mean preceding pause for marked and unmarked fragments by operation."""
    rows = [("Marked" if rec.marked else "Unmarked", rec.operation.kind.value,
             rec.pause_before_s)
            for rec in _measured(records)]
    return grouped_means(rows, row_order=("Marked", "Unmarked"), col_order=OP_ORDER)


# ---------------------------------------------------------------------------
# Tests
# ---------------------------------------------------------------------------

def anova_one_way(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """Classical one-way fixed-effects ANOVA.

    Degenerate all-constant input yields F = 0 and p = 1 rather than an
    exception; a zero within-group variance with real between-group spread
    yields an infinite F.
    """
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    if any(len(g) == 0 for g in groups):
        raise ValueError("groups must be nonempty")
    n_total = sum(len(g) for g in groups)
    k = len(groups)
    if n_total <= k:
        raise ValueError("need more observations than groups")

    grand = sum(sum(g) for g in groups) / n_total
    ss_between = sum(len(g) * (sum(g) / len(g) - grand) ** 2 for g in groups)
    ss_within = sum(sum((x - sum(g) / len(g)) ** 2 for x in g) for g in groups)
    df_between = k - 1
    df_within = n_total - k

    if ss_within == 0.0:
        if ss_between == 0.0:
            return AnovaResult(F=0.0, df_between=df_between, df_within=df_within, p=1.0)
        return AnovaResult(F=math.inf, df_between=df_between, df_within=df_within, p=0.0)
    f = (ss_between / df_between) / (ss_within / df_within)
    return AnovaResult(F=f, df_between=df_between, df_within=df_within,
                       p=f_sf(f, df_between, df_within))


def pearson(x: Sequence[float], y: Sequence[float]) -> CorrResult:
    """Sample Pearson correlation with a t-transform p-value."""
    if len(x) != len(y):
        raise ValueError("samples must have equal length")
    n = len(x)
    if n < 3:
        raise ValueError("need at least three pairs")
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((v - mx) ** 2 for v in x)
    syy = sum((v - my) ** 2 for v in y)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("correlation undefined for constant samples")
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return CorrResult(r=r, n=n, p=0.0)
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return CorrResult(r=r, n=n, p=t_two_sided(t, n - 2))


def t_test_pooled(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sample t-test with pooled variance, two-sided p, df = n_a + n_b - 2."""
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each group needs at least two observations")
    na, nb = len(a), len(b)
    ma = sum(a) / na
    mb = sum(b) / nb
    ssa = sum((v - ma) ** 2 for v in a)
    ssb = sum((v - mb) ** 2 for v in b)
    df = na + nb - 2
    pooled_var = (ssa + ssb) / df
    if pooled_var == 0.0:
        if ma == mb:
            raise ZeroVariance("pooled variance is zero and the means agree")
        raise ZeroVariance("pooled variance is zero")
    se = math.sqrt(pooled_var * (1.0 / na + 1.0 / nb))
    t = (ma - mb) / se
    sd_a = math.sqrt(ssa / (na - 1))
    sd_b = math.sqrt(ssb / (nb - 1))
    return TTestResult(t=t, df=df, p=t_two_sided(t, df), mean_a=ma, mean_b=mb,
                       sd_a=sd_a, sd_b=sd_b, n_a=na, n_b=nb)


# ---------------------------------------------------------------------------
# Full report assembly
# ---------------------------------------------------------------------------

@dataclass
class StatsReport:
    n_records: int
    excluded_records: int
    distributions: DistributionTables
    by_operation: GroupedMeans
    by_token_and_operation: GroupedMeans
    by_marking: GroupedMeans
    anova: AnovaResult | None
    correlation: CorrResult | None
    t_test: TTestResult | None
    notes: list[str] = dc_field(default_factory=list)
    config_note: str = ""

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "config": self.config_note,
            "n_records": self.n_records,
            "excluded_records": self.excluded_records,
            "tables": {
                **self.distributions.to_dict(),
                "mean_pause_by_operation": self.by_operation.to_dict(),
                "mean_pause_by_token_and_operation": self.by_token_and_operation.to_dict(),
                "marked_unmarked": self.by_marking.to_dict(),
            },
            "tests": {
                "anova": self.anova.to_dict() if self.anova else None,
                "pearson": self.correlation.to_dict() if self.correlation else None,
                "t_test": self.t_test.to_dict() if self.t_test else None,
            },
            "notes": list(self.notes),
        }


def compute_report(records: Sequence[CodedRecord],
                   pauses: Sequence[PauseRecord] | None = None,
                   config_note: str = "") -> StatsReport:
    """Aggregate every table and test; degenerate inputs drop a test with a note."""
    if not records:
        raise ValueError("no records to analyze")
    measured = _measured(records)
    excluded = len(records) - len(measured)
    notes: list[str] = []
    if excluded:
        notes.append(f"{excluded} record(s) without a measured pause were excluded")

    distributions = table_distributions(measured, pauses)
    by_op = mean_pause_by_operation(measured)
    by_token = mean_pause_by_token_and_operation(measured)
    by_marking = marked_unmarked_table(measured)

    anova = None
    groups = [[rec.pause_before_s for rec in measured if rec.operation.kind.value == op]
              for op in OP_ORDER]
    groups = [g for g in groups if g]
    try:
        anova = anova_one_way(groups)
    except ValueError as exc:
        notes.append(f"ANOVA skipped: {exc}")

    correlation = None
    try:
        correlation = pearson([float(rec.segments_affected) for rec in measured],
                              [rec.pause_before_s for rec in measured])
    except (ValueError, ZeroVariance) as exc:
        notes.append(f"correlation skipped: {exc}")

    t_test = None
    marked = [rec.pause_before_s for rec in measured if rec.marked]
    unmarked = [rec.pause_before_s for rec in measured if not rec.marked]
    try:
        t_test = t_test_pooled(marked, unmarked)
    except (ValueError, ZeroVariance) as exc:
        notes.append(f"marked/unmarked t-test skipped: {exc}")
    if t_test is not None:
        notes.append(f"pooled t-test df = {t_test.df} "
                     f"({t_test.n_a} marked vs {t_test.n_b} unmarked); "
                     "the published analysis reports T(96)")

    notes.append("token panel: initial = the operation changed the stack, "
                 "internal = Retain; the published split (45/54) is not "
                 "derivable from the coded fields")
    if pauses is not None:
        notes.append("pause histogram drawn from the measured pause inventory, "
                     "which is larger than the fragment inventory")

    return StatsReport(n_records=len(records), excluded_records=excluded,
                       distributions=distributions, by_operation=by_op,
                       by_token_and_operation=by_token, by_marking=by_marking,
                       anova=anova, correlation=correlation, t_test=t_test,
                       notes=notes, config_note=config_note)
