"""Agreement and inequality measures between stationary distributions."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .surfer import (
    SolverConfig,
    SolverError,
    StationaryDistribution,
    lateral_distribution,
    pragmatic_distribution,
    uniform_distribution,
)


class MetricError(ValueError):
    pass


class AlignedPairs(NamedTuple):
    urls: list
    a: np.ndarray
    b: np.ndarray

    @property
    def size(self) -> int:
        return len(self.urls)


class Heatmap(NamedTuple):
    x_edges: np.ndarray
    y_edges: np.ndarray
    counts: np.ndarray


def align_supports(a: StationaryDistribution, b: StationaryDistribution) -> AlignedPairs:
    """Pages with positive mass in both distributions, in ``a``'s order."""
    pb = {u: p for u, p in zip(b.urls, b.probabilities.tolist()) if p > 0}
    urls, xa, xb = [], [], []
    for u, p in zip(a.urls, a.probabilities.tolist()):
        if p > 0 and u in pb:
            urls.append(u)
            xa.append(p)
            xb.append(pb[u])
    if not urls:
        raise MetricError(f"{a.model} and {b.model} share no pages")
    return AlignedPairs(urls, np.array(xa), np.array(xb))


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise MetricError("pearson needs two equal-length vectors")
    if x.size < 2:
        raise MetricError("pearson needs at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise MetricError("correlation undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def _check_mass(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise MetricError("need a non-empty 1-d vector")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise MetricError("entries must be finite and non-negative")
    total = x.sum()
    if total <= 0:
        raise MetricError("vector has zero total mass")
    return x, total


def gini(x) -> float:
    """Discrete Gini coefficient ``sum((2i - n - 1) x_(i)) / (n sum x)``.

    Entries are shifted by their minimum first; the coefficients sum to
    zero so the value is unchanged, but constant vectors come out exactly 0.
    """
    x, total = _check_mass(x)
    xs = np.sort(x)
    n = xs.size
    coef = 2.0 * np.arange(1, n + 1) - n - 1
    return float(coef @ (xs - xs[0]) / (n * total))


def lorenz_points(x) -> list:
    """``[(0, 0), (k/n, share of the k smallest entries), ...]`` ending at (1, 1)."""
    x, total = _check_mass(x)
    xs = np.sort(x)
    n = xs.size
    cum = np.cumsum(xs) / total
    cum[-1] = 1.0
    pts = [(0.0, 0.0)]
    pts.extend(((k + 1) / n, float(c)) for k, c in enumerate(cum))
    return pts


def ratio_series(pairs: AlignedPairs) -> list:
    """Rows ``(url, p_a, p_b, p_a / p_b)`` on renormalised common-support vectors,
    sorted by ``p_a`` descending (ties by URL)."""
    a = pairs.a / pairs.a.sum()
    b = pairs.b / pairs.b.sum()
    rows = [(u, float(pa), float(pb), float(pa / pb)) for u, pa, pb in zip(pairs.urls, a, b)]
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


def _log_edges(v, bins):
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        e = np.logspace(math.log10(lo) - 0.5, math.log10(lo) + 0.5, bins + 1)
    else:
        e = np.logspace(math.log10(lo), math.log10(hi), bins + 1)
        e[0], e[-1] = lo, hi
    return e


def heatmap_bins(pairs: AlignedPairs, bins_per_axis: int = 50) -> Heatmap:
    """2-d histogram of ``(p_a, p_b)`` on log10-spaced edges spanning each axis."""
    if bins_per_axis < 2:
        raise MetricError("need at least 2 bins per axis")
    if np.any(pairs.a <= 0) or np.any(pairs.b <= 0):
        raise MetricError("log binning needs positive values")
    xe = _log_edges(pairs.a, bins_per_axis)
    ye = _log_edges(pairs.b, bins_per_axis)
    counts, _, _ = np.histogram2d(pairs.a, pairs.b, bins=[xe, ye])
    return Heatmap(xe, ye, counts.astype(np.int64))


@dataclass
class PairComparison:
    model_a: str
    model_b: str
    pearson: float
    common_support_size: int
    ratios: list = field(repr=False)
    heatmap: Heatmap = field(repr=False)


@dataclass
class ComparisonReport:
    gini: dict
    support_size: dict
    lorenz: dict = field(repr=False)
    pairs: list = field(default_factory=list)

    def as_json(self) -> dict:
        return {
            "models": {
                m: {"gini": self.gini[m], "support_size": self.support_size[m]} for m in self.gini
            },
            "pairs": [
                {
                    "model_a": p.model_a,
                    "model_b": p.model_b,
                    "pearson": p.pearson,
                    "common_support_size": p.common_support_size,
                }
                for p in self.pairs
            ],
        }


def compare_pair(a: StationaryDistribution, b: StationaryDistribution, bins_per_axis: int = 50) -> PairComparison:
    pairs = align_supports(a, b)
    return PairComparison(
        a.model,
        b.model,
        pearson(pairs.a, pairs.b),
        pairs.size,
        ratio_series(pairs),
        heatmap_bins(pairs, bins_per_axis),
    )


def compare(dists: Sequence[StationaryDistribution], bins_per_axis: int = 50) -> ComparisonReport:
    """Gini/Lorenz per model and correlation/ratios/heatmap for every pair."""
    names = [d.model for d in dists]
    if len(set(names)) != len(names):
        raise MetricError("model names must be distinct")
    report = ComparisonReport(
        gini={d.model: gini(d.probabilities) for d in dists},
        support_size={d.model: int(np.count_nonzero(d.probabilities)) for d in dists},
        lorenz={d.model: lorenz_points(d.probabilities) for d in dists},
    )
    for a, b in itertools.combinations(dists, 2):
        report.pairs.append(compare_pair(a, b, bins_per_axis))
    return report


@dataclass
class SweepRow:
    alpha: float
    rho_uniform_pragmatic: float = math.nan
    rho_uniform_lateral: float = math.nan
    rho_pragmatic_lateral: float = math.nan
    gini_uniform: float = math.nan
    gini_pragmatic: float = math.nan
    gini_lateral: float = math.nan
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


SWEEP_COLUMNS = (
    "alpha",
    "rho_uniform_pragmatic",
    "rho_uniform_lateral",
    "rho_pragmatic_lateral",
    "gini_uniform",
    "gini_pragmatic",
    "gini_lateral",
    "error",
)


def _rho(a, b):
    # undefined correlation (e.g. the constant alpha = 0 surfer) is NaN, not a failed row
    try:
        pairs = align_supports(a, b)
        return pearson(pairs.a, pairs.b)
    except MetricError:
        return math.nan


def damping_sweep(graph, counts, visits, views, alphas, config: SolverConfig = None, backend=None) -> list:
    """Recompute uniform and pragmatic surfers for each alpha; lateral is fixed.

    A failing alpha yields a row with ``error`` set and NaN values; the sweep
    carries on. Correlations that are undefined are reported as NaN.
    """
    base = config or SolverConfig()
    lateral = lateral_distribution(views, graph)
    g_lat = gini(lateral.probabilities)
    rows = []
    for alpha in alphas:
        try:
            cfg = SolverConfig(float(alpha), base.tolerance, base.max_iterations)
            uni = uniform_distribution(graph, cfg, backend=backend)
            prag = pragmatic_distribution(graph, counts, visits, cfg, backend=backend)
            rows.append(
                SweepRow(
                    float(alpha),
                    _rho(uni, prag),
                    _rho(uni, lateral),
                    _rho(prag, lateral),
                    gini(uni.probabilities),
                    gini(prag.probabilities),
                    g_lat,
                )
            )
        except (SolverError, MetricError, ValueError) as exc:
            rows.append(SweepRow(float(alpha), error=f"{type(exc).__name__}: {exc}"))
    return rows


# --- file formats ----------------------------------------------------------


def _fmt(v) -> str:
    return "" if v is None else (f"{v:.17g}" if isinstance(v, float) else str(v))


def write_lorenz_csv(path, points) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["population_fraction", "mass_fraction"])
        for x, y in points:
            w.writerow([_fmt(float(x)), _fmt(float(y))])


def write_ratios_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["url", "p_a", "p_b", "ratio"])
        for u, pa, pb, r in rows:
            w.writerow([u, _fmt(pa), _fmt(pb), _fmt(r)])


def write_heatmap_csv(path, hm: Heatmap) -> None:
    """Long format: one row per cell with its edges and count."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x_bin", "y_bin", "x_lo", "x_hi", "y_lo", "y_hi", "count"])
        for i in range(hm.counts.shape[0]):
            for j in range(hm.counts.shape[1]):
                w.writerow([
                    i, j,
                    _fmt(float(hm.x_edges[i])), _fmt(float(hm.x_edges[i + 1])),
                    _fmt(float(hm.y_edges[j])), _fmt(float(hm.y_edges[j + 1])),
                    int(hm.counts[i, j]),
                ])


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in SWEEP_COLUMNS])
