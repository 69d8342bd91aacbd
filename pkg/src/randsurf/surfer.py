"""Stationary distributions of the uniform, pragmatic and lateral surfers.

``pagerank_power`` is the production solver; ``pagerank_solve`` is a dense
direct solve of ``pi = D (D - alpha A)^-1 1`` kept as an independent
oracle; ``monte_carlo_walk`` simulates the walker itself.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional

import numpy as np

from . import kernels
from .graph import LinkGraph, induced_visited_subgraph, sublinear_scale  # noqa: F401

MODELS = ("uniform", "pragmatic", "lateral")
DENSE_LIMIT = 2000


class SolverError(RuntimeError):
    pass


class ConvergenceError(SolverError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"power iteration did not converge in {iterations} iterations (L1 residual {residual:.3e})")


@dataclass
class SolverConfig:
    alpha: float = 0.85
    tolerance: float = 1e-12
    max_iterations: int = 10000

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class StationaryDistribution:
    probabilities: np.ndarray
    urls: list
    model: str
    alpha: Optional[float] = None
    page_ids: Optional[np.ndarray] = None
    iterations: Optional[int] = None
    residual: Optional[float] = None
    residuals: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=np.float64)
        if self.probabilities.shape != (len(self.urls),):
            raise ValueError("one probability per URL required")
        if self.page_ids is None:
            self.page_ids = np.arange(len(self.urls), dtype=np.int64)

    def __len__(self):
        return len(self.urls)

    def as_dict(self) -> dict:
        return dict(zip(self.urls, self.probabilities.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["page_id", "url", "probability"])
            for pid, url, p in zip(self.page_ids.tolist(), self.urls, self.probabilities.tolist()):
                w.writerow([pid, url, f"{p:.17g}"])

    @classmethod
    def from_csv(cls, path, model: str = "unknown", alpha=None) -> "StationaryDistribution":
        ids, urls, probs = [], [], []
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["page_id", "url", "probability"]:
                raise ValueError(f"{path}: not a distribution file")
            for row in reader:
                if not row:
                    continue
                ids.append(int(row[0]))
                urls.append(row[1])
                probs.append(float(row[2]))
        return cls(np.array(probs), urls, model, alpha, page_ids=np.array(ids, dtype=np.int64))


class TransitionMatrix(NamedTuple):
    """Edge-wise column-(sub)stochastic matrix: ``P[dst[e], src[e]] = prob[e]``."""

    src: np.ndarray
    dst: np.ndarray
    prob: np.ndarray
    n: int

    def to_dense(self) -> np.ndarray:
        p = np.zeros((self.n, self.n))
        np.add.at(p, (self.dst, self.src), self.prob)
        return p


def build_transition_matrix(graph: LinkGraph) -> TransitionMatrix:
    """``P = A D^-1``; dangling nodes (``d = 1``) give all-zero columns."""
    src = graph.sources()
    deg = graph.out_degrees()
    prob = graph.weights / deg[src] if graph.num_edges else np.zeros(0)
    return TransitionMatrix(src, graph.indices.copy(), prob, graph.n)


def _check_alpha(alpha, upper_open=True):
    ok = 0.0 <= alpha < 1.0 if upper_open else 0.0 <= alpha <= 1.0
    if not ok:
        raise ValueError(f"alpha out of range: {alpha}")


def pagerank_power(graph: LinkGraph, config: SolverConfig = None, model: str = "uniform", backend=None):
    """Teleporting random-surfer distribution by power iteration.

    Dangling mass leaks out through the zero columns and is restored by the
    final normalisation, which gives the same vector as the direct solve.
    """
    config = config or SolverConfig()
    _check_alpha(config.alpha)
    if graph.n < 1:
        raise ValueError("graph has no nodes")
    tm = build_transition_matrix(graph)
    x, residuals = kernels.power_iterate(
        tm.src, tm.dst, tm.prob, tm.n, config.alpha, config.tolerance, config.max_iterations, backend=backend
    )
    last = float(residuals[-1])
    if not last <= config.tolerance:
        raise ConvergenceError(len(residuals), last)
    return StationaryDistribution(
        x / x.sum(),
        list(graph.urls),
        model,
        config.alpha,
        page_ids=graph.origin.copy() if graph.origin is not None else None,
        iterations=len(residuals),
        residual=last,
        residuals=residuals,
    )


def pagerank_solve(graph: LinkGraph, alpha: float = 0.85, model: str = "uniform"):
    """Dense direct solve of ``pi = D (D - alpha A)^-1 1``, normalised."""
    _check_alpha(alpha, upper_open=False)
    n = graph.n
    if n < 1:
        raise ValueError("graph has no nodes")
    if n > DENSE_LIMIT:
        raise SolverError(f"dense solve limited to {DENSE_LIMIT} nodes, graph has {n}")
    a = graph.adjacency_dense()
    k = a.sum(axis=0)
    d = np.where(k > 0, k, 1.0)
    m = np.diag(d) - alpha * a
    try:
        y = np.linalg.solve(m, np.ones(n))
    except np.linalg.LinAlgError as exc:
        raise SolverError("singular system D - alpha A") from exc
    pi = d * y
    if not np.all(np.isfinite(pi)) or pi.sum() <= 0:
        raise SolverError("dense solve produced an invalid vector")
    return StationaryDistribution(
        pi / pi.sum(), list(graph.urls), model, alpha,
        page_ids=graph.origin.copy() if graph.origin is not None else None,
    )


def uniform_distribution(graph: LinkGraph, config: SolverConfig = None, backend=None):
    return pagerank_power(graph.unweighted(), config, "uniform", backend=backend)


def pragmatic_distribution(unweighted: LinkGraph, counts, visits, config: SolverConfig = None, backend=None):
    """Click-weighted surfer on the subgraph induced by visited pages.

    The result's ``page_ids`` refer to ``unweighted``'s node ids.
    """
    visits = np.asarray(visits, dtype=bool)
    if not visits.any():
        raise ValueError("no visited pages")
    sub = induced_visited_subgraph(unweighted.unweighted(), counts, visits)
    if sub.n == 0:
        raise ValueError("no links between visited pages")
    return pagerank_power(sub, config, "pragmatic", backend=backend)


def lateral_distribution(views: Mapping[str, int], graph: Optional[LinkGraph] = None):
    """Normalised page views. ``page_ids`` come from ``graph`` when given (-1 if unknown)."""
    urls, vals = [], []
    for url, c in views.items():
        if c < 0:
            raise ValueError(f"negative page view count for {url}")
        if c > 0:
            urls.append(url)
            vals.append(float(c))
    if not urls:
        raise ValueError("no page views")
    v = np.array(vals)
    ids = None
    if graph is not None:
        ids = np.array([graph.index.get(u, -1) for u in urls], dtype=np.int64)
    return StationaryDistribution(v / v.sum(), urls, "lateral", None, page_ids=ids)


def monte_carlo_walk(graph: LinkGraph, alpha: float, steps: int, rng_seed: int, backend=None) -> np.ndarray:
    """Empirical visit frequencies of a simulated teleporting walker.

    Each step teleports uniformly with probability ``1 - alpha`` (always from
    dangling nodes), otherwise follows an out-link chosen proportionally to
    its weight.
    """
    _check_alpha(alpha, upper_open=False)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    counts = kernels.walk_counts(
        graph.indptr, graph.indices, graph.cumulative_weights(), graph.n, alpha, steps, rng_seed, backend=backend
    )
    return counts / float(steps)
