"""Approximate geometric median by the modified Weiszfeld iteration.

The plain Weiszfeld map moves the iterate to the inverse-distance weighted
mean of the points. When the iterate sits on data points (multiplicity
``eta``) the map is undefined there; following Vardi and Zhang the step is
damped instead:

    y' = max(0, 1 - eta/|R(y)|) * T~(y) + min(1, eta/|R(y)|) * y

with ``R(y)`` the sum of unit vectors from ``y`` towards the other points
and ``T~`` the Weiszfeld map over those points. If ``|R(y)| <= eta`` the
iterate is already optimal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._parallel import CHUNK_SIZE, chunk_bounds, parallel_chunks, tree_sum
from .errors import ConfigError, DataError, SolverError
from .vectorizer import EmbeddingMatrix

log = logging.getLogger(__name__)

# Below this many cells a sparse input is densified; the dense kernel has
# no cancellation in the distance computation.
DENSE_CELL_LIMIT = 2_000_000

# Relative slack on the per-iteration descent check (floating-point noise).
_DESCENT_SLACK = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-5
    max_iterations: int = 1000
    coincidence_tolerance: float = 1e-12

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if int(self.max_iterations) < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.coincidence_tolerance > 0:
            raise ConfigError("coincidence_tolerance must be > 0")


@dataclass(frozen=True)
class MedianResult:
    point: np.ndarray
    objective: float
    iterations: int
    converged: bool
    epsilon: float
    history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def dim(self) -> int:
        return self.point.size


class PointSet:
    """Row points (dense or CSR) with chunked distance / weighted-sum kernels."""

    def __init__(self, points, chunk_size=CHUNK_SIZE):
        if isinstance(points, PointSet):
            points = points.X
        if isinstance(points, EmbeddingMatrix):
            points = points.matrix
        if sp.issparse(points):
            X = sp.csr_matrix(points, dtype=np.float64)
            if X.shape[0] * X.shape[1] <= DENSE_CELL_LIMIT:
                X = X.toarray()
        else:
            X = np.atleast_2d(np.asarray(points, dtype=np.float64))
            if X.ndim != 2:
                raise DataError("points must be a 2-D array")
        if X.shape[0] == 0:
            raise DataError("point set is empty")
        if X.shape[1] == 0:
            raise DataError("points have zero dimensions")
        self.X = X
        self.sparse = sp.issparse(X)
        self.chunk_size = chunk_size
        self._chunks = [X[lo:hi] for lo, hi in chunk_bounds(X.shape[0], chunk_size)]
        if self.sparse:
            self._patterns = []
            for c in self._chunks:
                c.sort_indices()
                self._patterns.append(sp.csr_matrix((np.ones_like(c.data), c.indices, c.indptr), shape=c.shape))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def row(self, i: int) -> np.ndarray:
        if self.sparse:
            return self.X[i].toarray().ravel()
        return self.X[i].copy()

    def _check(self, y):
        y = np.asarray(y, dtype=np.float64).ravel()
        if y.size != self.dim:
            raise DataError(f"dimension mismatch: point set has {self.dim}, vector has {y.size}")
        return y

    def distances(self, y, threads=1) -> np.ndarray:
        """Euclidean distance from every row to ``y``."""
        y = self._check(y)
        if self.sparse:
            ysq = float(np.dot(y, y))
            y2 = y * y

            def work(lo, hi):
                c = self._chunks[lo // self.chunk_size]
                p = self._patterns[lo // self.chunk_size]
                # on-support part exactly, off-support part via ||y||^2 - sum_supp y_j^2
                diff2 = (c.data - y[c.indices]) ** 2
                on = np.zeros(c.shape[0])
                nz = np.flatnonzero(np.diff(c.indptr))
                if nz.size:
                    on[nz] = np.add.reduceat(diff2, c.indptr[nz])
                off = np.maximum(ysq - p @ y2, 0.0)
                return np.sqrt(on + off)
        else:
            def work(lo, hi):
                diff = self._chunks[lo // self.chunk_size] - y
                return np.sqrt(np.einsum("ij,ij->i", diff, diff))

        return np.concatenate(parallel_chunks(work, self.n, threads, self.chunk_size))

    def weighted_sum(self, w, threads=1) -> np.ndarray:
        """``sum_i w_i * x_i`` as a dense vector."""
        w = np.asarray(w, dtype=np.float64)

        def work(lo, hi):
            c = self._chunks[lo // self.chunk_size]
            return np.asarray(c.T @ w[lo:hi]).ravel()

        return tree_sum(parallel_chunks(work, self.n, threads, self.chunk_size))


def objective(points, g, threads=1) -> float:
    """Sum of Euclidean distances from ``g`` to every point."""
    ps = points if isinstance(points, PointSet) else PointSet(points)
    return float(np.sum(ps.distances(g, threads)))


def _unit_sum(ps, y, d, tol, threads):
    """Pieces of the (sub)gradient at ``y`` given distances ``d``.

    Returns ``(eta, w_total, s, r_norm)``: coincident multiplicity, sum of
    inverse distances, inverse-distance weighted point sum and the norm of
    ``R(y) = s - w_total * y``.
    """
    far = d > tol
    eta = int(ps.n - np.count_nonzero(far))
    w = np.zeros(ps.n)
    w[far] = 1.0 / d[far]
    w_total = float(np.sum(w))
    if w_total == 0.0:
        return eta, 0.0, None, 0.0
    s = ps.weighted_sum(w, threads)
    return eta, w_total, s, float(np.linalg.norm(s - w_total * y))


def geometric_median(points, cfg: SolverConfig | None = None, threads=1) -> MedianResult:
    """Epsilon-accurate geometric median of the rows of ``points``.

    Starts at the coordinate-wise mean and stops once
    ``f(y) <= (1 + epsilon) * lower`` for a certified lower bound on the
    optimum: the median lies in the convex hull of the points, so
    ``f* >= f(y) - |grad f(y)| * max_i |y - x_i|``. The gradient comes for
    free from the Weiszfeld weights. When the iterate closes in on a data
    point that satisfies the optimality condition, it jumps there.

    Every accepted step is checked for descent; a violation raises
    :class:`SolverError`. ``converged=False`` means ``max_iterations`` ran out.
    """
    cfg = cfg or SolverConfig()
    ps = points if isinstance(points, PointSet) else PointSet(points)
    eps, tol = cfg.epsilon, cfg.coincidence_tolerance

    y = ps.weighted_sum(np.full(ps.n, 1.0 / ps.n), threads)
    d = ps.distances(y, threads)
    f = float(np.sum(d))
    history = [f]
    converged = False
    last_step = np.inf
    k = 0
    for k in range(1, int(cfg.max_iterations) + 1):
        eta, w_total, s, r_norm = _unit_sum(ps, y, d, tol, threads)
        if w_total == 0.0:
            # every point coincides with y
            converged = True
            break
        grad = r_norm if eta == 0 else max(0.0, r_norm - eta)
        lower = f - grad * float(np.max(d))
        if grad == 0.0 or (lower > 0 and f - lower <= eps * lower):
            converged = True
            break

        j = int(np.argmin(d))
        if eta == 0 and d[j] < last_step:
            a = ps.row(j)
            d_a = ps.distances(a, threads)
            eta_a, _, _, r_a = _unit_sum(ps, a, d_a, tol, threads)
            if r_a <= eta_a:
                y, d, f = a, d_a, float(np.sum(d_a))
                history.append(f)
                converged = True
                log.debug("weiszfeld k=%d jumped to optimal data point %d", k, j)
                break

        T = s / w_total
        if eta:
            gamma = min(1.0, eta / r_norm)
            y_new = (1.0 - gamma) * T + gamma * y
        else:
            y_new = T
        d_new = ps.distances(y_new, threads)
        f_new = float(np.sum(d_new))
        step = float(np.linalg.norm(y_new - y))
        log.debug("weiszfeld k=%d f=%.17g step=%.3e gap<=%.3e", k, f_new, step, grad * float(np.max(d)))
        if f_new > f * (1.0 + _DESCENT_SLACK):
            raise SolverError(f"objective increased at iteration {k}: {f!r} -> {f_new!r}")
        if step == 0.0 or f_new == f:
            # no representable progress left
            converged = True
            break
        history.append(f_new)
        y, d, f = y_new, d_new, f_new
        last_step = step
    return MedianResult(y, f, k, converged, eps, tuple(history))
