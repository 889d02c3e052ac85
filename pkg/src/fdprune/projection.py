"""Top principal components by power iteration, for 2-D scatter exports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DataError
from .vectorizer import EmbeddingMatrix


@dataclass(frozen=True)
class Projection:
    components: np.ndarray   # (n_components, dim), unit rows
    variances: np.ndarray    # Rayleigh quotients, sample covariance scale
    coordinates: np.ndarray  # (N, n_components), mean-centered scores
    iterations: tuple[int, ...]


def _as_matrix(points):
    if isinstance(points, EmbeddingMatrix):
        points = points.matrix
    if sp.issparse(points):
        return sp.csr_matrix(points, dtype=np.float64)
    return np.atleast_2d(np.asarray(points, dtype=np.float64))


def principal_components(points, n_components=2, iterations=50, tol=1e-7) -> Projection:
    """Leading principal axes of the mean-centered rows of ``points``.

    The centered matrix is never formed: ``C v`` is evaluated as
    ``(X^T (X v - 1 mu.v) - mu * sum(...)) / (N - 1)``, so sparse inputs stay
    sparse. Each component runs up to ``iterations`` power steps, projected
    orthogonal to earlier components, and stops when the direction moves
    less than ``tol``. Signs are fixed so the largest-magnitude loading is
    positive.
    """
    X = _as_matrix(points)
    N, dim = X.shape
    if N < 2:
        raise DataError("projection needs at least 2 documents")
    n_components = min(n_components, dim)
    mu = np.asarray(X.sum(axis=0)).ravel() / N

    def cov(v):
        u = np.asarray(X @ v).ravel() - mu @ v
        return (np.asarray(X.T @ u).ravel() - mu * u.sum()) / (N - 1)

    sq = np.asarray((X.multiply(X) if sp.issparse(X) else X * X).sum(axis=0)).ravel() / N
    col_var = np.maximum(sq - mu * mu, 0.0)

    comps, lams, iters = [], [], []

    def deflate(v):
        for c in comps:
            v = v - (c @ v) * c
        return v

    for _ in range(n_components):
        v = deflate(col_var.copy())
        if np.linalg.norm(v) < 1e-12:
            # fall back to the highest-variance axis not yet spanned
            for j in np.argsort(-col_var, kind="stable"):
                e = np.zeros(dim)
                e[j] = 1.0
                v = deflate(e)
                if np.linalg.norm(v) > 1e-6:
                    break
        v = v / np.linalg.norm(v)
        it = 0
        for it in range(1, iterations + 1):
            w = deflate(cov(v))
            nrm = np.linalg.norm(w)
            if nrm == 0.0:
                break
            w /= nrm
            moved = min(np.linalg.norm(w - v), np.linalg.norm(w + v))
            v = w
            if moved < tol:
                break
        j = int(np.argmax(np.abs(v)))
        if v[j] < 0:
            v = -v
        comps.append(v)
        lams.append(float(v @ cov(v)))
        iters.append(it)

    V = np.array(comps)
    coords = np.asarray(X @ V.T) - mu @ V.T
    return Projection(V, np.array(lams), coords, tuple(iters))


def projection_csv(projection: Projection, kept_ids=()) -> str:
    kept = set(int(i) for i in kept_ids)
    lines = ["doc_id,pc1,pc2,kept"]
    coords = projection.coordinates
    for i in range(coords.shape[0]):
        pc2 = coords[i, 1] if coords.shape[1] > 1 else 0.0
        lines.append(f"{i},{float(coords[i, 0])!r},{float(pc2)!r},{int(i in kept)}")
    return "\n".join(lines) + "\n"
