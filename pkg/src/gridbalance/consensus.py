"""Best-constant consensus weights, distributed averaging and dynamic tracking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AveragingError, EigenConvergenceError, TopologyError
from .topology import Graph, is_connected, laplacian

__all__ = [
    "EigenResult",
    "WeightMatrix",
    "eigenvalues_symmetric",
    "best_constant_weights",
    "consensus_round",
    "run_averaging",
    "tracking_round",
    "default_max_rounds",
]

SYMMETRY_TOL = 1e-12
ZERO_EIG_REL = 1e-9


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    offdiag_residual: float


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Doubly stochastic mixing matrix ``W = I - alpha_bc * L``.

    Attributes:
        graph: Topology the weights live on; rounds only touch its edges.
        w: The ``n x n`` weight matrix.
        alpha_bc: Best constant used to build ``w``.
        rho: Contraction factor of ``w`` on the disagreement subspace.
    """

    graph: Graph
    w: np.ndarray
    alpha_bc: float
    rho: float

    @property
    def n(self) -> int:
        return self.graph.n


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def eigenvalues_symmetric(
    m: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100
) -> EigenResult:
    """All eigenvalues of a small symmetric matrix via cyclic Jacobi rotations.

    Each sweep zeroes every off-diagonal pair ``(p, q)`` once, in row order.
    Iteration stops when the Frobenius norm of the off-diagonal part drops to
    ``tol``.

    Raises:
        ValueError: ``m`` is not square and symmetric within 1e-12, or ``tol <= 0``.
        EigenConvergenceError: ``max_sweeps`` used up first.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a.size and np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2
    n = a.shape[0]

    residual = _offdiag_norm(a)
    sweeps = 0
    while residual > tol:
        if sweeps >= max_sweeps:
            raise EigenConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps", residual
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
        sweeps += 1
        residual = _offdiag_norm(a)

    return EigenResult(values=np.sort(np.diag(a)), offdiag_residual=residual)


def best_constant_weights(g: Graph) -> WeightMatrix:
    """Best-constant weights ``W = I - alpha L`` with ``alpha = 2/(lmax + l2)``."""
    if not is_connected(g):
        raise TopologyError("best-constant weights need a connected graph")
    if g.n == 1:
        return WeightMatrix(g, np.ones((1, 1)), 0.0, 0.0)

    lap = laplacian(g)
    values = eigenvalues_symmetric(lap).values
    lam_max = values[-1]
    nonzero = values[values > ZERO_EIG_REL * lam_max]
    if len(nonzero) != g.n - 1:
        raise TopologyError("Laplacian has a repeated zero eigenvalue; graph is disconnected")
    lam_2 = nonzero[0]
    alpha = 2.0 / (lam_max + lam_2)
    w = np.eye(g.n) - alpha * lap
    rho = float(max(abs(1.0 - alpha * lam) for lam in nonzero))
    return WeightMatrix(g, w, float(alpha), rho)


def _check_len(wm: WeightMatrix, vec: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(vec, dtype=float)
    if arr.shape != (wm.n,):
        raise ValueError(f"{name} must have length {wm.n}, got shape {arr.shape}")
    return arr


def consensus_round(wm: WeightMatrix, values: Sequence[float]) -> np.ndarray:
    """One synchronous mixing step; node ``i`` reads only itself and its neighbours."""
    v = _check_len(wm, values, "values")
    w = wm.w
    out = np.empty_like(v)
    for i, nbrs in enumerate(wm.graph.neighbors):
        acc = w[i, i] * v[i]
        for j in nbrs:
            acc += w[i, j] * v[j]
        out[i] = acc
    return out


def default_max_rounds(n: int) -> int:
    return max(500, 10 * n * n)


def run_averaging(
    wm: WeightMatrix,
    x0: Sequence[float],
    tol: float = 1e-9,
    max_rounds: int | None = None,
) -> tuple[np.ndarray, int]:
    """Iterate :func:`consensus_round` until every node holds the global mean.

    Stops once ``max|v_i - mean(x0)| <= tol * (1 + |mean(x0)|)``.

    Returns:
        The final estimates and the number of rounds used.

    Raises:
        AveragingError: ``max_rounds`` exhausted; carries the final disagreement.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = _check_len(wm, x0, "x0").copy()
    if max_rounds is None:
        max_rounds = default_max_rounds(wm.n)
    mean = float(np.mean(v))
    band = tol * (1.0 + abs(mean))
    rounds = 0
    while True:
        gap = float(np.max(np.abs(v - mean)))
        if gap <= band:
            return v, rounds
        if rounds >= max_rounds:
            raise AveragingError(
                f"averaging did not converge in {max_rounds} rounds (disagreement {gap:.3e})",
                disagreement=gap,
                rounds=rounds,
            )
        v = consensus_round(wm, v)
        rounds += 1


def tracking_round(
    wm: WeightMatrix, estimates: Sequence[float], deltas: Sequence[float]
) -> np.ndarray:
    """Dynamic average tracking step: mix neighbour estimates, then add own change."""
    d = _check_len(wm, deltas, "deltas")
    return consensus_round(wm, estimates) + d
