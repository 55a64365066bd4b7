"""Normalized Laplacian, symmetric eigensolvers and spectrum diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph


class EigenConvergenceError(RuntimeError):
    def __init__(self, residual: float, sweeps: int):
        super().__init__(f"Jacobi did not converge after {sweeps} sweeps (off-diagonal norm {residual:.3e})")
        self.residual = residual
        self.sweeps = sweeps


def normalized_laplacian(graph: Graph) -> np.ndarray:
    """``L = I - D^{-1/2} A D^{-1/2}`` as a dense, exactly symmetric array.

    Raises ``ValueError`` if any node is isolated.
    """
    deg = graph.degrees()
    isolated = np.flatnonzero(deg == 0)
    if isolated.size:
        raise ValueError(f"node {int(isolated[0])} is isolated; normalized Laplacian undefined")
    inv_sqrt = 1.0 / np.sqrt(deg.astype(float))
    L = np.eye(graph.n) - inv_sqrt[:, None] * graph.adjacency() * inv_sqrt[None, :]
    return 0.5 * (L + L.T)


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with optional matching orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("spectrum must be a nonempty 1-d sequence")
        if np.any(np.diff(lam) < 0):
            raise ValueError("eigenvalues must be ascending")
        object.__setattr__(self, "eigenvalues", lam)
        if self.eigenvectors is not None:
            U = np.asarray(self.eigenvectors, dtype=float)
            if U.shape != (lam.size, lam.size):
                raise ValueError(f"eigenvector matrix has shape {U.shape}, expected {(lam.size, lam.size)}")
            object.__setattr__(self, "eigenvectors", U)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    def reconstruct(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise ValueError("spectrum was computed without eigenvectors")
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.T

    def scaled(self, lambda_max: float) -> "Spectrum":
        """Rescale eigenvalues so the largest equals ``lambda_max`` (vectors unchanged)."""
        if self.lambda_max <= 0:
            raise ValueError("cannot rescale a spectrum whose largest eigenvalue is 0")
        return Spectrum(self.eigenvalues * (lambda_max / self.lambda_max), self.eigenvectors)


def _fix_signs(U: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def _round_robin(m: int):
    """``m - 1`` rounds of ``m // 2`` disjoint pairs covering every pair once (``m`` even)."""
    players = list(range(m))
    for _ in range(m - 1):
        half = m // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        yield np.minimum(p, q), np.maximum(p, q)
        players = [players[0], players[-1]] + players[1:-1]


def jacobi_eigh(M: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
    """Cyclic Jacobi eigensolver with parallel (round-robin) ordering.

    Each round applies ``n/2`` disjoint plane rotations at once, so a sweep
    costs ``O(n^3)`` vectorized work. Odd sizes are padded with a decoupled
    row/column that no rotation touches. Converges when the off-diagonal
    Frobenius norm drops below ``tol * ||M||_F``.

    Returns ``(eigenvalues, eigenvectors)`` unsorted.
    """
    A = np.array(M, dtype=float)
    n = A.shape[0]
    m = n + (n % 2)
    if m != n:
        A = np.pad(A, ((0, 1), (0, 1)))
    V = np.eye(m)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), np.eye(n)
    rounds = list(_round_robin(m))

    def off_norm(B):
        off = B - np.diag(np.diag(B))
        return float(np.linalg.norm(off))

    sweeps = 0
    residual = off_norm(A)
    while residual > tol * scale:
        if sweeps >= max_sweeps:
            raise EigenConvergenceError(residual, sweeps)
        for p, q in rounds:
            apq = A[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            tau = (A[q, q] - A[p, p]) / (2.0 * apq)
            big = np.abs(tau) > 1e150
            tau_safe = np.where(big, 1.0, tau)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau_safe) + np.sqrt(1.0 + tau_safe * tau_safe))
            t = np.where(big, 0.5 / np.where(big, tau, 1.0), t)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # A <- J^T A J, V <- V J, rotations on disjoint (p, q) pairs commute
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = c * Ap - s * Aq
            A[:, q] = s * Ap + c * Aq
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[p, q] = 0.0
            A[q, p] = 0.0
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = c * Vp - s * Vq
            V[:, q] = s * Vp + c * Vq
        sweeps += 1
        residual = off_norm(A)
    return np.diag(A)[:n].copy(), V[:n, :n].copy()


def eigendecompose(
    L: np.ndarray,
    want_vectors: bool = True,
    method: str = "lapack",
    symmetry_tol: float = 1e-12,
) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"`` uses
    :func:`jacobi_eigh`. Eigenvalues are ascending; each eigenvector is
    signed so its largest-magnitude entry is positive.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {L.shape}")
    asym = np.max(np.abs(L - L.T)) if L.size else 0.0
    if asym > symmetry_tol:
        raise ValueError(f"matrix is not symmetric (max |L - L^T| = {asym:.3e})")
    if method == "lapack":
        if want_vectors:
            lam, U = np.linalg.eigh(L)
        else:
            lam, U = np.linalg.eigvalsh(L), None
    elif method == "jacobi":
        lam, U = jacobi_eigh(L)
        order = np.argsort(lam, kind="stable")
        lam, U = lam[order], U[:, order]
        if not want_vectors:
            U = None
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    if U is not None:
        U = _fix_signs(U)
    return Spectrum(np.sort(lam), U)


def graph_spectrum(graph: Graph, want_vectors: bool = False, method: str = "lapack") -> Spectrum:
    return eigendecompose(normalized_laplacian(graph), want_vectors=want_vectors, method=method)


def spectral_symmetry_defect(spectrum: Spectrum) -> float:
    """``max_i |lambda_i + lambda_{n+1-i} - lambda_max|``; zero iff the spectrum is
    closed under ``lambda -> lambda_max - lambda``."""
    lam = spectrum.eigenvalues
    return float(np.max(np.abs(lam + lam[::-1] - lam[-1])))


@dataclass(frozen=True)
class MultiplicityProfile:
    """Groups of (near-)equal eigenvalues. ``groups[k] = (representative, indices)``
    with 0-based indices into the ascending spectrum."""

    groups: tuple[tuple[float, np.ndarray], ...]
    tol: float

    @property
    def sizes(self) -> list[int]:
        return [len(idx) for _, idx in self.groups]

    @property
    def values(self) -> list[float]:
        return [v for v, _ in self.groups]

    def labels(self) -> np.ndarray:
        """Group ordinal of every eigenvalue index."""
        out = np.empty(sum(self.sizes), dtype=np.int64)
        for k, (_, idx) in enumerate(self.groups):
            out[idx] = k
        return out


def default_multiplicity_tol(lambda_max: float) -> float:
    return 1e-8 * max(1.0, abs(lambda_max))


def multiplicity_profile(spectrum: Spectrum | np.ndarray, tol: float | None = None) -> MultiplicityProfile:
    """Greedy grouping of consecutive ascending eigenvalues.

    A new group starts whenever an eigenvalue is more than ``tol`` above the
    first member of the current group, so members are pairwise within
    ``tol``. Default ``tol`` is ``1e-8 * max(1, lambda_max)``.
    """
    lam = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum, dtype=float)
    if np.any(np.diff(lam) < 0):
        raise ValueError("eigenvalues must be ascending")
    if tol is None:
        tol = default_multiplicity_tol(float(lam[-1]))
    groups = []
    start = 0
    for i in range(1, lam.size + 1):
        if i == lam.size or lam[i] - lam[start] > tol:
            idx = np.arange(start, i)
            groups.append((float(lam[idx].mean()), idx))
            start = i
    return MultiplicityProfile(tuple(groups), float(tol))
