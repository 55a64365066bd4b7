"""Monte Carlo fixed-design simulator and brute-force optimizers.

These routines recompute every closed form in :mod:`gnn_risk.risk` from
first principles (sampled teachers, noise and train splits, or direct
numerical minimization), so they serve as independent test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_BATCH = 4096


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix via sign-corrected QR."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


@dataclass(frozen=True)
class SyntheticDesign:
    """Fixed design ``X = U_d diag(sqrt(lambda_star)) R`` and
    ``H = U_d diag(sqrt(lambda_tilde)) R``.

    ``U_d`` holds the first ``d`` columns of the orthonormal ``U`` and ``R``
    is an orthogonal ``d x d`` frame (identity by default), so that the
    frame ``Phi^T = [R; 0]`` satisfies ``Phi^T Phi`` block-identity. The
    teacher ``theta* = R^T xi`` with ``xi_i ~ N(0, w_i)``; ``weights=None``
    means the isotropic prior ``w = 1``.
    """

    U: np.ndarray
    lambda_star: np.ndarray
    lambda_tilde: np.ndarray
    sigma2: float
    n_train: int
    weights: np.ndarray | None = None
    frame: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        U = np.asarray(self.U, dtype=float)
        n = U.shape[0]
        if U.shape != (n, n) or not np.allclose(U.T @ U, np.eye(n), atol=1e-10):
            raise ValueError("U must be an orthonormal square matrix")
        ls = np.asarray(self.lambda_star, dtype=float)
        lt = np.asarray(self.lambda_tilde, dtype=float)
        d = ls.size
        if lt.size != d or d > n or d < 1:
            raise ValueError(f"spectra of lengths {ls.size}, {lt.size} incompatible with n={n}")
        if np.any(ls < 0) or np.any(lt < 0):
            raise ValueError("spectra must be nonnegative")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if not (1 <= self.n_train <= n):
            raise ValueError(f"n_train must lie in [1, {n}], got {self.n_train}")
        w = None if self.weights is None else np.asarray(self.weights, dtype=float)
        if w is not None and (w.size != d or np.any(w < 0)):
            raise ValueError("weights must be nonnegative with one entry per direction")
        R = np.eye(d) if self.frame is None else np.asarray(self.frame, dtype=float)
        if R.shape != (d, d) or not np.allclose(R.T @ R, np.eye(d), atol=1e-10):
            raise ValueError("frame must be an orthogonal d x d matrix")
        for name, val in (("U", U), ("lambda_star", ls), ("lambda_tilde", lt), ("weights", w), ("frame", R)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def d(self) -> int:
        return self.lambda_star.size

    @property
    def c(self) -> float:
        return self.n * self.sigma2 / self.n_train

    @property
    def prior_weights(self) -> np.ndarray:
        return np.ones(self.d) if self.weights is None else self.weights

    @property
    def X(self) -> np.ndarray:
        return (self.U[:, : self.d] * np.sqrt(self.lambda_star)) @ self.frame

    @property
    def H(self) -> np.ndarray:
        return (self.U[:, : self.d] * np.sqrt(self.lambda_tilde)) @ self.frame

    def phi(self) -> np.ndarray:
        """The ``n x d`` frame-transpose ``[R; 0]``, padded with zero rows."""
        return np.vstack([self.frame, np.zeros((self.n - self.d, self.d))])


@dataclass(frozen=True)
class OracleEstimate:
    mean_risk: float
    std_error: float
    trials: int

    def z_score(self, closed_form: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.mean_risk == closed_form else float(np.copysign(np.inf, self.mean_risk - closed_form))
        return (self.mean_risk - closed_form) / self.std_error


def _train_masks(rng, batch: int, n: int, n_train: int) -> np.ndarray:
    # uniform n_train-subsets: ranks of iid uniforms
    keys = rng.random((batch, n))
    ranks = np.argsort(np.argsort(keys, axis=1), axis=1)
    return ranks < n_train


def _batch_risks(design: SyntheticDesign, rng, batch: int, mode: str, solve_dual) -> np.ndarray:
    n, d = design.n, design.d
    X, H = design.X, design.H
    xi = rng.standard_normal((batch, d)) * np.sqrt(design.prior_weights)
    theta = xi @ design.frame
    eps = rng.standard_normal((batch, n)) * np.sqrt(design.sigma2)
    mask = _train_masks(rng, batch, n, design.n_train)
    signal = theta @ X.T
    if mode == "dual":
        eps_train = (n / design.n_train) * mask * eps
        theta_hat = solve_dual(signal + eps_train) @ H
    else:
        y_train = (signal + eps) * mask
        Ht = mask[:, :, None] * H[None, :, :]
        gram = np.einsum("bij,bik->bjk", Ht, Ht) + design.sigma2 * np.eye(d)
        rhs = np.einsum("bij,bi->bj", Ht, y_train)
        theta_hat = np.linalg.solve(gram, rhs[:, :, None])[:, :, 0]
    resid = theta_hat @ H.T - signal
    return np.sum(resid * resid, axis=1)


def simulate_trials(
    design: SyntheticDesign,
    trials: int,
    rng_seed: int,
    mode: str = "dual",
    batch_size: int = DEFAULT_BATCH,
) -> np.ndarray:
    """Per-trial test errors ``sum_i ((H theta_hat)_i - (X theta*)_i)^2`` over all nodes.

    Batch ``b`` draws from ``default_rng([rng_seed, b])`` so results depend on
    ``(rng_seed, trials, batch_size, design)`` only.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if mode not in ("dual", "primal"):
        raise ValueError(f"mode must be 'dual' or 'primal', got {mode!r}")
    H = design.H
    K = H @ H.T + design.c * np.eye(design.n)
    K_inv = np.linalg.inv(K)  # (HH^T + cI)^{-1}, symmetric, fixed across trials

    def solve_dual(rhs):
        return rhs @ K_inv

    out = np.empty(trials)
    start = 0
    b = 0
    while start < trials:
        size = min(batch_size, trials - start)
        rng = np.random.default_rng([rng_seed, b])
        out[start : start + size] = _batch_risks(design, rng, size, mode, solve_dual)
        start += size
        b += 1
    return out


def simulate_risk(
    design: SyntheticDesign,
    trials: int,
    rng_seed: int,
    mode: str = "dual",
    batch_size: int = DEFAULT_BATCH,
) -> OracleEstimate:
    """Monte Carlo estimate of the expected test error.

    ``mode="dual"`` uses ``theta_hat = H^T (HH^T + cI)^{-1} (X theta* + eps_train)``
    with ``eps_train = (n / n_train) I_train eps``; ``mode="primal"`` fits
    ridge regression on the training rows,
    ``(H_tr^T H_tr + sigma2 I)^{-1} H_tr^T y_tr``.
    """
    r = simulate_trials(design, trials, rng_seed, mode, batch_size)
    std = float(np.std(r, ddof=1) / np.sqrt(trials)) if trials > 1 else float("inf")
    return OracleEstimate(float(np.mean(r)), std, trials)


def train_gram_gap(design: SyntheticDesign, trials: int, rng_seed: int) -> float:
    """Max entrywise gap between the trial average of ``H_tr^T H_tr / n_train``
    and ``H^T H / n`` under uniform splits."""
    H = design.H
    rng = np.random.default_rng(rng_seed)
    mask = _train_masks(rng, trials, design.n, design.n_train).astype(float)
    # average of H^T diag(m) H over trials = H^T diag(mean m) H
    avg = (H.T * mask.mean(axis=0)) @ H / design.n_train
    return float(np.max(np.abs(avg - H.T @ H / design.n)))


# ---------------------------------------------------------------------------
# Random problem battery
# ---------------------------------------------------------------------------


def _open_closed(rng, size, high=3.0):
    # uniform on (0, high]
    return high - rng.uniform(0.0, high, size)


def random_design(rng: np.random.Generator, max_n: int = 16, max_d: int = 12, random_frame: bool = False) -> SyntheticDesign:
    """Random design with ``n <= max_n``, ``d <= max_d`` and ``lambda_star``,
    ``lambda_tilde``, ``w``, ``c`` in ``(0, 3]``."""
    n = int(rng.integers(2, max_n + 1))
    d = int(rng.integers(1, min(max_d, n) + 1))
    ls = _open_closed(rng, d)
    lt = _open_closed(rng, d)
    w = _open_closed(rng, d)
    c = float(_open_closed(rng, None))
    n_train = int(rng.integers(1, n + 1))
    U = random_orthogonal(n, rng)
    R = random_orthogonal(d, rng) if random_frame else None
    return SyntheticDesign(U, ls, lt, c * n_train / n, n_train, w, R)


def random_battery(count: int, seed: int, **kwargs) -> list[SyntheticDesign]:
    rng = np.random.default_rng(seed)
    return [random_design(rng, **kwargs) for _ in range(count)]


# ---------------------------------------------------------------------------
# Direct minimization
# ---------------------------------------------------------------------------

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _summand(lt, s, c):
    return lt * c / (lt + c) - (lt - s) * c**2 / (lt + c) ** 2


def _golden_section(fun, lo, hi, tol=1e-12, max_iter=200):
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fun(x2)
    x = 0.5 * (a + b)
    return x, fun(x)


@dataclass(frozen=True)
class GroupOptimum:
    lambda_tilde: np.ndarray
    risk: float


def brute_force_group_optimum(
    lambda_star_w,
    group_partition: Sequence[Sequence[int]],
    c: float,
    grid_resolution: int = 200,
    mode: str = "gat",
) -> GroupOptimum:
    """Minimize the risk over student spectra that are constant on each group
    (``mode="gat"``) or free per index (``mode="free"``).

    Each one-dimensional problem is scanned on a uniform grid over
    ``[0, 2 max(lambda_star_w)]`` and refined by golden-section search in the
    bracket around the best grid point.
    """
    if grid_resolution < 100:
        raise ValueError("grid_resolution must be >= 100")
    if mode not in ("gat", "free"):
        raise ValueError(f"mode must be 'gat' or 'free', got {mode!r}")
    p = np.asarray(lambda_star_w, dtype=float)
    groups = [np.asarray(g, dtype=int) for g in group_partition]
    if mode == "free":
        groups = [np.array([i]) for g in groups for i in g]
    hi = 2.0 * p.max() if p.size and p.max() > 0 else 1.0
    grid = np.linspace(0.0, hi, grid_resolution + 1)
    lt = np.empty_like(p)
    total = 0.0
    for g in groups:
        members = p[g]

        def obj(x, members=members):
            return float(np.sum(_summand(x, members, c)))

        vals = np.array([np.sum(_summand(x, members, c)) for x in grid])
        k = int(np.argmin(vals))
        x, fx = _golden_section(obj, grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)])
        if vals[k] < fx:
            x, fx = grid[k], float(vals[k])
        lt[g] = x
        total += fx
    return GroupOptimum(lt, total)


def brute_force_gap(lambda_star_w, group_partition, c: float, grid_resolution: int = 200) -> float:
    gat = brute_force_group_optimum(lambda_star_w, group_partition, c, grid_resolution, "gat")
    free = brute_force_group_optimum(lambda_star_w, group_partition, c, grid_resolution, "free")
    return gat.risk - free.risk


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------


def finite_difference_derivative(lam: float, q: float, c: float, step: float = 1e-6) -> float:
    """Central difference in ``q`` of one eigenvalue's isotropic risk term for
    the normalized GCN filter, falling back to a one-sided difference at the
    ends of ``[0, 1]``."""
    if step <= 0:
        raise ValueError("step must be positive")

    def term(qq):
        h = qq - (2.0 * qq - 1.0) * lam / 2.0
        lt = (1.0 - lam / 2.0) ** 2 * h
        return lt * c / (lt + c) - (lt - h) * c**2 / (lt + c) ** 2

    lo, hi = q - step, q + step
    if lo < 0.0:
        return (term(q + step) - term(q)) / step
    if hi > 1.0:
        return (term(q) - term(q - step)) / step
    return (term(hi) - term(lo)) / (2.0 * step)
