"""Closed-form generalisation error of linear spectral GNNs and its specializations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .filters import FilterSpec, GraphContext, NormalizedFilter, effective_spectrum, normalize_response
from .spectral import Spectrum, default_multiplicity_tol, multiplicity_profile

# relative cutoff below which a student eigenvalue counts as exactly zero
ZERO_TOL = 1e-12
# relative cutoff on singular values when forming the projector onto col(H)
PINV_RTOL = 1e-10
# relative tolerance for deciding that products inside a group are all equal
EQUAL_RTOL = 1e-9


def _as_spectrum_array(x, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative entries")
    return arr


def _check_c(c: float) -> float:
    c = float(c)
    if not (np.isfinite(c) and c > 0):
        raise ValueError(f"noise ratio c must be positive and finite, got {c}")
    return c


@dataclass(frozen=True)
class RiskProblem:
    """Student spectrum ``lambda_tilde``, teacher spectrum ``lambda_star``,
    prior weights ``weights`` and noise ratio ``c = n sigma^2 / n_train``."""

    lambda_tilde: np.ndarray
    lambda_star: np.ndarray
    weights: np.ndarray
    c: float

    def __post_init__(self):
        lt = _as_spectrum_array(self.lambda_tilde, "lambda_tilde")
        ls = _as_spectrum_array(self.lambda_star, "lambda_star")
        w = _as_spectrum_array(self.weights, "weights")
        if not (lt.size == ls.size == w.size):
            raise ValueError(f"length mismatch: {lt.size}, {ls.size}, {w.size}")
        object.__setattr__(self, "lambda_tilde", lt)
        object.__setattr__(self, "lambda_star", ls)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "c", _check_c(self.c))

    @classmethod
    def isotropic(cls, lambda_tilde, lambda_star, c) -> "RiskProblem":
        ls = np.asarray(lambda_star, dtype=float)
        return cls(lambda_tilde, ls, np.ones_like(ls), c)

    @property
    def d(self) -> int:
        return self.lambda_tilde.size

    @property
    def signal(self) -> np.ndarray:
        """``lambda_star * weights``, the teacher energy per eigendirection."""
        return self.lambda_star * self.weights


def risk_terms(lambda_tilde, signal, c) -> np.ndarray:
    """Per-eigendirection summands ``lt c/(lt+c) - (lt - s) c^2/(lt+c)^2``.

    Evaluated as the equivalent variance-plus-bias split
    ``(c lt^2 + c^2 s) / (lt + c)^2``, which has no cancellation.
    """
    lt = np.asarray(lambda_tilde, dtype=float)
    s = np.asarray(signal, dtype=float)
    den = lt + c
    return (c * lt * lt + c * c * s) / (den * den)


def risk_exact(p: RiskProblem) -> float:
    return float(np.sum(risk_terms(p.lambda_tilde, p.signal, p.c)))


def risk_isotropic(lambda_tilde, lambda_star, c) -> float:
    """Isotropic-prior risk with the misalignment term split off.

    Directions with ``lambda_tilde <= 1e-12 * max(lambda_tilde)`` contribute
    ``lambda_star`` exactly; the rest use the usual summand.
    """
    lt = _as_spectrum_array(lambda_tilde, "lambda_tilde")
    ls = _as_spectrum_array(lambda_star, "lambda_star")
    if lt.size != ls.size:
        raise ValueError(f"length mismatch: {lt.size} vs {ls.size}")
    c = _check_c(c)
    top = lt.max() if lt.size else 0.0
    zero = lt <= ZERO_TOL * top
    return float(np.sum(ls[zero]) + np.sum(risk_terms(lt[~zero], ls[~zero], c)))


# ---------------------------------------------------------------------------
# Misalignment
# ---------------------------------------------------------------------------


def _column_basis(H: np.ndarray) -> np.ndarray:
    if H.size == 0:
        return np.zeros((H.shape[0], 0))
    Q, s, _ = np.linalg.svd(H, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((H.shape[0], 0))
    return Q[:, s > PINV_RTOL * s[0]]


def misalignment(H, X) -> float:
    """``Tr((I - P_H) X X^T) = ||X - P_H X||_F^2`` with ``P_H`` the projector onto col(H)."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if H.shape[0] != X.shape[0]:
        raise ValueError(f"row mismatch: H has {H.shape[0]} rows, X has {X.shape[0]}")
    Q = _column_basis(H)
    resid = X - Q @ (Q.T @ X)
    return float(np.sum(resid * resid))


def normalized_misalignment(H, X) -> float:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    total = float(np.sum(X * X))
    if total == 0.0:
        raise ValueError("X is zero; normalized misalignment undefined")
    return min(1.0, max(0.0, misalignment(H, X) / total))


# ---------------------------------------------------------------------------
# Homophily-parameterised teacher
# ---------------------------------------------------------------------------

_LAM_SLACK = 1e-9


def homophily_spectrum(lam, q):
    """Teacher spectrum ``q - (2q - 1) lam / 2``; low-pass at ``q=1``, high-pass at ``q=0``."""
    lam = np.asarray(lam, dtype=float)
    q = float(q)
    if not (0.0 <= q <= 1.0):
        raise ValueError(f"q must lie in [0, 1], got {q}")
    if np.any(lam < -_LAM_SLACK) or np.any(lam > 2.0 + _LAM_SLACK):
        raise ValueError("eigenvalues must lie in [0, 2]")
    return np.clip(q - (2.0 * q - 1.0) * lam / 2.0, 0.0, None)


@dataclass
class SweepResult:
    """Rows of ``parameter`` values against per-model columns."""

    parameter: str
    values: np.ndarray
    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    @property
    def models(self) -> list[str]:
        return list(self.columns)

    def column(self, name: str) -> np.ndarray:
        return self.columns[name]


def _eigenvalues(spectrum) -> np.ndarray:
    if isinstance(spectrum, Spectrum):
        return spectrum.eigenvalues
    return np.asarray(spectrum, dtype=float)


def homophily_risk_curve(filt: FilterSpec | NormalizedFilter, eigenvalues, q_grid, c, ctx: GraphContext) -> np.ndarray:
    """Per-eigenvalue average risk of one filter at each ``q`` of ``q_grid``.

    The response is normalized to peak 1 on ``eigenvalues`` unless a
    :class:`NormalizedFilter` is passed in.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if not isinstance(filt, NormalizedFilter):
        filt = normalize_response(filt, ctx, lam)
    out = np.empty(len(q_grid))
    for k, q in enumerate(q_grid):
        f = homophily_spectrum(lam, q)
        lt = effective_spectrum(filt, lam, lambda x, q=q: homophily_spectrum(x, q), ctx, require_zero_at_origin=False)
        out[k] = risk_isotropic(lt, f, c) / lam.size
    return out


def risk_homophily_sweep(
    specs: FilterSpec | Sequence[FilterSpec],
    spectrum,
    q_grid,
    c: float,
    ctx: GraphContext | None = None,
) -> SweepResult:
    """Average risk over ``q_grid`` for each filter, with teacher ``lambda_star = f``
    given by :func:`homophily_spectrum` and student ``(g_norm^2)^layers * f``."""
    if isinstance(specs, FilterSpec):
        specs = [specs]
    lam = _eigenvalues(spectrum)
    q_grid = np.asarray(q_grid, dtype=float)
    if q_grid.size == 0:
        raise ValueError("q_grid is empty")
    if ctx is None:
        ctx = GraphContext.from_spectrum(lam)
    columns = {s.name: homophily_risk_curve(s, lam, q_grid, c, ctx) for s in specs}
    meta = {
        "c": float(c),
        "n_eigenvalues": int(lam.size),
        "lambda_max": float(lam.max()),
        "mean_degree": ctx.mean_degree,
        "models": {s.name: s.describe() for s in specs},
    }
    return SweepResult("q", q_grid, columns, meta)


def risk_derivative_q(lam, q, c):
    """Closed-form ``dR/dq`` of one eigenvalue's isotropic risk term for the
    normalized GCN filter ``1 - lam/2`` under the homophily teacher."""
    a = np.asarray(lam, dtype=float) / 2.0
    q = np.asarray(q, dtype=float)
    c = np.asarray(c, dtype=float)
    num = (
        (-1.0 + 2.0 * a)
        * c**2
        * (
            -c
            + a**2 * (6.0 - 23.0 * q)
            + a**4 * (8.0 - 18.0 * q)
            - q
            + a**5 * (-2.0 + 4.0 * q)
            + a * (-1.0 + 8.0 * q)
            + a**3 * (-11.0 + 30.0 * q)
        )
    )
    den = a + c + a**3 * (1.0 - 2.0 * q) + q - 4.0 * a * q + a**2 * (-2.0 + 5.0 * q)
    if np.any(den <= 0):
        raise ValueError("derivative denominator is nonpositive")
    out = num / den**3
    return float(out) if out.ndim == 0 else out


def summed_derivative_q(eigenvalues, q, c) -> float:
    return float(np.sum(risk_derivative_q(np.asarray(eigenvalues, dtype=float), q, c)))


def symmetric_pair_derivative_sum(a, q, c, lambda_max: float = 2.0):
    """``dR/dq`` at ``a`` plus its mirror partner ``lambda_max/2 - a``, in
    ``a = lam/2`` units (the partner is ``1 - a`` for ``lambda_max = 2``)."""
    a = np.asarray(a, dtype=float)
    partner = lambda_max / 2.0 - a
    return risk_derivative_q(2.0 * a, q, c) + risk_derivative_q(2.0 * partner, q, c)


def symmetric_pair_derivative_sign(a, q, c, lambda_max: float = 2.0):
    out = np.sign(symmetric_pair_derivative_sum(a, q, c, lambda_max))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# GAT vs Specformer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenGroup:
    """A set of eigendirections sharing the teacher eigenvalue ``lambda_star``.

    ``indices`` (optional) place the members in the overall spectrum; without
    them groups are laid out in the order given.
    """

    lambda_star: float
    weights: tuple[float, ...]
    indices: tuple[int, ...] | None = None

    def __post_init__(self):
        w = tuple(float(x) for x in np.atleast_1d(self.weights))
        if len(w) == 0:
            raise ValueError("empty eigen group")
        if any(x < 0 or not np.isfinite(x) for x in w):
            raise ValueError("group weights must be finite and nonnegative")
        if not (np.isfinite(self.lambda_star) and self.lambda_star >= 0):
            raise ValueError("lambda_star must be finite and nonnegative")
        object.__setattr__(self, "weights", w)
        if self.indices is not None:
            idx = tuple(int(i) for i in self.indices)
            if len(idx) != len(w):
                raise ValueError("indices and weights differ in length")
            object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def products(self) -> np.ndarray:
        """``lambda_star * w_j`` for each member."""
        return float(self.lambda_star) * np.asarray(self.weights)

    def is_uniform(self, rtol: float = EQUAL_RTOL) -> bool:
        p = self.products
        return bool(p.max() - p.min() <= rtol * max(abs(p).max(), np.finfo(float).tiny))


def _layout(groups: Sequence[EigenGroup]) -> list[np.ndarray]:
    total = sum(g.size for g in groups)
    if all(g.indices is None for g in groups):
        out, start = [], 0
        for g in groups:
            out.append(np.arange(start, start + g.size))
            start += g.size
        return out
    if any(g.indices is None for g in groups):
        raise ValueError("either all groups or none must carry indices")
    out = [np.asarray(g.indices) for g in groups]
    flat = np.sort(np.concatenate(out))
    if not np.array_equal(flat, np.arange(total)):
        raise ValueError("group indices do not partition 0..d-1")
    return out


def gat_optimal_spectrum(groups: Sequence[EigenGroup], c: float) -> np.ndarray:
    """GAT-optimal student spectrum: the group mean of ``lambda_star * w`` on every member."""
    _check_c(c)
    if len(groups) == 0:
        raise ValueError("no groups given")
    layout = _layout(groups)
    out = np.empty(sum(g.size for g in groups))
    for g, idx in zip(groups, layout):
        out[idx] = g.products.mean()
    return out


def specformer_optimal_spectrum(groups: Sequence[EigenGroup], c: float) -> np.ndarray:
    _check_c(c)
    layout = _layout(groups)
    out = np.empty(sum(g.size for g in groups))
    for g, idx in zip(groups, layout):
        out[idx] = g.products
    return out


def gat_gap_contributions(groups: Sequence[EigenGroup], c: float) -> np.ndarray:
    """Per-group excess risk of GAT over Specformer (zero for singletons and uniform groups)."""
    c = _check_c(c)
    out = np.zeros(len(groups))
    for k, g in enumerate(groups):
        if g.size < 2 or g.is_uniform():
            continue
        p = g.products
        gat = p.sum() * c / (p.mean() + c)
        sf = np.sum(p * c / (p + c))
        out[k] = max(0.0, gat - sf)
    return out


def gat_specformer_gap(groups: Sequence[EigenGroup], c: float) -> float:
    return float(np.sum(gat_gap_contributions(groups, c)))


def groups_from_spectrum(
    eigenvalues,
    weights,
    lambda_star=None,
    tol: float | None = None,
) -> list[EigenGroup]:
    """Group eigendirections by repeated Laplacian eigenvalue.

    ``lambda_star`` defaults to the eigenvalues themselves; when given it must be
    constant within each multiplicity group (its group mean is used).
    """
    lam = _eigenvalues(eigenvalues)
    w = np.asarray(weights, dtype=float)
    if w.shape != lam.shape:
        raise ValueError(f"{w.size} weights for {lam.size} eigenvalues")
    ls = lam if lambda_star is None else np.asarray(lambda_star, dtype=float)
    if ls.shape != lam.shape:
        raise ValueError("lambda_star length differs from eigenvalue count")
    if tol is None:
        tol = default_multiplicity_tol(float(lam.max()))
    prof = multiplicity_profile(lam, tol)
    return [EigenGroup(float(np.clip(ls[idx].mean(), 0.0, None)), tuple(w[idx]), tuple(idx)) for _, idx in prof.groups]


# ---------------------------------------------------------------------------
# Power-law spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLawProfile:
    """``lambda_star_i = i^-a`` and ``lambda_star_i w_i = i^-b`` for ``i = 1..d``."""

    a: float
    b: float
    d: int
    c: float

    def __post_init__(self):
        if not self.a > 1:
            raise ValueError(f"a must exceed 1, got {self.a}")
        if not self.b > 1:
            raise ValueError(f"b must exceed 1, got {self.b}")
        if not self.b < 1 + 2 * self.a:
            raise ValueError(f"b must be below 1 + 2a = {1 + 2 * self.a}, got {self.b}")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        _check_c(self.c)

    def index(self) -> np.ndarray:
        return np.arange(1, self.d + 1, dtype=float)

    def problem(self, model: str) -> RiskProblem:
        """The underlying :class:`RiskProblem`; the GNN filter matches ``lambda_tilde`` to the signal."""
        i = self.index()
        ls = i ** -self.a
        w = i ** (self.a - self.b)
        if model == "gnn":
            lt = i ** -self.b
        elif model == "mlp":
            lt = ls
        else:
            raise ValueError(f"model must be 'gnn' or 'mlp', got {model!r}")
        return RiskProblem(lt, ls, w, self.c)


def powerlaw_exponent(a: float, b: float, model: str, c: float = 0.5) -> float:
    """Exponent ``e`` of the dominant small-noise scaling ``R ~ c^e``.

    The MLP rate is ``max{c^((a-1)/a), c^((b-1)/a)}``; for ``c < 1`` the larger
    power of ``c`` is the one with the smaller exponent (and vice versa).
    """
    if model == "gnn":
        return (b - 1.0) / b
    if model == "mlp":
        e1, e2 = (a - 1.0) / a, (b - 1.0) / a
        return min(e1, e2) if c < 1 else max(e1, e2)
    raise ValueError(f"model must be 'gnn' or 'mlp', got {model!r}")


def powerlaw_risk(profile: PowerLawProfile, model: str, mode: str = "exact_sum") -> float:
    """Exact finite sum of the risk, or (``mode="asymptotic"``) the small-``c``
    scaling exponent ``R ~ c^exponent``."""
    model = model.lower()
    if mode == "asymptotic":
        return powerlaw_exponent(profile.a, profile.b, model, profile.c)
    if mode != "exact_sum":
        raise ValueError(f"mode must be 'exact_sum' or 'asymptotic', got {mode!r}")
    i, c = profile.index(), profile.c
    sb = i ** -profile.b
    if model == "gnn":
        return float(np.sum(sb * c / (sb + c)))
    if model == "mlp":
        sa = i ** -profile.a
        den = (sa + c) ** 2
        return float(np.sum(sa * c / (sa + c)) - np.sum(sa * c * c / den) + np.sum(sb * c * c / den))
    raise ValueError(f"model must be 'gnn' or 'mlp', got {model!r}")


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points for a slope")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
