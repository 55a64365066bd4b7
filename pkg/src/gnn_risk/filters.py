"""Frequency responses of linear GNN convolutions.

Every architecture maps a Laplacian eigenvalue ``lam`` to one or more
per-support responses ``g_j(lam)``. The risk formulas only see the combined
quantity ``g2 = sum_j g_j**2`` (the spectrum of ``S S^T``), raised to the
number of layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

ARCHITECTURES = (
    "mlp",
    "gcn",
    "gin",
    "ppnp",
    "gprgnn",
    "highpass",
    "highlow",
    "fagcn",
    "graphsage",
    "cayleynet",
    "chebnet",
    "chebnet2",
)

MULTI_SUPPORT = frozenset({"highlow", "graphsage", "cayleynet", "chebnet", "chebnet2"})

_ALIASES = {
    "gpr-gnn": "gprgnn",
    "gpr": "gprgnn",
    "high-low": "highlow",
    "highlowconcat": "highlow",
    "sage": "graphsage",
    "cayley": "cayleynet",
    "chebnetii": "chebnet2",
    "chebnet-ii": "chebnet2",
    "chebnet/s": "chebnet2",
}

# value domain check on lam, absorbs eigensolver round-off at the interval ends
_DOMAIN_SLACK = 1e-9


@dataclass(frozen=True)
class GraphContext:
    """Graph-level quantities some responses depend on."""

    mean_degree: float = 4.0
    lambda_max: float = 2.0

    def __post_init__(self):
        if not self.mean_degree > 0:
            raise ValueError(f"mean_degree must be positive, got {self.mean_degree}")
        if not (0 < self.lambda_max <= 2 + _DOMAIN_SLACK):
            raise ValueError(f"lambda_max must lie in (0, 2], got {self.lambda_max}")

    @classmethod
    def from_spectrum(cls, eigenvalues, mean_degree: float = 4.0) -> "GraphContext":
        lam_max = float(np.max(eigenvalues))
        return cls(mean_degree=mean_degree, lambda_max=min(lam_max, 2.0))


@dataclass(frozen=True)
class FilterSpec:
    """An architecture plus its hyperparameters.

    Parameters that an architecture does not use are ignored. ``K`` is the
    number of Chebyshev supports for ChebNet/ChebNetII (default 3) and the
    polynomial order for GPR-GNN when ``gammas`` is not given (default 10,
    with ``gammas[k] = alpha * (1 - alpha)**k``). ``r_max`` is the number of
    rotation orders in CayleyNet.
    """

    architecture: str
    layers: int = 1
    alpha: float = 0.2
    eps: float = 0.0
    K: int | None = None
    gammas: tuple[float, ...] | None = None
    h: float = 1.0
    r_max: int = 1
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        arch = _ALIASES.get(self.architecture.lower(), self.architecture.lower())
        if arch not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}; available: {', '.join(ARCHITECTURES)}")
        object.__setattr__(self, "architecture", arch)
        if self.K is None:
            object.__setattr__(self, "K", 10 if arch == "gprgnn" else 3)
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if arch == "ppnp" and not (0 < self.alpha <= 1):
            raise ValueError(f"PPNP alpha must lie in (0, 1], got {self.alpha}")
        if arch in ("chebnet", "chebnet2") and self.K < 1:
            raise ValueError("ChebNet K must be >= 1")
        if arch == "cayleynet":
            if self.h <= 0:
                raise ValueError("CayleyNet h must be positive")
            if self.r_max < 1:
                raise ValueError("CayleyNet r_max must be >= 1")
        if arch == "gprgnn" and self.gammas is None and self.K < 0:
            raise ValueError("GPR-GNN order K must be >= 0")
        if self.gammas is not None:
            object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))

    @property
    def name(self) -> str:
        return self.label or self.architecture

    @property
    def is_multi_support(self) -> bool:
        return self.architecture in MULTI_SUPPORT

    def gpr_coefficients(self) -> np.ndarray:
        if self.gammas is not None:
            return np.asarray(self.gammas)
        return self.alpha * (1.0 - self.alpha) ** np.arange(self.K + 1)

    @classmethod
    def parse(cls, text: str) -> "FilterSpec":
        """Parse ``name[:key=value[:key=value...]]``, e.g. ``chebnet:K=6`` or
        ``gprgnn:gammas=0.5/0.3/0.2``. The original text becomes the label."""
        name, *opts = text.strip().split(":")
        kwargs: dict = {}
        for opt in opts:
            if "=" not in opt:
                raise ValueError(f"bad filter option {opt!r} in {text!r} (expected key=value)")
            key, val = opt.split("=", 1)
            key = {"k": "K", "l": "layers", "epsilon": "eps", "gamma": "gammas", "r": "r_max"}.get(key, key)
            if key in ("K", "layers", "r_max"):
                kwargs[key] = int(val)
            elif key in ("alpha", "eps", "h"):
                kwargs[key] = float(val)
            elif key == "gammas":
                kwargs[key] = tuple(float(v) for v in val.split("/"))
            else:
                raise ValueError(f"unknown filter option {key!r} in {text!r}")
        return cls(name, label=text.strip(), **kwargs)

    def describe(self) -> dict:
        """JSON-friendly record of the parameters that matter for this architecture."""
        arch = self.architecture
        out: dict = {"architecture": arch, "layers": self.layers}
        if arch in ("ppnp", "fagcn"):
            out["alpha"] = self.alpha
        if arch in ("gin", "fagcn"):
            out["eps"] = self.eps
        if arch in ("chebnet", "chebnet2"):
            out["K"] = self.K
        if arch == "gprgnn":
            out["gammas"] = [float(g) for g in self.gpr_coefficients()]
            if self.gammas is None:
                out["alpha"] = self.alpha
                out["K"] = self.K
        if arch == "cayleynet":
            out["h"] = self.h
            out["r_max"] = self.r_max
        return out


class Response(NamedTuple):
    """Per-support responses ``supports[j]`` and their combined square ``g2``."""

    supports: np.ndarray
    g2: np.ndarray


def _propagation(lam, mean_degree):
    # approximately-regular response of (D+I)^{-1/2}(A+I)(D+I)^{-1/2}
    return 1.0 - lam * mean_degree / (mean_degree + 1.0)


def _chebyshev_supports(lam, K, lambda_max, divide):
    x = 2.0 * lam / lambda_max - 1.0
    g = [np.ones_like(lam), x]
    for s in range(3, K + 1):
        nxt = 2.0 * x * g[-1] - g[-2]
        g.append(nxt / s if divide else nxt)
    return g[:K]


def cayley_angle(x):
    """``arg((x - i) / (x + i))``."""
    return np.angle((x - 1j) / (x + 1j))


def _supports(spec: FilterSpec, lam: np.ndarray, ctx: GraphContext) -> list[np.ndarray]:
    arch = spec.architecture
    p = ctx.mean_degree
    if arch == "mlp":
        return [np.ones_like(lam)]
    if arch == "gcn":
        return [2.0 * (1.0 - lam / 2.0)]
    if arch == "highpass":
        return [lam.copy()]
    if arch == "gin":
        return [p * ((1.0 + spec.eps) / p + 1.0 - lam)]
    if arch == "ppnp":
        denom = 1.0 - (1.0 - spec.alpha) * _propagation(lam, p)
        if np.any(denom <= 0):
            raise ValueError("PPNP response denominator is nonpositive")
        return [spec.alpha / denom]
    if arch == "gprgnn":
        base = _propagation(lam, p)
        gammas = spec.gpr_coefficients()
        return [sum(gk * base**k for k, gk in enumerate(gammas))]
    if arch == "fagcn":
        a, e = spec.alpha, spec.eps
        return [a * ((1.0 + e) - lam) + (1.0 - a) * ((e - 1.0) + lam)]
    if arch == "highlow":
        return [1.0 - lam / 2.0, lam / 2.0]
    if arch == "graphsage":
        return [np.ones_like(lam), 1.0 - lam]
    if arch == "cayleynet":
        theta = cayley_angle(spec.h * lam)
        out = [np.ones_like(lam)]
        for r in range(1, spec.r_max + 1):
            out.append(np.cos(r * theta))
            out.append(-np.sin(r * theta))
        return out
    if arch == "chebnet":
        return _chebyshev_supports(lam, spec.K, ctx.lambda_max, divide=False)
    if arch == "chebnet2":
        return _chebyshev_supports(lam, spec.K, ctx.lambda_max, divide=True)
    raise AssertionError(arch)


def response(spec: FilterSpec, lam, ctx: GraphContext = GraphContext()) -> Response:
    """Frequency response of ``spec`` at eigenvalue(s) ``lam`` in ``[0, lambda_max]``.

    ``supports`` has shape ``(m,) + np.shape(lam)``; single-support
    architectures have ``m = 1``.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < -_DOMAIN_SLACK) or np.any(lam > ctx.lambda_max + _DOMAIN_SLACK):
        raise ValueError(f"eigenvalue outside [0, {ctx.lambda_max}]")
    sup = np.stack(_supports(spec, lam, ctx))
    return Response(sup, np.sum(sup * sup, axis=0))


@dataclass(frozen=True)
class NormalizedFilter:
    """A filter rescaled so its combined magnitude ``sqrt(g2)`` peaks at 1 on a grid."""

    spec: FilterSpec
    ctx: GraphContext
    scale: float

    @property
    def name(self) -> str:
        return self.spec.name

    def __call__(self, lam) -> Response:
        r = response(self.spec, lam, self.ctx)
        return Response(r.supports * self.scale, r.g2 * self.scale**2)

    def signed(self, lam) -> np.ndarray:
        """Normalized ``g`` for single-support filters, normalized ``sqrt(g2)`` otherwise."""
        r = self(lam)
        if r.supports.shape[0] == 1:
            return r.supports[0]
        return np.sqrt(r.g2)


def normalize_response(spec: FilterSpec, ctx: GraphContext, grid) -> NormalizedFilter:
    grid = np.asarray(grid, dtype=float)
    peak = float(np.max(response(spec, grid, ctx).g2))
    if peak <= 0:
        raise ValueError(f"{spec.name} response vanishes on the whole grid")
    return NormalizedFilter(spec, ctx, 1.0 / np.sqrt(peak))


def _combined(filt, lam, ctx):
    if isinstance(filt, NormalizedFilter):
        return filt(lam).g2
    return response(filt, lam, ctx).g2


def effective_spectrum(
    filt: FilterSpec | NormalizedFilter,
    eigenvalues,
    feature_fn: Callable[[np.ndarray], np.ndarray],
    ctx: GraphContext = GraphContext(),
    require_zero_at_origin: bool = True,
) -> np.ndarray:
    """Student spectrum ``lam_tilde_i = g2(lam_i)**layers * f(lam_i)``.

    ``feature_fn`` must satisfy ``f(0) = 0`` unless
    ``require_zero_at_origin`` is False (homophily sweeps use a feature
    spectrum with ``f(0) = q``).
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if require_zero_at_origin:
        f0 = float(np.asarray(feature_fn(np.zeros(1)))[0])
        if abs(f0) > 1e-12:
            raise ValueError(f"feature spectrum must vanish at 0, got f(0)={f0}")
    spec = filt.spec if isinstance(filt, NormalizedFilter) else filt
    f = np.asarray(feature_fn(lam), dtype=float)
    out = _combined(filt, lam, ctx) ** spec.layers * f
    if require_zero_at_origin:
        out = np.where(lam == 0.0, 0.0, out)
    return out


def depth_response(
    base: FilterSpec | NormalizedFilter,
    max_layers: int,
    skip: bool,
    grid,
    ctx: GraphContext = GraphContext(),
) -> np.ndarray:
    """Row ``l-1`` holds the ``l``-layer response on ``grid``.

    Without skip connections the ``l``-layer response is ``g**l``; with them
    it is ``((g + 1) / 2)**l``. ``g`` is the normalized response (combined
    magnitude for multi-support filters).
    """
    if max_layers < 1:
        raise ValueError("max_layers must be >= 1")
    grid = np.asarray(grid, dtype=float)
    filt = base if isinstance(base, NormalizedFilter) else normalize_response(base, ctx, grid)
    g = filt.signed(grid)
    if skip:
        g = (g + 1.0) / 2.0
    return np.stack([g**layer for layer in range(1, max_layers + 1)])


def with_layers(spec: FilterSpec, layers: int) -> FilterSpec:
    return replace(spec, layers=layers)
