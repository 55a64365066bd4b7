import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gnn_risk.filters import (
    ARCHITECTURES,
    FilterSpec,
    GraphContext,
    cayley_angle,
    depth_response,
    effective_spectrum,
    normalize_response,
    response,
)

CTX = GraphContext(mean_degree=4.0, lambda_max=2.0)
GRID = np.linspace(0, 2, 201)


def g(name, lam, ctx=CTX, **kw):
    return response(FilterSpec(name, **kw), lam, ctx)


class TestCatalogue:
    def test_gcn_endpoints(self):
        np.testing.assert_allclose(g("gcn", [0.0, 2.0]).supports[0], [2.0, 0.0])

    def test_highpass(self):
        assert g("highpass", 1.3).supports[0] == pytest.approx(1.3)

    def test_mlp_is_one(self):
        np.testing.assert_array_equal(g("mlp", GRID).g2, np.ones_like(GRID))

    def test_graphsage(self):
        r = g("graphsage", [0.0, 2.0])
        np.testing.assert_array_equal(r.supports, [[1, 1], [1, -1]])
        np.testing.assert_array_equal(r.g2, [2, 2])

    def test_chebnet_at_zero(self):
        r = g("chebnet", 0.0, K=3)
        np.testing.assert_allclose(r.supports, [1, -1, 1])
        assert r.g2 == pytest.approx(3.0)

    def test_highlow(self):
        r = g("highlow", 0.5)
        np.testing.assert_allclose(r.supports, [0.75, 0.25])

    def test_gin(self):
        # p (1 + eps)/p + p (1 - lam) = 1 + eps + p (1 - lam)
        r = g("gin", 0.5, eps=0.1)
        assert r.supports[0] == pytest.approx(1.1 + 4 * 0.5)

    def test_fagcn(self):
        # alpha ((1 + e) - lam) + (1 - alpha) ((e - 1) + lam)
        r = g("fagcn", 0.5, alpha=0.3, eps=0.2)
        assert r.supports[0] == pytest.approx(0.3 * 0.7 + 0.7 * (-0.3))

    def test_ppnp_matches_geometric_sum(self):
        base = 1 - GRID * 4 / 5
        np.testing.assert_allclose(g("ppnp", GRID, alpha=0.2).supports[0], 0.2 / (1 - 0.8 * base))

    def test_gpr_default_coefficients(self):
        spec = FilterSpec("gprgnn")
        np.testing.assert_allclose(spec.gpr_coefficients(), 0.2 * 0.8 ** np.arange(11))

    def test_gpr_explicit_gammas(self):
        r = g("gprgnn", 1.0, gammas=(1.0, -1.0))
        # base at lam=1, p=4: 1 - 4/5 = 0.2
        assert r.supports[0] == pytest.approx(1.0 - 0.2)

    def test_cayley_zero_rotation(self):
        # theta(0) = arg(-1) = pi
        r = g("cayleynet", 0.0, r_max=1)
        np.testing.assert_allclose(r.supports, [1.0, -1.0, 0.0], atol=1e-15)

    def test_cayley_angle_at_one(self):
        # (1 - i)/(1 + i) = -i
        assert cayley_angle(1.0) == pytest.approx(-np.pi / 2)

    @pytest.mark.parametrize("lam", [-0.1, 2.1])
    def test_domain(self, lam):
        with pytest.raises(ValueError, match="outside"):
            g("gcn", lam)

    def test_domain_respects_lambda_max(self):
        with pytest.raises(ValueError):
            g("gcn", 1.8, ctx=GraphContext(lambda_max=1.6))

    def test_roundoff_tolerated(self):
        g("gcn", [-1e-12, 2 + 1e-12])

    @pytest.mark.parametrize("name", ARCHITECTURES)
    def test_g2_nonnegative_and_sum_of_squares(self, name):
        r = g(name, GRID)
        assert np.all(r.g2 >= 0)
        np.testing.assert_allclose(r.g2, np.sum(r.supports**2, axis=0), rtol=0, atol=1e-12)


class TestIdentities:
    @pytest.mark.parametrize("K", [1, 2, 3, 6, 10])
    def test_chebyshev_trig_form(self, K):
        x = 2 * GRID / 2.0 - 1
        expected = np.cos(np.arange(K)[:, None] * np.arccos(x)[None, :])
        np.testing.assert_allclose(g("chebnet", GRID, K=K).supports, expected, atol=1e-12)

    def test_chebnet2_divides_recursion(self):
        r = g("chebnet2", GRID, K=4)
        x = GRID - 1
        g3 = (2 * x * x - 1) / 3
        g4 = (2 * x * g3 - x) / 4
        np.testing.assert_allclose(r.supports, [np.ones_like(x), x, g3, g4], atol=1e-14)

    def test_chebnet_scaled_lambda_max(self):
        ctx = GraphContext(lambda_max=1.6)
        r = response(FilterSpec("chebnet", K=2), 1.6, ctx)
        np.testing.assert_allclose(r.supports, [1, 1])

    @given(h=st.floats(0.1, 5), r_max=st.integers(1, 4))
    def test_cayley_unit_pairs(self, h, r_max):
        r = g("cayleynet", GRID, h=h, r_max=r_max)
        pairs = r.supports[1::2] ** 2 + r.supports[2::2] ** 2
        np.testing.assert_allclose(pairs, 1.0, atol=1e-12)

    def test_gpr_converges_to_ppnp(self):
        gpr = g("gprgnn", GRID, alpha=0.2, K=64).supports[0]
        ppnp = g("ppnp", GRID, alpha=0.2).supports[0]
        np.testing.assert_allclose(gpr, ppnp, atol=1e-6)

    def test_gcn_strictly_decreasing(self):
        assert np.all(np.diff(g("gcn", GRID).supports[0]) < 0)

    def test_highpass_strictly_increasing(self):
        assert np.all(np.diff(g("highpass", GRID).supports[0]) > 0)


class TestSpec:
    def test_parse_with_options(self):
        s = FilterSpec.parse("chebnet:K=6:layers=2")
        assert (s.architecture, s.K, s.layers, s.name) == ("chebnet", 6, 2, "chebnet:K=6:layers=2")

    def test_parse_gammas(self):
        s = FilterSpec.parse("gprgnn:gammas=0.5/0.3/0.2")
        assert s.gammas == (0.5, 0.3, 0.2)

    def test_aliases(self):
        assert FilterSpec("GPR-GNN").architecture == "gprgnn"
        assert FilterSpec("ChebNetII").architecture == "chebnet2"

    def test_default_orders(self):
        assert FilterSpec("chebnet").K == 3
        assert FilterSpec("gprgnn").K == 10

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(architecture="gat"),
            dict(architecture="ppnp", alpha=0.0),
            dict(architecture="ppnp", alpha=1.5),
            dict(architecture="chebnet", K=0),
            dict(architecture="cayleynet", h=0.0),
            dict(architecture="gcn", layers=0),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            FilterSpec(**kwargs)

    @pytest.mark.parametrize("text", ["gcn:K", "gcn:foo=1", "chebnet:K=x"])
    def test_parse_errors(self, text):
        with pytest.raises(ValueError):
            FilterSpec.parse(text)

    def test_context_validation(self):
        with pytest.raises(ValueError):
            GraphContext(mean_degree=0)
        with pytest.raises(ValueError):
            GraphContext(lambda_max=2.5)


class TestNormalization:
    def test_gcn(self):
        f = normalize_response(FilterSpec("gcn"), CTX, [0, 1, 2])
        np.testing.assert_allclose(f.signed(np.array([0.0, 1.0, 2.0])), [1, 0.5, 0])

    def test_highpass(self):
        f = normalize_response(FilterSpec("highpass"), CTX, [0, 1, 2])
        assert f.signed(np.array([2.0]))[0] == pytest.approx(1.0)

    def test_mlp_unchanged(self):
        f = normalize_response(FilterSpec("mlp"), CTX, GRID)
        assert f.scale == 1.0

    def test_zero_response(self):
        with pytest.raises(ValueError, match="vanishes"):
            normalize_response(FilterSpec("highpass"), CTX, [0.0])

    def test_sign_preserved(self):
        f = normalize_response(FilterSpec("fagcn", alpha=0.9), CTX, GRID)
        raw = g("fagcn", GRID, alpha=0.9).supports[0]
        np.testing.assert_array_equal(np.sign(f.signed(GRID)), np.sign(raw))

    @pytest.mark.parametrize("name", ARCHITECTURES)
    def test_peak_is_one(self, name):
        f = normalize_response(FilterSpec(name), CTX, GRID)
        assert f(GRID).g2.max() == pytest.approx(1.0)


class TestEffectiveSpectrum:
    lam = np.array([0.0, 0.5, 1.0, 2.0])

    def test_mlp(self):
        out = effective_spectrum(FilterSpec("mlp"), self.lam, lambda x: x**2)
        np.testing.assert_allclose(out, self.lam**2)

    def test_gcn_q0(self):
        out = effective_spectrum(FilterSpec("gcn"), self.lam, lambda x: x / 2)
        np.testing.assert_allclose(out, (2 - self.lam) ** 2 * self.lam / 2)

    @pytest.mark.parametrize("name", ARCHITECTURES)
    def test_zero_mode(self, name):
        out = effective_spectrum(FilterSpec(name), self.lam, lambda x: np.sin(x))
        assert out[0] == 0.0

    def test_requires_f0_zero(self):
        with pytest.raises(ValueError, match="vanish"):
            effective_spectrum(FilterSpec("gcn"), self.lam, lambda x: x + 1)

    def test_guard_can_be_relaxed(self):
        out = effective_spectrum(FilterSpec("mlp"), self.lam, lambda x: x + 1, require_zero_at_origin=False)
        np.testing.assert_allclose(out, self.lam + 1)

    def test_layers_power_g2(self):
        out = effective_spectrum(FilterSpec("gcn", layers=3), self.lam, lambda x: x)
        np.testing.assert_allclose(out, ((2 - self.lam) ** 2) ** 3 * self.lam)


class TestDepth:
    def test_gcn_powers(self):
        table = depth_response(FilterSpec("gcn"), 4, False, np.array([0.0, 1.0, 2.0]))
        assert table[0, 1] == pytest.approx(0.5)
        assert table[3, 1] == pytest.approx(0.0625)

    def test_gcn_at_one_point_five(self):
        table = depth_response(FilterSpec("gcn"), 4, False, GRID)
        k = np.argmin(np.abs(GRID - 1.5))
        np.testing.assert_allclose(table[:, k], 0.25 ** np.arange(1, 5))

    def test_skip_never_vanishes(self):
        table = depth_response(FilterSpec("gcn"), 5, True, GRID)
        np.testing.assert_allclose(table[:, -1], 0.5 ** np.arange(1, 6))

    def test_mlp_flat(self):
        for skip in (False, True):
            np.testing.assert_allclose(depth_response(FilterSpec("mlp"), 6, skip, GRID), 1.0)

    def test_max_layers(self):
        with pytest.raises(ValueError):
            depth_response(FilterSpec("gcn"), 0, False, GRID)
