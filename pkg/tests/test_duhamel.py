import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bilap.catalog import KernelSpec, NonlinearitySpec, kernel_g_constant, parse_nonlinearity
from bilap.duhamel import (
    ProblemParams,
    apply_semigroup,
    apply_tau,
    mode_rate,
    phi_functions,
    rhs_time_derivative,
    semigroup_multiplier,
)
from bilap.picard import semigroup_evolution
from bilap.spectral import (
    Field,
    GridSpec,
    SpaceTimeField,
    SpectralField,
    TimeGrid,
    h4_norm,
    inverse_ft,
    forward_ft,
    l2_norm,
    make_grid,
    spacetime_l2_norm,
    w142_norm,
)
from bilap.validation import catalog_kernels

from conftest import direct_ft


def _zero_field(grid):
    return Field(grid, np.zeros(grid.points))


def _smooth_v(grid, tg):
    return SpaceTimeField.from_function(
        grid, tg, lambda x, t: np.cos(3 * t) * np.exp(-0.5 * (x - t) ** 2) + 0.3 * t * np.exp(-0.25 * x**2))


class TestMultiplier:
    def test_identity_at_zero(self):
        p = np.linspace(-30, 30, 17)
        np.testing.assert_array_equal(semigroup_multiplier(p, 0.0, ProblemParams(2.0, 5.0)), 1.0)

    def test_decay(self):
        assert semigroup_multiplier(1.0, 1.0, ProblemParams()) == pytest.approx(0.3678794, abs=1e-7)

    def test_rotation(self):
        val = semigroup_multiplier(1.0, np.pi, ProblemParams(0.0, 1.0))
        assert val == pytest.approx(-np.exp(-np.pi), abs=1e-15)

    def test_modulus(self):
        p = np.linspace(-3, 3, 31)
        params = ProblemParams(0.4, -2.0)
        np.testing.assert_allclose(np.abs(semigroup_multiplier(p, 0.7, params)),
                                   np.exp(0.7 * (0.4 - p**4)), rtol=1e-13)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            semigroup_multiplier(1.0, -0.1, ProblemParams())

    def test_params(self):
        with pytest.raises(ValueError):
            ProblemParams(-1.0, 0.0)
        with pytest.raises(ValueError):
            ProblemParams(0.0, np.inf)

    def test_mode_rate_hermitian(self, grid):
        lam = mode_rate(grid, ProblemParams(0.5, 3.0))
        assert np.all(lam.real <= 0.5)
        # lam(-p) = conj lam(p) wherever -p is on the grid
        np.testing.assert_allclose(lam[grid.mirror_index], np.conj(lam), rtol=0, atol=1e-9)


class TestPhi:
    def test_series_matches_closed_form(self):
        # away from the cutoff both closed forms are well conditioned at these z
        z = np.array([1e-3, -2e-3 + 1e-3j, 0.5j, -3.0, 2.0 + 1j])
        phi1, phi2 = phi_functions(z)
        np.testing.assert_allclose(phi1, (np.exp(z) - 1) / z, rtol=1e-12)
        np.testing.assert_allclose(phi2, (np.exp(z) - 1 - z) / z**2, rtol=1e-9)

    def test_accurate_across_cutoff(self):
        z = np.array([0.99999e-4, 1.00001e-4, -1.00001e-4, 1.00001e-4j])
        phi1, phi2 = phi_functions(z)
        # six-term series, truncation far below double precision here
        fact = [1, 1, 2, 6, 24, 120, 720, 5040, 40320]
        s1 = sum(z**k / fact[k + 1] for k in range(7))
        s2 = sum(z**k / fact[k + 2] for k in range(7))
        np.testing.assert_allclose(phi1, s1, rtol=1e-12)
        np.testing.assert_allclose(phi2, s2, rtol=1e-11)

    def test_limits(self):
        phi1, phi2 = phi_functions(np.array([0.0]))
        assert phi1[0] == 1.0 and phi2[0] == 0.5


class TestSemigroup:
    def test_cos_decay(self):
        g = make_grid(np.pi, 32)
        out = apply_semigroup(Field(g, np.cos(g.x)), 1.0, ProblemParams())
        np.testing.assert_allclose(out.values, np.exp(-1) * np.cos(g.x), atol=1e-14)

    @pytest.mark.parametrize("s", [0.3, 1.0, 2.5])
    def test_cos_drift(self, s):
        g = make_grid(np.pi, 32)
        out = apply_semigroup(Field(g, np.cos(g.x)), s, ProblemParams(0.0, 1.0))
        np.testing.assert_allclose(out.values, np.exp(-s) * np.cos(g.x + s), atol=1e-14)

    def test_growth(self):
        g = make_grid(np.pi, 32)
        out = apply_semigroup(Field(g, np.sin(2 * g.x)), 0.1, ProblemParams(0.7, 0.0))
        np.testing.assert_allclose(out.values, np.exp(0.1 * (0.7 - 16)) * np.sin(2 * g.x), atol=1e-14)

    def test_zero_time_exact(self, gauss0):
        np.testing.assert_array_equal(apply_semigroup(gauss0, 0.0, ProblemParams(1.0, 1.0)).values,
                                      gauss0.values)

    def test_matches_direct_modes(self, grid, gauss0):
        params = ProblemParams(0.2, 1.5)
        out = apply_semigroup(gauss0, 0.4, params)
        lam = -grid.p**4 + 1j * 1.5 * grid.p_odd + 0.2
        ref = direct_ft(gauss0.values, grid) * np.exp(0.4 * lam)
        np.testing.assert_allclose(direct_ft(out.values, grid), ref, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1.0), st.floats(0, 1.0), st.floats(0, 1.0), st.floats(-3, 3))
def test_semigroup_property(t1, t2, a, b):
    g = GridSpec(20.0, 256)
    u0 = Field(g, np.exp(-0.5 * g.x**2) * (1 + 0.3 * np.sin(g.x)))
    params = ProblemParams(a, b)
    once = apply_semigroup(u0, t1 + t2, params)
    twice = apply_semigroup(apply_semigroup(u0, t1, params), t2, params)
    assert l2_norm(once - twice) <= 1e-11 * max(l2_norm(once), 1e-300) + 1e-300


class TestTau:
    def test_zero_forcing_is_semigroup(self, grid, timegrid, gauss0, kernel):
        F = NonlinearitySpec.forcing(_zero_field(grid))
        params = ProblemParams(0.3, 1.0)
        v = _smooth_v(grid, timegrid)
        out = apply_tau(v, gauss0, params, kernel, F)
        ref = semigroup_evolution(gauss0, params, timegrid)
        assert spacetime_l2_norm(out - ref) <= 1e-13 * spacetime_l2_norm(ref)

    def test_forcing_ignores_v(self, grid, timegrid, gauss0, kernel, forcing, rest):
        v1 = _smooth_v(grid, timegrid)
        v2 = v1 * 5.0 + SpaceTimeField.constant_in_time(gauss0, timegrid)
        a = apply_tau(v1, gauss0, rest, kernel, forcing)
        b = apply_tau(v2, gauss0, rest, kernel, forcing)
        np.testing.assert_array_equal(a.values, b.values)

    def test_forcing_closed_form(self, grid, timegrid, kernel, h_profile, forcing, rest):
        u0 = _zero_field(grid)
        out = apply_tau(_smooth_v(grid, timegrid), u0, rest, kernel, forcing)
        # independent per-mode integral: sqrt(2 pi) G_hat h_hat (1 - e^{-t p^4}) / p^4
        Ghat = direct_ft(kernel.sample(grid).values, grid)
        psi = np.sqrt(2 * np.pi) * Ghat * direct_ft(h_profile.values, grid)
        p4 = grid.p**4
        t = timegrid.nodes[:, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            weight = np.where(p4 > 0, -np.expm1(-t * p4) / np.where(p4 > 0, p4, 1.0), t)
        ref = (psi * weight) @ np.exp(1j * np.outer(grid.p, grid.x)) * grid.dp / np.sqrt(2 * np.pi)
        ref = ref.real
        err = np.abs(out.values - ref).max()
        assert err <= 1e-8 * np.abs(ref).max()

    def test_frame_zero(self, grid, timegrid, gauss0, kernel):
        F = NonlinearitySpec.saturating(grid, 0.2)
        out = apply_tau(_smooth_v(grid, timegrid), gauss0, ProblemParams(0.1, 2.0), kernel, F)
        np.testing.assert_array_equal(out.frame(0).values, gauss0.values)

    def test_real_output(self, grid, timegrid, gauss0, kernel):
        F = NonlinearitySpec.saturating(grid, 0.2)
        out = apply_tau(_smooth_v(grid, timegrid), gauss0, ProblemParams(0.1, 2.0), kernel, F)
        assert out.values.dtype == np.float64 and np.all(np.isfinite(out.values))

    def test_grid_mismatch(self, timegrid, gauss0, kernel, forcing, rest):
        other = GridSpec(40.0, 256)
        v = SpaceTimeField(other, timegrid, np.zeros((timegrid.steps + 1, 256)))
        with pytest.raises(ValueError):
            apply_tau(v, gauss0, rest, kernel, forcing)

    def test_refinement(self, grid, gauss0, kernel):
        F = NonlinearitySpec.linear(grid, 1.0)
        params = ProblemParams(0.2, 1.0)
        outs = [apply_tau(_smooth_v(grid, TimeGrid(1.0, M)), gauss0, params, kernel, F) for M in (32, 64, 128)]
        coarse = [o.values[:: o.timegrid.steps // 32] for o in outs]
        d1 = np.linalg.norm(coarse[0] - coarse[1])
        d2 = np.linalg.norm(coarse[1] - coarse[2])
        assert d1 / d2 >= 3.5

    @pytest.mark.parametrize("G", catalog_kernels(), ids=str)
    @pytest.mark.parametrize("text", ["linear(kappa=0.5)", "tanh(s=0.3)+h:gaussian(sigma=2.0,amp=0.1)",
                                      "forcing()+h:bump(width=3.0,amp=0.2)"])
    def test_norms_finite_and_bounded(self, grid, gauss0, G, text):
        tg = TimeGrid(0.5, 64)
        params = ProblemParams(0.3, 1.0)
        F = parse_nonlinearity(text, grid)
        v = _smooth_v(grid, tg)
        out = apply_tau(v, gauss0, params, G, F)
        assert all(np.isfinite([spacetime_l2_norm(out), w142_norm(out), h4_norm(out.frame(-1))]))
        # Young + growth bound, frame by frame, with slack factor C = 2
        g = kernel_g_constant(G, grid)
        v_sup = max(l2_norm(f) for f in v.frames)
        bound = np.exp(params.a * tg.horizon) * (l2_norm(gauss0) + tg.horizon * g * (F.k * v_sup + l2_norm(F.h)))
        assert max(l2_norm(f) for f in out.frames) <= 2.0 * bound


class TestRhs:
    def test_single_mode_decay(self, timegrid):
        g = make_grid(np.pi, 32)
        u0 = Field(g, np.cos(g.x))
        F = NonlinearitySpec.forcing(Field(g, np.zeros(32)))
        G = KernelSpec.gaussian()
        params = ProblemParams()
        v = SpaceTimeField(g, timegrid, np.zeros((timegrid.steps + 1, 32)))
        u = apply_tau(v, u0, params, G, F)
        du = rhs_time_derivative(u, v, params, G, F)
        ref = -np.exp(-timegrid.nodes)[:, None] * np.cos(g.x)
        # lam amplifies roundoff in the empty modes by up to p^4 = 16^4
        np.testing.assert_allclose(du.values, ref, atol=1e-11)

    def test_zero_initial(self, grid, timegrid, kernel, rest):
        F = NonlinearitySpec.saturating(grid, 0.5)
        v = _smooth_v(grid, timegrid)
        u = apply_tau(v, _zero_field(grid), rest, kernel, F)
        du = rhs_time_derivative(u, v, rest, kernel, F)
        src = np.sqrt(2 * np.pi) * kernel.transform(grid) * forward_ft(Field(grid, F.apply(v.values[0]))).coeffs
        ref = inverse_ft(SpectralField(grid, src)).values
        np.testing.assert_allclose(du.values[0], ref, atol=1e-14)

    def test_matches_finite_differences(self, grid):
        # broad data keeps every populated mode resolved by dt (|lam| dt << 1)
        F = NonlinearitySpec.linear(grid, 1.0)
        G = KernelSpec.gaussian(2.0)
        u0 = Field(grid, np.exp(-grid.x**2 / 32))
        params = ProblemParams(0.0, 0.5)
        devs = []
        for M in (64, 128):
            tg = TimeGrid(1.0, M)
            v = SpaceTimeField.from_function(grid, tg, lambda x, t: np.cos(3 * t) * np.exp(-(x - t) ** 2 / 32))
            u = apply_tau(v, u0, params, G, F)
            du = rhs_time_derivative(u, v, params, G, F).values[1:-1]
            fd = (u.values[2:] - u.values[:-2]) / (2 * tg.dt)
            devs.append(np.abs(fd - du).max() / np.abs(du).max())
        assert devs[1] < 1e-3
        assert devs[0] / devs[1] >= 3.5

    def test_mismatch(self, grid, timegrid, kernel, forcing, rest):
        u = _smooth_v(grid, timegrid)
        v = _smooth_v(grid, TimeGrid(1.0, 128))
        with pytest.raises(ValueError):
            rhs_time_derivative(u, v, rest, kernel, forcing)
