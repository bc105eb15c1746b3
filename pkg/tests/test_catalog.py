import numpy as np
import pytest
import sympy as sp
from scipy.integrate import quad

from bilap.catalog import (
    AssumptionViolation,
    KernelSpec,
    NonlinearitySpec,
    convolve_with_kernel,
    eval_nonlinearity,
    kernel_g_constant,
    parse_kernel,
    parse_nonlinearity,
    parse_profile,
    verify_nonlinearity_bounds,
)
from bilap.oracles import direct_convolution
from bilap.spectral import Field, GridSpec, l2_norm
from bilap.validation import catalog_kernels


def _quad_abs(f, lo, hi, breaks):
    pts = [lo, *sorted(breaks), hi]
    return sum(quad(f, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0] for a, b in zip(pts[:-1], pts[1:]))


@pytest.fixture(scope="module")
def gaussian_l1_4():
    # independent: adaptive quadrature split at the roots of He_4, x^2 = 3 -+ sqrt 6
    r = np.sqrt([3 - np.sqrt(6), 3 + np.sqrt(6)])
    dens = lambda x: np.exp(-x * x / 2) / np.sqrt(2 * np.pi)
    return _quad_abs(lambda x: abs(dens(x) * (x**4 - 6 * x**2 + 3)), -40, 40, [*r, *-r])


class TestKernelConstant:
    def test_standard_normal(self, grid, gaussian_l1_4):
        G = KernelSpec.gaussian()
        l1, l1_4 = G.l1_norms(grid)
        assert l1 == pytest.approx(1.0, abs=1e-10)
        assert gaussian_l1_4 == pytest.approx(2.8006003, abs=1e-7)
        assert l1_4 == pytest.approx(gaussian_l1_4, rel=1e-7)
        assert kernel_g_constant(G, grid) == pytest.approx(np.hypot(1.0, gaussian_l1_4), rel=1e-7)
        assert kernel_g_constant(G, grid) == pytest.approx(2.973779, abs=1e-6)

    @pytest.mark.parametrize("c", [0.25, 3.0])
    def test_homogeneous(self, grid, c):
        G = KernelSpec.gaussian(1.5, 1.0)
        assert kernel_g_constant(G.scaled(c), grid) == pytest.approx(c * kernel_g_constant(G, grid), rel=1e-12)

    def test_zero_kernel_rejected(self, grid):
        with pytest.raises(ValueError, match="numerically zero"):
            kernel_g_constant(KernelSpec.gaussian(amp=0.0), grid)
        with pytest.raises(ValueError, match="numerically zero"):
            kernel_g_constant(KernelSpec.from_samples(Field(grid, np.zeros(grid.points))), grid)

    def test_non_decaying_rejected(self):
        with pytest.raises(ValueError, match="decay"):
            KernelSpec.gaussian(sigma=5.0).l1_norms(GridSpec(10.0, 128))

    @pytest.mark.parametrize("G", catalog_kernels(), ids=str)
    def test_catalog_positive_finite(self, grid, G):
        g = kernel_g_constant(G, grid)
        assert 0 < g < np.inf

    def test_sampled_matches_analytic(self, fine_grid):
        G = KernelSpec.gaussian()
        S = KernelSpec.from_samples(G.sample(fine_grid))
        assert kernel_g_constant(S, fine_grid) == pytest.approx(kernel_g_constant(G, fine_grid), rel=1e-3)


class TestFourthDerivativeClosedForms:
    s = sp.symbols("x", real=True)

    def _symbolic(self, expr, pts):
        d4 = sp.lambdify(self.s, sp.diff(expr, self.s, 4), "numpy")
        return d4(pts)

    def test_gaussian(self):
        x = self.s
        sigma, amp = 1.3, 0.7
        expr = amp / (sigma * sp.sqrt(2 * sp.pi)) * sp.exp(-x**2 / (2 * sigma**2))
        pts = np.linspace(-6, 6, 101)
        np.testing.assert_allclose(KernelSpec.gaussian(sigma, amp).evaluate(pts, 4),
                                   self._symbolic(expr, pts), rtol=1e-10, atol=1e-14)

    def test_dipole(self):
        x = self.s
        sigma, amp = 0.8, 1.5
        expr = amp * (x / sigma) * sp.exp(-(x / sigma) ** 2)
        pts = np.linspace(-5, 5, 101)
        np.testing.assert_allclose(KernelSpec.dipole(sigma, amp).evaluate(pts, 4),
                                   self._symbolic(expr, pts), rtol=1e-10, atol=1e-13)

    def test_bump(self):
        x = self.s
        w = 3.0
        expr = sp.exp(-1 / (1 - (x / w) ** 2))
        pts = np.linspace(-2.97, 2.97, 99)
        np.testing.assert_allclose(KernelSpec.bump(w, 1.0).evaluate(pts, 4),
                                   self._symbolic(expr, pts), rtol=1e-9, atol=1e-12)
        assert not np.any(KernelSpec.bump(w).evaluate([-w, w, 5.0], 4))


class TestNonlinearity:
    def test_forcing_ignores_u(self, grid, h_profile, gauss0):
        F = NonlinearitySpec.forcing(h_profile)
        np.testing.assert_array_equal(eval_nonlinearity(F, gauss0).values, h_profile.values)

    def test_linear(self, grid, gauss0):
        F = NonlinearitySpec.linear(grid, 2.0)
        np.testing.assert_allclose(eval_nonlinearity(F, gauss0).values, 2 * gauss0.values, rtol=0)

    def test_saturating(self, grid):
        F = NonlinearitySpec.saturating(grid, 1.0)
        assert not np.any(eval_nonlinearity(F, Field(grid, np.zeros(grid.points))).values)
        u = np.random.default_rng(0).normal(scale=3, size=grid.points)
        assert np.all(np.abs(F.apply(u)) <= np.abs(u))

    def test_negative_offset_rejected(self, grid):
        with pytest.raises(ValueError, match="nonnegative"):
            NonlinearitySpec.forcing(Field(grid, -np.ones(grid.points)))


class TestAssumptionProbe:
    def test_linear_ratio_exact(self, grid):
        rep = verify_nonlinearity_bounds(NonlinearitySpec.linear(grid, 2.5), probes=500, seed=1)
        assert rep.worst_lipschitz_ratio == pytest.approx(2.5, rel=1e-9)
        assert rep.worst_growth_slack >= 0

    def test_saturating_ratio_approaches_s(self, grid, h_profile):
        s = 0.3
        rep = verify_nonlinearity_bounds(NonlinearitySpec.saturating(grid, s, h_profile), probes=2000, seed=2)
        assert rep.worst_lipschitz_ratio <= s * (1 + 1e-8)
        assert rep.worst_lipschitz_ratio >= 0.999 * s

    def test_mislabeled_constant_rejected(self, grid):
        F = NonlinearitySpec.saturating(grid, 0.4).with_constants(l=0.2)
        with pytest.raises(AssumptionViolation) as info:
            verify_nonlinearity_bounds(F, probes=200, seed=0)
        u1, u2, x = info.value.triple
        assert abs(np.tanh(u1) - np.tanh(u2)) * 0.4 > 0.2 * abs(u1 - u2)

    def test_mislabeled_growth_rejected(self, grid):
        F = NonlinearitySpec.linear(grid, 1.0).with_constants(k=0.5)
        with pytest.raises(AssumptionViolation, match="growth"):
            verify_nonlinearity_bounds(F, probes=200)

    def test_needs_probes(self, grid):
        with pytest.raises(ValueError):
            verify_nonlinearity_bounds(NonlinearitySpec.linear(grid, 1.0), probes=10)

    @pytest.mark.parametrize("text", [
        "linear(kappa=2.0)",
        "linear(kappa=-0.5)",
        "tanh(s=0.05)+h:gaussian(sigma=2.0,amp=0.1)",
        "forcing()+h:bump(width=3.0,amp=0.2)",
    ])
    def test_catalog_members_pass(self, grid, text):
        rep = verify_nonlinearity_bounds(parse_nonlinearity(text, grid), probes=400, seed=7)
        assert rep.lipschitz_slack >= -1e-12 and rep.worst_growth_slack >= 0


class TestConvolution:
    def test_narrow_bump_reproduces_kernel(self, fine_grid):
        g = fine_grid
        G = KernelSpec.gaussian()
        eps = 0.05
        delta = Field(g, np.exp(-0.5 * (g.x / eps) ** 2) / (eps * np.sqrt(2 * np.pi)))
        out = convolve_with_kernel(G, delta)
        target = G.sample(g)
        assert l2_norm(out - target) <= 1e-3
        assert l2_norm(out - direct_convolution(G, delta)) <= 1e-8 * l2_norm(out)

    def test_zero(self, grid, kernel):
        assert not np.any(convolve_with_kernel(kernel, Field(grid, np.zeros(grid.points))).values)

    def test_gaussians_compose(self, grid):
        s1, s2 = 1.0, 1.5
        f = KernelSpec.gaussian(s2).sample(grid)
        out = convolve_with_kernel(KernelSpec.gaussian(s1), f)
        s = np.hypot(s1, s2)
        exact = np.exp(-0.5 * (grid.x / s) ** 2) / (s * np.sqrt(2 * np.pi))
        np.testing.assert_allclose(out.values, exact, atol=1e-13)
        assert np.sum(out.values) * grid.dx == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("G", catalog_kernels(), ids=str)
    def test_matches_direct_quadrature(self, grid, G):
        rng = np.random.default_rng(4)
        f = Field(grid, sum(rng.normal() * np.exp(-0.5 * ((grid.x - c) / 1.5) ** 2)
                            for c in rng.uniform(-5, 5, 3)))
        spec = convolve_with_kernel(G, f)
        direct = direct_convolution(G, f)
        assert l2_norm(spec - direct) <= 1e-8 * l2_norm(direct)

    def test_superposition(self, grid, kernel):
        rng = np.random.default_rng(5)
        f1, f2 = (Field(grid, rng.normal(size=grid.points)) for _ in range(2))
        lhs = convolve_with_kernel(kernel, f1 * 2.0 + f2 * -3.0)
        rhs = convolve_with_kernel(kernel, f1) * 2.0 + convolve_with_kernel(kernel, f2) * -3.0
        assert l2_norm(lhs - rhs) <= 1e-12 * l2_norm(rhs)

    def test_grid_mismatch(self, grid):
        S = KernelSpec.from_samples(KernelSpec.gaussian().sample(grid))
        other = GridSpec(40.0, 256)
        with pytest.raises(ValueError):
            convolve_with_kernel(S, Field(other, np.zeros(256)))


class TestTextForms:
    def test_kernel(self):
        G = parse_kernel("gaussian(sigma=1.0,amp=1.0)")
        assert G.family == "gaussian" and G.params == {"sigma": 1.0, "amp": 1.0}

    def test_nonlinearity(self, grid):
        F = parse_nonlinearity("tanh(s=0.05)+h:gaussian(sigma=2.0,amp=0.1)", grid)
        assert (F.family, F.k, F.l) == ("tanh", 0.05, 0.05)
        np.testing.assert_allclose(F.h.values, parse_profile("gaussian(sigma=2.0,amp=0.1)", grid).values)

    @pytest.mark.parametrize("text", ["gauss(sigma=1)", "gaussian(sigma=x)", "gaussian(width=1)",
                                      "gaussian sigma=1", "gaussian(sigma=-1)"])
    def test_bad_kernels(self, text):
        with pytest.raises(ValueError):
            parse_kernel(text)

    @pytest.mark.parametrize("text", ["cubic(c=1)", "tanh(k=1)", "linear()",
                                      "forcing()+h:dipole(sigma=1,amp=1)"])
    def test_bad_nonlinearities(self, grid, text):
        with pytest.raises(ValueError):
            parse_nonlinearity(text, grid)
