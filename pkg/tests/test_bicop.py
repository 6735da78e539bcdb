import numpy as np
import pytest

from gapvine.bicop import (
    BivariateCopula,
    CopulaFamily,
    cdf,
    debye1,
    hfun,
    hinv,
    pdf,
    tau_of_theta,
    theta_of_tau,
)
from helpers import graded_rule

FAMILY_GRID = [
    (CopulaFamily.CLAYTON, [0.3, 1.0, 2.0, 5.0, 8.0]),
    (CopulaFamily.GUMBEL, [1.1, 1.5, 2.0, 3.0, 5.0]),
    (CopulaFamily.FRANK, [-8.0, -2.37, 2.37, 5.76, 12.0]),
]

UV_GRID = [(u, v) for u in (0.02, 0.25, 0.5, 0.8, 0.98) for v in (0.03, 0.4, 0.6, 0.95)]


def all_copulas():
    out = [BivariateCopula(CopulaFamily.INDEPENDENCE)]
    for fam, thetas in FAMILY_GRID:
        out.extend(BivariateCopula(fam, t) for t in thetas)
    return out


class TestConstruction:
    def test_range_checks(self):
        with pytest.raises(ValueError):
            BivariateCopula(CopulaFamily.CLAYTON, -1.0)
        with pytest.raises(ValueError):
            BivariateCopula(CopulaFamily.CLAYTON, 0.0)
        with pytest.raises(ValueError):
            BivariateCopula(CopulaFamily.GUMBEL, 0.9)
        with pytest.raises(ValueError):
            BivariateCopula(CopulaFamily.FRANK, 0.0)
        BivariateCopula(CopulaFamily.GUMBEL, 1.0)  # boundary allowed
        BivariateCopula(CopulaFamily.FRANK, -3.0)

    def test_domain_errors(self):
        c = BivariateCopula(CopulaFamily.CLAYTON, 2.0)
        with pytest.raises(ValueError):
            cdf(c, -0.1, 0.5)
        with pytest.raises(ValueError):
            hfun(c, 0.5, 1.2)


class TestCdf:
    def test_independence_product(self):
        c = BivariateCopula(CopulaFamily.INDEPENDENCE)
        assert cdf(c, 0.3, 0.7) == pytest.approx(0.21, abs=1e-12)

    def test_uniform_margins(self):
        c = BivariateCopula(CopulaFamily.CLAYTON, 2.0)
        for u in (0.1, 0.5, 0.9):
            assert cdf(c, u, 1.0) == pytest.approx(u, abs=1e-8)
            assert cdf(c, 1.0, u) == pytest.approx(u, abs=1e-8)
            assert cdf(c, u, 0.0) == pytest.approx(0.0, abs=1e-8)

    def test_clayton_value(self):
        # (0.5^-2 + 0.5^-2 - 1)^(-1/2) = 7^(-1/2)
        c = BivariateCopula(CopulaFamily.CLAYTON, 2.0)
        assert cdf(c, 0.5, 0.5) == pytest.approx(7.0 ** -0.5, rel=1e-12)

    @pytest.mark.parametrize("c", all_copulas(), ids=str)
    def test_two_increasing(self, c):
        rng = np.random.default_rng(5)
        for _ in range(50):
            u1, u2 = np.sort(rng.uniform(0.001, 0.999, 2))
            v1, v2 = np.sort(rng.uniform(0.001, 0.999, 2))
            rect = cdf(c, u2, v2) - cdf(c, u1, v2) - cdf(c, u2, v1) + cdf(c, u1, v1)
            assert rect >= -1e-12


class TestFiniteDifferenceOracles:
    @pytest.mark.parametrize("fam,thetas", FAMILY_GRID)
    def test_hfun_matches_fd(self, fam, thetas):
        h = 1e-5
        for theta in thetas:
            c = BivariateCopula(fam, theta)
            for u, v in UV_GRID:
                fd = (cdf(c, u, v + h) - cdf(c, u, v - h)) / (2 * h)
                assert hfun(c, u, v) == pytest.approx(fd, rel=1e-4, abs=1e-7)

    @pytest.mark.parametrize("fam,thetas", FAMILY_GRID)
    def test_pdf_matches_fd(self, fam, thetas):
        h = 1e-4
        for theta in thetas:
            c = BivariateCopula(fam, theta)
            for u, v in UV_GRID:
                fd = (
                    cdf(c, u + h, v + h)
                    - cdf(c, u - h, v + h)
                    - cdf(c, u + h, v - h)
                    + cdf(c, u - h, v - h)
                ) / (4 * h * h)
                assert pdf(c, u, v) == pytest.approx(fd, rel=1e-3, abs=1e-6)

    def test_clayton_hfun_closed_form(self):
        c = BivariateCopula(CopulaFamily.CLAYTON, 2.0)
        expected = 0.5 ** -3 * 7.0 ** -1.5
        assert hfun(c, 0.5, 0.5) == pytest.approx(expected, rel=1e-12)

    def test_gumbel_diagonal_conditioning(self):
        c = BivariateCopula(CopulaFamily.GUMBEL, 2.0)
        h = 1e-6
        fd = (cdf(c, 0.5, 0.5 + h) - cdf(c, 0.5, 0.5 - h)) / (2 * h)
        assert hfun(c, 0.5, 0.5) == pytest.approx(fd, rel=1e-6)


class TestHinv:
    @pytest.mark.parametrize("c", all_copulas(), ids=str)
    def test_roundtrip_identity(self, c):
        eps = np.finfo(float).eps
        for u, v in UV_GRID:
            p = hfun(c, u, v)
            back = hinv(c, p, v)
            # near p = 1 the inverse is ill-conditioned: du/dp = 1/pdf, so a
            # one-ulp perturbation of p already moves u by eps/pdf
            cond = eps / max(pdf(c, u, v), 1e-300)
            assert back == pytest.approx(u, abs=max(1e-8, 32 * cond))
            # the forward residual is well-conditioned everywhere
            assert hfun(c, back, v) == pytest.approx(p, abs=1e-9)

    def test_frank_bisection_oracle(self):
        c = BivariateCopula(CopulaFamily.FRANK, 5.0)
        lo, hi = 1e-12, 1 - 1e-12
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if hfun(c, mid, 0.2) < 0.5:
                lo = mid
            else:
                hi = mid
        assert hinv(c, 0.5, 0.2) == pytest.approx(0.5 * (lo + hi), abs=1e-9)

    def test_independence(self):
        c = BivariateCopula(CopulaFamily.INDEPENDENCE)
        assert hinv(c, 0.37, 0.9) == pytest.approx(0.37, abs=1e-12)

    def test_vectorized(self):
        c = BivariateCopula(CopulaFamily.GUMBEL, 2.5)
        p = np.array([0.1, 0.5, 0.9])
        v = np.array([0.3, 0.6, 0.2])
        u = hinv(c, p, v)
        assert np.allclose(hfun(c, u, v), p, atol=1e-9)


class TestTauTheta:
    def test_reference_values(self):
        assert tau_of_theta(CopulaFamily.CLAYTON, 2.0) == pytest.approx(0.5, abs=1e-12)
        assert tau_of_theta(CopulaFamily.GUMBEL, 2.0) == pytest.approx(0.5, abs=1e-12)
        # table value 2.37 is rounded; exact inversion gives about 2.372
        assert tau_of_theta(CopulaFamily.FRANK, 2.37) == pytest.approx(0.25, abs=5e-3)
        assert theta_of_tau(CopulaFamily.CLAYTON, 0.25) == pytest.approx(2.0 / 3.0, abs=1e-10)
        assert theta_of_tau(CopulaFamily.GUMBEL, 0.5) == pytest.approx(2.0, abs=1e-10)
        assert theta_of_tau(CopulaFamily.FRANK, 0.167) == pytest.approx(1.53, abs=0.01)

    def test_roundtrips(self):
        for fam in (CopulaFamily.CLAYTON, CopulaFamily.GUMBEL, CopulaFamily.FRANK):
            for tau in (0.1, 0.3, 0.5, 0.7, 0.9):
                theta = theta_of_tau(fam, tau)
                assert tau_of_theta(fam, theta) == pytest.approx(tau, abs=1e-6)
        for tau in (-0.9, -0.5, -0.1):
            theta = theta_of_tau(CopulaFamily.FRANK, tau)
            assert tau_of_theta(CopulaFamily.FRANK, theta) == pytest.approx(tau, abs=1e-6)

    def test_unattainable(self):
        with pytest.raises(ValueError):
            theta_of_tau(CopulaFamily.CLAYTON, -0.3)
        with pytest.raises(ValueError):
            theta_of_tau(CopulaFamily.GUMBEL, -0.2)

    def test_debye_small_theta_limit(self):
        assert debye1(1e-9) == pytest.approx(1.0, abs=1e-6)


class TestNormalization:
    @pytest.mark.parametrize("fam,thetas", FAMILY_GRID)
    def test_density_integrates_to_one(self, fam, thetas):
        g, w = graded_rule(16, 30)
        U, V = np.meshgrid(g, g, indexing="ij")
        W = w[:, None] * w[None, :]
        for theta in thetas:
            c = BivariateCopula(fam, theta)
            total = float(np.sum(W * pdf(c, U, V)))
            assert total == pytest.approx(1.0, abs=1e-5)

    def test_hfun_monotone_and_bounded(self):
        for c in all_copulas():
            us = np.linspace(0.01, 0.99, 40)
            vals = hfun(c, us, 0.37)
            assert np.all(np.diff(vals) >= -1e-12)
            assert np.all((vals >= 0) & (vals <= 1))
            assert hfun(c, 1.0, 0.37) > 1 - 1e-6
            assert hfun(c, 0.0, 0.37) < 1e-6


class TestFrankNearZero:
    def test_degenerates_to_independence(self):
        c = BivariateCopula(CopulaFamily.FRANK, 1e-6)
        assert cdf(c, 0.3, 0.7) == pytest.approx(0.21, abs=1e-9)
        assert pdf(c, 0.3, 0.7) == pytest.approx(1.0, abs=1e-9)
        assert tau_of_theta(CopulaFamily.FRANK, 1e-6) == 0.0
