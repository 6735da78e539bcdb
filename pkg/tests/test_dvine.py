import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from gapvine.archimedean import ArchimedeanModel, acens_deriv, apdf, gen_deriv, gen_inv
from gapvine.bicop import BivariateCopula, CopulaFamily, hfun
from gapvine.dvine import (
    DVineModel,
    clayton_vine_of,
    dvine_from_families,
    vine_cluster_loglik,
    vine_cond_cdf,
    vine_logpdf,
    vine_sample,
    vine_terms,
)
from helpers import graded_rule, kendall_tau

C = CopulaFamily.CLAYTON
G = CopulaFamily.GUMBEL
F = CopulaFamily.FRANK
I = CopulaFamily.INDEPENDENCE


def ccf_vine():
    # two Clayton edges at tau 0.5, one Frank edge at tau 0.25
    return dvine_from_families(3, [C, C, F], taus=[0.5, 0.5, 0.25])


def indep_vine(d):
    return dvine_from_families(d, [I] * (d * (d - 1) // 2), thetas=[None] * (d * (d - 1) // 2))


class TestConstruction:
    def test_edge_counts(self):
        c = BivariateCopula(C, 2.0)
        with pytest.raises(ValueError):
            DVineModel(3, ((c, c),))  # missing tree 2
        with pytest.raises(ValueError):
            DVineModel(3, ((c,), (c,)))  # tree 1 too short

    def test_edge_lookup_and_taus(self):
        m = ccf_vine()
        assert m.edge(1, 1).family is C
        assert m.edge(2, 1).family is F
        taus = m.taus()
        assert taus[0] == pytest.approx(0.5, abs=1e-10)
        assert taus[2] == pytest.approx(0.25, abs=1e-9)

    def test_restrict(self):
        m = clayton_vine_of(2.0, 4)
        r = m.restrict(3)
        assert r.d == 3
        assert r.edge(2, 1).theta == pytest.approx(2.0 / 3.0)
        with pytest.raises(ValueError):
            m.restrict(1)

    def test_from_families_validation(self):
        with pytest.raises(ValueError):
            dvine_from_families(3, [C, C], taus=[0.5, 0.5])
        with pytest.raises(ValueError):
            dvine_from_families(3, [C, C, F], taus=[0.5, 0.5, 0.25], thetas=[1, 1, 1])


class TestClaytonVineOf:
    def test_parameter_formula(self):
        m = clayton_vine_of(2.0, 3)
        assert m.edge(1, 1).theta == pytest.approx(2.0)
        assert m.edge(1, 2).theta == pytest.approx(2.0)
        assert m.edge(2, 1).theta == pytest.approx(2.0 / 3.0)
        assert m.edge(2, 1).tau == pytest.approx(0.25, abs=1e-12)
        m4 = clayton_vine_of(2.0, 4)
        assert m4.edge(3, 1).theta == pytest.approx(2.0 / 5.0)

    def test_range_error(self):
        with pytest.raises(ValueError):
            clayton_vine_of(0.0, 3)


class TestLogpdf:
    def test_independence_is_zero(self):
        m = indep_vine(4)
        rng = np.random.default_rng(0)
        u = rng.uniform(0.01, 0.99, size=(20, 4))
        assert np.allclose(vine_logpdf(m, u), 0.0, atol=1e-12)

    @pytest.mark.parametrize("d", [3, 4])
    def test_clayton_vine_equivalence(self, d):
        arch = ArchimedeanModel(C, 2.0, d)
        vine = clayton_vine_of(2.0, d)
        rng = np.random.default_rng(13)
        u = rng.uniform(0.02, 0.98, size=(100, d))
        assert np.allclose(vine_logpdf(vine, u), np.log(apdf(arch, u)), rtol=1e-8)

    def test_embedding(self):
        # prefix evaluation equals the independently built restricted model
        m = dvine_from_families(4, [C, G, F, F, C, G], taus=[0.5, 0.4, 0.3, 0.25, 0.2, 0.15])
        r = m.restrict(3)
        rng = np.random.default_rng(2)
        u = rng.uniform(0.05, 0.95, size=(30, 3))
        assert np.allclose(vine_logpdf(m, u), vine_logpdf(r, u), atol=1e-12)

    def test_normalization_quadrature(self):
        # graded tensor quadrature handles the Clayton corner mass
        g, w = graded_rule(8, 10)
        U = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
        W = (w[:, None, None] * w[None, :, None] * w[None, None, :]).ravel()
        total = float(np.sum(W * np.exp(vine_logpdf(ccf_vine(), U))))
        assert total == pytest.approx(1.0, abs=1e-4)


class TestCondCdf:
    def test_independence(self):
        m = indep_vine(3)
        assert vine_cond_cdf(m, [0.3, 0.9, 0.42]) == pytest.approx(0.42, abs=1e-9)

    def test_d2_is_hfun(self):
        m = ccf_vine()
        c = m.edge(1, 1)
        # C_{2|1}(u2 | u1) conditions on the first coordinate
        assert vine_cond_cdf(m, [0.3, 0.7]) == pytest.approx(hfun(c, 0.7, 0.3), abs=1e-12)

    def test_archimedean_oracle(self):
        # C_{3|12} = phi''(t1+t2+t3) / phi''(t1+t2) for the 3d Clayton
        vine = clayton_vine_of(2.0, 3)
        rng = np.random.default_rng(21)
        u = rng.uniform(0.02, 0.98, size=(100, 3))
        t = gen_inv(C, 2.0, u)
        oracle = gen_deriv(C, 2.0, t.sum(axis=1), 2) / gen_deriv(C, 2.0, t[:, :2].sum(axis=1), 2)
        assert np.allclose(vine_cond_cdf(vine, u), oracle, rtol=1e-8)

    def test_monotone_in_last(self):
        m = ccf_vine()
        grid = np.linspace(0.01, 0.99, 100)
        u = np.column_stack([np.full(100, 0.3), np.full(100, 0.7), grid])
        vals = vine_cond_cdf(m, u)
        assert np.all(np.diff(vals) >= -1e-12)
        assert vals[0] < 0.05 and vals[-1] > 0.95


class TestClusterLoglik:
    def test_independence_censored(self):
        m = indep_vine(2)
        # dC/du1 = u2 for the product copula
        assert vine_cluster_loglik(m, [0.4, 0.8], censored=True) == pytest.approx(
            np.log(0.8), abs=1e-9
        )

    def test_event_equals_logpdf(self):
        m = ccf_vine()
        rng = np.random.default_rng(5)
        u = rng.uniform(0.05, 0.95, size=(20, 3))
        assert np.allclose(
            vine_cluster_loglik(m, u, censored=False), vine_logpdf(m, u), atol=1e-12
        )

    def test_size_one_cluster_is_zero(self):
        m = ccf_vine()
        assert vine_cluster_loglik(m, [0.42], censored=True) == 0.0
        assert vine_cluster_loglik(m, [0.42], censored=False) == 0.0

    def test_archimedean_oracle(self):
        arch = ArchimedeanModel(C, 2.0, 3)
        vine = clayton_vine_of(2.0, 3)
        rng = np.random.default_rng(8)
        u = rng.uniform(0.02, 0.98, size=(100, 3))
        assert np.allclose(
            vine_cluster_loglik(vine, u, censored=True),
            np.log(acens_deriv(arch, u)),
            rtol=1e-8,
        )

    @pytest.mark.parametrize("seed", range(5))
    def test_censored_equals_integral(self, seed):
        # exp(censored loglik) = int_0^{u3} c(u1, u2, t) dt
        rng = np.random.default_rng(100 + seed)
        fams = [(C, G, F)[i] for i in rng.integers(0, 3, size=3)]
        taus = rng.uniform(0.15, 0.6, size=3)
        m = dvine_from_families(3, fams, taus=taus)
        u = rng.uniform(0.1, 0.9, 3)
        x, w = leggauss(64)
        t = 0.5 * u[2] * (x + 1.0)
        wt = 0.5 * u[2] * w
        pts = np.column_stack([np.full(64, u[0]), np.full(64, u[1]), t])
        integral = float(np.sum(wt * np.exp(vine_logpdf(m, pts))))
        got = float(np.exp(vine_cluster_loglik(m, u, censored=True)))
        assert got == pytest.approx(integral, rel=1e-4)

    def test_terms_consistency(self):
        m = ccf_vine()
        u = np.array([[0.3, 0.6, 0.8], [0.7, 0.2, 0.5]])
        logpdf, prefix, cond = vine_terms(m, u)
        assert np.allclose(logpdf, vine_logpdf(m, u), atol=1e-12)
        assert np.allclose(cond, vine_cond_cdf(m, u), atol=1e-12)
        assert np.allclose(prefix, vine_logpdf(m.restrict(2), u[:, :2]), atol=1e-12)


class TestSample:
    def test_ccf_adjacent_taus(self):
        u = vine_sample(ccf_vine(), 20000, np.random.default_rng(17))
        assert u.shape == (20000, 3)
        assert np.all((u > 0) & (u < 1))
        assert kendall_tau(u[:, 0], u[:, 1]) == pytest.approx(0.5, abs=0.02)
        assert kendall_tau(u[:, 1], u[:, 2]) == pytest.approx(0.5, abs=0.02)

    def test_independence_taus(self):
        u = vine_sample(indep_vine(3), 20000, np.random.default_rng(23))
        for a, b in ((0, 1), (0, 2), (1, 2)):
            assert kendall_tau(u[:, a], u[:, b]) == pytest.approx(0.0, abs=0.02)

    def test_sample_density_consistency(self):
        # empirical CDF at a point matches graded-quadrature mass
        m = clayton_vine_of(2.0, 3)
        u = vine_sample(m, 20000, np.random.default_rng(29))
        emp = float(np.mean(np.all(u <= 0.5, axis=1)))
        from gapvine.archimedean import acdf

        assert emp == pytest.approx(acdf(ArchimedeanModel(C, 2.0, 3), [0.5] * 3), abs=0.01)
