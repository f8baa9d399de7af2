from itertools import combinations

import numpy as np
import pytest

from tailgrid.expmeasure import (MonteCarloEstimate, PointMeasure, TestSet,
                                 dc_distance, nu_hat, nu_oracle_monte_carlo,
                                 reference_complete_dependence, restrict)
from tailgrid.grids import Grid, PiecewiseLinearPath, sup_distance
from tailgrid.models import CompleteDependenceFrechet, GammaCurve, ParetoPower


def const_atom(level):
    return PiecewiseLinearPath(Grid([0.0, 1.0]), [level, level])


def random_measure(rng, max_atoms=8, level_scale=3.0):
    n = int(rng.integers(0, max_atoms + 1))
    atoms = []
    for _ in range(n):
        g = Grid(np.sort(rng.uniform(0.0, 1.0, size=rng.integers(2, 6))))
        atoms.append(PiecewiseLinearPath(g, rng.uniform(0.0, level_scale, size=len(g))))
    return PointMeasure(atoms, float(rng.uniform(0.05, 1.5)))


def brute_dc(mu, nu, c):
    """Exhaustive-subset evaluation of the measure distance.

    Checks the definition directly: for each candidate eps (pairwise
    atom distances plus all achievable partial-mass differences), every
    atom subset F of either measure must satisfy
    measure(F) <= other(F^eps) + eps.  Returns the smallest feasible
    candidate.  Independent of the flow reduction and the interval
    argument used by the implementation.
    """
    mu, nu = restrict(mu, c), restrict(nu, c)
    n_mu, n_nu = len(mu), len(nu)
    if n_mu == 0 and n_nu == 0:
        return 0.0
    if n_mu == 0:
        return nu.total_mass
    if n_nu == 0:
        return mu.total_mass
    dist = np.array([[sup_distance(a, b) for b in nu.atoms] for a in mu.atoms])
    masses = {i * mu.weight - j * nu.weight
              for i in range(n_mu + 1) for j in range(n_nu + 1)}
    masses |= {j * nu.weight - i * mu.weight
               for i in range(n_mu + 1) for j in range(n_nu + 1)}
    cands = np.unique(np.concatenate((
        [0.0], dist.ravel(), [m for m in masses if m >= 0.0])))

    def feasible(eps):
        for sizes, d, w_f, w_o in ((n_mu, dist, mu.weight, nu.weight),
                                   (n_nu, dist.T, nu.weight, mu.weight)):
            for r in range(1, sizes + 1):
                for subset in combinations(range(sizes), r):
                    hit = np.zeros(d.shape[1], dtype=bool)
                    for i in subset:
                        hit |= d[i] <= eps
                    if r * w_f > np.count_nonzero(hit) * w_o + eps:
                        return False
        return True

    for eps in cands:
        if feasible(eps):
            return float(eps)
    raise AssertionError("no feasible candidate; oracle is broken")


class TestNuHat:
    def test_empty(self):
        m = PointMeasure((), 0.5)
        e = TestSet("pointwise-exceedance", [0.3], 1.0)
        assert nu_hat(m, e) == 0.0

    def test_counting(self):
        levels = [0.5, 1.0, 2.5, 3.0, 0.2, 5.0, 1.5, 0.9, 1.9, 0.1]
        m = PointMeasure([const_atom(v) for v in levels], 1.0 / 5)
        e = TestSet("pointwise-exceedance", [0.3], 2.0)
        assert nu_hat(m, e) == pytest.approx(0.6)  # 3 of 10 atoms, weight 1/5

    def test_min_vs_max_exceedance(self):
        g = Grid([0.0, 1.0])
        rising = PiecewiseLinearPath(g, [1.0, 3.0])
        m = PointMeasure([rising], 1.0)
        locs = [0.0, 1.0]
        assert nu_hat(m, TestSet("min-exceedance", locs, 2.0)) == 0.0
        assert nu_hat(m, TestSet("max-exceedance", locs, 2.0)) == 1.0

    def test_additivity_over_level_partition(self):
        rng = np.random.default_rng(101)
        violations = 0
        for _ in range(200):
            m = random_measure(rng, max_atoms=12)
            if len(m) == 0:
                continue
            t0 = float(rng.random())
            r, s = sorted(rng.uniform(0.1, 3.0, size=2))
            lo = nu_hat(m, TestSet("pointwise-exceedance", [t0], r))
            hi = nu_hat(m, TestSet("pointwise-exceedance", [t0], s))
            vals = np.array([a(t0) for a in m.atoms])
            between = m.weight * np.count_nonzero((vals > r) & (vals <= s))
            violations += not np.isclose(lo, hi + between, rtol=1e-12, atol=1e-12)
        assert violations == 0

    def test_monotone_in_level_and_locations(self):
        rng = np.random.default_rng(103)
        for _ in range(50):
            m = random_measure(rng, max_atoms=10)
            levels = np.sort(rng.uniform(0.1, 3.0, size=4))
            vals = [nu_hat(m, TestSet("max-exceedance", [0.2, 0.7], r)) for r in levels]
            assert all(b <= a for a, b in zip(vals, vals[1:]))
            # min-exceedance shrinks as the location set grows
            small = nu_hat(m, TestSet("min-exceedance", [0.3], 1.0))
            large = nu_hat(m, TestSet("min-exceedance", [0.3, 0.6, 0.9], 1.0))
            assert large <= small

    def test_kind_validation(self):
        with pytest.raises(ValueError):
            TestSet("band", [0.5], 1.0)
        with pytest.raises(ValueError):
            TestSet("pointwise-exceedance", [0.2, 0.4], 1.0)
        with pytest.raises(ValueError):
            TestSet("min-exceedance", [0.5], 0.0)


class TestRestrict:
    def test_all_below(self):
        m = PointMeasure([const_atom(0.2), const_atom(0.5)], 1.0)
        assert len(restrict(m, 1.0)) == 0

    def test_counts(self):
        m = PointMeasure([const_atom(v) for v in (0.5, 1.5, 2.5)], 1.0)
        assert len(restrict(m, 1.0)) == 2

    def test_idempotent(self):
        rng = np.random.default_rng(107)
        m = random_measure(rng, max_atoms=10)
        r1 = restrict(m, 1.0)
        r2 = restrict(r1, 1.0)
        assert len(r1) == len(r2)
        assert r1.atoms == r2.atoms


class TestDcDistance:
    def test_identical_measures(self):
        rng = np.random.default_rng(109)
        for _ in range(10):
            m = random_measure(rng, max_atoms=6)
            assert dc_distance(m, m, 0.5) == 0.0

    def test_two_single_atoms(self):
        z1 = const_atom(2.0)
        z2 = const_atom(2.3)
        mu = PointMeasure([z1], 1.0)
        nu = PointMeasure([z2], 1.0)
        assert dc_distance(mu, nu, 1.0) == pytest.approx(0.3)

    def test_empty_cases(self):
        empty = PointMeasure((), 1.0)
        nu = PointMeasure([const_atom(2.0), const_atom(3.0)], 0.25)
        assert dc_distance(empty, empty, 1.0) == 0.0
        assert dc_distance(empty, nu, 1.0) == pytest.approx(0.5)
        assert dc_distance(nu, empty, 1.0) == pytest.approx(0.5)

    def test_symmetry(self):
        rng = np.random.default_rng(113)
        for _ in range(20):
            mu = random_measure(rng)
            nu = random_measure(rng)
            assert dc_distance(mu, nu, 0.8) == pytest.approx(dc_distance(nu, mu, 0.8))

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(127)
        for _ in range(40):
            mu = random_measure(rng, max_atoms=5)
            nu = random_measure(rng, max_atoms=5)
            c = float(rng.uniform(0.3, 1.2))
            assert dc_distance(mu, nu, c) == pytest.approx(brute_dc(mu, nu, c), abs=1e-12)

    def test_restriction_applied_defensively(self):
        mu = PointMeasure([const_atom(0.5), const_atom(2.0)], 1.0)
        nu = PointMeasure([const_atom(2.0)], 1.0)
        # the 0.5 atom is outside D_1 and must not influence the distance
        assert dc_distance(mu, nu, 1.0) == 0.0


class TestReferenceMeasure:
    def test_total_mass(self):
        for c, m in ((1.0, 7), (0.5, 16), (2.0, 512)):
            ref = reference_complete_dependence(c, m)
            assert ref.measure.total_mass == pytest.approx(1.0 / c)

    def test_two_atom_example(self):
        ref = reference_complete_dependence(1.0, 2)
        levels = sorted(a.values[0] for a in ref.measure.atoms)
        np.testing.assert_allclose(levels, [4.0 / 3.0, 4.0])
        assert ref.measure.weight == pytest.approx(0.5)

    def test_quantile_discretization_error(self):
        c, m = 1.0, 512
        ref = reference_complete_dependence(c, m)
        for r in (1.0, 1.7, 2.0, 5.0, 40.0):
            e = TestSet("min-exceedance", [0.0, 0.5, 1.0], r)
            got = nu_hat(ref.measure, e)
            assert abs(got - 1.0 / r) <= 1.0 / (c * m) + 1e-12

    def test_closed_form(self):
        ref = reference_complete_dependence(1.0, 4)
        assert ref.closed_form(TestSet("min-exceedance", [0.1], 2.0)) == pytest.approx(0.5)
        assert ref.closed_form(TestSet("min-exceedance", [0.1], 0.25)) == pytest.approx(1.0)
        assert ref.discretization_error == pytest.approx(0.25)


class TestNuOracleMonteCarlo:
    def test_pointwise_marginal(self):
        model = ParetoPower(GammaCurve.holder(0.3, 0.3, 1.0))
        e = TestSet("pointwise-exceedance", [0.4], 2.5)
        est = nu_oracle_monte_carlo(model, e, u=50.0, reps=40000, seed=7)
        assert isinstance(est, MonteCarloEstimate)
        assert abs(est.value - 1.0 / 2.5) <= 4 * est.std_error + 1e-9

    def test_complete_dependence_min_exceedance(self):
        model = CompleteDependenceFrechet(GammaCurve.constant(1.0))
        e = TestSet("min-exceedance", [0.1, 0.5, 0.9], 2.0)
        est = nu_oracle_monte_carlo(model, e, u=100.0, reps=40000, seed=11)
        assert abs(est.value - 0.5) <= 4 * est.std_error + 1e-9

    def test_zero_reps_rejected(self):
        model = ParetoPower(GammaCurve.constant(0.5))
        e = TestSet("pointwise-exceedance", [0.4], 2.0)
        with pytest.raises(ValueError):
            nu_oracle_monte_carlo(model, e, u=10.0, reps=0, seed=1)
