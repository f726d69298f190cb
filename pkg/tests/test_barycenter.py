"""Center-of-mass tests: closed-form cases, variance inequality, contraction."""

import math

import numpy as np
import pytest

from hypinterp.barycenter import (
    ConvergenceError,
    StepMap,
    WeightedPointSet,
    barycenter,
    contraction_check,
    disc_barycenter_batch,
    karcher_value,
    reshetnyak_slack,
)
from hypinterp.geometry import (
    Model,
    ModelPoint,
    disc_automorphism,
    disc_point,
    geodesic_interpolate,
    halfplane_point,
    hyp_distance,
)


def random_disc_modelpoints(rng, n, rmax=0.95):
    r = np.sqrt(rng.uniform(0.0, 1.0, n)) * rmax
    t = rng.uniform(0.0, 2.0 * np.pi, n)
    return [disc_point(v) for v in r * np.exp(1j * t)]


class TestKarcherValue:
    def test_point_mass(self):
        p = halfplane_point(0.3 + 0.7j)
        mu = WeightedPointSet((p,), (1.0,))
        assert karcher_value(mu, p) == 0.0

    def test_two_mass_vertical(self):
        mu = WeightedPointSet.uniform([halfplane_point(1j), halfplane_point(4j)])
        # both atoms at distance 1/2 from 2i
        assert karcher_value(mu, halfplane_point(2j)) == pytest.approx(0.25, abs=1e-13)

    def test_metric_scaling(self):
        rng = np.random.default_rng(5)
        mu = WeightedPointSet.uniform(random_disc_modelpoints(rng, 6))
        x = disc_point(0.1 + 0.1j)
        assert karcher_value(mu, x, metric_scale=3.0) == pytest.approx(9.0 * karcher_value(mu, x), rel=1e-12)


class TestBarycenter:
    def test_point_mass(self):
        p = disc_point(0.4 - 0.2j)
        res = barycenter(WeightedPointSet((p,), (1.0,)))
        assert res.center.value == pytest.approx(p.value, abs=1e-12)
        assert res.residual <= 1e-10

    def test_vertical_midpoint(self):
        res = barycenter(WeightedPointSet.uniform([halfplane_point(1j), halfplane_point(4j)]))
        assert abs(res.center.value - 2j) <= 1e-9

    def test_symmetric_triple_fixed_point(self):
        # rotation by 2 pi / 3 permutes the atoms; the unique minimizer is fixed
        omega = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
        atoms = [disc_point(0.6), disc_point(0.6 * omega), disc_point(0.6 * omega**2)]
        res = barycenter(WeightedPointSet.uniform(atoms))
        assert abs(res.center.value) <= 1e-10

    def test_variance_inequality(self):
        # H(z) >= H(c) + d(c, z)^2 at random probes
        rng = np.random.default_rng(31)
        tol = 1e-10
        for _ in range(60):
            m = int(rng.integers(2, 9))
            mu = WeightedPointSet.uniform(random_disc_modelpoints(rng, m))
            res = barycenter(mu, tol=tol)
            for probe in random_disc_modelpoints(rng, 20):
                lhs = karcher_value(mu, probe)
                rhs = res.value + hyp_distance(res.center, probe) ** 2
                assert lhs >= rhs - 10.0 * tol

    def test_isometry_equivariance(self):
        rng = np.random.default_rng(37)
        tol = 1e-10
        for _ in range(25):
            atoms = random_disc_modelpoints(rng, 5)
            mu = WeightedPointSet.uniform(atoms)
            c = barycenter(mu, tol=tol).center
            theta = float(rng.uniform(0, 2 * np.pi))
            a = complex(*(0.5 * rng.uniform(-1, 1, 2)))
            moved = [disc_point(disc_automorphism(theta, a, p.value)) for p in atoms]
            c_moved = barycenter(WeightedPointSet.uniform(moved), tol=tol).center
            image = disc_point(disc_automorphism(theta, a, c.value))
            assert hyp_distance(c_moved, image) <= 10.0 * tol ** 0.5

    def test_metric_rescaling_invariance(self):
        rng = np.random.default_rng(41)
        tol = 1e-10
        for _ in range(20):
            mu = WeightedPointSet.uniform(random_disc_modelpoints(rng, 6))
            c1 = barycenter(mu, tol=tol).center
            c2 = barycenter(mu, tol=tol, metric_scale=3.0).center
            assert hyp_distance(c1, c2) <= 10.0 * tol ** 0.5
            v1 = barycenter(mu, tol=tol).value
            v2 = barycenter(mu, tol=tol, metric_scale=3.0).value
            assert v2 == pytest.approx(9.0 * v1, rel=1e-8, abs=1e-12)

    def test_convexity_along_geodesics(self):
        rng = np.random.default_rng(43)
        for _ in range(50):
            mu = WeightedPointSet.uniform(random_disc_modelpoints(rng, 5))
            a, b = random_disc_modelpoints(rng, 2)
            d = hyp_distance(a, b)
            ha, hb = karcher_value(mu, a), karcher_value(mu, b)
            for t in (0.2, 0.5, 0.8):
                st = geodesic_interpolate(a, b, t)
                lhs = karcher_value(mu, st)
                assert lhs <= (1 - t) * ha + t * hb - t * (1 - t) * d * d + 1e-9

    def test_nonconvergence_raises(self):
        mu = WeightedPointSet.uniform([disc_point(0.5), disc_point(-0.2j), disc_point(0.8)])
        with pytest.raises(ConvergenceError):
            barycenter(mu, tol=1e-10, max_iter=1)


class TestBatch:
    def test_matches_scalar(self):
        rng = np.random.default_rng(47)
        atoms = np.array([[p.value for p in random_disc_modelpoints(rng, 8)] for _ in range(40)])
        centers, residuals, _ = disc_barycenter_batch(atoms, tol=1e-12)
        assert np.all(residuals <= 1e-12)
        for row, c in zip(atoms, centers):
            res = barycenter(WeightedPointSet.uniform([disc_point(v) for v in row]), tol=1e-12)
            assert abs(res.center.value - c) <= 1e-9

    def test_identical_atoms_exact(self):
        atoms = np.full((3, 16), 0.3 + 0.4j, dtype=complex)
        centers, residuals, _ = disc_barycenter_batch(atoms)
        assert np.all(centers == 0.3 + 0.4j)
        assert np.all(residuals == 0.0)


class TestReshetnyak:
    def test_degenerate_pairs(self):
        y = disc_point(0.2 + 0.1j)
        z = disc_point(-0.4j)
        assert reshetnyak_slack(y, y, z, z) == pytest.approx(0.0, abs=1e-12)
        assert reshetnyak_slack(y, y, y, y) == 0.0

    def test_monte_carlo(self):
        rng = np.random.default_rng(53)
        worst = 0.0
        for _ in range(10_000):
            y, y2, z, z2 = random_disc_modelpoints(rng, 4)
            worst = min(worst, reshetnyak_slack(y, y2, z, z2))
        assert worst >= -1e-10


class TestContraction:
    def test_constant_maps_equality(self):
        p, q = halfplane_point(1j), halfplane_point(0.5 + 2j)
        f = StepMap.uniform([p] * 4)
        g = StepMap.uniform([q] * 4)
        report = contraction_check(f, g)
        assert report.lhs == pytest.approx(report.rhs, abs=1e-9)
        assert report.ok

    def test_equal_maps(self):
        rng = np.random.default_rng(59)
        vals = random_disc_modelpoints(rng, 8)
        f = StepMap.uniform(vals)
        report = contraction_check(f, f)
        assert report.lhs <= 1e-10
        assert report.ok

    def test_monte_carlo(self):
        rng = np.random.default_rng(61)
        for _ in range(200):
            f = StepMap.uniform(random_disc_modelpoints(rng, 16))
            g = StepMap.uniform(random_disc_modelpoints(rng, 16))
            assert contraction_check(f, g).ok
