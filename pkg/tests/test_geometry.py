"""Metric-level tests: exact examples plus randomized invariants."""

import cmath
import math

import numpy as np
import pytest

from hypinterp.geometry import (
    CircleArc,
    DomainError,
    Model,
    ModelMismatchError,
    ModelPoint,
    cayley,
    disc_automorphism,
    disc_point,
    geodesic_interpolate,
    halfplane_point,
    hyp_distance,
    hyperbolic_area_disc,
    pseudo_distance,
    stolz_projection,
)


def random_disc_points(rng, n):
    r = np.sqrt(rng.uniform(0.0, 1.0, n)) * 0.999
    t = rng.uniform(0.0, 2.0 * np.pi, n)
    return r * np.exp(1j * t)


def random_halfplane_points(rng, n):
    x = rng.uniform(-3.0, 3.0, n)
    y = np.exp(rng.uniform(np.log(1e-4), np.log(10.0), n))
    return x + 1j * y


class TestDistances:
    def test_disc_origin_half(self):
        # rho = 1/2, log2(1.5/0.5) = log2 3
        d = hyp_distance(disc_point(0.0), disc_point(0.5))
        assert d == pytest.approx(math.log2(3.0), abs=1e-14)

    def test_halfplane_vertical(self):
        # rho = |i - 2i| / |i + 2i| = 1/3, (1/2) log2 2 = 1/2
        d = hyp_distance(halfplane_point(1j), halfplane_point(2j))
        assert d == pytest.approx(0.5, abs=1e-14)

    def test_identity(self):
        p = disc_point(0.3 + 0.4j)
        assert hyp_distance(p, p) == 0.0
        q = halfplane_point(0.7 + 0.2j)
        assert hyp_distance(q, q) == 0.0

    def test_model_mismatch(self):
        with pytest.raises(ModelMismatchError):
            hyp_distance(disc_point(0.0), halfplane_point(1j))

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            disc_point(1.2)
        with pytest.raises(DomainError):
            halfplane_point(1.0 - 0.1j)

    def test_pseudo_examples(self):
        assert pseudo_distance(halfplane_point(1j), halfplane_point(2j)) == pytest.approx(1 / 3, abs=1e-15)
        w = 0.3 - 0.2j
        assert pseudo_distance(disc_point(0.0), disc_point(w)) == pytest.approx(abs(w), abs=1e-15)
        p = disc_point(0.5 + 0.1j)
        assert pseudo_distance(p, p) == 0.0

    def test_symmetry_and_triangle_random(self):
        rng = np.random.default_rng(7)
        for model, sampler in ((Model.DISC, random_disc_points), (Model.HALFPLANE, random_halfplane_points)):
            z = sampler(rng, 3 * 2000).reshape(3, -1)
            points = [[ModelPoint(v, model) for v in row] for row in z]
            for a, b, c in zip(*points):
                ab, ba = hyp_distance(a, b), hyp_distance(b, a)
                assert abs(ab - ba) <= 1e-12
                slack = hyp_distance(a, c) + hyp_distance(c, b) - ab
                assert slack >= -1e-12


class TestMoebiusAndCayley:
    def test_cayley_basepoint(self):
        assert cayley(halfplane_point(1j)).value == pytest.approx(0.0, abs=1e-15)

    def test_cayley_roundtrip(self):
        rng = np.random.default_rng(11)
        for v in random_halfplane_points(rng, 200):
            p = halfplane_point(v)
            back = cayley(cayley(p))
            assert abs(back.value - v) <= 1e-14 * max(1.0, abs(v))

    def test_factor_two_example(self):
        a = cayley(halfplane_point(1j))
        b = cayley(halfplane_point(2j))
        assert hyp_distance(a, b) == pytest.approx(1.0, abs=1e-13)

    def test_factor_two_random(self):
        # heights below ~1e-3 push rho within 1e-8 of 1, where atanh
        # conditioning in doubles dominates; restrict to the honest domain
        rng = np.random.default_rng(13)
        x = rng.uniform(-3.0, 3.0, 2000)
        y = np.exp(rng.uniform(np.log(1e-3), np.log(10.0), 2000))
        z, w = (x + 1j * y)[:1000], (x + 1j * y)[1000:]
        for zi, wi in zip(z, w):
            hp = hyp_distance(halfplane_point(zi), halfplane_point(wi))
            dd = hyp_distance(cayley(halfplane_point(zi)), cayley(halfplane_point(wi)))
            assert abs(dd - 2.0 * hp) <= 1e-10 * max(1.0, dd)

    def test_mobius_invariance(self):
        rng = np.random.default_rng(17)
        z = random_disc_points(rng, 500)
        w = random_disc_points(rng, 500)
        thetas = rng.uniform(0, 2 * np.pi, 500)
        centers = random_disc_points(rng, 500) * 0.9
        for zi, wi, th, a in zip(z, w, thetas, centers):
            d0 = hyp_distance(disc_point(zi), disc_point(wi))
            d1 = hyp_distance(
                disc_point(disc_automorphism(th, a, zi)),
                disc_point(disc_automorphism(th, a, wi)),
            )
            assert abs(d0 - d1) <= 1e-10 * max(1.0, d0)


class TestGeodesics:
    def test_vertical_midpoint(self):
        mid = geodesic_interpolate(halfplane_point(1j), halfplane_point(4j), 0.5)
        assert abs(mid.value - 2j) <= 1e-12

    def test_endpoints(self):
        a, b = disc_point(0.1 + 0.2j), disc_point(-0.5j)
        assert geodesic_interpolate(a, b, 0.0).value == pytest.approx(a.value, abs=1e-15)
        assert geodesic_interpolate(a, b, 1.0).value == pytest.approx(b.value, abs=1e-14)

    def test_constant_speed(self):
        rng = np.random.default_rng(19)
        for zi, wi in zip(random_disc_points(rng, 50), random_disc_points(rng, 50)):
            a, b = disc_point(zi), disc_point(wi)
            total = hyp_distance(a, b)
            for s in (0.25, 0.5, 0.75):
                m = geodesic_interpolate(a, b, s)
                assert hyp_distance(a, m) == pytest.approx(s * total, abs=1e-10)

    def test_bad_parameter(self):
        with pytest.raises(DomainError):
            geodesic_interpolate(disc_point(0.0), disc_point(0.5), 1.5)

    def test_cat0_comparison(self):
        # squared distance to a vertex is strongly convex along geodesics
        rng = np.random.default_rng(23)
        for _ in range(400):
            a1, a2, a3 = (disc_point(v) for v in random_disc_points(rng, 3))
            d12, d13, d23 = hyp_distance(a1, a2), hyp_distance(a1, a3), hyp_distance(a2, a3)
            for t in np.linspace(0.1, 0.9, 9):
                st = geodesic_interpolate(a2, a3, float(t))
                lhs = hyp_distance(a1, st) ** 2
                rhs = (1 - t) * d12**2 + t * d13**2 - t * (1 - t) * d23**2
                assert lhs <= rhs + 1e-9


class TestArea:
    def test_half_radius(self):
        assert hyperbolic_area_disc(0.5) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-14)

    def test_dyadic_asymptotics(self):
        # area of D(0, 1 - 2^-n) grows like 2^n, with constant between pi and 4 pi
        for n in range(5, 21):
            area = hyperbolic_area_disc(1.0 - 2.0**-n)
            assert math.pi <= area / 2.0**n <= 4.0 * math.pi

    def test_flat_limit(self):
        r = 1e-5
        assert hyperbolic_area_disc(r) == pytest.approx(4.0 * math.pi * r * r, rel=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            hyperbolic_area_disc(1.0)


class TestStolzProjection:
    def test_center_gives_full_circle(self):
        (arc,) = stolz_projection([disc_point(0.0)], 2.0)
        assert arc.half_width == pytest.approx(math.pi)
        assert arc.normalized_length == pytest.approx(1.0)

    def test_chord_condition(self):
        (arc,) = stolz_projection([disc_point(0.9)], 2.0)
        assert arc.center == pytest.approx(0.0, abs=1e-15)
        # the arc's endpoint satisfies |0.9 - e^{i theta}| = 2 (1 - 0.9)
        endpoint = cmath.exp(1j * arc.half_width)
        assert abs(0.9 - endpoint) == pytest.approx(0.2, abs=1e-12)
        inside = cmath.exp(1j * 0.5 * arc.half_width)
        assert abs(0.9 - inside) < 0.2

    def test_empty_input(self):
        assert stolz_projection([], 2.0) == []

    def test_arc_length_comparable_to_height(self):
        # single-point arcs scale like the distance to the boundary
        rng = np.random.default_rng(29)
        for _ in range(200):
            r = rng.uniform(0.5, 0.999)
            (arc,) = stolz_projection([disc_point(r)], 2.0)
            ratio = 2.0 * arc.half_width / (1.0 - r)
            assert 1.0 <= ratio <= 12.0

    def test_bad_aperture(self):
        with pytest.raises(DomainError):
            stolz_projection([disc_point(0.0)], 1.0)

    def test_arc_contains(self):
        arc = CircleArc(center=0.0, half_width=0.5)
        assert arc.contains(0.4)
        assert not arc.contains(0.7)
        assert arc.contains(2 * math.pi - 0.3)
