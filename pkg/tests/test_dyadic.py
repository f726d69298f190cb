"""Dyadic grid tests: exact geometry, location, covering counts."""

from fractions import Fraction

import numpy as np
import pytest

from hypinterp.dyadic import (
    DyadicInterval,
    GridMismatchError,
    IntervalFamily,
    box_center,
    box_geometry,
    generation_count,
    halving_hypothesis_holds,
    lemma2_cover,
    locate,
    nested_center_gap,
)

ROOT = DyadicInterval(0, 0)


class TestIntervalArithmetic:
    def test_endpoints_exact(self):
        i = DyadicInterval(3, 5)
        assert i.left == Fraction(5, 8)
        assert i.right == Fraction(6, 8)
        assert i.length == Fraction(1, 8)

    def test_offset(self):
        i = DyadicInterval(2, 1, Fraction(1, 4))
        assert i.left == Fraction(1, 2)
        assert i.right == Fraction(3, 4)

    def test_parent_child_partition(self):
        i = DyadicInterval(4, 11)
        a, b = i.children()
        assert a.parent() == i and b.parent() == i
        assert a.left == i.left and b.right == i.right
        assert a.right == b.left

    def test_containment(self):
        i = DyadicInterval(5, 17)
        assert ROOT.contains_interval(i)
        assert not i.contains_interval(ROOT)
        assert i.contains_interval(i)

    def test_negative_index_trees(self):
        i = DyadicInterval(3, -2)
        assert i.root() == DyadicInterval(0, -1)
        assert i.left == Fraction(-1, 4)

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            ROOT.contains_interval(DyadicInterval(1, 0, Fraction(1, 2)))


class TestBoxGeometry:
    def test_root_center(self):
        assert box_center(ROOT) == 0.5 + 0.75j

    def test_half_interval_center(self):
        assert box_center(DyadicInterval(1, 0)) == 0.25 + 0.375j

    def test_top_membership(self):
        geo = box_geometry(ROOT)
        assert not geo.in_top(0.5 + 0.5j)
        assert geo.in_top(0.5 + 0.6j)
        assert geo.box.contains(0.5 + 0.5j)
        assert not geo.box.contains(0.5 + 1.1j)

    def test_box_areas_halve_per_generation(self):
        for g in range(6):
            i = DyadicInterval(g, 0)
            area = float(i.length) ** 2
            assert area == pytest.approx(4.0**-g)


class TestLocate:
    def test_center_of_top(self):
        assert locate(0.5 + 0.75j) == ROOT

    def test_generation_one(self):
        assert locate(0.25 + 0.3j) == DyadicInterval(1, 0)

    def test_above_root(self):
        assert locate(0.5 + 10.0j) is None

    def test_anchor_height(self):
        # the fattened root top hosts the anchor point
        assert locate(0.5 + 1.5j) == ROOT

    def test_offset_grid(self):
        i = locate(0.5 + 0.2j, Fraction(3, 8))
        assert i is not None
        assert i.offset == Fraction(3, 8)
        assert i.contains_x(0.5)
        ell = float(i.length)
        assert ell / 2 < 0.2 <= ell

    def test_roundtrip_centers(self):
        for g in range(21):
            i = DyadicInterval(g, (1 << g) - 1 if g else 0)
            assert locate(box_center(i)) == i

    def test_roundtrip_random(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            g = int(rng.integers(0, 16))
            j = int(rng.integers(0, 1 << g))
            assert locate(box_center(DyadicInterval(g, j))) == DyadicInterval(g, j)


class TestGenerationCount:
    def test_self(self):
        fam = IntervalFamily.of([ROOT])
        assert generation_count(fam, ROOT, 0) == 1

    def test_full_generation(self):
        fam = IntervalFamily.of([DyadicInterval(2, j) for j in range(4)])
        assert generation_count(fam, ROOT, 2) == 4

    def test_disjoint(self):
        fam = IntervalFamily.of([DyadicInterval(2, 0), DyadicInterval(2, 1)])
        assert generation_count(fam, DyadicInterval(1, 1), 1) == 0


class TestLemma2Cover:
    def test_bound_formula(self):
        report = lemma2_cover(IntervalFamily.of([]), ROOT, 4, 1.0, 0.5)
        assert report.bound == pytest.approx(2.0 / (1.0 - 2.0**-0.5) * 4.0, rel=1e-12)
        assert report.bound == pytest.approx(27.3137084989848, rel=1e-10)

    def test_empty_family_holds(self):
        report = lemma2_cover(IntervalFamily.of([]), ROOT, 5, 1.0, 0.5)
        assert report.count == 0
        assert report.holds
        assert report.hypothesis_ok

    def test_decomposition_is_disjoint_cover(self):
        fam = IntervalFamily.of([DyadicInterval(4, j) for j in (0, 3, 9, 15)])
        report = lemma2_cover(fam, ROOT, 4, 1.0, 0.5)
        # pieces are pairwise disjoint and fill the root interval
        pieces = sorted(report.decomposition, key=lambda i: i.left)
        assert pieces[0].left == ROOT.left
        assert pieces[-1].right == ROOT.right
        for a, b in zip(pieces, pieces[1:]):
            assert a.right == b.left

    def _random_admissible_family(self, rng, m_const, alpha, depth):
        budget = int(m_const * 2.0 ** (alpha * depth) / 2.0)
        count = int(rng.integers(1, max(2, budget)))
        indices = rng.choice(1 << depth, size=min(count, 1 << depth), replace=False)
        return IntervalFamily.of(DyadicInterval(depth, int(j)) for j in indices)

    def test_random_families_obey_bound(self):
        rng = np.random.default_rng(101)
        m_const, alpha, depth = 1.0, 0.5, 8
        accepted = 0
        trials = 0
        while accepted < 200 and trials < 2000:
            trials += 1
            fam = self._random_admissible_family(rng, m_const, alpha, depth)
            if not halving_hypothesis_holds(fam, ROOT, depth, m_const, alpha):
                continue
            accepted += 1
            report = lemma2_cover(fam, ROOT, depth, m_const, alpha)
            assert report.hypothesis_ok
            assert report.count <= report.bound
        assert accepted == 200

    def test_violated_hypothesis_reported_not_fatal(self):
        # every generation-3 interval present: halving fails at small alpha
        fam = IntervalFamily.of([DyadicInterval(3, j) for j in range(8)])
        assert not halving_hypothesis_holds(fam, ROOT, 3, 0.5, 0.3)
        report = lemma2_cover(fam, ROOT, 3, 0.5, 0.3)
        assert not report.hypothesis_ok
        assert report.violations


class TestNestedCenterGap:
    def test_equal_intervals(self):
        assert nested_center_gap(ROOT, ROOT) == pytest.approx(0.0, abs=1e-12)

    def test_left_spine(self):
        for k in range(1, 21):
            gap = nested_center_gap(DyadicInterval(k, 0), ROOT)
            assert abs(gap) <= 2.0

    def test_mid_positioned_chain(self):
        # descend always into the child adjacent to x = 1/2
        for k in range(1, 21):
            i = DyadicInterval(k, (1 << (k - 1)) - 1)
            assert i.right == Fraction(1, 2)
            gap = nested_center_gap(i, ROOT)
            assert abs(gap) <= 2.0

    def test_not_nested(self):
        with pytest.raises(ValueError):
            nested_center_gap(ROOT, DyadicInterval(1, 0))
