"""Instance-level condition tests: separation, splits, density, oracle, witnesses."""

import json
import math

import numpy as np
import pytest

from hypinterp.conditions import (
    DensityParams,
    InterpolationInstance,
    analyze,
    best_split_threshold,
    carleson_intensity,
    compatibility_ratio,
    density_check,
    necessity_witness,
    pick_matrix_psd,
    separation_constant,
    split_two_separated,
)
from hypinterp.geometry import DomainError, Model, beta_disc, beta_halfplane, disc_automorphism


def make_disc_instance(points, values, eps=0.5):
    return InterpolationInstance(tuple(points), tuple(values), eps, Model.DISC)


class TestInstance:
    def test_json_roundtrip(self, tmp_path):
        inst = InterpolationInstance((0.5j, 0.25j), (0.1 + 0.0j, 0.2j), 0.05, Model.HALFPLANE)
        path = tmp_path / "inst.json"
        inst.dump(path)
        again = InterpolationInstance.load(path)
        assert again == inst
        raw = json.loads(path.read_text())
        assert raw["model"] == "halfplane"

    def test_validation(self):
        with pytest.raises(ValueError):
            InterpolationInstance((0.1 + 0.0j, 0.1 + 0.0j), (0j, 0j), 0.1, Model.DISC)
        with pytest.raises(ValueError):
            InterpolationInstance((0.1 + 0.0j,), (1.2 + 0.0j,), 0.1, Model.DISC)
        with pytest.raises(ValueError):
            InterpolationInstance((0.1 + 0.0j,), (0j,), -1.0, Model.DISC)


class TestSeparation:
    def test_vertical_pair(self):
        assert separation_constant([1j, 2j], Model.HALFPLANE) == pytest.approx(0.5, abs=1e-14)

    def test_near_coincident(self):
        d = separation_constant([0.3 + 0.0j, 0.3 + 1e-9 + 0.0j], Model.DISC)
        assert 0.0 < d < 1e-6

    def test_single_point(self):
        assert separation_constant([0.5j], Model.HALFPLANE) == math.inf


class TestTwoSplit:
    def test_three_clique_fails(self):
        pts = [1j, 1.01j, 1.02j]
        delta = 1.0
        split = split_two_separated(pts, Model.HALFPLANE, delta)
        assert not split.ok
        assert len(split.witness_cycle) == 3

    def test_separated_set_one_part(self):
        pts = [1j * 4.0**-k for k in range(5)]
        split = split_two_separated(pts, Model.HALFPLANE, 0.5)
        assert split.ok
        assert split.parts[1] == ()

    def test_interleaved_columns(self):
        col1 = [1j * 2.0**-k for k in range(6)]
        col2 = [1j * 2.0**-k * (1 + 1e-3) for k in range(6)]
        pts = col1 + col2
        intra = beta_halfplane(col1[0], col1[1])
        cross = beta_halfplane(col1[0], col2[0])
        delta = math.sqrt(intra * cross)  # strictly between the two gap scales
        split = split_two_separated(pts, Model.HALFPLANE, delta)
        assert split.ok
        assert split.parts[0] == tuple(range(6))
        assert split.parts[1] == tuple(range(6, 12))
        for part in split.parts:
            sub = [pts[i] for i in part]
            assert separation_constant(sub, Model.HALFPLANE) >= delta

    def test_best_threshold_monotone(self):
        rng = np.random.default_rng(71)
        pts = [complex(x, y) for x, y in zip(rng.uniform(-1, 1, 10), rng.uniform(0.1, 2.0, 10))]
        best = best_split_threshold(pts, Model.HALFPLANE)
        assert best.ok
        # one notch above the found threshold must fail or be the top candidate
        for part in best.parts:
            sub = [pts[i] for i in part]
            if len(sub) >= 2:
                assert separation_constant(sub, Model.HALFPLANE) >= best.delta - 1e-12


class TestDensity:
    def test_single_point_all_forms(self):
        for form in ("disc_count", "dyadic_generation", "radius_count"):
            rep = density_check([0.5 + 0.5j], Model.HALFPLANE, DensityParams(1.0, 0.5), form, 8)
            assert rep.holds, form

    def test_column_fitted_alpha(self):
        pts = [1j * 2.0**-k for k in range(21)]
        rep = density_check(pts, Model.HALFPLANE, DensityParams(4.0, 0.5), "radius_count", 20)
        assert rep.holds
        assert rep.fitted_alpha <= 0.35

    def test_full_grid_fails(self):
        pts = [(j + 0.5) * 2.0**-10 + 0.75j * 2.0**-10 for j in range(1 << 10)]
        rep = density_check(pts, Model.HALFPLANE, DensityParams(4.0, 0.6), "dyadic_generation", 10)
        assert not rep.holds
        assert rep.worst is not None
        assert rep.worst["box_generation"] == 0
        assert rep.worst["count"] == 1 << 10
        assert rep.fitted_alpha > 0.75

    def test_form_equivalence_on_sparse_instances(self):
        # fitted exponents of the box form and the ball form stay close;
        # instances deep enough that the fits are count-driven, not noise
        rng = np.random.default_rng(73)
        for _ in range(50):
            gens = sorted(rng.choice(range(5, 12), size=3, replace=False))
            pts = []
            for g in gens:
                count = max(1, int(2.0 ** (0.6 * g)))
                idx = rng.choice(1 << g, size=min(count, 1 << g), replace=False)
                pts.extend((j + 0.5) * 2.0**-g + 0.75j * 2.0**-g for j in idx)
            pts = list(dict.fromkeys(pts))
            a_box = density_check(pts, Model.HALFPLANE, DensityParams(4.0, 0.6), "dyadic_generation", 12).fitted_alpha
            a_ball = density_check(pts, Model.HALFPLANE, DensityParams(4.0, 0.6), "radius_count", 12).fitted_alpha
            assert abs(a_box - a_ball) <= 0.15


class TestCarleson:
    def test_single_point(self):
        assert carleson_intensity([1j], Model.HALFPLANE) == pytest.approx(1.0)

    def test_column_bounded(self):
        for top in (5, 10, 20):
            pts = [1j * 2.0**-k for k in range(top + 1)]
            assert carleson_intensity(pts, Model.HALFPLANE, 20) <= 2.0

    def test_empty(self):
        assert carleson_intensity([], Model.HALFPLANE) == 0.0


class TestPick:
    def test_identity_values_feasible(self):
        pts = (0.0 + 0.0j, 0.3 + 0.1j, -0.5j)
        inst = make_disc_instance(pts, pts)
        rep = pick_matrix_psd(inst)
        assert rep.feasible

    def test_single_zero_pair(self):
        rep = pick_matrix_psd(make_disc_instance((0.0 + 0.0j,), (0.0 + 0.0j,)))
        assert rep.matrix.shape == (1, 1)
        assert rep.matrix[0, 0] == pytest.approx(1.0)
        assert rep.feasible

    def test_known_infeasible_two_by_two(self):
        inst = make_disc_instance((0.0 + 0.0j, 0.5 + 0.0j), (0.0 + 0.0j, 0.9 + 0.0j))
        rep = pick_matrix_psd(inst)
        assert rep.matrix[1, 1] == pytest.approx(0.19 / 0.75, rel=1e-12)
        # closed form: eigenvalues of [[1, 1], [1, a]] are ((1+a) +- sqrt((1-a)^2+4))/2
        a = 0.19 / 0.75
        lam = ((1 + a) - math.sqrt((1 - a) ** 2 + 4)) / 2
        assert rep.min_eigenvalue == pytest.approx(lam, rel=1e-10)
        assert not rep.feasible
        assert rep.verdict == "infeasible"

    def test_halfplane_transport(self):
        inst = InterpolationInstance((1j, 2j), (0.0 + 0.0j, 0.1 + 0.0j), 0.5, Model.HALFPLANE)
        rep = pick_matrix_psd(inst)
        assert rep.feasible  # tiny values on separated points


class TestCompatibility:
    def test_constant_values(self):
        inst = make_disc_instance((0.0 + 0.0j, 0.5 + 0.0j), (0.2 + 0.0j, 0.2 + 0.0j))
        ratio, _ = compatibility_ratio(inst)
        assert ratio == 0.0

    def test_automorphism_equality_case(self):
        rng = np.random.default_rng(79)
        pts = tuple(complex(x, y) * 0.7 for x, y in zip(rng.uniform(-1, 1, 6), rng.uniform(-1, 1, 6)))
        vals = tuple(disc_automorphism(0.7, 0.3 + 0.2j, z) for z in pts)
        inst = make_disc_instance(pts, vals)
        ratio, _ = compatibility_ratio(inst)
        assert ratio <= 1.0 + 1e-10
        assert ratio >= 1.0 - 1e-10

    def test_two_point_ratio_by_construction(self):
        z = (0.0 + 0.0j, 0.6 + 0.0j)
        target = 0.05 * beta_disc(z[0], z[1])
        # value pair at hyperbolic distance `target` along the real axis
        w1 = math.tanh(target * math.log(2.0) / 2.0)
        inst = make_disc_instance(z, (0.0 + 0.0j, complex(w1)))
        ratio, pair = compatibility_ratio(inst)
        assert ratio == pytest.approx(0.05, rel=1e-10)
        assert pair == (0, 1)


class TestNecessityWitness:
    def _annulus_points(self, n, angles):
        # beta_disc(0, r) = log2((1+r)/(1-r)); invert at beta = n - 1/2
        beta = n - 0.5
        r = (2.0**beta - 1.0) / (2.0**beta + 1.0)
        return [r * complex(math.cos(a), math.sin(a)) for a in angles]

    def test_all_in_one_window(self):
        pts = self._annulus_points(10, [0.0, 0.2, -0.2])
        wit = necessity_witness(pts, 10, 0.5, 0.1)
        assert not wit.degenerate
        assert wit.f2 == ()
        ratio, _ = compatibility_ratio(wit.instance)
        assert ratio == 0.0  # equal values

    def test_two_windows_ratio_bounded(self):
        pts = self._annulus_points(10, [0.0, math.pi])
        wit = necessity_witness(pts, 10, 0.5, 0.1)
        assert not wit.degenerate
        assert len(wit.f1) == 1 and len(wit.f2) == 1
        ratio, _ = compatibility_ratio(wit.instance)
        assert ratio <= 0.1

    def test_empty_host_degenerate(self):
        wit = necessity_witness([], 10, 0.5, 0.1)
        assert wit.degenerate
        assert wit.instance is None

    def test_annulus_validation(self):
        with pytest.raises(DomainError):
            necessity_witness([0.1 + 0.0j], 10, 0.5, 0.1)

    def test_window_boundary_points_dropped(self):
        pts = self._annulus_points(4, [math.pi / 2.0])  # excluded zone near +-pi/2
        wit = necessity_witness(pts, 4, 0.5, 0.1)
        assert wit.degenerate


class TestAnalyze:
    def test_sparse_instance_passes(self):
        pts = tuple((0.5 + 0.75j) * 4.0**-k for k in range(4))
        inst = InterpolationInstance(pts, (0j,) * 4, 0.1, Model.HALFPLANE)
        rep = analyze(inst)
        assert rep.condition_a_ok
        assert rep.condition_b_ok
        assert rep.admissible
        data = rep.to_json()
        assert data["condition_a_ok"] and data["condition_b_ok"]

    def test_cluster_fails_condition_a(self):
        base = 0.5 + 0.5j
        pts = (base, base + 1e-5, base + 2e-5)
        inst = InterpolationInstance(pts, (0j, 0j, 0j), 0.1, Model.HALFPLANE)
        rep = analyze(inst)
        assert not rep.condition_a_ok
        assert rep.split.witness_cycle is not None

    def test_dense_grid_fails_condition_b(self):
        pts = tuple((j + 0.5) * 2.0**-8 + 0.75j * 2.0**-8 for j in range(256))
        inst = InterpolationInstance(pts, (0j,) * 256, 0.1, Model.HALFPLANE)
        rep = analyze(inst, max_generation=8)
        assert not rep.condition_b_ok
        assert rep.density.worst is not None
