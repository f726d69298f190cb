"""Decidable conditions on finite interpolation instances.

Covers the separation two-split, the three finite density forms, Carleson
intensity, the positive-semidefiniteness oracle for plain interpolation by
functions of sup norm at most one, the compatibility ratio, and the
stress-test witness instances built from two antipodal boundary windows.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import (
    DomainError,
    Model,
    ModelPoint,
    beta_arr,
    beta_disc,
    beta_scale,
    hyp_distance,
    hyperbolic_ball_area,
)

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class InterpolationInstance:
    points: tuple[complex, ...]
    values: tuple[complex, ...]
    epsilon: float
    model: Model

    def __post_init__(self) -> None:
        if len(self.points) != len(self.values):
            raise ValueError("points and values must have equal length")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if len(set(self.points)) != len(self.points):
            raise ValueError("points must be distinct")
        for z in self.points:
            ModelPoint(z, self.model)  # domain validation
        for w in self.values:
            if abs(w) >= 1.0:
                raise ValueError(f"values must lie strictly inside the unit disc, got {w!r}")

    def __len__(self) -> int:
        return len(self.points)

    def model_points(self) -> list[ModelPoint]:
        return [ModelPoint(z, self.model) for z in self.points]

    def to_json(self) -> dict:
        return {
            "model": self.model.value,
            "points": [[z.real, z.imag] for z in self.points],
            "values": [[w.real, w.imag] for w in self.values],
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_json(cls, data: dict) -> "InterpolationInstance":
        try:
            model = Model(data["model"])
            points = tuple(complex(p[0], p[1]) for p in data["points"])
            values = tuple(complex(w[0], w[1]) for w in data["values"])
            epsilon = float(data["epsilon"])
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"malformed instance object: {exc}") from exc
        return cls(points, values, epsilon, model)

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "InterpolationInstance":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _beta_matrix(points: Sequence[complex], model: Model) -> np.ndarray:
    z = np.asarray(points, dtype=complex)
    return beta_arr(z[:, None], z[None, :], model)


def separation_constant(points: Sequence[complex], model: Model) -> float:
    """Smallest pairwise distance in the model's normalization; +inf below 2 points."""
    if len(points) < 2:
        return math.inf
    b = _beta_matrix(points, model)
    n = len(points)
    return float(np.min(b[np.triu_indices(n, k=1)]))


# ---------------------------------------------------------------------------
# two-split by proximity-graph two-coloring


@dataclass(frozen=True)
class TwoSplit:
    delta: float
    parts: Optional[tuple[tuple[int, ...], tuple[int, ...]]]
    witness_cycle: Optional[tuple[int, ...]]

    @property
    def ok(self) -> bool:
        return self.parts is not None


def split_two_separated(points: Sequence[complex], model: Model, delta: float) -> TwoSplit:
    """Two-color the graph with edges beta < delta.

    On success each part is delta-separated by construction (no intra-part
    edges).  On failure the returned witness is an odd cycle; a length-3
    cycle is a 3-clique of pairwise delta-close points.
    """
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    n = len(points)
    if n == 0:
        return TwoSplit(delta, ((), ()), None)
    b = _beta_matrix(points, model)
    adjacency = [[j for j in range(n) if j != i and b[i, j] < delta] for i in range(n)]
    color = [-1] * n
    parent = [-1] * n
    for root in range(n):
        if color[root] != -1:
            continue
        color[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    parent[v] = u
                    queue.append(v)
                elif color[v] == color[u]:
                    cycle = _odd_cycle(u, v, parent)
                    return TwoSplit(delta, None, tuple(cycle))
    part0 = tuple(i for i in range(n) if color[i] == 0)
    part1 = tuple(i for i in range(n) if color[i] == 1)
    return TwoSplit(delta, (part0, part1), None)


def _odd_cycle(u: int, v: int, parent: list[int]) -> list[int]:
    path_u, path_v = [u], [v]
    seen = {u: 0}
    x = u
    while parent[x] != -1:
        x = parent[x]
        seen[x] = len(path_u)
        path_u.append(x)
    x = v
    while x not in seen:
        x = parent[x]
        path_v.append(x)
    meet = seen[x]
    return path_u[: meet + 1] + path_v[::-1][1:]


def best_split_threshold(points: Sequence[complex], model: Model) -> TwoSplit:
    """Largest proximity threshold at which the graph is still bipartite.

    Candidate thresholds are the sorted pairwise distances (+infinity); adding
    edges never restores bipartiteness, so binary search applies.
    """
    n = len(points)
    if n < 2:
        return TwoSplit(math.inf, (tuple(range(n)), ()), None)
    b = _beta_matrix(points, model)
    distances = sorted(set(float(b[i, j]) for i in range(n) for j in range(i + 1, n)))
    candidates = distances + [math.inf]
    lo, hi = 0, len(candidates) - 1
    # candidates[0] (the minimum distance) yields an edgeless graph: bipartite.
    best = split_two_separated(points, model, candidates[0])
    while lo < hi:
        mid = (lo + hi + 1) // 2
        attempt = split_two_separated(points, model, candidates[mid])
        if attempt.ok:
            best = attempt
            lo = mid
        else:
            hi = mid - 1
    return best


# ---------------------------------------------------------------------------
# density forms


@dataclass(frozen=True)
class DensityParams:
    m_const: float
    alpha: float

    def __post_init__(self) -> None:
        if self.m_const <= 0.0:
            raise ValueError("m_const must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")


@dataclass
class DensityReport:
    form: str
    holds: bool
    fitted_alpha: float
    fitted_m: float
    worst: Optional[dict] = None


def _height(points: np.ndarray, model: Model) -> np.ndarray:
    if model is Model.HALFPLANE:
        return points.imag.copy()
    return 1.0 - np.abs(points)


def _grid_centers(points: Sequence[complex], model: Model, max_generation: int) -> np.ndarray:
    """Dyadic box centers covering the instance, generations 0..max_generation."""
    centers: list[complex] = []
    if model is Model.HALFPLANE:
        xs = [z.real for z in points]
        lo, hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
        for g in range(max_generation + 1):
            ell = 2.0**-g
            j0 = math.floor(lo / ell)
            j1 = math.floor(hi / ell)
            span = j1 - j0 + 1
            if span * (2.0 ** min(g, 30)) > 1 << 22:  # safety valve, never hit at desk scale
                break
            centers.extend((j + 0.5) * ell + 0.75j * ell for j in range(j0, j1 + 1))
    else:
        for g in range(max_generation + 1):
            r = 1.0 - 2.0**-g
            if r == 0.0:
                centers.append(0.0 + 0.0j)
                continue
            count = 1 << g
            angles = (_TWO_PI * (np.arange(count) + 0.5)) / count
            centers.extend(r * np.exp(1j * angles))
    return np.asarray(centers, dtype=complex)


def density_check(
    points: Sequence[complex],
    model: Model,
    params: DensityParams,
    form: str = "dyadic_generation",
    max_generation: int = 12,
) -> DensityReport:
    """Exhaustive finite check of one density form.

    Forms:
      * ``disc_count``: over centers (the points plus dyadic box centers up to
        the generation bound) and integer radii, the count inside a hyperbolic
        ball of area A >= M must not exceed A^alpha.
      * ``dyadic_generation``: per dyadic box Q and band n, the number of
        points in Q at heights in (2^{-n-1} l(Q), 2^{-n} l(Q)] must not exceed
        M 2^{alpha n}.
      * ``radius_count``: counts in balls of integer radius n must not exceed
        M 2^{alpha n}.  Radii are measured in the disc normalization in both
        models so that the fitted alpha is comparable across forms.

    Reports the minimal alpha making the form hold at the given M and vice
    versa, with the worst witness.
    """
    if max_generation < 1:
        raise ValueError("max_generation must be at least 1")
    pts = np.asarray(points, dtype=complex)
    n_pts = len(pts)
    report = DensityReport(form=form, holds=True, fitted_alpha=0.0, fitted_m=0.0)
    if n_pts == 0:
        return report
    m_const, alpha = params.m_const, params.alpha

    if form in ("disc_count", "radius_count"):
        centers = np.concatenate([pts, _grid_centers(points, model, max_generation)])
        b = beta_arr(centers[:, None], pts[None, :], model)
        # radii in the disc normalization regardless of model
        scale = beta_scale(model) / beta_scale(Model.DISC)
        worst_alpha, worst_m = 0.0, 0.0
        for radius in range(1, max_generation + 1):
            counts = np.sum(b <= radius * scale + 1e-12, axis=1)
            top = int(np.max(counts))
            idx = int(np.argmax(counts))
            if form == "radius_count":
                allowed = m_const * 2.0**(alpha * radius)
                fit_a = math.log2(top / m_const) / radius if top > m_const else 0.0
                fit_m = top / 2.0 ** (alpha * radius)
            else:
                area = hyperbolic_ball_area(radius * scale, model)
                if area < m_const:
                    continue
                allowed = area**alpha
                fit_a = math.log(top) / math.log(area) if top > 1 and area > 2.0 else 0.0
                fit_m = 0.0  # the area form has no multiplicative constant
            if top > allowed and report.holds:
                report.holds = False
                report.worst = {
                    "center": [centers[idx].real, centers[idx].imag],
                    "radius": radius,
                    "count": top,
                    "allowed": allowed,
                }
            worst_alpha = max(worst_alpha, fit_a)
            worst_m = max(worst_m, fit_m)
        report.fitted_alpha = worst_alpha
        report.fitted_m = worst_m
        return report

    if form != "dyadic_generation":
        raise ValueError(f"unknown density form {form!r}")

    heights = _height(pts, model)
    coords = pts.real if model is Model.HALFPLANE else np.angle(pts) % _TWO_PI
    width = 1.0 if model is Model.HALFPLANE else _TWO_PI
    worst_alpha, worst_m = 0.0, 0.0
    for g in range(max_generation + 1):
        ell_coord = width * 2.0**-g
        ell = 2.0**-g
        buckets: dict[int, list[int]] = defaultdict(list)
        for i in range(n_pts):
            buckets[math.floor(coords[i] / ell_coord)].append(i)
        for box_index, members in buckets.items():
            h = heights[members]
            inside = h <= ell + 1e-15
            for n in range(0, max_generation - g + 1):
                band = inside & (h > ell * 2.0 ** (-n - 1)) & (h <= ell * 2.0**-n + 1e-15)
                count = int(np.sum(band))
                if count == 0:
                    continue
                allowed = m_const * 2.0 ** (alpha * n)
                if count > allowed and report.holds:
                    report.holds = False
                    report.worst = {
                        "box_generation": g,
                        "box_index": box_index,
                        "band": n,
                        "count": count,
                        "allowed": allowed,
                    }
                if n >= 1 and count > m_const:
                    worst_alpha = max(worst_alpha, math.log2(count / m_const) / n)
                worst_m = max(worst_m, count / 2.0 ** (alpha * n))
    report.fitted_alpha = worst_alpha
    report.fitted_m = worst_m
    return report


def carleson_intensity(points: Sequence[complex], model: Model, max_generation: int = 12) -> float:
    """sup over dyadic boxes of (sum of point heights in the box) / box length."""
    if len(points) == 0:
        return 0.0
    pts = np.asarray(points, dtype=complex)
    heights = _height(pts, model)
    coords = pts.real if model is Model.HALFPLANE else np.angle(pts) % _TWO_PI
    width = 1.0 if model is Model.HALFPLANE else _TWO_PI
    best = 0.0
    for g in range(max_generation + 1):
        ell_coord = width * 2.0**-g
        ell = 2.0**-g
        sums: dict[int, float] = defaultdict(float)
        for x, h in zip(coords, heights):
            if h <= ell + 1e-15:
                sums[math.floor(x / ell_coord)] += h
        if sums:
            best = max(best, max(sums.values()) / ell)
    return best


# ---------------------------------------------------------------------------
# positive-semidefiniteness oracle


@dataclass
class PickReport:
    matrix: np.ndarray
    min_eigenvalue: float
    feasible: bool
    verdict: str  # "feasible" | "infeasible" | "marginal"


def pick_matrix_psd(instance: InterpolationInstance, tol_eig: float = 1e-9) -> PickReport:
    """Matrix ((1 - w_i conj(w_j)) / (1 - z_i conj(z_j))) and its minimum eigenvalue.

    Half-plane instances are transported to the disc first (values are disc
    data already).  Feasibility of plain sup-norm-1 interpolation is
    equivalent to this matrix being positive semidefinite.
    """
    z = np.asarray(instance.points, dtype=complex)
    if instance.model is Model.HALFPLANE:
        z = (z - 1j) / (z + 1j)
    w = np.asarray(instance.values, dtype=complex)
    numer = 1.0 - w[:, None] * np.conjugate(w[None, :])
    denom = 1.0 - z[:, None] * np.conjugate(z[None, :])
    matrix = numer / denom
    eigs = np.linalg.eigvalsh(matrix)
    min_eig = float(eigs[0])
    if abs(min_eig) < tol_eig:
        verdict = "marginal"
    elif min_eig >= 0.0:
        verdict = "feasible"
    else:
        verdict = "infeasible"
    return PickReport(matrix=matrix, min_eigenvalue=min_eig, feasible=min_eig >= -tol_eig, verdict=verdict)


# ---------------------------------------------------------------------------
# compatibility ratio


def compatibility_ratio(instance: InterpolationInstance) -> tuple[float, Optional[tuple[int, int]]]:
    """max over pairs of beta_disc(w_i, w_j) / beta_model(z_i, z_j), with the arg pair."""
    n = len(instance)
    if n < 2:
        return 0.0, None
    z = np.asarray(instance.points, dtype=complex)
    w = np.asarray(instance.values, dtype=complex)
    bz = beta_arr(z[:, None], z[None, :], instance.model)
    bw = beta_arr(w[:, None], w[None, :], Model.DISC)
    iu = np.triu_indices(n, k=1)
    ratios = bw[iu] / bz[iu]
    k = int(np.argmax(ratios))
    return float(ratios[k]), (int(iu[0][k]), int(iu[1][k]))


# ---------------------------------------------------------------------------
# stress-test witness instances


@dataclass
class WitnessInstance:
    instance: Optional[InterpolationInstance]
    c_used: float
    degenerate: bool
    f1: tuple[int, ...]
    f2: tuple[int, ...]


def necessity_witness(
    host_points: Sequence[complex],
    n: int,
    gamma: float,
    epsilon: float,
    annulus_tol: float = 1e-9,
) -> WitnessInstance:
    """Assign extreme +/- values on two antipodal angular windows of an annulus.

    Host points must satisfy n-1 < beta(0, z) <= n (disc normalization).  The
    window half-opening is pi/2 - 2^{-n gamma}; points outside both windows
    are dropped.  The value magnitude 1 - 2^{-c epsilon gamma n} is tuned by
    halving c until the compatibility ratio is at most epsilon.
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError("gamma must lie in (0, 1)")
    if n < 1:
        raise DomainError("n must be a positive integer")
    for z in host_points:
        b = beta_disc(0.0 + 0.0j, complex(z))
        if not (n - 1 - annulus_tol < b <= n + annulus_tol):
            raise DomainError(f"host point {z!r} outside the annulus (beta = {b:.6f})")
    window = math.pi / 2.0 - 2.0 ** (-n * gamma)
    f1: list[int] = []
    f2: list[int] = []
    for i, z in enumerate(host_points):
        a = math.atan2(complex(z).imag, complex(z).real)
        if abs(a) < window:
            f1.append(i)
        elif abs(math.remainder(a - math.pi, _TWO_PI)) < window:
            f2.append(i)
    chosen = f1 + f2
    if not chosen:
        return WitnessInstance(None, 0.0, True, tuple(f1), tuple(f2))
    c = 1.0
    for _ in range(80):
        magnitude = 1.0 - 2.0 ** (-c * epsilon * gamma * n)
        if magnitude <= 0.0:
            break
        points = tuple(complex(host_points[i]) for i in chosen)
        values = tuple(
            complex(magnitude) if i in set(f1) else complex(-magnitude) for i in chosen
        )
        candidate = InterpolationInstance(points, values, epsilon, Model.DISC)
        ratio, _ = compatibility_ratio(candidate)
        if ratio <= epsilon:
            return WitnessInstance(candidate, c, False, tuple(f1), tuple(f2))
        c *= 0.5
    # c collapsed: emit the degenerate all-but-flat instance
    return WitnessInstance(None, c, True, tuple(f1), tuple(f2))


# ---------------------------------------------------------------------------
# aggregated analysis


@dataclass
class AnalysisReport:
    separation: float
    separation_flagged: bool
    split: TwoSplit
    condition_a_ok: bool
    density: DensityReport
    condition_b_ok: bool
    carleson: float
    compatibility: float
    worst_pair: Optional[tuple[int, int]]
    admissible: bool
    pick: PickReport

    def to_json(self) -> dict:
        return {
            "separation": self.separation,
            "separation_flagged": self.separation_flagged,
            "split_delta": self.split.delta,
            "split_parts": list(map(list, self.split.parts)) if self.split.parts else None,
            "split_witness": list(self.split.witness_cycle) if self.split.witness_cycle else None,
            "condition_a_ok": self.condition_a_ok,
            "density_form": self.density.form,
            "density_holds": self.density.holds,
            "density_fitted_alpha": self.density.fitted_alpha,
            "density_fitted_m": self.density.fitted_m,
            "density_worst": self.density.worst,
            "condition_b_ok": self.condition_b_ok,
            "carleson": self.carleson,
            "compatibility": self.compatibility,
            "worst_pair": list(self.worst_pair) if self.worst_pair else None,
            "admissible": self.admissible,
            "pick_min_eigenvalue": self.pick.min_eigenvalue,
            "pick_verdict": self.pick.verdict,
        }


def analyze(
    instance: InterpolationInstance,
    density_params: DensityParams = DensityParams(4.0, 0.7),
    max_generation: int = 12,
    min_split_separation: float = 1e-3,
    tol_eig: float = 1e-9,
) -> AnalysisReport:
    points = instance.points
    model = instance.model
    sep = separation_constant(points, model)
    flagged = len(points) < 2
    split = best_split_threshold(points, model)
    cond_a = split.ok and split.delta >= min_split_separation
    if not cond_a and split.ok:
        # surface the blocking structure at the floor threshold
        split = split_two_separated(points, model, min_split_separation)
        cond_a = split.ok
    density = density_check(points, model, density_params, "dyadic_generation", max_generation)
    carleson = carleson_intensity(points, model, max_generation)
    ratio, pair = compatibility_ratio(instance)
    pick = pick_matrix_psd(instance, tol_eig)
    return AnalysisReport(
        separation=sep,
        separation_flagged=flagged,
        split=split,
        condition_a_ok=cond_a,
        density=density,
        condition_b_ok=density.holds,
        carleson=carleson,
        compatibility=ratio,
        worst_pair=pair,
        admissible=ratio <= instance.epsilon,
        pick=pick,
    )
