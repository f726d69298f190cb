"""Center of mass in the hyperbolic plane by squared-distance minimization.

The minimizer of H(x) = sum_i m_i d(x, y_i)^2 is computed by tangent-space
averaging: atoms are pulled to the tangent space at the current center by
the geodesic log map, averaged euclideanly, and pushed back by exp.  Steps
are halved whenever H fails to decrease.  All iterations run in the disc
with the natural (curvature -1) metric; half-plane data is transported by
the Cayley map, which is an isometry for that metric, and the requested
normalization only enters reported values.  The minimizer itself does not
depend on the normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DomainError,
    Model,
    ModelPoint,
    cayley_to_disc,
    cayley_to_halfplane,
    hyp_distance,
)

_MAX_ITER = 10_000
_DEFAULT_TOL = 1e-10


class ConvergenceError(RuntimeError):
    """The fixed-point iteration did not reach the requested tolerance."""


@dataclass(frozen=True)
class WeightedPointSet:
    atoms: tuple[ModelPoint, ...]
    masses: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.atoms) != len(self.masses):
            raise ValueError("atoms and masses must have equal length")
        if not self.atoms:
            raise ValueError("a weighted point set needs at least one atom")
        model = self.atoms[0].model
        for a in self.atoms:
            if a.model is not model:
                raise ValueError("all atoms must live in one model")
        if any(m <= 0.0 for m in self.masses):
            raise ValueError("masses must be positive")
        total = math.fsum(self.masses)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"masses must sum to 1, got {total}")

    @property
    def model(self) -> Model:
        return self.atoms[0].model

    @classmethod
    def uniform(cls, atoms: list[ModelPoint]) -> "WeightedPointSet":
        n = len(atoms)
        return cls(tuple(atoms), tuple([1.0 / n] * n))


@dataclass(frozen=True)
class BarycenterResult:
    center: ModelPoint
    value: float
    iterations: int
    residual: float


def karcher_value(mu: WeightedPointSet, x: ModelPoint, metric_scale: float = 1.0) -> float:
    """H(x) = sum_i m_i beta(x, y_i)^2 in the model's own normalization."""
    return math.fsum(
        m * (metric_scale * hyp_distance(x, y)) ** 2 for y, m in zip(mu.atoms, mu.masses)
    )


# ---------------------------------------------------------------------------
# batched disc iteration (natural metric)

_ATANH_CLIP = 1.0 - 1e-16


def _log_map(centers: np.ndarray, atoms: np.ndarray) -> np.ndarray:
    """Geodesic log of each atom at its row's center; centers shape (P,1)."""
    u = (atoms - centers) / (1.0 - np.conjugate(centers) * atoms)
    r = np.abs(u)
    scale = np.where(r > 0.0, 2.0 * np.arctanh(np.clip(r, 0.0, _ATANH_CLIP)) / np.where(r > 0.0, r, 1.0), 0.0)
    return scale * u


def _exp_map(centers: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    s = np.abs(vectors)
    u = np.where(s > 0.0, np.tanh(0.5 * s) / np.where(s > 0.0, s, 1.0), 0.0) * vectors
    return (u + centers) / (1.0 + np.conjugate(centers) * u)


def _h_value(centers: np.ndarray, atoms: np.ndarray, masses: np.ndarray) -> np.ndarray:
    rho = np.abs(atoms - centers) / np.abs(1.0 - np.conjugate(centers) * atoms)
    d = 2.0 * np.arctanh(np.clip(rho, 0.0, _ATANH_CLIP))
    return np.sum(masses * d * d, axis=1)


def disc_barycenter_batch(
    atoms: np.ndarray,
    masses: np.ndarray | None = None,
    tol: float = _DEFAULT_TOL,
    max_iter: int = _MAX_ITER,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Barycenters of P rows of disc atoms; returns (centers, residuals, iterations).

    `atoms` has shape (P, m); `masses` is either None (uniform), shape (m,) or
    shape (P, m).  The residual is the norm of the tangent-space mean, i.e. the
    first-variation norm of H in the natural metric.
    """
    atoms = np.asarray(atoms, dtype=complex)
    if atoms.ndim != 2:
        raise ValueError("atoms must be a (P, m) array")
    p, m = atoms.shape
    if masses is None:
        w = np.full((1, m), 1.0 / m)
    else:
        w = np.asarray(masses, dtype=float)
        w = w.reshape(1, m) if w.ndim == 1 else w
    centers = np.sum(w * atoms, axis=1, keepdims=True) / np.sum(w, axis=1, keepdims=True)
    backoff = np.ones((p, 1))
    h_cur = _h_value(centers, atoms, w)
    residual = np.full(p, np.inf)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        logs = _log_map(centers, atoms)
        mean_log = np.sum(w * logs, axis=1, keepdims=True)
        residual = np.abs(mean_log[:, 0])
        active = residual > tol
        if not active.any():
            break
        # The Hessian eigenvalues of half the squared distance to an atom lie
        # in [1, 1 + d]; capping the step at 1/(1 + max distance) keeps the
        # tangent-space iteration a contraction even for spread-out atoms.
        dmax = np.max(np.abs(logs), axis=1, keepdims=True)
        steps = backoff * np.minimum(1.0, 1.0 / (1.0 + dmax))
        candidate = _exp_map(centers, steps * mean_log)
        h_new = _h_value(candidate, atoms, w)
        # H differences drown in rounding once the gradient is tiny; guard
        # against increases only while they are resolvable.
        guarded = residual > 1e-6
        improved = h_new <= h_cur * (1.0 + 1e-12) + 1e-15
        take = active & (improved | ~guarded)
        centers[take] = candidate[take]
        h_cur[take] = h_new[take]
        backoff[(active & guarded & ~improved).reshape(-1, 1)] *= 0.5
    return centers[:, 0], residual, iterations


def barycenter(
    mu: WeightedPointSet,
    tol: float = _DEFAULT_TOL,
    metric_scale: float = 1.0,
    max_iter: int = _MAX_ITER,
) -> BarycenterResult:
    """Minimize H over the model; tolerance applies to the gradient norm.

    `metric_scale` multiplies the metric; the minimizer is unchanged but the
    reported value and the gradient (hence the stopping rule) scale with it.
    """
    if tol <= 0.0:
        raise DomainError("tolerance must be positive")
    model = mu.model
    if model is Model.DISC:
        atoms = np.array([[a.value for a in mu.atoms]], dtype=complex)
    else:
        atoms = np.array([[cayley_to_disc(a.value) for a in mu.atoms]], dtype=complex)
    masses = np.asarray(mu.masses, dtype=float)
    # the gradient scales with metric_scale^2; tighten the natural-metric tol
    nat_tol = tol / (metric_scale * metric_scale)
    centers, residuals, iterations = disc_barycenter_batch(atoms, masses, tol=nat_tol, max_iter=max_iter)
    residual = float(residuals[0]) * metric_scale * metric_scale
    if residual > tol:
        raise ConvergenceError(f"barycenter stalled at residual {residual:.3e} after {iterations} iterations")
    c = centers[0]
    center = ModelPoint(c if model is Model.DISC else cayley_to_halfplane(c), model)
    return BarycenterResult(
        center=center,
        value=karcher_value(mu, center, metric_scale=metric_scale),
        iterations=iterations,
        residual=residual,
    )


# ---------------------------------------------------------------------------
# comparison inequalities


def reshetnyak_slack(y: ModelPoint, y2: ModelPoint, z: ModelPoint, z2: ModelPoint) -> float:
    """Quadrilateral comparison slack (right side minus left side, >= 0 in CAT(0)):

    d(y,z)^2 + d(y2,z2)^2 + 2 d(y,y2) d(z,z2) - d(y,z2)^2 - d(y2,z)^2.
    """
    rhs = hyp_distance(y, z) ** 2 + hyp_distance(y2, z2) ** 2
    rhs += 2.0 * hyp_distance(y, y2) * hyp_distance(z, z2)
    lhs = hyp_distance(y, z2) ** 2 + hyp_distance(y2, z) ** 2
    return rhs - lhs


@dataclass(frozen=True)
class StepMap:
    """Piecewise-constant map from [0, 1) into one model: cells + values."""

    values: tuple[ModelPoint, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.weights):
            raise ValueError("values and weights must have equal length")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ValueError("cell lengths must sum to 1")

    @classmethod
    def uniform(cls, values: list[ModelPoint]) -> "StepMap":
        n = len(values)
        return cls(tuple(values), tuple([1.0 / n] * n))

    def pushforward(self) -> WeightedPointSet:
        return WeightedPointSet(self.values, self.weights)


@dataclass(frozen=True)
class ContractionReport:
    lhs: float
    rhs: float
    ok: bool


def contraction_check(f: StepMap, g: StepMap, tol: float = _DEFAULT_TOL) -> ContractionReport:
    """Check d(c_f, c_g) <= integral of d(f(x), g(x)) for step maps on a common partition."""
    if f.weights != g.weights:
        raise ValueError("step maps must share their partition")
    cf = barycenter(f.pushforward(), tol=tol).center
    cg = barycenter(g.pushforward(), tol=tol).center
    lhs = hyp_distance(cf, cg)
    rhs = math.fsum(w * hyp_distance(a, b) for a, b, w in zip(f.values, g.values, f.weights))
    return ContractionReport(lhs=lhs, rhs=rhs, ok=lhs <= rhs + 10.0 * tol)
