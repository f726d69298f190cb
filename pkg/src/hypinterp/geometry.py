"""Hyperbolic geometry of the unit disc and the upper half plane.

Two distance conventions are used throughout the package and they differ
by a factor of two:

* disc model:        beta(z, w) = log2((1 + rho) / (1 - rho)),
* half-plane model:  beta(z, w) = (1/2) log2((1 + rho) / (1 - rho)),

where rho is the pseudohyperbolic distance of the respective model
(|z - w| / |1 - conj(w) z| in the disc, |z - w| / |z - conj(w)| in the
half plane).  Both are monotone functions of the curvature -1 length
metric d = 2 artanh(rho); internal computations use d and convert at the
interface.  The disc <-> half-plane Cayley map preserves rho, hence
beta_disc(cayley(z), cayley(w)) = 2 * beta_hp(z, w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

LN2 = math.log(2.0)

# atanh argument clamp; points this close to the ideal boundary are
# indistinguishable at double precision anyway.
_RHO_MAX = 1.0 - 1e-16


class ModelMismatchError(ValueError):
    """Two points from different models were combined."""


class DomainError(ValueError):
    """A point lies outside its model's domain, or a parameter is out of range."""


class Model(Enum):
    DISC = "disc"
    HALFPLANE = "halfplane"


@dataclass(frozen=True)
class ModelPoint:
    """A point of the hyperbolic plane tagged with its model."""

    value: complex
    model: Model

    def __post_init__(self) -> None:
        v = complex(self.value)
        if self.model is Model.DISC:
            if abs(v) >= 1.0:
                raise DomainError(f"disc point must satisfy |z| < 1, got {v!r}")
        elif self.model is Model.HALFPLANE:
            if v.imag <= 0.0:
                raise DomainError(f"half-plane point must satisfy Im z > 0, got {v!r}")
        else:  # pragma: no cover - enum exhausts the cases
            raise DomainError(f"unknown model {self.model!r}")


def disc_point(value: complex) -> ModelPoint:
    return ModelPoint(complex(value), Model.DISC)


def halfplane_point(value: complex) -> ModelPoint:
    return ModelPoint(complex(value), Model.HALFPLANE)


def _same_model(a: ModelPoint, b: ModelPoint) -> Model:
    if a.model is not b.model:
        raise ModelMismatchError(f"mixed models: {a.model.value} vs {b.model.value}")
    return a.model


# ---------------------------------------------------------------------------
# pseudohyperbolic and hyperbolic distances


def pseudo_disc(z: complex, w: complex) -> float:
    den = abs(1.0 - w.conjugate() * z)
    if den == 0.0:
        raise DomainError("pseudohyperbolic distance undefined: denominator vanishes")
    return abs(z - w) / den


def pseudo_halfplane(z: complex, w: complex) -> float:
    den = abs(z - w.conjugate())
    if den == 0.0:
        raise DomainError("pseudohyperbolic distance undefined: denominator vanishes")
    return abs(z - w) / den


def pseudo_distance(a: ModelPoint, b: ModelPoint) -> float:
    """Pseudohyperbolic distance rho in [0, 1)."""
    model = _same_model(a, b)
    if model is Model.DISC:
        return pseudo_disc(a.value, b.value)
    return pseudo_halfplane(a.value, b.value)


def natural_from_rho(rho: float) -> float:
    """Curvature -1 length distance from the pseudohyperbolic distance."""
    return 2.0 * math.atanh(min(rho, _RHO_MAX))


def beta_disc(z: complex, w: complex) -> float:
    return natural_from_rho(pseudo_disc(z, w)) / LN2


def beta_halfplane(z: complex, w: complex) -> float:
    return natural_from_rho(pseudo_halfplane(z, w)) / (2.0 * LN2)


def hyp_distance(a: ModelPoint, b: ModelPoint) -> float:
    """Hyperbolic distance in the normalization of the points' model."""
    model = _same_model(a, b)
    if model is Model.DISC:
        return beta_disc(a.value, b.value)
    return beta_halfplane(a.value, b.value)


def beta_scale(model: Model) -> float:
    """Factor converting the natural (curvature -1) distance to the model beta."""
    return 1.0 / LN2 if model is Model.DISC else 1.0 / (2.0 * LN2)


# Vectorized counterparts (used by the counting and audit paths).


def pseudo_disc_arr(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.abs(z - w) / np.abs(1.0 - np.conjugate(w) * z)


def pseudo_halfplane_arr(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.abs(z - w) / np.abs(z - np.conjugate(w))


def beta_disc_arr(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    rho = np.clip(pseudo_disc_arr(z, w), 0.0, _RHO_MAX)
    return 2.0 * np.arctanh(rho) / LN2


def beta_halfplane_arr(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    rho = np.clip(pseudo_halfplane_arr(z, w), 0.0, _RHO_MAX)
    return np.arctanh(rho) / LN2


def beta_arr(z: np.ndarray, w: np.ndarray, model: Model) -> np.ndarray:
    if model is Model.DISC:
        return beta_disc_arr(z, w)
    return beta_halfplane_arr(z, w)


# ---------------------------------------------------------------------------
# Cayley transport


def cayley_to_disc(z: complex) -> complex:
    return (z - 1j) / (z + 1j)


def cayley_to_halfplane(w: complex) -> complex:
    return 1j * (1.0 + w) / (1.0 - w)


def cayley(p: ModelPoint) -> ModelPoint:
    """Conformal transport between the two models.

    rho is preserved, so beta_disc of the images equals 2 * beta_hp of the
    preimages.
    """
    if p.model is Model.HALFPLANE:
        return disc_point(cayley_to_disc(p.value))
    return halfplane_point(cayley_to_halfplane(p.value))


# ---------------------------------------------------------------------------
# Moebius maps of the disc, geodesics, exp/log at a base point


def mobius_to_origin(a: complex, z: complex) -> complex:
    """The disc automorphism z -> (z - a) / (1 - conj(a) z), sending a to 0."""
    return (z - a) / (1.0 - a.conjugate() * z)


def mobius_from_origin(a: complex, w: complex) -> complex:
    """Inverse of :func:`mobius_to_origin`."""
    return (w + a) / (1.0 + a.conjugate() * w)


def disc_automorphism(theta: float, a: complex, z: complex) -> complex:
    """General orientation-preserving automorphism e^{i theta} (z - a)/(1 - conj(a) z)."""
    return complex(math.cos(theta), math.sin(theta)) * mobius_to_origin(a, z)


def disc_log(base: complex, y: complex) -> complex:
    """Tangent vector at `base` whose geodesic reaches y at natural time 1."""
    u = mobius_to_origin(base, y)
    r = abs(u)
    if r == 0.0:
        return 0.0 + 0.0j
    return (2.0 * math.atanh(min(r, _RHO_MAX)) / r) * u


def disc_exp(base: complex, v: complex) -> complex:
    """Inverse of :func:`disc_log`."""
    s = abs(v)
    if s == 0.0:
        return base
    u = math.tanh(0.5 * s) / s * v
    return mobius_from_origin(base, u)


def disc_geodesic(a: complex, b: complex, s: float) -> complex:
    u = mobius_to_origin(a, b)
    r = abs(u)
    if r == 0.0:
        return a
    rs = math.tanh(s * math.atanh(min(r, _RHO_MAX)))
    return mobius_from_origin(a, rs / r * u)


def geodesic_interpolate(a: ModelPoint, b: ModelPoint, s: float) -> ModelPoint:
    """Constant-speed geodesic point: hyp_distance(a, result) = s * hyp_distance(a, b)."""
    model = _same_model(a, b)
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"geodesic parameter must lie in [0, 1], got {s}")
    if model is Model.DISC:
        return disc_point(disc_geodesic(a.value, b.value, s))
    za = cayley_to_disc(a.value)
    zb = cayley_to_disc(b.value)
    return halfplane_point(cayley_to_halfplane(disc_geodesic(za, zb, s)))


# ---------------------------------------------------------------------------
# Hyperbolic area (curvature -1, area density 4 (1-|z|^2)^{-2})


def hyperbolic_area_disc(r: float) -> float:
    """Area of the euclidean disc D(0, r) in the curvature -1 metric: 4 pi r^2/(1-r^2)."""
    if not 0.0 < r < 1.0:
        raise DomainError(f"radius must lie in (0, 1), got {r}")
    return 4.0 * math.pi * r * r / (1.0 - r * r)


def hyperbolic_ball_area(beta_radius: float, model: Model) -> float:
    """Area of a hyperbolic ball of the given radius in the model's beta units."""
    if beta_radius <= 0.0:
        raise DomainError("radius must be positive")
    half_nat = 0.5 * beta_radius / beta_scale(model)
    return 4.0 * math.pi * math.sinh(half_nat) ** 2


# ---------------------------------------------------------------------------
# Boundary arcs and non-tangential projections


@dataclass(frozen=True)
class CircleArc:
    """Arc of the unit circle given by center angle and angular half width."""

    center: float
    half_width: float

    def __post_init__(self) -> None:
        if not 0.0 < self.half_width <= math.pi:
            raise DomainError(f"half width must lie in (0, pi], got {self.half_width}")

    @property
    def normalized_length(self) -> float:
        """Arc length as a fraction of the half circle, in (0, 1]."""
        return self.half_width / math.pi

    def contains(self, angle: float) -> bool:
        d = math.remainder(angle - self.center, 2.0 * math.pi)
        return abs(d) <= self.half_width


def stolz_projection(points: list[ModelPoint], aperture: float) -> list[CircleArc]:
    """Boundary shadow of each point under aperture-M non-tangential cones.

    For a disc point z the arc is {xi on the circle : |z - xi| < M (1 - |z|)};
    it is never empty for |z| < 1 and M > 1 (the nearest boundary point always
    qualifies).
    """
    if aperture <= 1.0:
        raise DomainError(f"aperture must exceed 1, got {aperture}")
    arcs: list[CircleArc] = []
    for p in points:
        if p.model is not Model.DISC:
            raise ModelMismatchError("stolz_projection expects disc points")
        z = p.value
        r = abs(z)
        limit = aperture * (1.0 - r)
        if r < 1e-12:
            # |z - xi| = 1 + O(r) < M for every xi.
            arcs.append(CircleArc(center=0.0, half_width=math.pi))
            continue
        # |z - e^{i t}|^2 = 1 + r^2 - 2 r cos(t - arg z) < limit^2
        c = (1.0 + r * r - limit * limit) / (2.0 * r)
        if c <= -1.0:
            half = math.pi
        else:
            # c >= 1 cannot happen: the nearest boundary point is at distance
            # 1 - r < limit.
            half = math.acos(min(c, 1.0))
        arcs.append(CircleArc(center=math.atan2(z.imag, z.real), half_width=half))
    return arcs
