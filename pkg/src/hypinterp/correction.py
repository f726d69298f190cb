"""Analytic machinery: Poisson integrals, BMO, outer functions, Blaschke
products and an explicit kernel solver for the d-bar equation.

Boundary data comes in two exact flavors: piecewise-linear through samples
(with a constant tail) and piecewise-constant on explicit pieces.  All the
integrals against the Cauchy and Poisson kernels are then evaluated in
closed form segment by segment; no quadrature error enters beyond rounding.

The d-bar solver integrates

    b(z) = (-2i/pi) * sum  (Im xi) F(xi) / ((xi - z)(z - conj(xi))) K(xi, z) dA

over cell samples of F, where log K integrates i/(xi - conj(w)) - i/(z -
conj(w)) against |F| dA over the rows strictly below Im xi.  The exponent
kernels have no singularity in the closed upper half plane, so they are
evaluated against block-coarsened sources; the singular main kernel keeps
the full cell resolution plus an adaptive subdivision of cells close to the
target, with an integrable-kernel bound recorded for the excluded core.

The -2i factor normalizes the kernel so that d-bar b = F holds exactly: near
xi = z the kernel is -2i (Im xi)/((xi-z)(z - conj xi)) ~ -1/(xi - z), whose
d-bar in z is pi times a point mass.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .geometry import DomainError


# ---------------------------------------------------------------------------
# boundary data


@dataclass
class BoundaryFunction:
    """Piecewise-linear real function through samples, constant tails."""

    x: np.ndarray
    values: np.ndarray
    tail: float = 0.0

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x.ndim != 1 or self.x.shape != self.values.shape:
            raise ValueError("samples must be two equal-length 1-d arrays")
        if len(self.x) < 2:
            raise ValueError("need at least two samples")
        if np.any(np.diff(self.x) <= 0.0):
            raise ValueError("sample positions must be strictly increasing")

    def __call__(self, t: float) -> float:
        if t < self.x[0] or t > self.x[-1]:
            return self.tail
        return float(np.interp(t, self.x, self.values))

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        out = np.interp(ts, self.x, self.values)
        return np.where((ts < self.x[0]) | (ts > self.x[-1]), self.tail, out)


@dataclass
class StepBoundary:
    """Piecewise-constant function on edges[k]..edges[k+1], constant tail."""

    edges: np.ndarray
    values: np.ndarray
    tail: float = 0.0

    def __post_init__(self) -> None:
        self.edges = np.asarray(self.edges, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.edges) != len(self.values) + 1:
            raise ValueError("need one more edge than piece values")
        if np.any(np.diff(self.edges) <= 0.0):
            raise ValueError("edges must be strictly increasing")

    def __call__(self, t: float) -> float:
        if t < self.edges[0] or t >= self.edges[-1]:
            return self.tail
        k = int(np.searchsorted(self.edges, t, side="right")) - 1
        return float(self.values[min(k, len(self.values) - 1)])

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        k = np.clip(np.searchsorted(self.edges, ts, side="right") - 1, 0, len(self.values) - 1)
        out = self.values[k]
        return np.where((ts < self.edges[0]) | (ts >= self.edges[-1]), self.tail, out)


Boundary = Union[BoundaryFunction, StepBoundary]


def _linear_segments(u: BoundaryFunction) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-segment (x1, x2, slope, intercept) of the piecewise-linear part."""
    x1, x2 = u.x[:-1], u.x[1:]
    v1, v2 = u.values[:-1], u.values[1:]
    slope = (v2 - v1) / (x2 - x1)
    intercept = v1 - slope * x1
    return x1, x2, slope, intercept


def poisson_integral(u: Boundary, z: complex) -> float:
    """Harmonic extension of u at z (Im z > 0), exact per segment.

    The tail constant contributes through the complementary kernel mass, so
    the result is the Poisson integral of the full boundary function.
    """
    a, b = z.real, z.imag
    if b <= 0.0:
        raise DomainError("the Poisson integral needs Im z > 0")
    if isinstance(u, StepBoundary):
        lo, hi = u.edges[0], u.edges[-1]
        t1 = np.arctan((u.edges[:-1] - a) / b)
        t2 = np.arctan((u.edges[1:] - a) / b)
        inner = float(np.sum(u.values * (t2 - t1))) / math.pi
    else:
        lo, hi = u.x[0], u.x[-1]
        x1, x2, al, be = _linear_segments(u)
        u1, u2 = x1 - a, x2 - a
        log_part = 0.5 * al * np.log((u2 * u2 + b * b) / (u1 * u1 + b * b))
        atan_part = (al * a + be) * (np.arctan(u2 / b) - np.arctan(u1 / b)) / b
        inner = float(np.sum(b * (log_part + atan_part))) / math.pi
    covered = (math.atan((hi - a) / b) - math.atan((lo - a) / b)) / math.pi
    return inner + u.tail * (1.0 - covered)


def bmo_norm(u: Boundary, max_generation: int = 12, nodes: int = 64) -> float:
    """Mean-oscillation sup over dyadic intervals and their half translates.

    Scales run from 2^{-max_generation} up to twice the sample support, with
    a floor at the data's own resolution (finer intervals see essentially
    linear data).  Each interval is probed at `nodes` points, so the value
    carries sampling accuracy, which suffices for its diagnostic role.
    """
    if isinstance(u, StepBoundary):
        lo, hi = float(u.edges[0]), float(u.edges[-1])
        spacing = float(np.min(np.diff(u.edges)))
    else:
        lo, hi = float(u.x[0]), float(u.x[-1])
        spacing = float(np.min(np.diff(u.x)))
    width = hi - lo
    k_floor = max(-max_generation, int(math.floor(math.log2(max(spacing, 1e-300)))))
    k_top = max(k_floor + 1, int(math.ceil(math.log2(max(width, 1e-12)))) + 1)
    offsets = (np.arange(nodes) + 0.5) / nodes
    best = 0.0
    for k in range(k_floor, k_top + 1):
        s = 2.0**k
        j0 = math.floor(lo / s) - 1
        j1 = math.floor(hi / s) + 1
        lefts = np.concatenate(
            [np.arange(j0, j1 + 1) * s, np.arange(j0, j1 + 1) * s + 0.5 * s]
        )
        ts = lefts[:, None] + offsets[None, :] * s
        vals = u.eval_many(ts.ravel()).reshape(ts.shape)
        means = np.mean(vals, axis=1, keepdims=True)
        osc = np.mean(np.abs(vals - means), axis=1)
        best = max(best, float(np.max(osc)))
    return best


# ---------------------------------------------------------------------------
# outer functions


def _log_data(h: Boundary) -> None:
    vals = h.values
    if np.any(vals <= 0.0):
        raise DomainError("outer data must be strictly positive")
    if h.tail != 1.0:
        raise DomainError("outer data must equal 1 off its support")


def outer_many(h: Boundary, targets: np.ndarray) -> np.ndarray:
    """Outer function with boundary modulus h at upper half-plane targets.

    E(z) = exp((1/pi) * integral of -i log h(x) / (x - z) dx); the real part
    of the exponent is the Poisson integral of log h, so |E| = exp(P_z(log h)).
    Requires h -> 1 off the sampled support (tail exactly 1), which makes
    log h compactly supported.  Step data integrates exactly; sampled data
    interpolates log h linearly between samples.
    """
    _log_data(h)
    targets = np.asarray(targets, dtype=complex)
    if np.any(targets.imag <= 0.0):
        raise DomainError("outer evaluation needs Im z > 0")
    flat = targets.ravel()
    out = np.empty(len(flat), dtype=complex)
    if isinstance(h, StepBoundary):
        ell = np.log(h.values)
        e1, e2 = h.edges[:-1], h.edges[1:]
        for i, z in enumerate(flat):
            logs = np.log(e2 - z) - np.log(e1 - z)
            out[i] = np.exp(-1j * np.sum(ell * logs) / math.pi)
    else:
        ell = BoundaryFunction(h.x, np.log(h.values), 0.0)
        x1, x2, al, be = _linear_segments(ell)
        for i, z in enumerate(flat):
            logs = np.log(x2 - z) - np.log(x1 - z)
            seg = al * (x2 - x1) + (al * z + be) * logs
            out[i] = np.exp(-1j * np.sum(seg) / math.pi)
    return out.reshape(targets.shape)


def outer_function(h: Boundary, z: complex) -> complex:
    return complex(outer_many(h, np.array([z]))[0])


# ---------------------------------------------------------------------------
# Blaschke products


def blaschke_many(zeros: Sequence[complex], targets: np.ndarray) -> np.ndarray:
    """Finite product of (z - z_k) / (z - conj(z_k)); modulus 1 on the axis."""
    targets = np.asarray(targets, dtype=complex)
    out = np.ones(targets.shape, dtype=complex)
    for zk in zeros:
        zk = complex(zk)
        if zk.imag <= 0.0:
            raise DomainError("Blaschke zeros must lie in the upper half plane")
        out = out * (targets - zk) / (targets - zk.conjugate())
    return out


def blaschke(zeros: Sequence[complex], z: complex) -> complex:
    return complex(blaschke_many(zeros, np.array([z]))[0])


# ---------------------------------------------------------------------------
# grid container


@dataclass
class GridFunction:
    """Uniform cell-centered grid on [x0, x1] x (y0, y1] with complex samples."""

    x0: float
    x1: float
    nx: int
    y0: float
    y1: float
    ny: int
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.ny, self.nx):
            raise ValueError(f"values must have shape (ny, nx) = {(self.ny, self.nx)}")
        if not (self.x1 > self.x0 and self.y1 > self.y0 >= 0.0):
            raise ValueError("degenerate grid ranges")

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def dy(self) -> float:
        return (self.y1 - self.y0) / self.ny

    def xs(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    def ys(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.dy

    def points(self) -> np.ndarray:
        xg, yg = np.meshgrid(self.xs(), self.ys())
        return xg + 1j * yg

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["x", "y", "re", "im"])
        pts = self.points()
        for z, v in zip(pts.ravel(), self.values.ravel()):
            writer.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()

    def metadata(self) -> dict:
        return {
            "x0": self.x0,
            "x1": self.x1,
            "nx": self.nx,
            "y0": self.y0,
            "y1": self.y1,
            "ny": self.ny,
        }

    @classmethod
    def from_csv(cls, text: str, meta: dict) -> "GridFunction":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0][:2] == ["x", "y"]:
            rows = rows[1:]
        nx, ny = int(meta["nx"]), int(meta["ny"])
        if len(rows) != nx * ny:
            raise ValueError("grid dump does not match its metadata")
        vals = np.array([complex(float(r[2]), float(r[3])) for r in rows])
        return cls(
            x0=float(meta["x0"]),
            x1=float(meta["x1"]),
            nx=nx,
            y0=float(meta["y0"]),
            y1=float(meta["y1"]),
            ny=ny,
            values=vals.reshape(ny, nx),
        )


def grid_dbar_residual(grid: GridFunction, min_row: int = 1) -> np.ndarray:
    """Central-difference d-bar field of a grid dump, rows >= min_row.

    For an analytic sample set this is truncation-level noise; a tampered
    sample shows up at its own stencil.  Returns an (ny, nx) array with NaN
    on the frame where the stencil does not fit.
    """
    v = grid.values
    out = np.full_like(v, np.nan)
    dx = (v[:, 2:] - v[:, :-2]) / (2.0 * grid.dx)
    dy = (v[2:, :] - v[:-2, :]) / (2.0 * grid.dy)
    out[1:-1, 1:-1] = 0.5 * (dx[1:-1, :] + 1j * dy[:, 1:-1])
    out[:min_row, :] = np.nan
    return out


# ---------------------------------------------------------------------------
# d-bar solver


@dataclass
class SourceCells:
    """Quadrature cells for the d-bar kernel: centers, sizes, F samples."""

    xi: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    f: np.ndarray

    def __post_init__(self) -> None:
        self.xi = np.asarray(self.xi, dtype=complex)
        self.dx = np.asarray(self.dx, dtype=float)
        self.dy = np.asarray(self.dy, dtype=float)
        self.f = np.asarray(self.f, dtype=complex)
        n = len(self.xi)
        if not (len(self.dx) == len(self.dy) == len(self.f) == n):
            raise ValueError("cell arrays must share their length")

    @property
    def area(self) -> np.ndarray:
        return self.dx * self.dy

    @classmethod
    def from_grid(cls, grid: GridFunction, keep_zero: bool = False) -> "SourceCells":
        pts = grid.points().ravel()
        vals = grid.values.ravel()
        mask = np.ones(len(pts), dtype=bool) if keep_zero else vals != 0.0
        n = int(np.sum(mask))
        return cls(
            xi=pts[mask],
            dx=np.full(n, grid.dx),
            dy=np.full(n, grid.dy),
            f=vals[mask],
        )


class JonesSolver:
    """Explicit-kernel solution operator for d-bar b = F on the half plane."""

    def __init__(
        self,
        cells: SourceCells,
        coarse_block: int = 8,
        target_chunk: int = 256,
    ):
        order = np.lexsort((cells.xi.real, cells.xi.imag))
        self.xi = cells.xi[order]
        self.dxc = cells.dx[order]
        self.dyc = cells.dy[order]
        self.f = cells.f[order]
        self.area = self.dxc * self.dyc
        self.absf_mass = np.abs(self.f) * self.area
        self.target_chunk = target_chunk
        self.last_exclusion_bound = 0.0
        n = len(self.xi)
        if n:
            self.row_levels, self.row_of = np.unique(self.xi.imag, return_inverse=True)
        else:
            self.row_levels = np.zeros(0)
            self.row_of = np.zeros(0, dtype=np.int64)
        # block-coarsened |F| dA sources for the smooth exponent kernels
        if n:
            block = np.arange(n) // coarse_block
            key = self.row_of.astype(np.int64) * (int(block[-1]) + 2) + block
            _, inv = np.unique(key, return_inverse=True)
            m = np.bincount(inv, weights=self.absf_mass)
            wx = np.bincount(inv, weights=self.absf_mass * self.xi.real)
            wy = np.bincount(inv, weights=self.absf_mass * self.xi.imag)
            rows = np.zeros(inv.max() + 1, dtype=np.int64)
            np.maximum.at(rows, inv, self.row_of)
            keep = m > 0.0
            safe = np.where(m > 0.0, m, 1.0)
            self.c_mass = m[keep]
            self.c_xi = (wx / safe + 1j * (wy / safe))[keep]
            self.c_row = rows[keep]
        else:
            self.c_mass = np.zeros(0)
            self.c_xi = np.zeros(0, dtype=complex)
            self.c_row = np.zeros(0, dtype=np.int64)
        self._a_exponent = self._exponent_at(self.xi, self.row_of)

    def _exponent_at(self, points: np.ndarray, row_cut: np.ndarray) -> np.ndarray:
        """integral over rows strictly below `row_cut` of i/(p - conj(w)) |F| dA."""
        out = np.zeros(len(points), dtype=complex)
        if len(self.c_xi) == 0:
            return out
        for start in range(0, len(points), self.target_chunk):
            sl = slice(start, start + self.target_chunk)
            p = points[sl][:, None]
            kern = 1j / (p - np.conjugate(self.c_xi)[None, :])
            mask = self.c_row[None, :] < row_cut[sl][:, None]
            out[sl] = np.sum(kern * mask * self.c_mass[None, :], axis=1)
        return out

    def carleson_norm(self, max_generation: int = 12) -> float:
        from .builder import CellSamples, carleson_norm

        return carleson_norm(
            CellSamples(x=self.xi.real, y=self.xi.imag, area=self.area, value=np.abs(self.f)),
            max_generation,
        )

    def solve_many(
        self,
        targets: np.ndarray,
        refine_radius_cells: float = 3.0,
        max_split: int = 64,
        min_subcell: Optional[float] = None,
    ) -> np.ndarray:
        """b at targets; cells near a target are subdivided with F held constant."""
        targets = np.asarray(targets, dtype=complex)
        flat = targets.ravel()
        out = np.zeros(len(flat), dtype=complex)
        self.last_exclusion_bound = 0.0
        if len(self.xi) == 0:
            return out.reshape(targets.shape)
        cut = np.searchsorted(self.row_levels, flat.imag, side="left")
        z_exponent = self._exponent_at(flat, cut)
        cell_radius = 0.5 * np.hypot(self.dxc, self.dyc)
        for start in range(0, len(flat), self.target_chunk):
            sl = slice(start, start + self.target_chunk)
            z = flat[sl][:, None]
            dist = np.abs(self.xi[None, :] - z)
            near = dist < refine_radius_cells * (2.0 * cell_radius[None, :])
            with np.errstate(divide="ignore", invalid="ignore"):
                kern = self.xi.imag[None, :] / (
                    (self.xi[None, :] - z) * (z - np.conjugate(self.xi)[None, :])
                )
            kern = np.where(near, 0.0, kern)
            expo = np.exp(self._a_exponent[None, :] - z_exponent[sl][:, None])
            out[sl] = -2j * np.sum(kern * self.f[None, :] * self.area[None, :] * expo, axis=1) / math.pi
            for zi_local, ci in np.argwhere(near):
                zi = start + int(zi_local)
                out[zi] += self._near_cell(flat[zi], int(ci), z_exponent[zi], max_split, min_subcell)
        return out.reshape(targets.shape)

    def _near_cell(
        self,
        z: complex,
        ci: int,
        z_expo: complex,
        max_split: int,
        min_subcell: Optional[float],
    ) -> complex:
        """Subdivided kernel integral over one near cell, F frozen at its sample.

        Subcells overlapping the target are excluded; their contribution is
        bounded via |kernel| <= 2/|xi - z| by 6 |F| subcell_radius each and
        accumulated into `last_exclusion_bound`.
        """
        xi0 = self.xi[ci]
        dx, dy = self.dxc[ci], self.dyc[ci]
        size = max(dx, dy)
        gap = abs(xi0 - z) - 0.5 * math.hypot(dx, dy)
        want = max(gap / 4.0, min_subcell if min_subcell is not None else size / max_split)
        split = 1
        while size / split > want and split < max_split:
            split *= 2
        offs = (np.arange(split) + 0.5) / split - 0.5
        qx, qy = np.meshgrid(xi0.real + offs * dx, xi0.imag + offs * dy)
        xis = (qx + 1j * qy).ravel()
        sub_area = (dx / split) * (dy / split)
        sub_radius = 0.5 * math.hypot(dx / split, dy / split)
        dist = np.abs(xis - z)
        ok = dist > 2.0 * sub_radius
        kern = np.zeros(len(xis), dtype=complex)
        sel = xis[ok]
        kern[ok] = sel.imag / ((sel - z) * (z - np.conjugate(sel)))
        k_expo = np.exp(self._a_exponent[ci] - z_expo)
        value = -2j * np.sum(kern) * self.f[ci] * sub_area * k_expo / math.pi
        excluded = int(np.sum(~ok))
        if excluded:
            self.last_exclusion_bound += abs(self.f[ci]) * excluded * 6.0 * sub_radius
        return complex(value)


def jones_dbar_solve(
    source: Union[GridFunction, SourceCells],
    z: Union[complex, np.ndarray],
    **kwargs,
) -> Union[complex, np.ndarray]:
    """Solve d-bar b = F for the sampled right-hand side, at one or many z."""
    cells = SourceCells.from_grid(source) if isinstance(source, GridFunction) else source
    solver = JonesSolver(cells)
    if np.isscalar(z) or isinstance(z, complex):
        return complex(solver.solve_many(np.array([z]), **kwargs)[0])
    return solver.solve_many(np.asarray(z, dtype=complex), **kwargs)
