"""Piecewise interpolants on dyadic trees and their translation-averaged smoothing.

Pipeline for one grid offset t: translate the prepared point sequence by t,
collect the boxes whose tops contain the translated points, build a certified
intermediate family over them, extend the constrained node values over the
tree, and sum tent functions weighted by the value increments along tree
edges.  The smooth interpolant evaluates, at each z, the hyperbolic center
of mass of the per-offset values phi_t(z + t) over a quantized offset grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .barycenter import disc_barycenter_batch
from .covering import IntermediateFamily, build_intermediate
from .dyadic import DyadicInterval, IntervalFamily, box_center, locate
from .geometry import (
    LN2,
    Model,
    beta_disc,
    beta_disc_arr,
    beta_halfplane,
    disc_geodesic,
    cayley_to_disc,
    cayley_to_halfplane,
)

# Root-value anchor appended to every instance; its tree root carries value 0.
ANCHOR = 0.5 + 1.5j

# Radius of guaranteed constancy around each sequence point, in the log2
# (disc) normalization of the hyperbolic distance.  At that radius the
# hyperbolic disc stays inside the constant strip ell/2 < Im z < 5 ell/6
# of the three same-value adjacent boxes, with margin.
CONSTANCY_RADIUS_DISC = 0.1

MIN_AUGMENT_SEPARATION = 5.0


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str, witness: Optional[dict] = None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.witness = witness or {}


# ---------------------------------------------------------------------------
# reduction to well-separated box centers


@dataclass
class ThinResult:
    members: list[complex]
    values: list[complex]
    assignment: dict[int, int]
    max_cover_radius: float
    forced: list[int]  # original indices covered beyond the target radius


def thin_wellseparated(
    points: Sequence[complex],
    values: Sequence[complex],
    separation: float,
) -> ThinResult:
    """Greedy replacement of a sequence by box centers, pairwise apart.

    Members start with the anchor (value 0).  While uncovered points remain,
    the largest box whose top contains an uncovered point contributes its
    center, valued by the nearest original point.  A candidate closer than
    `separation` to an existing member is never admitted; its points are
    force-assigned to the nearest member and the achieved cover radius is
    recorded (it can exceed `separation` by at most the hyperbolic diameter
    of a box top).
    """
    if separation <= 0.0:
        raise PipelineError("thin", "separation must be positive")
    members: list[complex] = [ANCHOR]
    member_values: list[complex] = [0.0 + 0.0j]
    assignment: dict[int, int] = {}
    forced: list[int] = []
    n = len(points)
    order = sorted(range(n), key=lambda i: (-points[i].imag, points[i].real))
    blocked: set[int] = set()

    def nearest_member(z: complex) -> tuple[int, float]:
        dists = [beta_halfplane(z, m) for m in members]
        k = int(np.argmin(dists))
        return k, dists[k]

    while True:
        uncovered = [
            i
            for i in order
            if i not in assignment
            and i not in blocked
            and nearest_member(points[i])[1] > separation
        ]
        if not uncovered:
            break
        boxes = []
        for i in uncovered:
            interval = locate(points[i])
            if interval is None:
                raise PipelineError("thin", f"point {points[i]!r} outside the grid range")
            boxes.append((interval, i))
        best = min(boxes, key=lambda pair: (pair[0].generation, pair[0].left))
        candidate = box_center(best[0])
        _, dist_to_members = nearest_member(candidate)
        if dist_to_members >= separation:
            closest = min(range(n), key=lambda i: beta_halfplane(points[i], candidate))
            members.append(candidate)
            member_values.append(values[closest])
        else:
            # candidate collides with an existing member: points of this box
            # keep their nearest member, stretching the cover radius
            for interval, i in boxes:
                if interval == best[0]:
                    blocked.add(i)
                    forced.append(i)
    max_radius = 0.0
    for i in range(n):
        k, d = nearest_member(points[i])
        assignment[i] = k
        max_radius = max(max_radius, d)
    return ThinResult(
        members=members,
        values=member_values,
        assignment=assignment,
        max_cover_radius=max_radius,
        forced=sorted(forced),
    )


def augment_sundberg(
    members: Sequence[complex],
    values: Sequence[complex],
) -> tuple[list[complex], list[complex]]:
    """Add the two same-generation adjacent box centers next to each member.

    Both carry the member's value.  Requires every non-anchor member to be
    a box-top center and the input to be pairwise more than 5 apart; the
    extended sequence's separation is re-measured by the caller.
    """
    out_p: list[complex] = []
    out_v: list[complex] = []
    for i, (z, w) in enumerate(zip(members, values)):
        out_p.append(z)
        out_v.append(w)
        if abs(z - ANCHOR) < 1e-12:
            continue
        interval = locate(z)
        if interval is None or abs(box_center(interval) - z) > 1e-12:
            raise PipelineError("augment", f"member {z!r} is not a box-top center")
        for j, zj in enumerate(members):
            if j != i and beta_halfplane(z, zj) <= MIN_AUGMENT_SEPARATION:
                raise PipelineError(
                    "augment",
                    "separation below 5",
                    witness={"pair": [[z.real, z.imag], [zj.real, zj.imag]]},
                )
        shift = 4.0 * z.imag / 3.0
        out_p.extend((z - shift, z + shift))
        out_v.extend((w, w))
    return out_p, out_v


@dataclass
class PreparedSequence:
    """Thinned, augmented instance data ready for per-offset builds."""

    members: list[complex]
    values: list[complex]
    thin: ThinResult
    exact_original: list[int]  # original indices whose point and value survive exactly

    @property
    def separation(self) -> float:
        from .conditions import separation_constant

        return separation_constant(self.members, Model.HALFPLANE)


def prepare_sequence(
    points: Sequence[complex],
    values: Sequence[complex],
    separation: float,
) -> PreparedSequence:
    thin = thin_wellseparated(points, values, separation)
    members, member_values = augment_sundberg(thin.members, thin.values)
    exact = [
        i
        for i, (z, w) in enumerate(zip(points, values))
        if any(z == m and w == v for m, v in zip(members, member_values))
    ]
    return PreparedSequence(members=members, values=member_values, thin=thin, exact_original=exact)


# ---------------------------------------------------------------------------
# tents


def tent_eval(interval: DyadicInterval, z: complex) -> float:
    """Vertically linear cutoff scaled to the interval's box.

    1 on the box below 5/6 of its height, linearly decaying to 0 at the top,
    0 outside.  At Im z = 0 the boundary limit 1 is returned so traces can be
    evaluated directly.
    """
    ell = float(interval.length)
    if not interval.contains_x(z.real):
        return 0.0
    y_rel = z.imag / ell
    if y_rel < 0.0 or y_rel > 1.0:
        return 0.0
    return min(1.0, 6.0 * (1.0 - y_rel))


# ---------------------------------------------------------------------------
# tree extension of constrained values


@dataclass
class ExtensionAudit:
    lipschitz_used: float
    max_edge_step: float
    full_tree_constant: Optional[float] = None


def _tree_adjacency(fam: IntermediateFamily) -> dict[DyadicInterval, list[DyadicInterval]]:
    adj: dict[DyadicInterval, list[DyadicInterval]] = {i: [] for i in fam.parent}
    for node, par in fam.parent.items():
        if par is not None:
            adj[node].append(par)
            adj[par].append(node)
    return adj


def _bfs_distances(
    adj: dict[DyadicInterval, list[DyadicInterval]], source: DyadicInterval
) -> dict[DyadicInterval, int]:
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def tree_extend_values(
    fam: IntermediateFamily,
    constrained: dict[DyadicInterval, complex],
    lip: Optional[float] = None,
    full_audit: bool = False,
) -> tuple[dict[DyadicInterval, complex], ExtensionAudit]:
    """Extend values from constrained nodes to the whole tree.

    Every unconstrained node takes the geodesic blend of its two nearest
    constraints when it lies on the tree path between them, and the nearest
    constraint's value otherwise.  Constrained nodes keep their values
    exactly.  With `lip` given, the constraint data is validated against the
    tree metric first and a violating pair is refused; the achieved edge step
    is always measured afterwards.
    """
    members = fam.family.intervals
    for node in constrained:
        if node not in members:
            raise PipelineError("extend", f"constrained node {node!r} not in the family")
    adj = _tree_adjacency(fam)
    anchors = sorted(constrained)
    dist_maps = {c: _bfs_distances(adj, c) for c in anchors}
    if lip is not None:
        for i, c1 in enumerate(anchors):
            for c2 in anchors[i + 1 :]:
                d = dist_maps[c1].get(c2)
                if d is None:
                    continue
                gap = beta_disc(constrained[c1], constrained[c2])
                if gap > lip * d + 1e-12:
                    raise PipelineError(
                        "extend",
                        f"constraint pair exceeds tree Lipschitz bound {lip}",
                        witness={
                            "pair": [list(map(int, (c1.generation, c1.index))), [c2.generation, c2.index]],
                            "value_gap": gap,
                            "tree_distance": d,
                        },
                    )
    values: dict[DyadicInterval, complex] = {}
    for node in members:
        if node in constrained:
            values[node] = constrained[node]
            continue
        reach = [(dist_maps[c].get(node), c) for c in anchors]
        reach = [(d, c) for d, c in reach if d is not None]
        if not reach:
            raise PipelineError("extend", f"node {node!r} has no reachable constraint")
        d1, c1 = min(reach, key=lambda pair: (pair[0], pair[1]))
        between = [
            (d, c)
            for d, c in reach
            if c != c1 and d1 + d == dist_maps[c1].get(c)
        ]
        if between:
            d2, c2 = min(between, key=lambda pair: (pair[0], pair[1]))
            s = d1 / (d1 + d2)
            values[node] = disc_geodesic(constrained[c1], constrained[c2], s)
        else:
            values[node] = constrained[c1]
    max_edge = 0.0
    for node, par in fam.parent.items():
        if par is not None:
            max_edge = max(max_edge, beta_disc(values[node], values[par]))
    full_const = None
    if full_audit:
        full_const = 0.0
        nodes = sorted(members)
        for i, u in enumerate(nodes):
            du = _bfs_distances(adj, u)
            for v in nodes[i + 1 :]:
                d = du.get(v)
                if d:
                    full_const = max(full_const, beta_disc(values[u], values[v]) / d)
    used = lip if lip is not None else 0.0
    return values, ExtensionAudit(lipschitz_used=used, max_edge_step=max_edge, full_tree_constant=full_const)


def data_tree_lipschitz(
    fam: IntermediateFamily, constrained: dict[DyadicInterval, complex]
) -> float:
    """Smallest tree-Lipschitz constant of the constraint data itself."""
    adj = _tree_adjacency(fam)
    anchors = sorted(constrained)
    best = 0.0
    for i, c1 in enumerate(anchors):
        dmap = _bfs_distances(adj, c1)
        for c2 in anchors[i + 1 :]:
            d = dmap.get(c2)
            if d:
                best = max(best, beta_disc(constrained[c1], constrained[c2]) / d)
    return best


# ---------------------------------------------------------------------------
# the piecewise interpolant for one offset


@dataclass
class PiecewiseInterpolant:
    offset: float
    family: IntermediateFamily
    node_values: dict[DyadicInterval, complex]
    coeffs: dict[DyadicInterval, complex]
    audit: ExtensionAudit
    data_lipschitz: float
    max_generation: int = field(init=False)
    _tables: dict[int, tuple[np.ndarray, np.ndarray]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        per_gen: dict[int, list[tuple[int, complex]]] = {}
        for interval, b in self.coeffs.items():
            per_gen.setdefault(interval.generation, []).append((interval.index, b))
        tables = {}
        for g, entries in per_gen.items():
            entries.sort()
            idx = np.array([e[0] for e in entries], dtype=np.int64)
            val = np.array([e[1] for e in entries], dtype=complex)
            tables[g] = (idx, val)
        self._tables = tables
        self.max_generation = max(per_gen, default=0)

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at an array of points; Im = 0 rows give the boundary trace."""
        pts = np.asarray(points, dtype=complex)
        x, y = pts.real, pts.imag
        out = np.zeros(pts.shape, dtype=complex)
        for g, (idx_table, b_table) in self._tables.items():
            ell = 2.0**-g
            mask = (y >= 0.0) & (y <= ell)
            if not mask.any():
                continue
            j = np.floor(x[mask] * (1 << g)).astype(np.int64)
            pos = np.searchsorted(idx_table, j)
            pos_clipped = np.minimum(pos, len(idx_table) - 1)
            found = idx_table[pos_clipped] == j
            tent = np.minimum(1.0, 6.0 * (1.0 - y[mask] / ell))
            contrib = np.where(found, b_table[pos_clipped], 0.0) * tent
            out[mask] += contrib
        return out

    def eval(self, z: complex) -> complex:
        return complex(self.eval_many(np.array([z]))[0])

    def trace_many(self, x: np.ndarray) -> np.ndarray:
        return self.eval_many(np.asarray(x, dtype=float) + 0.0j)


def build_phi_t(
    members: Sequence[complex],
    values: Sequence[complex],
    offset: float,
    max_generation: int = 12,
    pack_ceiling: float = 64.0,
    chain_ceiling: float = 16.0,
    lip: Optional[float] = None,
) -> PiecewiseInterpolant:
    """Interpolant of the offset-translated sequence on the standard grid.

    phi_t(z_n + t) = w_n holds exactly at every member; evaluation stays in
    the closed unit disc because at most one tent is fractional at any point,
    so every value is a euclidean convex combination of two node values.
    """
    translated = [z + offset for z in members]
    constrained: dict[DyadicInterval, complex] = {}
    for z, w in zip(translated, values):
        interval = locate(z)
        if interval is None:
            raise PipelineError("build", f"translated point {z!r} outside the grid")
        if interval in constrained and abs(constrained[interval] - w) > 1e-12:
            raise PipelineError(
                "build",
                "two members with different values share a box top",
                witness={"interval": [interval.generation, interval.index]},
            )
        constrained[interval] = w
    base = IntervalFamily.of(constrained)
    inter = build_intermediate(
        base,
        max_generation=max_generation,
        pack_ceiling=pack_ceiling,
        chain_ceiling=chain_ceiling,
    )
    # every tree root is pinned to 0 unless a member already lives there
    for root in inter.roots():
        constrained.setdefault(root, 0.0 + 0.0j)
    data_lip = data_tree_lipschitz(inter, constrained)
    node_values, audit = tree_extend_values(inter, constrained, lip=lip)
    coeffs: dict[DyadicInterval, complex] = {}
    for node, par in inter.parent.items():
        parent_value = node_values[par] if par is not None else 0.0 + 0.0j
        coeffs[node] = node_values[node] - parent_value
    return PiecewiseInterpolant(
        offset=offset,
        family=inter,
        node_values=node_values,
        coeffs=coeffs,
        audit=audit,
        data_lipschitz=data_lip,
    )


# ---------------------------------------------------------------------------
# translation-averaged smooth interpolant


@dataclass
class SmoothInterpolant:
    samples: list[PiecewiseInterpolant]
    barycenter_tol: float = 1e-10

    @property
    def offsets(self) -> np.ndarray:
        return np.array([s.offset for s in self.samples])

    def sample_values(self, points: np.ndarray) -> np.ndarray:
        """(P, N_t) matrix of phi_t(z + t) over the offset grid."""
        pts = np.asarray(points, dtype=complex)
        atoms = np.empty((pts.size, len(self.samples)), dtype=complex)
        for k, phi in enumerate(self.samples):
            atoms[:, k] = phi.eval_many(pts.ravel() + phi.offset)
        return atoms

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=complex)
        atoms = self.sample_values(pts)
        spread = np.max(np.abs(atoms - atoms[:, :1]), axis=1)
        out = atoms[:, 0].copy()
        todo = spread > 0.0
        if todo.any():
            centers, residuals, _ = disc_barycenter_batch(atoms[todo], tol=self.barycenter_tol)
            if np.any(residuals > self.barycenter_tol):
                raise PipelineError(
                    "average",
                    f"barycenter stalled at residual {float(np.max(residuals)):.3e}",
                )
            out[todo] = centers
        return out.reshape(pts.shape)

    def eval(self, z: complex) -> complex:
        return complex(self.eval_many(np.array([z]))[0])


def build_smooth(
    members: Sequence[complex],
    values: Sequence[complex],
    n_offsets: int = 64,
    max_generation: int = 12,
    pack_ceiling: float = 64.0,
    chain_ceiling: float = 16.0,
    barycenter_tol: float = 1e-10,
) -> SmoothInterpolant:
    samples = [
        build_phi_t(
            members,
            values,
            offset=m / n_offsets,
            max_generation=max_generation,
            pack_ceiling=pack_ceiling,
            chain_ceiling=chain_ceiling,
        )
        for m in range(n_offsets)
    ]
    return SmoothInterpolant(samples=samples, barycenter_tol=barycenter_tol)


def smooth_phi_eval(smooth: SmoothInterpolant, z: complex) -> complex:
    return smooth.eval(z)


# ---------------------------------------------------------------------------
# Carleson norms of sampled densities


@dataclass
class CellSamples:
    """Cell-centered samples with explicit cell areas (rows need not be uniform)."""

    x: np.ndarray
    y: np.ndarray
    area: np.ndarray
    value: np.ndarray

    def __post_init__(self) -> None:
        if not (len(self.x) == len(self.y) == len(self.area) == len(self.value)):
            raise ValueError("cell arrays must share their length")


def carleson_norm(cells: CellSamples, max_generation: int = 12) -> float:
    """sup over dyadic boxes up to the generation bound of (sum over Q) / l(Q)."""
    best = 0.0
    mass = cells.value * cells.area
    for g in range(max_generation + 1):
        ell = 2.0**-g
        mask = cells.y <= ell
        if not mask.any():
            continue
        idx = np.floor(cells.x[mask] / ell).astype(np.int64)
        box_mass = mass[mask]
        order = np.argsort(idx, kind="stable")
        idx, box_mass = idx[order], box_mass[order]
        boundaries = np.flatnonzero(np.diff(idx)) + 1
        for chunk in np.split(box_mass, boundaries):
            if chunk.size:
                best = max(best, float(np.sum(chunk)) / ell)
    return best


# ---------------------------------------------------------------------------
# probes and property reports


def hyperbolic_probe_ring(z: complex, beta_disc_radius: float, count: int) -> np.ndarray:
    """Points of the half-plane at the given log2-normalized distance from z."""
    nat = beta_disc_radius * LN2
    r = math.tanh(0.5 * nat)
    base = cayley_to_disc(z)
    angles = 2.0 * math.pi * (np.arange(count) + 0.3) / count
    out = np.empty(count, dtype=complex)
    for k, a in enumerate(angles):
        u = r * complex(math.cos(a), math.sin(a))
        w = (u + base) / (1.0 + base.conjugate() * u)
        out[k] = cayley_to_halfplane(w)
    return out


def hyperbolic_step(z: complex, beta_hp_distance: float, angle: float) -> complex:
    """Point at the given half-plane distance from z in the tangent direction."""
    nat = 2.0 * LN2 * beta_hp_distance
    r = math.tanh(0.5 * nat)
    base = cayley_to_disc(z)
    u = r * complex(math.cos(angle), math.sin(angle))
    w = (u + base) / (1.0 + base.conjugate() * u)
    return cayley_to_halfplane(w)


@dataclass
class ABCReport:
    a_max_residual: float
    b_const: float
    b_sup_ratio: float
    c_const: float
    c_norm: float
    epsilon: float
    probes_checked: int

    def to_json(self) -> dict:
        return {
            "a_max_residual": self.a_max_residual,
            "b_const": self.b_const,
            "b_sup_ratio": self.b_sup_ratio,
            "c_const": self.c_const,
            "c_norm": self.c_norm,
            "epsilon": self.epsilon,
            "probes_checked": self.probes_checked,
        }


def verify_interpolation_constancy(
    smooth: SmoothInterpolant,
    members: Sequence[complex],
    values: Sequence[complex],
    ring_count: int = 8,
) -> float:
    """Max hyperbolic deviation of phi from each member value on its constancy disc."""
    probes: list[complex] = []
    targets: list[complex] = []
    for z, w in zip(members, values):
        if abs(z - ANCHOR) < 1e-12:
            pts = [z]
        else:
            pts = [z] + list(hyperbolic_probe_ring(z, CONSTANCY_RADIUS_DISC, ring_count))
            pts += list(hyperbolic_probe_ring(z, 0.5 * CONSTANCY_RADIUS_DISC, ring_count))
        probes.extend(pts)
        targets.extend([w] * len(pts))
    got = smooth.eval_many(np.array(probes))
    tg = np.array(targets, dtype=complex)
    exact = got == tg
    dev = np.zeros(len(probes))
    if not exact.all():
        dev[~exact] = beta_disc_arr(got[~exact], tg[~exact])
    return float(np.max(dev)) if len(dev) else 0.0


def sample_pair_ratio(
    smooth: SmoothInterpolant,
    rng: np.random.Generator,
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    pairs_per_stratum: int = 24,
    strata: Sequence[float] = tuple(2.0**k for k in range(-6, 7)),
) -> float:
    """sup over sampled pairs of beta(phi(z), phi(w)) / beta(z, w)."""
    zs: list[complex] = []
    ws: list[complex] = []
    for d in strata:
        x = rng.uniform(*x_range, pairs_per_stratum)
        logy = rng.uniform(math.log(y_range[0]), math.log(y_range[1]), pairs_per_stratum)
        ang = rng.uniform(0.0, 2.0 * math.pi, pairs_per_stratum)
        for xi, ly, ai in zip(x, logy, ang):
            z = complex(xi, math.exp(ly))
            zs.append(z)
            ws.append(hyperbolic_step(z, d, ai))
    za = np.array(zs)
    wa = np.array(ws)
    pz = smooth.eval_many(za)
    pw = smooth.eval_many(wa)
    num = beta_disc_arr(pz, pw)
    den = np.array([beta_halfplane(a, b) for a, b in zip(zs, ws)])
    return float(np.max(num / den))


def eq_average_slack(
    smooth: SmoothInterpolant, z: complex, w: complex
) -> tuple[float, float]:
    """(lhs, rhs) of the averaged-distance bound at a pair: beta of the averaged
    values against the offset-average of the per-offset distances."""
    az = smooth.sample_values(np.array([z]))[0]
    aw = smooth.sample_values(np.array([w]))[0]
    lhs = beta_disc(complex(smooth.eval(z)), complex(smooth.eval(w)))
    rhs = float(np.mean(beta_disc_arr(az, aw)))
    return lhs, rhs


def horizontal_jump_norm(
    phi: PiecewiseInterpolant,
    max_generation: int = 8,
    samples_per_octave: int = 24,
) -> float:
    """Measured sup over boxes of (jump mass across vertical jump lines in Q) / l(Q).

    Jump lines are the distinct vertical sides of the member boxes; the jump
    of phi across each is one physical quantity however many boxes share the
    line, measured directly from phi on a log-spaced height grid and turned
    into prefix integrals F(y) = integral of the jump up to height y.
    """
    lines: dict[float, float] = {}  # x0 -> tallest side height
    for interval in phi.family.family:
        ell = float(interval.length)
        for x0 in (float(interval.left), float(interval.right)):
            lines[x0] = max(lines.get(x0, 0.0), ell)
    if not lines:
        return 0.0
    eps = 1e-9
    profiles: list[tuple[float, np.ndarray, np.ndarray]] = []  # (x0, grid, prefix)
    floor = 2.0 ** -(max_generation + 3)
    for x0, top in sorted(lines.items()):
        octaves = max(1, int(math.ceil(math.log2(top / floor))))
        grid = top * 2.0 ** (-np.arange(octaves * samples_per_octave + 1) / samples_per_octave)
        grid = grid[::-1]  # ascending heights
        pts_l = (x0 - eps) + 1j * grid
        pts_r = (x0 + eps) + 1j * grid
        jl, jr = phi.eval_many(pts_l), phi.eval_many(pts_r)
        same = jl == jr
        jump = np.zeros(len(grid))
        if not same.all():
            jump[~same] = beta_disc_arr(jl[~same], jr[~same])
        if not np.any(jump > 0.0):
            continue
        steps = np.diff(grid, prepend=0.0)
        prefix = np.cumsum(jump * steps)
        profiles.append((x0, grid, prefix))
    if not profiles:
        return 0.0
    best = 0.0
    for g in range(max_generation + 1):
        ell = 2.0**-g
        sums: dict[int, float] = {}
        for x0, grid, prefix in profiles:
            j = math.floor(x0 / ell)
            k = int(np.searchsorted(grid, ell, side="right")) - 1
            if k >= 0:
                sums[j] = sums.get(j, 0.0) + float(prefix[k])
        for total in sums.values():
            best = max(best, total / ell)
    return best
