"""Intermediate dyadic families: packing-bounded, chain-dense supersets.

Given a density-admissible family A of dyadic intervals, an intermediate
family G contains A, packs boundedly (for every dyadic J the lengths of
G-members inside J sum to at most C_pack |J|) and is chain-dense (between
any nested pair I0 in A, I1 in G, the ancestor chain meets G at least
(generation gap) / C_chain times).  No construction is prescribed, only
the contract; the candidate rule below is therefore certified exhaustively
before use, and a failed certification surfaces an explicit witness
instead of a silent fallback.

Candidate rule at sparsity exponent gamma:

    G = A u {tree roots} u {J : exists I in A, I inside J,
            #{I' in A : I' inside J, |I'| >= |I|} <= (|J| / |I|)^gamma}

Larger gamma admits more intervals (better chains, worse packing); the
exponent is walked through a fixed schedule until both certificates pass.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .dyadic import DyadicInterval, IntervalFamily

DEFAULT_PACK_CEILING = 64.0
DEFAULT_CHAIN_CEILING = 16.0


class CoveringError(RuntimeError):
    def __init__(self, message: str, witness: Optional[dict] = None):
        super().__init__(message)
        self.witness = witness or {}


@dataclass
class VerifyReport:
    c_pack: float
    c_chain: float
    ok: bool
    pack_witness: Optional[dict] = None
    chain_witness: Optional[dict] = None


@dataclass
class IntermediateFamily:
    family: IntervalFamily  # G
    base: IntervalFamily  # A, subset of G
    parent: dict[DyadicInterval, Optional[DyadicInterval]]
    c_pack: float
    c_chain: float
    gamma: float

    def children(self) -> dict[DyadicInterval, list[DyadicInterval]]:
        out: dict[DyadicInterval, list[DyadicInterval]] = defaultdict(list)
        for node, par in self.parent.items():
            if par is not None:
                out[par].append(node)
        return out

    def roots(self) -> list[DyadicInterval]:
        return sorted(i for i, p in self.parent.items() if p is None)


def _ancestor_chain(interval: DyadicInterval) -> list[DyadicInterval]:
    chain = [interval]
    node = interval
    while node.generation > 0:
        node = node.parent()
        chain.append(node)
    return chain


def _parent_links(members: frozenset[DyadicInterval]) -> dict[DyadicInterval, Optional[DyadicInterval]]:
    """parent(I) = smallest member J with I strictly inside J (per unit tree)."""
    links: dict[DyadicInterval, Optional[DyadicInterval]] = {}
    for interval in members:
        node = interval
        parent: Optional[DyadicInterval] = None
        while node.generation > 0:
            node = node.parent()
            if node in members:
                parent = node
                break
        links[interval] = parent
    return links


def verify_intermediate(
    family: IntervalFamily,
    base: IntervalFamily,
    pack_ceiling: float = DEFAULT_PACK_CEILING,
    chain_ceiling: float = DEFAULT_CHAIN_CEILING,
) -> VerifyReport:
    """Exhaustive packing and chain-density audit.

    C_pack maximizes sum_{I in G, I inside J} |I| / |J| over all dyadic J (only
    ancestors of members can realize the maximum).  C_chain maximizes
    log2(|I1|/|I0|) / #(chain members in G) over nested pairs I0 in A, I1 in G.
    """
    if not base.intervals <= family.intervals:
        raise ValueError("base family must be contained in the verified family")
    members = family.intervals
    pack_sum: dict[DyadicInterval, Fraction] = defaultdict(Fraction)
    for interval in members:
        for ancestor in _ancestor_chain(interval):
            pack_sum[ancestor] += interval.length
    c_pack, pack_witness = 0.0, None
    for j, total in pack_sum.items():
        ratio = float(total / j.length)
        if ratio > c_pack:
            c_pack = ratio
            pack_witness = {"interval": [j.generation, j.index], "ratio": ratio}
    c_chain, chain_witness = 0.0, None
    for inner in base.intervals:
        chain = _ancestor_chain(inner)
        hits = 0
        for steps, outer in enumerate(chain):
            if outer in members:
                hits += 1
                if steps > 0 and hits > 0:
                    ratio = steps / hits
                    if ratio > c_chain:
                        c_chain = ratio
                        chain_witness = {
                            "inner": [inner.generation, inner.index],
                            "outer": [outer.generation, outer.index],
                            "chain_members": hits,
                            "ratio": ratio,
                        }
    ok = c_pack <= pack_ceiling and c_chain <= chain_ceiling
    return VerifyReport(c_pack=c_pack, c_chain=c_chain, ok=ok, pack_witness=pack_witness, chain_witness=chain_witness)


def family_density_fit(family: IntervalFamily, m1: float = 2.0) -> float:
    """Minimal alpha with #{I_k in A : I_k inside I, |I_k| = 2^-n |I|} <= m1 2^{alpha n}."""
    counts: dict[tuple[DyadicInterval, int], int] = defaultdict(int)
    for member in family.intervals:
        for steps, ancestor in enumerate(_ancestor_chain(member)):
            counts[(ancestor, steps)] += 1
    fitted = 0.0
    for (_, n), count in counts.items():
        if n >= 1 and count > m1:
            fitted = max(fitted, math.log2(count / m1) / n)
    return fitted


def _candidate_members(base: IntervalFamily, gamma: float) -> frozenset[DyadicInterval]:
    """Apply the sparsity-gamma admission rule to every ancestor of A."""
    # group the members of A below each ancestor by generation
    gens_below: dict[DyadicInterval, list[int]] = defaultdict(list)
    for member in base.intervals:
        for ancestor in _ancestor_chain(member):
            gens_below[ancestor].append(member.generation)
    admitted: set[DyadicInterval] = set(base.intervals)
    for candidate, gens in gens_below.items():
        admitted.add(candidate.root())
        gens.sort()
        g0 = candidate.generation
        # witnesses I are scanned coarsest first; members with |I'| >= |I|
        # are exactly those of generation <= gen(I)
        i = 0
        while i < len(gens):
            g = gens[i]
            while i < len(gens) and gens[i] == g:
                i += 1
            if i <= 2.0 ** (gamma * (g - g0)):
                admitted.add(candidate)
                break
    return frozenset(admitted)


def gamma_schedule(alpha: float, length: int = 6) -> list[float]:
    """alpha, then midpoints toward 1."""
    start = min(max(alpha, 0.35), 0.95)
    out = [start]
    for _ in range(length - 1):
        out.append((out[-1] + 1.0) / 2.0)
    return out


def build_intermediate(
    base: IntervalFamily,
    gamma: Optional[float] = None,
    max_generation: int = 12,
    m1: float = 2.0,
    alpha_cap: float = 0.95,
    pack_ceiling: float = DEFAULT_PACK_CEILING,
    chain_ceiling: float = DEFAULT_CHAIN_CEILING,
) -> IntermediateFamily:
    """Construct and certify an intermediate family over A.

    The density precondition on A is checked first (fitted exponent below
    `alpha_cap` at constant `m1`).  Each schedule entry is certified by
    :func:`verify_intermediate`; the first certified family is returned.
    """
    if base.max_generation() > max_generation:
        raise CoveringError(
            f"family reaches generation {base.max_generation()} > bound {max_generation}"
        )
    fitted = family_density_fit(base, m1=m1)
    if fitted >= alpha_cap:
        raise CoveringError(
            f"density precondition failed: fitted exponent {fitted:.3f} >= {alpha_cap}",
            witness={"fitted_alpha": fitted, "m1": m1},
        )
    schedule = [gamma] if gamma is not None else gamma_schedule(fitted)
    failures: list[dict] = []
    for g in schedule:
        members = _candidate_members(base, g)
        candidate = IntervalFamily(members, base.offset)
        report = verify_intermediate(candidate, base, pack_ceiling, chain_ceiling)
        if report.ok:
            return IntermediateFamily(
                family=candidate,
                base=base,
                parent=_parent_links(members),
                c_pack=report.c_pack,
                c_chain=report.c_chain,
                gamma=g,
            )
        failures.append(
            {
                "gamma": g,
                "c_pack": report.c_pack,
                "c_chain": report.c_chain,
                "pack_witness": report.pack_witness,
                "chain_witness": report.chain_witness,
            }
        )
    raise CoveringError(
        "no schedule entry certified the candidate family",
        witness={"failures": failures},
    )
