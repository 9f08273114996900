"""Well-linked decompositions.

Both procedures maintain a partition of the input set and keep splitting
along sparse cuts; they differ in the sparsity threshold, the solver, and
the bounds they guarantee:

* weak: threshold 1/(128 log z) relative to the input boundary z, exact
  solver within budget and the spectral heuristic beyond it; final boundary
  tally at most 1.2 z; every split moves at most 0.51 of the split cluster's
  boundary to the smaller side.
* strong: threshold 1/3, exact solver only (refuses beyond budget); every
  final cluster is 1/3-well-linked, the boundary tally is at most 3 z^3 and
  level i holds at most 2^(3i+3) clusters.

Every split is recorded so certification can re-derive the claims.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import BudgetExceeded, InputError
from .graph import CapGraph, make_cluster, out_edges, subdivide_boundary
from .params import weak_threshold
from .sparsecut import (
    DEFAULT_ENUM_BUDGET,
    SparsestCut,
    sparsest_cut_exact,
    sparsest_cut_heuristic,
)

ONE_THIRD = Fraction(1, 3)


@dataclass(frozen=True)
class ClusterCert:
    members: frozenset[int]
    boundary: tuple[int, ...]
    z: Fraction
    alpha: Fraction | None  # claimed well-linkedness level; None = every alpha
    source: str  # "exact" | "heuristic" | "trivial"
    level: int | None = None  # strong decomposition level index


@dataclass(frozen=True)
class SplitEvent:
    members: frozenset[int]
    z_cluster: Fraction
    sparsity: Fraction
    side_a: frozenset[int]  # smaller-boundary-terminal side
    out_a: Fraction
    out_b: Fraction
    crossing: Fraction


@dataclass
class Decomposition:
    kind: str  # "weak" | "strong"
    parent_members: frozenset[int]
    z: Fraction
    threshold: Fraction
    clusters: list[ClusterCert]
    events: list[SplitEvent] = field(default_factory=list)
    budget: int = DEFAULT_ENUM_BUDGET

    @property
    def boundary_tally(self) -> Fraction:
        return sum((c.z for c in self.clusters), Fraction(0))

    def level_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for c in self.clusters:
            if c.level is not None:
                counts[c.level] = counts.get(c.level, 0) + 1
        return counts


def _level_of(z: Fraction, out_r: Fraction) -> int | None:
    """Smallest i >= 1 with out_r > z / 2^i."""
    if out_r <= 0 or z <= 0:
        return None
    i = 1
    while out_r * (1 << i) <= z:
        i += 1
    return i


def _component_split(g: CapGraph, members: frozenset[int]) -> frozenset[int] | None:
    comps = g.components(within=members)
    if len(comps) <= 1:
        return None
    return frozenset(comps[0])


def _split_sides(
    g: CapGraph, members: frozenset[int], cut_side: frozenset[int]
) -> tuple[frozenset[int], frozenset[int]]:
    a = frozenset(cut_side & members)
    b = members - a
    if not a or not b:
        raise AssertionError("sparse cut did not split the cluster members")
    return a, b


def _record_split(
    g: CapGraph,
    events: list[SplitEvent],
    members: frozenset[int],
    z_cluster: Fraction,
    sparsity: Fraction,
    a: frozenset[int],
    b: frozenset[int],
) -> tuple[frozenset[int], frozenset[int]]:
    """Append the event with a = the side carrying fewer parent-boundary
    terminals, and return (a, b) in that order."""
    out_a = sum((e.cap for e in out_edges(g, a)), Fraction(0))
    out_b = sum((e.cap for e in out_edges(g, b)), Fraction(0))
    crossing = sum(
        (e.cap for e in g.edges if (e.u in a and e.v in b) or (e.u in b and e.v in a)),
        Fraction(0),
    )
    ta = out_a - crossing  # parent-boundary capacity on a's side
    tb = out_b - crossing
    if tb < ta:
        a, b = b, a
        out_a, out_b = out_b, out_a
    events.append(SplitEvent(members, z_cluster, sparsity, a, out_a, out_b, crossing))
    return a, b


def weak_decompose(
    g: CapGraph,
    members: Iterable[int],
    budget: int = DEFAULT_ENUM_BUDGET,
) -> Decomposition:
    """Weak well-linked decomposition.  Never refuses: beyond the exact
    budget the heuristic solver drives the splitting, and surviving clusters
    are tagged source="heuristic"."""
    ms = frozenset(members)
    parent = make_cluster(g, ms)
    z = parent.z
    threshold = weak_threshold(z) if z > 0 else Fraction(1, 128)
    events: list[SplitEvent] = []
    final: list[ClusterCert] = []
    work = [frozenset(c) for c in g.components(within=ms)]
    while work:
        work.sort(key=lambda c: (sum((e.cap for e in out_edges(g, c)), Fraction(0)), -min(c)))
        cur = work.pop()  # largest boundary first
        cl = make_cluster(g, cur)
        first = _component_split(g, cur)
        if first is not None:
            a, b = _record_split(g, events, cur, cl.z, Fraction(0), first, cur - first)
            work.extend([a, b])
            continue
        inst = subdivide_boundary(g, cur)
        try:
            res = sparsest_cut_exact(inst, budget=budget, stop_below=threshold)
            source = "exact"
        except BudgetExceeded:
            res = sparsest_cut_heuristic(inst)
            source = "heuristic"
        if res.trivially_well_linked:
            final.append(ClusterCert(cur, cl.boundary, cl.z, None, "trivial"))
            continue
        if res.sparsity < threshold and res.pendant_split_edge is None:
            a, b = _split_sides(g, cur, res.cut.side_a)
            a, b = _record_split(g, events, cur, cl.z, res.sparsity, a, b)
            work.extend([a, b])
            continue
        final.append(ClusterCert(cur, cl.boundary, cl.z, threshold, source))
    final.sort(key=lambda c: min(c.members))
    return Decomposition("weak", ms, z, threshold, final, events, budget)


def strong_decompose(
    g: CapGraph,
    members: Iterable[int],
    budget: int = DEFAULT_ENUM_BUDGET,
) -> Decomposition:
    """Strong well-linked decomposition: every final cluster exactly
    certified 1/3-well-linked.  Exact solver only; raises BudgetExceeded
    rather than silently degrading."""
    ms = frozenset(members)
    if not ms:
        raise InputError("empty vertex set")
    if not g.is_connected_subset(ms):
        raise InputError("strong decomposition requires a connected induced subgraph")
    parent = make_cluster(g, ms)
    z = parent.z
    events: list[SplitEvent] = []
    final: list[ClusterCert] = []
    work = [ms]
    while work:
        work.sort(key=lambda c: (sum((e.cap for e in out_edges(g, c)), Fraction(0)), -min(c)))
        cur = work.pop()
        cl = make_cluster(g, cur)
        first = _component_split(g, cur)
        if first is not None:
            a, b = _record_split(g, events, cur, cl.z, Fraction(0), first, cur - first)
            work.extend([a, b])
            continue
        inst = subdivide_boundary(g, cur)
        res = sparsest_cut_exact(inst, budget=budget, stop_below=ONE_THIRD)
        if res.trivially_well_linked:
            final.append(
                ClusterCert(cur, cl.boundary, cl.z, None, "trivial", _level_of(z, cl.z))
            )
            continue
        if res.sparsity < ONE_THIRD and res.pendant_split_edge is None:
            a, b = _split_sides(g, cur, res.cut.side_a)
            a, b = _record_split(g, events, cur, cl.z, res.sparsity, a, b)
            work.extend([a, b])
            continue
        final.append(
            ClusterCert(cur, cl.boundary, cl.z, ONE_THIRD, "exact", _level_of(z, cl.z))
        )
    final.sort(key=lambda c: min(c.members))
    dec = Decomposition("strong", ms, z, ONE_THIRD, final, events, budget)
    _check_strong_bounds(dec)
    return dec


def _check_strong_bounds(dec: Decomposition) -> None:
    z = dec.z
    if z > 0 and dec.boundary_tally > 3 * z**3:
        raise AssertionError(
            f"strong decomposition boundary tally {dec.boundary_tally} exceeds 3z^3"
        )
    for i, count in dec.level_counts().items():
        if count > 1 << (3 * i + 3):
            raise AssertionError(f"level {i} holds {count} clusters > 2^(3i+3)")


def certify_decomposition(g: CapGraph, dec: Decomposition) -> dict:
    """Re-derive every claim of a decomposition from scratch.  Failures are
    report entries, not exceptions."""
    checks: list[tuple[str, bool, str]] = []

    def add(name: str, ok: bool, detail: str = ""):
        checks.append((name, ok, detail))

    union = frozenset().union(*(c.members for c in dec.clusters)) if dec.clusters else frozenset()
    sizes = sum(len(c.members) for c in dec.clusters)
    add("partition", union == dec.parent_members and sizes == len(dec.parent_members),
        f"{sizes} members over {len(dec.clusters)} clusters")

    z = dec.z
    ok_b = True
    for c in dec.clusters:
        real = out_edges(g, c.members)
        real_z = sum((e.cap for e in real), Fraction(0))
        if tuple(e.eid for e in real) != c.boundary or real_z != c.z:
            ok_b = False
        if real_z > z:
            ok_b = False
    add("boundaries", ok_b, "per-cluster out(R) recomputed, out(R) <= out(S)")

    tally = dec.boundary_tally
    if dec.kind == "weak":
        bound = Fraction(12, 10) * z
        add("tally", tally <= bound, f"sum out(R) = {tally} <= 1.2 z = {bound}")
    else:
        bound = 3 * z**3
        add("tally", z == 0 or tally <= bound, f"sum out(R) = {tally} <= 3z^3 = {bound}")
        lc = dec.level_counts()
        add(
            "levels",
            all(n <= 1 << (3 * i + 3) for i, n in lc.items()),
            f"level counts {lc}",
        )

    ok_conn = all(g.is_connected_subset(c.members) for c in dec.clusters)
    add("connected", ok_conn, "every cluster induces a connected subgraph")

    ok_wl, detail = True, []
    for c in dec.clusters:
        if c.alpha is None:
            continue
        inst = subdivide_boundary(g, c.members)
        try:
            res = sparsest_cut_exact(inst, budget=dec.budget, stop_below=c.alpha)
        except BudgetExceeded:
            detail.append(f"cluster at {min(c.members)}: skipped (budget)")
            continue
        if not res.trivially_well_linked and res.sparsity < c.alpha:
            ok_wl = False
            detail.append(f"cluster at {min(c.members)}: sparsity {res.sparsity} < {c.alpha}")
    add("well-linked", ok_wl, "; ".join(detail) or "all clusters at claimed alpha")

    ok_ev = True
    for ev in dec.events:
        if ev.sparsity >= dec.threshold:
            ok_ev = False
        if dec.kind == "weak" and ev.out_a > Fraction(51, 100) * ev.z_cluster:
            ok_ev = False
    add("events", ok_ev, f"{len(dec.events)} splits below threshold {dec.threshold}")

    return {"ok": all(ok for _n, ok, _d in checks), "checks": checks}


def dump_decomposition(dec: Decomposition) -> str:
    lines = [
        f"# kind={dec.kind} z={dec.z} clusters={len(dec.clusters)} "
        f"tally={dec.boundary_tally} threshold={dec.threshold}"
    ]
    for c in dec.clusters:
        alpha = "inf" if c.alpha is None else str(c.alpha)
        lvl = -1 if c.level is None else c.level
        verts = " ".join(str(v) for v in sorted(c.members))
        lines.append(f"c {lvl} {alpha} {verts}")
    return "\n".join(lines) + "\n"
