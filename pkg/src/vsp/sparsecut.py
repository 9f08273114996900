"""Sparsest cut on subdivided cluster instances, exact and heuristic, and the
well-linkedness predicate built on them.

The exact solver enumerates terminal bipartitions and solves a minimum cut
for each.  Parallel boundary edges are bucketed into one bundle terminal per
original edge, so the enumeration is over bundles; splitting a bundle away
from its attachment never helps a cut of sparsity below 1, and cuts of
sparsity exactly 1 always exist (cut one pendant), so the bundle-level
minimum capped at 1 is the true optimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import BudgetExceeded, InputError
from .flow import CutCertificate, Net
from .graph import CapGraph, Cluster, SubdividedInstance, make_cluster, subdivide_boundary

DEFAULT_ENUM_BUDGET = 22


@dataclass(frozen=True)
class SparsestCut:
    """Result of a sparsest-cut computation on a subdivided instance.

    sparsity None means no bipartition splits the boundary terminals at all
    (zero or one boundary edge): the cluster is well-linked at every alpha.
    """

    sparsity: Fraction | None
    cut: CutCertificate | None
    exact: bool
    pendant_split_edge: int | None = None  # set when the optimum splits a bundle

    @property
    def trivially_well_linked(self) -> bool:
        return self.sparsity is None


def _bundle_terms(inst: SubdividedInstance) -> list[tuple[int, Fraction]]:
    return [(t, inst.weight(t)) for t in inst.terminals]


def _min_cut_for_split(
    inst: SubdividedInstance, side1: list[int], side2: list[int]
) -> tuple[Fraction, frozenset[int]]:
    g = inst.graph
    net = Net()
    for e in g.edges:
        net.undirected(e.u, e.v, e.cap, key=e.eid)
    for v in g.vertices:
        net.ensure_node(v)
    big = sum((e.cap for e in g.edges), Fraction(0)) + 1
    for t in side1:
        net.arc(("S",), t, big)
    for t in side2:
        net.arc(t, ("T",), big)
    value = net.max_flow(("S",), ("T",))
    side = frozenset(v for v in net.min_cut_source_side() if not isinstance(v, tuple))
    return value, side


def _certificate(inst, side_a: frozenset[int], value: Fraction) -> CutCertificate:
    g = inst.graph
    wa = sum((inst.weight(t) for t in inst.terminals if t in side_a), Fraction(0))
    wb = inst.z - wa
    sp = value / min(wa, wb) if wa > 0 and wb > 0 else None
    return CutCertificate(
        side_a,
        frozenset(g.vertices) - side_a,
        value,
        term_a=wa,
        term_b=wb,
        sparsity=sp,
    )


def sparsest_cut_exact(
    inst: SubdividedInstance,
    budget: int = DEFAULT_ENUM_BUDGET,
    stop_below: Fraction | None = None,
) -> SparsestCut:
    """Globally minimum-sparsity cut by exhaustive bundle bipartitions.

    Ties break by (sparsity, cut value, lexicographic terminal side).  With
    stop_below set, returns early on the first cut below that threshold (the
    certificate is then valid but not necessarily optimal).
    """
    terms = _bundle_terms(inst)
    z = inst.z
    if len(terms) == 0 or z <= 1:
        return SparsestCut(None, None, True)
    nb = len(terms)
    if nb > budget:
        raise BudgetExceeded(
            f"{nb} boundary bundles exceed the exact enumeration budget {budget}; "
            "use sparsest_cut_heuristic"
        )
    best: tuple | None = None  # (sparsity, value, side_tuple, cert)
    if len(terms) >= 2:
        fixed = terms[0][0]
        rest = [t for t, _ in terms[1:]]
        for mask in range(1 << (nb - 1)):
            side1 = [fixed] + [rest[i] for i in range(nb - 1) if mask >> i & 1]
            side2 = [t for t in rest if t not in side1]
            if not side2:
                continue
            value, reach = _min_cut_for_split(inst, side1, side2)
            cert = _certificate(inst, reach, value)
            key = (cert.sparsity, value, tuple(sorted(side1)))
            if best is None or key < best[:3]:
                best = (*key, cert)
                if stop_below is not None and cert.sparsity < stop_below:
                    return SparsestCut(cert.sparsity, cert, True)
    if best is not None and best[0] <= 1:
        return SparsestCut(best[0], best[3], True)
    # every bundle-level split is worse than cutting a single pendant unit
    t0, _ = terms[0]
    eid = inst.pendant_of[t0]
    cert = CutCertificate(
        frozenset({t0}),
        frozenset(inst.graph.vertices) - {t0},
        Fraction(1),
        term_a=Fraction(1),
        term_b=z - 1,
        sparsity=Fraction(1),
    )
    return SparsestCut(Fraction(1), cert, True, pendant_split_edge=eid)


def _sweep_candidates(inst: SubdividedInstance) -> list[list[int]]:
    """Vertex orderings to sweep: Fiedler vectors of the plain and the
    degree-normalized Laplacian, plus an id ordering as a fallback."""
    g = inst.graph
    verts = list(g.vertices)
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    if n <= 2:
        return [verts]
    a = np.zeros((n, n))
    for e in g.edges:
        if e.u == e.v:
            continue
        w = float(e.cap)
        a[idx[e.u], idx[e.v]] += w
        a[idx[e.v], idx[e.u]] += w
    deg = a.sum(axis=1)
    lap = np.diag(deg) - a
    orders = [verts]
    try:
        vals, vecs = np.linalg.eigh(lap)
        fiedler = vecs[:, np.argsort(vals)[1]]
        orders.append([v for _, v in sorted(zip(fiedler, verts), key=lambda p: (p[0], p[1]))])
    except np.linalg.LinAlgError:
        pass
    try:
        d = np.where(deg > 0, deg, 1.0)
        nlap = lap / np.sqrt(np.outer(d, d))
        vals, vecs = np.linalg.eigh(nlap)
        fiedler = vecs[:, np.argsort(vals)[1]]
        orders.append([v for _, v in sorted(zip(fiedler, verts), key=lambda p: (p[0], p[1]))])
    except np.linalg.LinAlgError:
        pass
    return orders


def _eval_side(inst: SubdividedInstance, side_a: set[int]) -> Fraction | None:
    g = inst.graph
    wa = sum((inst.weight(t) for t in inst.terminals if t in side_a), Fraction(0))
    wb = inst.z - wa
    if wa == 0 or wb == 0:
        return None
    value = sum(
        (e.cap for e in g.edges if (e.u in side_a) != (e.v in side_a)), Fraction(0)
    )
    return value / min(wa, wb)


def sparsest_cut_heuristic(inst: SubdividedInstance, local_rounds: int = 4) -> SparsestCut:
    """Spectral sweep plus greedy single-vertex moves.  The returned cut's
    sparsity is evaluated exactly; optimality is not guaranteed."""
    terms = _bundle_terms(inst)
    z = inst.z
    if len(terms) == 0 or z <= 1:
        return SparsestCut(None, None, False)
    if len(terms) == 1:
        # one bundle of z >= 2 parallel pendants: the only nontrivial splits
        # separate pendant units, all of sparsity exactly 1
        t0, _ = terms[0]
        cert = CutCertificate(
            frozenset({t0}),
            frozenset(inst.graph.vertices) - {t0},
            Fraction(1),
            term_a=Fraction(1),
            term_b=z - 1,
            sparsity=Fraction(1),
        )
        return SparsestCut(Fraction(1), cert, False, pendant_split_edge=inst.pendant_of[t0])
    g = inst.graph
    best_side: set[int] | None = None
    best_sp: Fraction | None = None
    for order in _sweep_candidates(inst):
        side: set[int] = set()
        for v in order[:-1]:
            side.add(v)
            sp = _eval_side(inst, side)
            if sp is not None and (best_sp is None or sp < best_sp):
                best_sp, best_side = sp, set(side)
    if best_side is None:
        # fall back to isolating the first boundary terminal
        best_side = {terms[0][0]}
        best_sp = _eval_side(inst, best_side)
    # greedy local moves
    for _ in range(local_rounds):
        improved = False
        for v in g.vertices:
            trial = set(best_side)
            if v in trial:
                trial.discard(v)
            else:
                trial.add(v)
            if not trial or len(trial) == g.n:
                continue
            sp = _eval_side(inst, trial)
            if sp is not None and sp < best_sp:
                best_side, best_sp = trial, sp
                improved = True
        if not improved:
            break
    value = sum(
        (e.cap for e in g.edges if (e.u in best_side) != (e.v in best_side)),
        Fraction(0),
    )
    cert = _certificate(inst, frozenset(best_side), value)
    return SparsestCut(cert.sparsity, cert, False)


def sparsest_cut(
    inst: SubdividedInstance, budget: int = DEFAULT_ENUM_BUDGET, **kw
) -> SparsestCut:
    """Exact within budget, heuristic beyond it."""
    try:
        return sparsest_cut_exact(inst, budget=budget, **kw)
    except BudgetExceeded:
        return sparsest_cut_heuristic(inst)


def is_well_linked(
    g: CapGraph,
    cluster: Cluster | Iterable[int],
    alpha: Fraction,
    budget: int = DEFAULT_ENUM_BUDGET,
) -> tuple[bool, CutCertificate | None]:
    """Exact test: does every bipartition of the cluster cut at least alpha
    times the smaller boundary side?  Returns a violating cut on failure.
    Raises BudgetExceeded when the exact enumeration is out of reach."""
    members = cluster.members if isinstance(cluster, Cluster) else frozenset(cluster)
    if not members:
        return True, None
    inst = subdivide_boundary(g, members)
    res = sparsest_cut_exact(inst, budget=budget, stop_below=alpha)
    if res.trivially_well_linked or res.sparsity >= alpha:
        return True, None
    return False, res.cut
