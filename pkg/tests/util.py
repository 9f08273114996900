"""Shared helpers for the test suite: small graph builders and brute-force
oracles kept deliberately independent of the library's solvers."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from vsp.graph import CapGraph


def triangle() -> CapGraph:
    return CapGraph([1, 2, 3], [(1, 2, 1), (2, 3, 1), (1, 3, 1)])


def path_graph(n: int, cap=1) -> CapGraph:
    return CapGraph(range(1, n + 1), [(i, i + 1, cap) for i in range(1, n)])


def random_unit_graph(rng: random.Random, n: int, m: int, k: int = 0) -> CapGraph:
    """Connected random multigraph with unit capacities and k terminals."""
    edges = []
    verts = list(range(1, n + 1))
    for i in range(2, n + 1):
        edges.append((rng.randint(1, i - 1), i, 1))
    while len(edges) < m:
        u, v = rng.sample(verts, 2)
        edges.append((u, v, 1))
    terms = rng.sample(verts, k) if k else []
    return CapGraph(verts, edges, terms)


def brute_force_out(g: CapGraph, members) -> list[int]:
    ms = set(members)
    return [e.eid for e in g.edges if (e.u in ms) != (e.v in ms)]


def brute_force_min_cut(g: CapGraph, term_a, term_b) -> Fraction:
    """Minimum over all vertex bipartitions separating term_a from term_b of
    the crossing capacity.  Exponential; for n <= ~14 only."""
    ta, tb = set(term_a), set(term_b)
    free = [v for v in g.vertices if v not in ta and v not in tb]
    best = None
    for bits in itertools.product((0, 1), repeat=len(free)):
        side_a = set(ta)
        for v, b in zip(free, bits):
            if b == 0:
                side_a.add(v)
        val = sum(
            (e.cap for e in g.edges if (e.u in side_a) != (e.v in side_a)),
            Fraction(0),
        )
        if best is None or val < best:
            best = val
    return best


def brute_force_sparsest(g_s: CapGraph) -> Fraction | None:
    """Sparsest cut of a subdivided instance by enumerating every vertex
    bipartition.  Terminal weight = 1 per terminal vertex.  None when no
    bipartition splits the terminals."""
    terms = set(g_s.terminals)
    verts = list(g_s.vertices)
    best = None
    for bits in itertools.product((0, 1), repeat=len(verts) - 1):
        side_a = {verts[0]}
        for v, b in zip(verts[1:], bits):
            if b == 0:
                side_a.add(v)
        wa = len(terms & side_a)
        wb = len(terms) - wa
        if wa == 0 or wb == 0:
            continue
        val = sum(
            (e.cap for e in g_s.edges if (e.u in side_a) != (e.v in side_a)),
            Fraction(0),
        )
        sp = val / min(wa, wb)
        if best is None or sp < best:
            best = sp
    return best
