"""Cut sparsifiers with Steiner nodes.

Unit mode contracts a strong well-linked decomposition of the non-terminal
vertices: every cluster being 1/3-well-linked makes the contraction a
quality-3 cut sparsifier.  General capacities reduce to unit mode by capping
at the terminal-incident total C, expanding edges into ceil(c/eps) unit
parallels with eps = eps_input/3, and scaling the result back by eps, for
quality 3 + eps_input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .decompose import Decomposition, strong_decompose
from .errors import InputError, ParamError
from .graph import CapGraph, ContractionMap, UnitExpansion, contract, out_edges, unit_expand
from .sparsecut import DEFAULT_ENUM_BUDGET


@dataclass
class CutSparsifier:
    graph: CapGraph  # H, terminals preserved
    cmap: ContractionMap
    quality: Fraction  # claimed q
    unit_graph: CapGraph  # the (possibly expanded) unit graph H was built from
    decompositions: list[Decomposition]
    eps_input: Fraction | None = None
    expansion: UnitExpansion | None = None

    @property
    def steiner_count(self) -> int:
        return self.graph.n - self.graph.k

    def cluster_sets(self) -> list[frozenset[int]]:
        return list(self.cmap.clusters)


def build_cut_sparsifier_unit(
    g: CapGraph, budget: int = DEFAULT_ENUM_BUDGET
) -> CutSparsifier:
    """Quality-3 sparsifier for a unit multigraph (integer capacities are
    parallel-edge multiplicities).  Connected components are handled
    independently; within each, the terminal-free region is strongly
    decomposed per connected piece and every piece's clusters contracted."""
    if not g.is_unit:
        raise InputError("unit builder requires integer (multiplicity) capacities")
    tset = set(g.terminals)
    decs: list[Decomposition] = []
    clusters: list[frozenset[int]] = []
    for comp in g.components():
        interior = [v for v in comp if v not in tset]
        if not interior:
            continue
        for piece in g.components(within=interior):
            dec = strong_decompose(g, piece, budget=budget)
            decs.append(dec)
            clusters.extend(c.members for c in dec.clusters)
    h, cmap = contract(g, clusters)
    return CutSparsifier(h, cmap, Fraction(3), g, decs)


def build_cut_sparsifier(
    g: CapGraph, eps_input: Fraction | int | str, budget: int = DEFAULT_ENUM_BUDGET
) -> CutSparsifier:
    """Quality-(3+eps) sparsifier for capacities c_e >= 1."""
    eps_input = Fraction(eps_input)
    if not (0 < eps_input <= 1):
        raise ParamError(f"eps must be in (0,1], got {eps_input}")
    eps = eps_input / 3
    ug, prov = unit_expand(g, eps)
    unit_sp = build_cut_sparsifier_unit(ug, budget=budget)
    hu = unit_sp.graph
    h = CapGraph(
        hu.vertices,
        [(e.u, e.v, e.cap * eps) for e in hu.edges],
        hu.terminals,
    )
    return CutSparsifier(
        h,
        unit_sp.cmap,
        Fraction(3) + eps_input,
        ug,
        unit_sp.decompositions,
        eps_input=eps_input,
        expansion=prov,
    )


def project_cut(
    g: CapGraph, cmap: ContractionMap, h_side_a: Iterable[int]
) -> set[int]:
    """Expand an H-side bipartition back to G vertices; the cut value is
    preserved because contracted clusters sit wholly on one side."""
    return cmap.preimage(h_side_a)


def cut_value(g: CapGraph, side_a: Iterable[int]) -> Fraction:
    sa = frozenset(side_a)
    return sum(
        (e.cap for e in g.edges if (e.u in sa) != (e.v in sa)), Fraction(0)
    )


@dataclass(frozen=True)
class LiftStep:
    cluster: frozenset[int]
    moved_to: str  # "X" | "Y"
    added: Fraction  # capacity the move added to the cut
    removed: Fraction  # inner cut capacity the move erased


def lift_cut(
    g: CapGraph, clusters: Iterable[frozenset[int]], side_x: Iterable[int]
) -> tuple[set[int], list[LiftStep]]:
    """Round a G-bipartition so every cluster lies wholly on one side, the
    move rule being the boundary-weight comparison with ties sent to Y.
    When every cluster is 1/3-well-linked the final cut costs at most 3x the
    original."""
    x = set(side_x)
    steps: list[LiftStep] = []
    for members in sorted(clusters, key=min):
        inter = members & x
        if not inter or inter == members:
            continue
        e_x = e_y = e_xy = e_yx = Fraction(0)
        for e in out_edges(g, members):
            u_in, v_out = (e.u, e.v) if e.u in members else (e.v, e.u)
            if u_in in x and v_out in x:
                e_x += e.cap
            elif u_in not in x and v_out not in x:
                e_y += e.cap
            elif u_in in x:
                e_xy += e.cap
            else:
                e_yx += e.cap
        inner = sum(
            (
                e.cap
                for e in g.edges
                if e.u in members and e.v in members and (e.u in x) != (e.v in x)
            ),
            Fraction(0),
        )
        if e_x + e_xy <= e_y + e_yx:
            x -= members
            steps.append(LiftStep(members, "Y", e_x, inner))
        else:
            x |= members
            steps.append(LiftStep(members, "X", e_y, inner))
    return x, steps
