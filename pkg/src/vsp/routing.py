"""Minimum-congestion multicommodity routing (concurrent flow).

Solver strategy: an edge-formulation LP, solved by the exact rational
simplex when small enough and by HiGHS above that threshold.  Either way
the returned flow is made exactly feasible (paths with rational amounts,
demands met exactly) and the reported congestion is the exactly evaluated
congestion of that flow, so approximation can only overstate eta, never
understate a certificate.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import InputError
from .flow import FlowSolution
from .graph import CapGraph, SubdividedInstance, subdivide_boundary
from .ratlp import solve_lp

INFEASIBLE = math.inf

EXACT_LP_MAX_VARS = 200


@dataclass(frozen=True)
class DemandSet:
    """Symmetric demands over marked terminals: D maps an unordered pair
    (smaller id first) to the total flow the pair must exchange."""

    pairs: tuple[tuple[tuple[int, int], Fraction], ...]

    @staticmethod
    def from_map(d: Mapping[tuple[int, int], Fraction | int]) -> "DemandSet":
        norm: dict[tuple[int, int], Fraction] = {}
        for (a, b), v in d.items():
            if a == b:
                raise InputError("demand between a terminal and itself")
            key = (a, b) if a < b else (b, a)
            norm[key] = norm.get(key, Fraction(0)) + Fraction(v)
        items = tuple(sorted((k, v) for k, v in norm.items() if v > 0))
        return DemandSet(items)

    def as_dict(self) -> dict[tuple[int, int], Fraction]:
        return dict(self.pairs)

    def total_at(self, t: int) -> Fraction:
        return sum((v for (a, b), v in self.pairs if t in (a, b)), Fraction(0))

    @property
    def gamma(self) -> Fraction:
        """Smallest gamma such that the set is gamma-restricted."""
        best = Fraction(0)
        for t in {x for (a, b), _ in self.pairs for x in (a, b)}:
            best = max(best, self.total_at(t))
        return best

    @property
    def terminals(self) -> tuple[int, ...]:
        return tuple(sorted({x for (a, b), _ in self.pairs for x in (a, b)}))

    def __bool__(self) -> bool:
        return bool(self.pairs)


def read_demands(path) -> DemandSet:
    d: dict[tuple[int, int], Fraction] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.split()
            if toks[0] != "d" or len(toks) != 4:
                raise InputError(f"line {lineno}: demand lines are 'd <t1> <t2> <value>'")
            a, b = int(toks[1]), int(toks[2])
            v = Fraction(toks[3]) if "/" not in toks[3] else Fraction(*map(int, toks[3].split("/")))
            d[(a, b)] = d.get((a, b), Fraction(0)) + v
    return DemandSet.from_map(d)


def write_demands(dem: DemandSet, path) -> None:
    with open(path, "w") as fh:
        for (a, b), v in dem.pairs:
            fh.write(f"d {a} {b} {v}\n")


def write_flow(sol: FlowSolution, path) -> None:
    with open(path, "w") as fh:
        for eid in sorted(sol.edge_flow):
            fh.write(f"f {eid} {sol.edge_flow[eid]}\n")
        if sol.eta is not None:
            fh.write(f"eta {sol.eta}\n")


@dataclass
class RoutingResult:
    eta: Fraction | float  # exact congestion of `flow`; math.inf if unroutable
    flow: FlowSolution | None
    commodity_arcs: dict[int, dict[tuple[int, int], Fraction]] = field(default_factory=dict)
    lp_eta: float | None = None  # raw LP optimum (diagnostic)
    exact_lp: bool = False


def _commodities(dem: DemandSet, split_pairs: bool) -> dict[int, dict[int, Fraction]]:
    """Group demands by source.  With split_pairs each unordered pair (a,b)
    becomes two half-demands a->b and b->a (same optimum by symmetry), which
    yields the per-source fan-out flows cluster certificates need."""
    com: dict[int, dict[int, Fraction]] = defaultdict(dict)
    for (a, b), v in dem.pairs:
        if split_pairs:
            com[a][b] = com[a].get(b, Fraction(0)) + v / 2
            com[b][a] = com[b].get(a, Fraction(0)) + v / 2
        else:
            com[a][b] = com[a].get(b, Fraction(0)) + v
    return dict(sorted(com.items()))


def _arc_list(g: CapGraph) -> list[tuple[int, int]]:
    return [(e.eid, d) for e in g.edges if e.u != e.v for d in (0, 1)]


def _arc_ends(g: CapGraph, eid: int, d: int) -> tuple[int, int]:
    e = g.edges[eid]
    return (e.u, e.v) if d == 0 else (e.v, e.u)


def min_congestion_routing(
    g: CapGraph,
    demands: DemandSet,
    *,
    base_load: Mapping[int, Fraction] | None = None,
    split_pairs: bool = False,
    exact_max_vars: int = EXACT_LP_MAX_VARS,
    force_exact: bool = False,
) -> RoutingResult:
    """Route `demands` in g at minimum congestion.

    base_load contributes fixed flow already occupying edges (used for
    bucketed hairpin traffic); it is included in the congestion being
    minimized and in the reported eta.
    """
    base = {eid: Fraction(v) for eid, v in (base_load or {}).items()}
    for t in demands.terminals:
        if not g.has_vertex(t):
            raise InputError(f"demand on unknown vertex {t}")
        if g.terminals and t not in g.terminals:
            raise InputError(f"demand on non-terminal vertex {t}")
    if not demands:
        flow = FlowSolution({eid: v for eid, v in base.items()}, eta=Fraction(0))
        flow.eta = flow.congestion(g) if base else Fraction(0)
        return RoutingResult(flow.eta, flow, {}, None, True)
    comp_of: dict[int, int] = {}
    for ci, comp in enumerate(g.components()):
        for v in comp:
            comp_of[v] = ci
    for (a, b), v in demands.pairs:
        if comp_of[a] != comp_of[b]:
            return RoutingResult(INFEASIBLE, None)
    com = _commodities(demands, split_pairs)
    arcs = _arc_list(g)
    nC, nA = len(com), len(arcs)
    nvars = nC * nA + 1
    use_exact = force_exact or nvars <= exact_max_vars
    if use_exact:
        res = _solve_exact(g, com, arcs, base)
    else:
        res = _solve_float(g, com, arcs, base)
    return res


def _conservation_rows(g, com, arcs):
    """Yield (commodity index, vertex, {arc index: +-1}, rhs) equality rows.
    Inflow minus outflow at v equals the demand absorbed at v."""
    sources = list(com)
    for ci, src in enumerate(sources):
        sinks = com[src]
        for v in g.vertices:
            if v == src:
                continue
            coeff = {}
            for ai, (eid, d) in enumerate(arcs):
                u, w = _arc_ends(g, eid, d)
                if w == v:
                    coeff[ai] = coeff.get(ai, 0) + 1
                if u == v:
                    coeff[ai] = coeff.get(ai, 0) - 1
            rhs = sinks.get(v, Fraction(0))
            yield ci, v, coeff, rhs


def _solve_exact(g, com, arcs, base) -> RoutingResult:
    nC, nA = len(com), len(arcs)
    nvars = nC * nA + 1
    a_eq, b_eq = [], []
    for ci, _v, coeff, rhs in _conservation_rows(g, com, arcs):
        row = [Fraction(0)] * nvars
        for ai, s in coeff.items():
            row[ci * nA + ai] = Fraction(s)
        a_eq.append(row)
        b_eq.append(rhs)
    a_ub, b_ub = [], []
    for e in g.edges:
        if e.u == e.v:
            continue
        row = [Fraction(0)] * nvars
        for ci in range(nC):
            for ai, (eid, _d) in enumerate(arcs):
                if eid == e.eid:
                    row[ci * nA + ai] = Fraction(1)
        row[-1] = -e.cap
        a_ub.append(row)
        b_ub.append(-base.get(e.eid, Fraction(0)))
    c = [Fraction(0)] * (nvars - 1) + [Fraction(1)]
    lp = solve_lp(c, a_ub, b_ub, a_eq, b_eq)
    if lp.status != "optimal":
        return RoutingResult(INFEASIBLE, None)
    flows = {
        ci: {arcs[ai]: lp.x[ci * nA + ai] for ai in range(nA) if lp.x[ci * nA + ai] != 0}
        for ci in range(nC)
    }
    return _assemble(g, com, flows, base, lp_eta=float(lp.x[-1]), exact_lp=True)


def _solve_float(g, com, arcs, base) -> RoutingResult:
    nC, nA = len(com), len(arcs)
    nvars = nC * nA + 1
    rows, cols, vals, b_eq = [], [], [], []
    r = 0
    for ci, _v, coeff, rhs in _conservation_rows(g, com, arcs):
        for ai, s in coeff.items():
            rows.append(r)
            cols.append(ci * nA + ai)
            vals.append(float(s))
        b_eq.append(float(rhs))
        r += 1
    a_eq = sp.csr_matrix((vals, (rows, cols)), shape=(r, nvars))
    rows, cols, vals, b_ub = [], [], [], []
    r = 0
    for e in g.edges:
        if e.u == e.v:
            continue
        for ci in range(nC):
            for ai, (eid, _d) in enumerate(arcs):
                if eid == e.eid:
                    rows.append(r)
                    cols.append(ci * nA + ai)
                    vals.append(1.0)
        rows.append(r)
        cols.append(nvars - 1)
        vals.append(-float(e.cap))
        b_ub.append(-float(base.get(e.eid, Fraction(0))))
        r += 1
    a_ub = sp.csr_matrix((vals, (rows, cols)), shape=(r, nvars))
    c = np.zeros(nvars)
    c[-1] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=np.array(b_ub), A_eq=a_eq, b_eq=np.array(b_eq),
                  bounds=(0, None), method="highs")
    if not res.success:
        return RoutingResult(INFEASIBLE, None)
    flows = {}
    for ci in range(nC):
        f = {}
        for ai in range(nA):
            v = res.x[ci * nA + ai]
            if v > 1e-13:
                # dyadic quantization keeps downstream denominators small
                f[arcs[ai]] = Fraction(round(float(v) * (1 << 40)), 1 << 40)
        flows[ci] = f
    return _assemble(g, com, flows, base, lp_eta=float(res.x[-1]), exact_lp=False)


def _assemble(g, com, flows, base, lp_eta, exact_lp) -> RoutingResult:
    """Decompose per-commodity arc flows into paths, rescale so every demand
    is met exactly, and evaluate the resulting congestion exactly."""
    sources = list(com)
    paths: list[tuple[Fraction, tuple, list[int]]] = []
    commodity_arcs: dict[int, dict[tuple[int, int], Fraction]] = {}
    for ci, src in enumerate(sources):
        sinks = dict(com[src])
        total = sum(sinks.values(), Fraction(0))
        dust = Fraction(0) if exact_lp else total / 10**9
        raw = _peel_paths(g, src, sinks, flows.get(ci, {}), dust)
        by_sink: dict[int, list[int]] = defaultdict(list)
        for pi, (amt, dst, _p) in enumerate(raw):
            by_sink[dst].append(pi)
        fixed: list[tuple[Fraction, int, list[int]]] = []
        for dst, want in sinks.items():
            got = sum((raw[pi][0] for pi in by_sink.get(dst, [])), Fraction(0))
            if got == 0:
                path = _bfs_edge_path(g, src, dst)
                fixed.append((want, dst, path))
                continue
            scale = want / got
            for pi in by_sink[dst]:
                amt, _dst, p = raw[pi]
                fixed.append((amt * scale, dst, p))
        arcflow: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
        for amt, dst, p in fixed:
            if amt == 0:
                continue
            u = src
            for eid in p:
                e = g.edges[eid]
                v = e.other(u)
                arcflow[(eid, 0 if (u, v) == (e.u, e.v) else 1)] += amt
                u = v
            paths.append((amt, (src, dst), p))
        commodity_arcs[src] = dict(arcflow)
    edge_flow: dict[int, Fraction] = defaultdict(Fraction)
    for eid, v in base.items():
        edge_flow[eid] += v
    for arcs_ in commodity_arcs.values():
        for (eid, _d), v in arcs_.items():
            edge_flow[eid] += v
    eta = Fraction(0)
    for eid, f in edge_flow.items():
        eta = max(eta, f / g.edges[eid].cap)
    sol = FlowSolution(dict(edge_flow), paths, eta=eta, exact=True)
    return RoutingResult(eta, sol, commodity_arcs, lp_eta, exact_lp)


_ABSORB = "absorb"


def _peel_paths(g, src, sinks, arcflow, dust) -> list[tuple[Fraction, int, list[int]]]:
    """Path decomposition of one commodity's arc flow.

    Every sink t gets a synthetic absorber arc carrying exactly its demand,
    so walks from the source only terminate at the absorber and flow passing
    *through* one sink toward another is attributed correctly.  Exact LP
    flows peel losslessly (dust == 0); float-derived flows skip sub-dust arcs
    and leave residual imbalance for the per-sink rescale in the caller.
    """
    flow: dict = {k: v for k, v in arcflow.items() if v > 0}
    for t, d in sinks.items():
        if d > 0:
            flow[(_ABSORB, t)] = d
    sink_node = ("sink",)

    def ends(a):
        if a[0] == _ABSORB:
            return a[1], sink_node
        return _arc_ends(g, *a)

    out_arcs: dict = defaultdict(list)
    for a in sorted(flow, key=str):
        out_arcs[ends(a)[0]].append(a)
    result = []
    guard = 4 * len(flow) + 4 * len(sinks) + 64
    while guard > 0:
        guard -= 1
        # walk from src along positive arcs, cancelling cycles as found
        path: list = []
        at: dict = {src: 0}
        u = src
        while u != sink_node:
            nxt = None
            for a in out_arcs[u]:
                if flow.get(a, Fraction(0)) > dust:
                    nxt = a
                    break
            if nxt is None:
                break
            path.append(nxt)
            u = ends(nxt)[1]
            if u in at:
                cyc = path[at[u]:]
                amt = min(flow[a] for a in cyc)
                for a in cyc:
                    flow[a] -= amt
                del path[at[u]:]
                at = {src: 0}
                w = src
                for i, a in enumerate(path):
                    w = ends(a)[1]
                    at[w] = i + 1
                u = w if path else src
                continue
            at[u] = len(path)
        if not path:
            break
        if u != sink_node:
            # dead end off the absorber: numerical dust, drop the walked amount
            amt = min(flow[a] for a in path)
            for a in path:
                flow[a] -= amt
            continue
        amt = min(flow[a] for a in path)
        if amt <= 0:
            break
        for a in path:
            flow[a] -= amt
        dst = path[-1][1]  # absorber arc names its sink
        result.append((amt, dst, [eid for eid, _d in path[:-1]]))
    return result


def _bfs_edge_path(g, src, dst) -> list[int]:
    prev: dict[int, tuple[int, int]] = {}
    seen = {src}
    dq = deque([src])
    while dq:
        u = dq.popleft()
        if u == dst:
            break
        for e in g.incident(u):
            v = e.other(u)
            if v not in seen:
                seen.add(v)
                prev[v] = (u, e.eid)
                dq.append(v)
    if dst not in prev and dst != src:
        raise InputError(f"no path {src} -> {dst}")
    path = []
    u = dst
    while u != src:
        pu, eid = prev[u]
        path.append(eid)
        u = pu
    return list(reversed(path))


def uniform_exchange_demands(inst: SubdividedInstance) -> tuple[DemandSet, dict[int, Fraction]]:
    """Demands for the good-router test: every pair of boundary edge units
    exchanges 1/z each way.  Bundled form: pendant bundles i != j exchange
    2 w_i w_j / z, and same-bundle pairs appear as a fixed hairpin load of
    2 w_i (w_i - 1) / z on their shared pendant edge."""
    terms = list(inst.terminals)
    z = inst.z
    pairs: dict[tuple[int, int], Fraction] = {}
    base: dict[int, Fraction] = {}
    for i, ti in enumerate(terms):
        wi = inst.weight(ti)
        hair = 2 * wi * (wi - 1) / z
        if hair > 0:
            base[inst.pendant_edge(ti).eid] = hair
        for tj in terms[i + 1:]:
            wj = inst.weight(tj)
            pairs[(ti, tj)] = 2 * wi * wj / z
    return DemandSet.from_map(pairs), base


def uniform_router_check(
    g: CapGraph,
    members: Iterable[int],
    eta_bound: Fraction = Fraction(34),
    exact_max_vars: int = EXACT_LP_MAX_VARS,
) -> tuple[bool, RoutingResult, SubdividedInstance]:
    """Can every pair of boundary edges exchange 1/z flow each way inside the
    cluster with congestion at most eta_bound?  The returned flow is an
    exactly verifiable certificate when the answer is yes."""
    inst = subdivide_boundary(g, members)
    z = inst.z
    if z <= 1:
        empty = RoutingResult(Fraction(0), FlowSolution({}, eta=Fraction(0)), {}, None, True)
        return True, empty, inst
    dem, base = uniform_exchange_demands(inst)
    res = min_congestion_routing(
        inst.graph, dem, base_load=base, split_pairs=True, exact_max_vars=exact_max_vars
    )
    if res.eta == INFEASIBLE:
        return False, res, inst
    ok = res.eta <= eta_bound
    if not ok and not res.exact_lp and res.lp_eta is not None and res.lp_eta < float(eta_bound):
        # repair overshot a feasible optimum; one retry on the exact path if
        # remotely affordable, else stay conservative
        nvars = len(_commodities(dem, True)) * 2 * inst.graph.m + 1
        if nvars <= 4 * exact_max_vars:
            res = min_congestion_routing(
                inst.graph, dem, base_load=base, split_pairs=True, force_exact=True
            )
            ok = res.eta <= eta_bound
    return ok, res, inst


def boundary_path_system(
    g: CapGraph,
    members,
    e1: list[int],
    e2: list[int],
    congestion: int,
) -> list[list[int]] | None:
    """An integral 1:1 path system between equal-size boundary edge subsets,
    contained in the cluster, with inner-edge congestion at most the given
    bound; found by integral max flow, None if no such system exists."""
    from .flow import Net

    if len(e1) != len(e2):
        raise InputError("path system endpoints must have equal size")
    ms = frozenset(members)
    net = Net()
    e1s, e2s = set(e1), set(e2)
    for e in g.edges:
        if e.u in ms and e.v in ms and e.u != e.v:
            net.undirected(e.u, e.v, congestion * e.cap, key=e.eid)
    for eid in sorted(e1s):
        e = g.edges[eid]
        inside = e.u if e.u in ms else e.v
        net.arc(("S",), ("in", eid), 1)
        net.undirected(("in", eid), inside, 1, key=eid)
    for eid in sorted(e2s):
        e = g.edges[eid]
        inside = e.u if e.u in ms else e.v
        net.undirected(inside, ("out", eid), 1, key=eid)
        net.arc(("out", eid), ("T",), 1)
    val = net.max_flow(("S",), ("T",))
    if val < len(e1):
        return None
    paths = []
    for amt, _nodes, keys in net.decompose_paths(("S",), ("T",)):
        assert amt == 1
        epath = [k[0] if isinstance(k, tuple) else k for k in keys if k is not None]
        dedup = [epath[0]]
        for eid in epath[1:]:
            if eid != dedup[-1]:
                dedup.append(eid)
        paths.append(dedup)
    return paths
