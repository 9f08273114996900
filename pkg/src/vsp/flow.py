"""Exact maximum flow / minimum cut.

All capacities are rationals; internally every instance is scaled by the
common denominator so Dinic runs on integers and both the flow value and
the cut certificate are exact.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Hashable, Iterable, Mapping

from .errors import InputError
from .graph import CapGraph, Edge


class Net:
    """A directed flow network over arbitrary hashable node names.

    Undirected edges become arc pairs sharing residual capacity.  Arcs can
    carry a caller key so flows and paths can be mapped back to graph edges.
    """

    def __init__(self):
        self._nodes: dict[Hashable, int] = {}
        self._names: list[Hashable] = []
        self._head: list[int] = []
        self._to: list[int] = []
        self._cap: list[int] = []
        self._next: list[int] = []
        self._key: list[Hashable] = []
        self._den = 1  # common capacity denominator
        self._flowed = False

    def _node(self, name: Hashable) -> int:
        idx = self._nodes.get(name)
        if idx is None:
            idx = len(self._names)
            self._nodes[name] = idx
            self._names.append(name)
            self._head.append(-1)
        return idx

    def ensure_node(self, name: Hashable) -> None:
        self._node(name)

    def _push_arc(self, u: int, v: int, cap: int, key: Hashable):
        self._to.append(v)
        self._cap.append(cap)
        self._key.append(key)
        self._next.append(self._head[u])
        self._head[u] = len(self._to) - 1

    def _rescale(self, den: int):
        if den == self._den:
            return
        g = den // self._den
        self._cap = [c * g for c in self._cap]
        self._den = den

    def arc(self, u: Hashable, v: Hashable, cap: Fraction | int, key: Hashable = None):
        """Directed arc u->v; the implicit reverse residual has capacity 0."""
        cap = Fraction(cap)
        self._rescale(lcm(self._den, cap.denominator))
        ui, vi = self._node(u), self._node(v)
        c = int(cap * self._den)
        self._push_arc(ui, vi, c, key)
        self._push_arc(vi, ui, 0, None)

    def undirected(self, u: Hashable, v: Hashable, cap: Fraction | int, key: Hashable = None):
        """Undirected edge: arc pair, each side with the full capacity."""
        cap = Fraction(cap)
        self._rescale(lcm(self._den, cap.denominator))
        ui, vi = self._node(u), self._node(v)
        c = int(cap * self._den)
        self._push_arc(ui, vi, c, (key, 0) if key is not None else None)
        self._push_arc(vi, ui, c, (key, 1) if key is not None else None)

    def max_flow(self, s: Hashable, t: Hashable) -> Fraction:
        if s not in self._nodes or t not in self._nodes:
            return Fraction(0)
        si, ti = self._nodes[s], self._nodes[t]
        if si == ti:
            raise InputError("source equals sink")
        self._orig_cap = list(self._cap)
        n = len(self._names)
        total = 0
        level = [0] * n
        it = [0] * n
        while True:
            for i in range(n):
                level[i] = -1
            level[si] = 0
            dq = deque([si])
            while dq:
                u = dq.popleft()
                a = self._head[u]
                while a != -1:
                    v = self._to[a]
                    if self._cap[a] > 0 and level[v] < 0:
                        level[v] = level[u] + 1
                        dq.append(v)
                    a = self._next[a]
            if level[ti] < 0:
                break
            for i in range(n):
                it[i] = self._head[i]
            while True:
                f = self._dfs(si, ti, level, it)
                if f == 0:
                    break
                total += f
        self._flowed = True
        self._last = (si, ti)
        return Fraction(total, self._den)

    def _dfs(self, s: int, t: int, level, it) -> int:
        # one augmenting path in the level graph, iteratively
        nodes = [s]
        path: list[int] = []
        while True:
            u = nodes[-1]
            if u == t:
                amt = min(self._cap[a] for a in path)
                for a in path:
                    self._cap[a] -= amt
                    self._cap[a ^ 1] += amt
                return amt
            a = it[u]
            while a != -1:
                if self._cap[a] > 0 and level[self._to[a]] == level[u] + 1:
                    break
                a = self._next[a]
            it[u] = a
            if a == -1:
                level[u] = -1
                nodes.pop()
                if not nodes:
                    return 0
                path.pop()
            else:
                path.append(a)
                nodes.append(self._to[a])

    def min_cut_source_side(self) -> set[Hashable]:
        """Nodes reachable from the source in the residual graph (call after
        max_flow); the arcs leaving this set form a minimum cut."""
        assert self._flowed
        si, _ = self._last
        seen = {si}
        dq = deque([si])
        while dq:
            u = dq.popleft()
            a = self._head[u]
            while a != -1:
                v = self._to[a]
                if self._cap[a] > 0 and v not in seen:
                    seen.add(v)
                    dq.append(v)
                a = self._next[a]
        return {self._names[i] for i in seen}

    def flow_by_key(self) -> dict[Hashable, Fraction]:
        """Net flow per caller key.  Undirected keys (key, 0)/(key, 1) are
        combined into a signed net on `key` (positive = the (key,0) direction)."""
        assert self._flowed
        out: dict[Hashable, Fraction] = {}
        for a in range(0, len(self._to), 2):
            key = self._key[a]
            if key is None:
                continue
            pushed = Fraction(self._orig_cap[a] - self._cap[a], self._den)
            if isinstance(key, tuple) and len(key) == 2 and key[1] in (0, 1):
                base, side = key
                sign = 1 if side == 0 else -1
                out[base] = out.get(base, Fraction(0)) + sign * pushed
            else:
                out[key] = out.get(key, Fraction(0)) + pushed
        return out

    def decompose_paths(
        self, s: Hashable, t: Hashable
    ) -> list[tuple[Fraction, list[Hashable], list[Hashable]]]:
        """Peel the current flow into (amount, [node names], [arc keys]) paths
        from s to t.  On unit-capacity instances the paths are edge-disjoint."""
        assert self._flowed
        si, ti = self._nodes[s], self._nodes[t]
        # net flow through an arc pair is orig - cap on the even arc (the
        # shared-residual trick already nets opposite pushes)
        flow = [0] * len(self._to)
        for a in range(0, len(self._to), 2):
            net = self._orig_cap[a] - self._cap[a]
            if net >= 0:
                flow[a], flow[a + 1] = net, 0
            else:
                flow[a], flow[a + 1] = 0, -net
        paths = []
        while True:
            # walk greedily from s along positive-flow arcs
            path_arcs = []
            u = si
            seen_nodes = {si}
            while u != ti:
                a = self._head[u]
                chosen = -1
                while a != -1:
                    if flow[a] > 0 and self._to[a] not in seen_nodes:
                        chosen = a
                        break
                    a = self._next[a]
                if chosen == -1:
                    # allow revisits only to break out of dead ends via cycles
                    a = self._head[u]
                    while a != -1:
                        if flow[a] > 0:
                            chosen = a
                            break
                        a = self._next[a]
                if chosen == -1:
                    break
                path_arcs.append(chosen)
                u = self._to[chosen]
                seen_nodes.add(u)
            if u != ti or not path_arcs:
                break
            amt = min(flow[a] for a in path_arcs)
            for a in path_arcs:
                flow[a] -= amt
            paths.append(
                (
                    Fraction(amt, self._den),
                    [self._names[self._to[a]] for a in path_arcs],
                    [self._key[a] for a in path_arcs],
                )
            )
        return paths


@dataclass(frozen=True)
class CutCertificate:
    """A vertex bipartition with its exactly re-checkable cut value.  For
    sparsest cuts the terminal weights per side and the sparsity are set."""

    side_a: frozenset[int]
    side_b: frozenset[int]
    value: Fraction
    term_a: Fraction | None = None
    term_b: Fraction | None = None
    sparsity: Fraction | None = None

    def recheck_value(self, g: CapGraph) -> Fraction:
        total = Fraction(0)
        for e in g.edges:
            if (e.u in self.side_a) != (e.v in self.side_a):
                total += e.cap
        return total


@dataclass
class FlowSolution:
    """Edge flows of one routing plus enough structure to re-verify it.

    edge_flow maps edge id -> total (unsigned) flow through the edge;
    paths, when present, are (amount, (src, dst), [edge ids]).
    """

    edge_flow: dict[int, Fraction]
    paths: list[tuple[Fraction, tuple, list[int]]] = field(default_factory=list)
    eta: Fraction | None = None
    exact: bool = True

    def congestion(self, g: CapGraph) -> Fraction:
        worst = Fraction(0)
        caps = {e.eid: e.cap for e in g.edges}
        for eid, f in self.edge_flow.items():
            worst = max(worst, abs(f) / caps[eid])
        return worst


def _graph_net(g: CapGraph) -> Net:
    net = Net()
    for e in g.edges:
        if e.u != e.v:
            net.undirected(e.u, e.v, e.cap, key=e.eid)
    for v in g.vertices:
        net.ensure_node(v)
    return net


def max_flow(
    g: CapGraph, sources: Iterable[int], sinks: Iterable[int]
) -> tuple[Fraction, FlowSolution, CutCertificate]:
    """Exact max flow between vertex sets (merged via a super source/sink).
    Returns value, a flow attaining it, and a minimum cut of equal value."""
    src = sorted(set(sources))
    snk = sorted(set(sinks))
    if not src or not snk:
        raise InputError("empty source or sink set")
    if set(src) & set(snk):
        raise InputError("sources and sinks overlap")
    for v in src + snk:
        if not g.has_vertex(v):
            raise InputError(f"unknown vertex id {v}")
    net = _graph_net(g)
    big = sum((e.cap for e in g.edges), Fraction(0)) + 1
    for v in src:
        net.arc(("S",), v, big)
    for v in snk:
        net.arc(v, ("T",), big)
    value = net.max_flow(("S",), ("T",))
    side = net.min_cut_source_side()
    side_a = frozenset(v for v in g.vertices if v in side)
    side_b = frozenset(g.vertices) - side_a
    flows = net.flow_by_key()
    sol = FlowSolution({eid: abs(f) for eid, f in flows.items() if f != 0})
    cert = CutCertificate(side_a, side_b, value)
    return value, sol, cert


def min_cut_between(
    g: CapGraph, term_a: Iterable[int], term_b: Iterable[int]
) -> tuple[Fraction, CutCertificate]:
    """Capacity of the minimum cut separating two disjoint terminal sets."""
    ta, tb = sorted(set(term_a)), sorted(set(term_b))
    if set(ta) & set(tb):
        raise InputError("terminal sides overlap")
    value, _, cert = max_flow(g, ta, tb)
    return value, cert


def flow_conserves(
    g: CapGraph, arc_flow: Mapping[tuple[int, int], Fraction], sources: Mapping[int, Fraction]
) -> bool:
    """Check exact conservation: net outflow at v equals sources[v] (negative
    for sinks), zero elsewhere.  arc_flow is keyed by (edge id, direction)."""
    net: dict[int, Fraction] = {}
    for (eid, d), f in arc_flow.items():
        e = g.edges[eid]
        u, v = (e.u, e.v) if d == 0 else (e.v, e.u)
        net[u] = net.get(u, Fraction(0)) + f
        net[v] = net.get(v, Fraction(0)) - f
    for v in g.vertices:
        if net.get(v, Fraction(0)) != sources.get(v, Fraction(0)):
            return False
    return True
