"""Independent quality certification.

Cut quality is verified exhaustively: every nontrivial terminal bipartition
is priced in both graphs with exact arithmetic.  Flow quality cannot be
enumerated, so the verifier combines (a) exact re-checks of every cluster's
router certificate, which are the premises of the contraction quality
argument, (b) sampled demand sets compared through the LP at tolerance
delta, and (c) the constructive re-routing of each H-flow through the
cluster routers, whose congestion is evaluated exactly.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .cutsparse import CutSparsifier, cut_value, lift_cut, project_cut
from .errors import BudgetExceeded, InputError
from .flow import min_cut_between
from .flowsparse import RouterCertificate, RouterSparsifier
from .graph import CapGraph, out_edges, subdivide_boundary
from .routing import INFEASIBLE, DemandSet, min_congestion_routing
from .sparsecut import is_well_linked

DEFAULT_CUT_ENUM_BUDGET = 16
DEFAULT_DELTA = Fraction(1, 10**6)


@dataclass
class QualityReport:
    mode: str  # "cut" | "flow"
    q_observed: Fraction | None
    records: list[dict] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    delta: Fraction = DEFAULT_DELTA

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> str:
        def enc(x):
            if isinstance(x, Fraction):
                return str(x)
            if isinstance(x, frozenset):
                return sorted(x)
            return x

        payload = {
            "mode": self.mode,
            "q_observed": enc(self.q_observed),
            "q_observed_float": None if self.q_observed is None else float(self.q_observed),
            "delta": float(self.delta),
            "tests": [{k: enc(v) for k, v in r.items()} for r in self.records],
            "violations": list(self.violations),
            "budget_flags": {k: enc(v) for k, v in self.flags.items()},
        }
        return json.dumps(payload, indent=1)


def _bipartitions(terms: list[int], budget: int, seed: int) -> tuple[list[tuple], bool]:
    k = len(terms)
    total = (1 << (k - 1)) - 1
    if k <= budget:
        out = []
        for mask in range(0, total + 1):
            a = [terms[0]] + [terms[i + 1] for i in range(k - 1) if mask >> i & 1]
            # mask enumerates the side containing terms[0]'s companions;
            # complement once to cover every split exactly once
            b = [t for t in terms if t not in a]
            if b:
                out.append((tuple(a), tuple(b)))
        return out, True
    rng = random.Random(seed)
    seen = set()
    out = []
    while len(out) < 2 * budget * budget:
        mask = rng.randint(1, total)
        if mask in seen:
            continue
        seen.add(mask)
        a = [terms[0]] + [terms[i + 1] for i in range(k - 1) if mask >> i & 1]
        b = [t for t in terms if t not in a]
        out.append((tuple(a), tuple(b)))
    return out, False


def verify_cut_quality(
    g: CapGraph,
    h: CapGraph,
    enum_budget: int = DEFAULT_CUT_ENUM_BUDGET,
    seed: int = 0,
) -> QualityReport:
    """Price every nontrivial terminal bipartition in G and H exactly.
    Beyond the enumeration budget a seeded sample is used and flagged."""
    if sorted(g.terminals) != sorted(h.terminals):
        raise InputError("graphs disagree on the terminal set")
    terms = list(g.terminals)
    rep = QualityReport("cut", None)
    if len(terms) < 2:
        rep.q_observed = Fraction(1)
        rep.flags["exhaustive"] = True
        return rep
    splits, exhaustive = _bipartitions(terms, enum_budget, seed)
    rep.flags["exhaustive"] = exhaustive
    if not exhaustive:
        rep.flags["non_exhaustive"] = True
    rep.flags["tests"] = len(splits)
    worst = Fraction(1)
    for i, (ta, tb) in enumerate(splits):
        vg, _ = min_cut_between(g, ta, tb)
        vh, _ = min_cut_between(h, ta, tb)
        if vg == 0 and vh == 0:
            ratio = Fraction(1)
        elif vg == 0:
            ratio = None
            rep.violations.append(f"test {i}: MinCut_G = 0 but MinCut_H = {vh}")
        else:
            ratio = vh / vg
            if vh < vg:
                rep.violations.append(
                    f"test {i}: lower side violated, H {vh} < G {vg} on {sorted(ta)}"
                )
        rep.records.append(
            {"id": i, "side_a": list(ta), "g": vg, "h": vh, "ratio": ratio}
        )
        if ratio is not None:
            worst = max(worst, ratio)
    rep.q_observed = worst
    return rep


def verify_cut_projection(g_unit: CapGraph, sp: CutSparsifier, seed: int = 0,
                          enum_budget: int = DEFAULT_CUT_ENUM_BUDGET) -> QualityReport:
    """Exercise the rounding argument directly: for every enumerated
    bipartition, project H's minimum cut to G (equal value) and lift G's
    minimum cut to an H-cut of at most 3x the value."""
    rep = QualityReport("cut", None)
    terms = list(g_unit.terminals)
    if len(terms) < 2:
        rep.q_observed = Fraction(1)
        return rep
    splits, exhaustive = _bipartitions(terms, enum_budget, seed)
    rep.flags["exhaustive"] = exhaustive
    clusters = sp.cluster_sets()
    worst = Fraction(1)
    for i, (ta, tb) in enumerate(splits):
        vg, cert = min_cut_between(g_unit, ta, tb)
        lifted_side, _steps = lift_cut(g_unit, clusters, cert.side_a)
        lifted_val = cut_value(g_unit, lifted_side)
        if vg > 0 and lifted_val > 3 * vg:
            rep.violations.append(f"test {i}: lift {lifted_val} > 3 x {vg}")
        # projection: H's min cut expands to a G-cut of identical value
        vh, hcert = min_cut_between(sp.graph, ta, tb)
        back = project_cut(g_unit, sp.cmap, hcert.side_a)
        if cut_value(sp.graph, hcert.side_a) != cut_value(g_unit, back):
            rep.violations.append(f"test {i}: projection changed the cut value")
        if vg > 0:
            worst = max(worst, lifted_val / vg)
        rep.records.append({"id": i, "g": vg, "lift": lifted_val, "h": vh})
    rep.q_observed = worst
    return rep


# --------------------------------------------------------------------------
# demand strategies


def demand_strategies(
    g: CapGraph, strategy: str, samples: int, seed: int
) -> list[DemandSet]:
    terms = sorted(g.terminals)
    k = len(terms)
    if k < 2:
        return []
    rng = random.Random(seed)
    out: list[DemandSet] = []
    if strategy == "uniform":
        d = {
            (a, b): Fraction(1, k)
            for i, a in enumerate(terms)
            for b in terms[i + 1:]
        }
        out.append(DemandSet.from_map(d))
    elif strategy == "matching":
        for _ in range(samples):
            order = terms[:]
            rng.shuffle(order)
            d = {}
            for i in range(0, k - 1, 2):
                d[(order[i], order[i + 1])] = Fraction(1)
            out.append(DemandSet.from_map(d))
    elif strategy == "gravity":
        degs = {t: g.degree(t) for t in terms}
        total = sum(degs.values(), Fraction(0))
        d = {}
        for i, a in enumerate(terms):
            for b in terms[i + 1:]:
                d[(a, b)] = degs[a] * degs[b] / total
        out.append(DemandSet.from_map(d))
    elif strategy == "random":
        for _ in range(samples):
            d = {}
            npairs = rng.randint(1, max(1, k))
            for _ in range(npairs):
                a, b = rng.sample(terms, 2)
                d[(min(a, b), max(a, b))] = Fraction(rng.randint(1, 8), 4)
            out.append(DemandSet.from_map(d))
    else:
        raise InputError(f"unknown demand strategy {strategy!r}")
    return out


def adversarial_demands(
    g: CapGraph,
    h: CapGraph,
    rounds: int,
    seed: int,
    exact_max_vars: int = 200,
) -> tuple[DemandSet, Fraction]:
    """Local search over the demand simplex for the worst eta(G)/eta(H)
    ratio; returns the best demand set found and its ratio."""
    terms = sorted(g.terminals)
    rng = random.Random(seed)
    pairs = [(a, b) for i, a in enumerate(terms) for b in terms[i + 1:]]
    weights = {p: Fraction(1) for p in pairs}

    def ratio_of(ws) -> Fraction | None:
        dem = DemandSet.from_map(dict(ws))
        rg = min_congestion_routing(g, dem, exact_max_vars=exact_max_vars)
        rh = min_congestion_routing(h, dem, exact_max_vars=exact_max_vars)
        if rg.eta == INFEASIBLE or rh.eta == INFEASIBLE or rh.eta == 0:
            return None
        return rg.eta / rh.eta

    best = ratio_of(weights) or Fraction(1)
    best_w = dict(weights)
    for _ in range(rounds):
        trial = dict(best_w)
        p = rng.choice(pairs)
        trial[p] = trial[p] * Fraction(rng.choice([2, 3, 1]), rng.choice([1, 2]))
        r = ratio_of(trial)
        if r is not None and r > best:
            best, best_w = r, trial
    return DemandSet.from_map(best_w), best


def verify_flow_quality(
    g: CapGraph,
    h: CapGraph,
    strategies: Iterable[str] = ("uniform", "matching", "gravity"),
    samples: int = 5,
    seed: int = 0,
    delta: Fraction = DEFAULT_DELTA,
    quality_bound: Fraction | None = None,
    exact_max_vars: int = 200,
    sparsifier: RouterSparsifier | None = None,
) -> QualityReport:
    """Sampled flow-quality report.  q_observed is a lower bound on the true
    flow quality (sampling cannot prove an upper bound); the upper bound is
    certified separately through the router certificates.  When a sparsifier
    is supplied, every sampled H-flow is also re-routed through the cluster
    routers and the composed congestion compared against 2 eta* eta(H,D)."""
    if sorted(g.terminals) != sorted(h.terminals):
        raise InputError("graphs disagree on the terminal set")
    rep = QualityReport("flow", None, delta=delta)
    rep.flags["sampled"] = True
    tol = 1 + 2 * delta
    worst = Fraction(1)
    tid = 0
    for strat in strategies:
        for dem in demand_strategies(g, strat, samples, seed + tid):
            if not dem:
                continue
            rg = min_congestion_routing(g, dem, exact_max_vars=exact_max_vars)
            rh = min_congestion_routing(h, dem, exact_max_vars=exact_max_vars)
            rec = {"id": tid, "strategy": strat, "pairs": len(dem.pairs)}
            tid += 1
            if rg.eta == INFEASIBLE or rh.eta == INFEASIBLE:
                both = rg.eta == INFEASIBLE and rh.eta == INFEASIBLE
                rec.update({"g": "inf", "h": "inf" if both else rh.eta, "ratio": None})
                if not both:
                    rep.violations.append(f"test {rec['id']}: disconnection disagreement")
                rep.records.append(rec)
                continue
            rec.update({"g": rg.eta, "h": rh.eta})
            if rh.eta > rg.eta * tol:
                rep.violations.append(
                    f"test {rec['id']}: lower side violated, eta_H {rh.eta} > eta_G {rg.eta}"
                )
            ratio = None
            if rh.eta > 0:
                ratio = rg.eta / rh.eta
                worst = max(worst, ratio)
                if quality_bound is not None and ratio > quality_bound * tol:
                    rep.violations.append(
                        f"test {rec['id']}: ratio {float(ratio):.3f} above quality bound"
                    )
            rec["ratio"] = ratio
            if sparsifier is not None and rh.flow is not None and rh.eta > 0:
                composed = reroute_through_clusters(sparsifier, rh)
                rec["composed"] = composed
                bound = 2 * sparsifier.params.eta_star * rh.eta * tol
                if composed > bound:
                    rep.violations.append(
                        f"test {rec['id']}: composed congestion {float(composed):.3f} "
                        f"exceeds 2 eta* eta_H = {float(bound):.3f}"
                    )
            rep.records.append(rec)
    rep.q_observed = worst
    return rep


# --------------------------------------------------------------------------
# re-routing an H-flow through the cluster routers (the constructive bound)


def project_cluster_demands(
    sp: RouterSparsifier, h_result
) -> dict[frozenset, dict[tuple[int, int], Fraction]]:
    """Split every H-flow path at the supernodes it traverses, accumulating
    per-cluster boundary-pair demands (keyed by parent-graph edge ids)."""
    h = sp.graph
    by_super = {s: c for s, c in zip(sp.cmap.supernode, sp.cmap.clusters)}
    emap = sp.cmap.edge_map
    out: dict[frozenset, dict[tuple[int, int], Fraction]] = {
        c: {} for c in sp.cmap.clusters
    }
    for amt, (src, _dst), epath in h_result.flow.paths:
        v = src
        prev_geid = None
        for heid in epath:
            e = h.edges[heid]
            w = e.other(v)
            geid = emap[heid]
            if v in by_super and prev_geid is not None:
                c = by_super[v]
                a, b = sorted((prev_geid, geid))
                if a != b:
                    d = out[c]
                    d[(a, b)] = d.get((a, b), Fraction(0)) + amt
            prev_geid = geid
            v = w
        # a path may also end inside... terminals are never supernodes
    return out


def reroute_through_clusters(sp: RouterSparsifier, h_result) -> Fraction:
    """Exact congestion of the composed flow: H-loads on surviving edges plus
    each cluster's demand mass pushed through its certified fan-out flows."""
    g = sp.unit_graph
    if g is None:
        raise InputError("sparsifier carries no working graph")
    caps = {e.eid: e.cap for e in g.edges}
    load: dict[int, Fraction] = {}
    emap = sp.cmap.edge_map
    for heid, f in h_result.flow.edge_flow.items():
        load[emap[heid]] = load.get(emap[heid], Fraction(0)) + f
    demands = project_cluster_demands(sp, h_result)
    for cert in sp.certificates:
        dem = demands.get(cert.members, {})
        if not dem:
            continue
        w_at: dict[int, Fraction] = {}
        for (a, b), x in dem.items():
            w_at[a] = w_at.get(a, Fraction(0)) + x
            w_at[b] = w_at.get(b, Fraction(0)) + x
        for eid, w in w_at.items():
            scale = w / caps[eid]
            for ieid, l in cert.inner_load(eid).items():
                load[ieid] = load.get(ieid, Fraction(0)) + scale * l
    worst = Fraction(0)
    for eid, f in load.items():
        worst = max(worst, f / caps[eid])
    return worst


def cluster_demand_restriction(
    sp: RouterSparsifier, h_result
) -> Fraction:
    """max over clusters and boundary edges of (demand mass at the edge) /
    (edge capacity); at most eta(H) for any feasible H-flow."""
    g = sp.unit_graph
    caps = {e.eid: e.cap for e in g.edges}
    worst = Fraction(0)
    for cert_members, dem in project_cluster_demands(sp, h_result).items():
        w_at: dict[int, Fraction] = {}
        for (a, b), x in dem.items():
            w_at[a] = w_at.get(a, Fraction(0)) + x
            w_at[b] = w_at.get(b, Fraction(0)) + x
        for eid, w in w_at.items():
            worst = max(worst, w / caps[eid])
    return worst


# --------------------------------------------------------------------------
# router certificate re-checks


def recheck_router_certificates(sp: RouterSparsifier) -> dict:
    """Re-derive every stored router certificate from scratch: structural
    sanity, exact conservation and delivery of the fan-out flows, congestion
    at most eta* including hairpin loads, and 1/3-well-linkedness where the
    budget allows.  Failures are report entries."""
    g = sp.unit_graph
    checks: list[tuple[str, bool, str]] = []

    def add(name, ok, detail=""):
        checks.append((name, ok, detail))

    seen: set[int] = set()
    ok_struct = True
    for cert in sp.certificates:
        if cert.members & seen:
            ok_struct = False
        seen |= cert.members
        if any(g.is_terminal(v) for v in cert.members):
            ok_struct = False
        if not g.is_connected_subset(cert.members):
            ok_struct = False
        real = out_edges(g, cert.members)
        if tuple(sorted(e.eid for e in real)) != cert.boundary:
            ok_struct = False
    add("structure", ok_struct, f"{len(sp.certificates)} clusters disjoint, terminal-free, connected")

    ok_flow, detail = True, []
    for ci, cert in enumerate(sp.certificates):
        err = _recheck_one_router(g, cert, sp.params.eta_star)
        if err:
            ok_flow = False
            detail.append(f"cluster {ci}: {err}")
    add("router-flows", ok_flow, "; ".join(detail) or "conservation, delivery, congestion <= eta*")

    ok_wl, detail = True, []
    for ci, cert in enumerate(sp.certificates):
        if cert.wl_alpha is None:
            continue
        try:
            ok, viol = is_well_linked(g, cert.members, cert.wl_alpha, budget=sp.params.enum_budget)
        except BudgetExceeded:
            detail.append(f"cluster {ci}: skipped (budget)")
            continue
        if not ok:
            ok_wl = False
            detail.append(f"cluster {ci}: sparsity {viol.sparsity}")
    add("well-linked", ok_wl, "; ".join(detail) or "all clusters 1/3-well-linked")

    return {"ok": all(ok for _n, ok, _d in checks), "checks": checks}


def _recheck_one_router(g: CapGraph, cert: RouterCertificate, eta_star: Fraction) -> str:
    inst = subdivide_boundary(g, cert.members)
    z = inst.z
    if z <= 1:
        return ""
    to_inst: dict[int, int] = {}
    for ieid, geid in inst.inner_edge_of.items():
        to_inst[geid] = ieid
    pend_term: dict[int, int] = {}
    for t in inst.terminals:
        to_inst[inst.pendant_of[t]] = inst.pendant_edge(t).eid
        pend_term[inst.pendant_of[t]] = t
    weights = {inst.pendant_of[t]: inst.weight(t) for t in inst.terminals}
    load: dict[int, Fraction] = {}
    for src_eid, arcs in cert.commodity_arcs.items():
        wi = weights.get(src_eid)
        if wi is None:
            return f"unknown source edge {src_eid}"
        inst_arcs = {}
        for (geid, d), v in arcs.items():
            if geid not in to_inst:
                return f"flow on edge {geid} outside the cluster"
            inst_arcs[(to_inst[geid], d)] = v
            load[geid] = load.get(geid, Fraction(0)) + v
        # expected divergence: the source pendant ships w_i w_j / z to each
        # other pendant
        total = sum(
            (wi * weights[o] / z for o in weights if o != src_eid), Fraction(0)
        )
        sources = {pend_term[src_eid]: total}
        for o, wo in weights.items():
            if o != src_eid:
                sources[pend_term[o]] = -(wi * wo / z)
        from .flow import flow_conserves

        if not flow_conserves(inst.graph, inst_arcs, sources):
            return f"conservation or delivery fails for source {src_eid}"
    for eid, v in cert.hairpin.items():
        want = 2 * weights[eid] * (weights[eid] - 1) / z
        if v != want:
            return f"hairpin load on {eid} is {v}, expected {want}"
        load[eid] = load.get(eid, Fraction(0)) + v
    caps = {e.eid: e.cap for e in g.edges}
    worst = Fraction(0)
    for eid, v in load.items():
        worst = max(worst, v / caps[eid])
    if worst > eta_star:
        return f"congestion {worst} exceeds eta* {eta_star}"
    if worst > cert.eta:
        return f"recomputed congestion {worst} above the stored {cert.eta}"
    return ""
