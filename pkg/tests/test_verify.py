import json
import random
from fractions import Fraction

import pytest

from vsp.cutsparse import build_cut_sparsifier_unit
from vsp.flowsparse import FlowParams, RouterCertificate, build_flow_sparsifier_unit
from vsp.graph import CapGraph
from vsp.routing import DemandSet, min_congestion_routing
from vsp.verify import (
    recheck_router_certificates,
    reroute_through_clusters,
    verify_cut_quality,
    verify_flow_quality,
)

from util import random_unit_graph

F = Fraction
AGG = FlowParams(profile="aggressive")


def _flow_instance(seed):
    rng = random.Random(seed)
    n = rng.randint(6, 9)
    core = [(i, i + 1, 1) for i in range(1, n)]
    for _ in range(n):
        u, v = rng.sample(range(1, n + 1), 2)
        core.append((u, v, 1))
    k = rng.randint(3, 5)
    edges = list(core)
    terms = []
    for i, host in enumerate(rng.sample(range(1, n + 1), k)):
        t = 500 + i
        terms.append(t)
        edges.append((host, t, 1))
    return CapGraph(list(range(1, n + 1)) + terms, edges, terms)


def test_identity_sparsifier_q_one():
    g = random_unit_graph(random.Random(7), n=8, m=14, k=4)
    rep = verify_cut_quality(g, g)
    assert rep.ok and rep.q_observed == 1
    assert rep.flags["exhaustive"]
    assert rep.flags["tests"] == 2 ** (g.k - 1) - 1


def test_flow_identity_ratios_one():
    g = _flow_instance(3)
    rep = verify_flow_quality(g, g, strategies=("uniform", "matching"), samples=2)
    assert rep.ok
    assert rep.q_observed <= 1 + F(1, 10**5)


def test_report_json_shape():
    g = random_unit_graph(random.Random(9), n=7, m=12, k=3)
    rep = verify_cut_quality(g, g)
    payload = json.loads(rep.to_json())
    assert payload["mode"] == "cut"
    assert payload["violations"] == []
    assert "q_observed" in payload and "tests" in payload and "budget_flags" in payload


def test_flow_report_labels_sampling():
    g = _flow_instance(4)
    sp = build_flow_sparsifier_unit(g, AGG)
    rep = verify_flow_quality(g, sp.graph, samples=2, quality_bound=F(68), sparsifier=sp)
    assert rep.ok, rep.violations
    assert rep.flags["sampled"] is True
    assert rep.q_observed >= 1


def test_router_recheck_detects_flow_perturbation():
    g = _flow_instance(5)
    sp = build_flow_sparsifier_unit(g, AGG)
    assert recheck_router_certificates(sp)["ok"]
    cert = sp.certificates[0]
    src = next(iter(cert.commodity_arcs))
    arcs = dict(cert.commodity_arcs[src])
    key = next(iter(arcs))
    arcs[key] = arcs[key] + 1  # one flow value nudged up
    bad = RouterCertificate(
        cert.members, cert.boundary, cert.z, cert.eta, cert.wl_alpha,
        cert.wl_source, {**cert.commodity_arcs, src: arcs}, cert.hairpin,
    )
    sp.certificates[0] = bad
    rep = recheck_router_certificates(sp)
    assert not rep["ok"]
    assert any("router-flows" == name and not ok for name, ok, _ in rep["checks"])


def test_router_recheck_detects_membership_corruption():
    g = _flow_instance(6)
    sp = build_flow_sparsifier_unit(g, AGG)
    cert = sp.certificates[0]
    moved = set(cert.members)
    moved.discard(min(moved))
    if not moved:
        pytest.skip("single-vertex cluster")
    bad = RouterCertificate(
        frozenset(moved), cert.boundary, cert.z, cert.eta, cert.wl_alpha,
        cert.wl_source, cert.commodity_arcs, cert.hairpin,
    )
    sp.certificates[0] = bad
    rep = recheck_router_certificates(sp)
    assert not rep["ok"]


def test_star_supernode_recheck_low_congestion():
    k = 5
    g = CapGraph(
        [1] + [10 + i for i in range(k)],
        [(1, 10 + i, 1) for i in range(k)],
        [10 + i for i in range(k)],
    )
    sp = build_flow_sparsifier_unit(g, AGG)
    assert recheck_router_certificates(sp)["ok"]
    assert all(c.eta < 2 for c in sp.certificates)


def test_lower_side_violation_detected():
    # deleting an edge from H lets some cut drop below G's
    g = _flow_instance(8)
    sp = build_cut_sparsifier_unit(g)
    h = sp.graph
    if h.m < 2:
        pytest.skip("degenerate")
    broken = CapGraph(h.vertices, [e.ends() + (e.cap,) for e in h.edges[1:]], h.terminals)
    rep = verify_cut_quality(g, broken)
    assert not rep.ok


def test_composed_flow_bound_random():
    rng = random.Random(12)
    for seed in range(3):
        g = _flow_instance(20 + seed)
        sp = build_flow_sparsifier_unit(g, AGG)
        terms = sorted(g.terminals)
        d = {}
        for _ in range(3):
            a, b = rng.sample(terms, 2)
            d[(min(a, b), max(a, b))] = F(rng.randint(1, 4), 2)
        dem = DemandSet.from_map(d)
        rh = min_congestion_routing(sp.graph, dem)
        if rh.flow is None:
            continue
        composed = reroute_through_clusters(sp, rh)
        assert composed <= 2 * F(34) * rh.eta * (1 + 2 * F(1, 10**6))
