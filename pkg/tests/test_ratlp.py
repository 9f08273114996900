import random
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from vsp.ratlp import solve_lp

F = Fraction


def test_tiny_known_optimum():
    # min -x - y  s.t.  x + y <= 4, x <= 3, y <= 2
    res = solve_lp(
        c=[F(-1), F(-1)],
        a_ub=[[F(1), F(1)], [F(1), F(0)], [F(0), F(1)]],
        b_ub=[F(4), F(3), F(2)],
    )
    assert res.status == "optimal"
    assert res.objective == -4


def test_equality_constraints():
    # min x + 2y  s.t.  x + y == 3, x - y <= 1
    res = solve_lp(
        c=[F(1), F(2)],
        a_ub=[[F(1), F(-1)]],
        b_ub=[F(1)],
        a_eq=[[F(1), F(1)]],
        b_eq=[F(3)],
    )
    assert res.status == "optimal"
    assert res.objective == F(4)  # x=2, y=1


def test_infeasible():
    res = solve_lp(c=[F(1)], a_eq=[[F(1)]], b_eq=[F(-2)])
    assert res.status == "infeasible"


def test_unbounded():
    res = solve_lp(c=[F(-1)], a_ub=[[F(-1)]], b_ub=[F(0)])
    assert res.status == "unbounded"


def test_redundant_equalities():
    res = solve_lp(
        c=[F(1), F(1)],
        a_eq=[[F(1), F(1)], [F(2), F(2)]],
        b_eq=[F(2), F(4)],
    )
    assert res.status == "optimal"
    assert res.objective == F(2)


def test_degenerate_cycling_guard():
    # classic Beale-style degeneracy; Bland's rule must terminate
    res = solve_lp(
        c=[F(-3, 4), F(150), F(-1, 50), F(6)],
        a_ub=[
            [F(1, 4), F(-60), F(-1, 25), F(9)],
            [F(1, 2), F(-90), F(-1, 50), F(3)],
            [F(0), F(0), F(1), F(0)],
        ],
        b_ub=[F(0), F(0), F(1)],
    )
    assert res.status == "optimal"
    assert res.objective == F(-1, 20)


def test_matches_scipy_on_random_instances():
    rng = random.Random(99)
    for _ in range(25):
        n, mu, me = rng.randint(2, 6), rng.randint(1, 4), rng.randint(0, 2)
        c = [F(rng.randint(-5, 5)) for _ in range(n)]
        a_ub = [[F(rng.randint(-3, 3)) for _ in range(n)] for _ in range(mu)]
        b_ub = [F(rng.randint(0, 8)) for _ in range(mu)]
        a_eq = [[F(rng.randint(-2, 2)) for _ in range(n)] for _ in range(me)]
        # make equalities feasible by construction at a random point
        x0 = [F(rng.randint(0, 3)) for _ in range(n)]
        b_eq = [sum(r[j] * x0[j] for j in range(n)) for r in a_eq]
        b_ub = [max(b, sum(r[j] * x0[j] for j in range(n))) for r, b in zip(a_ub, b_ub)]
        res = solve_lp(c, a_ub, b_ub, a_eq, b_eq)
        ref = linprog(
            np.array([float(v) for v in c]),
            A_ub=np.array([[float(v) for v in r] for r in a_ub]),
            b_ub=np.array([float(v) for v in b_ub]),
            A_eq=np.array([[float(v) for v in r] for r in a_eq]) if me else None,
            b_eq=np.array([float(v) for v in b_eq]) if me else None,
            bounds=(0, None),
            method="highs",
        )
        if res.status == "optimal":
            assert ref.status == 0
            assert abs(float(res.objective) - ref.fun) < 1e-7
            # exact feasibility of the returned point
            for r, b in zip(a_ub, b_ub):
                assert sum(ri * xi for ri, xi in zip(r, res.x)) <= b
            for r, b in zip(a_eq, b_eq):
                assert sum(ri * xi for ri, xi in zip(r, res.x)) == b
        elif res.status == "unbounded":
            assert ref.status == 3
        else:
            assert ref.status == 2
