import itertools

import numpy as np
import pytest

from euroem.solver import (
    BINARY,
    FEASIBILITY_TOL,
    OptProblem,
    SolverError,
    solve_lp,
    solve_milp,
)


def test_one_variable_lp_with_dual():
    p = OptProblem(sense="min")
    x = p.add_var(lo=-np.inf, hi=np.inf, obj=1.0)
    p.add_constr([x], [1.0], ">=", 3.0, name="floor")
    p.add_constr([x], [1.0], "<=", 10.0, name="cap")
    sol = solve_lp(p)
    assert sol.status == "optimal"
    assert sol.values[x] == pytest.approx(3.0, abs=1e-9)
    assert sol.objective == pytest.approx(3.0, abs=1e-9)
    assert sol.duals["floor"] == pytest.approx(1.0, abs=1e-9)
    assert sol.duals["cap"] == pytest.approx(0.0, abs=1e-9)


def test_max_lp_matches_vertex_enumeration():
    # oracle: enumerate the vertices of {x+y<=1, 0<=x,y<=1}
    vertices = [(0, 0), (1, 0), (0, 1)]
    best = max(x + y for x, y in vertices)
    p = OptProblem(sense="max")
    x = p.add_var(lo=0, hi=1, obj=1.0)
    y = p.add_var(lo=0, hi=1, obj=1.0)
    p.add_constr([x, y], [1.0, 1.0], "<=", 1.0, name="budget")
    sol = solve_lp(p)
    assert sol.objective == pytest.approx(best, abs=1e-9)
    # dual convention: d(max obj)/d(rhs) = +1 here
    assert sol.duals["budget"] == pytest.approx(1.0, abs=1e-9)


def test_infeasible_lp_reports_status():
    p = OptProblem()
    x = p.add_var(lo=-np.inf, hi=np.inf, obj=1.0)
    p.add_constr([x], [1.0], ">=", 2.0)
    p.add_constr([x], [1.0], "<=", 1.0)
    sol = solve_lp(p)
    assert sol.status == "infeasible"
    assert sol.values is None
    with pytest.raises(SolverError):
        sol.require_optimal("toy")


def test_unbounded_lp_reports_status():
    p = OptProblem(sense="max")
    p.add_var(lo=0, hi=np.inf, obj=1.0)
    assert solve_lp(p).status == "unbounded"


def test_knapsack_matches_brute_force():
    values = [6.0, 5.0, 4.0]
    weights = [4.0, 3.0, 2.0]
    cap = 5.0
    best = max(
        (sum(v for v, pick in zip(values, picks) if pick), picks)
        for picks in itertools.product([0, 1], repeat=3)
        if sum(w for w, pick in zip(weights, picks) if pick) <= cap
    )
    assert best[0] == 9.0 and best[1] == (0, 1, 1)

    p = OptProblem(sense="max")
    xs = p.add_vars(3, lo=0, hi=1, obj=values, kind=BINARY)
    p.add_constr(xs, weights, "<=", cap)
    sol = solve_milp(p)
    assert sol.objective == pytest.approx(9.0, abs=1e-9)
    assert np.allclose(sol.values, [0, 1, 1])


def test_milp_without_binaries_equals_lp():
    rng = np.random.default_rng(7)
    c = rng.uniform(-1, 1, 5)
    a = rng.uniform(0, 1, (3, 5))
    b = rng.uniform(2, 4, 3)

    def build():
        p = OptProblem(sense="min")
        xs = p.add_vars(5, lo=0, hi=2, obj=c)
        for i in range(3):
            p.add_constr(xs, a[i], ">=", b[i])
        return p

    lp = solve_lp(build())
    mip = solve_milp(build())
    assert lp.status == mip.status == "optimal"
    assert mip.objective == pytest.approx(lp.objective, abs=1e-8)


def test_binary_rounding_forced():
    p = OptProblem(sense="min")
    y = p.add_var(lo=0, hi=1, obj=1.0, kind=BINARY)
    p.add_constr([y], [1.0], ">=", 0.5)
    sol = solve_milp(p)
    assert sol.values[y] == pytest.approx(1.0, abs=FEASIBILITY_TOL)


def test_solve_lp_rejects_binaries():
    p = OptProblem()
    p.add_var(kind=BINARY, obj=1.0)
    with pytest.raises(SolverError):
        solve_lp(p)


def test_strong_duality_on_random_lps():
    # primal objective equals b'y + bound terms on every optimal solve
    rng = np.random.default_rng(123)
    for _ in range(20):
        n, m = 6, 4
        c = rng.uniform(0.1, 2.0, n)
        a = rng.uniform(0.0, 1.0, (m, n))
        b = rng.uniform(1.0, 3.0, m)
        p = OptProblem(sense="min")
        xs = p.add_vars(n, lo=0.0, hi=10.0, obj=c)
        for i in range(m):
            p.add_constr(xs, a[i], ">=", b[i], name=("row", i))
        sol = solve_lp(p)
        assert sol.status == "optimal"
        y = np.array([sol.duals[("row", i)] for i in range(m)])
        # reduced costs: z = c - A'y; split by sign against active bounds
        z = c - a.T @ y
        dual_obj = b @ y + 10.0 * np.minimum(z, 0.0).sum()
        assert dual_obj == pytest.approx(sol.objective, abs=1e-6)


def test_objective_scaling_keeps_argmin():
    rng = np.random.default_rng(5)
    c = rng.uniform(0.5, 1.5, 4)
    a = rng.uniform(0.1, 1.0, (2, 4))
    b = np.array([1.0, 2.0])

    def solve(scale):
        p = OptProblem(sense="min")
        xs = p.add_vars(4, lo=0, hi=5, obj=scale * c)
        for i in range(2):
            p.add_constr(xs, a[i], ">=", b[i])
        return solve_lp(p)

    s1, s3 = solve(1.0), solve(3.0)
    assert s3.objective == pytest.approx(3.0 * s1.objective, rel=1e-9)
    assert np.allclose(s1.values, s3.values, atol=1e-7)


def test_vectorized_rows_match_scalar_rows():
    c = np.array([1.0, 2.0, 0.5])
    p1 = OptProblem(sense="min")
    xs = p1.add_vars(3, lo=0, hi=4, obj=c)
    p1.add_constr(xs, [1, 1, 1], ">=", 5.0, name="a")
    p1.add_constr(xs[:2], [1, -1], "==", 1.0, name="b")

    p2 = OptProblem(sense="min")
    ys = p2.add_vars(3, lo=0, hi=4, obj=c)
    p2.add_rows(
        rows=[0, 0, 0],
        cols=ys,
        vals=[1.0, 1.0, 1.0],
        sense=">=",
        rhs=[5.0],
        names=["a"],
    )
    p2.add_rows(rows=[0, 0], cols=ys[:2], vals=[1.0, -1.0], sense="==", rhs=[1.0], names=["b"])

    s1, s2 = solve_lp(p1), solve_lp(p2)
    assert s1.objective == pytest.approx(s2.objective, abs=1e-9)
    assert s1.duals["a"] == pytest.approx(s2.duals["a"], abs=1e-9)


def test_lp_dump_is_written(tmp_path):
    p = OptProblem(sense="min", name="toy")
    x = p.add_var(obj=1.0)
    p.add_constr([x], [1.0], ">=", 3.0, name="floor")
    path = tmp_path / "toy.lp"
    solve_lp(p, lp_dump_path=str(path))
    text = path.read_text()
    assert "Minimize" in text and "floor" in text
