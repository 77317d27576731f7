"""Backend-neutral LP/MILP layer on top of scipy's HiGHS interface.

Problems are built incrementally (scalar or vectorized) and handed to
:func:`solve_lp` or :func:`solve_milp`.  LP solves expose the dual value of
every *named* constraint with the convention

    dual = d(objective, in the declared min/max sense) / d(rhs)

so for ``min x  s.t.  x >= 3`` the dual of the constraint is +1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

CONTINUOUS = "continuous"
BINARY = "binary"

#: absolute feasibility / duality tolerance inherited by all downstream contracts
FEASIBILITY_TOL = 1e-6

_STATUS_MAP = {0: "optimal", 1: "iteration_limit", 2: "infeasible", 3: "unbounded", 4: "error"}


class SolverError(RuntimeError):
    """Misuse of the solver layer (not a model infeasibility)."""


@dataclass
class OptSolution:
    """Outcome of one LP/MILP solve."""

    status: str
    objective: float | None = None
    values: np.ndarray | None = None
    duals: dict | None = None
    message: str = ""

    @property
    def optimal(self):
        return self.status == "optimal"

    def require_optimal(self, context=""):
        if not self.optimal:
            raise SolverError(f"{context or 'solve'} ended with status '{self.status}': {self.message}")
        return self


class OptProblem:
    """A linear problem: variables with bounds, linear objective, linear rows.

    Rows are stored as one global sparse triplet set with per-row lower/upper
    limits, which maps directly onto both ``linprog`` and ``milp``.
    """

    def __init__(self, sense="min", name=""):
        if sense not in ("min", "max"):
            raise SolverError(f"objective sense must be 'min' or 'max', got {sense!r}")
        self.sense = sense
        self.name = name
        self._lo = []
        self._hi = []
        self._obj = []
        self._integer = []
        self.n_vars = 0
        # constraint triplets, accumulated per add_* call
        self._rows = []
        self._cols = []
        self._vals = []
        self._row_lb = []
        self._row_ub = []
        self.n_rows = 0
        self._row_names = {}

    # ------------------------------------------------------------------ vars
    def add_var(self, lo=0.0, hi=np.inf, obj=0.0, kind=CONTINUOUS):
        """Add one variable, returning its column index."""
        return int(self.add_vars(1, lo, hi, obj, kind)[0])

    def add_vars(self, n, lo=0.0, hi=np.inf, obj=0.0, kind=CONTINUOUS):
        """Add ``n`` variables (scalar or length-n bounds/costs); returns index array."""
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,))
        if np.any(lo > hi + 1e-12):
            bad = int(np.argmax(lo > hi + 1e-12))
            raise SolverError(f"variable bounds crossed: lo={lo[bad]} > hi={hi[bad]}")
        self._lo.append(np.array(lo))
        self._hi.append(np.array(hi))
        self._obj.append(np.broadcast_to(np.asarray(obj, dtype=float), (n,)).copy())
        self._integer.append(np.full(n, kind == BINARY))
        idx = np.arange(self.n_vars, self.n_vars + n)
        self.n_vars += n
        return idx

    def add_objective(self, idx, coef):
        """Accumulate extra linear objective terms onto existing variables."""
        obj = self._materialize_obj()
        np.add.at(obj, np.asarray(idx, dtype=int), coef)

    def _materialize_obj(self):
        if len(self._obj) != 1 or len(self._obj[0]) != self.n_vars:
            self._obj = [np.concatenate(self._obj) if self._obj else np.zeros(0)]
        return self._obj[0]

    # ------------------------------------------------------------------ rows
    def add_constr(self, idx, coef, sense, rhs, name=None):
        """Add one row ``sum(coef*x[idx]) <sense> rhs`` with sense in {'<=', '>=', '=='}."""
        idx = np.asarray(idx, dtype=int)
        coef = np.asarray(coef, dtype=float)
        if idx.shape != coef.shape:
            raise SolverError("constraint index/coefficient length mismatch")
        if np.any(idx >= self.n_vars) or np.any(idx < 0):
            raise SolverError("constraint references undeclared variable")
        lb, ub = _sense_to_interval(sense, float(rhs))
        row = self.n_rows
        self._rows.append(np.full(idx.size, row))
        self._cols.append(idx)
        self._vals.append(coef)
        self._row_lb.append(lb)
        self._row_ub.append(ub)
        self.n_rows += 1
        if name is not None:
            if name in self._row_names:
                raise SolverError(f"duplicate constraint name {name!r}")
            self._row_names[name] = row
        return row

    def add_rows(self, rows, cols, vals, sense, rhs, names=None):
        """Vectorized bulk rows.

        ``rows`` holds 0-based local row ids; entries with equal ids belong to
        the same constraint.  ``rhs`` is one value per local row.  Returns the
        global id of the first row added.
        """
        rows = np.asarray(rows, dtype=int)
        cols = np.asarray(cols, dtype=int)
        vals = np.asarray(vals, dtype=float)
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        m = rhs.size
        if rows.size and rows.max() >= m:
            raise SolverError("row id exceeds rhs length")
        if cols.size and (cols.max() >= self.n_vars or cols.min() < 0):
            raise SolverError("constraint references undeclared variable")
        base = self.n_rows
        self._rows.append(rows + base)
        self._cols.append(cols)
        self._vals.append(vals)
        lb, ub = _sense_to_interval(sense, rhs)
        self._row_lb.append(np.broadcast_to(lb, (m,)))
        self._row_ub.append(np.broadcast_to(ub, (m,)))
        self.n_rows += m
        if names is not None:
            for k, nm in enumerate(names):
                if nm is None:
                    continue
                if nm in self._row_names:
                    raise SolverError(f"duplicate constraint name {nm!r}")
                self._row_names[nm] = base + k
        return base

    # ------------------------------------------------------------- assembly
    def _assemble(self):
        lo = np.concatenate(self._lo) if self._lo else np.zeros(0)
        hi = np.concatenate(self._hi) if self._hi else np.zeros(0)
        obj = self._materialize_obj()
        integer = np.concatenate(self._integer) if self._integer else np.zeros(0, dtype=bool)
        if self.n_rows:
            a = sp.csr_matrix(
                (np.concatenate(self._vals), (np.concatenate(self._rows), np.concatenate(self._cols))),
                shape=(self.n_rows, self.n_vars),
            )
            lb = np.concatenate([np.atleast_1d(x) for x in self._row_lb])
            ub = np.concatenate([np.atleast_1d(x) for x in self._row_ub])
        else:
            a = sp.csr_matrix((0, self.n_vars))
            lb = np.zeros(0)
            ub = np.zeros(0)
        return obj, lo, hi, integer, a, lb, ub

    @property
    def has_binaries(self):
        return any(arr.any() for arr in self._integer)

    def write_lp(self, path):
        """Dump the problem in CPLEX LP text format (debugging aid)."""
        obj, lo, hi, integer, a, lb, ub = self._assemble()
        acsr = a.tocsr()
        inv_names = {v: k for k, v in self._row_names.items()}
        with open(path, "w") as fh:
            fh.write("\\ problem: %s\n" % (self.name or "unnamed"))
            fh.write("Minimize\n" if self.sense == "min" else "Maximize\n")
            terms = [f"{c:+.12g} x{j}" for j, c in enumerate(obj) if c != 0.0]
            fh.write(" obj: " + (" ".join(terms) if terms else "0 x0") + "\n")
            fh.write("Subject To\n")
            for i in range(self.n_rows):
                s, e = acsr.indptr[i], acsr.indptr[i + 1]
                body = " ".join(f"{v:+.12g} x{j}" for j, v in zip(acsr.indices[s:e], acsr.data[s:e]))
                nm = str(inv_names.get(i, f"c{i}")).replace(" ", "_")
                if lb[i] == ub[i]:
                    fh.write(f" {nm}: {body} = {lb[i]:.12g}\n")
                else:
                    if np.isfinite(ub[i]):
                        fh.write(f" {nm}: {body} <= {ub[i]:.12g}\n")
                    if np.isfinite(lb[i]):
                        fh.write(f" {nm}_lb: {body} >= {lb[i]:.12g}\n")
            fh.write("Bounds\n")
            for j in range(self.n_vars):
                fh.write(f" {lo[j]:.12g} <= x{j} <= {hi[j]:.12g}\n")
            if integer.any():
                fh.write("Binaries\n " + " ".join(f"x{j}" for j in np.flatnonzero(integer)) + "\n")
            fh.write("End\n")


def _sense_to_interval(sense, rhs):
    if sense == "<=":
        return -np.inf, rhs
    if sense == ">=":
        return rhs, np.inf
    if sense == "==":
        return rhs, rhs
    raise SolverError(f"unknown constraint sense {sense!r}")


def solve_lp(problem, lp_dump_path=None):
    """Solve an LP to optimality, returning values and named-constraint duals.

    Infeasible / unbounded problems are reported through ``status``, never as
    silent defaults.
    """
    if problem.has_binaries:
        raise SolverError("solve_lp called on a problem with binary variables")
    if lp_dump_path:
        problem.write_lp(lp_dump_path)
    obj, lo, hi, _, a, lb, ub = problem._assemble()
    sign = 1.0 if problem.sense == "min" else -1.0

    # linprog wants split <= / == rows; >= rows are negated (dual sign unwound below)
    eq_mask = lb == ub
    ge_mask = (~eq_mask) & np.isfinite(lb)
    le_mask = (~eq_mask) & np.isfinite(ub)
    a_eq = a[eq_mask] if eq_mask.any() else None
    b_eq = ub[eq_mask] if eq_mask.any() else None
    parts, rhs_parts = [], []
    if le_mask.any():
        parts.append(a[le_mask])
        rhs_parts.append(ub[le_mask])
    if ge_mask.any():
        parts.append(-a[ge_mask])
        rhs_parts.append(-lb[ge_mask])
    a_ub = sp.vstack(parts, format="csr") if parts else None
    b_ub = np.concatenate(rhs_parts) if rhs_parts else None

    res = linprog(
        sign * obj,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=np.column_stack([lo, hi]),
        method="highs",
    )
    status = _STATUS_MAP.get(res.status, "error")
    if status != "optimal":
        return OptSolution(status=status, message=res.message)

    x = np.asarray(res.x)
    _check_primal(a, lb, ub, lo, hi, x)

    # reassemble duals in original row order; marginals are d(min-obj)/d(rhs)
    row_dual = np.zeros(problem.n_rows)
    if eq_mask.any():
        row_dual[eq_mask] = res.eqlin.marginals
    n_le = int(le_mask.sum())
    if a_ub is not None:
        marg = res.ineqlin.marginals
        if n_le:
            row_dual[le_mask] = marg[:n_le]
        if ge_mask.any():
            row_dual[ge_mask] = -marg[n_le:]
    row_dual *= sign
    duals = {name: float(row_dual[row]) for name, row in problem._row_names.items()}
    return OptSolution(status="optimal", objective=float(sign * res.fun), values=x, duals=duals)


def solve_milp(problem, rel_gap=1e-6, lp_dump_path=None):
    """Solve a MILP within ``rel_gap`` of the proven bound.  No duals."""
    if rel_gap < 0:
        raise SolverError("rel_gap must be >= 0")
    if lp_dump_path:
        problem.write_lp(lp_dump_path)
    obj, lo, hi, integer, a, lb, ub = problem._assemble()
    sign = 1.0 if problem.sense == "min" else -1.0
    constraints = [LinearConstraint(a, lb, ub)] if problem.n_rows else []
    res = milp(
        sign * obj,
        constraints=constraints,
        integrality=integer.astype(int),
        bounds=Bounds(lo, hi),
        options={"mip_rel_gap": rel_gap},
    )
    status = _STATUS_MAP.get(res.status, "error")
    if status != "optimal":
        return OptSolution(status=status, message=res.message or "")
    x = np.asarray(res.x)
    if integer.any():
        frac = np.abs(x[integer] - np.round(x[integer]))
        if frac.size and frac.max() > FEASIBILITY_TOL:
            raise SolverError(f"integer variable off-integral by {frac.max():.2e}")
        x = x.copy()
        x[integer] = np.round(x[integer])
    _check_primal(a, lb, ub, lo, hi, x)
    return OptSolution(status="optimal", objective=float(sign * res.fun), values=x, duals=None)


def _check_primal(a, lb, ub, lo, hi, x, tol=None):
    """Independent row/bound residual check on a claimed-optimal point."""
    tol = FEASIBILITY_TOL if tol is None else tol
    # HiGHS works to 1e-7 primal feasibility; a small multiple guards roundoff
    # in the residual evaluation itself while staying within the 1e-6 contract.
    if x.size and (np.any(x < lo - tol) or np.any(x > hi + tol)):
        raise SolverError("solver returned point violating variable bounds")
    if a.shape[0]:
        ax = a @ x
        if np.any(ax < lb - tol) or np.any(ax > ub + tol):
            worst = max(float(np.max(lb - ax)), float(np.max(ax - ub)))
            raise SolverError(f"solver returned point violating rows by {worst:.2e}")
