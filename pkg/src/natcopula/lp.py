"""Dense two-phase simplex for small linear programs.

Minimizes c.x subject to rows A x {<=, >=, =} b with per-variable lower
bounds (finite or unbounded). Bland's rule everywhere, so cycling cannot
occur; a pivot budget guards against stalls regardless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import STATUS_STALLED, STATUS_UNBOUNDED, simplex_core
from .errors import InvalidArgumentError, SolverStallError

SENSES = ("<=", ">=", "=")
MAX_VARIABLES = 4224
MAX_CONSTRAINTS = 5000
PIVOT_TOL = 1e-11
FEASIBILITY_TOL = 1e-9
MAX_PIVOTS = 10**6
# a pivot element just above PIVOT_TOL can scale a tableau row by 1e10
# and poison every later elimination, so optimality claims are audited
# against a tableau rebuilt from the original data and pivoting resumes
# when the audit fails
REFINE_ROUNDS = 30
DUAL_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """min objective . x  s.t.  lhs x (senses) rhs,  x >= lower_bounds.

    A lower bound of -inf leaves the variable free.
    """

    objective: np.ndarray
    lhs: np.ndarray
    senses: tuple[str, ...]
    rhs: np.ndarray
    lower_bounds: np.ndarray | None = None

    def __post_init__(self):
        objective = np.asarray(self.objective, dtype=float)
        lhs = np.atleast_2d(np.asarray(self.lhs, dtype=float))
        rhs = np.asarray(self.rhs, dtype=float)
        senses = tuple(self.senses)
        if objective.ndim != 1:
            raise InvalidArgumentError("objective must be 1-D")
        n = objective.size
        m = rhs.size
        if lhs.shape != (m, n):
            raise InvalidArgumentError(
                f"lhs shape {lhs.shape} does not match {m} rows x {n} variables"
            )
        if len(senses) != m:
            raise InvalidArgumentError("one sense per constraint row required")
        for s in senses:
            if s not in SENSES:
                raise InvalidArgumentError(f"sense must be one of {SENSES}, got {s!r}")
        if self.lower_bounds is None:
            bounds = np.zeros(n)
        else:
            bounds = np.asarray(self.lower_bounds, dtype=float)
            if bounds.shape != (n,):
                raise InvalidArgumentError("lower_bounds must have one entry per variable")
            if np.any(np.isposinf(bounds)) or np.any(np.isnan(bounds)):
                raise InvalidArgumentError("lower bounds must be finite or -inf")
        if not (np.all(np.isfinite(objective)) and np.all(np.isfinite(lhs)) and np.all(np.isfinite(rhs))):
            raise InvalidArgumentError("objective, lhs and rhs must be finite")
        if n > MAX_VARIABLES:
            raise InvalidArgumentError(f"too many variables: {n} > {MAX_VARIABLES}")
        if m > MAX_CONSTRAINTS:
            raise InvalidArgumentError(f"too many constraints: {m} > {MAX_CONSTRAINTS}")
        for name, arr in (("objective", objective), ("lhs", lhs), ("rhs", rhs), ("lower_bounds", bounds)):
            arr.setflags(write=False)
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "lower_bounds", bounds)

    @property
    def n_variables(self) -> int:
        return self.objective.size

    @property
    def n_constraints(self) -> int:
        return self.rhs.size


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: str
    values: np.ndarray | None
    objective_value: float | None
    reduced_costs: np.ndarray | None = None
    pivots: int = 0


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    """Single pivot, identical arithmetic to the kernels."""
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0
    basis[row] = col


def _run_core(tableau, basis, max_pivots, spent):
    status, pivots = simplex_core(tableau, basis, PIVOT_TOL, max_pivots - spent)
    spent += pivots
    if status == STATUS_STALLED:
        raise SolverStallError(f"simplex exceeded {max_pivots} pivots")
    return status, spent


def _restore_primal(tableau, basis, m, max_pivots, spent):
    """Dual-simplex steps for a rebuilt basis that lost primal feasibility.

    Tableau drift can walk the primal core onto a basis whose exact
    basic values dip negative while every reduced cost stays
    nonnegative; the primal core then has nothing to pivot on and the
    audit would spin. Pivoting the negative rows out against the exact
    data resolves that state. Returns (feasible, spent); infeasible
    means some negative row had no negative coefficient, which is an
    exact-arithmetic certificate that the row cannot be satisfied.
    """
    while True:
        bad = np.flatnonzero(tableau[:m, -1] < -FEASIBILITY_TOL)
        if bad.size == 0:
            return True, spent
        if spent >= max_pivots:
            raise SolverStallError(f"simplex exceeded {max_pivots} pivots")
        row = int(bad[0])
        cols = np.flatnonzero(tableau[row, :-1] < -PIVOT_TOL)
        if cols.size == 0:
            return False, spent
        ratios = tableau[m, cols] / -tableau[row, cols]
        col = int(cols[int(np.argmin(ratios))])
        _pivot(tableau, basis, row, col)
        spent += 1


def solve(lp: LinearProgram, max_pivots: int = MAX_PIVOTS) -> LpSolution:
    """Solve with the two-phase dense simplex.

    Returns an LpSolution with status optimal, infeasible or unbounded.
    At optimal, ``values`` satisfies every row within 1e-9 and
    ``reduced_costs`` (standard-form certificate) is nonnegative up to
    the pivot tolerance. Raises SolverStallError past the pivot budget.
    """
    n = lp.n_variables
    free = np.isneginf(lp.lower_bounds)
    shift = np.where(free, 0.0, lp.lower_bounds)

    # Standard form: x = shift + z (z >= 0) for bounded, x = z+ - z- for free.
    col_of = []
    col_sign = []
    for j in range(n):
        col_of.append(j)
        col_sign.append(1.0)
        if free[j]:
            col_of.append(j)
            col_sign.append(-1.0)
    col_of = np.asarray(col_of)
    col_sign = np.asarray(col_sign)
    a_std = lp.lhs[:, col_of] * col_sign
    c_std = lp.objective[col_of] * col_sign
    b = lp.rhs - lp.lhs @ shift
    n_std = c_std.size

    senses = list(lp.senses)
    rows = a_std.copy()
    for i in range(len(senses)):
        if b[i] < 0.0:
            rows[i] = -rows[i]
            b[i] = -b[i]
            if senses[i] == "<=":
                senses[i] = ">="
            elif senses[i] == ">=":
                senses[i] = "<="
        if senses[i] == ">=" and b[i] == 0.0:
            rows[i] = -rows[i]
            senses[i] = "<="

    m = len(senses)
    slack_rows = [i for i, s in enumerate(senses) if s == "<="]
    surplus_rows = [i for i, s in enumerate(senses) if s == ">="]
    art_rows = [i for i, s in enumerate(senses) if s in (">=", "=")]
    n_slack = len(slack_rows) + len(surplus_rows)
    n_art = len(art_rows)
    width = n_std + n_slack + n_art + 1

    tableau = np.zeros((m + 1, width))
    tableau[:m, :n_std] = rows
    tableau[:m, -1] = b
    basis = np.full(m, -1, dtype=np.int64)
    pos = n_std
    for i in slack_rows:
        tableau[i, pos] = 1.0
        basis[i] = pos
        pos += 1
    for i in surplus_rows:
        tableau[i, pos] = -1.0
        pos += 1
    art_start = pos
    for i in art_rows:
        tableau[i, pos] = 1.0
        basis[i] = pos
        pos += 1

    # pristine copy of the phase-2 system for reinversion audits
    a_eq = tableau[:m, :art_start].copy()
    b_eq = b.copy()

    spent = 0
    if n_art:
        # Phase 1: price out the artificial basis.
        tableau[m, : art_start] = -tableau[art_rows, :art_start].sum(axis=0)
        tableau[m, -1] = -float(b[art_rows].sum())
        _, spent = _run_core(tableau, basis, max_pivots, spent)
        infeasibility = -tableau[m, -1]
        if infeasibility > FEASIBILITY_TOL * max(1.0, float(np.abs(b).sum())):
            return LpSolution(status=INFEASIBLE, values=None, objective_value=None, pivots=spent)
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= art_start:
                candidates = np.flatnonzero(np.abs(tableau[i, :art_start]) > PIVOT_TOL)
                if candidates.size:
                    _pivot(tableau, basis, i, int(candidates[0]))
                else:
                    keep[i] = False  # redundant row
        tableau = np.concatenate(
            [tableau[:m][keep][:, : art_start], tableau[:m][keep][:, -1:]], axis=1
        )
        basis = basis[keep]
        a_eq = a_eq[keep]
        b_eq = b_eq[keep]
        m = int(keep.sum())
        obj_row = np.zeros((1, tableau.shape[1]))
        tableau = np.concatenate([tableau, obj_row], axis=0)
    else:
        tableau = np.concatenate([tableau[:, :art_start], tableau[:, -1:]], axis=1)

    # Phase 2 objective row: reduced costs of the current basis.
    c_full = np.zeros(tableau.shape[1] - 1)
    c_full[:n_std] = c_std
    c_basis = c_full[basis]
    tableau[m, :-1] = c_full - c_basis @ tableau[:m, :-1]
    tableau[m, -1] = -float(c_basis @ tableau[:m, -1])

    def rebuild():
        frame = np.linalg.solve(a_eq[:, basis], np.concatenate([a_eq, b_eq[:, None]], axis=1))
        fresh = np.empty((m + 1, frame.shape[1]))
        fresh[:m] = frame
        fresh[m, :-1] = c_full - c_full[basis] @ frame[:, :-1]
        fresh[m, -1] = -float(c_full[basis] @ frame[:, -1])
        return fresh

    status, spent = _run_core(tableau, basis, max_pivots, spent)
    for _ in range(REFINE_ROUNDS):
        try:
            tableau = rebuild()
        except np.linalg.LinAlgError:
            raise SolverStallError("simplex basis became singular during refinement")
        if status == STATUS_UNBOUNDED:
            # a drifted column can fake a ray; only a claim made on the
            # rebuilt tableau counts
            status, spent = _run_core(tableau, basis, max_pivots, spent)
            if status == STATUS_UNBOUNDED:
                return LpSolution(status=UNBOUNDED, values=None, objective_value=None, pivots=spent)
            continue
        reduced = tableau[m, :-1]
        basics = tableau[:m, -1]
        if reduced.min() >= -DUAL_TOL and basics.min() >= -FEASIBILITY_TOL:
            z = np.zeros(tableau.shape[1] - 1)
            z[basis] = basics
            x = shift.copy()
            np.add.at(x, col_of, col_sign * z[:n_std])
            return LpSolution(
                status=OPTIMAL,
                values=x,
                objective_value=float(lp.objective @ x),
                reduced_costs=reduced.copy(),
                pivots=spent,
            )
        if basics.min() < -FEASIBILITY_TOL:
            feasible, spent = _restore_primal(tableau, basis, m, max_pivots, spent)
            if not feasible:
                return LpSolution(status=INFEASIBLE, values=None, objective_value=None, pivots=spent)
        status, spent = _run_core(tableau, basis, max_pivots, spent)
    raise SolverStallError("simplex failed to certify optimality during refinement")
