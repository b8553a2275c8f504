"""Exact linear programming over arbitrary-precision rationals.

A dense two-phase primal simplex with Bland's anti-cycling rule.  Every
coefficient is a ``fractions.Fraction``; there is no floating point anywhere
in the solve path.  Optimal solves return both a primal and a dual witness,
and both are re-verified by substitution before being returned, so a bug in
the pivoting can never silently produce a wrong optimum.

Variables are non-negative by default; ``free_vars`` marks variables with no
lower bound (handled internally by a positive/negative split).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import InvalidInput

_SENSES = ("<=", "=", ">=")

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LPInternalError(RuntimeError):
    """A solver invariant failed; indicates a bug, not bad input."""


@dataclass
class LPSolution:
    status: str
    value: Fraction | None = None
    primal: list[Fraction] | None = None
    dual: list[Fraction] | None = None
    ray: list[Fraction] | None = None


class RationalLP:
    """Linear program max/min c.x subject to rows (a, sense, b), x >= 0."""

    def __init__(self, num_vars: int, maximize: bool = True, free_vars=()):
        if num_vars < 0:
            raise InvalidInput("num_vars must be non-negative")
        self.num_vars = num_vars
        self.maximize = maximize
        self.objective = [Fraction(0)] * num_vars
        self.rows: list[tuple[list[Fraction], str, Fraction]] = []
        self.free_vars = frozenset(free_vars)
        if any(not 0 <= v < num_vars for v in self.free_vars):
            raise InvalidInput("free variable index out of range")

    def set_objective(self, coeffs) -> None:
        self.objective = self._vector(coeffs)

    def add_row(self, coeffs, sense: str, rhs) -> None:
        if sense not in _SENSES:
            raise InvalidInput(f"unknown row sense {sense!r}")
        self.rows.append((self._vector(coeffs), sense, Fraction(rhs)))

    def _vector(self, coeffs) -> list[Fraction]:
        if isinstance(coeffs, dict):
            out = [Fraction(0)] * self.num_vars
            for j, v in coeffs.items():
                if not 0 <= j < self.num_vars:
                    raise InvalidInput(f"variable index {j} out of range")
                out[j] = Fraction(v)
            return out
        out = [Fraction(v) for v in coeffs]
        if len(out) != self.num_vars:
            raise InvalidInput(f"coefficient vector has length {len(out)}, expected {self.num_vars}")
        return out


class _Tableau:
    """Standard form: minimize c.x subject to A x = b, b >= 0, x >= 0."""

    def __init__(self, lp: RationalLP):
        self.lp = lp
        zero = Fraction(0)
        self.split = sorted(lp.free_vars)
        sign = Fraction(-1) if lp.maximize else Fraction(1)
        self.cost = [sign * c for c in lp.objective]
        self.cost += [-sign * lp.objective[j] for j in self.split]
        cols = lp.num_vars + len(self.split)

        rows: list[list[Fraction]] = []
        rhs: list[Fraction] = []
        for coeffs, _, b in lp.rows:
            rows.append(list(coeffs) + [-coeffs[j] for j in self.split])
            rhs.append(Fraction(b))
        m = len(rows)

        # one slack (+1) or surplus (-1) column per inequality row
        self.witness_col = [-1] * m
        for i, (_, sense, _) in enumerate(lp.rows):
            if sense == "=":
                continue
            for row in rows:
                row.append(zero)
            self.cost.append(zero)
            rows[i][cols] = Fraction(1) if sense == "<=" else Fraction(-1)
            self.witness_col[i] = cols
            cols += 1

        # normalize to b >= 0, remembering per-row sign flips
        self.row_sign = [1] * m
        for i in range(m):
            if rhs[i] < 0:
                rhs[i] = -rhs[i]
                rows[i] = [-v for v in rows[i]]
                self.row_sign[i] = -1

        # initial basis: unit slack columns where available, artificials elsewhere
        self.basis = [-1] * m
        self.artificial: set[int] = set()
        for i in range(m):
            wc = self.witness_col[i]
            if wc >= 0 and rows[i][wc] == 1:
                self.basis[i] = wc
        for i in range(m):
            if self.basis[i] == -1:
                for row in rows:
                    row.append(zero)
                self.cost.append(zero)
                rows[i][cols] = Fraction(1)
                self.basis[i] = cols
                self.artificial.add(cols)
                if self.witness_col[i] == -1:
                    self.witness_col[i] = cols
                cols += 1

        self.witness_sign = [
            rows[i][self.witness_col[i]] if self.basis[i] == self.witness_col[i] else None
            for i in range(m)
        ]
        # the witness column holds +-e_i in the initial tableau; record its sign
        for i in range(m):
            wc = self.witness_col[i]
            self.witness_sign[i] = rows[i][wc]
        self.rows = rows
        self.rhs = rhs
        self.ncols = cols
        # original-row bookkeeping survives redundant-row deletion
        self.user_witness = list(self.witness_col)
        self.user_witness_sign = list(self.witness_sign)
        self.user_row_sign = list(self.row_sign)

    def _reduced_costs(self, costs) -> list[Fraction]:
        red = list(costs) + [Fraction(0)] * (self.ncols - len(costs))
        for i, b in enumerate(self.basis):
            cb = costs[b] if b < len(costs) else Fraction(0)
            if cb == 0:
                continue
            row = self.rows[i]
            for j in range(self.ncols):
                if row[j]:
                    red[j] -= cb * row[j]
        return red

    def _pivot(self, red, pi: int, pj: int) -> None:
        rows, rhs = self.rows, self.rhs
        prow = rows[pi]
        pval = prow[pj]
        if pval != 1:
            inv = Fraction(1) / pval
            rows[pi] = prow = [v * inv for v in prow]
            rhs[pi] *= inv
        for i in range(len(rows)):
            if i == pi:
                continue
            factor = rows[i][pj]
            if factor:
                row = rows[i]
                rows[i] = [a - factor * b for a, b in zip(row, prow)]
                rhs[i] -= factor * rhs[pi]
        factor = red[pj]
        if factor:
            for j in range(self.ncols):
                if prow[j]:
                    red[j] -= factor * prow[j]
        self.basis[pi] = pj

    def _iterate(self, red, banned) -> str:
        """Bland's rule: lowest eligible entering index, lowest basic leaving index."""
        rows, rhs = self.rows, self.rhs
        while True:
            enter = -1
            for j in range(self.ncols):
                if red[j] < 0 and j not in banned:
                    enter = j
                    break
            if enter == -1:
                return OPTIMAL
            leave = -1
            best = None
            for i in range(len(rows)):
                a = rows[i][enter]
                if a > 0:
                    ratio = rhs[i] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        best = ratio
                        leave = i
            if leave == -1:
                return UNBOUNDED
            self._pivot(red, leave, enter)

    def phase1(self) -> tuple[Fraction, list[Fraction]]:
        costs = [Fraction(0)] * self.ncols
        for j in self.artificial:
            costs[j] = Fraction(1)
        red = self._reduced_costs(costs)
        status = self._iterate(red, banned=self.artificial)
        if status != OPTIMAL:
            raise LPInternalError("phase 1 cannot be unbounded")
        value = sum(self.rhs[i] for i, b in enumerate(self.basis) if b in self.artificial)
        return value, red

    def drop_artificials(self) -> None:
        """Pivot basic artificials out; delete rows that became redundant."""
        i = 0
        while i < len(self.rows):
            if self.basis[i] in self.artificial:
                row = self.rows[i]
                pj = next(
                    (j for j in range(self.ncols) if j not in self.artificial and row[j] != 0),
                    -1,
                )
                if pj == -1:
                    del self.rows[i]
                    del self.rhs[i]
                    del self.basis[i]
                    continue
                self._pivot([Fraction(0)] * self.ncols, i, pj)
            i += 1

    def phase2(self) -> tuple[str, list[Fraction]]:
        red = self._reduced_costs(self.cost)
        status = self._iterate(red, banned=self.artificial)
        return status, red

    def primal_solution(self) -> list[Fraction]:
        values = [Fraction(0)] * self.ncols
        for i, b in enumerate(self.basis):
            values[b] = self.rhs[i]
        out = values[: self.lp.num_vars]
        for k, j in enumerate(self.split):
            out[j] -= values[self.lp.num_vars + k]
        return out

    def user_duals(self, red, costs) -> list[Fraction]:
        """Duals in the caller's row space, via each row's witness column.

        The witness column held +-e_i initially, so its final reduced cost
        determines y_i; rows deleted as redundant read back as 0.
        """
        y = []
        for wc, wsign, rsign in zip(self.user_witness, self.user_witness_sign, self.user_row_sign):
            cw = costs[wc] if wc < len(costs) else Fraction(0)
            y_std = (cw - red[wc]) / wsign
            y.append(y_std * rsign)
        if self.lp.maximize:
            y = [-v for v in y]
        return y


def _check_primal(lp: RationalLP, primal, value) -> None:
    if len(primal) != lp.num_vars:
        raise LPInternalError("primal witness has wrong length")
    for j, v in enumerate(primal):
        if j not in lp.free_vars and v < 0:
            raise LPInternalError("primal witness violates non-negativity")
    for coeffs, sense, b in lp.rows:
        lhs = sum(c * x for c, x in zip(coeffs, primal))
        if (sense == "<=" and lhs > b) or (sense == ">=" and lhs < b) or (sense == "=" and lhs != b):
            raise LPInternalError(f"primal witness violates a {sense} row")
    if value is not None and sum(c * x for c, x in zip(lp.objective, primal)) != value:
        raise LPInternalError("primal witness does not attain the reported value")


def _check_dual(lp: RationalLP, dual, value) -> None:
    if len(dual) != len(lp.rows):
        raise LPInternalError("dual witness has wrong length")
    for (_, sense, _), y in zip(lp.rows, dual):
        bad_max = lp.maximize and ((sense == "<=" and y < 0) or (sense == ">=" and y > 0))
        bad_min = not lp.maximize and ((sense == "<=" and y > 0) or (sense == ">=" and y < 0))
        if bad_max or bad_min:
            raise LPInternalError(f"dual sign violated on a {sense} row")
    for j in range(lp.num_vars):
        lhs = sum(dual[i] * lp.rows[i][0][j] for i in range(len(lp.rows)))
        c = lp.objective[j]
        if j in lp.free_vars:
            ok = lhs == c
        elif lp.maximize:
            ok = lhs >= c
        else:
            ok = lhs <= c
        if not ok:
            raise LPInternalError("dual feasibility violated")
    dual_value = sum(dual[i] * lp.rows[i][2] for i in range(len(lp.rows)))
    if dual_value != value:
        raise LPInternalError("strong duality failed: dual value differs from primal value")


def _farkas_ray(lp: RationalLP, tab: _Tableau) -> list[Fraction]:
    costs = [Fraction(0)] * tab.ncols
    for j in tab.artificial:
        costs[j] = Fraction(1)
    red = tab._reduced_costs(costs)
    y = []
    for wc, wsign, rsign in zip(tab.user_witness, tab.user_witness_sign, tab.user_row_sign):
        y.append(((costs[wc] - red[wc]) / wsign) * rsign)
    return y


def solve(lp: RationalLP) -> LPSolution:
    """Solve to exact optimality with certified primal and dual witnesses."""
    tab = _Tableau(lp)
    p1value, _ = tab.phase1()
    if p1value > 0:
        return LPSolution(status=INFEASIBLE, ray=_farkas_ray(lp, tab))
    tab.drop_artificials()
    status, red = tab.phase2()
    if status == UNBOUNDED:
        return LPSolution(status=UNBOUNDED)
    primal = tab.primal_solution()
    value = sum(c * x for c, x in zip(lp.objective, primal))
    dual = tab.user_duals(red, tab.cost)
    _check_primal(lp, primal, value)
    _check_dual(lp, dual, value)
    return LPSolution(status=OPTIMAL, value=value, primal=primal, dual=dual)


def check_feasible(lp: RationalLP) -> LPSolution:
    """Phase-one feasibility check; returns a point or an infeasibility ray."""
    tab = _Tableau(lp)
    p1value, _ = tab.phase1()
    if p1value > 0:
        return LPSolution(status=INFEASIBLE, ray=_farkas_ray(lp, tab))
    primal = tab.primal_solution()
    _check_primal(lp, primal, None)
    return LPSolution(status=OPTIMAL, primal=primal)
