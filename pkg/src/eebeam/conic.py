"""Conic subproblem representation and pluggable solver backends.

A ConicProgram holds named real variables, a linear objective to maximize,
and constraints drawn from four convex classes: affine (in)equalities,
second-order cones, sum-of-squares bounded by an affine form, and
exponential relations exp(affine) <= affine. Complex precoders enter as
interleaved real/imaginary components, so every quadratic channel term is
second-order-cone representable.

Backends turn a program into solver input. ClarabelBackend lowers directly
to the interior-point solver's sparse conic form (the fast default);
CvxpyBackend routes through cvxpy and exists mainly to cross-check the
lowering. Both are deterministic for identical input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Affine",
    "ConicProgram",
    "SolveStatus",
    "BackendUnsupported",
    "ClarabelBackend",
    "CvxpyBackend",
    "default_backend",
    "add_power_constraint",
    "add_exp_rate_link",
    "constraint_violations",
    "max_violation",
    "dump_program",
    "solve",
]

FEAS_TOL = 1e-8  # backend feasibility tolerance
GAP_TOL = 1e-8  # backend relative duality-gap tolerance


class BackendUnsupported(RuntimeError):
    """The active backend cannot express a requested constraint class."""


class Affine:
    """Sparse affine expression over scalar slots (variable name, component index)."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: dict[tuple[str, int], float] | None = None, const: float = 0.0):
        self.coeffs = dict(coeffs) if coeffs else {}
        self.const = float(const)

    @staticmethod
    def constant(value: float) -> "Affine":
        return Affine(const=value)

    def copy(self) -> "Affine":
        return Affine(self.coeffs, self.const)

    def __add__(self, other):
        out = self.copy()
        if isinstance(other, Affine):
            for key, val in other.coeffs.items():
                out.coeffs[key] = out.coeffs.get(key, 0.0) + val
            out.const += other.const
        else:
            out.const += float(other)
        return out

    __radd__ = __add__

    def __neg__(self):
        return Affine({k: -v for k, v in self.coeffs.items()}, -self.const)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Affine) else -float(other))

    def __rsub__(self, other):
        return (-self) + float(other)

    def __mul__(self, scalar: float):
        scalar = float(scalar)
        return Affine({k: v * scalar for k, v in self.coeffs.items()}, self.const * scalar)

    __rmul__ = __mul__

    def evaluate(self, assignment: dict[str, np.ndarray]) -> float:
        total = self.const
        for (name, idx), coeff in self.coeffs.items():
            total += coeff * float(np.asarray(assignment[name]).reshape(-1)[idx])
        return total

    def __repr__(self):
        terms = [f"{v:+.6g}*{name}[{idx}]" for (name, idx), v in sorted(self.coeffs.items())]
        if self.const or not terms:
            terms.append(f"{self.const:+.6g}")
        return " ".join(terms)


@dataclass(frozen=True)
class LinearConstraint:
    expr: Affine  # expr <= 0, or expr == 0 when equality
    equality: bool = False
    label: str = ""

    def violation(self, assignment) -> float:
        v = self.expr.evaluate(assignment)
        return abs(v) if self.equality else max(v, 0.0)

    def render(self) -> str:
        op = "==" if self.equality else "<="
        return f"{self.label or 'lin'}: {self.expr!r} {op} 0"


@dataclass(frozen=True)
class SecondOrderConeConstraint:
    vector: tuple[Affine, ...]  # ||vector||_2 <= bound
    bound: Affine
    label: str = ""

    def violation(self, assignment) -> float:
        norm = float(np.hypot.reduce([a.evaluate(assignment) for a in self.vector]))
        return max(norm - self.bound.evaluate(assignment), 0.0)

    def render(self) -> str:
        return f"{self.label or 'soc'}: ||({', '.join(map(repr, self.vector))})|| <= {self.bound!r}"


@dataclass(frozen=True)
class SumSquaresConstraint:
    vector: tuple[Affine, ...]  # sum_i vector_i^2 <= bound
    bound: Affine
    label: str = ""

    def violation(self, assignment) -> float:
        q = sum(a.evaluate(assignment) ** 2 for a in self.vector)
        return max(q - self.bound.evaluate(assignment), 0.0)

    def render(self) -> str:
        return f"{self.label or 'quad'}: sumsq({', '.join(map(repr, self.vector))}) <= {self.bound!r}"


@dataclass(frozen=True)
class ExpConstraint:
    exponent: Affine  # exp(exponent) <= bound
    bound: Affine
    label: str = ""

    def violation(self, assignment) -> float:
        return max(np.exp(self.exponent.evaluate(assignment)) - self.bound.evaluate(assignment), 0.0)

    def render(self) -> str:
        return f"{self.label or 'exp'}: exp({self.exponent!r}) <= {self.bound!r}"


Constraint = LinearConstraint | SecondOrderConeConstraint | SumSquaresConstraint | ExpConstraint


class ConicProgram:
    """Mutable container for one convex subproblem (objective is maximized)."""

    def __init__(self, name: str = ""):
        self.name = name
        self.variables: dict[str, int] = {}
        self.constraints: list[Constraint] = []
        self.objective: Affine = Affine()

    def add_variable(self, name: str, size: int = 1) -> str:
        if name in self.variables:
            raise ValueError(f"variable {name!r} already declared")
        if size < 1:
            raise ValueError("variable size must be >= 1")
        self.variables[name] = size
        return name

    def slot(self, name: str, idx: int = 0) -> Affine:
        if name not in self.variables:
            raise KeyError(f"variable {name!r} not declared")
        if not (0 <= idx < self.variables[name]):
            raise IndexError(f"component {idx} out of range for {name!r}")
        return Affine({(name, idx): 1.0})

    def slots(self, name: str) -> list[Affine]:
        return [self.slot(name, i) for i in range(self.variables[name])]

    def set_objective_max(self, expr: Affine):
        self._check_expr(expr)
        self.objective = expr.copy()

    def _check_expr(self, expr: Affine):
        for name, idx in expr.coeffs:
            if name not in self.variables or idx >= self.variables[name]:
                raise KeyError(f"expression references undeclared slot ({name}, {idx})")

    def _add(self, con: Constraint) -> Constraint:
        if isinstance(con, LinearConstraint):
            exprs = [con.expr]
        elif isinstance(con, ExpConstraint):
            exprs = [con.exponent, con.bound]
        else:
            exprs = [*con.vector, con.bound]
        for e in exprs:
            self._check_expr(e)
        self.constraints.append(con)
        return con

    def add_leq_zero(self, expr: Affine, label: str = "") -> Constraint:
        """expr <= 0."""
        return self._add(LinearConstraint(expr.copy(), equality=False, label=label))

    def add_eq_zero(self, expr: Affine, label: str = "") -> Constraint:
        """expr == 0."""
        return self._add(LinearConstraint(expr.copy(), equality=True, label=label))

    def add_soc(self, vector: list[Affine], bound: Affine, label: str = "") -> Constraint:
        """||vector||_2 <= bound."""
        return self._add(SecondOrderConeConstraint(tuple(a.copy() for a in vector), bound.copy(), label))

    def add_sum_squares_leq(self, vector: list[Affine], bound: Affine, label: str = "") -> Constraint:
        """sum_i vector_i^2 <= bound (bound may be affine)."""
        return self._add(SumSquaresConstraint(tuple(a.copy() for a in vector), bound.copy(), label))

    def add_exp_leq(self, exponent: Affine, bound: Affine, label: str = "") -> Constraint:
        """exp(exponent) <= bound."""
        return self._add(ExpConstraint(exponent.copy(), bound.copy(), label))

    def total_scalars(self) -> int:
        return sum(self.variables.values())


@dataclass
class SolveStatus:
    status: str  # "optimal" | "infeasible" | "numerical_failure"
    objective_value: float = float("nan")
    assignment: dict[str, np.ndarray] | None = None
    solver_iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


def _offsets(program: ConicProgram) -> dict[str, int]:
    offsets, n = {}, 0
    for name, size in program.variables.items():
        offsets[name] = n
        n += size
    return offsets


def _split_assignment(program: ConicProgram, x: np.ndarray) -> dict[str, np.ndarray]:
    out, offsets = {}, _offsets(program)
    for name, size in program.variables.items():
        start = offsets[name]
        out[name] = x[start] if size == 1 else x[start : start + size].copy()
    for name in out:
        out[name] = np.atleast_1d(out[name])
    return out


class ClarabelBackend:
    """Direct lowering to the Clarabel interior-point solver.

    Sum-of-squares constraints become standard second-order cones via
    ||(2v, b-1)|| <= b+1, exponential relations become 3-dim exponential
    cone membership (arg, 1, bound).

    Two failure modes of the interior point are handled by a deterministic
    retry ladder: endgame breakdown below the 1e-8 targets (fixed by relaxing
    tolerances a decade or two, still inside the 1e-6 evaluator contract) and
    stalled Newton steps on certain scalings (fixed by disabling Ruiz
    equilibration). Only if every rung fails is numerical_failure reported.
    """

    supports_exponential = True

    def __init__(self, feas_tol: float = FEAS_TOL, gap_tol: float = GAP_TOL, max_iter: int = 200):
        self.feas_tol = feas_tol
        self.gap_tol = gap_tol
        self.max_iter = max_iter

    def solve(self, program: ConicProgram) -> SolveStatus:
        status = None
        ladder = (
            (1.0, True),
            (10.0, True),
            (1.0, False),
            (100.0, True),
            (100.0, False),
        )
        for relax, equilibrate in ladder:
            status = self._solve_once(
                program, self.feas_tol * relax, self.gap_tol * relax, equilibrate
            )
            if status.status != "numerical_failure":
                return status
        return status

    def _solve_once(
        self, program: ConicProgram, feas_tol: float, gap_tol: float, equilibrate: bool = True
    ) -> SolveStatus:
        import clarabel
        from scipy import sparse

        offsets = _offsets(program)
        n = program.total_scalars()

        rows_i: list[int] = []
        cols_i: list[int] = []
        vals: list[float] = []
        b: list[float] = []
        cones = []
        row = 0

        def emit(expr: Affine, negate: bool):
            # appends one row: s_row = b_row - A_row x equals expr(x) when negate,
            # i.e. A_row = -coeffs, b_row = const
            nonlocal row
            sign = -1.0 if negate else 1.0
            for (name, idx), coeff in expr.coeffs.items():
                rows_i.append(row)
                cols_i.append(offsets[name] + idx)
                vals.append(sign * coeff)
            b.append(expr.const if negate else -expr.const)
            row += 1

        eqs = [c for c in program.constraints if isinstance(c, LinearConstraint) and c.equality]
        ineqs = [c for c in program.constraints if isinstance(c, LinearConstraint) and not c.equality]
        blocks = [c for c in program.constraints if not isinstance(c, LinearConstraint)]

        for con in eqs:  # s = -expr must be 0
            emit(con.expr, negate=False)
        if eqs:
            cones.append(clarabel.ZeroConeT(len(eqs)))
        for con in ineqs:  # s = -expr must be >= 0
            emit(con.expr, negate=False)
        if ineqs:
            cones.append(clarabel.NonnegativeConeT(len(ineqs)))
        for con in blocks:
            if isinstance(con, SecondOrderConeConstraint):
                emit(con.bound, negate=True)
                for a in con.vector:
                    emit(a, negate=True)
                cones.append(clarabel.SecondOrderConeT(1 + len(con.vector)))
            elif isinstance(con, SumSquaresConstraint):
                emit(con.bound + 1.0, negate=True)
                for a in con.vector:
                    emit(2.0 * a, negate=True)
                emit(con.bound - 1.0, negate=True)
                cones.append(clarabel.SecondOrderConeT(2 + len(con.vector)))
            elif isinstance(con, ExpConstraint):
                emit(con.exponent, negate=True)
                emit(Affine.constant(1.0), negate=True)
                emit(con.bound, negate=True)
                cones.append(clarabel.ExponentialConeT())
            else:  # pragma: no cover
                raise BackendUnsupported(f"unhandled constraint type {type(con).__name__}")

        q = np.zeros(n)
        for (name, idx), coeff in program.objective.coeffs.items():
            q[offsets[name] + idx] -= coeff  # maximize -> minimize negation

        A = sparse.csc_matrix((vals, (rows_i, cols_i)), shape=(row, n))
        P = sparse.csc_matrix((n, n))
        settings = clarabel.DefaultSettings()
        settings.verbose = False
        settings.max_iter = self.max_iter
        settings.tol_feas = feas_tol
        settings.tol_gap_abs = gap_tol
        settings.tol_gap_rel = gap_tol
        settings.equilibrate_enable = equilibrate
        solver = clarabel.DefaultSolver(P, q, A, np.array(b), cones, settings)
        sol = solver.solve()

        status = str(sol.status)
        if status in ("Solved", "AlmostSolved"):
            x = np.asarray(sol.x)
            assignment = _split_assignment(program, x)
            return SolveStatus(
                status="optimal",
                objective_value=program.objective.evaluate(assignment),
                assignment=assignment,
                solver_iterations=int(sol.iterations),
            )
        if status in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
            return SolveStatus(status="infeasible", solver_iterations=int(sol.iterations))
        return SolveStatus(status="numerical_failure", solver_iterations=int(sol.iterations))


class CvxpyBackend:
    """Generic backend through cvxpy; slower, used for lowering cross-checks."""

    supports_exponential = True

    def __init__(self, solver: str = "CLARABEL"):
        self.solver = solver

    def solve(self, program: ConicProgram) -> SolveStatus:
        import cvxpy as cp

        cvars = {name: cp.Variable(size) for name, size in program.variables.items()}

        def to_cvx(expr: Affine):
            out = expr.const
            for (name, idx), coeff in expr.coeffs.items():
                out = out + coeff * cvars[name][idx]
            return out

        cons = []
        for con in program.constraints:
            if isinstance(con, LinearConstraint):
                cons.append(to_cvx(con.expr) == 0 if con.equality else to_cvx(con.expr) <= 0)
            elif isinstance(con, SecondOrderConeConstraint):
                cons.append(cp.norm(cp.hstack([to_cvx(a) for a in con.vector])) <= to_cvx(con.bound))
            elif isinstance(con, SumSquaresConstraint):
                cons.append(cp.sum_squares(cp.hstack([to_cvx(a) for a in con.vector])) <= to_cvx(con.bound))
            elif isinstance(con, ExpConstraint):
                cons.append(cp.exp(to_cvx(con.exponent)) <= to_cvx(con.bound))
        problem = cp.Problem(cp.Maximize(to_cvx(program.objective)), cons)
        try:
            problem.solve(solver=self.solver)
        except cp.error.SolverError:
            return SolveStatus(status="numerical_failure")
        if problem.status in ("optimal", "optimal_inaccurate"):
            assignment = {name: np.atleast_1d(np.asarray(v.value, dtype=float)) for name, v in cvars.items()}
            return SolveStatus(
                status="optimal",
                objective_value=program.objective.evaluate(assignment),
                assignment=assignment,
                solver_iterations=int(problem.solver_stats.num_iters or 0),
            )
        if problem.status == "infeasible":
            return SolveStatus(status="infeasible")
        return SolveStatus(status="numerical_failure")


_DEFAULT_BACKEND: ClarabelBackend | None = None


def default_backend() -> ClarabelBackend:
    global _DEFAULT_BACKEND
    if _DEFAULT_BACKEND is None:
        _DEFAULT_BACKEND = ClarabelBackend()
    return _DEFAULT_BACKEND


def solve(program: ConicProgram, backend=None) -> SolveStatus:
    """Solve the program on the given backend (default: direct Clarabel)."""
    return (backend or default_backend()).solve(program)


def add_power_constraint(program: ConicProgram, precoder_vars: list[str], p_t: float):
    """Total transmit power of the listed (real-expanded) precoders <= p_t."""
    comps = [a for name in precoder_vars for a in program.slots(name)]
    return program.add_sum_squares_leq(comps, Affine.constant(p_t), label="power_budget")


def add_exp_rate_link(program: ConicProgram, alpha: Affine, theta: Affine, w: float, backend=None):
    """Encode 2^(alpha/w) <= theta as exponential-cone membership.

    The theta variable is expected to carry a >= 1 lower bound already.
    """
    if backend is not None and not getattr(backend, "supports_exponential", False):
        raise BackendUnsupported(
            f"{type(backend).__name__} declares no exponential-cone capability"
        )
    return program.add_exp_leq(alpha * (np.log(2.0) / w), theta, label="rate_link")


def constraint_violations(program: ConicProgram, assignment: dict) -> list[tuple[Constraint, float]]:
    """Independent numeric re-check of every constraint at the assignment."""
    return [(con, con.violation(assignment)) for con in program.constraints]


def max_violation(program: ConicProgram, assignment: dict) -> float:
    if not program.constraints:
        return 0.0
    return max(v for _, v in constraint_violations(program, assignment))


def dump_program(program: ConicProgram) -> str:
    """Plain-text listing of variables and constraints, stable across runs."""
    lines = [f"program {program.name or '<unnamed>'}"]
    lines.append("variables:")
    for name, size in program.variables.items():
        lines.append(f"  {name}[{size}]")
    lines.append(f"maximize: {program.objective!r}")
    lines.append("constraints:")
    for con in program.constraints:
        lines.append("  " + con.render())
    return "\n".join(lines)
