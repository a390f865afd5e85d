"""Fibering maps t -> phi(t u) and the scaling that puts t u on the Nehari set."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import _finite, gradient_integrals
from .mesh import Field
from .problem import DoublePhaseProblem

BRACKET_LIMIT = 20  # bracket search stops at t = 2^(+-20)


class ProjectionError(RuntimeError):
    """mu'_u has no sign change inside the bracket limits."""


@dataclass(frozen=True)
class FiberingResult:
    t_u: float
    projected: Field
    defect_at_root: float
    bracket: tuple[float, float]
    iterations: int


class Fiber:
    """mu_u and mu'_u for a fixed direction u.

    The gradient integrals are computed once; each t only needs the reaction
    quadrature, on the same points the energy module uses.
    """

    def __init__(self, problem: DoublePhaseProblem, values: np.ndarray):
        if not np.any(values):
            raise ValueError("fibering map needs u != 0")
        self.problem = problem
        self.values = values
        self.A, self.B = gradient_integrals(problem, values)
        self.uq = problem.mesh.at_quadrature(values)

    def mu(self, t: float) -> float:
        pb = self.problem
        prim = pb.mesh.integrate(_finite(pb.F(t * self.uq), "primitive F"))
        return t**pb.p * self.A / pb.p + t**pb.q * self.B / pb.q - prim

    def dmu(self, t: float) -> float:
        pb = self.problem
        react = pb.mesh.integrate(_finite(pb.f(t * self.uq), "reaction f") * self.uq)
        return t ** (pb.p - 1) * self.A + t ** (pb.q - 1) * self.B - react

    def balance(self, t: float) -> float:
        """int f(z,tu) u / t^(p-1) - t^(q-p) int a|Du|^q; increasing in t under H(f)."""
        pb = self.problem
        react = pb.mesh.integrate(_finite(pb.f(t * self.uq), "reaction f") * self.uq)
        return react / t ** (pb.p - 1) - t ** (pb.q - pb.p) * self.B


def fibering_values(problem: DoublePhaseProblem, u: Field, t: float) -> tuple[float, float]:
    """(mu_u(t), mu'_u(t))."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    fib = Fiber(problem, u.values)
    return fib.mu(t), fib.dmu(t)


def _bracket(dmu, limit=BRACKET_LIMIT):
    d1 = dmu(1.0)
    if d1 == 0:
        return 1.0, 1.0, 0
    if d1 > 0:
        lo, hi = 1.0, 2.0
        for k in range(1, limit + 1):
            hi = 2.0**k
            if dmu(hi) < 0:
                return lo, hi, k
            lo = hi
    else:
        lo, hi = 0.5, 1.0
        for k in range(1, limit + 1):
            lo = 2.0**-k
            if dmu(lo) > 0:
                return lo, hi, k
            hi = lo
    raise ProjectionError(
        f"mu' keeps sign {'+' if d1 > 0 else '-'} on [2^-{limit}, 2^{limit}]; "
        "reaction violates the superlinearity hypotheses or u is degenerate"
    )


def project_values(problem: DoublePhaseProblem, values: np.ndarray, tol: float = 1e-12):
    """Root of mu'_u by bracket doubling and bisection; returns (t, lo, hi, iterations)."""
    fib = Fiber(problem, values)
    lo, hi, its = _bracket(fib.dmu)
    if lo == hi:
        return 1.0, 1.0, 1.0, 0
    # invariant: dmu(lo) > 0 > dmu(hi)
    while hi - lo > tol * lo:
        mid = 0.5 * (lo + hi)
        d = fib.dmu(mid)
        its += 1
        if d > 0:
            lo = mid
        elif d < 0:
            hi = mid
        else:
            lo = hi = mid
            break
    return 0.5 * (lo + hi), lo, hi, its


def project_to_nehari(problem: DoublePhaseProblem, u: Field, tol: float = 1e-12) -> FiberingResult:
    """Unique t_u > 0 with t_u u on the Nehari set."""
    if u.is_zero():
        raise ValueError("cannot project u = 0")
    t, lo, hi, its = project_values(problem, u.values, tol)
    proj = u * t
    defect = t * Fiber(problem, u.values).dmu(t)
    return FiberingResult(t, proj, defect, (lo, hi), its)


def fibering_curve(problem: DoublePhaseProblem, u: Field, t_grid) -> np.ndarray:
    """Rows (t, mu_u(t), mu'_u(t)) in grid order."""
    t_grid = np.asarray(t_grid, dtype=float).ravel()
    if t_grid.size == 0:
        raise ValueError("empty t grid")
    if np.any(t_grid <= 0):
        raise ValueError("t grid must be positive")
    fib = Fiber(problem, u.values)
    return np.array([(t, fib.mu(t), fib.dmu(t)) for t in t_grid])
