"""Energy functional, weak-form residual and Nehari defect on P1 fields."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Field
from .problem import DoublePhaseProblem


class EvaluationError(ArithmeticError):
    """Non-finite reaction data; ``element`` is the first offending element."""

    def __init__(self, message: str, element: int):
        super().__init__(f"{message} (element {element})")
        self.element = element


@dataclass(frozen=True)
class EnergyTerms:
    """Pieces of the energy: ||Du||_p^p, int a|Du|^q, int F(z,u) and the total."""

    grad_p: float
    grad_q: float
    primitive: float
    value: float


def _finite(q: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(q)):
        bad = np.argwhere(~np.isfinite(q))[0][0]
        raise EvaluationError(f"non-finite {what}", int(bad))
    return q


def element_gradients(problem: DoublePhaseProblem, values: np.ndarray) -> np.ndarray:
    m = problem.mesh
    return np.einsum("ek,ekd->ed", values[m.elements], m.basis_gradients)


def gradient_integrals(problem: DoublePhaseProblem, values: np.ndarray) -> tuple[float, float]:
    """(||Du||_p^p, int a |Du|^q); exact for P1 fields and centroid-sampled weights."""
    m = problem.mesh
    g = np.linalg.norm(element_gradients(problem, values), axis=1)
    gp = float(np.sum(g**problem.p * m.element_measures))
    gq = float(np.sum(problem.weight_values * g**problem.q * m.element_measures))
    return gp, gq


def energy_terms(problem: DoublePhaseProblem, u: Field) -> EnergyTerms:
    gp, gq = gradient_integrals(problem, u.values)
    uq = problem.mesh.at_quadrature(u.values)
    with np.errstate(over="ignore", invalid="ignore"):
        Fq = problem.F(uq)
    prim = problem.mesh.integrate(_finite(Fq, "primitive F"))
    return EnergyTerms(gp, gq, prim, gp / problem.p + gq / problem.q - prim)


def energy(problem: DoublePhaseProblem, u: Field) -> float:
    """phi(u) = ||Du||_p^p / p + int a|Du|^q / q - int F(z, u)."""
    return energy_terms(problem, u).value


def flux_coefficients(problem: DoublePhaseProblem, grads: np.ndarray) -> np.ndarray:
    """Per-element |Du|^(p-2) + a |Du|^(q-2), with the norm regularized by epsilon."""
    n2 = np.sum(grads**2, axis=1) + problem.epsilon**2
    with np.errstate(divide="ignore"):
        c = n2 ** ((problem.p - 2) / 2) + problem.weight_values * n2 ** ((problem.q - 2) / 2)
    # a zero gradient contributes nothing regardless of the exponent
    return np.where(n2 > 0, c, 0.0)


def residual_values(problem: DoublePhaseProblem, values: np.ndarray) -> np.ndarray:
    m = problem.mesh
    grads = element_gradients(problem, values)
    coef = flux_coefficients(problem, grads)
    r = m.flux_vector(coef[:, None] * grads)
    with np.errstate(over="ignore", invalid="ignore"):
        fq = _finite(problem.f(m.at_quadrature(values)), "reaction f")
    r -= m.load_vector(fq)
    r[m.boundary_nodes] = 0.0
    return r


def residual(problem: DoublePhaseProblem, u: Field) -> np.ndarray:
    """Entries <phi'(u), hat_i>; boundary entries are 0."""
    return residual_values(problem, u.values)


def nehari_defect(problem: DoublePhaseProblem, u: Field) -> float:
    """<phi'(u), u> = ||Du||_p^p + int a|Du|^q - int f(z,u) u; zero exactly on the Nehari set."""
    if u.is_zero():
        raise ValueError("Nehari defect is undefined at u = 0")
    gp, gq = gradient_integrals(problem, u.values)
    uq = problem.mesh.at_quadrature(u.values)
    return gp + gq - problem.mesh.integrate(_finite(problem.f(uq), "reaction f") * uq)


def scale(problem: DoublePhaseProblem, u: Field, phi: float | None = None) -> float:
    """Tolerance scale 1 + |phi(u)| + ||u||_inf."""
    if phi is None:
        phi = energy(problem, u)
    return 1.0 + abs(phi) + u.sup_norm
