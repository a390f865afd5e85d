"""First Dirichlet eigenpair of the p-Laplacian and the double-phase quotient."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import splu

from .energy import gradient_integrals
from .mesh import Field, Mesh, gradient, integrate_power
from .problem import DoublePhaseProblem


@dataclass
class EigenOptions:
    max_iters: int = 500
    rtol: float = 1e-14
    armijo: float = 1e-4
    metric_floor: float = 1e-3


@dataclass
class EigenResult:
    lambda1: float
    u1: Field
    p: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)
    boundary_slope: float = float("nan")


def _grad_p(mesh: Mesh, p: float, values: np.ndarray) -> float:
    g = np.linalg.norm(np.einsum("ek,ekd->ed", values[mesh.elements], mesh.basis_gradients), axis=1)
    return float(np.sum(g**p * mesh.element_measures))


def rayleigh_quotient(mesh: Mesh, p: float, u: Field) -> float:
    """||Du||_p^p / ||u||_p^p."""
    if u.is_zero():
        raise ValueError("Rayleigh quotient undefined at u = 0")
    return _grad_p(mesh, p, u.values) / integrate_power(u, p)


def bump(mesh: Mesh) -> Field:
    """Positive polynomial bump prod x_i (L_i - x_i), scaled to unit sup norm."""
    def func(x):
        out = np.ones(len(x))
        for d, (a, b) in enumerate(mesh.bounds):
            out *= (x[:, d] - a) * (b - x[:, d]) * 4 / (b - a) ** 2
        return out

    return Field.interpolate(mesh, func)


def _boundary_slope(u: Field) -> float:
    """Mean outward derivative over elements touching the boundary (expected < 0)."""
    m = u.mesh
    grads = gradient(u)
    touching = np.isin(m.elements, m.boundary_nodes).any(axis=1)
    cent = m.centroids[touching]
    lo = np.array([b[0] for b in m.bounds])
    hi = np.array([b[1] for b in m.bounds])
    dist = np.concatenate([cent - lo, hi - cent], axis=1)
    side = np.argmin(dist, axis=1)
    dim = m.dimension
    normals = np.zeros((len(cent), dim))
    normals[np.arange(len(cent)), side % dim] = np.where(side < dim, -1.0, 1.0)
    return float(np.mean(np.sum(grads[touching] * normals, axis=1)))


def first_eigenpair(mesh: Mesh, p: float, options: EigenOptions | None = None,
                    initial: Field | None = None) -> EigenResult:
    """Minimize the Rayleigh quotient over nonnegative fields with ||u||_p = 1.

    Each step is preconditioned by a p-weighted stiffness matrix, followed by
    clamping to u >= 0 and renormalization.
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    opt = options or EigenOptions()
    idx = mesh.interior_nodes

    def normalize(v):
        v = np.maximum(v, 0.0)
        v[mesh.boundary_nodes] = 0.0
        nrm = mesh.integrate(mesh.at_quadrature(v) ** p) ** (1 / p)
        return v / nrm

    def quotient(v):
        return _grad_p(mesh, p, v) / mesh.integrate(np.abs(mesh.at_quadrature(v)) ** p)

    u = normalize(np.array((initial or bump(mesh)).values))
    lam = quotient(u)
    trace = [lam]
    converged = False
    alpha = 1.0
    it = 0
    for it in range(1, opt.max_iters + 1):
        grads = np.einsum("ek,ekd->ed", u[mesh.elements], mesh.basis_gradients)
        gn = np.linalg.norm(grads, axis=1)
        flux = mesh.flux_vector((gn ** (p - 2))[:, None] * grads) if p != 2 else mesh.flux_vector(grads)
        uq = mesh.at_quadrature(u)
        load = mesh.load_vector(np.abs(uq) ** (p - 2) * uq)
        g = p * (flux - lam * load)[idx]

        floor = opt.metric_floor * max(gn.max(), 1e-300)
        w = p * (p - 1) * (gn**2 + floor**2) ** ((p - 2) / 2)
        d = -splu(mesh.stiffness_matrix(w)).solve(g)
        slope = float(g @ d)
        if slope >= 0:
            break

        alpha = min(1.0, 2 * alpha)
        while True:
            trial = u.copy()
            trial[idx] += alpha * d
            trial = normalize(trial)
            lam_new = quotient(trial)
            if lam_new <= lam + opt.armijo * alpha * slope or alpha < 1e-12:
                break
            alpha *= 0.5
        if lam_new > lam:
            break
        done = lam - lam_new <= opt.rtol * lam
        u, lam = trial, lam_new
        trace.append(lam)
        if done:
            converged = True
            break

    u1 = Field(mesh, u)
    lam = rayleigh_quotient(mesh, p, u1)
    return EigenResult(lam, u1, p, it, converged, trace, _boundary_slope(u1))


def theta_quotient(problem: DoublePhaseProblem, u: Field) -> float:
    """(||Du||_p^p + (p/q) int a|Du|^q) / ||u||_p^p."""
    if u.is_zero():
        raise ValueError("quotient undefined at u = 0")
    gp, gq = gradient_integrals(problem, u.values)
    return (gp + problem.p / problem.q * gq) / integrate_power(u, problem.p)


@dataclass
class Lemma1Table:
    rows: np.ndarray  # columns t, theta(t u1), theta - lambda1
    slope: float
    lambda1: float


def lemma1_diagnostic(problem: DoublePhaseProblem, t_grid, eig: EigenResult | None = None) -> Lemma1Table:
    """theta(t u1) along the ray through the first eigenfunction and its decay rate in t."""
    t_grid = np.asarray(t_grid, dtype=float).ravel()
    if t_grid.size == 0 or np.any(t_grid <= 0) or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t grid must be positive and increasing")
    if eig is None:
        eig = first_eigenpair(problem.mesh, problem.p)
    rows = []
    for t in t_grid:
        th = theta_quotient(problem, eig.u1 * t)
        rows.append((t, th, th - eig.lambda1))
    rows = np.array(rows)
    gap = rows[:, 2]
    slope = float(np.polyfit(np.log(t_grid), np.log(gap), 1)[0]) if np.all(gap > 0) and len(t_grid) > 1 else float("nan")
    return Lemma1Table(rows, slope, eig.lambda1)
