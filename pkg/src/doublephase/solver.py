"""Ground-state and nodal solutions by projected descent on the Nehari sets.

Each step moves along the residual preconditioned by a gradient-weighted
stiffness matrix, then rescales back onto the constraint set with the
fibering projection; steps are accepted by Armijo backtracking on the energy.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import splu

from .energy import element_gradients, energy_terms, nehari_defect, residual_values
from .eigen import bump, first_eigenpair
from .fibering import ProjectionError, project_values
from .mesh import Field, Mesh, interval_mesh_from_points
from .problem import DoublePhaseProblem


class DegenerateIterateError(RuntimeError):
    """A signed part of a nodal iterate collapsed below the mass floor."""


@dataclass
class SolveOptions:
    max_iters: int = 2000
    tol: float = 1e-8
    armijo: float = 1e-4
    max_backtracks: int = 60
    energy_slack: float = 1e-14
    initial: str = "eigenfunction"  # eigenfunction | bump | random | field
    initial_field: Field | None = None
    seed: int = 0
    restarts: int = 3
    projection_tol: float = 1e-12
    metric_floor: float = 1e-2
    mass_floor: float = 1e-10
    zero_snap: float = 1e-10

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.initial not in ("eigenfunction", "bump", "random", "field"):
            raise ValueError(f"unknown initial guess {self.initial!r}")
        if self.initial == "field" and self.initial_field is None:
            raise ValueError("initial='field' needs initial_field")


@dataclass
class SolveReport:
    solution: Field
    energy: float
    residual_inf: float
    scale: float
    defects: dict
    sign_class: str
    iterations: int
    converged: bool
    energy_trace: list = field(default_factory=list)
    t_trace: list = field(default_factory=list)
    message: str = ""
    seed: int = 0
    kind: str = "ground"
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "energy": self.energy,
            "residual_inf": self.residual_inf,
            "scale": self.scale,
            "defects": dict(self.defects),
            "sign_class": self.sign_class,
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
            "seed": self.seed,
            "sup_norm": self.solution.sup_norm,
            "energy_trace": list(self.energy_trace),
            "t_trace": [list(t) if isinstance(t, tuple) else t for t in self.t_trace],
        }


def sign_classification(u: Field, tol: float = 1e-8, floor: float = 1e-12) -> str:
    """'zero', 'nodal', 'positive' or 'negative'."""
    v = u.values
    sup = float(np.max(np.abs(v)))
    if sup <= floor:
        return "zero"
    if v.min() < -tol * sup and v.max() > tol * sup:
        return "nodal"
    return "positive" if v.max() >= -v.min() else "negative"


def random_field(mesh: Mesh, rng: np.random.Generator, modes: int = 4) -> Field:
    """Random sine series with ``modes`` terms per direction, zero on the boundary."""
    def func(x):
        out = np.zeros(len(x))
        coef = rng.standard_normal((modes,) * mesh.dimension)
        for idx in np.ndindex(coef.shape):
            term = np.full(len(x), coef[idx])
            for d, (a, b) in enumerate(mesh.bounds):
                term *= np.sin((idx[d] + 1) * np.pi * (x[:, d] - a) / (b - a))
            out += term
        return out

    return Field.interpolate(mesh, func)


def _direction(problem: DoublePhaseProblem, values: np.ndarray, r: np.ndarray, floor: float, free: np.ndarray):
    """-M^-1 r on the free interior nodes, M the gradient-weighted stiffness matrix."""
    grads = element_gradients(problem, values)
    gn2 = np.sum(grads**2, axis=1)
    d2 = (floor**2) * max(gn2.max(), 1e-300)
    p, q = problem.p, problem.q
    w = (p - 1) * (gn2 + d2) ** ((p - 2) / 2) + (q - 1) * problem.weight_values * (gn2 + d2) ** ((q - 2) / 2)
    K = problem.mesh.stiffness_matrix(w)
    d = np.zeros(len(problem.mesh.interior_nodes))
    if free.all():
        d[:] = -splu(K).solve(r)
    else:
        d[free] = -splu(K[free][:, free].tocsc()).solve(r[free])
    return d


def _initial(problem: DoublePhaseProblem, opt: SolveOptions, seed: int, nodal: bool) -> Field:
    mesh = problem.mesh
    kind = opt.initial if seed == opt.seed else "random"
    if kind == "field":
        return opt.initial_field
    if kind == "random":
        return random_field(mesh, np.random.default_rng(seed))
    base = first_eigenpair(mesh, problem.p).u1 if kind == "eigenfunction" else bump(mesh)
    if not nodal:
        return base
    (a, b) = mesh.bounds[0]
    flip = Field.interpolate(mesh, lambda x: (a + b) / 2 - x[:, 0])
    return Field(mesh, base.values * flip.values)


class _Iterate:
    """Current point of a projected descent with its cached diagnostics."""

    def __init__(self, problem, values, ts):
        self.values = values
        self.ts = ts
        self.terms = energy_terms(problem, Field(problem.mesh, values))
        self.phi = self.terms.value


def _ground_projection(problem, opt):
    def proj(values):
        t, _, _, _ = project_values(problem, values, opt.projection_tol)
        return t * values, t

    return proj


def _nodal_projection(problem, opt):
    mesh = problem.mesh
    floor = opt.mass_floor * mesh.domain_measure

    def mass(v):
        return mesh.integrate(np.abs(mesh.at_quadrature(v)) ** problem.p)

    def proj(values):
        # rounding noise must not move the nodal set off a vertex
        values = np.where(np.abs(values) <= opt.zero_snap * np.max(np.abs(values)), 0.0, values)
        pos = np.maximum(values, 0.0)
        neg = -np.maximum(-values, 0.0)
        if mass(pos) < floor or mass(neg) < floor:
            raise DegenerateIterateError("signed part below the mass floor")
        tp, _, _, _ = project_values(problem, pos, opt.projection_tol)
        tn, _, _, _ = project_values(problem, neg, opt.projection_tol)
        return tp * pos + tn * neg, (tp, tn)

    return proj


def _descend(problem, opt, start_values, proj, defects_of, kind, seed, hold_zeros=False):
    mesh = problem.mesh
    idx = mesh.interior_nodes
    values, ts = proj(np.array(start_values, dtype=float))
    cur = _Iterate(problem, values, ts)
    energy_trace, t_trace = [cur.phi], [ts]
    alpha = 1.0
    converged = False
    message = "max_iters exceeded"
    it = 0
    while True:
        r = residual_values(problem, cur.values)
        rinf = float(np.max(np.abs(r)))
        u = Field(mesh, cur.values)
        sc = 1.0 + abs(cur.phi) + u.sup_norm
        if rinf <= opt.tol * sc:
            converged = True
            message = "converged"
            break
        if it >= opt.max_iters:
            break
        it += 1
        free = np.ones(len(idx), dtype=bool)
        if hold_zeros:
            # a vertex of the nodal set stays put while its residual is within tolerance
            free = ~((cur.values[idx] == 0.0) & (np.abs(r[idx]) <= opt.tol * sc))
        d = _direction(problem, cur.values, r[idx], opt.metric_floor, free)
        slope = float(r[idx] @ d)
        alpha = min(1.0, 2.0 * alpha)
        accepted = None
        for _ in range(opt.max_backtracks):
            trial = cur.values.copy()
            trial[idx] += alpha * d
            try:
                tv, tts = proj(trial)
                cand = _Iterate(problem, tv, tts)
            except (ProjectionError, DegenerateIterateError, ValueError):
                alpha *= 0.5
                continue
            if cand.phi <= cur.phi + opt.armijo * alpha * slope + opt.energy_slack * (1 + abs(cur.phi)):
                accepted = cand
                break
            alpha *= 0.5
        if accepted is None:
            message = "line search stalled"
            break
        cur = accepted
        energy_trace.append(cur.phi)
        t_trace.append(cur.ts)

    sol = Field(mesh, cur.values)
    return SolveReport(
        solution=sol,
        energy=cur.phi,
        residual_inf=rinf,
        scale=sc,
        defects=defects_of(sol),
        sign_class=sign_classification(sol),
        iterations=it,
        converged=converged,
        energy_trace=energy_trace,
        t_trace=t_trace,
        message=message,
        seed=seed,
        kind=kind,
    )


def solve_ground_state(problem: DoublePhaseProblem, options: SolveOptions | None = None) -> SolveReport:
    """Minimize the energy over the Nehari set, starting from the first eigenfunction by default."""
    opt = options or SolveOptions()
    t0 = time.perf_counter()

    def defects(u):
        return {"u": nehari_defect(problem, u)}

    proj = _ground_projection(problem, opt)
    last_exc = None
    for k in range(opt.restarts + 1):
        seed = opt.seed + k
        start = _initial(problem, opt, seed, nodal=False)
        try:
            rep = _descend(problem, opt, start.values, proj, defects, "ground", seed)
        except ProjectionError as exc:
            last_exc = exc
            continue
        rep.wall_time = time.perf_counter() - t0
        return rep
    raise last_exc


def nodal_part_defects(problem: DoublePhaseProblem, y: Field) -> dict:
    pos = Field(problem.mesh, np.maximum(y.values, 0.0))
    neg = Field(problem.mesh, -np.maximum(-y.values, 0.0))
    return {
        "positive": nehari_defect(problem, pos) if not pos.is_zero() else float("nan"),
        "negative": nehari_defect(problem, neg) if not neg.is_zero() else float("nan"),
    }


def project_to_nodal_set(problem: DoublePhaseProblem, y: Field, tol: float = 1e-12) -> tuple[Field, float, float]:
    """t+ y+ - t- y-, with each signed part scaled onto the Nehari set."""
    opt = SolveOptions(projection_tol=tol)
    values, (tp, tn) = _nodal_projection(problem, opt)(np.array(y.values))
    return Field(problem.mesh, values), tp, tn


def solve_nodal(problem: DoublePhaseProblem, options: SolveOptions | None = None) -> SolveReport:
    """Minimize the energy over fields whose signed parts both lie on the Nehari set."""
    opt = options or SolveOptions()
    t0 = time.perf_counter()
    proj = _nodal_projection(problem, opt)
    last_exc = None
    for k in range(opt.restarts + 1):
        seed = opt.seed + k
        start = _initial(problem, opt, seed, nodal=True)
        try:
            rep = _descend(problem, opt, start.values, proj,
                           lambda y: nodal_part_defects(problem, y), "nodal", seed, hold_zeros=True)
        except (DegenerateIterateError, ProjectionError) as exc:
            last_exc = exc
            continue
        rep.wall_time = time.perf_counter() - t0
        return rep
    raise DegenerateIterateError(f"all {opt.restarts + 1} starts degenerated: {last_exc}")


def sign_change_points(u: Field) -> np.ndarray:
    """Zeros of a 1D P1 field strictly inside elements whose end values change sign."""
    m = u.mesh
    if m.dimension != 1:
        raise ValueError("sign-change alignment is implemented for 1D meshes")
    x = m.vertices[:, 0]
    v = u.values
    i = np.flatnonzero(v[:-1] * v[1:] < 0)
    return x[i] - v[i] * (x[i + 1] - x[i]) / (v[i + 1] - v[i])


def align_mesh_to_sign_change(u: Field, snap: float = 1e-9) -> Mesh:
    """1D mesh whose vertices include the detected sign-change points of ``u``."""
    m = u.mesh
    x = m.vertices[:, 0]
    pts = [z for z in sign_change_points(u) if np.min(np.abs(x - z)) > snap * m.h]
    return interval_mesh_from_points(np.sort(np.concatenate([x, pts])))


def transfer_1d(u: Field, mesh: Mesh) -> Field:
    """Linear interpolation of a 1D field onto another mesh of the same interval.

    Vertices placed at a sign change of ``u`` get an exact zero; interpolation
    alone leaves a rounding residue there.
    """
    x = mesh.vertices[:, 0]
    v = np.interp(x, u.mesh.vertices[:, 0], u.values)
    v[np.isin(x, sign_change_points(u))] = 0.0
    v[mesh.boundary_nodes] = 0.0
    return Field(mesh, v)
