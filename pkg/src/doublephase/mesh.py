"""Structured simplicial meshes and conforming P1 fields with zero Dirichlet data.

Intervals are split into segments, rectangles into right triangles. All
integrals over a mesh go through a fixed per-element quadrature rule so
that every module sees the same quadrature points.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

# 3-point Gauss-Legendre on the reference segment, barycentric form (exact to degree 5)
_G = np.sqrt(3.0 / 5.0) / 2.0
_QUAD_1D = (
    np.array([[0.5 + _G, 0.5 - _G], [0.5, 0.5], [0.5 - _G, 0.5 + _G]]),
    np.array([5.0, 8.0, 5.0]) / 18.0,
)

# 6-point symmetric rule on triangles (exact to degree 4)
_A, _B = 0.445948490915965, 0.091576213509771
_WA, _WB = 0.223381589678011, 0.109951743655322
_QUAD_2D = (
    np.array(
        [
            [_A, _A, 1 - 2 * _A],
            [_A, 1 - 2 * _A, _A],
            [1 - 2 * _A, _A, _A],
            [_B, _B, 1 - 2 * _B],
            [_B, 1 - 2 * _B, _B],
            [1 - 2 * _B, _B, _B],
        ]
    ),
    np.array([_WA, _WA, _WA, _WB, _WB, _WB]),
)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Simplicial mesh of an interval or rectangle.

    ``vertices`` has shape (n_vertices, dim), ``elements`` (n_elements, dim + 1).
    Derived per-element data (measures, basis gradients, quadrature points) is
    computed once at construction.
    """

    vertices: np.ndarray
    elements: np.ndarray
    boundary_nodes: np.ndarray
    domain_measure: float
    bounds: tuple = ()

    element_measures: np.ndarray = field(init=False, repr=False)
    basis_gradients: np.ndarray = field(init=False, repr=False)
    centroids: np.ndarray = field(init=False, repr=False)
    quad_bary: np.ndarray = field(init=False, repr=False)
    quad_points: np.ndarray = field(init=False, repr=False)
    quad_weights: np.ndarray = field(init=False, repr=False)
    interior_nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        verts = _frozen(self.vertices)
        if verts.ndim == 1:
            verts = _frozen(verts[:, None])
        elems = _frozen(self.elements, dtype=np.int64)
        dim = verts.shape[1]
        if dim not in (1, 2) or elems.shape[1] != dim + 1:
            raise ValueError("mesh must be 1D segments or 2D triangles")
        if elems.min() < 0 or elems.max() >= len(verts):
            raise ValueError("element vertex index out of range")

        coords = verts[elems]  # (ne, dim+1, dim)
        jac = coords[:, 1:, :] - coords[:, :1, :]  # rows are edge vectors
        det = np.linalg.det(jac) if dim == 2 else jac[:, 0, 0]
        measures = np.abs(det) / (1 if dim == 1 else 2)
        if np.any(measures <= 0):
            raise ValueError("degenerate element with non-positive measure")

        # grad(lambda_k) for k>=1 are the rows of inv(jac).T; lambda_0 = 1 - sum
        inv = np.linalg.inv(jac)  # (ne, dim, dim)
        g_rest = np.transpose(inv, (0, 2, 1))
        g0 = -g_rest.sum(axis=1, keepdims=True)
        grads = np.concatenate([g0, g_rest], axis=1)

        bary, w = _QUAD_1D if dim == 1 else _QUAD_2D
        qpts = np.einsum("qk,ekd->eqd", bary, coords)

        boundary = np.unique(np.asarray(self.boundary_nodes, dtype=np.int64))
        interior = np.setdiff1d(np.arange(len(verts)), boundary)

        set_ = object.__setattr__
        set_(self, "vertices", verts)
        set_(self, "elements", elems)
        set_(self, "boundary_nodes", _frozen(boundary, dtype=np.int64))
        set_(self, "interior_nodes", _frozen(interior, dtype=np.int64))
        set_(self, "element_measures", _frozen(measures))
        set_(self, "basis_gradients", _frozen(grads))
        set_(self, "centroids", _frozen(coords.mean(axis=1)))
        set_(self, "quad_bary", _frozen(bary))
        set_(self, "quad_points", _frozen(qpts))
        set_(self, "quad_weights", _frozen(w[None, :] * measures[:, None]))

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def h(self) -> float:
        """Largest element diameter."""
        coords = self.vertices[self.elements]
        diam = 0.0
        k = coords.shape[1]
        for i in range(k):
            for j in range(i + 1, k):
                diam = max(diam, float(np.linalg.norm(coords[:, i] - coords[:, j], axis=1).max()))
        return diam

    def at_quadrature(self, values: np.ndarray) -> np.ndarray:
        """Interpolant values at the quadrature points, shape (n_elements, n_quad)."""
        return values[self.elements] @ self.quad_bary.T

    def integrate(self, qvalues: np.ndarray) -> float:
        """Integrate data given at quadrature points."""
        return float(np.sum(qvalues * self.quad_weights))

    def load_vector(self, qvalues: np.ndarray) -> np.ndarray:
        """Pairings of quadrature data with each nodal hat function."""
        contrib = (qvalues * self.quad_weights) @ self.quad_bary  # (ne, dim+1)
        out = np.zeros(self.n_vertices)
        np.add.at(out, self.elements, contrib)
        return out

    def flux_vector(self, element_vectors: np.ndarray) -> np.ndarray:
        """Pairings sum_e |e| (v_e . grad hat_i) for elementwise constant vectors v_e."""
        contrib = np.einsum("ekd,ed->ek", self.basis_gradients, element_vectors)
        contrib *= self.element_measures[:, None]
        out = np.zeros(self.n_vertices)
        np.add.at(out, self.elements, contrib)
        return out

    def stiffness_matrix(self, element_weights=None) -> sp.csc_matrix:
        """Weighted P1 stiffness matrix restricted to the interior nodes."""
        w = np.ones(self.n_elements) if element_weights is None else np.asarray(element_weights)
        local = np.einsum("ekd,eld->ekl", self.basis_gradients, self.basis_gradients)
        local *= (w * self.element_measures)[:, None, None]
        k = self.elements.shape[1]
        rows = np.repeat(self.elements, k, axis=1).ravel()
        cols = np.tile(self.elements, (1, k)).ravel()
        full = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(self.n_vertices,) * 2).tocsr()
        idx = self.interior_nodes
        return full[idx][:, idx].tocsc()


def interval_mesh_from_points(points) -> Mesh:
    """1D mesh with the given (sorted, distinct) vertex coordinates."""
    x = np.asarray(points, dtype=float)
    if x.ndim != 1 or len(x) < 3:
        raise ValueError("need at least 3 points (2 cells)")
    if np.any(np.diff(x) <= 0):
        raise ValueError("points must be strictly increasing")
    n = len(x) - 1
    elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    return Mesh(x[:, None], elements, [0, n], float(x[-1] - x[0]), ((float(x[0]), float(x[-1])),))


def build_interval_mesh(length: float, n_cells: int) -> Mesh:
    """Uniform mesh of (0, length) with ``n_cells`` segments."""
    if not length > 0 or not np.isfinite(length):
        raise ValueError(f"length must be positive, got {length}")
    if int(n_cells) != n_cells or n_cells < 2:
        raise ValueError(f"n_cells must be an integer >= 2, got {n_cells}")
    n = int(n_cells)
    x = np.linspace(0.0, length, n + 1)
    elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    return Mesh(x[:, None], elements, [0, n], float(length), ((0.0, float(length)),))


def build_rectangle_mesh(lx: float, ly: float, nx: int, ny: int) -> Mesh:
    """Structured mesh of (0, lx) x (0, ly); each cell is cut into two triangles."""
    for name, v in (("lx", lx), ("ly", ly)):
        if not v > 0 or not np.isfinite(v):
            raise ValueError(f"{name} must be positive, got {v}")
    for name, v in (("nx", nx), ("ny", ny)):
        if int(v) != v or v < 2:
            raise ValueError(f"{name} must be an integer >= 2, got {v}")
    nx, ny = int(nx), int(ny)
    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)
    X, Y = np.meshgrid(xs, ys)  # row j holds y = ys[j]
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    n1 = (j * (nx + 1) + i).ravel()
    n2 = n1 + 1
    n3 = n2 + (nx + 1)
    n4 = n1 + (nx + 1)
    elements = np.vstack([np.column_stack([n1, n2, n3]), np.column_stack([n1, n3, n4])])

    ii, jj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1))
    on_edge = (ii == 0) | (ii == nx) | (jj == 0) | (jj == ny)
    boundary = np.flatnonzero(on_edge.ravel())
    return Mesh(vertices, elements, boundary, float(lx * ly), ((0.0, float(lx)), (0.0, float(ly))))


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal values of a P1 function on ``mesh`` that vanishes on the boundary."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if len(v) != self.mesh.n_vertices:
            raise ValueError(f"expected {self.mesh.n_vertices} values, got {len(v)}")
        if np.any(v[self.mesh.boundary_nodes] != 0.0):
            raise ValueError("field must vanish at boundary nodes")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, mesh: Mesh) -> "Field":
        return cls(mesh, np.zeros(mesh.n_vertices))

    @classmethod
    def interpolate(cls, mesh: Mesh, func) -> "Field":
        """Nodal interpolant of ``func(coords)``; coords has shape (n_vertices, dim).

        Boundary values are overwritten with 0.
        """
        v = np.array(func(mesh.vertices), dtype=float).reshape(-1)
        v[mesh.boundary_nodes] = 0.0
        return cls(mesh, v)

    @classmethod
    def from_interior(cls, mesh: Mesh, interior_values) -> "Field":
        v = np.zeros(mesh.n_vertices)
        v[mesh.interior_nodes] = interior_values
        return cls(mesh, v)

    def _wrap(self, values):
        return Field(self.mesh, values)

    def __add__(self, other: "Field") -> "Field":
        return self._wrap(self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        return self._wrap(self.values - other.values)

    def __neg__(self) -> "Field":
        return self._wrap(-self.values)

    def __mul__(self, c: float) -> "Field":
        return self._wrap(float(c) * self.values)

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "Field":
        return self._wrap(self.values / float(c))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def is_zero(self) -> bool:
        return not np.any(self.values)


def gradient(u: Field) -> np.ndarray:
    """Elementwise-constant gradient of the interpolant, shape (n_elements, dim)."""
    m = u.mesh
    return np.einsum("ek,ekd->ed", u.values[m.elements], m.basis_gradients)


def integrate_power(u: Field, s: float) -> float:
    """Quadrature value of the integral of |u|^s over the domain."""
    if not s >= 1:
        raise ValueError(f"exponent must be >= 1, got {s}")
    m = u.mesh
    return m.integrate(np.abs(m.at_quadrature(u.values)) ** s)


def positive_part(u: Field) -> Field:
    return Field(u.mesh, np.maximum(u.values, 0.0))


def negative_part(u: Field) -> Field:
    return Field(u.mesh, np.maximum(-u.values, 0.0))
