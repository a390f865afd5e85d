"""Problem data for the double-phase Dirichlet problem and sampled hypothesis checks.

Reaction callables take ``(z, x)`` where ``x`` is an array and ``z`` has shape
``x.shape + (dim,)``; the builtin reactions ignore ``z``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .mesh import Mesh, build_interval_mesh, build_rectangle_mesh


class ConfigError(ValueError):
    """Invalid problem configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True, eq=False)
class Weight:
    kind: str
    params: dict
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def sample(self, mesh: Mesh) -> np.ndarray:
        """Values at the element centroids."""
        return np.asarray(self.evaluate(mesh.centroids), dtype=float).reshape(mesh.n_elements)

    def check(self, mesh: Mesh) -> dict:
        a = self.sample(mesh)
        return {
            "min": float(a.min()),
            "max": float(a.max()),
            "positive": bool(np.all(a > 0)),
            "bounded": bool(np.all(np.isfinite(a))),
        }


def constant_weight(value: float) -> Weight:
    value = float(value)
    return Weight("constant", {"value": value}, lambda z: np.full(len(z), value))


def power_weight(z0, alpha: float, scale: float = 1.0) -> Weight:
    """a(z) = scale * |z - z0|^alpha; vanishes at z0 so it is not bounded away from 0."""
    z0 = np.atleast_1d(np.asarray(z0, dtype=float))
    alpha, scale = float(alpha), float(scale)

    def evaluate(z):
        return scale * np.linalg.norm(np.asarray(z) - z0, axis=-1) ** alpha

    return Weight("power", {"z0": z0.tolist(), "alpha": alpha, "scale": scale}, evaluate)


def indicator_weight(split: float, low: float, high: float, axis: int = 0) -> Weight:
    """Two-level discontinuous weight: ``low`` where z[axis] < split, else ``high``."""
    split, low, high = float(split), float(low), float(high)

    def evaluate(z):
        return np.where(np.asarray(z)[..., axis] < split, low, high)

    params = {"split": split, "low": low, "high": high, "axis": int(axis)}
    return Weight("indicator", params, evaluate)


# ---------------------------------------------------------------------------
# reactions


@dataclass(frozen=True, eq=False)
class Reaction:
    """Reaction f(z, x) with derivative f'_x, primitive F and its growth constants.

    ``r`` is the growth exponent bounding f'_x, ``a0`` the envelope constant,
    ``tau`` and ``beta0`` the superlinearity quantifiers for f x - p F.
    """

    kind: str
    params: dict
    f: Callable = field(repr=False)
    df: Callable = field(repr=False)
    F: Callable = field(repr=False)
    r: float
    tau: float
    beta0: float
    a0: float
    odd: bool = True


def power_reaction(r: float, p: float) -> Reaction:
    """f(x) = |x|^(r-2) x."""
    r, p = float(r), float(p)
    if not r > 1:
        raise ValueError("power reaction needs r > 1")

    def f(z, x):
        return np.abs(x) ** (r - 2) * x

    def df(z, x):
        return (r - 1) * np.abs(x) ** (r - 2)

    def F(z, x):
        return np.abs(x) ** r / r

    # with tau = r: (f x - p F)/|x|^r = 1 - p/r exactly
    return Reaction("power", {"r": r}, f, df, F, r=r, tau=r, beta0=1 - p / r, a0=r - 1)


def log_reaction(s: float, p: float, r: float | None = None) -> Reaction:
    """Piecewise reaction: |x|^(s-2)x - |x|^(p-2)x on |x| <= 1, k|x|^(p-2)x ln|x| beyond.

    k = s - p. Superlinear but without the Ambrosetti-Rabinowitz property.
    """
    s, p = float(s), float(p)
    if not s > p:
        raise ValueError("log reaction needs s > p")
    k = s - p
    r = float(s if r is None else r)

    def f(z, x):
        ax = np.abs(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = ax ** (s - 2) * x - ax ** (p - 2) * x
            outer = k * ax ** (p - 2) * x * np.log(np.where(ax > 0, ax, 1.0))
        return np.where(ax <= 1, np.where(ax > 0, inner, 0.0), outer)

    def df(z, x):
        ax = np.abs(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = (s - 1) * ax ** (s - 2) - (p - 1) * ax ** (p - 2)
            outer = k * ax ** (p - 2) * ((p - 1) * np.log(np.where(ax > 0, ax, 1.0)) + 1)
        return np.where(ax <= 1, inner, outer)

    def F(z, x):
        ax = np.abs(x)
        safe = np.where(ax > 1, ax, 1.0)
        inner = ax**s / s - ax**p / p
        outer = (1 / s - 1 / p) + k * (safe**p * np.log(safe) / p - (safe**p - 1) / p**2)
        return np.where(ax <= 1, inner, outer)

    # f x - p F ~ (k/p)|x|^p for large |x|
    a0 = max(2 * s, k * ((p - 1) / (math.e * (r - p)) + 1)) if r > p else math.inf
    return Reaction("log", {"s": s, "k": k}, f, df, F, r=r, tau=p, beta0=k / p, a0=a0)


def linear_reaction(r: float = 3.0) -> Reaction:
    """f(x) = x. Not (p-1)-superlinear for p > 2; used as a negative control."""

    def f(z, x):
        return np.asarray(x, dtype=float) * 1.0

    def df(z, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def F(z, x):
        return 0.5 * np.asarray(x, dtype=float) ** 2

    return Reaction("linear", {}, f, df, F, r=float(r), tau=2.0, beta0=0.0, a0=1.0)


# ---------------------------------------------------------------------------
# problem


@dataclass(frozen=True, eq=False)
class DoublePhaseProblem:
    """-Delta_p u - div(a |Du|^(q-2) Du) = f(z, u) in the domain, u = 0 on its boundary."""

    p: float
    q: float
    mesh: Mesh
    weight: Weight
    reaction: Reaction
    epsilon: float = 1e-10
    config: dict | None = field(default=None, repr=False)

    weight_values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (1 < self.q < self.p):
            raise ValueError(f"exponents must satisfy 1 < q < p, got p={self.p}, q={self.q}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        a = self.weight.sample(self.mesh)
        a.flags.writeable = False
        object.__setattr__(self, "weight_values", a)

    def with_mesh(self, mesh: Mesh) -> "DoublePhaseProblem":
        return DoublePhaseProblem(self.p, self.q, mesh, self.weight, self.reaction, self.epsilon, self.config)

    def f(self, x: np.ndarray) -> np.ndarray:
        """Reaction at quadrature points for quadrature-shaped ``x``."""
        return self.reaction.f(self.mesh.quad_points, x)

    def F(self, x: np.ndarray) -> np.ndarray:
        return self.reaction.F(self.mesh.quad_points, x)


# ---------------------------------------------------------------------------
# hypothesis checks


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    witnesses: list = field(default_factory=list)


@dataclass
class Report:
    """Pass/fail list. Sampled checks are evidence, never a proof."""

    checks: list
    label: str = "evidence"
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail, "witnesses": c.witnesses}
                for c in self.checks
            ],
            **self.extra,
        }


def critical_exponent(p: float, N: int) -> float:
    return N * p / (N - p) if p < N else math.inf


def validate_exponents(p: float, q: float, r: float, tau: float, N: int) -> Report:
    ps = critical_exponent(p, N)
    lo = max(1.0, (r - p) * N / p)
    checks = [
        Check("1<q<p", 1 < q < p, f"p={p}, q={q}"),
        Check("p<r<p*", p < r < ps, f"r={r}, p*={ps}"),
        Check("tau window", lo < tau < ps, f"tau={tau} in ({lo}, {ps})"),
    ]
    return Report(checks, label="exact", extra={"critical_exponent": ps})


def default_sample_xs() -> np.ndarray:
    pos = np.logspace(-6, 6, 49)
    return np.concatenate([-pos[::-1], pos])


def _eval(fn, zs, xs):
    Z = np.broadcast_to(zs[:, None, :], (len(zs), len(xs), zs.shape[1]))
    X = np.broadcast_to(xs[None, :], (len(zs), len(xs)))
    return np.broadcast_to(np.asarray(fn(Z, X), dtype=float), X.shape), Z, X


def _witness_list(mask, Z, X, limit=5):
    idx = np.argwhere(mask)[:limit]
    return [{"z": Z[i, j].tolist(), "x": float(X[i, j])} for i, j in idx]


def check_hypotheses_f(
    reaction: Reaction,
    p: float,
    q: float,
    sample_xs=None,
    zs=None,
    small: float = 1e-2,
    large: float = 1e2,
) -> Report:
    """Sample the growth, superlinearity, small-x and monotonicity hypotheses on f.

    Limits are checked as trends on the geometric parts of the grid:
    |x| <= ``small`` for the behaviour at 0, |x| >= ``large`` at infinity.
    """
    xs = default_sample_xs() if sample_xs is None else np.asarray(sample_xs, dtype=float)
    xs = xs[xs != 0]
    zs = np.zeros((1, 1)) if zs is None else np.atleast_2d(np.asarray(zs, dtype=float))
    fx, Z, X = _eval(reaction.f, zs, xs)
    dfx, _, _ = _eval(reaction.df, zs, xs)
    Fx, _, _ = _eval(reaction.F, zs, xs)
    ax = np.abs(X)
    checks = []

    f0, _, _ = _eval(reaction.f, zs, np.zeros(1))
    checks.append(Check("f(z,0)=0", bool(np.all(f0 == 0)), ""))

    # F is the primitive of f, checked against adaptive quadrature at a few points
    bad = []
    for x in xs[np.abs(xs) <= 1e3][:: max(1, len(xs) // 24)]:
        for z in zs:
            val, _ = integrate.quad(lambda s: float(reaction.f(z[None, :], np.array([s]))[0]), 0.0, x, limit=200)
            Fv = float(reaction.F(z[None, :], np.array([x]))[0])
            if abs(Fv - val) > 1e-8 * (1 + abs(Fv)):
                bad.append({"z": z.tolist(), "x": float(x)})
    checks.append(Check("F antiderivative", not bad, "tolerance 1e-8*(1+|F|)", bad[:5]))

    # (i) growth of the derivative
    viol = np.abs(dfx) > reaction.a0 * (1 + ax ** (reaction.r - 2)) * (1 + 1e-12)
    viol |= ~np.isfinite(dfx)
    checks.append(Check("i", not viol.any(), f"|f'| <= a0(1+|x|^(r-2)), a0={reaction.a0}, r={reaction.r}",
                        _witness_list(viol, Z, X)))

    # (ii) F/|x|^p increasing at infinity and (f x - p F)/|x|^tau >= beta0/2
    big = ax >= large
    ratio = (fx * X - p * Fx) / ax**reaction.tau
    viol = big & ~(ratio >= reaction.beta0 / 2)
    if reaction.beta0 <= 0:
        viol = big.copy()
    growth_ok = True
    for side in (X > 0, X < 0):
        sel = big & side
        for i in range(len(zs)):
            row = sel[i]
            order = np.argsort(ax[i, row])
            g = (Fx[i, row] / ax[i, row] ** p)[order]
            if len(g) > 1 and (np.any(np.diff(g) < -1e-12 * np.abs(g[1:])) or not g[-1] > g[0]):
                growth_ok = False
    checks.append(Check("ii", (not viol.any()) and growth_ok,
                        f"tau={reaction.tau}, beta0={reaction.beta0}; F/|x|^p increasing on |x|>={large}",
                        _witness_list(viol, Z, X)))

    # (iii) f/(|x|^(q-2)x) -> 0: magnitudes shrink monotonically as |x| -> 0
    tiny = ax <= small
    with np.errstate(divide="ignore", invalid="ignore"):
        rq = np.abs(fx / (ax ** (q - 2) * X))
    ok3 = True
    wit3 = []
    for side in (X > 0, X < 0):
        sel = tiny & side
        for i in range(len(zs)):
            row = sel[i]
            order = np.argsort(ax[i, row])[::-1]  # decreasing |x|
            seq = rq[i, row][order]
            if len(seq) < 2:
                continue
            if np.any(np.diff(seq) > 1e-12 * seq[:-1]) or not seq[-1] < 0.5 * seq[0] or not np.all(np.isfinite(seq)):
                ok3 = False
                wit3.append({"z": zs[i].tolist(), "x": float(X[i, row][order][-1])})
    checks.append(Check("iii", ok3, f"|f/(|x|^(q-2)x)| decreasing to 0 on |x|<={small}", wit3))

    # (iv) 0 < (p-1) f x <= f' x^2
    lhs = (p - 1) * fx * X
    rhs = dfx * X**2
    pos_viol = ~(lhs > 0)
    mono_viol = lhs > rhs + 1e-12 * np.abs(rhs)
    viol = pos_viol | mono_viol
    detail = "0 < (p-1) f x <= f' x^2"
    if pos_viol.any():
        detail += f"; positivity fails at {int(pos_viol.sum())} samples"
    if mono_viol.any():
        detail += f"; monotonicity fails at {int(mono_viol.sum())} samples"
    checks.append(Check("iv", not viol.any(), detail, _witness_list(viol, Z, X)))
    return Report(checks)


def check_ar_condition(reaction: Reaction, theta: float, p: float, samples=None, zs=None) -> Report:
    """Ambrosetti-Rabinowitz test 0 < theta F <= f x on large |x| samples."""
    if not theta > p:
        raise ValueError(f"theta must exceed p={p}")
    if samples is None:
        pos = np.logspace(1, 8, 141)
        samples = np.concatenate([-pos[::-1], pos])
    xs = np.asarray(samples, dtype=float)
    zs = np.zeros((1, 1)) if zs is None else np.atleast_2d(np.asarray(zs, dtype=float))
    fx, Z, X = _eval(reaction.f, zs, xs)
    Fx, _, _ = _eval(reaction.F, zs, xs)
    lhs = theta * Fx
    rhs = fx * X
    viol = ~(lhs > 0) | (lhs > rhs + 1e-12 * np.abs(rhs))
    wit = _witness_list(viol, Z, X, limit=3)
    for w in wit:
        x = np.array([w["x"]])
        zz = np.array([w["z"]])
        w["theta_F"] = float(theta * reaction.F(zz, x)[0])
        w["f_x"] = float(reaction.f(zz, x)[0] * x[0])
    chk = Check("AR", not viol.any(), f"0 < theta F <= f x, theta={theta}", wit)
    return Report([chk])


# ---------------------------------------------------------------------------
# configuration


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{where}.{key}" if where else key, "missing")
    return d[key]


def _num(v, name: str) -> float:
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected a number, got {v!r}") from None
    if not math.isfinite(x):
        raise ConfigError(name, "must be finite")
    return x


def mesh_from_config(dom: dict) -> Mesh:
    kind = _need(dom, "kind", "domain")
    try:
        if kind == "interval":
            n = dom.get("n", dom.get("n_cells"))
            if n is None:
                raise ConfigError("domain.n", "missing")
            return build_interval_mesh(_num(dom.get("length", 1.0), "domain.length"), int(n))
        if kind == "rectangle":
            return build_rectangle_mesh(
                _num(dom.get("lx", 1.0), "domain.lx"),
                _num(dom.get("ly", 1.0), "domain.ly"),
                int(_need(dom, "nx", "domain")),
                int(_need(dom, "ny", "domain")),
            )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("domain", str(exc)) from None
    raise ConfigError("domain.kind", f"unknown kind {kind!r} (interval | rectangle)")


def weight_from_config(w: dict) -> Weight:
    kind = _need(w, "kind", "weight")
    prm = w.get("params", {})
    if kind == "constant":
        return constant_weight(_num(prm.get("value", 1.0), "weight.params.value"))
    if kind == "power":
        return power_weight(prm.get("z0", 0.5), _num(prm.get("alpha", 1.0), "weight.params.alpha"),
                            _num(prm.get("scale", 1.0), "weight.params.scale"))
    if kind == "indicator":
        return indicator_weight(_num(prm.get("split", 0.5), "weight.params.split"),
                                _num(prm.get("low", 1.0), "weight.params.low"),
                                _num(prm.get("high", 2.0), "weight.params.high"),
                                int(prm.get("axis", 0)))
    raise ConfigError("weight.kind", f"unknown kind {kind!r} (constant | power | indicator)")


def reaction_from_config(rc: dict, p: float) -> Reaction:
    kind = _need(rc, "kind", "reaction")
    prm = rc.get("params", {})
    try:
        if kind == "power":
            return power_reaction(_num(_need(prm, "r", "reaction.params"), "reaction.params.r"), p)
        if kind == "log":
            r = prm.get("r")
            return log_reaction(_num(_need(prm, "s", "reaction.params"), "reaction.params.s"), p,
                                None if r is None else _num(r, "reaction.params.r"))
        if kind == "linear":
            return linear_reaction()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("reaction.params", str(exc)) from None
    raise ConfigError("reaction.kind", f"unknown kind {kind!r} (power | log | linear)")


def problem_from_config(cfg: dict) -> DoublePhaseProblem:
    """Build a problem from the JSON layout
    ``{p, q, domain: {...}, weight: {kind, params}, reaction: {kind, params}, epsilon}``.
    """
    p = _num(_need(cfg, "p", ""), "p")
    q = _num(_need(cfg, "q", ""), "q")
    if not (1 < q < p):
        raise ConfigError("q", f"exponents must satisfy 1 < q < p (got p={p}, q={q})")
    mesh = mesh_from_config(_need(cfg, "domain", ""))
    weight = weight_from_config(cfg.get("weight", {"kind": "constant", "params": {"value": 1.0}}))
    reaction = reaction_from_config(_need(cfg, "reaction", ""), p)
    eps = _num(cfg.get("epsilon", 1e-10), "epsilon")
    if eps < 0:
        raise ConfigError("epsilon", "must be >= 0")
    chk = weight.check(mesh)
    if not chk["positive"] or not chk["bounded"]:
        raise ConfigError("weight", f"a(z) must be positive and bounded at element centroids (min={chk['min']})")
    return DoublePhaseProblem(p, q, mesh, weight, reaction, eps, config=cfg)
