"""Independent reference computations (ODE shooting, adaptive quadrature).

Nothing here imports the finite element code.
"""
import numpy as np
from scipy import integrate, optimize


def hat(x, h=1.0):
    return h * (1 - np.abs(2 * np.asarray(x) - 1))


def quad(f, a=0.0, b=1.0, points=(0.5,)):
    return integrate.quad(f, a, b, points=points, limit=200, epsabs=1e-14, epsrel=1e-13)[0]


def p_laplace_eigenvalue_shooting(p, length=1.0):
    """First Dirichlet eigenvalue of -(|u'|^(p-2)u')' = lam |u|^(p-2)u on (0, length).

    Integrate with lam = 1 from u(0)=0, |u'|^(p-2)u'(0)=1 to the first zero X;
    homogeneity then gives lam_1 = (X / length)^p.
    """
    def rhs(x, y):
        u, w = y
        return [np.sign(w) * np.abs(w) ** (1 / (p - 1)), -np.sign(u) * np.abs(u) ** (p - 1)]

    def hit(x, y):
        return y[0]

    hit.terminal, hit.direction = True, -1
    sol = integrate.solve_ivp(rhs, [0, 100], [0.0, 1.0], events=hit, rtol=1e-12, atol=1e-14)
    X = sol.t_events[0][0]
    return (X / length) ** p


def closed_form_p_eigenvalue(p):
    pi_p = 2 * np.pi / (p * np.sin(np.pi / p))
    return (p - 1) * pi_p**p


def cubic_ground_state(n_points=100_001):
    """Positive solution of -u'' = u^3 on (0,1), u(0)=u(1)=0, by shooting.

    Returns (x, u, du) sampled on ``n_points`` points.
    """
    def rhs(s, y):
        return [y[1], -y[0] ** 3]

    def hit(s, y):
        return y[0]

    hit.terminal, hit.direction = True, -1
    sol = integrate.solve_ivp(rhs, [0, 100], [0.0, 1.0], events=hit, rtol=1e-12, atol=1e-14, dense_output=True)
    X = sol.t_events[0][0]
    x = np.linspace(0, 1, n_points)
    w = sol.sol(X * x)
    # u(x) = X w(X x) has its first zero at x = 1
    return x, X * w[0], X**2 * w[1]


def cubic_energy_bracket(weight, q=1.5, n_points=100_001):
    """(m0, upper): m0 is the Nehari level of the unweighted problem (p=2, r=4);
    upper = max_t phi_a(t u0) bounds the weighted level from above."""
    x, u, du = cubic_ground_state(n_points)
    A = integrate.simpson(du**2, x=x)
    B = integrate.simpson(weight(x) * np.abs(du) ** q, x=x)
    C = integrate.simpson(u**4, x=x)
    m0 = 0.25 * A  # u0 is on the unweighted Nehari set, so A = C
    res = optimize.minimize_scalar(lambda t: -(t**2 / 2 * A + t**q / q * B - t**4 / 4 * C), bounds=(0.5, 2), method="bounded",
                                   options={"xatol": 1e-12})
    return m0, -res.fun
