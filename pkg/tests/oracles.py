"""Independent reference computations shared by the tests.

Nothing here imports the package's formulas: the flux identification is
re-derived symbolically, the quadratic-form optimum comes from eigenvalues,
and the continuous right-hand sides are differentiated by sympy.
"""

from functools import lru_cache

import numpy as np
import sympy as sp

U, U1, U2, U3, U4 = sp.symbols("u u1 u2 u3 u4", positive=True)
_JET = (U, U1, U2, U3, U4)


def _dx(expr):
    """Total x-derivative on the jet (u, u_x, u_xx, ...)."""
    return sum(sp.diff(expr, _JET[k]) * _JET[k + 1] for k in range(4))


def flux_coefficients(alpha, beta, l1, l2, l3, l4):
    """Coefficients of ``u^beta u3``, ``u^(beta-1) u2 u1`` and ``u^(beta-2) u1^3`` in ``A_x - v B_x``.

    ``alpha = 0`` means ``v = -1/u``.
    """
    sym = flux_coefficients_symbolic(sp.nsimplify(alpha), sp.nsimplify(beta))
    sub = dict(zip(sp.symbols("l1 l2 l3 l4"), (l1, l2, l3, l4)))
    return tuple(float(c.subs(sub)) for c in sym)


@lru_cache(maxsize=None)
def solve_lambdas(alpha, beta, a, b, l4):
    """Solve the identification for ``(lambda1, lambda2, lambda3)`` by sympy."""
    L1, L2, L3 = sp.symbols("L1 L2 L3")
    c = flux_coefficients_symbolic(sp.nsimplify(alpha), sp.nsimplify(beta))
    eqs = [e.subs({"l1": L1, "l2": L2, "l3": L3, "l4": sp.nsimplify(l4)}) for e in c]
    target = (1, sp.nsimplify(a), sp.nsimplify(b))
    sol = sp.solve([e - t for e, t in zip(eqs, target)], [L1, L2, L3], dict=True)[0]
    return tuple(float(sol[s]) for s in (L1, L2, L3))


@lru_cache(maxsize=None)
def flux_coefficients_symbolic(alpha, beta):
    l1, l2, l3, l4 = sp.symbols("l1 l2 l3 l4")
    v = -1 / U if alpha == 0 else U ** (alpha - 1) / (alpha - 1)
    vx = _dx(v)
    vxx = _dx(vx)
    xi2, xi1sq = vxx / v, (vx / v) ** 2
    w = U ** (alpha + beta) / (alpha - 1) ** 2
    A = w / v * (l1 * xi2 + l2 * xi1sq)
    B = w / v**2 * (l3 * xi2 + l4 * xi1sq)
    J = sp.expand(sp.powsimp(sp.expand((_dx(A) - v * _dx(B)) / U**beta), force=True)).subs(U, 1)
    poly = sp.Poly(J, U1, U2, U3)
    return (
        sp.expand(poly.coeff_monomial(U3)),
        sp.expand(poly.coeff_monomial(U1 * U2)),
        sp.expand(poly.coeff_monomial(U1**3)),
    )


def min_ratio_on_circle(c22, c21, c11, n=200_001):
    """Grid oracle: min over the unit circle of ``c22 t^2 + c21 t s + c11 s^2``."""
    th = np.linspace(0.0, np.pi, n)
    t, s = np.cos(th), np.sin(th)
    return float(np.min(c22 * t * t + c21 * t * s + c11 * s * s))


def min_eigenvalue(c22, c21, c11):
    return float(np.linalg.eigvalsh(np.array([[c22, c21 / 2], [c21 / 2, c11]]))[0])


X = sp.symbols("x", real=True)


@lru_cache(maxsize=None)
def continuous_rhs(profile: str, a, b, beta):
    """``-J_x`` for a sympy profile string in ``x``; returns a numpy callable."""
    u = sp.sympify(profile, locals={"x": X})
    ux = sp.diff(u, X)
    J = u**beta * sp.diff(u, X, 3) + a * u ** (beta - 1) * sp.diff(u, X, 2) * ux + b * u ** (beta - 2) * ux**3
    return sp.lambdify(X, -sp.diff(J, X), "numpy"), sp.lambdify(X, u, "numpy")
