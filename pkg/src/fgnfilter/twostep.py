"""The two-step example system and its published stationarity equations.

The system is x(k+1) = W1(k), y(k+1) = x(k) - W2(k) for k = 0, 1 with
x(0) = 0 and both noises sharing lag-one autocovariance ``rho``. Eliminating
Gamma(1) from the two printed stationarity conditions leaves a quintic in
Gamma(0),

    a1 g (rho g + 1)^2 + a2 (rho + g) (1 + g)^4 = 0,
    Gamma(1) = -(1 + g)^2 / (rho g + 1).

The printed intermediate quantities (Q values, K derivative) are kept verbatim
in :func:`printed_q_values` and :func:`printed_conditions`; they follow the
sign convention H(0) = +Gamma(0) and do not all agree with the general
formulas evaluated on this system (see :mod:`fgnfilter.variation`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SystemSpec
from .noise import NoiseModel

BRACKET = (-10.0, 10.0)
GRID_STEPS_PER_UNIT = 1000  # grid spacing 1e-3
BISECT_WIDTH = 1e-12
RESIDUAL_RTOL = 1e-9


def example_system(rho: float) -> SystemSpec:
    noise = NoiseModel.from_lag1(rho)
    return SystemSpec(
        horizon=2,
        A=[0.0, 0.0],
        C=[0.0, 0.0],
        sigma=[1.0, 1.0],
        D=[1.0, 1.0],
        F=[0.0, 0.0],
        gamma=[-1.0, -1.0],
        x0_mean=0.0,
        x0_var=0.0,
        noise1=noise,
        noise2=noise,
    )


def quintic(x, rho, a1, a2):
    return a1 * x * (rho * x + 1.0) ** 2 + a2 * (rho + x) * (1.0 + x) ** 4


def quintic_derivative(x, rho, a1, a2):
    return a1 * (rho * x + 1.0) * (3.0 * rho * x + 1.0) + a2 * (1.0 + x) ** 3 * (5.0 * x + 1.0 + 4.0 * rho)


def quintic_scale(x, rho, a1, a2):
    """Magnitude of the largest term at ``x``; residuals are measured against it."""
    ax = np.abs(x)
    return np.maximum(1.0, a1 * ax * (rho * ax + 1.0) ** 2 + a2 * (rho + ax) * (1.0 + ax) ** 4)


def gamma1_from_gamma0(g0, rho):
    return -((1.0 + g0) ** 2) / (rho * g0 + 1.0)


def quintic_coefficients(rho, a1, a2) -> np.ndarray:
    """Power-basis coefficients, lowest degree first."""
    P = np.polynomial.Polynomial
    g = P([0.0, 1.0])
    poly = a1 * g * (rho * g + 1.0) ** 2 + a2 * (rho + g) * (1.0 + g) ** 4
    return np.pad(poly.coef, (0, 6 - poly.coef.shape[0]))


def _bisect(fun, lo, hi):
    flo = fun(lo)
    while hi - lo > BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = fun(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo if abs(fun(lo)) <= abs(fun(hi)) else hi


def real_roots(rho: float, a1: float, a2: float) -> list[float]:
    """All real roots of the quintic in the bracket, ascending.

    Odd-multiplicity roots come from sign changes on a 1e-3 grid. Even
    multiplicity roots (the double/quadruple kind that never change sign) are
    caught as sign changes of the derivative whose value passes the residual test.
    """
    lo, hi = BRACKET
    xs = np.arange(round(lo * GRID_STEPS_PER_UNIT), round(hi * GRID_STEPS_PER_UNIT) + 1) / GRID_STEPS_PER_UNIT
    p = quintic(xs, rho, a1, a2)
    dp = quintic_derivative(xs, rho, a1, a2)
    f = lambda x: quintic(x, rho, a1, a2)
    df = lambda x: quintic_derivative(x, rho, a1, a2)

    found = [float(x) for x in xs[p == 0.0]]
    for i in np.flatnonzero(p[:-1] * p[1:] < 0):
        found.append(_bisect(f, xs[i], xs[i + 1]))
    for i in np.flatnonzero(dp[:-1] * dp[1:] < 0):
        x = _bisect(df, xs[i], xs[i + 1])
        if abs(f(x)) <= RESIDUAL_RTOL * quintic_scale(x, rho, a1, a2):
            found.append(x)

    roots: list[float] = []
    for x in sorted(found):
        if roots and abs(x - roots[-1]) <= 1e-8:
            if abs(f(x)) < abs(f(roots[-1])):
                roots[-1] = x
            continue
        roots.append(x)
    return roots


@dataclass(frozen=True)
class TwoStepRoot:
    index: int
    gamma0: float
    gamma1: float
    poly_residual: float


def solve_two_step_example(rho: float, a1: float, a2: float) -> list[TwoStepRoot]:
    """Candidate stationary gains of the two-step example.

    When ``a2 == 0`` the second gain never enters the cost; ``gamma1`` is then
    reported as NaN.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho!r}")
    if a1 < 0 or a2 < 0 or (a1 == 0 and a2 == 0):
        raise ValueError("weights must be nonnegative and not both zero")
    out = []
    for x in real_roots(rho, a1, a2):
        if abs(rho * x + 1.0) <= 1e-12:
            continue
        g1 = gamma1_from_gamma0(x, rho) if a2 > 0 else math.nan
        out.append(TwoStepRoot(len(out), x, g1, float(quintic(x, rho, a1, a2))))
    if not out:
        raise ArithmeticError(f"no real root in {BRACKET} for rho={rho}, a1={a1}, a2={a2}")
    return out


def printed_q_values(rho, g0, g1) -> dict[str, float]:
    """The Q entries exactly as listed for this example, keyed ``"Q2(1,0)"`` etc."""
    return {
        "Q1": 0.0,
        "Q3(0,0)": 0.0,
        "Q3(1,0)": 0.0,
        "Q2(0,0)": g0,
        "Q2(1,0)": (rho + g0) * g1**2,
        "Q2(1,1)": (rho * g0 + 1.0) * g1,
        "Q3(1,1)": 1.0 + g0**2,
    }


def printed_gateaux_K(rho, g0, g1) -> np.ndarray:
    """Printed derivative coefficients; row k-1, column i multiplies beta(i)."""
    return np.array(
        [
            [g0, 0.0],
            [(rho + g0) * g1**2, (rho * g0 + 1.0) * g1 + (1.0 + g0) ** 2],
        ]
    )


def printed_conditions(rho, a1, a2, g0, g1) -> tuple[float, float]:
    """Residuals of the two printed stationarity equations (for beta(1), beta(0))."""
    first = a2 * ((rho * g0 + 1.0) * g1 + (1.0 + g0) ** 2) if a2 else 0.0
    second = a1 * g0 + (a2 * (rho + g0) * g1**2 if a2 else 0.0)
    return first, second
