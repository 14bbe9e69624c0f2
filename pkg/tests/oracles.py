"""Reference values derived independently of the package.

The two-step example (x(k+1) = W1(k), y(k+1) = x(k) - W2(k), x(0) = 0, filter
H = -Gamma, M = 0) was expanded symbolically from the state and filter
equations, squaring e(k) = x(k) - z(k) and replacing E[W(i) W(j)] by the
autocovariance. Result:

    e(1) = W1(0) + g0 W2(0)
    e(2) = -g1 W1(0) + W1(1) - g0 g1 W2(0) + g1 W2(1)
    K(1) = 1 + g0^2
    K(2) = 1 + g1^2 (2 + g0^2) - 2 rho g1 - 2 rho g0 g1^2
"""
import numpy as np


def example_k1(g0, g1, rho):
    return 1.0 + g0**2


def example_k2(g0, g1, rho):
    return 1.0 + g1**2 * (2.0 + g0**2) - 2.0 * rho * g1 - 2.0 * rho * g0 * g1**2


def example_row2(g0, g1):
    """Coefficients of e(2) on (W1(0), W1(1), W2(0), W2(1))."""
    return np.array([-g1, 1.0, -g0 * g1, g1])


def grid_minimum_k2(rho, step=1e-3, box=2.0):
    """Brute-force minimum of K(2) over the square [-box, box]^2."""
    g = np.arange(-round(box / step), round(box / step) + 1) * step
    best = (np.inf, None, None)
    for chunk in np.array_split(np.arange(g.size), 16):
        G0 = g[chunk][:, None]
        vals = example_k2(G0, g[None, :], rho)
        idx = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[idx] < best[0]:
            best = (float(vals[idx]), float(g[chunk][idx[0]]), float(g[idx[1]]))
    return best


def brute_force_fgn_autocov(hurst, lag):
    """E[(B(1)-B(0)) (B(lag+1)-B(lag))] expanded through the fBm covariance."""
    def R(t, s):
        return 0.5 * (abs(t) ** (2 * hurst) + abs(s) ** (2 * hurst) - abs(t - s) ** (2 * hurst))

    return R(1, lag + 1) - R(1, lag) - R(0, lag + 1) + R(0, lag)
