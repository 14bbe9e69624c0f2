"""Hot numeric kernels, each in two flavours.

``*_nb`` functions are explicit loops compiled with numba when it is available;
``*_np`` functions are vectorized numpy. The public names at the bottom dispatch
to one or the other according to :data:`fgnfilter._jit.BACKEND`. Both flavours
are always importable so tests and the benchmark can compare them directly.

Index conventions (all 0-based):

* ``P[i, k] = h[i] * h[i+1] * ... * h[k-1]`` for ``i <= k`` (empty product 1),
  zero below the diagonal. Shape ``(N+1, N+1)``.
* Q tables have shape ``(N, N)``; row ``k-1`` and column ``i`` hold
  ``Q(k-1, i)`` for ``i <= k-1`` and zero elsewhere.
"""
import numpy as np

from ._jit import BACKEND, njit

# pivots in [-FAIL, CLAMP) are set to zero, pivots below -FAIL abort
PIVOT_CLAMP = 1e-12
PIVOT_FAIL = 1e-10


# ---------------------------------------------------------------- factorization


@njit(cache=True)
def psd_cholesky_nb(C, clamp, fail):
    n = C.shape[0]
    L = np.zeros((n, n))
    pivots = np.empty(n)
    for j in range(n):
        d = C[j, j]
        for m in range(j):
            d -= L[j, m] * L[j, m]
        pivots[j] = d
        if d < -fail:
            return L, pivots, j
        if d < clamp:
            continue
        s = np.sqrt(d)
        L[j, j] = s
        for r in range(j + 1, n):
            acc = C[r, j]
            for m in range(j):
                acc -= L[r, m] * L[j, m]
            L[r, j] = acc / s
    return L, pivots, -1


def psd_cholesky_np(C, clamp, fail):
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    L = np.zeros((n, n))
    pivots = np.empty(n)
    for j in range(n):
        row = L[j, :j]
        d = C[j, j] - row @ row
        pivots[j] = d
        if d < -fail:
            return L, pivots, j
        if d < clamp:
            continue
        s = np.sqrt(d)
        L[j, j] = s
        L[j + 1 :, j] = (C[j + 1 :, j] - L[j + 1 :, :j] @ row) / s
    return L, pivots, -1


# ---------------------------------------------------------- transition products


@njit(cache=True)
def transition_table_nb(h):
    n = h.shape[0]
    P = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        P[i, i] = 1.0
        for k in range(i + 1, n + 1):
            P[i, k] = P[i, k - 1] * h[k - 1]
    return P


def transition_table_np(h):
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    P = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        P[i, i] = 1.0
        P[i, i + 1 :] = np.cumprod(h[i:])
    return P


# ------------------------------------------------------------ closed-form K(k)


@njit(cache=True)
def k_closed_nb(P, x0_var, sigma, gg, rho1, rho2):
    n = sigma.shape[0]
    K = np.empty(n + 1)
    K[0] = x0_var
    for k in range(1, n + 1):
        total = P[0, k] * P[0, k] * x0_var
        for i in range(k):
            pi = P[i + 1, k]
            total += pi * pi * (sigma[i] * sigma[i] + gg[i] * gg[i])
            cross = 0.0
            for j in range(i):
                cross += (
                    rho1[i - j] * sigma[i] * sigma[j] + rho2[i - j] * gg[i] * gg[j]
                ) * P[j + 1, k]
            total += 2.0 * cross * pi
        K[k] = total
    return K


def _lag_matrix(rho, n):
    idx = np.arange(n)
    return rho[np.abs(idx[:, None] - idx[None, :])]


def _forward_weights(P):
    # W[k, i] = P[i+1, k] for i < k, else 0
    n = P.shape[0] - 1
    W = P[1:, :].T.copy()
    W[np.triu_indices(n + 1, 0, n)] = 0.0
    return W


def k_closed_np(P, x0_var, sigma, gg, rho1, rho2):
    n = sigma.shape[0]
    S = _lag_matrix(rho1, n) * np.outer(sigma, sigma) + _lag_matrix(rho2, n) * np.outer(gg, gg)
    W = _forward_weights(P)
    K = x0_var * P[0, :] ** 2 + np.einsum("ki,ij,kj->k", W, S, W)
    K[0] = x0_var
    return K


# -------------------------------------------------------------------- Q tables


@njit(cache=True)
def q_terms_nb(P, x0_var, sigma, gamma_obs, gain, D, rho1, rho2):
    n = sigma.shape[0]
    Q1 = np.zeros((n, n))
    Q2 = np.zeros((n, n))
    Q3 = np.zeros((n, n))
    # S[l, j] = c(l, j); R[i, j] = rho2(|i-j|) Gamma(j) gamma(j)
    S = np.empty((n, n))
    R = np.empty((n, n))
    for l in range(n):
        for j in range(n):
            lag = l - j if l >= j else j - l
            gj = gain[j] * gamma_obs[j]
            S[l, j] = rho1[lag] * sigma[l] * sigma[j] + rho2[lag] * gain[l] * gamma_obs[l] * gj
            R[l, j] = rho2[lag] * gj
    u = np.empty(n)
    for k in range(1, n + 1):
        # u[l] = sum_j c(l, j) P[j+1, k]
        for l in range(k):
            acc = 0.0
            for j in range(k):
                acc += S[l, j] * P[j + 1, k]
            u[l] = acc
        for i in range(k):
            Q1[k - 1, i] = -2.0 * P[0, k] * x0_var * P[0, i] * P[i + 1, k]
            acc = 0.0
            for j in range(k):
                acc += R[i, j] * P[j + 1, k]
            Q2[k - 1, i] = gamma_obs[i] * P[i + 1, k] * acc
            acc = 0.0
            for l in range(i):
                acc += P[l + 1, i] * u[l]
            Q3[k - 1, i] = -D[i] * P[i + 1, k] * acc
    return Q1, Q2, Q3


def q_terms_np(P, x0_var, sigma, gamma_obs, gain, D, rho1, rho2):
    n = sigma.shape[0]
    gg = gain * gamma_obs
    R2 = _lag_matrix(rho2, n)
    S = _lag_matrix(rho1, n) * np.outer(sigma, sigma) + R2 * np.outer(gg, gg)
    W = _forward_weights(P)[1:]  # row k-1 holds P[i+1, k]
    # Ptil[l, i] = P[l+1, i] for l < i
    Ptil = np.zeros((n, n))
    Ptil[:, :] = P[1:, :n]
    Ptil[np.tril_indices(n)] = 0.0
    lower = np.tril(np.ones((n, n)))
    Q1 = -2.0 * x0_var * (P[0, 1:, None] * P[0, None, :n]) * W
    Q2 = gamma_obs[None, :] * W * ((gg[None, :] * W) @ R2.T) * lower
    U = W @ S.T  # U[k-1, l] = sum_j S[l, j] P[j+1, k], exact on l < k
    Q3 = -D[None, :] * W * (U @ Ptil) * lower
    return Q1, Q2, Q3


# --------------------------------------------------------------- path ensemble


@njit(cache=True)
def simulate_paths_nb(A, C, sigma, D, F, gamma_obs, gain, x0, w1, w2, z0):
    n = A.shape[0]
    p = x0.shape[0]
    x = np.empty((n + 1, p))
    y = np.empty((n + 1, p))
    z = np.empty((n + 1, p))
    for m in range(p):
        x[0, m] = x0[m]
        y[0, m] = 0.0
        z[0, m] = z0
    # time outer, paths inner: rows of the (n, p) arrays are contiguous
    for k in range(n):
        hk = A[k] - gain[k] * D[k]
        mk = C[k] - gain[k] * F[k]
        for m in range(p):
            x[k + 1, m] = A[k] * x[k, m] + C[k] * y[k, m] + sigma[k] * w1[k, m]
            y[k + 1, m] = D[k] * x[k, m] + F[k] * y[k, m] + gamma_obs[k] * w2[k, m]
            z[k + 1, m] = hk * z[k, m] + mk * y[k, m] + gain[k] * y[k + 1, m]
    return x, y, z


def simulate_paths_np(A, C, sigma, D, F, gamma_obs, gain, x0, w1, w2, z0):
    n = A.shape[0]
    p = x0.shape[0]
    x = np.empty((n + 1, p))
    y = np.empty((n + 1, p))
    z = np.empty((n + 1, p))
    x[0] = x0
    y[0] = 0.0
    z[0] = z0
    for k in range(n):
        x[k + 1] = A[k] * x[k] + C[k] * y[k] + sigma[k] * w1[k]
        y[k + 1] = D[k] * x[k] + F[k] * y[k] + gamma_obs[k] * w2[k]
        z[k + 1] = (A[k] - gain[k] * D[k]) * z[k] + (C[k] - gain[k] * F[k]) * y[k] + gain[k] * y[k + 1]
    return x, y, z


if BACKEND == "numba":
    psd_cholesky = psd_cholesky_nb
    transition_table = transition_table_nb
    k_closed = k_closed_nb
    q_terms = q_terms_nb
    simulate_paths = simulate_paths_nb
else:
    psd_cholesky = psd_cholesky_np
    transition_table = transition_table_np
    k_closed = k_closed_np
    q_terms = q_terms_np
    simulate_paths = simulate_paths_np
