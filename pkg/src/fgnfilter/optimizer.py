"""Gain optimization: gradient descent with Armijo backtracking, multi-start,
the white-noise baseline, and stationarity certificates."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .covariance import cost, error_covariance_closed, error_covariance_oracle, transition_product, transition_products
from .model import FilterGain, SystemSpec, WeightSpec, derive_filter_coefficients
from .variation import QTable, q_terms

logger = logging.getLogger(__name__)

# absolute slack in the sufficient-decrease test, scaled by max(1, |J|)
DESCENT_SLACK = 1e-14
MAX_BACKTRACKS = 60


class NotConvergedError(RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class OptimizerOptions:
    tolerance: float = 1e-10
    max_iterations: int = 10_000
    starts: int = 8
    init_box: float = 2.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    initial_step: float = 1.0
    seed: int = 0

    def __post_init__(self):
        errors = []
        if not self.tolerance > 0:
            errors.append("tolerance must be positive")
        if self.max_iterations < 1:
            errors.append("max_iterations must be at least 1")
        if self.starts < 1:
            errors.append("starts must be at least 1")
        if not self.init_box > 0:
            errors.append("init_box must be positive")
        if not 0 < self.shrink < 1:
            errors.append("shrink must lie in (0, 1)")
        if not 0 < self.sufficient_decrease <= 0.5:
            errors.append("sufficient_decrease must lie in (0, 0.5]")
        if not self.initial_step > 0:
            errors.append("initial_step must be positive")
        if errors:
            raise ValueError("; ".join(errors))

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class StartResult:
    start: np.ndarray
    gain: np.ndarray
    cost: float
    residual: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list, repr=False)


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    best_gain: FilterGain
    best_cost: float
    residual: float
    iterations: int
    all_starts: list


def _objective(system, weights):
    def f(x):
        return cost(error_covariance_closed(system, FilterGain(x)), weights)

    def grad(x):
        return weights.a[1:] @ q_terms(system, FilterGain(x), "validated").q

    return f, grad


def minimize(system: SystemSpec, weights: WeightSpec, opts: OptimizerOptions, start: FilterGain) -> StartResult:
    """Steepest descent from ``start`` until max|g| <= tolerance.

    Trial steps after the first use the Barzilai-Borwein length; every
    accepted step passes the Armijo test, so the cost trace never increases
    by more than the rounding slack.
    """
    f, grad = _objective(system, weights)
    x = np.array(start.gamma_gain, dtype=float)
    fx = f(x)
    g = grad(x)
    trace = [fx]
    step = opts.initial_step
    it = 0
    converged = float(np.max(np.abs(g))) <= opts.tolerance
    while not converged and it < opts.max_iterations:
        gg = float(g @ g)
        slack = DESCENT_SLACK * max(1.0, abs(fx))
        t = step
        for _ in range(MAX_BACKTRACKS):
            x_new = x - t * g
            f_new = f(x_new)
            if f_new <= fx - opts.sufficient_decrease * t * gg + slack:
                break
            t *= opts.shrink
        else:
            logger.debug("line search stalled at iteration %d, |g|=%.3e", it, np.sqrt(gg))
            break
        g_new = grad(x_new)
        s, yv = x_new - x, g_new - g
        sy = float(s @ yv)
        step = float(s @ s) / sy if sy > 0 else opts.initial_step
        step = min(max(step, 1e-12), 1e12)
        x, fx, g = x_new, f_new, g_new
        trace.append(fx)
        it += 1
        converged = float(np.max(np.abs(g))) <= opts.tolerance
    final = FilterGain(x)
    return StartResult(
        start=np.array(start.gamma_gain),
        gain=x,
        cost=cost(error_covariance_oracle(system, final), weights),
        residual=float(np.max(np.abs(g))),
        iterations=it,
        converged=converged,
        trace=trace,
    )


def start_points(horizon: int, opts: OptimizerOptions) -> list[np.ndarray]:
    """The zero gain followed by ``starts - 1`` uniform draws from the init box."""
    rng = np.random.default_rng(opts.seed)
    pts = [np.zeros(horizon)]
    for _ in range(opts.starts - 1):
        pts.append(rng.uniform(-opts.init_box, opts.init_box, horizon))
    return pts


def multi_start(system: SystemSpec, weights: WeightSpec, opts: OptimizerOptions | None = None) -> OptimizationResult:
    """Run :func:`minimize` from every start and keep the cheapest converged run."""
    opts = opts or OptimizerOptions()
    runs = [minimize(system, weights, opts, FilterGain(p)) for p in start_points(system.horizon, opts)]
    done = [r for r in runs if r.converged]
    if not done:
        partial = OptimizationResult(
            FilterGain(runs[0].gain), runs[0].cost, runs[0].residual, runs[0].iterations, runs
        )
        raise NotConvergedError(
            f"none of {len(runs)} starts reached tolerance {opts.tolerance:g}", partial
        )
    best = min(done, key=lambda r: r.cost)
    return OptimizationResult(FilterGain(best.gain), best.cost, best.residual, best.iterations, runs)


def greedy_white_noise_gain(system: SystemSpec) -> FilterGain:
    """Stepwise variance-minimizing gain; optimal when both noises are white."""
    n = system.horizon
    gain = np.zeros(n)
    K = system.x0_var
    for k in range(n):
        A, D, gam = system.A[k], system.D[k], system.gamma[k]
        denom = D * D * K + gam * gam
        gain[k] = A * D * K / denom if denom != 0 else 0.0
        h = A - gain[k] * D
        K = h * h * K + system.sigma[k] ** 2 + (gain[k] * gam) ** 2
    return FilterGain(gain)


@dataclass(frozen=True, eq=False)
class StationarityCertificate:
    """Residual of every line of the necessary-condition system at one gain."""

    h_residual: float
    product_residual: float
    q_sum_residual: dict
    tables: dict
    final_line: dict
    structural_zero: np.ndarray
    tolerance: float

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.final_line["validated"])))

    @property
    def certified(self) -> bool:
        return self.residual <= self.tolerance

    def rows(self):
        yield {"equation": "H", "index": "", "mode": "", "residual": self.h_residual}
        yield {"equation": "product", "index": "", "mode": "", "residual": self.product_residual}
        for mode, r in self.q_sum_residual.items():
            yield {"equation": "Q=Q1+Q2+Q3", "index": "", "mode": mode, "residual": r}
        for mode, vals in self.final_line.items():
            for i, v in enumerate(vals):
                yield {"equation": "weighted_sum", "index": i, "mode": mode, "residual": float(v)}


def stationarity_certificate(
    system: SystemSpec, gain: FilterGain, weights: WeightSpec, tolerance: float = 1e-10
) -> StationarityCertificate:
    coef = derive_filter_coefficients(system, gain)
    g = gain.gamma_gain
    h_res = float(np.max(np.abs(coef.h_gamma - (system.A - g * system.D))))
    P = transition_products(coef.h_gamma)
    n = system.horizon
    direct = np.array(
        [[transition_product(coef.h_gamma, i, k) if i <= k else 0.0 for k in range(n + 1)] for i in range(n + 1)]
    )
    prod_res = float(np.max(np.abs(P - direct)))
    tables: dict[str, QTable] = {m: q_terms(system, gain, m) for m in ("paper", "validated")}
    q_sum = {}
    final = {}
    for m, t in tables.items():
        q_sum[m] = float(np.max(np.abs(t.q - (t.q1 + t.q2 + t.q3))))
        final[m] = weights.a[1:] @ t.q
    # coordinates i with a(k) = 0 for every k > i never enter the cost
    tail = np.cumsum(weights.a[1:][::-1])[::-1]
    return StationarityCertificate(h_res, prod_res, q_sum, tables, final, tail == 0.0, tolerance)
