"""Term-structure outputs: Ramsey rates, marginal-utility and risk-neutral
zero-coupon prices, HJM forward-rate decomposition, long-rate asymptotics,
and marginal-utility (Davis) pricing of payoffs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .backward import BackwardSpec, GammaModel, VasicekGamma
from .brownian import PURPOSE_INNER, BrownianBatch, substream_seed
from .forward import OptimalTriple
from .grids import DeterministicFn, TimeGrid
from .market import MarketModel, state_price_paths, wealth_paths
from .quadrature import gauss_legendre
from .rates import ConstantRate, VasicekRate
from .stats import mean_stderr


# ---------------------------------------------------------------------------
# yield curves


@dataclass(frozen=True)
class YieldCurve:
    """Continuously compounded annualized rates per tenor, with the prices
    they were built from."""

    asof: float
    tenors: np.ndarray
    rates: np.ndarray
    prices: np.ndarray
    method: str
    stderrs: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        tenors = np.asarray(self.tenors, dtype=float)
        if np.any(np.diff(tenors) <= 0):
            raise ValueError("tenors must be strictly increasing")
        if np.any(tenors <= self.asof):
            raise ValueError("tenors must exceed the curve date")
        if not np.all(np.isfinite(self.rates)):
            raise ValueError("rates must be finite")

    def roundtrip_error(self) -> float:
        """max |exp(-R (T - t)) / B - 1| over the curve points."""
        back = np.exp(-self.rates * (self.tenors - self.asof))
        return float(np.max(np.abs(back / self.prices - 1.0)))


def curve_from_prices(
    prices: np.ndarray,
    tenors: np.ndarray,
    asof: float = 0.0,
    method: str = "",
    stderrs: Optional[np.ndarray] = None,
) -> YieldCurve:
    """Rates R = -ln(B) / (T - t) per tenor; nonpositive prices are rejected."""
    prices = np.asarray(prices, dtype=float)
    tenors = np.asarray(tenors, dtype=float)
    if np.any(prices <= 0):
        raise ValueError("zero-coupon prices must be positive")
    rates = -np.log(prices) / (tenors - asof)
    rate_se = None
    if stderrs is not None:
        rate_se = np.asarray(stderrs, dtype=float) / (prices * (tenors - asof))
    return YieldCurve(asof=float(asof), tenors=tenors, rates=rates, prices=prices, method=method, stderrs=rate_se)


# ---------------------------------------------------------------------------
# Ramsey rule


def ramsey_flat_closed(beta: float, alpha: float, growth: float, sigma: float) -> float:
    """Equilibrium rate of the geometric-consumption economy:
    beta + alpha g - alpha (alpha + 1) sigma^2 / 2, the same at every tenor."""
    return beta + alpha * growth - 0.5 * alpha * (alpha + 1.0) * sigma * sigma


def gbm_consumption_paths(
    c0: float,
    growth: float,
    sigma: float,
    grid: TimeGrid,
    batch: BrownianBatch,
    direction: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Geometric consumption c_t = c0 exp((g - sigma^2/2) t + sigma e.W_t)."""
    if c0 <= 0:
        raise ValueError("c0 must be positive")
    if direction is None:
        direction = np.eye(batch.dim)[0]
    w = np.zeros((batch.n_paths, grid.n_steps + 1))
    np.cumsum(batch.projected_increments(direction), axis=1, out=w[:, 1:])
    t = grid.times
    return c0 * np.exp((growth - 0.5 * sigma * sigma) * t + sigma * w)


def ramsey_rate_mc(
    beta: float,
    alpha: float,
    c_paths: np.ndarray,
    grid: TimeGrid,
    tenor: float,
    c0: Optional[float] = None,
) -> tuple[float, float]:
    """Equilibrium rate -(1/T) ln E[v_c(T, c_T)] / v_c(0, c_0) with its
    Monte Carlo standard error (delta method)."""
    k = grid.index_of(tenor)
    if k == 0:
        raise ValueError("tenor must be positive")
    if c0 is None:
        c0 = float(c_paths[0, 0])
    ratio = np.exp(-beta * tenor) * np.power(c_paths[:, k] / c0, -alpha)
    m, se = mean_stderr(ratio)
    if m <= 0:
        raise ValueError("mean marginal utility must be positive")
    return float(-np.log(m) / tenor), float(se / (tenor * m))


@dataclass(frozen=True)
class RamseyCurveReport:
    curve: YieldCurve
    max_spread: float
    max_spread_t: float  # spread over its (covariance-aware) standard error


def ramsey_curve_mc(
    beta: float,
    alpha: float,
    c_paths: np.ndarray,
    grid: TimeGrid,
    tenors: Sequence[float],
    c0: Optional[float] = None,
) -> RamseyCurveReport:
    """Ramsey curve over several tenors on one batch, with the joint
    covariance of the rate estimators used to judge cross-tenor spreads."""
    tenors = np.asarray(list(tenors), dtype=float)
    if c0 is None:
        c0 = float(c_paths[0, 0])
    ks = [grid.index_of(t) for t in tenors]
    vals = np.stack(
        [np.exp(-beta * t) * np.power(c_paths[:, k] / c0, -alpha) for t, k in zip(tenors, ks)], axis=1
    )
    n = vals.shape[0]
    mu = vals.mean(axis=0)
    rates = -np.log(mu) / tenors
    cov = np.atleast_2d(np.cov(vals, rowvar=False)) / n
    rate_se = np.sqrt(np.diag(cov)) / (tenors * mu)

    max_spread, max_t = 0.0, 0.0
    for i in range(len(tenors)):
        for j in range(i + 1, len(tenors)):
            spread = abs(rates[i] - rates[j])
            var = (
                cov[i, i] / (tenors[i] * mu[i]) ** 2
                + cov[j, j] / (tenors[j] * mu[j]) ** 2
                - 2.0 * cov[i, j] / (tenors[i] * mu[i] * tenors[j] * mu[j])
            )
            t_stat = spread / math.sqrt(max(var, 1e-300))
            if spread > max_spread:
                max_spread = spread
            if t_stat > max_t:
                max_t = t_stat
    prices = np.exp(-rates * tenors)
    curve = YieldCurve(
        asof=0.0, tenors=tenors, rates=rates, prices=prices, method="ramsey_mc", stderrs=rate_se
    )
    return RamseyCurveReport(curve=curve, max_spread=float(max_spread), max_spread_t=float(max_t))


# ---------------------------------------------------------------------------
# Gaussian closed-form zero-coupon prices


def _tilt_integral(gamma_vec: Callable[[np.ndarray], np.ndarray], q: Callable[[np.ndarray], np.ndarray], t: float, t_mat: float) -> float:
    """int_t^T Gamma_s(T) . q(s) ds for deterministic vector functions."""
    return float(gauss_legendre(lambda s: np.sum(gamma_vec(s) * np.atleast_2d(q(s)), axis=1), t, t_mat))


def market_gamma(market: MarketModel) -> Optional[VasicekGamma]:
    """Bond-volatility field implied by the market's short-rate model."""
    if isinstance(market.rate, VasicekRate):
        if market.rate.sigma == 0.0:
            return None
        return VasicekGamma(a=market.rate.a, sigma_r=market.rate.sigma, direction=market.rate.w_dir)
    if isinstance(market.rate, ConstantRate):
        return None
    raise ValueError("no Gaussian representation for this short-rate model")


def zc_price_gaussian(
    market: MarketModel,
    nu: Optional[DeterministicFn],
    t: float,
    t_mat: float,
    r_t: Optional[np.ndarray] = None,
) -> np.ndarray:
    """E[Y_T / Y_t | r_t] for deterministic (nu, eta) and a Gaussian rate.

    Assembled from the conditional moments of the integrated rate and the
    covariance with the martingale part: exp(-m + v/2 + tilt) where tilt is
    the integral of Gamma . (nu - eta).  With nu = 0 this is the
    risk-neutral price.
    """
    if t_mat < t:
        raise ValueError("maturity must not precede the pricing date")
    if t_mat == t:
        return np.asarray(1.0)
    nu_fn = DeterministicFn.zero(market.dim) if nu is None else nu
    eta = market.risk_premium

    def q(s):
        return np.atleast_2d(nu_fn.values(s)) - np.atleast_2d(eta.values(s))

    if isinstance(market.rate, ConstantRate):
        m_int = market.rate.rate * (t_mat - t)
        return np.exp(-m_int)

    model = market.rate
    if not isinstance(model, VasicekRate):
        raise ValueError(f"no Gaussian closed form for rate model {type(model).__name__}")
    if r_t is None:
        if t != 0.0:
            raise ValueError("conditional pricing at t > 0 needs the rate state r_t")
        r_t = model.r0
    r_t = np.asarray(r_t, dtype=float)
    m_int = model.integral_mean(r_t, t_mat - t)
    v_int = model.integral_var(t_mat - t)
    gam = market_gamma(market)
    tilt = 0.0
    if gam is not None:
        tilt = _tilt_integral(lambda s: gam.vectors(s, t_mat), q, t, t_mat)
    return np.exp(-m_int + 0.5 * v_int + tilt)


def zc_price_gamma_market(spec: BackwardSpec, nu: Optional[DeterministicFn], t_mat: float) -> float:
    """Time-0 zero-coupon price in the log-normal market described by the
    bond-volatility field and the mean short-rate curve."""
    nu_fn = DeterministicFn.zero(spec.market.dim) if nu is None else nu
    eta = spec.market.risk_premium

    def q(s):
        return np.atleast_2d(nu_fn.values(s)) - np.atleast_2d(eta.values(s))

    m_int = float(spec.mean_rate.integral(t_mat))
    v_int = float(spec.gamma.int_sq(0.0, t_mat))
    tilt = _tilt_integral(lambda s: spec.gamma.vectors(s, t_mat), q, 0.0, t_mat)
    return float(np.exp(-m_int + 0.5 * v_int + tilt))


# ---------------------------------------------------------------------------
# Monte Carlo zero-coupon prices (plain and nested)


def zc_price_mc(y_paths: np.ndarray, k_t: int, k_mat: int) -> tuple[float, float]:
    """Unconditional price E[Y_T / Y_t] with standard error; k_t = 0 is the
    plain time-0 estimator."""
    if k_mat < k_t:
        raise ValueError("maturity index must not precede the pricing index")
    if k_mat == k_t:
        return 1.0, 0.0
    ratio = y_paths[:, k_mat] / y_paths[:, k_t]
    m, se = mean_stderr(ratio)
    return float(m), float(se)


@dataclass(frozen=True)
class InnerRatios:
    """Inner-simulation ratios over [t, T] restarted from one outer state."""

    y_ratio: np.ndarray  # (inner_paths,) Y_T / Y_t
    x_ratio: np.ndarray  # (inner_paths,) Xstar_T / Xstar_t
    r_end: np.ndarray    # (inner_paths,) short rate at T


def _shifted(fn: DeterministicFn, t0: float) -> DeterministicFn:
    return DeterministicFn(lambda s: fn(np.asarray(s, dtype=float) + t0), label=f"{fn.label}@+{t0}")


def _inner_ratios(triple: OptimalTriple, outer_index: int, k_t: int, k_mat: int, inner_paths: int) -> InnerRatios:
    """Restart the Markov state (the short rate) of one outer path at t and
    simulate the optimal pair forward to T on a derived inner stream."""
    from .brownian import sample_brownian  # local import to avoid cycles

    grid, market, spec = triple.grid, triple.market, triple.spec
    t0 = grid.times[k_t]
    sub = TimeGrid(grid.times[k_mat] - t0, k_mat - k_t)
    inner_seed = int(substream_seed(triple.batch.seed, PURPOSE_INNER, outer_index, k_t).generate_state(1, np.uint64)[0])
    inner_batch = sample_brownian(inner_seed, sub, market.dim, inner_paths)

    r_t = float(triple.rate_paths.r[outer_index, k_t])
    if isinstance(market.rate, VasicekRate):
        rate = VasicekRate(a=market.rate.a, b=market.rate.b, sigma=market.rate.sigma, r0=r_t, w_dir=market.rate.w_dir)
    else:
        rate = market.rate
    inner_market = MarketModel(
        dim=market.dim, rate=rate, risk_premium=_shifted(market.risk_premium, t0), subspace=market.subspace
    )
    from .rates import simulate_short_rate

    inner_rates = simulate_short_rate(rate, sub, inner_batch)
    y = state_price_paths(inner_market, sub, inner_batch, nu=_shifted(spec.nu_star, t0), rate_paths=inner_rates)
    x = wealth_paths(
        inner_market,
        sub,
        inner_batch,
        kappa=_shifted(spec.kappa_star, t0),
        consumption=_shifted(spec.psi_hat, t0),
        rate_paths=inner_rates,
    )
    return InnerRatios(y_ratio=y.values[:, -1], x_ratio=x.values[:, -1], r_end=inner_rates.r[:, -1])


@dataclass(frozen=True)
class ConditionalZCReport:
    """Per-outer-path conditional zero-coupon prices at a future date."""

    t: float
    maturity: float
    prices: np.ndarray    # (n_outer,)
    stderrs: np.ndarray   # (n_outer,)
    rate_states: np.ndarray


def marginal_zc_mc(
    triple: OptimalTriple,
    k_t: int,
    k_mat: int,
    inner_paths: int = 1024,
    max_outer: int = 256,
):
    """Marginal-utility zero-coupon price E[Y_T / Y_t | F_t].

    At k_t = 0 returns (price, stderr) from the plain average.  At k_t > 0
    conditional prices are estimated by nested simulation restarted from each
    realized Markov state; one derived inner stream per outer path keeps the
    output reproducible.
    """
    if k_t == 0:
        return zc_price_mc(triple.state_price.values, 0, k_mat)
    n_outer = min(max_outer, triple.n_paths)
    prices = np.empty(n_outer)
    stderrs = np.empty(n_outer)
    for i in range(n_outer):
        inner = _inner_ratios(triple, i, k_t, k_mat, inner_paths)
        m, se = mean_stderr(inner.y_ratio)
        prices[i], stderrs[i] = m, se
    return ConditionalZCReport(
        t=triple.grid.times[k_t],
        maturity=triple.grid.times[k_mat],
        prices=prices,
        stderrs=stderrs,
        rate_states=triple.rate_paths.r[:n_outer, k_t].copy(),
    )


def risk_neutral_zc_mc(y0_paths: np.ndarray, k_t: int, k_mat: int) -> tuple[float, float]:
    """Risk-neutral price from minimal state-price density paths."""
    return zc_price_mc(y0_paths, k_t, k_mat)


# ---------------------------------------------------------------------------
# HJM forward rates


@dataclass(frozen=True)
class HJMReport:
    tenors: np.ndarray            # interior tenors where derivatives exist
    forward_rates: np.ndarray     # f_0(T) by central differences
    expected_rate_recon: np.ndarray
    expected_rate_model: np.ndarray

    @property
    def max_abs_residual(self) -> float:
        return float(np.max(np.abs(self.expected_rate_recon - self.expected_rate_model)))


def hjm_forward_rates(
    price_fn: Callable[[float], float],
    gamma: Optional[GammaModel],
    risk_premium: DeterministicFn,
    nu: Optional[DeterministicFn],
    expected_rate: Callable[[np.ndarray], np.ndarray],
    tenors: np.ndarray,
    dim: int,
) -> HJMReport:
    """Forward rates f_0(T) = -d/dT ln B_0(T) and the drift-identity
    reconstruction of the expected short rate.

    The reconstruction E[r_T] = f_0(T) + |Gamma_0(T)|^2 / 2 - psi'(T), with
    psi(T) the integral of Gamma . (eta - nu), must match the rate model's
    expectation up to the tenor discretization error.
    """
    tenors = np.asarray(tenors, dtype=float)
    if len(tenors) < 3:
        raise ValueError("tenor grid too coarse for central differences")
    spacing = np.diff(tenors)
    if np.max(spacing) - np.min(spacing) > 1e-9:
        raise ValueError("tenor grid must be uniform")
    h = float(spacing[0])

    log_b = np.array([math.log(price_fn(float(t))) for t in tenors])
    f0 = -(log_b[2:] - log_b[:-2]) / (2.0 * h)
    interior = tenors[1:-1]

    nu_fn = DeterministicFn.zero(dim) if nu is None else nu

    def q(s):
        return np.atleast_2d(risk_premium.values(s)) - np.atleast_2d(nu_fn.values(s))

    if gamma is None:
        half_gamma_sq = np.zeros_like(interior)
        psi_prime = np.zeros_like(interior)
    else:
        half_gamma_sq = 0.5 * np.array([float(np.sum(gamma.vectors(0.0, float(t)) ** 2)) for t in interior])
        psi = np.array([_tilt_integral(lambda s, t=float(t): gamma.vectors(s, t), q, 0.0, float(t)) for t in tenors])
        psi_prime = (psi[2:] - psi[:-2]) / (2.0 * h)

    recon = f0 + half_gamma_sq - psi_prime
    model = np.asarray(expected_rate(interior), dtype=float)
    return HJMReport(tenors=interior, forward_rates=f0, expected_rate_recon=recon, expected_rate_model=model)


# ---------------------------------------------------------------------------
# long-maturity asymptotics


@dataclass(frozen=True)
class LongRateReport:
    mode: str                 # "forward" or "backward"
    slope: float              # d l_t / dt, exact from the volatility limits
    l0: float
    t_grid: np.ndarray
    l_values: np.ndarray
    verdict: str              # "constant" | "increasing" | "decreasing"
    probe_tenors: np.ndarray
    probe_expected_yields: np.ndarray  # E[R_t(T)] at the largest t, per probe


def long_rate(
    gamma: GammaModel,
    mode: str,
    alpha: float,
    l0: float,
    t_grid: np.ndarray,
    risk_premium: DeterministicFn,
    subspace=None,
    probe_tenors: Sequence[float] = (50.0, 100.0, 200.0),
) -> LongRateReport:
    """Limit of the yield curve as maturity grows, from the volatility limits.

    Forward mode: l_t = l_0 + t q / 2 with q the limit of |Gamma|^2/(T-s).
    Backward mode (horizon tied to the probed maturity): the orthogonal part
    contributes with weight (2 alpha - 1) instead, so small risk aversion can
    turn the long rate decreasing.  Fields without a finite limit are
    rejected: the long rate is infinite for them.
    """
    limits = gamma.limit_sq_rate()
    if limits is None:
        raise ValueError("bond-volatility field has no finite long-maturity limit; the long rate is infinite")
    q_r, q_perp = limits
    if mode == "forward":
        slope = 0.5 * (q_r + q_perp)
    elif mode == "backward":
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0,1)")
        slope = 0.5 * q_r + 0.5 * (2.0 * alpha - 1.0) * q_perp
    else:
        raise ValueError("mode must be 'forward' or 'backward'")

    t_grid = np.asarray(t_grid, dtype=float)
    l_values = l0 + slope * t_grid
    if slope == 0.0:
        verdict = "constant"
    else:
        verdict = "increasing" if slope > 0 else "decreasing"

    # finite-maturity illustration: expected yield at the last grid date,
    # assuming a flat initial curve at l0
    t_last = float(t_grid[-1]) if len(t_grid) else 0.0
    probes = np.asarray(list(probe_tenors), dtype=float)
    expected = np.empty_like(probes)
    d = gamma.dim
    for idx, t_mat in enumerate(probes):
        if mode == "backward":
            def nu_vals(s, tm=float(t_mat)):
                g = gamma.vectors(np.atleast_1d(s), tm)
                g_perp = subspace.component_perp(g) if subspace is not None else g
                return -(1.0 - alpha) * g_perp
        else:
            def nu_vals(s, tm=float(t_mat)):
                return np.zeros((np.atleast_1d(s).shape[0], d))

        def integrand(s, tm=float(t_mat)):
            g = gamma.vectors(np.atleast_1d(s), tm)
            drift = 0.5 * np.sum(g * g, axis=1)
            tilt = np.sum(g * (nu_vals(s) - np.atleast_2d(risk_premium.values(np.atleast_1d(s)))), axis=1)
            return drift + tilt

        correction = gauss_legendre(integrand, 0.0, t_last, n=256) if t_last > 0 else 0.0
        expected[idx] = l0 + correction / (t_mat - t_last)
    return LongRateReport(
        mode=mode,
        slope=float(slope),
        l0=float(l0),
        t_grid=t_grid,
        l_values=l_values,
        verdict=verdict,
        probe_tenors=probes,
        probe_expected_yields=expected,
    )


# ---------------------------------------------------------------------------
# Davis (marginal-utility) pricing


@dataclass(frozen=True)
class DavisPrice:
    """Linear marginal-utility price of a payoff with its MC standard error."""

    value: float
    stderr: float
    quantity_derivative: float  # price per unit of payoff (linear rule)
    linearity_residual: float   # doubling witness, exact up to float rounding

    def __post_init__(self) -> None:
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")


def _fsum_mean(x: np.ndarray) -> float:
    return math.fsum(map(float, x)) / len(x)


def davis_price(payoff_values: np.ndarray, y_paths: np.ndarray, k_mat: int, k_t: int = 0) -> DavisPrice:
    """Price E[zeta_T Y_T / Y_t] on a fixed batch.

    At k_t = 0 this is the date-0 marginal-utility price; at k_t > 0 it is
    the unconditional average of the date-t price (use the conditional
    variant for the per-state price).  The estimator is an exactly ordered
    sum, so scaling and superposition of payoffs carry through to prices
    with at most one rounding per path.
    """
    payoff_values = np.asarray(payoff_values, dtype=float)
    if np.any(payoff_values < 0):
        raise ValueError("payoffs must be nonnegative")
    deflated = payoff_values * y_paths[:, k_mat] / y_paths[:, k_t]
    value = _fsum_mean(deflated)
    se = float(np.std(deflated, ddof=1) / np.sqrt(len(deflated)))
    doubled = _fsum_mean(2.0 * deflated)
    lin_res = abs(doubled - 2.0 * value) / max(abs(value), 1e-300)
    return DavisPrice(value=value, stderr=se, quantity_derivative=value, linearity_residual=lin_res)


@dataclass(frozen=True)
class ConditionalDavisReport:
    """Per-outer-path conditional Davis prices at a future date."""

    t: float
    maturity: float
    prices: np.ndarray
    stderrs: np.ndarray
    rate_states: np.ndarray


def davis_price_conditional(
    payoff,
    triple: OptimalTriple,
    k_t: int,
    k_mat: int,
    inner_paths: int = 1024,
    max_outer: int = 256,
) -> ConditionalDavisReport:
    """Conditional marginal-utility price E[zeta_T Y_T / Y_t | F_t].

    The payoff is a callable of the date-T Markov state,
    payoff(r_T, x_T, y_T) >= 0 elementwise, with x and y the optimal
    processes for unit initial conditions.  Each outer path is repriced by
    an inner simulation restarted from its realized short rate, on a derived
    stream, so results are reproducible.
    """
    n_outer = min(max_outer, triple.n_paths)
    prices = np.empty(n_outer)
    stderrs = np.empty(n_outer)
    for i in range(n_outer):
        inner = _inner_ratios(triple, i, k_t, k_mat, inner_paths)
        x_end = triple.wealth.values[i, k_t] * inner.x_ratio
        y_end = triple.state_price.values[i, k_t] * inner.y_ratio
        zeta = np.asarray(payoff(inner.r_end, x_end, y_end), dtype=float)
        if np.any(zeta < 0):
            raise ValueError("payoffs must be nonnegative")
        deflated = zeta * inner.y_ratio
        m, se = mean_stderr(deflated)
        prices[i], stderrs[i] = m, se
    return ConditionalDavisReport(
        t=triple.grid.times[k_t],
        maturity=triple.grid.times[k_mat],
        prices=prices,
        stderrs=stderrs,
        rate_states=triple.rate_paths.r[:n_outer, k_t].copy(),
    )


def davis_time_consistency(
    payoff_values: np.ndarray,
    y_paths: np.ndarray,
    x_paths: np.ndarray,
    k_mat: int,
    k_horizon: int,
) -> tuple[float, float, float]:
    """Price a date-T payoff directly and after capitalizing it to the
    horizon inside the consumption-free optimal wealth.

    Returns (price at T, price via horizon, t-statistic of the pathwise
    difference); the two agree in expectation because wealth times the
    state-price density is a martingale.
    """
    payoff_values = np.asarray(payoff_values, dtype=float)
    direct = payoff_values * y_paths[:, k_mat] / y_paths[:, 0]
    capitalized = payoff_values * (x_paths[:, k_horizon] / x_paths[:, k_mat]) * y_paths[:, k_horizon] / y_paths[:, 0]
    p_direct = _fsum_mean(direct)
    p_cap = _fsum_mean(capitalized)
    diff = capitalized - direct
    m, se = mean_stderr(diff)
    t_stat = float(m / se) if se > 0 else 0.0
    return p_direct, p_cap, t_stat


# ---------------------------------------------------------------------------
# pathwise Ramsey identity


def pathwise_ramsey_report(y_paths: np.ndarray, marginal_paths: np.ndarray) -> float:
    """max | marginal-utility ratio / state-price ratio - 1 | over paths and
    dates; both processes must be normalized by their time-0 values."""
    lhs = marginal_paths / marginal_paths[:, :1]
    rhs = y_paths / y_paths[:, :1]
    return float(np.max(np.abs(lhs / rhs - 1.0)))


def forward_marginal_consumption_paths(triple: OptimalTriple, x0: float = 1.0) -> np.ndarray:
    """Paths of V_c(t, cstar_t(c_0)) for the forward power family."""
    psi_all = np.asarray(triple.spec.psi_hat.values(triple.grid.times), dtype=float)
    if np.any(psi_all <= 0):
        raise ValueError("pathwise Ramsey via consumption needs psi_hat > 0")
    c_paths = psi_all * (x0 * triple.wealth.values)
    return np.power(psi_all, triple.spec.alpha) * triple.zhat * np.power(c_paths, -triple.spec.alpha)


def backward_marginal_wealth_paths(x_paths: np.ndarray, y_paths: np.ndarray, alpha: float, x0: float = 1.0) -> np.ndarray:
    """Paths of U_x(t, Xstar_t(x0)) for the backward power problem."""
    zhat = y_paths * np.power(x_paths, alpha)
    return zhat * np.power(x0 * x_paths, -alpha)
