"""The incomplete Ito market: state-price densities and self-financing wealth.

State-price densities follow dY = Y [-r dt + (nu - eta) . dW] with nu in the
orthogonal complement of the admissible subspace; wealth follows
dX = X [r dt + kappa . (dW + eta dt)] - c dt with kappa in the subspace.
Both are simulated with exact per-step log schemes on the shared Brownian
batch and the exact integral of the short rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .brownian import BrownianBatch
from .grids import DeterministicFn, TimeGrid, as_deterministic
from .rates import RatePaths, ShortRateModel, simulate_short_rate
from .stats import DriftReport, interval_drift_report
from .subspace import SubspaceR


@dataclass(frozen=True)
class MarketModel:
    """Investment universe: short rate, deterministic risk premium, subspace.

    The risk premium is the minimal one and must be valued in the admissible
    subspace at every time.
    """

    dim: int
    rate: ShortRateModel
    risk_premium: DeterministicFn  # eta_R, dim-vector valued in span(R)
    subspace: SubspaceR

    def __post_init__(self) -> None:
        if self.subspace.dim != self.dim:
            raise ValueError("subspace dimension does not match market dimension")

    def validate_on(self, grid: TimeGrid, tol: float = 1e-9) -> None:
        eta = self.risk_premium.values(grid.times)
        if eta.shape[-1] != self.dim:
            raise ValueError("risk premium dimension does not match market dimension")
        self.subspace.require_contains(eta, "risk premium", tol)

    def premium_on_steps(self, grid: TimeGrid) -> np.ndarray:
        eta = np.atleast_2d(self.risk_premium.step_values(grid))
        if eta.shape != (grid.n_steps, self.dim):
            raise ValueError("risk premium must evaluate to a dim-vector")
        return eta


@dataclass(frozen=True)
class StatePricePaths:
    """Positive state-price density paths Y with deterministic dual volatility nu."""

    grid: TimeGrid
    values: np.ndarray  # (n_paths, n_steps+1), strictly positive
    nu: DeterministicFn
    y0: float

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class WealthPaths:
    """Nonnegative self-financing wealth paths, absorbed at zero."""

    grid: TimeGrid
    values: np.ndarray               # (n_paths, n_steps+1)
    kappa: DeterministicFn
    consumption: Optional[np.ndarray]  # (n_paths, n_steps+1) rates c_{t_k}, or None
    x0: float

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def absorbed_fraction(self) -> float:
        """Share of paths that hit zero by the horizon."""
        return float(np.mean(self.values[:, -1] <= 0.0))


def _coeff_on_steps(fn: DeterministicFn, grid: TimeGrid, dim: int, what: str) -> np.ndarray:
    vals = np.atleast_2d(fn.step_values(grid))
    if vals.shape != (grid.n_steps, dim):
        raise ValueError(f"{what} must evaluate to a vector of dimension {dim}")
    return vals


def state_price_paths(
    market: MarketModel,
    grid: TimeGrid,
    batch: BrownianBatch,
    nu: Optional[DeterministicFn] = None,
    y0: float = 1.0,
    rate_paths: Optional[RatePaths] = None,
) -> StatePricePaths:
    """Simulate a state-price density; nu = None gives the minimal density Y^0.

    Exact log scheme per step:
    ln Y_{k+1} = ln Y_k - int r - 0.5 |nu - eta|^2 dt + (nu - eta) . dW.
    """
    if y0 <= 0:
        raise ValueError("y0 must be positive")
    nu = DeterministicFn.zero(market.dim) if nu is None else nu
    nu_k = _coeff_on_steps(nu, grid, market.dim, "nu")
    market.subspace.require_orthogonal(nu_k, "dual volatility nu")
    eta_k = market.premium_on_steps(grid)
    market.subspace.require_contains(eta_k, "risk premium")

    if rate_paths is None:
        rate_paths = simulate_short_rate(market.rate, grid, batch)

    vol = nu_k - eta_k                                  # (K, dim)
    mart = np.einsum("nkd,kd->nk", batch.increments, vol)
    dlog = mart - rate_paths.step_integrals() - 0.5 * np.sum(vol * vol, axis=1) * grid.dt

    log_y = np.zeros((batch.n_paths, grid.n_steps + 1))
    np.cumsum(dlog, axis=1, out=log_y[:, 1:])
    return StatePricePaths(grid=grid, values=y0 * np.exp(log_y), nu=nu, y0=float(y0))


ConsumptionRule = Union[None, float, DeterministicFn, Callable[[float, np.ndarray], np.ndarray]]


def wealth_paths(
    market: MarketModel,
    grid: TimeGrid,
    batch: BrownianBatch,
    kappa: DeterministicFn,
    consumption: ConsumptionRule = None,
    x0: float = 1.0,
    rate_paths: Optional[RatePaths] = None,
) -> WealthPaths:
    """Simulate self-financing wealth with portfolio volatility kappa.

    consumption may be None (no consumption), a nonnegative proportional rate
    psi (scalar or DeterministicFn, meaning c = psi X, simulated with the
    exact log scheme), or a general rule c(t, x) >= 0, which falls back to an
    Euler step with absorption at zero.
    """
    if x0 < 0:
        raise ValueError("initial wealth must be nonnegative")
    kappa_k = _coeff_on_steps(kappa, grid, market.dim, "kappa")
    market.subspace.require_contains(kappa_k, "portfolio volatility kappa")
    eta_k = market.premium_on_steps(grid)

    if rate_paths is None:
        rate_paths = simulate_short_rate(market.rate, grid, batch)

    n, k_steps, h = batch.n_paths, grid.n_steps, grid.dt
    proportional = consumption is None or isinstance(consumption, (int, float, DeterministicFn))

    if proportional:
        psi_fn = as_deterministic(0.0 if consumption is None else consumption)
        psi_all = np.asarray(psi_fn.values(grid.times), dtype=float)
        if psi_all.ndim != 1:
            raise ValueError("proportional consumption rate must be scalar-valued")
        if np.any(psi_all < 0):
            raise ValueError("consumption rate must be nonnegative")
        psi_k = psi_all[:-1]

        mart = np.einsum("nkd,kd->nk", batch.increments, kappa_k)
        drift = (np.sum(kappa_k * eta_k, axis=1) - 0.5 * np.sum(kappa_k * kappa_k, axis=1) - psi_k) * h
        dlog = mart + rate_paths.step_integrals() + drift

        log_x = np.zeros((n, k_steps + 1))
        np.cumsum(dlog, axis=1, out=log_x[:, 1:])
        values = x0 * np.exp(log_x)
        c_paths = psi_all * values
        return WealthPaths(grid=grid, values=values, kappa=kappa, consumption=c_paths, x0=float(x0))

    # general rule: Euler with absorption at zero
    values = np.empty((n, k_steps + 1))
    c_paths = np.empty((n, k_steps + 1))
    values[:, 0] = x0
    times = grid.times
    kappa_dw = np.einsum("nkd,kd->nk", batch.increments, kappa_k)
    kappa_eta = np.sum(kappa_k * eta_k, axis=1)
    for k in range(k_steps):
        x = values[:, k]
        c = np.asarray(consumption(times[k], x), dtype=float)
        if np.any(c < -1e-15):
            raise ValueError("consumption rule produced negative rates")
        c_paths[:, k] = c
        growth = 1.0 + rate_paths.r[:, k] * h + kappa_dw[:, k] + kappa_eta[k] * h
        nxt = x * growth - c * h
        alive = x > 0.0
        values[:, k + 1] = np.where(alive, np.maximum(nxt, 0.0), 0.0)
    c_paths[:, -1] = np.asarray(consumption(times[-1], values[:, -1]), dtype=float)
    c_paths[values <= 0.0] = 0.0
    return WealthPaths(grid=grid, values=values, kappa=kappa, consumption=c_paths, x0=float(x0))


def deflated_wealth_paths(state_prices: StatePricePaths, wealth: WealthPaths) -> np.ndarray:
    """Paths of Y X + int Y c ds, a local martingale for admissible strategies.

    The running consumption integral is accumulated with the trapezoid rule,
    which keeps the discretization bias at O(dt^3) per interval.
    """
    if state_prices.grid is not wealth.grid and state_prices.grid != wealth.grid:
        raise ValueError("state-price and wealth paths must share a grid")
    y, x = state_prices.values, wealth.values
    m = y * x
    if wealth.consumption is not None:
        yc = y * wealth.consumption
        h = wealth.grid.dt
        running = np.zeros_like(m)
        np.cumsum(0.5 * h * (yc[:, :-1] + yc[:, 1:]), axis=1, out=running[:, 1:])
        m = m + running
    return m


def local_martingale_drift_test(
    state_prices: StatePricePaths,
    wealth: WealthPaths,
    threshold: float = 4.0,
) -> DriftReport:
    """Sample drift of Y X + int Y c ds per grid interval, with stderr bands.

    Intervals with |drift| > threshold standard errors are flagged in the
    report; for a correctly specified state-price density none should be.
    """
    m = deflated_wealth_paths(state_prices, wealth)
    return interval_drift_report(m, wealth.grid.times, threshold)
