"""Backward (fixed-horizon) power-utility problems in a log-normal market.

The market is described at the level of the zero-coupon volatility field
Gamma_s(T): the integrated short rate is simulated directly from its Gaussian
representation, so the terminal constraint that Ystar (Xstar)^alpha be a
deterministic constant at the horizon holds at machine precision when the
optimal volatilities are consistent with Gamma.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .brownian import BrownianBatch
from .grids import DeterministicFn, TimeGrid
from .market import MarketModel
from .quadrature import gauss_legendre
from .rates import VasicekRate


# ---------------------------------------------------------------------------
# zero-coupon volatility models


@dataclass(frozen=True)
class VasicekGamma:
    """Bond volatility of a mean-reverting Gaussian rate along a fixed noise
    direction: (1 - exp(-a (T - s))) sigma_r / a.

    Placing the direction in the orthogonal complement gives the
    incomplete-market variant in which the rate noise is unhedgeable."""

    a: float
    sigma_r: float
    direction: np.ndarray  # unit noise direction

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError("mean-reversion speed must be positive")
        d = np.asarray(self.direction, dtype=float)
        object.__setattr__(self, "direction", d)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")

    @property
    def dim(self) -> int:
        return self.direction.shape[0]

    def scalar(self, s, t_mat):
        s = np.asarray(s, dtype=float)
        return (1.0 - np.exp(-self.a * (t_mat - s))) * self.sigma_r / self.a

    def vectors(self, s, t_mat) -> np.ndarray:
        return np.multiply.outer(self.scalar(s, t_mat), self.direction)

    def int_sq(self, t: float, t_mat: float) -> float:
        tau = t_mat - t
        a, sig = self.a, self.sigma_r
        e1 = 1.0 - np.exp(-a * tau)
        e2 = 1.0 - np.exp(-2.0 * a * tau)
        return (sig / a) ** 2 * (tau - 2.0 * e1 / a + e2 / (2.0 * a))

    def limit_sq_rate(self) -> tuple[float, float]:
        # |Gamma| is bounded, so |Gamma|^2 / (T - s) -> 0
        return 0.0, 0.0


@dataclass(frozen=True)
class SyntheticSqrtGamma:
    """Square-root bond-volatility profile |Gamma^R|^2 = c_r (T-s),
    |Gamma^perp|^2 = c_perp (T-s), with fixed directions.

    The squared volatility grows linearly in time to maturity, which makes
    the long-maturity limit of |Gamma|^2 / (T-s) finite and nonzero."""

    c_r: float
    c_perp: float
    dir_r: np.ndarray
    dir_perp: np.ndarray

    def __post_init__(self) -> None:
        if self.c_r < 0 or self.c_perp < 0:
            raise ValueError("variance slopes must be nonnegative")
        dr = np.asarray(self.dir_r, dtype=float)
        dp = np.asarray(self.dir_perp, dtype=float)
        object.__setattr__(self, "dir_r", dr)
        object.__setattr__(self, "dir_perp", dp)
        for d in (dr, dp):
            if abs(np.linalg.norm(d) - 1.0) > 1e-12:
                raise ValueError("directions must be unit vectors")
        if abs(np.dot(dr, dp)) > 1e-12:
            raise ValueError("directions must be orthogonal")

    @property
    def dim(self) -> int:
        return self.dir_r.shape[0]

    def vectors(self, s, t_mat) -> np.ndarray:
        tau = np.maximum(t_mat - np.asarray(s, dtype=float), 0.0)
        return (
            np.multiply.outer(np.sqrt(self.c_r * tau), self.dir_r)
            + np.multiply.outer(np.sqrt(self.c_perp * tau), self.dir_perp)
        )

    def int_sq(self, t: float, t_mat: float) -> float:
        tau = t_mat - t
        return (self.c_r + self.c_perp) * tau * tau / 2.0

    def limit_sq_rate(self) -> tuple[float, float]:
        return self.c_r, self.c_perp


@dataclass(frozen=True)
class CustomGamma:
    """Arbitrary bond-volatility field given by a callable (s, T) -> vector."""

    fn: Callable[[np.ndarray, float], np.ndarray]
    dim: int

    def vectors(self, s, t_mat) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.asarray(self.fn(s, t_mat), dtype=float)
        if out.shape != (len(s), self.dim):
            raise ValueError("custom gamma must return one dim-vector per time")
        return out

    def int_sq(self, t: float, t_mat: float) -> float:
        return gauss_legendre(lambda s: np.sum(self.vectors(s, t_mat) ** 2, axis=1), t, t_mat)

    def limit_sq_rate(self) -> None:
        # no closed-form limit is available for tabulated fields
        return None


GammaModel = Union[VasicekGamma, SyntheticSqrtGamma, CustomGamma]


def vasicek_orthogonal_gamma(a: float, sigma_r: float, market: MarketModel) -> VasicekGamma:
    """Vasicek bond volatility placed entirely in the orthogonal complement."""
    basis = market.subspace.basis
    comp = np.eye(market.dim) - basis.T @ basis
    # first complement direction of largest norm
    norms = np.linalg.norm(comp, axis=1)
    if norms.max() < 1e-12:
        raise ValueError("market subspace is full; no orthogonal direction exists")
    direction = comp[int(np.argmax(norms))]
    direction = direction / np.linalg.norm(direction)
    return VasicekGamma(a=a, sigma_r=sigma_r, direction=direction)


# ---------------------------------------------------------------------------
# time-0 curve input


@dataclass(frozen=True)
class MeanRateCurve:
    """Mean short rate t -> E[r_t] and its integral, the deterministic part
    of the Gaussian representation of the integrated rate."""

    rate: Callable[[np.ndarray], np.ndarray]
    integral: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def flat(cls, r: float) -> "MeanRateCurve":
        return cls(rate=lambda t: np.full(np.shape(t), float(r)), integral=lambda t: float(r) * np.asarray(t, dtype=float))

    @classmethod
    def from_vasicek(cls, a: float, b: float, r0: float) -> "MeanRateCurve":
        def rate(t):
            return b + (r0 - b) * np.exp(-a * np.asarray(t, dtype=float))

        def integral(t):
            t = np.asarray(t, dtype=float)
            return b * t + (r0 - b) * (1.0 - np.exp(-a * t)) / a

        return cls(rate=rate, integral=integral)

    @classmethod
    def from_rate_model(cls, model) -> "MeanRateCurve":
        if isinstance(model, VasicekRate):
            return cls.from_vasicek(model.a, model.b, model.r0)
        return cls.flat(model.rate)


@dataclass(frozen=True)
class BackwardSpec:
    """Horizon, risk aversion, bond-volatility model, and market."""

    t_horizon: float
    alpha: float
    gamma: GammaModel
    market: MarketModel
    mean_rate: MeanRateCurve

    def __post_init__(self) -> None:
        if not self.t_horizon > 0:
            raise ValueError("t_horizon must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.gamma.dim != self.market.dim:
            raise ValueError("gamma model dimension does not match the market")


def solve_backward_vols(spec: BackwardSpec) -> tuple[DeterministicFn, DeterministicFn]:
    """Optimal volatilities pinned by the deterministic terminal constraint.

    nu(t) = -(1 - alpha) Gamma_perp_t(T_H) and
    kappa(t) = (eta(t) - (1 - alpha) Gamma_R_t(T_H)) / alpha.
    """
    alpha, t_h = spec.alpha, spec.t_horizon
    sub = spec.market.subspace

    def nu(t):
        g = spec.gamma.vectors(np.atleast_1d(t), t_h)
        out = -(1.0 - alpha) * sub.component_perp(g)
        return out[0] if np.ndim(t) == 0 else out

    def kappa(t):
        tt = np.atleast_1d(t)
        g = spec.gamma.vectors(tt, t_h)
        eta = np.atleast_2d(spec.market.risk_premium.values(tt))
        out = (eta - (1.0 - alpha) * sub.component_in(g)) / alpha
        return out[0] if np.ndim(t) == 0 else out

    return (
        DeterministicFn(nu, label=f"nu_star(T_H={t_h})"),
        DeterministicFn(kappa, label=f"kappa_star(T_H={t_h})"),
    )


def rate_integral_paths(spec: BackwardSpec, grid: TimeGrid, batch: BrownianBatch) -> np.ndarray:
    """Paths of int_0^{t_k} r ds from the Gaussian representation.

    int_0^t r = F(t) - sum_{j<k} Gamma_{t_j}(t_k) . dW_j with F the mean
    integral; left-endpoint sampling of Gamma keeps the stochastic integral
    non-anticipative.
    """
    k_steps = grid.n_steps
    times = grid.times
    # G[j, k-1, :] = Gamma_{t_j}(t_k) for j < k, zero otherwise
    g = np.zeros((k_steps, k_steps, spec.market.dim))
    for k in range(1, k_steps + 1):
        g[:k, k - 1, :] = spec.gamma.vectors(times[:k], times[k])
    inc = batch.increments.reshape(batch.n_paths, -1)           # (n, K*dim)
    g_mat = g.transpose(0, 2, 1).reshape(-1, k_steps)           # (K*dim, K)
    stochastic = inc @ g_mat                                     # (n, K)
    out = np.empty((batch.n_paths, k_steps + 1))
    out[:, 0] = 0.0
    out[:, 1:] = np.asarray(spec.mean_rate.integral(times[1:]), dtype=float) - stochastic
    return out


@dataclass(frozen=True)
class BackwardPaths:
    """Optimal backward wealth and state-price paths on [0, T_H]."""

    grid: TimeGrid
    x: np.ndarray       # (n, K+1)
    y: np.ndarray       # (n, K+1)
    int_r: np.ndarray   # (n, K+1)
    nu: DeterministicFn
    kappa: DeterministicFn


def backward_optimal_paths(
    spec: BackwardSpec,
    grid: TimeGrid,
    batch: BrownianBatch,
    nu: Optional[DeterministicFn] = None,
    kappa: Optional[DeterministicFn] = None,
) -> BackwardPaths:
    """Simulate the terminal-wealth-optimal pair on the shared batch.

    Passing explicit (nu, kappa), e.g. the solution of a different horizon,
    produces a deliberately inconsistent control for the constraint check.
    """
    if grid.horizon < spec.t_horizon - 1e-12:
        raise ValueError("grid horizon must cover the optimization horizon")
    if nu is None or kappa is None:
        nu_opt, kappa_opt = solve_backward_vols(spec)
        nu = nu_opt if nu is None else nu
        kappa = kappa_opt if kappa is None else kappa

    sub = spec.market.subspace
    steps = grid.times[:-1]
    nu_k = np.atleast_2d(nu.values(steps))
    kappa_k = np.atleast_2d(kappa.values(steps))
    sub.require_orthogonal(nu_k, "dual volatility nu")
    sub.require_contains(kappa_k, "portfolio volatility kappa")
    eta_k = spec.market.premium_on_steps(grid)

    int_r = rate_integral_paths(spec, grid, batch)
    step_int = np.diff(int_r, axis=1)
    h = grid.dt

    vol_y = nu_k - eta_k
    dlog_y = (
        np.einsum("nkd,kd->nk", batch.increments, vol_y)
        - step_int
        - 0.5 * np.sum(vol_y * vol_y, axis=1) * h
    )
    dlog_x = (
        np.einsum("nkd,kd->nk", batch.increments, kappa_k)
        + step_int
        + (np.sum(kappa_k * eta_k, axis=1) - 0.5 * np.sum(kappa_k * kappa_k, axis=1)) * h
    )
    log_y = np.zeros_like(int_r)
    log_x = np.zeros_like(int_r)
    np.cumsum(dlog_y, axis=1, out=log_y[:, 1:])
    np.cumsum(dlog_x, axis=1, out=log_x[:, 1:])
    return BackwardPaths(grid=grid, x=np.exp(log_x), y=np.exp(log_y), int_r=int_r, nu=nu, kappa=kappa)


@dataclass(frozen=True)
class TerminalConstraintReport:
    """Cross-path dispersion of Ystar (Xstar)^alpha at the horizon."""

    constant: float       # sample mean of the terminal product
    cv: float             # coefficient of variation across paths
    max_abs_dev: float    # max |value / mean - 1|


def terminal_constraint_check(
    spec: BackwardSpec,
    grid: TimeGrid,
    batch: BrownianBatch,
    nu: Optional[DeterministicFn] = None,
    kappa: Optional[DeterministicFn] = None,
) -> TerminalConstraintReport:
    """Dispersion of the terminal product; ~1e-15 for the consistent control."""
    paths = backward_optimal_paths(spec, grid, batch, nu=nu, kappa=kappa)
    k_h = grid.index_of(spec.t_horizon)
    z = paths.y[:, k_h] * np.power(paths.x[:, k_h], spec.alpha)
    mean = float(np.mean(z))
    return TerminalConstraintReport(
        constant=mean,
        cv=float(np.std(z) / mean),
        max_abs_dev=float(np.max(np.abs(z / mean - 1.0))),
    )


@dataclass(frozen=True)
class HorizonGap:
    """Pathwise gap between the optimal solutions of two horizons at one date."""

    horizon_a: float
    horizon_b: float
    t_common: float
    max_rel_gap_x: float
    max_rel_gap_y: float
    predicted_gap_residual: float  # |simulated / predicted - 1| for the dual ratio


@dataclass(frozen=True)
class HorizonReport:
    gaps: tuple[HorizonGap, ...]

    @property
    def max_gap_y(self) -> float:
        return max(g.max_rel_gap_y for g in self.gaps)

    @property
    def max_gap_x(self) -> float:
        return max(g.max_rel_gap_x for g in self.gaps)


def _subgrid_batch(grid: TimeGrid, batch: BrownianBatch, k: int) -> tuple[TimeGrid, BrownianBatch]:
    sub = TimeGrid(grid.times[k], k)
    return sub, BrownianBatch(seed=batch.seed, grid=sub, increments=batch.increments[:, :k, :])


def horizon_dependency_experiment(
    spec: BackwardSpec,
    horizons: Sequence[float],
    grid: TimeGrid,
    batch: BrownianBatch,
    t_common: float,
) -> HorizonReport:
    """Compare optimal solutions across horizons on common random numbers.

    The optimal volatilities of horizon T_H enter the dual process, so any
    maturity dependence of Gamma shows up as a pathwise gap at a common
    intermediate date; with maturity-free Gamma the gap is exactly zero.
    """
    if len(horizons) < 2:
        raise ValueError("need at least two horizons")
    solved = {}
    for t_h in horizons:
        if t_h < t_common:
            raise ValueError("t_common must precede every horizon")
        sub_spec = BackwardSpec(
            t_horizon=float(t_h), alpha=spec.alpha, gamma=spec.gamma, market=spec.market, mean_rate=spec.mean_rate
        )
        k_h = grid.index_of(t_h)
        sub_grid, sub_batch = _subgrid_batch(grid, batch, k_h)
        solved[t_h] = (sub_spec, backward_optimal_paths(sub_spec, sub_grid, sub_batch))

    k_c = grid.index_of(t_common)
    eta_k = np.atleast_2d(spec.market.risk_premium.values(grid.times[:k_c]))
    h = grid.dt
    gaps = []
    for i, ta in enumerate(horizons):
        for tb in horizons[i + 1 :]:
            pa, pb = solved[ta][1], solved[tb][1]
            gap_x = float(np.max(np.abs(pa.x[:, k_c] / pb.x[:, k_c] - 1.0)))
            gap_y = float(np.max(np.abs(pa.y[:, k_c] / pb.y[:, k_c] - 1.0)))

            # the dual ratio is predictable from the volatility differences
            na = np.atleast_2d(pa.nu.values(grid.times[:k_c]))
            nb = np.atleast_2d(pb.nu.values(grid.times[:k_c]))
            mart = np.einsum("nkd,kd->nk", batch.increments[:, :k_c, :], na - nb).sum(axis=1)
            conv = 0.5 * (np.sum((na - eta_k) ** 2, axis=1) - np.sum((nb - eta_k) ** 2, axis=1)).sum() * h
            # the integrated-rate parts differ only through Gamma(. , t) for t <= t_common,
            # which is horizon-free; they cancel in the ratio
            predicted = np.exp(mart - conv)
            simulated = pa.y[:, k_c] / pb.y[:, k_c]
            resid = float(np.max(np.abs(simulated / predicted - 1.0)))
            gaps.append(
                HorizonGap(
                    horizon_a=float(ta),
                    horizon_b=float(tb),
                    t_common=float(t_common),
                    max_rel_gap_x=gap_x,
                    max_rel_gap_y=gap_y,
                    predicted_gap_residual=resid,
                )
            )
    return HorizonReport(gaps=tuple(gaps))
