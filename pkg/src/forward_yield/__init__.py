"""Forward/backward power-utility simulation and term-structure engine."""

from .backward import (
    BackwardSpec,
    CustomGamma,
    MeanRateCurve,
    SyntheticSqrtGamma,
    VasicekGamma,
    backward_optimal_paths,
    horizon_dependency_experiment,
    rate_integral_paths,
    solve_backward_vols,
    terminal_constraint_check,
    vasicek_orthogonal_gamma,
)
from .brownian import BrownianBatch, sample_brownian
from .curves import (
    DavisPrice,
    YieldCurve,
    curve_from_prices,
    davis_price,
    davis_price_conditional,
    davis_time_consistency,
    gbm_consumption_paths,
    hjm_forward_rates,
    long_rate,
    marginal_zc_mc,
    pathwise_ramsey_report,
    ramsey_curve_mc,
    ramsey_flat_closed,
    ramsey_rate_mc,
    risk_neutral_zc_mc,
    zc_price_gamma_market,
    zc_price_gaussian,
    zc_price_mc,
)
from .errors import ConfigError, ForwardYieldError, SubspaceViolationError
from .forward import (
    ForwardPowerSpec,
    OptimalTriple,
    consistency_drift_test,
    first_order_check,
    hjb_residual,
    perturbed_kappa,
    representation_check,
    scaled_consumption,
    simulate_optimal,
)
from .grids import DeterministicFn, TimeGrid, make_grid
from .market import (
    MarketModel,
    StatePricePaths,
    WealthPaths,
    local_martingale_drift_test,
    state_price_paths,
    wealth_paths,
)
from .rates import ConstantRate, RatePaths, VasicekRate, simulate_short_rate, zc_volatility_vasicek
from .subspace import SubspaceR, project
from .utility import (
    NumericConjugate,
    PowerUtility,
    ProgressivePowerUtility,
    numeric_biconjugate,
    numeric_fenchel,
    power_conjugate,
    power_eval,
    progressive_eval,
)

__version__ = "0.1.0"
