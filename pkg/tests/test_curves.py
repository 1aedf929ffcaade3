import numpy as np
import pytest
from scipy import integrate

from forward_yield import (
    BackwardSpec,
    ConstantRate,
    CustomGamma,
    DeterministicFn,
    ForwardPowerSpec,
    MarketModel,
    MeanRateCurve,
    SubspaceR,
    SyntheticSqrtGamma,
    VasicekGamma,
    VasicekRate,
    backward_optimal_paths,
    curve_from_prices,
    davis_price,
    davis_time_consistency,
    gbm_consumption_paths,
    hjm_forward_rates,
    long_rate,
    make_grid,
    marginal_zc_mc,
    pathwise_ramsey_report,
    ramsey_curve_mc,
    ramsey_flat_closed,
    ramsey_rate_mc,
    sample_brownian,
    simulate_optimal,
    solve_backward_vols,
    zc_price_gamma_market,
    zc_price_gaussian,
    zc_price_mc,
)
from forward_yield.curves import (
    backward_marginal_wealth_paths,
    forward_marginal_consumption_paths,
    market_gamma,
)

E1, E2 = np.eye(2)


def textbook_vasicek_price(a, b, sigma, r0, tau):
    bee = (1.0 - np.exp(-a * tau)) / a
    log_a = (b - sigma**2 / (2 * a**2)) * (bee - tau) - sigma**2 * bee**2 / (4 * a)
    return np.exp(log_a - bee * r0)


def textbook_vasicek_forward(a, b, sigma, r0, t):
    e = np.exp(-a * t)
    return r0 * e + b * (1.0 - e) - sigma**2 / (2 * a**2) * (1.0 - e) ** 2


def incomplete_vasicek_market(eta0=0.1, a=1.0, b=0.03, sigma=0.02, r0=0.03):
    return MarketModel(
        dim=2,
        rate=VasicekRate(a=a, b=b, sigma=sigma, r0=r0, w_dir=E2),
        risk_premium=DeterministicFn.constant(np.array([eta0, 0.0])),
        subspace=SubspaceR.axes(2, [0]),
    )


def forward_spec(alpha=0.5, kappa=0.2, nu=0.08, psi=0.05):
    return ForwardPowerSpec(
        alpha=alpha,
        kappa_star=DeterministicFn.constant(np.array([kappa, 0.0])),
        nu_star=DeterministicFn.constant(np.array([0.0, nu])),
        psi_hat=DeterministicFn.constant(psi),
    )


# ---------------------------------------------------------------------------
# Ramsey


def test_ramsey_flat_closed_values():
    assert ramsey_flat_closed(0.01, 0.5, 0.02, 0.1) == pytest.approx(0.01625, abs=1e-15)
    assert ramsey_flat_closed(0.02, 0.3, 0.01, 0.0) == pytest.approx(0.023, abs=1e-15)
    assert ramsey_flat_closed(0.0, 0.4, 0.0, 0.2) == pytest.approx(-0.5 * 0.4 * 1.4 * 0.04, abs=1e-15)
    assert ramsey_flat_closed(0.0, 0.4, 0.0, 0.2) < 0  # precautionary effect


def test_ramsey_mc_flat_curve():
    beta, alpha, growth, sigma = 0.01, 0.5, 0.02, 0.1
    target = ramsey_flat_closed(beta, alpha, growth, sigma)
    grid = make_grid(30.0, 120)
    batch = sample_brownian(24601, grid, dim=1, n_paths=100_000)
    c_paths = gbm_consumption_paths(1.0, growth, sigma, grid, batch)
    for tenor in (1.0, 5.0, 30.0):
        rate, se = ramsey_rate_mc(beta, alpha, c_paths, grid, tenor)
        assert abs(rate - target) < 3 * se


def test_ramsey_mc_deterministic_consumption():
    beta, alpha, growth = 0.015, 0.4, 0.02
    grid = make_grid(10.0, 40)
    batch = sample_brownian(1, grid, dim=1, n_paths=100)
    c_paths = gbm_consumption_paths(2.0, growth, 0.0, grid, batch)
    rate, se = ramsey_rate_mc(beta, alpha, c_paths, grid, 10.0)
    assert rate == pytest.approx(beta + alpha * growth, abs=1e-12)
    assert se == pytest.approx(0.0, abs=1e-15)


def test_ramsey_mc_null_case():
    grid = make_grid(5.0, 20)
    batch = sample_brownian(2, grid, dim=1, n_paths=50)
    c_paths = gbm_consumption_paths(1.0, 0.0, 0.0, grid, batch)
    rate, _ = ramsey_rate_mc(0.0, 0.5, c_paths, grid, 5.0)
    assert rate == pytest.approx(0.0, abs=1e-14)


def test_ramsey_curve_spread_statistics():
    grid = make_grid(30.0, 120)
    batch = sample_brownian(24601, grid, dim=1, n_paths=50_000)
    c_paths = gbm_consumption_paths(1.0, 0.02, 0.1, grid, batch)
    report = ramsey_curve_mc(0.01, 0.5, c_paths, grid, [1.0, 2.0, 5.0, 10.0, 30.0])
    assert report.max_spread_t < 4.0
    assert report.curve.roundtrip_error() < 1e-12
    assert report.curve.method == "ramsey_mc"


# ---------------------------------------------------------------------------
# closed-form prices


def test_constant_rate_price():
    market = MarketModel(
        dim=2,
        rate=ConstantRate(0.04),
        risk_premium=DeterministicFn.constant(np.array([0.1, 0.0])),
        subspace=SubspaceR.axes(2, [0]),
    )
    assert zc_price_gaussian(market, None, 0.0, 3.0) == pytest.approx(np.exp(-0.12), rel=1e-14)


def test_gaussian_price_matches_textbook_vasicek():
    # orthogonal premium, nu = 0: the price is the riskless Vasicek bond
    market = incomplete_vasicek_market()
    for tenor in (1.0, 5.0, 10.0):
        ours = zc_price_gaussian(market, None, 0.0, tenor)
        oracle = textbook_vasicek_price(1.0, 0.03, 0.02, 0.03, tenor)
        assert ours == pytest.approx(oracle, rel=1e-10)


def test_gaussian_price_orthogonal_tilt_sign():
    # nu along the rate noise tilts the marginal price by exp(int Gamma . nu):
    # nu = -(1-alpha) Gamma_perp makes the integral negative
    market = incomplete_vasicek_market()
    gamma = market_gamma(market)
    spec = BackwardSpec(
        t_horizon=10.0, alpha=0.5, gamma=gamma, market=market,
        mean_rate=MeanRateCurve.from_vasicek(1.0, 0.03, 0.03),
    )
    nu, _ = solve_backward_vols(spec)
    marginal = zc_price_gaussian(market, nu, 0.0, 10.0)
    neutral = zc_price_gaussian(market, None, 0.0, 10.0)
    tilt_integral, _ = integrate.quad(
        lambda s: (0.02 * (1.0 - np.exp(-(10.0 - s)))) ** 2 * (-0.5), 0.0, 10.0
    )
    assert tilt_integral < 0
    assert marginal < neutral
    assert marginal / neutral == pytest.approx(np.exp(tilt_integral), rel=1e-9)


def test_gamma_market_price_equals_rate_model_price():
    # the two routes to the same log-normal market must price identically
    market = incomplete_vasicek_market()
    gamma = market_gamma(market)
    spec = BackwardSpec(
        t_horizon=10.0, alpha=0.5, gamma=gamma, market=market,
        mean_rate=MeanRateCurve.from_vasicek(1.0, 0.03, 0.03),
    )
    for tenor in (2.0, 7.0):
        a = zc_price_gamma_market(spec, None, tenor)
        b = zc_price_gaussian(market, None, 0.0, tenor)
        assert a == pytest.approx(b, rel=1e-10)


# ---------------------------------------------------------------------------
# Monte Carlo prices


def test_marginal_zc_time_zero_against_gaussian():
    market = incomplete_vasicek_market()
    spec = forward_spec()
    grid = make_grid(10.0, 40)
    batch = sample_brownian(98765, grid, dim=2, n_paths=100_000)
    triple = simulate_optimal(spec, market, grid, batch)
    for tenor in (1.0, 5.0, 10.0):
        k = grid.index_of(tenor)
        price, se = marginal_zc_mc(triple, 0, k)
        closed = zc_price_gaussian(market, spec.nu_star, 0.0, tenor)
        assert abs(price - closed) < 3 * se


def test_marginal_zc_degenerate_cases():
    market = MarketModel(
        dim=2,
        rate=ConstantRate(0.0),
        risk_premium=DeterministicFn.constant(np.zeros(2)),
        subspace=SubspaceR.axes(2, [0]),
    )
    spec = forward_spec(kappa=0.0, nu=0.0, psi=0.03)
    grid = make_grid(4.0, 16)
    batch = sample_brownian(3, grid, dim=2, n_paths=20_000)
    triple = simulate_optimal(spec, market, grid, batch)
    price, se = marginal_zc_mc(triple, 0, grid.index_of(4.0))
    assert price == pytest.approx(1.0, abs=1e-12)  # unit state price
    assert zc_price_mc(triple.state_price.values, 5, 5) == (1.0, 0.0)


def test_nested_conditional_prices_match_state_closed_form():
    market = incomplete_vasicek_market()
    spec = forward_spec()
    grid = make_grid(10.0, 40)
    batch = sample_brownian(1357, grid, dim=2, n_paths=64)
    triple = simulate_optimal(spec, market, grid, batch)
    k_t, k_mat = grid.index_of(2.0), grid.index_of(7.0)
    report = marginal_zc_mc(triple, k_t, k_mat, inner_paths=4096, max_outer=32)
    closed = zc_price_gaussian(market, spec.nu_star, 2.0, 7.0, r_t=report.rate_states)
    z = (report.prices - closed) / report.stderrs
    assert np.max(np.abs(z)) < 4.5
    assert abs(np.mean(z)) < 1.0


def test_complete_market_marginal_equals_risk_neutral():
    # full subspace: no orthogonal direction, the dual optimizer is the
    # minimal density itself and the curves coincide
    market = MarketModel(
        dim=2,
        rate=VasicekRate(a=1.0, b=0.03, sigma=0.02, r0=0.03, w_dir=E1),
        risk_premium=DeterministicFn.constant(np.array([0.05, 0.0])),
        subspace=SubspaceR.full(2),
    )
    spec = ForwardPowerSpec(
        alpha=0.5,
        kappa_star=DeterministicFn.constant(np.array([0.1, 0.05])),
        nu_star=DeterministicFn.zero(2),
        psi_hat=DeterministicFn.constant(0.04),
    )
    grid = make_grid(10.0, 40)
    batch = sample_brownian(11213, grid, dim=2, n_paths=100_000)
    triple = simulate_optimal(spec, market, grid, batch)
    for tenor in (1.0, 5.0, 10.0):
        k = grid.index_of(tenor)
        price, se = marginal_zc_mc(triple, 0, k)
        closed = zc_price_gaussian(market, None, 0.0, tenor)
        assert abs(price - closed) < 4 * se


# ---------------------------------------------------------------------------
# curve construction


def test_curve_from_prices_roundtrip():
    curve = curve_from_prices(np.array([1.0 * np.exp(-0.02 * 10.0)]), np.array([10.0]), method="test")
    assert curve.rates[0] == pytest.approx(0.02, abs=1e-15)
    assert curve.roundtrip_error() < 1e-12

    flat = curve_from_prices(np.array([1.0, 1.0]), np.array([1.0, 2.0]))
    assert np.allclose(flat.rates, 0.0)

    with pytest.raises(ValueError):
        curve_from_prices(np.array([-0.1]), np.array([1.0]))
    with pytest.raises(ValueError):
        curve_from_prices(np.array([0.9, 0.8]), np.array([2.0, 1.0]))


# ---------------------------------------------------------------------------
# HJM


def test_hjm_constant_rate():
    market = MarketModel(
        dim=2,
        rate=ConstantRate(0.03),
        risk_premium=DeterministicFn.constant(np.array([0.1, 0.0])),
        subspace=SubspaceR.axes(2, [0]),
    )
    tenors = np.arange(0.25, 10.01, 0.25)
    report = hjm_forward_rates(
        price_fn=lambda t: float(zc_price_gaussian(market, None, 0.0, t)),
        gamma=None,
        risk_premium=market.risk_premium,
        nu=None,
        expected_rate=lambda t: np.full_like(t, 0.03),
        tenors=tenors,
        dim=2,
    )
    assert np.allclose(report.forward_rates, 0.03, atol=1e-10)
    assert report.max_abs_residual < 1e-10


def test_hjm_vasicek_forward_curve_matches_textbook():
    a, b, sigma, r0 = 1.0, 0.03, 0.02, 0.03
    market = incomplete_vasicek_market(a=a, b=b, sigma=sigma, r0=r0)
    tenors = np.arange(0.25, 10.01, 0.25)
    report = hjm_forward_rates(
        price_fn=lambda t: float(zc_price_gaussian(market, None, 0.0, t)),
        gamma=market_gamma(market),
        risk_premium=market.risk_premium,
        nu=None,
        expected_rate=lambda t: market.rate.expected_rate(t),
        tenors=tenors,
        dim=2,
    )
    oracle = textbook_vasicek_forward(a, b, sigma, r0, report.tenors)
    assert np.max(np.abs(report.forward_rates - oracle)) < 5e-5  # central-difference error
    assert report.max_abs_residual < 1e-3


def test_hjm_synthetic_sqrt_gamma():
    market = incomplete_vasicek_market()
    gamma = SyntheticSqrtGamma(c_r=3e-5, c_perp=6e-5, dir_r=E1, dir_perp=E2)
    spec = BackwardSpec(
        t_horizon=10.0, alpha=0.5, gamma=gamma, market=market, mean_rate=MeanRateCurve.flat(0.03)
    )
    nu, _ = solve_backward_vols(spec)
    tenors = np.arange(0.25, 10.01, 0.25)
    report = hjm_forward_rates(
        price_fn=lambda t: zc_price_gamma_market(spec, nu, t),
        gamma=gamma,
        risk_premium=market.risk_premium,
        nu=nu,
        expected_rate=lambda t: np.full_like(t, 0.03),
        tenors=tenors,
        dim=2,
    )
    assert report.max_abs_residual < 1e-3


def test_hjm_rejects_coarse_grid():
    with pytest.raises(ValueError):
        hjm_forward_rates(
            price_fn=lambda t: np.exp(-0.03 * t),
            gamma=None,
            risk_premium=DeterministicFn.zero(2),
            nu=None,
            expected_rate=lambda t: np.full_like(t, 0.03),
            tenors=np.array([1.0, 2.0]),
            dim=2,
        )


# ---------------------------------------------------------------------------
# long rate


def test_long_rate_vasicek_constant():
    gamma = VasicekGamma(a=1.0, sigma_r=0.02, direction=E2)
    report = long_rate(
        gamma, "forward", 0.5, l0=0.03, t_grid=np.linspace(0, 10, 11),
        risk_premium=DeterministicFn.constant(np.array([0.1, 0.0])),
        subspace=SubspaceR.axes(2, [0]),
    )
    assert report.verdict == "constant"
    assert report.slope == 0.0
    assert np.allclose(report.l_values, 0.03)


def test_long_rate_synthetic_forward_increasing():
    c_perp = 6e-5
    gamma = SyntheticSqrtGamma(c_r=0.0, c_perp=c_perp, dir_r=E1, dir_perp=E2)
    report = long_rate(
        gamma, "forward", 0.5, l0=0.03, t_grid=np.linspace(0, 10, 11),
        risk_premium=DeterministicFn.constant(np.array([0.1, 0.0])),
        subspace=SubspaceR.axes(2, [0]),
    )
    assert report.verdict == "increasing"
    assert report.slope == pytest.approx(c_perp / 2.0, abs=1e-18)


def test_long_rate_synthetic_backward_decreasing_low_risk_aversion():
    c_perp = 6e-5
    gamma = SyntheticSqrtGamma(c_r=0.0, c_perp=c_perp, dir_r=E1, dir_perp=E2)
    report = long_rate(
        gamma, "backward", 0.25, l0=0.03, t_grid=np.linspace(0, 10, 11),
        risk_premium=DeterministicFn.constant(np.array([0.1, 0.0])),
        subspace=SubspaceR.axes(2, [0]),
    )
    assert report.verdict == "decreasing"
    assert report.slope == pytest.approx((2 * 0.25 - 1.0) * c_perp / 2.0, abs=1e-18)


def test_long_rate_backward_half_risk_aversion_constant():
    gamma = SyntheticSqrtGamma(c_r=0.0, c_perp=1e-4, dir_r=E1, dir_perp=E2)
    report = long_rate(
        gamma, "backward", 0.5, l0=0.02, t_grid=np.linspace(0, 5, 6),
        risk_premium=DeterministicFn.zero(2),
        subspace=SubspaceR.axes(2, [0]),
    )
    assert report.verdict == "constant"


def test_long_rate_flags_model_without_limit():
    gamma = CustomGamma(fn=lambda s, t: np.outer((t - s) ** 2, E2), dim=2)
    with pytest.raises(ValueError):
        long_rate(
            gamma, "forward", 0.5, l0=0.03, t_grid=np.linspace(0, 5, 6),
            risk_premium=DeterministicFn.zero(2),
        )


# ---------------------------------------------------------------------------
# Davis pricing


def test_davis_unit_payoff_equals_zero_coupon():
    market = incomplete_vasicek_market()
    spec = forward_spec()
    grid = make_grid(5.0, 20)
    batch = sample_brownian(2468, grid, dim=2, n_paths=50_000)
    triple = simulate_optimal(spec, market, grid, batch)
    k = grid.index_of(5.0)
    zc, _ = marginal_zc_mc(triple, 0, k)
    unit = davis_price(np.ones(triple.n_paths), triple.state_price.values, k)
    assert unit.value == pytest.approx(zc, rel=1e-12)


def test_davis_linearity_exact():
    market = incomplete_vasicek_market()
    spec = forward_spec()
    grid = make_grid(5.0, 20)
    batch = sample_brownian(2469, grid, dim=2, n_paths=100_000)
    triple = simulate_optimal(spec, market, grid, batch)
    k = grid.index_of(5.0)
    y = triple.state_price.values
    x_t = triple.wealth.values[:, k]
    zeta1 = np.maximum(x_t - 0.9, 0.0)
    zeta2 = np.ones_like(x_t)

    p1 = davis_price(zeta1, y, k)
    p2 = davis_price(zeta2, y, k)
    combo = davis_price(3.0 * zeta1 + 0.5 * zeta2, y, k)
    assert abs(combo.value - (3.0 * p1.value + 0.5 * p2.value)) <= 1e-15 * max(abs(combo.value), 1.0)

    scaled = davis_price(7.0 * zeta1, y, k)
    assert abs(scaled.value - 7.0 * p1.value) <= 1e-15 * max(abs(scaled.value), 1.0)
    assert p1.linearity_residual <= 1e-15
    assert p1.quantity_derivative == p1.value


def test_davis_rejects_negative_payoff():
    with pytest.raises(ValueError):
        davis_price(np.array([-1.0]), np.ones((1, 2)), 1)


def test_davis_call_against_two_lognormal_oracle():
    # constant coefficients: (ln X_T, ln Y_T) is exactly Gaussian, so the
    # call price E[(X_T - K)^+ Y_T] has a closed form via a measure tilt;
    # coded here independently with the normal cdf
    from scipy.stats import norm

    r, eta0, alpha = 0.03, 0.1, 0.5
    kappa0, nu0, psi = 0.25, 0.08, 0.04
    horizon, strike = 4.0, 0.9
    market = MarketModel(
        dim=2,
        rate=ConstantRate(r),
        risk_premium=DeterministicFn.constant(np.array([eta0, 0.0])),
        subspace=SubspaceR.axes(2, [0]),
    )
    spec = ForwardPowerSpec(
        alpha=alpha,
        kappa_star=DeterministicFn.constant(np.array([kappa0, 0.0])),
        nu_star=DeterministicFn.constant(np.array([0.0, nu0])),
        psi_hat=DeterministicFn.constant(psi),
    )
    grid = make_grid(horizon, 16)
    batch = sample_brownian(13579, grid, dim=2, n_paths=200_000)
    triple = simulate_optimal(spec, market, grid, batch)
    k = grid.index_of(horizon)

    mu_u = (r - psi + kappa0 * eta0 - 0.5 * kappa0**2) * horizon
    s2_u = kappa0**2 * horizon
    mu_v = (-r - 0.5 * (nu0**2 + eta0**2)) * horizon
    s2_v = (nu0**2 + eta0**2) * horizon
    cov_uv = kappa0 * (-eta0) * horizon  # kappa . (nu - eta)
    mu_tilt = mu_u + cov_uv
    s_u = np.sqrt(s2_u)
    d2 = (mu_tilt - np.log(strike)) / s_u
    d1 = d2 + s_u
    oracle = np.exp(mu_v + 0.5 * s2_v) * (
        np.exp(mu_tilt + 0.5 * s2_u) * norm.cdf(d1) - strike * norm.cdf(d2)
    )

    zeta = np.maximum(triple.wealth.values[:, k] - strike, 0.0)
    price = davis_price(zeta, triple.state_price.values, k)
    assert abs(price.value - oracle) < 3 * price.stderr


def test_davis_conditional_unit_payoff_matches_nested_zc():
    # with zeta = 1 the conditional Davis price must reproduce the nested
    # zero-coupon estimate path for path (identical inner streams)
    market = incomplete_vasicek_market()
    spec = forward_spec()
    grid = make_grid(10.0, 40)
    batch = sample_brownian(2470, grid, dim=2, n_paths=32)
    triple = simulate_optimal(spec, market, grid, batch)
    from forward_yield import davis_price_conditional

    k_t, k_mat = grid.index_of(2.0), grid.index_of(6.0)
    davis = davis_price_conditional(lambda r, x, y: np.ones_like(r), triple, k_t, k_mat,
                                    inner_paths=512, max_outer=16)
    zc = marginal_zc_mc(triple, k_t, k_mat, inner_paths=512, max_outer=16)
    assert np.array_equal(davis.prices, zc.prices)
    assert np.array_equal(davis.rate_states, zc.rate_states)


def test_davis_conditional_call_brackets_state_dependence():
    market = incomplete_vasicek_market()
    spec = forward_spec()
    grid = make_grid(10.0, 40)
    batch = sample_brownian(2471, grid, dim=2, n_paths=64)
    triple = simulate_optimal(spec, market, grid, batch)
    from forward_yield import davis_price_conditional

    k_t, k_mat = grid.index_of(3.0), grid.index_of(8.0)
    report = davis_price_conditional(
        lambda r, x, y: np.maximum(x - 1.0, 0.0), triple, k_t, k_mat, inner_paths=1024, max_outer=24
    )
    assert np.all(report.prices >= 0.0)
    # prices must genuinely vary with the date-t state
    assert report.prices.std() > 0.0


def test_davis_capitalization_time_consistency():
    # price a date-T claim directly and through its horizon capitalization in
    # the consumption-free optimal wealth; both are the same linear price
    market = incomplete_vasicek_market()
    gamma = market_gamma(market)
    spec = BackwardSpec(
        t_horizon=10.0, alpha=0.5, gamma=gamma, market=market,
        mean_rate=MeanRateCurve.from_vasicek(1.0, 0.03, 0.03),
    )
    grid = make_grid(10.0, 40)
    batch = sample_brownian(97531, grid, dim=2, n_paths=100_000)
    paths = backward_optimal_paths(spec, grid, batch)
    k_mat, k_h = grid.index_of(5.0), grid.index_of(10.0)
    zeta = np.maximum(paths.x[:, k_mat] - 0.8, 0.0)
    p_direct, p_cap, t_stat = davis_time_consistency(zeta, paths.y, paths.x, k_mat, k_h)
    assert abs(t_stat) < 3.0
    assert p_direct == pytest.approx(p_cap, rel=0.02)


# ---------------------------------------------------------------------------
# pathwise Ramsey


def test_pathwise_ramsey_forward():
    market = incomplete_vasicek_market()
    spec = forward_spec()
    grid = make_grid(5.0, 20)
    batch = sample_brownian(86420, grid, dim=2, n_paths=2_000)
    triple = simulate_optimal(spec, market, grid, batch)
    marg = forward_marginal_consumption_paths(triple, x0=2.0)
    assert pathwise_ramsey_report(triple.state_price.values, marg) < 1e-9
    # t = 0 residual is exactly zero by normalization
    assert np.allclose(marg[:, 0] / marg[:, 0], 1.0)


def test_pathwise_ramsey_backward():
    market = incomplete_vasicek_market()
    gamma = market_gamma(market)
    spec = BackwardSpec(
        t_horizon=10.0, alpha=0.5, gamma=gamma, market=market,
        mean_rate=MeanRateCurve.from_vasicek(1.0, 0.03, 0.03),
    )
    grid = make_grid(10.0, 40)
    batch = sample_brownian(86421, grid, dim=2, n_paths=2_000)
    paths = backward_optimal_paths(spec, grid, batch)
    marg = backward_marginal_wealth_paths(paths.x, paths.y, spec.alpha, x0=1.5)
    assert pathwise_ramsey_report(paths.y, marg) < 1e-9
