"""Experiment configuration: parsing, validation, and object construction.

Configs are nested mappings read from JSON or YAML.  Field names are part of
the output contract: market (dim, rate, eta_r, subspace), spec (forward or
backward parameters), simulation (horizon, n_steps, n_paths, seed,
inner_paths), output (tenors, path, format), plus optional ramsey, long_rate,
davis, and verify blocks.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .backward import BackwardSpec, MeanRateCurve, SyntheticSqrtGamma, VasicekGamma
from .errors import ConfigError
from .forward import ForwardPowerSpec
from .grids import DeterministicFn, TimeGrid, make_grid
from .market import MarketModel
from .rates import ConstantRate, VasicekRate
from .subspace import SubspaceR

DEFAULT_CONFIG: dict[str, Any] = {
    "market": {
        "dim": 2,
        "rate": {"model": "vasicek", "a": 1.0, "b": 0.03, "sigma_r": 0.02, "r0": 0.03, "w_dir": [0.0, 1.0]},
        "eta_r": [0.15, 0.0],
        "subspace": {"basis": [[1.0, 0.0]]},
    },
    "spec": {
        "kind": "forward",
        "alpha": 0.5,
        "kappa_star": [0.3, 0.0],
        "nu_star": [0.0, 0.1],
        "psi_hat": 0.1,
        "t_horizon": 10.0,
        "t_horizons": [10.0, 50.0],
        "t_common": 5.0,
        "gamma": {"model": "vasicek_orthogonal", "a": 1.0, "sigma_r": 0.02},
    },
    "simulation": {
        "horizon": 10.0,
        "n_steps": 40,
        "n_paths": 100_000,
        "seed": 20240901,
        "inner_paths": 1024,
    },
    "output": {"tenors": [1.0, 2.0, 5.0, 10.0], "path": "out", "format": "csv"},
    "ramsey": {"beta": 0.01, "alpha": 0.5, "growth": 0.02, "sigma": 0.1, "tenors": [1.0, 2.0, 5.0, 10.0, 30.0]},
    "long_rate": {"l0": 0.03, "alpha_backward": 0.25, "t_max": 10.0, "probes": [50.0, 100.0, 200.0]},
    "davis": {"payoff": {"kind": "call_on_wealth", "strike": 0.9}, "maturity": 5.0},
    "verify": {"identity_tol": 1e-9, "stat_band": 4.0},
}


def _fail(field: str, message: str, value=None) -> ConfigError:
    suffix = f", got {value!r}" if value is not None else ""
    return ConfigError(f"{field}: {message}{suffix}")


def load_config(path: str | Path | None) -> dict[str, Any]:
    """Read a JSON/YAML config and merge it over the defaults."""
    merged = copy.deepcopy(DEFAULT_CONFIG)
    if path is None:
        return merged
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    try:
        if path.suffix.lower() == ".json":
            user = json.loads(text)
        else:
            user = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"config file {path} is not valid JSON/YAML: {exc}") from exc
    if not isinstance(user, Mapping):
        raise ConfigError(f"config file {path} must contain a mapping at the top level")
    _deep_merge(merged, user)
    return merged


def _deep_merge(base: dict, extra: Mapping) -> None:
    for key, value in extra.items():
        if isinstance(value, Mapping) and isinstance(base.get(key), dict):
            _deep_merge(base[key], value)
        else:
            base[key] = copy.deepcopy(value)


def config_hash(cfg: Mapping[str, Any]) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=float)
    return hashlib.sha256(canonical.encode()).hexdigest()


# ---------------------------------------------------------------------------
# block validation and object construction


def _require(cfg: Mapping, field: str):
    node: Any = cfg
    for part in field.split("."):
        if not isinstance(node, Mapping) or part not in node:
            raise _fail(field, "required field is missing")
        node = node[part]
    return node


def _positive_number(value, field: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
        raise _fail(field, "must be a positive real", value)
    return float(value)


def _nonnegative_number(value, field: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value < 0:
        raise _fail(field, "must be a nonnegative real", value)
    return float(value)


def _alpha(value, field: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not 0.0 < value < 1.0:
        raise _fail(field, "must lie in the open interval (0, 1)", value)
    return float(value)


def _vector(value, dim: int, field: str) -> np.ndarray:
    try:
        v = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise _fail(field, f"must be a vector of {dim} reals", value)
    if v.shape != (dim,) or not np.all(np.isfinite(v)):
        raise _fail(field, f"must be a finite vector of length {dim}", value)
    return v


def time_function(value, dim: int | None, field: str) -> DeterministicFn:
    """Scalar/vector constants or {times, values} tables, per the config contract."""
    if isinstance(value, Mapping):
        if "times" not in value or "values" not in value:
            raise _fail(field, "table form needs 'times' and 'values'")
        try:
            return DeterministicFn.table(np.asarray(value["times"], dtype=float), np.asarray(value["values"], dtype=float))
        except ValueError as exc:
            raise _fail(field, str(exc))
    if dim is None:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise _fail(field, "must be a real number or a table", value)
        return DeterministicFn.constant(float(value))
    return DeterministicFn.constant(_vector(value, dim, field))


def build_grid(cfg: Mapping[str, Any]) -> TimeGrid:
    horizon = _positive_number(_require(cfg, "simulation.horizon"), "simulation.horizon")
    n_steps = _require(cfg, "simulation.n_steps")
    if not isinstance(n_steps, int) or isinstance(n_steps, bool) or n_steps < 1:
        raise _fail("simulation.n_steps", "must be a positive integer", n_steps)
    return make_grid(horizon, n_steps)


def simulation_params(cfg: Mapping[str, Any]) -> tuple[int, int, int]:
    n_paths = _require(cfg, "simulation.n_paths")
    if not isinstance(n_paths, int) or isinstance(n_paths, bool) or n_paths < 1:
        raise _fail("simulation.n_paths", "must be a positive integer", n_paths)
    seed = _require(cfg, "simulation.seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise _fail("simulation.seed", "must be an unsigned 64-bit integer", seed)
    inner = cfg.get("simulation", {}).get("inner_paths", 1024)
    if not isinstance(inner, int) or isinstance(inner, bool) or inner < 2:
        raise _fail("simulation.inner_paths", "must be an integer >= 2", inner)
    return n_paths, seed, inner


def build_market(cfg: Mapping[str, Any]) -> MarketModel:
    dim = _require(cfg, "market.dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise _fail("market.dim", "must be a positive integer", dim)

    rate_cfg = _require(cfg, "market.rate")
    model = rate_cfg.get("model")
    if model == "constant":
        rate = ConstantRate(rate=float(_require(cfg, "market.rate.r")))
    elif model == "vasicek":
        try:
            rate = VasicekRate(
                a=_positive_number(_require(cfg, "market.rate.a"), "market.rate.a"),
                b=float(_require(cfg, "market.rate.b")),
                sigma=_nonnegative_number(_require(cfg, "market.rate.sigma_r"), "market.rate.sigma_r"),
                r0=float(_require(cfg, "market.rate.r0")),
                w_dir=_vector(_require(cfg, "market.rate.w_dir"), dim, "market.rate.w_dir"),
            )
        except ValueError as exc:
            raise _fail("market.rate", str(exc))
    else:
        raise _fail("market.rate.model", "must be 'constant' or 'vasicek'", model)

    basis = _require(cfg, "market.subspace.basis")
    try:
        rows = np.asarray(basis, dtype=float)
        if rows.size == 0:
            subspace = SubspaceR.trivial(dim)
        else:
            subspace = SubspaceR(rows, dim)
    except ValueError as exc:
        raise _fail("market.subspace.basis", str(exc))

    eta = time_function(_require(cfg, "market.eta_r"), dim, "market.eta_r")
    market = MarketModel(dim=dim, rate=rate, risk_premium=eta, subspace=subspace)
    return market


def build_forward_spec(cfg: Mapping[str, Any], market: MarketModel) -> ForwardPowerSpec:
    alpha = _alpha(_require(cfg, "spec.alpha"), "spec.alpha")
    spec = ForwardPowerSpec(
        alpha=alpha,
        kappa_star=time_function(_require(cfg, "spec.kappa_star"), market.dim, "spec.kappa_star"),
        nu_star=time_function(_require(cfg, "spec.nu_star"), market.dim, "spec.nu_star"),
        psi_hat=time_function(_require(cfg, "spec.psi_hat"), None, "spec.psi_hat"),
    )
    return spec


def build_gamma(cfg: Mapping[str, Any], market: MarketModel):
    gamma_cfg = _require(cfg, "spec.gamma")
    model = gamma_cfg.get("model")
    if model == "vasicek_orthogonal":
        basis = market.subspace.basis
        comp = np.eye(market.dim) - basis.T @ basis
        norms = np.linalg.norm(comp, axis=1)
        if norms.max() < 1e-12:
            raise _fail("spec.gamma", "vasicek_orthogonal needs a market with an unhedgeable direction")
        direction = comp[int(np.argmax(norms))]
        direction /= np.linalg.norm(direction)
        return VasicekGamma(
            a=_positive_number(gamma_cfg.get("a"), "spec.gamma.a"),
            sigma_r=_nonnegative_number(gamma_cfg.get("sigma_r"), "spec.gamma.sigma_r"),
            direction=direction,
        )
    if model == "synthetic_sqrt":
        basis = market.subspace.basis
        if basis.shape[0] == 0:
            raise _fail("spec.gamma", "synthetic_sqrt needs a nontrivial subspace")
        comp = np.eye(market.dim) - basis.T @ basis
        norms = np.linalg.norm(comp, axis=1)
        if norms.max() < 1e-12:
            raise _fail("spec.gamma", "synthetic_sqrt needs an unhedgeable direction")
        dir_perp = comp[int(np.argmax(norms))]
        dir_perp /= np.linalg.norm(dir_perp)
        return SyntheticSqrtGamma(
            c_r=_nonnegative_number(gamma_cfg.get("c_r", 0.0), "spec.gamma.c_r"),
            c_perp=_nonnegative_number(gamma_cfg.get("c_perp", 0.0), "spec.gamma.c_perp"),
            dir_r=basis[0],
            dir_perp=dir_perp,
        )
    raise _fail("spec.gamma.model", "must be 'vasicek_orthogonal' or 'synthetic_sqrt'", model)


def build_backward_spec(cfg: Mapping[str, Any], market: MarketModel, t_horizon: float | None = None) -> BackwardSpec:
    alpha = _alpha(_require(cfg, "spec.alpha"), "spec.alpha")
    horizon = t_horizon if t_horizon is not None else _positive_number(_require(cfg, "spec.t_horizon"), "spec.t_horizon")
    gamma = build_gamma(cfg, market)
    mean_rate = MeanRateCurve.from_rate_model(market.rate)
    return BackwardSpec(t_horizon=horizon, alpha=alpha, gamma=gamma, market=market, mean_rate=mean_rate)


def output_params(cfg: Mapping[str, Any]) -> tuple[list[float], str, str]:
    tenors = _require(cfg, "output.tenors")
    try:
        vals = [float(t) for t in tenors]
    except (TypeError, ValueError):
        raise _fail("output.tenors", "must be a list of positive reals", tenors)
    if not vals or any(t <= 0 for t in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
        raise _fail("output.tenors", "must be strictly increasing positive reals", tenors)
    fmt = cfg.get("output", {}).get("format", "csv")
    if fmt not in ("csv", "json"):
        raise _fail("output.format", "must be 'csv' or 'json'", fmt)
    out = str(cfg.get("output", {}).get("path", "out"))
    return vals, out, fmt


@dataclass(frozen=True)
class VerifyThresholds:
    identity_tol: float
    stat_band: float


def verify_thresholds(cfg: Mapping[str, Any]) -> VerifyThresholds:
    block = cfg.get("verify", {})
    tol = block.get("identity_tol", 1e-9)
    band = block.get("stat_band", 4.0)
    return VerifyThresholds(
        identity_tol=_positive_number(tol, "verify.identity_tol"),
        stat_band=_positive_number(band, "verify.stat_band"),
    )
