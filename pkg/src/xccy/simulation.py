"""Correlated path generation under the domestic martingale measure.

Assets and FX rates are lognormal with piecewise-constant coefficients, so
each step is the exact transition density: state * exp(integrated drift -
sigma^2 dt / 2 + sigma sqrt(dt) xi). Under the domestic measure an asset
drifts at its repo rate minus its dividend yield, with a quanto correction
-rho * sigma_S * sigma_X for assets quoted in a foreign currency; an FX rate
drifts at the unsecured rate differential. Those drifts are what make the
discounted funding-gain process of every asset, and X * B_f / B_dom for every
currency, empirical martingales (the diagnostics module certifies this).

Randomness is counter-based (see :mod:`xccy.rng`): a scenario is a pure
function of (model, grid, n_paths, seed) and is assembled identically for any
worker count.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .curves import account_values_on_grid
from .errors import ConfigError, DomesticPairRequested, EmptyGrid, ZeroPaths
from .model import AssetSpec, ValidatedModel, fx_label
from .rng import normal_block

GRID_SNAP_TOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Strictly ascending times in years, starting at 0."""

    times: np.ndarray

    def __init__(self, times):
        times = np.asarray(times, dtype=float)
        if times.size < 2:
            raise EmptyGrid("grid needs at least two times")
        if times[0] != 0.0:
            raise EmptyGrid(f"grid must start at 0, got {times[0]}")
        if np.any(np.diff(times) <= 0):
            raise EmptyGrid("grid times must be strictly ascending")
        object.__setattr__(self, "times", times)

    @classmethod
    def regular(cls, horizon: float, n_steps: int, include=()) -> "TimeGrid":
        """Uniform grid with extra dates snapped in exactly.

        A date within ``GRID_SNAP_TOL`` of an existing node replaces that
        node, so contract flow dates always appear verbatim on the grid.
        """
        if horizon <= 0 or n_steps < 1:
            raise EmptyGrid(f"bad horizon/steps: {horizon}, {n_steps}")
        times = list(np.linspace(0.0, horizon, n_steps + 1))
        for t in include:
            t = float(t)
            if t < 0 or t > horizon + GRID_SNAP_TOL:
                raise ConfigError(f"date {t} outside [0, {horizon}]")
            j = int(np.argmin(np.abs(np.asarray(times) - t)))
            if abs(times[j] - t) <= GRID_SNAP_TOL:
                times[j] = t
            else:
                times.append(t)
        return cls(np.array(sorted(times)))

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    def index_of(self, t: float) -> int:
        j = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[j] - t) > GRID_SNAP_TOL:
            raise ConfigError(f"time {t} is not a grid node")
        return j


@dataclass(frozen=True)
class ScenarioSet:
    """Simulated paths plus the deterministic cash accounts on the grid.

    ``asset_paths[label]`` and ``fx_paths[currency]`` hold (n_paths, n_times)
    arrays; ``account_values[(role, currency)]`` holds the deterministic cash
    account B(t) on the grid. The domestic FX path is identically one and is
    served by :meth:`fx` without being stored.
    """

    model: ValidatedModel
    grid: TimeGrid
    n_paths: int
    seed: int
    asset_paths: dict[str, np.ndarray]
    fx_paths: dict[str, np.ndarray]
    account_values: dict[tuple[str, str], np.ndarray]
    measure_tag: str = "qe"
    drift_shift: dict[str, float] = field(default_factory=dict)

    def fx(self, currency: str) -> np.ndarray:
        if currency == self.model.domestic:
            return np.ones((self.n_paths, len(self.grid.times)))
        return self.fx_paths[currency]

    def asset(self, label: str) -> np.ndarray:
        return self.asset_paths[label]

    def account(self, currency: str, role: str = "unsecured") -> np.ndarray:
        key = (role, currency)
        if key not in self.account_values:
            raise ConfigError(f"account {key} not materialized on scenario")
        return self.account_values[key]


def qe_asset_drift(model: ValidatedModel, asset: AssetSpec, t) -> float | np.ndarray:
    """Drift of the asset spot under the domestic martingale measure.

    Domestic assets: repo rate minus dividend yield. Foreign assets get the
    additional quanto correction -rho(S, X) * sigma_S * sigma_X.
    """
    base = asset.repo_rate.rate(t) - asset.dividend_yield.rate(t)
    if asset.currency == model.domestic:
        return base
    fx = model.fx_spec(asset.currency)
    rho = _pair_correlation(model, asset.label, fx_label(asset.currency))
    return base - rho * asset.sigma * fx.sigma


def qe_fx_drift(model: ValidatedModel, k1: str, t) -> float | np.ndarray:
    """Drift of the FX rate (domestic per 1 unit of k1): unsecured differential."""
    if k1 == model.domestic:
        raise DomesticPairRequested(k1)
    return model.curve(model.domestic, "unsecured").rate(t) - model.curve(k1, "unsecured").rate(t)


def _pair_correlation(model: ValidatedModel, label_a: str, label_b: str) -> float:
    ia = model.driver_labels.index(label_a)
    ib = model.driver_labels.index(label_b)
    return float(model.correlation.matrix[ia, ib])


def _drift_integrals(
    model: ValidatedModel,
    grid: TimeGrid,
    drift_shift: dict[str, float],
    physical: bool = False,
) -> np.ndarray:
    """Integrated drift per (driver, step), exact for piecewise-constant rates.

    With ``physical=True`` a driver with a configured constant drift uses it
    outright instead of the martingale-measure drift.
    """
    times = grid.times
    out = np.zeros((len(model.driver_labels), grid.n_steps))
    for d, label in enumerate(model.driver_labels):
        mu = (model.fx_spec(label[3:]) if label.startswith("fx:") else model.asset(label)).mu
        if physical and mu is not None:
            out[d, :] = mu * grid.dt
        elif label.startswith("fx:"):
            cur = label[3:]
            r_e = model.curve(model.domestic, "unsecured")
            r_f = model.curve(cur, "unsecured")
            for j in range(grid.n_steps):
                out[d, j] = r_e.integral(times[j], times[j + 1]) - r_f.integral(times[j], times[j + 1])
        else:
            a = model.asset(label)
            quanto = 0.0
            if a.currency != model.domestic:
                fx = model.fx_spec(a.currency)
                quanto = _pair_correlation(model, a.label, fx_label(a.currency)) * a.sigma * fx.sigma
            for j in range(grid.n_steps):
                out[d, j] = (
                    a.repo_rate.integral(times[j], times[j + 1])
                    - a.dividend_yield.integral(times[j], times[j + 1])
                    - quanto * (times[j + 1] - times[j])
                )
        shift = drift_shift.get(label, 0.0)
        if shift:
            out[d, :] += shift * grid.dt
    return out


def _simulate_block(
    model: ValidatedModel,
    grid: TimeGrid,
    path_indices: np.ndarray,
    seed: int,
    drift_int: np.ndarray,
    sigmas: np.ndarray,
    x0: np.ndarray,
) -> np.ndarray:
    """Paths for one block, shape (n_block, n_times, n_drivers)."""
    n_steps = grid.n_steps
    n_drivers = len(model.driver_labels)
    z = normal_block(seed, path_indices, n_steps, n_drivers)
    # correlate by explicit fixed-order accumulation; result does not depend on
    # block size the way a BLAS matmul kernel choice might
    mix = model.mixing
    zc = np.zeros_like(z)
    for d in range(n_drivers):
        acc = zc[:, :, d]
        for k in range(n_drivers):
            c = mix[d, k]
            if c != 0.0:
                acc += c * z[:, :, k]
    dt = grid.dt
    out = np.empty((len(path_indices), n_steps + 1, n_drivers))
    out[:, 0, :] = x0
    for j in range(n_steps):
        step = drift_int[:, j] - 0.5 * sigmas**2 * dt[j] + sigmas * np.sqrt(dt[j]) * zc[:, j, :]
        out[:, j + 1, :] = out[:, j, :] * np.exp(step)
    return out


def simulate(
    model: ValidatedModel,
    grid: TimeGrid,
    n_paths: int,
    seed: int,
    measure: str = "qe",
    drift_shift: dict[str, float] | None = None,
    n_workers: int = 1,
) -> ScenarioSet:
    """Generate a ScenarioSet.

    ``measure="p"`` uses the configured physical drifts (where given) instead
    of the martingale-measure drifts; ``drift_shift`` adds a constant per-year
    drift bump to named drivers. Both exist for diagnostics negative controls;
    pricing requires the default measure.
    """
    if n_paths < 1:
        raise ZeroPaths(f"n_paths={n_paths}")
    drift_shift = dict(drift_shift or {})
    if measure not in ("qe", "p"):
        raise ConfigError(f"unknown measure {measure!r}")
    drift_int = _drift_integrals(model, grid, drift_shift, physical=measure == "p")
    sigmas = np.array(
        [
            model.fx_spec(lab[3:]).sigma if lab.startswith("fx:") else model.asset(lab).sigma
            for lab in model.driver_labels
        ]
    )
    x0 = np.array(
        [
            model.fx_spec(lab[3:]).x0 if lab.startswith("fx:") else model.asset(lab).s0
            for lab in model.driver_labels
        ]
    )

    blocks = np.array_split(np.arange(n_paths, dtype=np.uint64), max(1, int(n_workers)))
    blocks = [b for b in blocks if b.size]
    if len(blocks) == 1:
        parts = [_simulate_block(model, grid, blocks[0], seed, drift_int, sigmas, x0)]
    else:
        with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
            parts = list(
                pool.map(lambda b: _simulate_block(model, grid, b, seed, drift_int, sigmas, x0), blocks)
            )
    paths = np.concatenate(parts, axis=0) if len(parts) > 1 else parts[0]

    asset_paths = {}
    fx_paths = {}
    for d, label in enumerate(model.driver_labels):
        if label.startswith("fx:"):
            fx_paths[label[3:]] = paths[:, :, d]
        else:
            asset_paths[label] = paths[:, :, d]

    account_values: dict[tuple[str, str], np.ndarray] = {}
    for cur in model.currency_names:
        account_values[("unsecured", cur)] = account_values_on_grid(
            model.curve(cur, "unsecured"), grid.times
        )
    for a in model.assets:
        account_values[("repo", a.label)] = account_values_on_grid(a.repo_rate, grid.times)

    tag = "qe" if measure == "qe" and not drift_shift else "p"
    return ScenarioSet(
        model=model,
        grid=grid,
        n_paths=n_paths,
        seed=seed,
        asset_paths=asset_paths,
        fx_paths=fx_paths,
        account_values=account_values,
        measure_tag=tag,
        drift_shift=drift_shift,
    )


def warn_correlated_collateral_asset(model: ValidatedModel, label: str) -> None:
    """Warn when a collateral asset is correlated with any other driver."""
    i = model.driver_labels.index(label)
    row = np.delete(model.correlation.matrix[i], i)
    if np.any(np.abs(row) > 1e-12):
        warnings.warn(
            f"collateral asset {label!r} is correlated with the trading portfolio "
            f"(max |rho| = {np.max(np.abs(row)):.3f})",
            stacklevel=2,
        )


def dump_paths_csv(scenario: ScenarioSet, path: str) -> None:
    """Columnar dump: path_id, time, driver_label, value."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("path_id,time,driver_label,value\n")
        times = [float(t) for t in scenario.grid.times]
        for label in scenario.model.driver_labels:
            series = (
                scenario.fx_paths[label[3:]] if label.startswith("fx:") else scenario.asset_paths[label]
            )
            for p in range(scenario.n_paths):
                for j, t in enumerate(times):
                    fh.write(f"{p},{t!r},{label},{float(series[p, j])!r}\n")
