"""Ex-dividend prices of collateralized contracts at inception.

Two routes:

* ``price_exogenous``: Monte Carlo expectation of minus the discounted total
  stream (contract flows plus the convention-specific collateral carry, with
  the FX exposure replaced by its drift-equivalent form).
* ``price_fully_collateralized``: closed form for perfectly collateralized
  claims: flows discounted at the domestic collateral rate plus the
  cross-currency basis of the collateral currency, with foreign flows at the
  unsecured-differential FX forward.

Sign convention: a positive price is received by the hedger at inception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .collateral import CollateralPath, CollateralSpec, carry_roles
from .contracts import Contract
from .errors import (
    AsymmetricCollateralRates,
    ConfigError,
    EndogenousSpecPassed,
    ScenarioMeasureMismatch,
)
from .model import ValidatedModel, cross_currency_basis_integral
from .simulation import ScenarioSet
from .wealth import discounted_flows


@dataclass(frozen=True)
class PriceReport:
    """Point estimate with its decomposition into contractual and collateral legs."""

    price: float
    std_error: float
    leg_contractual: float
    leg_collateral: float
    n_paths: int
    seed: int
    convention: str
    k2: str
    k3: str

    def to_dict(self) -> dict:
        return {
            "price": self.price,
            "std_error": self.std_error,
            "leg_contractual": self.leg_contractual,
            "leg_collateral": self.leg_collateral,
            "n_paths": self.n_paths,
            "seed": self.seed,
            "convention": self.convention,
            "k2": self.k2,
            "k3": self.k3,
        }


def fx_forward_factor(model: ValidatedModel, k2: str, t0: float, t1: float) -> float:
    """Growth factor of the FX forward between t0 and t1: exp of the unsecured differential."""
    if k2 == model.domestic:
        return 1.0
    return math.exp(
        model.curve(model.domestic, "unsecured").integral(t0, t1) - model.curve(k2, "unsecured").integral(t0, t1)
    )


def full_collateral_discount_factor(model: ValidatedModel, k3: str, t0: float, t1: float) -> float:
    """exp(-integral of (domestic collateral rate + cross-currency basis of k3))."""
    rc_e = model.curve(model.domestic, "collateral_lend").integral(t0, t1)
    q = cross_currency_basis_integral(model, k3, t0, t1)
    return math.exp(-(rc_e + q))


def _require_symmetric(model: ValidatedModel, currency: str) -> None:
    if not model.has_symmetric_collateral_rates(currency):
        raise AsymmetricCollateralRates(
            f"closed-form pricing needs collateral borrow == lend for {currency!r}"
        )


def price_fully_collateralized(
    model: ValidatedModel, contract: Contract, k3: str, t: float = 0.0
) -> float:
    """Exact price of the contract under continuous full collateralization in k3.

    Requires symmetric collateral rates (borrow == lend) for the domestic and
    collateral currencies; deterministic rates make the result free of Monte
    Carlo error.
    """
    if t != 0.0:
        raise ConfigError("closed-form pricing is exposed at t=0 only")
    _require_symmetric(model, model.domestic)
    _require_symmetric(model, k3)
    x0 = 1.0 if contract.native_currency == model.domestic else model.fx_spec(contract.native_currency).x0
    total = 0.0
    for t_j, amount in contract.flows:
        if t_j <= t:
            continue
        total += (
            amount
            * full_collateral_discount_factor(model, k3, t, t_j)
            * x0
            * fx_forward_factor(model, contract.native_currency, t, t_j)
        )
    return -total


def expected_discounted_flows(model: ValidatedModel, contract: Contract) -> float:
    """Deterministic-rate expectation of the discounted contractual flows.

    E[sum a_j X(t_j)/B_dom(t_j)] = sum a_j X_0 / B_k2(t_j), by the FX
    martingale property. Used as the control-variate mean.
    """
    x0 = 1.0 if contract.native_currency == model.domestic else model.fx_spec(contract.native_currency).x0
    b_k2 = model.curve(contract.native_currency, "unsecured")
    return float(sum(a * x0 * math.exp(-b_k2.integral(0.0, t)) for t, a in contract.flows))


def _discounted_spread_weight(plus_curve, minus_curve, inner_curve, t0: float, t1: float) -> float:
    """Exact integral of (plus - minus)(u) * exp(-int_{t0}^{u} inner) over [t0, t1].

    All three curves are piecewise constant, so the integrand is piecewise
    exponential and integrates in closed form piece by piece.
    """
    knots = np.concatenate([plus_curve.knots, minus_curve.knots, inner_curve.knots])
    edges = np.unique(np.concatenate([[t0], knots[(knots > t0) & (knots < t1)], [t1]]))
    disc = 1.0
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        g = plus_curve.rate(mid) - minus_curve.rate(mid)
        r = inner_curve.rate(mid)
        width = b - a
        rw = r * width
        piece = width if rw == 0.0 else -math.expm1(-rw) / r
        total += disc * g * piece
        disc *= math.exp(-rw)
    return total


def _collateral_leg_weights(model: ValidatedModel, spec: CollateralSpec, times: np.ndarray):
    """Per-interval weights for the received carry, posted carry and FX term.

    Within each interval the stochastic factor C * X / B_dom is frozen at the
    left endpoint and the remaining deterministic variation, including the FX
    forward drift against domestic discounting, integrates exactly to an
    inner discount at the collateral currency's unsecured rate. Deterministic
    collateral expectations therefore carry no time-stepping bias.
    """
    e = model.domestic
    recv_kind, recv_role = carry_roles(spec)[0]
    post_kind, post_role = carry_roles(spec)[1]
    recv_curve = model.curve(e if recv_kind == "domestic" else spec.currency, recv_role)
    post_curve = model.curve(e if post_kind == "domestic" else spec.currency, post_role)
    borrow = model.curve(spec.currency, "collateral_borrow")
    lend = model.curve(spec.currency, "collateral_lend")
    r_e = model.curve(e, "unsecured")
    r_k3 = model.curve(spec.currency, "unsecured")
    n_steps = len(times) - 1
    w_recv = np.empty(n_steps)
    w_post = np.empty(n_steps)
    w_fx = np.empty(n_steps)
    for j in range(n_steps):
        t0, t1 = times[j], times[j + 1]
        w_recv[j] = _discounted_spread_weight(recv_curve, borrow, r_k3, t0, t1)
        w_post[j] = _discounted_spread_weight(post_curve, lend, r_k3, t0, t1)
        w_fx[j] = _discounted_spread_weight(r_e, r_k3, r_k3, t0, t1)
    return w_recv, w_post, w_fx


def price_exogenous(
    scenario: ScenarioSet,
    contract: Contract,
    coll_path: CollateralPath,
    spec: CollateralSpec,
    use_control_variate: bool = False,
) -> PriceReport:
    """Monte Carlo ex-dividend price at t=0 with a predetermined collateral path.

    The optional control variate replaces the contractual-leg estimator by its
    exact deterministic-rate expectation, removing that leg's sampling noise;
    it is off by default so that the Monte Carlo estimate stays an independent
    check of the closed forms.
    """
    if scenario.measure_tag != "qe":
        raise ScenarioMeasureMismatch(
            f"pricing requires a martingale-measure scenario, got {scenario.measure_tag!r}"
        )
    if spec.endogenous:
        raise EndogenousSpecPassed("endogenous collateral must be priced with the BSDE solver")

    leg_contract = discounted_flows(scenario, contract, from_t=0.0)
    b_e = scenario.account(scenario.model.domestic)
    w_recv, w_post, w_fx = _collateral_leg_weights(scenario.model, spec, scenario.grid.times)
    x_l = scenario.fx(spec.currency)[:, :-1]
    carry = (
        coll_path.received[:, :-1] * w_recv[None, :]
        - coll_path.posted[:, :-1] * w_post[None, :]
        - coll_path.c[:, :-1] * w_fx[None, :]
    )
    leg_coll = (carry * x_l / b_e[None, :-1]).sum(axis=1)

    if use_control_variate:
        leg_contract = leg_contract - (leg_contract - expected_discounted_flows(scenario.model, contract))

    total = leg_contract + leg_coll
    n = scenario.n_paths
    se = float(np.std(total, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    leg_contractual = -float(np.mean(leg_contract))
    leg_collateral = -float(np.mean(leg_coll))
    return PriceReport(
        price=leg_contractual + leg_collateral,
        std_error=se,
        leg_contractual=leg_contractual,
        leg_collateral=leg_collateral,
        n_paths=n,
        seed=scenario.seed,
        convention=f"{spec.form}/{spec.convention}",
        k2=contract.native_currency,
        k3=spec.currency,
    )
