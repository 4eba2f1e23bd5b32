"""Collateral amounts, margin interest, and convention-specific carry streams.

The hedger either receives collateral (C > 0) or posts it (C < 0), in cash or
in shares of a dedicated risky asset, under segregation or rehypothecation.
Each of the four combinations produces a carry stream of the form

    [ (r_recv - r_cb) C+  -  (r_post - r_cl) C- ] X dt  -  C dX

in domestic units, where r_cb / r_cl are the collateral borrow / lend rates
of the collateral currency and the received / posted funding roles are:

    ==================  ====================  ====================
    form, convention    received leg r_recv   posted leg r_post
    ==================  ====================  ====================
    cash, segregation   coll_reinvest_seg     cash_post_funding
    cash, rehypo        domestic unsecured    cash_post_funding
    risky, segregation  coll_reinvest_seg     coll_post_funding
    risky, rehypo       coll_reinvest_rehyp   coll_post_funding
    ==================  ====================  ====================

Segregation and rehypothecation cash streams therefore coincide exactly when
the segregated reinvestment rate equals the domestic unsecured rate, and the
risky and cash streams coincide when the two posting-funding roles carry the
same curve.

The FX term is accumulated either as realized increments -C dX (wealth
replay) or as the drift-equivalent -C X (r_dom - r_k3) dt used by the pricing
expectations; both use predictable (left-endpoint) collateral and FX states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contracts import Contract
from .errors import ConfigError, NonPositiveFx, UnsupportedCombination
from .simulation import ScenarioSet, warn_correlated_collateral_asset

FORMS = ("cash", "risky")
CONVENTIONS = ("segregation", "rehypothecation")


@dataclass(frozen=True)
class CollateralSpec:
    """Contractual collateral terms.

    ``delta1`` scales collateral above a positive mark, ``delta2`` below a
    negative one; both must exceed -1. ``mode`` is either
    ``("exogenous", functional_name, params)`` or ``("endogenous",)``; the
    exogenous functionals are listed in :data:`EXOGENOUS_FUNCTIONALS`.
    """

    currency: str
    form: str = "cash"
    convention: str = "rehypothecation"
    delta1: float = 0.0
    delta2: float = 0.0
    mode: tuple = ("exogenous", "constant", {"level": 0.0})
    posted_asset: str | None = None
    received_asset: str | None = None

    def __post_init__(self):
        if self.form not in FORMS:
            raise ConfigError(f"form must be one of {FORMS}, got {self.form!r}")
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")
        if not (self.delta1 > -1 and self.delta2 > -1):
            raise ConfigError(f"haircuts must exceed -1, got {self.delta1}, {self.delta2}")
        if self.form == "risky" and (self.posted_asset is None or self.received_asset is None):
            raise ConfigError("risky collateral requires posted_asset and received_asset labels")

    @property
    def endogenous(self) -> bool:
        return self.mode[0] == "endogenous"

    @classmethod
    def from_dict(cls, doc: dict) -> "CollateralSpec":
        mode_doc = doc.get("mode", {"exogenous": {"functional": "constant", "params": {"level": 0.0}}})
        if mode_doc == "endogenous" or "endogenous" in mode_doc:
            mode = ("endogenous",)
        else:
            exo = mode_doc["exogenous"]
            mode = ("exogenous", exo["functional"], dict(exo.get("params", {})))
        return cls(
            currency=doc["currency"],
            form=doc.get("form", "cash"),
            convention=doc.get("convention", "rehypothecation"),
            delta1=float(doc.get("delta1", 0.0)),
            delta2=float(doc.get("delta2", 0.0)),
            mode=mode,
            posted_asset=doc.get("posted_asset"),
            received_asset=doc.get("received_asset"),
        )


@dataclass(frozen=True)
class CollateralPath:
    """Collateral per path per grid time, in units of the collateral currency.

    The terminal condition C_T = 0 (collateral returned at the end of
    trading) is enforced at construction.
    """

    c: np.ndarray
    currency: str

    def __init__(self, c, currency):
        c = np.array(c, dtype=float)
        if c.ndim != 2:
            raise ConfigError("collateral path must be (n_paths, n_times)")
        c[:, -1] = 0.0
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "currency", currency)

    @property
    def received(self) -> np.ndarray:
        return np.maximum(self.c, 0.0)

    @property
    def posted(self) -> np.ndarray:
        return np.maximum(-self.c, 0.0)


def collateral_from_mark(mark, spec: CollateralSpec, fx_level) -> np.ndarray:
    """Collateral amount implied by a mark-to-market value in domestic units.

    X * C = (1 + delta1) * mark+ - (1 + delta2) * mark-.
    """
    fx_level = np.asarray(fx_level, dtype=float)
    if np.any(fx_level <= 0):
        raise NonPositiveFx("fx level must be strictly positive")
    mark = np.asarray(mark, dtype=float)
    return ((1.0 + spec.delta1) * np.maximum(mark, 0.0) - (1.0 + spec.delta2) * np.maximum(-mark, 0.0)) / fx_level


def _rate_integrals(curve, times: np.ndarray) -> np.ndarray:
    return np.array([curve.integral(times[j], times[j + 1]) for j in range(len(times) - 1)])


def margin_interest(scenario: ScenarioSet, coll: CollateralPath, spec: CollateralSpec) -> np.ndarray:
    """Cumulative margin-account interest in domestic units, (n_paths, n_times).

    Interest received on posted collateral at the lend rate minus interest
    paid on received collateral at the borrow rate, both converted at the
    prevailing FX rate with predictable integrands.
    """
    model = scenario.model
    times = scenario.grid.times
    lend = _rate_integrals(model.curve(spec.currency, "collateral_lend"), times)
    borrow = _rate_integrals(model.curve(spec.currency, "collateral_borrow"), times)
    x = scenario.fx(spec.currency)[:, :-1]
    inc = x * (coll.posted[:, :-1] * lend - coll.received[:, :-1] * borrow)
    out = np.zeros((scenario.n_paths, len(times)))
    np.cumsum(inc, axis=1, out=out[:, 1:])
    return out


def carry_roles(spec: CollateralSpec) -> tuple[tuple[str, str], tuple[str, str]]:
    """(received-leg, posted-leg) funding roles as (currency_kind, role) pairs.

    ``currency_kind`` is "domestic" or "k3"; the cash/rehypothecation received
    leg funds the trading book and therefore carries the domestic unsecured
    rate, every other leg is a collateral-currency role.
    """
    if spec.form == "cash":
        recv = ("domestic", "unsecured") if spec.convention == "rehypothecation" else ("k3", "coll_reinvest_seg")
        post = ("k3", "cash_post_funding")
    elif spec.form == "risky":
        recv = (
            ("k3", "coll_reinvest_rehyp") if spec.convention == "rehypothecation" else ("k3", "coll_reinvest_seg")
        )
        post = ("k3", "coll_post_funding")
    else:  # unreachable; CollateralSpec validates form
        raise UnsupportedCombination(f"{spec.form}/{spec.convention}")
    return recv, post


def _resolve_curve(model, spec: CollateralSpec, which: tuple[str, str]):
    kind, role = which
    cur = model.domestic if kind == "domestic" else spec.currency
    return model.curve(cur, role)


def adjustment_increments(
    scenario: ScenarioSet,
    coll: CollateralPath,
    spec: CollateralSpec,
    fx_term: str = "increments",
) -> np.ndarray:
    """Per-step increments of the collateral carry stream, (n_paths, n_steps).

    ``fx_term="increments"`` realizes -C dX with the same-interval FX
    increment (wealth replay); ``fx_term="drift"`` uses the expectation-
    equivalent -C X (r_dom - r_k3) dt (pricing).
    """
    if fx_term not in ("increments", "drift"):
        raise ConfigError(f"fx_term must be 'increments' or 'drift', got {fx_term!r}")
    model = scenario.model
    times = scenario.grid.times
    if coll.currency != spec.currency:
        raise ConfigError(f"collateral path currency {coll.currency!r} != spec currency {spec.currency!r}")
    if spec.form == "risky":
        for label in (spec.posted_asset, spec.received_asset):
            model.asset(label)  # existence check
            warn_correlated_collateral_asset(model, label)

    recv_curve = _resolve_curve(model, spec, carry_roles(spec)[0])
    post_curve = _resolve_curve(model, spec, carry_roles(spec)[1])
    borrow = _rate_integrals(model.curve(spec.currency, "collateral_borrow"), times)
    lend = _rate_integrals(model.curve(spec.currency, "collateral_lend"), times)
    recv_int = _rate_integrals(recv_curve, times)
    post_int = _rate_integrals(post_curve, times)

    x = scenario.fx(spec.currency)
    x_l = x[:, :-1]
    carry = x_l * (coll.received[:, :-1] * (recv_int - borrow) - coll.posted[:, :-1] * (post_int - lend))

    if fx_term == "increments":
        fx_part = -coll.c[:, :-1] * np.diff(x, axis=1)
    else:
        r_e = model.curve(model.domestic, "unsecured")
        r_k3 = model.curve(spec.currency, "unsecured")
        diff_int = _rate_integrals(r_e, times) - _rate_integrals(r_k3, times)
        fx_part = -coll.c[:, :-1] * x_l * diff_int
    return carry + fx_part


def adjustment_stream(
    scenario: ScenarioSet,
    coll: CollateralPath,
    spec: CollateralSpec,
    fx_term: str = "increments",
) -> np.ndarray:
    """Cumulative collateral carry stream in domestic units, (n_paths, n_times)."""
    inc = adjustment_increments(scenario, coll, spec, fx_term=fx_term)
    out = np.zeros((scenario.n_paths, len(scenario.grid.times)))
    np.cumsum(inc, axis=1, out=out[:, 1:])
    return out


def collateral_value_adjustment(
    scenario: ScenarioSet, coll: CollateralPath, spec: CollateralSpec
) -> np.ndarray:
    """Difference between the hedger's legal wealth and portfolio value.

    X * C- under segregation and for risky collateral, -X * C for cash under
    rehypothecation (received cash funds the book, so the portfolio holds it).
    """
    x = scenario.fx(spec.currency)
    if spec.form == "cash" and spec.convention == "rehypothecation":
        return -x * coll.c
    return x * coll.posted


# ---------------------------------------------------------------------------
# Exogenous collateral functionals: measurable functions of current grid state
# ---------------------------------------------------------------------------


def _constant_functional(scenario: ScenarioSet, spec: CollateralSpec, contract, params) -> CollateralPath:
    level = float(params.get("level", 0.0))
    c = np.full((scenario.n_paths, len(scenario.grid.times)), level)
    return CollateralPath(c, spec.currency)


def _fraction_of_asset(scenario: ScenarioSet, spec: CollateralSpec, contract, params) -> CollateralPath:
    label = params["asset"]
    fraction = float(params.get("fraction", 1.0))
    asset = scenario.model.asset(label)
    value_dom = scenario.asset(label) * scenario.fx(asset.currency)
    c = fraction * value_dom / scenario.fx(spec.currency)
    return CollateralPath(c, spec.currency)


def _mark_proxy(scenario: ScenarioSet, spec: CollateralSpec, contract: Contract, params) -> CollateralPath:
    """Haircut collateral on a deterministic-forward proxy of the contract mark.

    The proxy marks the remaining flows at the perfect-collateralization
    discount (collateral rate plus cross-currency basis) and the FX forward
    implied by unsecured differentials; the mark is the contract value to the
    counterparty, i.e. minus the hedger's replication wealth.
    """
    from .pricing import full_collateral_discount_factor, fx_forward_factor  # local: avoid cycle

    if contract is None:
        raise ConfigError("mark_proxy functional needs the contract")
    model = scenario.model
    times = scenario.grid.times
    fx_k2 = scenario.fx(contract.native_currency)
    mark = np.zeros((scenario.n_paths, len(times)))
    for j, t in enumerate(times):
        # hedger's replication wealth is -factor * X_k2, and the mark is its negative
        factor = 0.0
        for t_i, amount in contract.flows:
            if t_i <= t:
                continue
            factor += (
                amount
                * full_collateral_discount_factor(model, spec.currency, t, t_i)
                * fx_forward_factor(model, contract.native_currency, t, t_i)
            )
        mark[:, j] = factor * fx_k2[:, j]
    c = collateral_from_mark(mark, spec, scenario.fx(spec.currency))
    return CollateralPath(c, spec.currency)


EXOGENOUS_FUNCTIONALS = {
    "constant": _constant_functional,
    "fraction_of_asset": _fraction_of_asset,
    "mark_proxy": _mark_proxy,
}


def build_exogenous_path(
    scenario: ScenarioSet, spec: CollateralSpec, contract: Contract | None = None
) -> CollateralPath:
    """Materialize the exogenous collateral path named by the spec's mode."""
    if spec.endogenous:
        raise ConfigError("spec is endogenous; use the BSDE solver")
    _, name, params = spec.mode
    if name not in EXOGENOUS_FUNCTIONALS:
        raise ConfigError(f"unknown exogenous functional {name!r}; known: {sorted(EXOGENOUS_FUNCTIONALS)}")
    return EXOGENOUS_FUNCTIONALS[name](scenario, spec, contract, params)
