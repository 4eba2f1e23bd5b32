"""Market model: currencies, curves, assets, FX pairs, correlation.

The model is quoted from the point of view of one domestic currency. FX rates
are stored domestic-per-foreign for every non-domestic currency; cross pairs
are derived by triangulation, which rules out triangular FX arbitrage by
construction.

``validate_model`` seals a raw :class:`MarketModel` into an immutable
:class:`ValidatedModel` after checking boundedness, positivity and positive
semi-definiteness of the correlation matrix. Everything downstream (simulation,
pricing, diagnostics) takes a ``ValidatedModel``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .curves import RATE_BOUND, CurveSet, RateCurve
from .errors import (
    ConfigError,
    ModelValidationError,
    UnknownCurrency,
    Violation,
)

PSD_TOL = -1e-10  # smallest eigenvalue accepted before clipping to 0


@dataclass(frozen=True)
class Currency:
    """One currency area; ``index`` is 1-based and contiguous across the model."""

    name: str
    index: int
    domestic: bool


@dataclass(frozen=True)
class AssetSpec:
    """Lognormal risky asset with a continuous dividend yield and a repo curve."""

    label: str
    currency: str
    s0: float
    sigma: float
    dividend_yield: RateCurve
    repo_rate: RateCurve
    mu: float | None = None  # physical-measure drift; unused for pricing


@dataclass(frozen=True)
class FxSpec:
    """Spot FX rate, quoted as units of domestic per 1 unit of ``foreign``."""

    foreign: str
    x0: float
    sigma: float
    mu: float | None = None


@dataclass(frozen=True)
class CorrelationMatrix:
    """Instantaneous correlation of all simulated drivers.

    ``labels`` fixes the driver order: assets carry their own label, FX
    drivers are labelled ``"fx:<currency>"``.
    """

    labels: tuple[str, ...]
    matrix: np.ndarray

    def __init__(self, labels, matrix):
        labels = tuple(labels)
        matrix = np.asarray(matrix, dtype=float)
        if matrix.size == len(labels) ** 2:
            matrix = matrix.reshape(len(labels), len(labels))  # accept flat row-major
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, labels) -> "CorrelationMatrix":
        return cls(tuple(labels), np.eye(len(tuple(labels))))


def fx_label(currency: str) -> str:
    return f"fx:{currency}"


@dataclass
class MarketModel:
    """Raw model as ingested from configuration; validate before use."""

    currencies: list[Currency]
    rates: dict[str, CurveSet]  # keyed by currency name
    assets: list[AssetSpec]
    fx: list[FxSpec]
    correlation: CorrelationMatrix


def _check_rate_bounds(name: str, curve: RateCurve | None, violations: list[Violation]) -> None:
    if curve is None:
        return
    if curve.max_abs() > RATE_BOUND:
        violations.append(
            Violation("UnboundedRate", name, f"|rate| exceeds {RATE_BOUND}: max {curve.max_abs()}")
        )


def _validate(model: MarketModel) -> list[Violation]:
    v: list[Violation] = []
    names = [c.name for c in model.currencies]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        v.append(Violation("DuplicateCurrency", "currencies", f"duplicated: {dupes}"))
    domestic = [c for c in model.currencies if c.domestic]
    if len(domestic) != 1:
        v.append(
            Violation(
                "DomesticCount", "currencies", f"exactly one domestic currency required, got {len(domestic)}"
            )
        )
    indices = sorted(c.index for c in model.currencies)
    if indices != list(range(1, len(model.currencies) + 1)):
        v.append(Violation("NonContiguousIndex", "currencies", f"indices must be 1..L, got {indices}"))

    for cur in model.currencies:
        if cur.name not in model.rates:
            v.append(Violation("MissingRates", f"rates[{cur.name}]", "no curve set for currency"))
            continue
        cs = model.rates[cur.name]
        for role in CurveSet.ROLES:
            _check_rate_bounds(f"rates[{cur.name}].{role}", getattr(cs, role), v)

    for a in model.assets:
        if a.currency not in names:
            v.append(Violation("UnknownCurrency", f"assets[{a.label}].currency", a.currency))
        if not a.sigma > 0:
            v.append(Violation("NegativeVolatility", f"assets[{a.label}].sigma", f"sigma={a.sigma} must be > 0"))
        if not a.s0 > 0:
            v.append(Violation("NonPositiveSpot", f"assets[{a.label}].s0", f"s0={a.s0} must be > 0"))
        _check_rate_bounds(f"assets[{a.label}].dividend_yield", a.dividend_yield, v)
        _check_rate_bounds(f"assets[{a.label}].repo_rate", a.repo_rate, v)

    dom_name = domestic[0].name if len(domestic) == 1 else None
    fx_currencies = [f.foreign for f in model.fx]
    if len(set(fx_currencies)) != len(fx_currencies):
        v.append(Violation("DuplicateFxPair", "fx", f"duplicated pairs: {sorted(fx_currencies)}"))
    for f in model.fx:
        if f.foreign not in names:
            v.append(Violation("UnknownCurrency", f"fx[{f.foreign}].foreign", f.foreign))
        if f.foreign == dom_name:
            v.append(Violation("DomesticFxPair", f"fx[{f.foreign}]", "domestic pair is identically 1"))
        if not f.x0 > 0:
            v.append(Violation("NonPositiveFx", f"fx[{f.foreign}].x0", f"x0={f.x0} must be > 0"))
        if not f.sigma >= 0:
            v.append(Violation("NegativeVolatility", f"fx[{f.foreign}].sigma", f"sigma={f.sigma} must be >= 0"))
    for cur in model.currencies:
        if dom_name is not None and cur.name != dom_name and cur.name not in fx_currencies:
            v.append(Violation("MissingFxPair", f"fx[{cur.name}]", "non-domestic currency without FX pair"))

    # correlation must cover each driver exactly once, in any order
    expected = [a.label for a in model.assets] + [fx_label(f.foreign) for f in model.fx]
    corr = model.correlation
    if sorted(corr.labels) != sorted(expected):
        v.append(
            Violation(
                "MissingCorrelationLabel",
                "correlation.labels",
                f"labels {sorted(corr.labels)} must match drivers {sorted(expected)}",
            )
        )
    m = corr.matrix
    n = len(corr.labels)
    if m.shape != (n, n):
        v.append(Violation("BadCorrelationShape", "correlation.matrix", f"shape {m.shape}, need ({n}, {n})"))
        return v
    if n:
        if not np.allclose(m, m.T, atol=1e-12):
            v.append(Violation("NonSymmetricCorrelation", "correlation.matrix", "matrix is not symmetric"))
        if not np.allclose(np.diag(m), 1.0, atol=1e-12):
            v.append(Violation("NonUnitDiagonal", "correlation.matrix", "diagonal entries must be 1"))
        if np.any(np.abs(m) > 1.0 + 1e-12):
            v.append(Violation("NonPsdCorrelation", "correlation.matrix", "entries outside [-1, 1]"))
        elif np.allclose(m, m.T, atol=1e-12):
            smallest = float(np.min(np.linalg.eigvalsh(0.5 * (m + m.T))))
            if smallest < PSD_TOL:
                v.append(
                    Violation(
                        "NonPsdCorrelation",
                        "correlation.matrix",
                        f"smallest eigenvalue {smallest:.3e} below tolerance {PSD_TOL}",
                    )
                )
    return v


@dataclass(frozen=True)
class ValidatedModel:
    """Sealed model; immutable and safe to share across workers.

    ``mixing`` is the factor L of the (clipped) correlation matrix with
    L @ L.T equal to the correlation, in the canonical driver order
    ``driver_labels``: assets first (model order), then FX pairs.
    """

    currencies: tuple[Currency, ...]
    rates: dict[str, CurveSet]
    assets: tuple[AssetSpec, ...]
    fx: tuple[FxSpec, ...]
    correlation: CorrelationMatrix
    driver_labels: tuple[str, ...]
    mixing: np.ndarray
    _sealed: bool = field(default=True, repr=False)

    @property
    def domestic(self) -> str:
        return next(c.name for c in self.currencies if c.domestic)

    @property
    def currency_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.currencies)

    def currency(self, name: str) -> Currency:
        for c in self.currencies:
            if c.name == name:
                return c
        raise UnknownCurrency(name)

    def curve(self, currency: str, role: str) -> RateCurve:
        if currency not in self.rates:
            raise UnknownCurrency(currency)
        return self.rates[currency].by_role(role)

    def asset(self, label: str) -> AssetSpec:
        for a in self.assets:
            if a.label == label:
                return a
        raise ConfigError(f"unknown asset {label!r}")

    def fx_spec(self, currency: str) -> FxSpec:
        for f in self.fx:
            if f.foreign == currency:
                return f
        raise UnknownCurrency(f"no FX pair for {currency!r}")

    def has_symmetric_collateral_rates(self, currency: str) -> bool:
        cs = self.rates[currency]
        if cs.collateral_borrow is None or cs.collateral_lend is None:
            return False
        b, l = cs.collateral_borrow, cs.collateral_lend
        return np.array_equal(b.knots, l.knots) and np.array_equal(b.values, l.values)


def validate_model(model: MarketModel | ValidatedModel) -> ValidatedModel:
    """Validate and seal a market model; idempotent on an already sealed model.

    Raises :class:`ModelValidationError` carrying every violation found.
    """
    if isinstance(model, ValidatedModel):
        return model
    violations = _validate(model)
    if violations:
        raise ModelValidationError(violations)

    # canonical driver order: assets in model order, then fx pairs in model order
    labels = tuple(a.label for a in model.assets) + tuple(fx_label(f.foreign) for f in model.fx)
    perm = [model.correlation.labels.index(lab) for lab in labels]
    m = model.correlation.matrix[np.ix_(perm, perm)]
    m = 0.5 * (m + m.T)
    if m.size:
        eigval, eigvec = np.linalg.eigh(m)
        eigval = np.clip(eigval, 0.0, None)  # clip rounding-level negatives
        mixing = eigvec * np.sqrt(eigval)
    else:
        mixing = np.zeros((0, 0))
    return ValidatedModel(
        currencies=tuple(model.currencies),
        rates=dict(model.rates),
        assets=tuple(model.assets),
        fx=tuple(model.fx),
        correlation=CorrelationMatrix(labels, m),
        driver_labels=labels,
        mixing=mixing,
    )


def cross_currency_basis(model: ValidatedModel, k3: str, t) -> float | np.ndarray:
    """Spread between the unsecured-rate and collateral-rate differentials.

    q(t) = (r_dom(t) - r_k3(t)) - (rc_dom(t) - rc_k3(t)), computed with the
    collateral *lend* curves in the symmetric-rate regime. Identically zero
    for the domestic currency, and antisymmetric under swapping the domestic
    designation.
    """
    if k3 not in model.currency_names:
        raise UnknownCurrency(k3)
    e = model.domestic
    if k3 == e:
        t_arr = np.asarray(t, dtype=float)
        return 0.0 if t_arr.ndim == 0 else np.zeros_like(t_arr)
    r_e = model.curve(e, "unsecured").rate(t)
    r_k = model.curve(k3, "unsecured").rate(t)
    rc_e = model.curve(e, "collateral_lend").rate(t)
    rc_k = model.curve(k3, "collateral_lend").rate(t)
    return (r_e - r_k) - (rc_e - rc_k)


def cross_currency_basis_integral(model: ValidatedModel, k3: str, t0: float, t1: float) -> float:
    """Exact integral of the basis over [t0, t1]."""
    if k3 not in model.currency_names:
        raise UnknownCurrency(k3)
    e = model.domestic
    if k3 == e:
        return 0.0
    return (
        model.curve(e, "unsecured").integral(t0, t1)
        - model.curve(k3, "unsecured").integral(t0, t1)
        - model.curve(e, "collateral_lend").integral(t0, t1)
        + model.curve(k3, "collateral_lend").integral(t0, t1)
    )


# ---------------------------------------------------------------------------
# JSON ingestion. Schema documented in README.md.
# ---------------------------------------------------------------------------


def _curve_from_dict(obj) -> RateCurve:
    if isinstance(obj, (int, float)):
        return RateCurve.flat(float(obj))
    return RateCurve(obj["knots"], obj["values"])


def _curveset_from_dict(obj: dict) -> CurveSet:
    if "unsecured" not in obj:
        raise ConfigError("rates object must define the 'unsecured' role")
    kwargs = {}
    for role in CurveSet.ROLES:
        if role in obj:
            kwargs[role] = _curve_from_dict(obj[role])
    return CurveSet(**kwargs)


def model_from_dict(doc: dict) -> MarketModel:
    """Build a raw MarketModel from a parsed JSON document."""
    currencies = []
    rates = {}
    for i, cur in enumerate(doc["currencies"]):
        currencies.append(Currency(name=cur["name"], index=i + 1, domestic=bool(cur.get("domestic", False))))
        rates[cur["name"]] = _curveset_from_dict(cur.get("rates", {}))
    assets = [
        AssetSpec(
            label=a["label"],
            currency=a["currency"],
            s0=float(a["s0"]),
            sigma=float(a["sigma"]),
            dividend_yield=_curve_from_dict(a.get("dividend_yield", 0.0)),
            repo_rate=_curve_from_dict(a.get("repo_rate", 0.0)),
            mu=None if a.get("mu") is None else float(a["mu"]),
        )
        for a in doc.get("assets", [])
    ]
    fx = [
        FxSpec(
            foreign=f["currency"],
            x0=float(f["x0"]),
            sigma=float(f["sigma"]),
            mu=None if f.get("mu") is None else float(f["mu"]),
        )
        for f in doc.get("fx", [])
    ]
    corr_doc = doc.get("correlation")
    if corr_doc is None:
        labels = [a.label for a in assets] + [fx_label(f.foreign) for f in fx]
        correlation = CorrelationMatrix.identity(labels)
    else:
        correlation = CorrelationMatrix(corr_doc["labels"], corr_doc["matrix"])
    return MarketModel(currencies=currencies, rates=rates, assets=assets, fx=fx, correlation=correlation)


def load_model(path: str) -> MarketModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
