import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import build_model, curveset
from xccy import (
    AssetSpec,
    CorrelationMatrix,
    Currency,
    FxSpec,
    MarketModel,
    ModelValidationError,
    cross_currency_basis,
    validate_model,
)
from xccy.curves import RateCurve
from xccy.errors import UnknownCurrency
from xccy.model import cross_currency_basis_integral


def _simple_raw(corr=None, sigma=0.2):
    currencies = [Currency("EUR", 1, True)]
    rates = {"EUR": curveset(0.02, 0.01, 0.01, cash_post=0.02)}
    assets = [AssetSpec("EQ", "EUR", 100.0, sigma, RateCurve.flat(0.0), RateCurve.flat(0.01))]
    correlation = corr if corr is not None else CorrelationMatrix.identity(["EQ"])
    return MarketModel(currencies, rates, assets, [], correlation)


def test_identity_correlation_single_asset_is_valid():
    model = validate_model(_simple_raw())
    assert model.domestic == "EUR"
    assert model.driver_labels == ("EQ",)


def test_entry_above_one_rejected():
    currencies = [Currency("EUR", 1, True)]
    rates = {"EUR": curveset(0.02, 0.01, 0.01)}
    assets = [
        AssetSpec("A", "EUR", 1.0, 0.2, RateCurve.flat(0.0), RateCurve.flat(0.0)),
        AssetSpec("B", "EUR", 1.0, 0.2, RateCurve.flat(0.0), RateCurve.flat(0.0)),
    ]
    corr = CorrelationMatrix(["A", "B"], [[1.0, 1.5], [1.5, 1.0]])
    with pytest.raises(ModelValidationError) as exc:
        validate_model(MarketModel(currencies, rates, assets, [], corr))
    codes = {v.code for v in exc.value.violations}
    assert "NonPsdCorrelation" in codes


def test_three_driver_negative_determinant_rejected():
    # equicorrelated 3x3 with rho = -0.9; Sarrus determinant oracle:
    # det = 1 + 2 rho^3 - 3 rho^2 < 0, so an odd number of eigenvalues is negative
    rho = -0.9
    det = 1.0 + 2.0 * rho**3 - 3.0 * rho**2
    assert det < 0
    currencies = [Currency("EUR", 1, True)]
    rates = {"EUR": curveset(0.02, 0.01, 0.01)}
    assets = [
        AssetSpec(lab, "EUR", 1.0, 0.2, RateCurve.flat(0.0), RateCurve.flat(0.0))
        for lab in ("A", "B", "C")
    ]
    m = np.full((3, 3), rho)
    np.fill_diagonal(m, 1.0)
    corr = CorrelationMatrix(["A", "B", "C"], m)
    with pytest.raises(ModelValidationError) as exc:
        validate_model(MarketModel(currencies, rates, assets, [], corr))
    assert any(v.code == "NonPsdCorrelation" for v in exc.value.violations)


def test_violations_name_the_offending_field():
    currencies = [Currency("EUR", 1, True)]
    rates = {"EUR": curveset(0.02, 0.01, 0.01)}
    assets = [AssetSpec("EQ", "EUR", -1.0, -0.2, RateCurve.flat(0.0), RateCurve.flat(2.5))]
    with pytest.raises(ModelValidationError) as exc:
        validate_model(MarketModel(currencies, rates, assets, [], CorrelationMatrix.identity(["EQ"])))
    fields = {v.field for v in exc.value.violations}
    assert "assets[EQ].sigma" in fields
    assert "assets[EQ].s0" in fields
    assert "assets[EQ].repo_rate" in fields  # |r| > 1 bound


def test_duplicate_currency_detected():
    currencies = [Currency("EUR", 1, True), Currency("EUR", 2, False)]
    rates = {"EUR": curveset(0.02, 0.01, 0.01)}
    with pytest.raises(ModelValidationError) as exc:
        validate_model(MarketModel(currencies, rates, [], [], CorrelationMatrix.identity([])))
    assert "DuplicateCurrency" in {v.code for v in exc.value.violations}


def test_missing_fx_pair_detected():
    currencies = [Currency("EUR", 1, True), Currency("GBP", 2, False)]
    rates = {"EUR": curveset(0.02, 0.01, 0.01), "GBP": curveset(0.03, 0.01, 0.01)}
    with pytest.raises(ModelValidationError) as exc:
        validate_model(MarketModel(currencies, rates, [], [], CorrelationMatrix.identity([])))
    assert "MissingFxPair" in {v.code for v in exc.value.violations}


def test_revalidation_is_idempotent(two_currency_model):
    again = validate_model(two_currency_model)
    assert again is two_currency_model


def test_basis_direct_substitution():
    # r_e=0.03, r_k=0.01, rc_e=0.025, rc_k=0.012 -> q = 0.02 - 0.013 = 0.007
    rates = {
        "EUR": curveset(0.03, 0.025, 0.025),
        "USD": curveset(0.01, 0.012, 0.012),
    }
    model = build_model(
        [("EUR", True), ("USD", False)], rates, fx=[FxSpec("USD", 1.1, 0.1)]
    )
    assert cross_currency_basis(model, "USD", 0.4) == pytest.approx(0.007, abs=1e-15)


def test_basis_domestic_is_zero(two_currency_model):
    for t in (0.0, 0.5, 3.0):
        assert cross_currency_basis(two_currency_model, "EUR", t) == 0.0


def test_basis_antisymmetric_under_domestic_swap():
    rates = {
        "EUR": curveset(0.03, 0.025, 0.025),
        "USD": curveset(0.01, 0.012, 0.012),
    }
    m1 = build_model([("EUR", True), ("USD", False)], rates, fx=[FxSpec("USD", 1.1, 0.1)])
    m2 = build_model([("EUR", False), ("USD", True)], dict(rates), fx=[FxSpec("EUR", 1 / 1.1, 0.1)])
    q12 = cross_currency_basis(m1, "USD", 0.3)
    q21 = cross_currency_basis(m2, "EUR", 0.3)
    assert q12 == pytest.approx(-q21, abs=1e-15)


def test_basis_integral_matches_pointwise_for_flat_curves(two_currency_model):
    q = cross_currency_basis(two_currency_model, "USD", 0.0)
    integral = cross_currency_basis_integral(two_currency_model, "USD", 0.0, 2.0)
    assert integral == pytest.approx(2.0 * q, rel=1e-14)


def test_unknown_currency_raises(two_currency_model):
    with pytest.raises(UnknownCurrency):
        cross_currency_basis(two_currency_model, "GBP", 0.0)


@given(data=st.data())
@settings(max_examples=60, deadline=None)
def test_normalized_gram_matrices_always_validate(data):
    n = data.draw(st.integers(min_value=1, max_value=5))
    raw = data.draw(
        st.lists(
            st.lists(st.floats(min_value=-2, max_value=2), min_size=n, max_size=n),
            min_size=n,
            max_size=n,
        )
    )
    a = np.asarray(raw) + 1e-3 * np.eye(n)
    gram = a @ a.T
    d = np.sqrt(np.diag(gram))
    if np.any(d == 0):
        return
    corr = gram / np.outer(d, d)
    np.fill_diagonal(corr, 1.0)
    labels = [f"A{i}" for i in range(n)]
    currencies = [Currency("EUR", 1, True)]
    rates = {"EUR": curveset(0.02, 0.01, 0.01)}
    assets = [
        AssetSpec(lab, "EUR", 1.0, 0.2, RateCurve.flat(0.0), RateCurve.flat(0.0)) for lab in labels
    ]
    model = validate_model(
        MarketModel(currencies, rates, assets, [], CorrelationMatrix(labels, corr))
    )
    # the mixing factor reproduces the (clipped) correlation
    rebuilt = model.mixing @ model.mixing.T
    assert np.allclose(rebuilt, model.correlation.matrix, atol=1e-10)
