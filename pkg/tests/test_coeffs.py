import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from entropy_fd.coeffs import (
    EntropyKind,
    EntropySpec,
    LambdaSet,
    ModelParams,
    PolySpec,
    PolyVariant,
    admissibility_K,
    coercivity_constant,
    identification_residuals,
    k_constant,
    lambda4_optimal,
    lambda_2d,
    lambda_alpha0,
    lambda_alpha1,
    lambda_general,
    lambdas_for,
    nonneg_margin,
    poly_spec,
    verify_flux_identification,
)
from entropy_fd.errors import InvalidAlpha, NotNonnegative, SingularDenominator

from oracles import flux_coefficients, min_eigenvalue, min_ratio_on_circle, solve_lambdas

DLSS = ModelParams.dlss()
TF2 = ModelParams.thin_film(2.0)

alphas = st.floats(0.0, 3.0).filter(lambda a: abs(a - 1) > 1e-3)
betas = st.floats(0.0, 4.0)
a_coef = st.floats(-3.0, 1.0)
b_coef = st.floats(-1.0, 2.0)
lam4 = st.floats(-5.0, 5.0)


def nonsingular(alpha, beta):
    return abs(beta - 2 * alpha + 3) > 1e-3


# types


def test_entropy_kind_follows_alpha():
    assert EntropySpec(0.0).kind is EntropyKind.LOGARITHMIC
    assert EntropySpec(1.0).kind is EntropyKind.SHANNON
    assert EntropySpec(0.5).kind is EntropyKind.RENYI
    assert EntropySpec(2.0).kind is EntropyKind.RENYI


@pytest.mark.parametrize("bad", [-1.0, -1e-9, math.nan])
def test_negative_alpha_or_beta_rejected(bad):
    with pytest.raises(ValueError):
        EntropySpec(bad)
    with pytest.raises(ValueError):
        ModelParams(0.0, 0.0, bad)


# lambda_general


def test_lambda_general_dlss_example():
    lam = lambda_general(EntropySpec(0.0), DLSS, -1.0)
    assert lam == pytest.approx((5 / 3, -7 / 3, 2 / 3, -1.0), abs=1e-14)


def test_lambda_general_thin_film_example():
    lam = lambda_general(EntropySpec(0.0), TF2, -26 / 9)
    assert lam == pytest.approx((23 / 9, -14 / 3, 14 / 9, -26 / 9), abs=1e-14)


@pytest.mark.parametrize(
    "alpha, beta, a, b, l4",
    [(0, 0, -2, 1, -1), (0.5, 1, -1, 0.5, 0.3), (2, 0.5, 0, 0, -1.5), (1.5, 3, 1, -1, 2), (3, 4, -3, 2, -5)],
)
def test_lambda_general_matches_symbolic_solve(alpha, beta, a, b, l4):
    lam = lambda_general(EntropySpec(alpha), ModelParams(a, b, beta), l4)
    assert lam[:3] == pytest.approx(solve_lambdas(alpha, beta, a, b, l4), abs=1e-12)


@pytest.mark.parametrize(
    "alpha, beta, a, b, l4",
    [(0, 0, -2, 1, -1), (0.5, 2, 0, 0, 0.7), (2.5, 1, -3, 2, 4)],
)
def test_flux_from_lambdas_reproduces_equation(alpha, beta, a, b, l4):
    lam = lambda_general(EntropySpec(alpha), ModelParams(a, b, beta), l4)
    assert flux_coefficients(alpha, beta, *lam) == pytest.approx((1.0, a, b), abs=1e-12)


def test_lambda_general_rejects_alpha_one():
    with pytest.raises(InvalidAlpha):
        lambda_general(EntropySpec(1.0), DLSS, 0.0)


def test_lambda_general_singular_denominator():
    # beta - 2 alpha + 3 = 0 at alpha = 2, beta = 1
    with pytest.raises(SingularDenominator):
        lambda_general(EntropySpec(2.0), ModelParams(0, 0, 1.0), 0.0)


@settings(max_examples=300)
@given(alphas, betas, a_coef, b_coef, lam4)
def test_lambda_general_identification_property(alpha, beta, a, b, l4):
    assume(nonsingular(alpha, beta))
    entropy, model = EntropySpec(alpha), ModelParams(a, b, beta)
    lam = lambda_general(entropy, model, l4)
    assert abs(lam.lambda1 - lam.lambda3 - 1.0) <= 1e-12 * (1 + abs(lam.lambda1))
    assert verify_flux_identification(lam, entropy, model) <= 1e-10 * (1 + max(map(abs, lam)) ** 2)


@settings(max_examples=100)
@given(betas, a_coef, b_coef, lam4)
def test_alpha0_closed_form_agrees_with_general(beta, a, b, l4):
    model = ModelParams(a, b, beta)
    g = lambda_general(EntropySpec(0.0), model, l4)
    z = lambda_alpha0(model, l4)
    assert g == pytest.approx(z, abs=1e-12 * (1 + max(map(abs, g))))


# lambda_alpha1


def test_lambda_alpha1_dlss_example():
    assert lambda_alpha1(DLSS, 0.0) == pytest.approx((1.0, -1.0, 0.0, 0.0), abs=1e-14)


def test_lambda_alpha1_thin_film_optimum():
    l4 = lambda4_optimal(EntropySpec(1.0), TF2)
    assert l4 == pytest.approx(-7 / 3, abs=1e-14)
    lam = lambda_alpha1(TF2, l4)
    assert lam[:3] == pytest.approx(solve_lambdas(0, 2, 0, 0, -7 / 3), abs=1e-12)
    assert lam.lambda1 - lam.lambda3 == pytest.approx(1.0, abs=1e-14)


@given(betas, a_coef, b_coef, lam4)
def test_lambda_alpha1_identification(beta, a, b, l4):
    model = ModelParams(a, b, beta)
    lam = lambda_alpha1(model, l4)
    assert verify_flux_identification(lam, EntropySpec(1.0), model) <= 1e-10 * (1 + max(map(abs, lam)) ** 2)


# lambda4_optimal / K / margins


@pytest.mark.parametrize(
    "model, expected",
    [(DLSS, -1.0), (TF2, -26 / 9), (ModelParams.thin_film(0.0), 0.0)],
)
def test_lambda4_optimal_examples(model, expected):
    assert lambda4_optimal(EntropySpec(0.0), model) == pytest.approx(expected, abs=1e-14)


def test_admissibility_examples():
    assert admissibility_K(EntropySpec(1.5), DLSS) == pytest.approx(0.0, abs=1e-14)
    assert admissibility_K(EntropySpec(0.0), TF2) == pytest.approx(1.0, abs=1e-14)
    for s in (1.5, 3.0):
        assert admissibility_K(EntropySpec(s), ModelParams.thin_film(0.0)) == pytest.approx(0.0, abs=1e-14)
    assert admissibility_K(EntropySpec(0.0), ModelParams.thin_film(4.0)) == pytest.approx(-5.0, abs=1e-14)


@given(alphas, betas)
def test_thin_film_K_depends_on_sum(alpha, beta):
    s = alpha + beta
    K = admissibility_K(EntropySpec(alpha), ModelParams.thin_film(beta))
    assert K == pytest.approx(-2 * s * s + 9 * s - 9, abs=1e-10)


def test_poly_spec_examples():
    dlss = poly_spec(EntropySpec(0.0), lambdas_for(EntropySpec(0.0), DLSS))
    assert (dlss.c22, dlss.c21, dlss.c11) == pytest.approx((1.0, -2.0, 1.0), abs=1e-14)
    assert nonneg_margin(dlss) == pytest.approx(0.0, abs=1e-13)
    tf = poly_spec(EntropySpec(0.0), lambdas_for(EntropySpec(0.0), TF2))
    assert (tf.c22, tf.c21, tf.c11) == pytest.approx((1.0, -10 / 3, 26 / 9), abs=1e-14)
    assert nonneg_margin(tf) == pytest.approx(4 / 9, abs=1e-13)
    assert tf(0.0, 0.0) == 0.0


def test_poly_variants():
    lam = LambdaSet(2.0, -3.0, 1.0, 0.5)
    p = poly_spec(EntropySpec(0.5), lam)
    p1 = poly_spec(EntropySpec(1.0), lam)
    p0 = poly_spec(EntropySpec(0.0), lam, PolyVariant.P0)
    assert (p.variant, p.c22, p.c21, p.c11) == (PolyVariant.P, 1.0, -4.5, -0.5)
    assert (p1.variant, p1.c22, p1.c21, p1.c11) == (PolyVariant.P1, 1.0, -5.5, 3.0)
    assert (p0.c22, p0.c21, p0.c11) == (p.c22, p.c21, p.c11)


@settings(max_examples=500)
@given(alphas, betas, a_coef, b_coef)
def test_optimal_margin_equals_scaled_K(alpha, beta, a, b):
    assume(nonsingular(alpha, beta))
    entropy, model = EntropySpec(alpha), ModelParams(a, b, beta)
    spec = poly_spec(entropy, lambdas_for(entropy, model))
    expected = 4 * admissibility_K(entropy, model) / (9 * (alpha - 1) ** 2)
    assert nonneg_margin(spec) == pytest.approx(expected, rel=1e-9, abs=1e-9)
    for d in (-0.1, 0.1):
        off = poly_spec(entropy, lambdas_for(entropy, model, lambda4_optimal(entropy, model) + d))
        assert nonneg_margin(off) <= nonneg_margin(spec) + 1e-12


@given(betas, a_coef, b_coef)
def test_alpha1_optimal_margin(beta, a, b):
    entropy, model = EntropySpec(1.0), ModelParams(a, b, beta)
    spec = poly_spec(entropy, lambdas_for(entropy, model))
    assert nonneg_margin(spec) == pytest.approx(4 * admissibility_K(entropy, model) / 9, rel=1e-9, abs=1e-9)
    for d in (-0.1, 0.1):
        off = poly_spec(entropy, lambdas_for(entropy, model, lambda4_optimal(entropy, model) + d))
        assert nonneg_margin(off) <= nonneg_margin(spec) + 1e-12


@settings(max_examples=60)
@given(st.floats(-4, 4), st.floats(-1, 4))
def test_margin_sign_matches_grid_oracle(c21, c11):
    spec = PolySpec(PolyVariant.P, 1.0, c21, c11)
    margin = nonneg_margin(spec)
    assume(abs(margin) > 1e-6)
    grid_nonneg = min_ratio_on_circle(1.0, c21, c11, n=20_001) >= -1e-9
    assert grid_nonneg == (margin >= 0 and c11 >= 0)


# coercivity


def test_coercivity_examples():
    dlss = poly_spec(EntropySpec(0.0), lambdas_for(EntropySpec(0.0), DLSS))
    assert coercivity_constant(dlss) == 0.0
    tf = poly_spec(EntropySpec(0.0), lambdas_for(EntropySpec(0.0), TF2))
    c = coercivity_constant(tf)
    assert c == pytest.approx((35 - math.sqrt(35**2 - 36)) / 18, rel=1e-12)
    assert c == pytest.approx(0.02878, abs=1e-5)
    assert c == pytest.approx(min_ratio_on_circle(tf.c22, tf.c21, tf.c11), abs=1e-6)
    assert coercivity_constant(PolySpec(PolyVariant.P, 1.0, 0.0, 1.0)) == 1.0


def test_coercivity_rejects_indefinite():
    with pytest.raises(NotNonnegative):
        coercivity_constant(PolySpec(PolyVariant.P, 1.0, -3.0, 1.0))


@settings(max_examples=200)
@given(st.floats(-3.9, 3.9), st.floats(0.0, 5.0))
def test_coercivity_is_min_eigenvalue(c21, c11):
    spec = PolySpec(PolyVariant.P, 1.0, c21, c11)
    assume(nonneg_margin(spec) > 1e-9)
    c = coercivity_constant(spec)
    assert c == pytest.approx(max(0.0, min_eigenvalue(1.0, c21, c11)), abs=1e-12)
    assert min_ratio_on_circle(1.0 - c, c21, c11 - c, n=4001) >= -1e-9


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0, 3.0])
def test_k_constant(alpha):
    k = k_constant(alpha)
    assert k == pytest.approx(max(0.0, min_eigenvalue(1.0, 2 * (alpha - 2), 2 * alpha**2 - 6 * alpha + 5)), abs=1e-12)
    assert (k == 0.0) == (alpha == 1.0)


# verification helper


def test_verify_identification_examples():
    lam = LambdaSet(5 / 3, -7 / 3, 2 / 3, -1.0)
    assert verify_flux_identification(lam, EntropySpec(0.0), DLSS) <= 1e-10
    bad = LambdaSet(5 / 3 + 0.1, -7 / 3, 2 / 3, -1.0)
    assert verify_flux_identification(bad, EntropySpec(0.0), DLSS) >= 0.1 - 1e-12


@pytest.mark.parametrize("alpha, beta, a, b, l4", [(0.5, 1, -1, 0.5, 0.3), (2.0, 3.0, 0.5, -0.5, -2.0)])
def test_identification_residuals_match_symbolic_flux(alpha, beta, a, b, l4):
    # arbitrary (non-solving) lambdas: residuals equal the flux coefficients minus the targets
    lam = LambdaSet(0.7, -1.3, 0.2, l4)
    r = identification_residuals(lam, alpha, ModelParams(a, b, beta))
    c = flux_coefficients(alpha, beta, *lam)
    assert r == pytest.approx((c[0] - 1.0, c[1] - a, c[2] - b), abs=1e-12)


# two dimensions


def test_lambda_2d_examples():
    assert lambda_2d(2.0) == (3.0, -6.0, 2.0, -4.0)
    assert lambda_2d(1.0) == (2.0, -4.0, 1.0, -2.0)
    p2 = poly_spec(EntropySpec(0.0), lambda_2d(2.0), PolyVariant.P0)
    p1 = poly_spec(EntropySpec(0.0), lambda_2d(1.0), PolyVariant.P0)
    assert nonneg_margin(p2) == 0.0
    assert nonneg_margin(p1) == -1.0
    with pytest.raises(ValueError):
        lambda_2d(0.0)


@given(st.floats(0.01, 10.0))
def test_lambda_2d_margin(beta):
    lam = lambda_2d(beta)
    assert lam.lambda1 - lam.lambda3 == pytest.approx(1.0, abs=1e-14)
    spec = poly_spec(EntropySpec(0.0), lam, PolyVariant.P0)
    assert nonneg_margin(spec) == pytest.approx(-((beta - 2) ** 2), abs=1e-10 * (1 + beta**2))


def test_lambda_2d_is_the_one_dimensional_set_with_lambda4_minus_2beta():
    for beta in (0.5, 2.0, 3.0):
        assert lambda_alpha0(ModelParams.thin_film(beta), -2 * beta) == pytest.approx(lambda_2d(beta), abs=1e-14)


def test_random_sweep_is_fast():
    import time

    rng = np.random.default_rng(0)
    t0 = time.perf_counter()
    for _ in range(1000):
        alpha = rng.uniform(0, 3)
        if abs(alpha - 1) < 1e-6:
            continue
        model = ModelParams(rng.uniform(-3, 1), rng.uniform(-1, 2), rng.uniform(0, 4))
        if abs(model.beta - 2 * alpha + 3) < 1e-9:
            continue
        lam = lambda_general(EntropySpec(alpha), model, rng.uniform(-5, 5))
        verify_flux_identification(lam, EntropySpec(alpha), model)
    assert time.perf_counter() - t0 < 1.0
