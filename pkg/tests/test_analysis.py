import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta

from domsamp.analysis import (
    AnalyticFunction,
    GramPencil,
    SpaceParams,
    bergman_norm,
    change_of_variable,
    evaluate,
    gram_form_norm,
    gram_matrix,
    lp_mass,
    monomial,
    monomial_norm_p2,
    polynomial,
    random_polynomial,
)
from domsamp.geometry import DomainError, automorphism, automorphism_derivative
from domsamp.quadrature import disk_rule
from domsamp.region import annuli, annulus, dyadic_grating, empty_region, full_disk, grating, random_sectors

from conftest import random_disk_points


def test_params_validation():
    with pytest.raises(ValueError):
        SpaceParams(0.5, 0.0)
    with pytest.raises(ValueError):
        SpaceParams(2.0, -1.0)


def test_evaluate_examples(rng):
    assert evaluate(polynomial([0, 0, 1]), 0.5) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        evaluate(polynomial([1]), 1.0)
    f = random_polynomial(7, rng)
    z = random_disk_points(rng, 50)
    naive = np.array([sum(c * w**k for k, c in enumerate(f.coeffs)) for w in z])
    assert np.max(np.abs(f(z) - naive)) < 1e-12


def test_composite_at_center():
    a = 0.3 - 0.4j
    f = AnalyticFunction([2.0, 1.0], a, 1.5, 0.5 + 1j)
    # phi_a(a) = 0 and phi_a'(a) = -1 / (1 - |a|^2)
    assert automorphism_derivative(a, a) == pytest.approx(-1 / (1 - abs(a) ** 2))
    expected = (0.5 + 1j) * 2.0 * (1 / (1 - abs(a) ** 2)) ** 1.5
    assert abs(f(a)) == pytest.approx(abs(expected), rel=1e-13)


@pytest.mark.parametrize("n,alpha,expected", [(0, 0.0, 1.0), (0, 2.5, 1.0), (3, 0.0, 0.25), (2, 1.0, 1 / 6)])
def test_monomial_norm_examples(n, alpha, expected):
    assert monomial_norm_p2(n, alpha) == pytest.approx(expected, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 60), st.floats(-0.9, 5.0))
def test_monomial_norm_beta_oracle(n, alpha):
    assert monomial_norm_p2(n, alpha) == pytest.approx((alpha + 1) * beta(n + 1, alpha + 1), rel=1e-11)


def test_bergman_norm_examples():
    for n in (0, 1, 5, 17):
        f = monomial(n, math.sqrt(n + 1))
        assert bergman_norm(f, SpaceParams(2, 0)) == pytest.approx(1.0, rel=1e-12)
    for p, a in [(1, 0), (2, 0.5), (3, -0.5), (2.5, 2)]:
        assert bergman_norm(polynomial([1]), SpaceParams(p, a)) == pytest.approx(1.0, rel=1e-10)
    assert bergman_norm(polynomial([1]), SpaceParams(2, 0), annulus(0.5)) == pytest.approx(math.sqrt(0.75), rel=1e-12)
    assert bergman_norm(polynomial([1, 2]), SpaceParams(2, 0), empty_region()) == 0.0


def test_gram_examples():
    for alpha in (0.0, 0.5, 2.0):
        G = gram_matrix(full_disk(), 12, alpha)
        diag = [monomial_norm_p2(n, alpha) for n in range(13)]
        assert np.allclose(np.diag(G).real, diag, rtol=1e-12, atol=0)
        assert np.max(np.abs(G - np.diag(np.diag(G)))) < 1e-12
    for E in (grating(5, 0.3), random_sectors(3, 4)):
        G = gram_matrix(E, 9, 0.5)
        assert np.array_equal(G, np.conj(G).T)
        assert np.linalg.eigvalsh(G).min() > -1e-12


def test_gram_pencil_invariants():
    pen = GramPencil.build(grating(4, 0.5), 10, 1.0)
    assert np.max(np.abs(pen.G_E - pen.G_E.conj().T)) <= 1e-12
    assert np.all(np.linalg.eigvalsh(pen.G_full) > 0)
    assert np.linalg.eigvalsh(pen.G_E).min() > -1e-12


@pytest.mark.parametrize("p", [2, 4])
@pytest.mark.parametrize("E", [full_disk(), grating(5, 0.3), annuli(0.3), random_sectors(3, 11)])
def test_quadrature_matches_gram_form_even_p(rng, p, E):
    f = random_polynomial(8, rng)
    if p == 2:
        exact = gram_form_norm(f.coeffs, gram_matrix(E, 8, 0.5))
    else:
        # |f|^4 = |f^2|^2, a Gram form in the coefficients of f^2
        sq = np.convolve(f.coeffs, f.coeffs)
        exact = math.sqrt(gram_form_norm(sq, gram_matrix(E, 16, 0.5)))
    assert bergman_norm(f, SpaceParams(p, 0.5), E) == pytest.approx(exact, rel=1e-10)


def test_change_of_variable_examples(rng):
    f = random_polynomial(5, rng)
    params = SpaceParams(2, 0.5)
    g = change_of_variable(f, 0.0, params)
    z = random_disk_points(rng, 100)
    # phi_0(z) = -z, so T_0 f is f reflected through the origin up to a unimodular factor
    assert np.allclose(np.abs(g(z)), np.abs(f(-z)), rtol=1e-13)
    a = 0.5 + 0.3j
    g = change_of_variable(f, a, params)
    expected = f(automorphism(a, z)) * automorphism_derivative(a, z) ** ((2 + 0.5) / 2)
    assert np.allclose(np.abs(g(z)), np.abs(expected), rtol=1e-12)
    with pytest.raises(ValueError):
        change_of_variable(g, 0.1, params)


@pytest.mark.parametrize("p,alpha", [(1, 0), (2, 0.5), (3, 2)])
def test_isometry_sample(rng, p, alpha):
    params = SpaceParams(p, alpha)
    for _ in range(3):
        f = random_polynomial(int(rng.integers(0, 7)), rng)
        a = random_disk_points(rng, 1, 0.9)[0]
        n0 = bergman_norm(f, params)
        n1 = bergman_norm(change_of_variable(f, a, params), params)
        assert abs(n1 - n0) / n0 < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1.0, 2.0, 3.0]))
def test_norm_monotone_in_region(seed, p):
    rng = np.random.default_rng(seed)
    f = random_polynomial(6, rng)
    params = SpaceParams(p, 0.0)
    fill = sorted(rng.uniform(0.05, 0.95, size=2))
    pairs = [
        (grating(6, fill[0]), grating(6, fill[1])),
        (annulus(0.8), annulus(0.3)),
        (dyadic_grating(2, fill[0], 5), full_disk()),
    ]
    for small, big in pairs:
        assert bergman_norm(f, params, small) <= bergman_norm(f, params, big) * (1 + 1e-10)


def test_lp_mass_matches_norm(rng):
    f = random_polynomial(4, rng)
    params = SpaceParams(3, 1.0)
    assert lp_mass(f, params) == pytest.approx(bergman_norm(f, params) ** 3, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_submean_bound(rng, alpha):
    """sup_{D(z0,rho)} |h|^p <= C (1 - rho/t)^-(2+alpha) int_{D(z0,t)} |h|^p dA_alpha.

    Subharmonicity over D(w, t - rho) gives C = 1 / (t^2 min weight on D(z0, t)),
    with dA_alpha = (alpha+1)/pi (1-|z|^2)^alpha dA.
    """
    p = 2.0
    for _ in range(20):
        h = random_polynomial(int(rng.integers(1, 12)), rng)
        z0 = random_disk_points(rng, 1, 0.6)[0]
        t = rng.uniform(0.05, (1 - abs(z0)) * 0.95)
        rho = t * rng.uniform(0.05, 0.95)
        z, w = disk_rule(z0, t, 40, 80)
        dens = (alpha + 1) * (1 - np.abs(z[0]) ** 2) ** alpha
        mass = np.sum(w[0] * dens * np.abs(h(z[0])) ** p) / math.pi
        ring = z0 + rho * np.exp(2j * np.pi * np.arange(2048) / 2048)
        sup = np.max(np.abs(h(ring)) ** p)
        min_weight = (alpha + 1) * (1 - (abs(z0) + t) ** 2) ** alpha
        C = 1.0 / (t**2 * min_weight)
        assert sup <= C * (1 - rho / t) ** -(2 + alpha) * mass * (1 + 1e-9)


def test_function_json_round_trip(tmp_path):
    f = AnalyticFunction([1 + 2j, -0.5], 0.2 + 0.1j, 1.25, 2.0)
    assert AnalyticFunction.from_dict(f.to_dict()) == f
    path = tmp_path / "f.json"
    path.write_text('{"coeffs": [[1, 0], [0, 2]]}')
    assert AnalyticFunction.load(path).coeffs == (1 + 0j, 2j)
