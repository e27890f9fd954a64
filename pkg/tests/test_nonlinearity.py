import numpy as np
import pytest

from filament.spectral import SpectralState, seeded_state
from filament.nonlinearity import (
    c_sigma_direct,
    c_sigma_unsym,
    c_sigma_fast,
    c_sigma_quadrature,
    kernel_integral,
)

from oracles import cubic_brute_force

ROUTES = [c_sigma_direct, c_sigma_unsym, c_sigma_fast]


def single_mode(k, sigma, n):
    coeffs = np.zeros(n, dtype=complex)
    coeffs[k - 1] = 1.0
    return SpectralState(sigma, coeffs)


@pytest.mark.parametrize("route", ROUTES)
@pytest.mark.parametrize("sigma", [0, 1])
def test_single_mode_eigenrelation(route, sigma):
    n = 16
    for k in range(1, n + 1):
        out = route(single_mode(k, sigma, n)).coeffs_full
        expect = np.zeros(2 * n - 1, dtype=complex)
        expect[k - 1] = k - sigma
        assert np.max(np.abs(out - expect)) <= 1e-12 * max(1.0, k)


@pytest.mark.parametrize("route", ROUTES)
def test_zero_state(route):
    out = route(SpectralState(0, np.zeros(6)))
    assert np.all(out.coeffs_full == 0.0)


@pytest.mark.parametrize("route", ROUTES + [lambda s: c_sigma_quadrature(s, 2048)])
def test_two_coefficient_values(route):
    # enumerating the 8 triples over {1,2}^3 with p >= 1 gives
    # sum min = (3, 4, 1) and sum (min - 1) = (0, 1, 0) on modes 1..3
    got0 = route(SpectralState(0, [1.0, 1.0])).coeffs_full
    got1 = route(SpectralState(1, [1.0, 1.0])).coeffs_full
    assert np.allclose(got0, [3.0, 4.0, 1.0], atol=1e-10)
    assert np.allclose(got1, [0.0, 1.0, 0.0], atol=1e-10)


@pytest.mark.parametrize("sigma", [0, 1])
@pytest.mark.parametrize("seed", range(4))
def test_routes_match_brute_force(sigma, seed):
    st = seeded_state(sigma, 8, seed, amplitude=1.0)
    expect = cubic_brute_force(st.coeffs, sigma)
    scale = np.max(np.abs(expect))
    for route in ROUTES:
        assert np.max(np.abs(route(st).coeffs_full - expect)) <= 1e-13 * scale
    quad = c_sigma_quadrature(st, 8 * st.n_modes).coeffs_full
    assert np.max(np.abs(quad - expect)) <= 1e-6 * scale


@pytest.mark.parametrize("sigma", [0, 1])
def test_route_equivalence_at_scale(sigma):
    for seed in range(5):
        st = seeded_state(sigma, 64, seed)
        ref = c_sigma_direct(st).coeffs_full
        scale = np.max(np.abs(ref))
        assert np.max(np.abs(c_sigma_unsym(st).coeffs_full - ref)) <= 1e-13 * scale
        assert np.max(np.abs(c_sigma_fast(st).coeffs_full - ref)) <= 1e-12 * scale


def test_quadrature_minimum_resolution_is_exact():
    # the z-integrand of a bandwidth-N state is a trig polynomial of degree
    # <= 2N+1, so the midpoint rule is already exact at the 8N floor
    st = seeded_state(0, 12, 9)
    ref = c_sigma_direct(st).coeffs_full
    got = c_sigma_quadrature(st, 8 * 12).coeffs_full
    assert np.max(np.abs(got - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_quadrature_single_mode():
    got = c_sigma_quadrature(single_mode(1, 0, 1), 512).coeffs_full
    assert abs(got[0] - 1.0) <= 1e-6


def test_quadrature_resolution_check():
    with pytest.raises(ValueError):
        c_sigma_quadrature(seeded_state(0, 8, 0), 63)


def test_truncation_is_prefix():
    st = seeded_state(1, 10, 2)
    res = c_sigma_direct(st)
    assert np.array_equal(res.coeffs_truncated, res.coeffs_full[:10])
    assert res.coeffs_full.size == 19


@pytest.mark.parametrize("seed", range(5))
def test_sigma1_mode_one_output_vanishes(seed):
    # every p = 1 interaction carries weight min(k,l,m,1) - 1 = 0
    st = seeded_state(1, 24, seed, amplitude=1.0)
    assert c_sigma_direct(st).coeffs_full[0] == 0.0
    assert abs(c_sigma_fast(st).coeffs_full[0]) <= 1e-14


def test_phase_covariance():
    st = seeded_state(0, 12, 5)
    theta = 0.73
    rotated = st.with_coeffs(np.exp(1j * theta) * st.coeffs)
    lhs = c_sigma_direct(rotated).coeffs_full
    rhs = np.exp(1j * theta) * c_sigma_direct(st).coeffs_full
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-14)


def test_translation_covariance():
    st = seeded_state(1, 12, 6)
    x0 = 1.1
    modes_in = np.arange(1, 13)
    shifted = st.with_coeffs(st.coeffs * np.exp(1j * modes_in * x0))
    lhs = c_sigma_direct(shifted).coeffs_full
    modes_out = np.arange(1, 24)
    rhs = c_sigma_direct(st).coeffs_full * np.exp(1j * modes_out * x0)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-14)


@pytest.mark.parametrize("lam", [0.5, 2.0, 1.7 + 0.4j])
def test_cubic_homogeneity(lam):
    st = seeded_state(0, 10, 8)
    scaled = st.with_coeffs(lam * st.coeffs)
    lhs = c_sigma_direct(scaled).coeffs_full
    rhs = lam * abs(lam) ** 2 * c_sigma_direct(st).coeffs_full
    assert np.allclose(lhs, rhs, rtol=1e-13, atol=1e-16)


def test_kernel_integral_values():
    assert kernel_integral(0, 4096) == 0.0
    assert abs(kernel_integral(3, 4096) - 6.0 * np.pi) <= 1e-8
    assert abs(kernel_integral(-2, 4096) - 4.0 * np.pi) <= 1e-8


def test_kernel_integral_sweep():
    for m in range(-16, 17):
        assert abs(kernel_integral(m, 4096) - 2.0 * np.pi * abs(m)) <= 1e-8


def test_kernel_integral_resolution_check():
    with pytest.raises(ValueError):
        kernel_integral(3, 32)
