"""The cubic interaction operator of the filamentation equation.

For u = sum_{k>=1} a_k e^{ikx} the operator is the weighted triple
convolution

    C_sigma[u] = sum_{p = k+l-m, k,l,m,p >= 1} (min(k,l,m,p) - sigma)
                 a_k a_l conj(a_m) e^{ipx},

equivalently (unsymmetrized weight) k - |k-p| - sigma, and in physical
space

    C_sigma[u] = P+[ |u|^2 Lu - u L|u|^2 - sigma |u|^2 u ],       L = |d/dx|,

with P+ the positive-frequency projector.  The singular-integral form

    C_sigma[u](x) = P+[ (1/4pi) int |du|^2 du / (1 - cos(x-y)) dy
                        - sigma |u(x)|^2 u(x) ],   du = u(x) - u(y),

is also provided, discretized by a midpoint rule in z = x - y that never
touches the removable singularity at z = 0.  The four routes agree to
rounding for band-limited states; the direct triple sum is the reference.

For bandwidth-N input the output is supported on modes 1..2N-1 exactly;
``coeffs_full`` carries that whole support and ``coeffs_truncated`` its
first N entries (the sharp-cutoff Galerkin nonlinearity).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralState, dealiased_grid_size, _synthesize

__all__ = [
    "NonlinearityResult",
    "c_sigma_direct",
    "c_sigma_unsym",
    "c_sigma_fast",
    "c_sigma_quadrature",
    "kernel_integral",
]


@dataclass(frozen=True)
class NonlinearityResult:
    """Coefficients of C_sigma[u] on modes 1..2N-1 for bandwidth-N input."""

    sigma: int
    n_modes: int
    coeffs_full: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs_full, dtype=np.complex128).copy()
        if c.size != 2 * self.n_modes - 1:
            raise ValueError(
                f"coeffs_full must have 2N-1 = {2 * self.n_modes - 1} entries, got {c.size}"
            )
        c.flags.writeable = False
        object.__setattr__(self, "coeffs_full", c)

    @property
    def coeffs_truncated(self) -> np.ndarray:
        """Modes 1..N, i.e. the cutoff Q^N applied to the full output."""
        return self.coeffs_full[: self.n_modes]


def _accumulate(out: np.ndarray, p_index: np.ndarray, values: np.ndarray) -> None:
    # complex bincount: numpy's bincount is real-only
    out.real += np.bincount(p_index, values.real, minlength=out.size)
    out.imag += np.bincount(p_index, values.imag, minlength=out.size)


def _c_sigma_direct_raw(a: np.ndarray, sigma: int) -> np.ndarray:
    n = a.size
    out = np.zeros(2 * n - 1, dtype=np.complex128)
    ks = np.arange(1, n + 1)
    lgrid, mgrid = np.meshgrid(ks, ks, indexing="ij")
    pair = a[lgrid - 1] * np.conj(a[mgrid - 1])
    for k in ks:
        p = k + lgrid - mgrid
        valid = p >= 1
        weight = np.minimum(np.minimum(k, lgrid), np.minimum(mgrid, p)) - sigma
        vals = (a[k - 1] * pair[valid]) * weight[valid]
        _accumulate(out, p[valid] - 1, vals)
    return out


def _c_sigma_unsym_raw(a: np.ndarray, sigma: int) -> np.ndarray:
    n = a.size
    out = np.zeros(2 * n - 1, dtype=np.complex128)
    ks = np.arange(1, n + 1)
    lgrid, mgrid = np.meshgrid(ks, ks, indexing="ij")
    pair = a[lgrid - 1] * np.conj(a[mgrid - 1])
    for k in ks:
        p = k + lgrid - mgrid
        valid = p >= 1
        weight = k - np.abs(k - p) - sigma
        vals = (a[k - 1] * pair[valid]) * weight[valid]
        _accumulate(out, p[valid] - 1, vals)
    return out


def _c_zero_fast_raw(a: np.ndarray) -> np.ndarray:
    n = a.size
    m = dealiased_grid_size(n)
    k = np.arange(1, n + 1)
    u = _synthesize(a, m)
    lam_u = _synthesize(k * a, m)
    usq = u * np.conj(u)  # |u|^2, real up to rounding, signed spectrum in [-(N-1), N-1]
    usq_hat = np.fft.fft(usq)
    absfreq = np.abs(np.fft.fftfreq(m, d=1.0 / m))
    lam_usq = np.fft.ifft(absfreq * usq_hat)
    g = usq * lam_u - u * lam_usq
    ghat = np.fft.fft(g) / m
    return ghat[1 : 2 * n].copy()


def _c_sigma_fast_raw(a: np.ndarray, sigma: int) -> np.ndarray:
    if sigma == 0:
        return _c_zero_fast_raw(a)
    # min(k,l,m,p) - 1 = min(k-1, l-1, m-1, p-1) on the interaction set, and
    # any shifted index hitting 0 kills the weight, so the sigma = 1 operator
    # is the sigma = 0 one acting on (a_2, ..., a_N) shifted down one mode.
    # This avoids subtracting the nearly-cancelling |u|^2 u term and makes
    # the vanishing of the mode-1 output exact.
    n = a.size
    out = np.zeros(2 * n - 1, dtype=np.complex128)
    if n >= 2:
        out[1 : 2 * n - 2] = _c_zero_fast_raw(a[1:])
    return out


def c_sigma_direct(state: SpectralState) -> NonlinearityResult:
    """Reference route: exact triple sum with the min(k,l,m,p) - sigma weight.

    Cost O(N^3); every other route is validated against this one.
    """
    return NonlinearityResult(
        state.sigma, state.n_modes, _c_sigma_direct_raw(state.coeffs, state.sigma)
    )


def c_sigma_unsym(state: SpectralState) -> NonlinearityResult:
    """Triple sum with the unsymmetrized weight k - |k-p| - sigma.

    Agrees with :func:`c_sigma_direct` exactly, since symmetrizing over
    (k, l) turns that weight into min(k,l,m,p) - sigma.
    """
    return NonlinearityResult(
        state.sigma, state.n_modes, _c_sigma_unsym_raw(state.coeffs, state.sigma)
    )


def c_sigma_fast(state: SpectralState) -> NonlinearityResult:
    """FFT route via |u|^2 Lu - u L|u|^2 on a 4N grid (L with symbol |k|
    on the full signed spectrum of |u|^2).

    The sigma = 1 case is reduced to sigma = 0 by the exact index shift
    min(k,l,m,p) - 1 = min(k-1, l-1, m-1, p-1), which sidesteps the
    nearly-cancelling |u|^2 u subtraction.  Cost O(N log N); exact up to
    rounding thanks to the de-aliasing margin.
    """
    return NonlinearityResult(
        state.sigma, state.n_modes, _c_sigma_fast_raw(state.coeffs, state.sigma)
    )


def _shifted_samples(a: np.ndarray, z: np.ndarray, grid_size: int) -> np.ndarray:
    """Rows j hold the samples of x -> u(x - z_j) on the M-point x grid."""
    n = a.size
    k = np.arange(1, n + 1)
    shifted = a[None, :] * np.exp(-1j * np.outer(z, k))
    spectra = np.zeros((z.size, grid_size), dtype=np.complex128)
    spectra[:, 1 : n + 1] = shifted
    return np.fft.ifft(spectra, axis=1) * grid_size


def c_sigma_quadrature(state: SpectralState, n_quad: int) -> NonlinearityResult:
    """Direct quadrature of the singular-integral form.

    Midpoint nodes z_j = (j + 1/2) * 2*pi/n_quad in z = x - y avoid the
    diagonal, where the integrand extends continuously by 0 (the numerator
    vanishes cubically, the denominator only quadratically).
    """
    n = state.n_modes
    if n_quad < 8 * n:
        raise ValueError(f"n_quad must be at least 8*n_modes = {8 * n}, got {n_quad}")
    a = state.coeffs
    mx = dealiased_grid_size(n)
    u = _synthesize(a, mx)
    z = (np.arange(n_quad) + 0.5) * (2.0 * np.pi / n_quad)
    kern = 1.0 / (1.0 - np.cos(z))
    acc = np.zeros(mx, dtype=np.complex128)
    chunk = max(1, (1 << 20) // mx)  # bound the (z, x) work arrays to ~16 MB each
    for lo in range(0, n_quad, chunk):
        zs = z[lo : lo + chunk]
        ushift = _shifted_samples(a, zs, mx)
        d = u[None, :] - ushift
        acc += np.einsum("jx,j->x", np.abs(d) ** 2 * d, kern[lo : lo + chunk])
    integral = acc / (2.0 * n_quad)  # (1/4pi) * (2pi/n_quad) * sum_j
    g = integral - state.sigma * np.abs(u) ** 2 * u
    ghat = np.fft.fft(g) / mx
    return NonlinearityResult(state.sigma, n, ghat[1 : 2 * n].copy())


def kernel_integral(m: int, n_quad: int) -> float:
    """Midpoint-rule value of int_0^{2pi} (1 - cos(m z)) / (1 - cos z) dz.

    The exact value is 2*pi*|m|; this validates the quadrature scheme used
    by :func:`c_sigma_quadrature` on the same kernel.
    """
    if n_quad < 64:
        raise ValueError(f"n_quad must be at least 64, got {n_quad}")
    z = (np.arange(n_quad) + 0.5) * (2.0 * np.pi / n_quad)
    vals = (1.0 - np.cos(m * z)) / (1.0 - np.cos(z))
    return float(vals.sum() * 2.0 * np.pi / n_quad)
