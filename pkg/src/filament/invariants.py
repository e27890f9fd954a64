"""Conserved quantities and the gradient/pairing identities that tie them
to the cubic operator.

The energy of a positive-spectrum field u = sum a_k e^{ikx} is

    E_sigma(u) = 4 sum_{k+l = m+n, all >= 1} (min(k,l,m,n) - sigma)
                 a_k a_l conj(a_m a_n),

computed here three independent ways: the exact quadruple sum above
(reference route), an FFT evaluation of the equivalent integral

    (1/2pi) int [ -4|u|^2 L|u|^2 + 2|u|^2 (conj(u) Lu + u L conj(u)) ] dx
    - (2 sigma/pi) int |u|^4 dx,        L = |d/dx|,

and a 2-d midpoint quadrature of the Gagliardo double integral

    (1/4pi^2) iint |u(x)-u(y)|^4 / (1 - cos(x-y)) dx dy
    - (2 sigma/pi) int |u|^4 dx.

The quadratic invariants are the momentum P = 2pi sum |a_k|^2 (the L^2
mass) and the 1/k-weighted mass M = 2pi sum |a_k|^2 / k.  This fixes
M(e_k) = 2pi/k, the unique normalization for which the traveling-wave
pairing identity -c P + w M = (pi/2) E_sigma holds with P(e_k) = 2pi and
E_sigma(e_k) = 4(k - sigma).

With respect to the coefficient a_p (Wirtinger derivative in conj(a_p))
the gradient of E_sigma is 8 C_p, of P is 2pi a_p and of M is 2pi a_p/p;
pairing the gradient identity with u gives

    2pi sum_p conj(C_p) a_p = (pi/2) E_sigma(u),

which :func:`pairing_check` verifies numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralState, dealiased_grid_size, _synthesize
from .nonlinearity import _c_sigma_direct_raw, _shifted_samples

__all__ = [
    "InvariantReport",
    "energy_spectral",
    "energy_lambda_form",
    "energy_quadrature",
    "momentum",
    "mass",
    "first_mode",
    "sobolev_norm",
    "pairing_check",
    "energy_gradient_check",
    "invariant_report",
]

_TWO_PI = 2.0 * np.pi


def _energy_spectral_raw(a: np.ndarray, sigma: int) -> float:
    n = a.size
    acc = 0.0 + 0.0j
    for total in range(2, 2 * n + 1):
        klo = max(1, total - n)
        khi = min(n, total - 1)
        ks = np.arange(klo, khi + 1)
        q = a[ks - 1] * a[total - ks - 1]        # ordered pairs k + l = total
        v = np.minimum(ks, total - ks)
        weight = np.minimum.outer(v, v)          # min over the quadruple
        acc += np.conj(q) @ weight @ q
        if sigma:
            acc -= abs(q.sum()) ** 2
    if abs(acc.imag) > 1e-12 * (1.0 + abs(acc.real)):
        raise RuntimeError(
            f"energy quadruple sum lost Hermitian symmetry: imag part {acc.imag:.3e}"
        )
    return 4.0 * acc.real


def energy_spectral(state: SpectralState) -> float:
    """Reference energy route: exact quadruple sum, grouped by k+l.

    The weights are exact small integers, so the only error is rounding in
    the coefficient products.
    """
    return _energy_spectral_raw(state.coeffs, state.sigma)


def energy_lambda_form(state: SpectralState) -> float:
    """FFT energy route via the |d/dx| multiplier, on an alias-free grid."""
    a = state.coeffs
    n = state.n_modes
    m = dealiased_grid_size(n)
    k = np.arange(1, n + 1)
    u = _synthesize(a, m)
    lam_u = _synthesize(k * a, m)
    usq = (u * np.conj(u)).real
    absfreq = np.abs(np.fft.fftfreq(m, d=1.0 / m))
    lam_usq = np.fft.ifft(absfreq * np.fft.fft(usq)).real
    cross = 2.0 * (np.conj(u) * lam_u).real     # conj(u) Lu + u L conj(u)
    integrand = -4.0 * usq * lam_usq + 2.0 * usq * cross
    energy = integrand.mean()                    # (1/2pi) * integral
    energy -= 4.0 * state.sigma * np.mean(usq**2)
    return float(energy)


def energy_quadrature(state: SpectralState, n_quad: int) -> float:
    """Quadrature energy route: 2-d midpoint rule on the Gagliardo integral.

    The z = x - y grid is shifted off the diagonal; the x grid is plain.
    """
    n = state.n_modes
    if n_quad < 8 * n:
        raise ValueError(f"n_quad must be at least 8*n_modes = {8 * n}, got {n_quad}")
    a = state.coeffs
    mx = dealiased_grid_size(n)
    u = _synthesize(a, mx)
    z = (np.arange(n_quad) + 0.5) * (_TWO_PI / n_quad)
    kern = 1.0 / (1.0 - np.cos(z))
    gagliardo = 0.0
    chunk = max(1, (1 << 20) // mx)  # bound the (z, x) work arrays to ~16 MB each
    for lo in range(0, n_quad, chunk):
        ushift = _shifted_samples(a, z[lo : lo + chunk], mx)
        d4 = np.abs(u[None, :] - ushift) ** 4
        gagliardo += float(d4.sum(axis=1) @ kern[lo : lo + chunk])
    energy = gagliardo / (mx * n_quad)           # (1/4pi^2)(2pi/mx)(2pi/n_quad) sum
    energy -= 4.0 * state.sigma * np.mean(np.abs(u) ** 4)
    return float(energy)


def momentum(state: SpectralState) -> float:
    """P = 2pi sum |a_k|^2 (the squared L^2 norm of the field)."""
    return float(_TWO_PI * np.sum(np.abs(state.coeffs) ** 2))


def mass(state: SpectralState) -> float:
    """M = 2pi sum |a_k|^2 / k (squared norm of the half-antiderivative)."""
    return float(_TWO_PI * np.sum(np.abs(state.coeffs) ** 2 / state.modes))


def first_mode(state: SpectralState) -> complex:
    return complex(state.coeffs[0])


def sobolev_norm(state: SpectralState, s: float) -> float:
    """H^s norm (2pi sum k^{2s} |a_k|^2)^{1/2}; diagnostic only."""
    if s < -1.0:
        raise ValueError(f"Sobolev exponent must be >= -1, got {s}")
    k = state.modes.astype(float)
    return float(np.sqrt(_TWO_PI * np.sum(k ** (2.0 * s) * np.abs(state.coeffs) ** 2)))


def pairing_check(state: SpectralState) -> float:
    """Residual of the pairing identity 2pi sum conj(C_p) a_p = (pi/2) E.

    Exact in exact arithmetic; the return value is the absolute defect.
    """
    a = state.coeffs
    full = _c_sigma_direct_raw(a, state.sigma)
    pairing = _TWO_PI * np.sum(np.conj(full[: a.size]) * a)
    energy = _energy_spectral_raw(a, state.sigma)
    return float(abs(pairing - 0.5 * np.pi * energy))


def energy_gradient_check(state: SpectralState, h: float) -> float:
    """Max deviation between the finite-difference energy gradient and 8 C_p.

    For each mode p the central difference is taken along the real and
    imaginary coefficient directions and combined into the Wirtinger
    gradient (d_re + i d_im)/2.  The energy is an exact quartic, so the
    central-difference error is O(h^2) with no higher-order tail.
    """
    if not 0.0 < h <= 1e-3:
        raise ValueError(f"h must lie in (0, 1e-3], got {h}")
    a = np.array(state.coeffs)
    sigma = state.sigma
    grad = 8.0 * _c_sigma_direct_raw(a, sigma)[: a.size]
    worst = 0.0
    for p in range(a.size):
        fd = np.empty(2)
        for j, direction in enumerate((1.0, 1.0j)):
            bump = np.zeros_like(a)
            bump[p] = h * direction
            e_plus = _energy_spectral_raw(a + bump, sigma)
            e_minus = _energy_spectral_raw(a - bump, sigma)
            fd[j] = (e_plus - e_minus) / (2.0 * h)
        fd_grad = 0.5 * (fd[0] + 1j * fd[1])
        worst = max(worst, abs(fd_grad - grad[p]))
    return worst


@dataclass(frozen=True)
class InvariantReport:
    """Values of the conserved quantities for one state."""

    energy: float
    momentum: float
    mass: float
    a1: complex
    h_s_norms: dict

    def to_record(self) -> dict:
        rec = {
            "E": self.energy,
            "P": self.momentum,
            "M": self.mass,
            "a1_re": self.a1.real,
            "a1_im": self.a1.imag,
        }
        for s, value in self.h_s_norms.items():
            rec[f"H{s:g}"] = value
        return rec


def invariant_report(state: SpectralState, h_s: tuple = ()) -> InvariantReport:
    """Compute all conserved quantities (energy via the exact spectral route)."""
    return InvariantReport(
        energy=energy_spectral(state),
        momentum=momentum(state),
        mass=mass(state),
        a1=first_mode(state),
        h_s_norms={float(s): sobolev_norm(state, s) for s in h_s},
    )
