"""Spectral representation of positive-spectrum fields on the 2*pi torus.

A field u(x) = sum_{k=1..N} a_k e^{ikx} is stored as the coefficient
vector (a_1, ..., a_N).  Modes k <= 0 have no slot in the representation,
so the positive-spectrum constraint is structural and the zero mode is
identically absent (which keeps the 1/k-weighted mass finite).

Multiplier conventions used throughout the package:

    d/dx    <->  i*k          derivative
    Lambda  <->  |k|          absolute derivative
    Q^J     <->  1_[0,J](k)   sharp Galerkin cutoff

All pointwise cubic products of bandwidth-N states are formed on grids of
size >= 4*N.  A cubic product of three bandwidth-N factors only reaches
mode 3*N, so with that margin every FFT product in the package is exactly
alias-free and agrees with the direct convolution up to rounding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len

__all__ = [
    "SpectralState",
    "GridField",
    "MULTIPLIER_SYMBOLS",
    "apply_multiplier",
    "to_grid",
    "from_grid",
    "dealiased_grid_size",
    "p_norm",
    "seeded_state",
    "state_to_dict",
    "state_from_dict",
    "write_snapshot",
    "read_snapshot",
]


@dataclass(frozen=True)
class SpectralState:
    """Coefficients a_1..a_N of a positive-spectrum field, plus the case flag.

    sigma = 0 is the planar interface case, sigma = 1 the spherical one.
    Instances are immutable; the coefficient array is made read-only so
    states can be shared freely between threads.
    """

    sigma: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.sigma not in (0, 1):
            raise ValueError(f"sigma must be 0 or 1, got {self.sigma!r}")
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("coeffs must be a non-empty 1-d sequence")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self) -> int:
        return self.coeffs.size

    @property
    def modes(self) -> np.ndarray:
        """Wavenumbers 1..N matching ``coeffs``."""
        return np.arange(1, self.n_modes + 1)

    def with_coeffs(self, coeffs) -> "SpectralState":
        return SpectralState(self.sigma, coeffs)


@dataclass(frozen=True)
class GridField:
    """Complex samples at the equispaced points x_j = 2*pi*j/M, j = 0..M-1."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128).copy()
        if s.ndim != 1 or s.size < 1:
            raise ValueError("samples must be a non-empty 1-d sequence")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def grid_size(self) -> int:
        return self.samples.size


# symbols of the diagonal multipliers, as functions of the integer mode
MULTIPLIER_SYMBOLS = {
    "lambda": lambda k: abs(k),
    "lambda_inv": lambda k: 1.0 / abs(k),
    "d_x": lambda k: 1j * k,
}


def apply_multiplier(state: SpectralState, which: str, cutoff: int | None = None) -> SpectralState:
    """Apply a diagonal Fourier multiplier to a state.

    ``which`` is one of ``lambda`` (symbol |k|), ``lambda_inv`` (1/|k|,
    well defined since k >= 1), ``d_x`` (i*k) or ``q_cutoff`` (zero all
    modes above ``cutoff``).  Multipliers never enlarge the support of the
    spectrum.
    """
    k = state.modes
    if which == "q_cutoff":
        if cutoff is None or cutoff < 0:
            raise ValueError("q_cutoff needs a nonnegative integer cutoff")
        out = np.array(state.coeffs)
        out[k > cutoff] = 0.0
        return state.with_coeffs(out)
    try:
        symbol = MULTIPLIER_SYMBOLS[which]
    except KeyError:
        names = tuple(MULTIPLIER_SYMBOLS) + ("q_cutoff",)
        raise ValueError(f"unknown multiplier {which!r}; expected one of {names}") from None
    return state.with_coeffs(np.array([symbol(int(kk)) for kk in k]) * state.coeffs)


def _synthesize(coeffs: np.ndarray, grid_size: int) -> np.ndarray:
    """Exact synthesis of positive modes 1..N on an M-point grid (M >= N+1)."""
    n = coeffs.size
    spectrum = np.zeros(grid_size, dtype=np.complex128)
    spectrum[1 : n + 1] = coeffs
    return np.fft.ifft(spectrum) * grid_size


def _analyze(samples: np.ndarray, n_modes: int) -> np.ndarray:
    """Discrete Fourier analysis keeping modes 1..N only."""
    spectrum = np.fft.fft(samples) / samples.size
    return spectrum[1 : n_modes + 1].copy()


def to_grid(state: SpectralState, grid_size: int) -> GridField:
    """Sample the field on the equispaced M-point grid (exact synthesis)."""
    if grid_size < state.n_modes + 1:
        raise ValueError(
            f"grid_size {grid_size} too small for {state.n_modes} modes "
            f"(need at least n_modes + 1)"
        )
    return GridField(_synthesize(state.coeffs, grid_size))


def from_grid(fieldv: GridField, n_modes: int, sigma: int = 0) -> SpectralState:
    """Extract modes 1..N of the sampled function.

    Modes k <= 0 and k > N are discarded, i.e. this realizes the
    positive-frequency projector composed with the cutoff Q^N.  The caller
    must supply a grid fine enough that no mode of the sampled function
    aliases onto bins 1..N.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if n_modes > fieldv.grid_size - 1:
        raise ValueError(
            f"cannot extract {n_modes} modes from a {fieldv.grid_size}-point grid"
        )
    return SpectralState(sigma, _analyze(fieldv.samples, n_modes))


def dealiased_grid_size(n_modes: int) -> int:
    """Grid size for alias-free cubic products: >= 4*N, rounded up to a
    highly composite FFT length (correctness never depends on the rounding)."""
    return next_fast_len(max(4 * n_modes, 8))


def p_norm(coeffs: np.ndarray) -> float:
    """Norm induced by the momentum quadratic form: sqrt(2*pi*sum|c_k|^2)."""
    return float(np.sqrt(2.0 * np.pi * np.sum(np.abs(coeffs) ** 2)))


def seeded_state(
    sigma: int,
    n_modes: int,
    seed: int,
    decay: float = 1.5,
    amplitude: float = 0.5,
) -> SpectralState:
    """Deterministic pseudo-random state with |a_k| ~ 1/k**decay.

    The default decay keeps the field smooth enough that every quadrature
    oracle in the package converges fast; ``amplitude`` is the l2 norm of
    the coefficient vector after scaling.
    """
    rng = np.random.default_rng(seed)
    k = np.arange(1, n_modes + 1, dtype=float)
    raw = (rng.standard_normal(n_modes) + 1j * rng.standard_normal(n_modes)) / k**decay
    norm = np.linalg.norm(raw)
    if norm == 0.0:  # cannot happen for a continuous distribution, but be safe
        raw = np.ones(n_modes, dtype=np.complex128) / k**decay
        norm = np.linalg.norm(raw)
    return SpectralState(sigma, raw * (amplitude / norm))


# ---------------------------------------------------------------------------
# Snapshot file format: {"sigma": 0|1, "n_modes": N, "coeffs": [[re, im], ...]}
# with coefficients in increasing mode order.

def state_to_dict(state: SpectralState) -> dict:
    return {
        "sigma": int(state.sigma),
        "n_modes": int(state.n_modes),
        "coeffs": [[float(c.real), float(c.imag)] for c in state.coeffs],
    }


def state_from_dict(data: dict) -> SpectralState:
    try:
        sigma = data["sigma"]
        n_modes = data["n_modes"]
        pairs = data["coeffs"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"snapshot record missing field: {exc}") from exc
    if sigma not in (0, 1):
        raise ValueError(f"snapshot sigma must be 0 or 1, got {sigma!r}")
    if not isinstance(n_modes, int) or n_modes < 1:
        raise ValueError(f"snapshot n_modes must be a positive integer, got {n_modes!r}")
    if len(pairs) != n_modes:
        raise ValueError(
            f"snapshot coeffs has {len(pairs)} entries but n_modes = {n_modes}"
        )
    coeffs = np.empty(n_modes, dtype=np.complex128)
    for i, pair in enumerate(pairs):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ValueError(f"snapshot coeffs[{i}] must be a [re, im] pair")
        coeffs[i] = complex(float(pair[0]), float(pair[1]))
    return SpectralState(sigma, coeffs)


def write_snapshot(state: SpectralState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_dict(state), fh)
        fh.write("\n")


def read_snapshot(path) -> SpectralState:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"snapshot {path} is not valid JSON: {exc}") from exc
    return state_from_dict(data)
