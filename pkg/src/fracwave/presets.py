"""Named initial-data generators shared by the CLI and the test harnesses."""

from __future__ import annotations

import math

import numpy as np

from .spectral import ModeCoefficients, SpectralDomain

__all__ = [
    "single_mode",
    "poly_bump",
    "random_decay",
    "power_decay",
    "h1_saturating",
    "build_preset",
    "PRESET_NAMES",
]


def single_mode(N: int, k: int = 1, amplitude: float = 1.0, on: str = "u0") -> ModeCoefficients:
    """All energy in one mode, on the position or the velocity datum."""
    if not 1 <= k <= N:
        raise ValueError("mode index out of range")
    if on not in ("u0", "u1"):
        raise ValueError("on must be 'u0' or 'u1'")
    a = np.zeros(N)
    b = np.zeros(N)
    (a if on == "u0" else b)[k - 1] = amplitude
    return ModeCoefficients(a, b)


def poly_bump(domain: SpectralDomain) -> ModeCoefficients:
    """Position datum x (L - x) on the interval; cubic coefficient decay."""
    if not domain.is_interval:
        raise ValueError("the polynomial bump preset is interval-only")
    (L,) = domain.lengths
    n = np.arange(1, domain.mode_count + 1)
    a = math.sqrt(2.0 / L) * 2.0 * L**3 * (1.0 - np.cos(n * math.pi)) / (n * math.pi) ** 3
    return ModeCoefficients(a, np.zeros_like(a))


def random_decay(N: int, p: float, seed: int, on: str = "both") -> ModeCoefficients:
    """Gaussian draws damped by n^-p; the seed fixes the draw exactly."""
    if p <= 0.5:
        raise ValueError("need p > 1/2 for square-summable data")
    rng = np.random.default_rng(seed)
    n = np.arange(1, N + 1, dtype=float)
    a = rng.standard_normal(N) * n ** (-p)
    b = rng.standard_normal(N) * n ** (-p)
    if on == "u0":
        b = np.zeros(N)
    elif on == "u1":
        a = np.zeros(N)
    elif on != "both":
        raise ValueError("on must be 'u0', 'u1' or 'both'")
    return ModeCoefficients(a, b)


def power_decay(N: int, s: float, on: str = "u0") -> ModeCoefficients:
    """Deterministic coefficients n^-s on one datum."""
    n = np.arange(1, N + 1, dtype=float)
    c = n ** (-s)
    z = np.zeros(N)
    return ModeCoefficients(c, z) if on == "u0" else ModeCoefficients(z, c)


def h1_saturating(N: int, delta: float = 0.05) -> ModeCoefficients:
    """Position data barely inside the energy class: lambda_n a_n^2 ~ n^(-1-delta).

    Useful for rate fits that must realize the worst-case envelope rather
    than the faster single-mode decay.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    return power_decay(N, (3.0 + delta) / 2.0, on="u0")


PRESET_NAMES = ("single-mode", "poly-bump", "random-decay", "h1-saturating")


def build_preset(name: str, domain: SpectralDomain, *, mode: int = 1, p: float = 2.0,
                 seed: int = 0, delta: float = 0.05, on: str = "u0") -> ModeCoefficients:
    """Construct a named preset sized for the given domain."""
    N = domain.mode_count
    if name == "single-mode":
        return single_mode(N, k=mode, on=on)
    if name == "poly-bump":
        return poly_bump(domain)
    if name == "random-decay":
        return random_decay(N, p=p, seed=seed, on="both")
    if name == "h1-saturating":
        return h1_saturating(N, delta=delta)
    raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
