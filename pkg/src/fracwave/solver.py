"""Exact-in-time series solution of the fractional diffusion-wave problem.

Each Dirichlet mode evolves independently:

    y_n(t)      = a_n E_{a,1}(-l_n t^a) + b_n t E_{a,2}(-l_n t^a)
    y_n'(t)     = -l_n a_n t^(a-1) E_{a,a}(-l_n t^a) + b_n E_{a,1}(-l_n t^a)
    (D_t^a y)_n = -l_n y_n(t)

with ``a`` the fractional order and ``l_n`` the eigenvalue.  Fields are
pairwise-summed over modes in ascending order, so results are bitwise
reproducible.  Every solve can report an upper estimate of the norm it is
missing by truncating the mode sum.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .fracops import TimeGrid
from .mittag_leffler import MLParams, ml, verify_decay_bound
from .params import FracOrder, as_alpha
from .spectral import ModeCoefficients, SpectralDomain, eval_modes, pairwise_sum

__all__ = [
    "SolutionQuery",
    "ModeState",
    "mode_solution",
    "mode_second_derivative",
    "mode_second_derivative_samples",
    "coefficient_evolution",
    "solve_field",
    "truncation_tail",
    "write_snapshots_csv",
    "write_manifest",
]

_WHICH = ("value", "velocity", "caputo")


@dataclass(frozen=True)
class SolutionQuery:
    """One solve request: order, domain, data, time grid, selected quantity."""

    alpha: FracOrder
    domain: SpectralDomain
    data: ModeCoefficients
    tgrid: TimeGrid
    which: str = "value"
    n_sum: int | None = None  # modes actually summed; rest feed the tail bound

    def __post_init__(self):
        object.__setattr__(self, "alpha", FracOrder(as_alpha(self.alpha)))
        if len(self.data) != self.domain.mode_count:
            raise ValueError("data length must equal the domain mode count")
        if self.which not in _WHICH:
            raise ValueError(f"which must be one of {_WHICH}")
        if self.n_sum is not None and not 1 <= self.n_sum <= self.domain.mode_count:
            raise ValueError("n_sum must lie in [1, mode_count]")

    @property
    def active_modes(self) -> int:
        return self.domain.mode_count if self.n_sum is None else self.n_sum


@dataclass(frozen=True)
class ModeState:
    """Value, velocity and fractional derivative of one mode (per time)."""

    y: np.ndarray
    y_prime: np.ndarray
    y_caputo: np.ndarray


def mode_solution(lam: float, alpha, a: float, b: float, t) -> ModeState:
    """Evolve a single mode; ``t`` may be a scalar or an array, t >= 0."""
    if lam <= 0.0:
        raise ValueError("the eigenvalue must be positive")
    al = as_alpha(alpha)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt < 0.0):
        raise ValueError("t must be non-negative")
    z = -lam * tt**al
    e1 = ml(MLParams(al, 1.0), z)
    e2 = ml(MLParams(al, 2.0), z)
    ea = ml(MLParams(al, al), z)
    y = a * e1 + b * tt * e2
    # t^(alpha-1) -> 0 as t -> 0 for alpha > 1; branch to avoid 0**negative
    tpow = np.zeros_like(tt)
    pos = tt > 0.0
    tpow[pos] = tt[pos] ** (al - 1.0)
    y_prime = -lam * a * tpow * ea + b * e1
    y_caputo = -lam * y
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return ModeState(float(y[0]), float(y_prime[0]), float(y_caputo[0]))
    return ModeState(y, y_prime, y_caputo)


def mode_second_derivative(lam: float, alpha, a: float, b: float, t) -> np.ndarray:
    """Analytic second time derivative of a mode, valid for t > 0.

    Used by residual studies that feed the discrete fractional derivative;
    it blows up like t^(alpha-2) at the origin, so t = 0 is rejected.
    """
    al = as_alpha(alpha)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt <= 0.0):
        raise ValueError("the second derivative needs t > 0")
    z = -lam * tt**al
    eam1 = ml(MLParams(al, al - 1.0), z)
    ea = ml(MLParams(al, al), z)
    out = -lam * (a * tt ** (al - 2.0) * eam1 + b * tt ** (al - 1.0) * ea)
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(out[0])
    return out


def mode_second_derivative_samples(lam: float, alpha, a: float, b: float, tgrid: TimeGrid) -> np.ndarray:
    """Second-derivative node samples tuned for the product-trapezoid rule.

    Near the origin y'' blows up like t^(alpha-2) and plain samples make the
    piecewise-linear interpolant integrate wrongly at first order.  Over the
    first ~sqrt(M) panels the samples are chosen so the interpolant's panel
    means equal the exact ones (backward recursion anchored on the exact
    value at the junction); beyond that the samples are exact.  Quadrature
    error norms away from the origin then converge at roughly first order
    instead of alpha - 1.
    """
    al = as_alpha(alpha)
    t = tgrid.nodes
    h = tgrid.spacing
    M = tgrid.steps
    J = min(M // 2, max(4, math.isqrt(M)))
    v = np.empty(M + 1)
    v[J:] = mode_second_derivative(lam, al, a, b, t[J:])
    state = mode_solution(lam, al, a, b, t[: J + 1])
    means = np.diff(np.atleast_1d(state.y_prime)) / h
    for j in range(J - 1, -1, -1):
        v[j] = 2.0 * means[j] - v[j + 1]
    return v


def coefficient_evolution(query: SolutionQuery) -> np.ndarray:
    """Selected per-mode quantity on the time grid, shape (n_active, M+1)."""
    al = query.alpha.alpha
    n = query.active_modes
    lam = query.domain.eigenvalues[:n]
    a = query.data.a[:n]
    b = query.data.b[:n]
    tt = query.tgrid.nodes
    z = -np.outer(lam, tt**al)
    e1 = ml(MLParams(al, 1.0), z)
    if query.which == "value":
        e2 = ml(MLParams(al, 2.0), z)
        return a[:, None] * e1 + b[:, None] * tt[None, :] * e2
    if query.which == "caputo":
        e2 = ml(MLParams(al, 2.0), z)
        y = a[:, None] * e1 + b[:, None] * tt[None, :] * e2
        return -lam[:, None] * y
    ea = ml(MLParams(al, al), z)
    tpow = np.zeros_like(tt)
    tpow[tt > 0.0] = tt[tt > 0.0] ** (al - 1.0)
    return -lam[:, None] * a[:, None] * tpow[None, :] * ea + b[:, None] * e1


def solve_field(query: SolutionQuery, points) -> np.ndarray:
    """Field snapshots, shape (M+1, P): rows are time nodes."""
    coeff = coefficient_evolution(query)
    E = eval_modes(query.domain, points)[: query.active_modes]
    # fixed ascending-mode pairwise reduction for reproducibility
    return pairwise_sum(coeff[:, :, None] * E[:, None, :], axis=0)


_DECAY_CACHE: dict[tuple[float, float], float] = {}


def _decay_constant(alpha: float, beta: float) -> float:
    key = (alpha, beta)
    if key not in _DECAY_CACHE:
        samples = [-(2.0**k) for k in range(21)]
        _DECAY_CACHE[key] = verify_decay_bound(MLParams(alpha, beta), samples).c_empirical
    return _DECAY_CACHE[key]


def truncation_tail(query: SolutionQuery, theta: float, t: float) -> float:
    """Upper estimate of the omitted-mode norm at time t in the theta scale.

    Modes beyond ``n_sum`` are bounded by the empirical decay envelope
    |E(z)| <= C/(1+|z|).  At t = 0 the envelope degenerates to |E(0)| = 1 and
    the bound is the plain coefficient-tail norm.
    """
    al = query.alpha.alpha
    n = query.active_modes
    lam = query.domain.eigenvalues[n:]
    if lam.size == 0:
        return 0.0
    a = np.abs(query.data.a[n:])
    b = np.abs(query.data.b[n:])
    if t < 0.0:
        raise ValueError("t must be non-negative")
    if t == 0.0:
        per_mode = a
    else:
        c1 = _decay_constant(al, 1.0)
        c2 = _decay_constant(al, 2.0)
        env = 1.0 + lam * t**al
        per_mode = c1 * a / env + c2 * b * t / env
    return float(np.sqrt(np.sum(lam ** (2.0 * theta) * per_mode**2)))


def write_snapshots_csv(query: SolutionQuery, points, fields: np.ndarray, filename: str) -> None:
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh)
        if pts.ndim == 1:
            header = ["t"] + [f"x={repr(float(x))}" for x in pts]
        else:
            header = ["t"] + [f"x={repr(float(p[0]))};y={repr(float(p[1]))}" for p in pts]
        writer.writerow(header)
        for t, row in zip(query.tgrid.nodes, fields):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in np.atleast_1d(row)])


def write_manifest(query: SolutionQuery, filename: str, theta: float = 0.0, extra: dict | None = None) -> None:
    tail_end = truncation_tail(query, theta, query.tgrid.t_end)
    tail_zero = truncation_tail(query, theta, 0.0)
    manifest = {
        "alpha": query.alpha.alpha,
        "which": query.which,
        "domain": {
            "kind": query.domain.kind,
            "lengths": list(query.domain.lengths),
            "mode_count": query.domain.mode_count,
        },
        "modes_summed": query.active_modes,
        "time_grid": {"t_end": query.tgrid.t_end, "steps": query.tgrid.steps},
        "tail_estimate": {"theta": theta, "at_t_end": tail_end, "at_zero": tail_zero},
    }
    if extra:
        manifest.update(extra)
    with open(filename, "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
