"""Two-parameter Mittag-Leffler function on the real line, with decay checks.

The evaluator targets the arguments produced by the spectral mode dynamics,
``z = -lambda * t**alpha`` with ``alpha`` in (1, 2), but accepts any
``alpha`` in (0, 2] and ``beta > 0`` on ``|z| <= Z_MAX``.

Evaluation strategy (negative axis), tiered by the cancellation scale
``m = |z|**(1/alpha)``:

1. plain Kahan-compensated Taylor series while the a-posteriori roundoff
   estimate meets tolerance (roughly ``m <= 12``),
2. the same series in double-double arithmetic with reciprocal-gamma term
   ratios precomputed in extended precision (roughly ``m <= 45``),
3. the large-argument expansion: optimally truncated algebraic series plus
   the conjugate saddle pair ``(2/alpha) Re[w**(1-beta) e**w]``,
   ``w = m e**(i pi/alpha)`` (present for ``alpha > 1``; for ``alpha`` near 2
   the damped oscillation dominates and is essential),
4. arbitrary-precision summation as a last resort.

Every tier carries an error estimate and the first tier that meets the
target tolerance wins, so there is no hand-tuned switch radius.  Positive
arguments use the series and the exponential asymptotic
``(1/alpha) z**((1-beta)/alpha) exp(z**(1/alpha))`` minus the algebraic tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
import scipy.special as sp

from ._ddouble import DD_EPS, dd_add, dd_from_mpf, dd_mul, dd_mul_double

__all__ = [
    "Z_MAX",
    "MLParams",
    "BoundFit",
    "gamma",
    "ml",
    "verify_decay_bound",
    "max_ratio",
]

# Hard cap on |z|; beyond this the tiers have not been validated.
Z_MAX = 1.0e8

_EPS = 2.220446049250313e-16
# Relative-error targets: tighter on the moderate range, relaxed far out.
_TOL_NEAR = 3.0e-11
_TOL_FAR = 1.0e-9
_NEAR_LIMIT = 64.0

_M_DOUBLE = 12.0   # Kahan double series attempted below this m
_M_DD = 46.0       # double-double series attempted below this m
_M_POS_SERIES = 60.0
_ASYM_KMAX = 40
_SERIES_KMAX = 1400
_MP_MAX_DPS = 800


@dataclass(frozen=True)
class MLParams:
    """Order pair (alpha, beta) of the two-parameter Mittag-Leffler function."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = self.alpha, self.beta
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("alpha and beta must be finite")
        if not 0.0 < a <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {a}")
        if b <= 0.0:
            raise ValueError(f"beta must be positive, got {b}")


@dataclass(frozen=True)
class BoundFit:
    """Empirical fit of the algebraic decay envelope on the negative axis."""

    mu: float
    c_empirical: float
    sample_count: int
    max_violation: float

    @property
    def violated(self) -> bool:
        return self.max_violation > 0.0


def gamma(x: float) -> float:
    """Euler gamma for real ``x``; non-positive integers are rejected."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("gamma argument must be finite")
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"gamma pole at non-positive integer {x}")
    return math.gamma(x)


# ---------------------------------------------------------------------------
# series tables: T_{k+1} = T_k * z * R_k with R_k = G(ak+b)/G(a(k+1)+b)

_TABLE_CACHE: dict[tuple[float, float], tuple[np.ndarray, np.ndarray, float, float]] = {}


def _series_tables(alpha: float, beta: float, n: int):
    key = (alpha, beta)
    cached = _TABLE_CACHE.get(key)
    if cached is not None and cached[0].size >= n:
        return cached
    size = max(n, 128)
    rhi = np.empty(size)
    rlo = np.empty(size)
    with mp.workdps(50):
        a = mp.mpf(alpha)
        b = mp.mpf(beta)
        g_prev = mp.gamma(b)
        for k in range(size):
            g_next = mp.gamma(a * (k + 1) + b)
            rhi[k], rlo[k] = dd_from_mpf(g_prev / g_next)
            g_prev = g_next
        t0h, t0l = dd_from_mpf(1 / mp.gamma(b))
    entry = (rhi, rlo, t0h, t0l)
    _TABLE_CACHE[key] = entry
    return entry


def _series_length(alpha: float, m_max: float) -> int:
    return min(_SERIES_KMAX, int(3.8 * max(m_max, 1.0) / alpha) + 48)


def _series_double(alpha, beta, z, tol):
    """Kahan series; returns (value, accept mask)."""
    m_max = float(np.max(np.abs(z))) ** (1.0 / alpha)
    n = _series_length(alpha, m_max)
    rhi, _, t0h, _ = _series_tables(alpha, beta, n)
    t = np.full(z.shape, t0h)
    s = t.copy()
    comp = np.zeros_like(s)
    acc = np.abs(t)
    for k in range(n - 1):
        t = t * (z * rhi[k])
        y = t - comp
        tmp = s + y
        comp = (tmp - s) - y
        s = tmp
        acc += np.abs(t)
        if k > 4 and np.all(np.abs(t) <= 1e-20 * acc):
            break
    est = 4.0 * _EPS * acc + np.abs(t)
    ok = est <= tol * np.abs(s)
    return s, ok


def _series_dd(alpha, beta, z, tol):
    """Double-double series; returns (value, accept mask)."""
    m_max = float(np.max(np.abs(z))) ** (1.0 / alpha)
    n = _series_length(alpha, m_max)
    rhi, rlo, t0h, t0l = _series_tables(alpha, beta, n)
    th = np.full(z.shape, t0h)
    tl = np.full(z.shape, t0l)
    sh, sl = th.copy(), tl.copy()
    acc = np.abs(th)
    used = n
    for k in range(n - 1):
        fh, fl = dd_mul_double(rhi[k], rlo[k], z)
        th, tl = dd_mul(th, tl, fh, fl)
        sh, sl = dd_add(sh, sl, th, tl)
        acc += np.abs(th)
        if k > 4 and np.all(np.abs(th) <= 1e-36 * acc):
            used = k + 2
            break
    est = DD_EPS * (used + 8.0) * acc + np.abs(th)
    ok = est <= tol * np.abs(sh)
    return sh, ok


def _asym_neg(alpha, beta, z, tol):
    """Algebraic expansion plus saddle pair for z < 0; returns (value, accept)."""
    invz = 1.0 / z
    p = invz.copy()
    s = np.zeros_like(z)
    s_abs = np.zeros_like(z)
    prev = np.full(z.shape, np.inf)
    active = np.ones(z.shape, dtype=bool)
    est = np.zeros_like(z)
    for k in range(1, _ASYM_KMAX + 1):
        arg = beta - alpha * k
        # arguments that are non-positive integers up to rounding sit at
        # gamma poles: the coefficient is (essentially) zero and must not
        # feed the term-growth stopping rule
        if arg < 0.5 and abs(arg - round(arg)) < 1e-6:
            p = p * invz
            continue
        rg = sp.rgamma(arg)
        if rg != 0.0:
            t = p * rg
            mag = np.abs(t)
            stop = active & (mag >= prev)
            est[stop] = mag[stop]
            active[stop] = False
            s[active] += t[active]
            s_abs[active] += mag[active]
            prev[active] = mag[active]
        p = p * invz
    # ran out of terms while still decreasing: last kept term is the estimate
    est[active] = np.where(np.isfinite(prev[active]), prev[active], 0.0)
    val = -s
    m = np.abs(z) ** (1.0 / alpha)
    if alpha > 1.0:
        phi = math.pi / alpha
        with np.errstate(under="ignore"):
            osc = (
                (2.0 / alpha)
                * m ** (1.0 - beta)
                * np.exp(m * math.cos(phi))
                * np.cos(m * math.sin(phi) + (1.0 - beta) * phi)
            )
        val = val + osc
        s_abs = s_abs + np.abs(osc)
    est = est + (3.0 * m + 30.0) * _EPS * s_abs
    ok = est <= 0.1 * tol * np.abs(val)
    # fully degenerate expansion (all coefficients at gamma poles): the value
    # is exponentially small; 0.0 is the correctly rounded double only when
    # even exp(-m cos) underflows entirely
    if alpha <= 1.0:
        ok &= s_abs > 0.0
    return val, ok


def _eval_pos(alpha, beta, z):
    out = np.empty_like(z)
    m = z ** (1.0 / alpha)
    small = m <= _M_POS_SERIES
    if np.any(small):
        zs = z[small]
        n = _series_length(alpha, float(np.max(m[small])))
        rhi, _, t0h, _ = _series_tables(alpha, beta, n)
        t = np.full(zs.shape, t0h)
        s = t.copy()
        comp = np.zeros_like(s)
        for k in range(n - 1):
            t = t * (zs * rhi[k])
            y = t - comp
            tmp = s + y
            comp = (tmp - s) - y
            s = tmp
            if k > 4 and np.all(t <= 1e-19 * s):
                break
        out[small] = s
    big = ~small
    if np.any(big):
        zb = z[big]
        mb = m[big]
        with np.errstate(over="ignore"):
            lead = (1.0 / alpha) * mb ** (1.0 - beta) * np.exp(mb)
        tail = np.zeros_like(zb)
        p = 1.0 / zb
        for k in range(1, _ASYM_KMAX + 1):
            rg = sp.rgamma(beta - alpha * k)
            if rg != 0.0:
                tail += p * rg
            p = p / zb
        out[big] = lead - tail
    return out


def _mpmath_single(alpha: float, beta: float, z: float) -> float:
    m = abs(z) ** (1.0 / alpha)
    # for alpha <= 1 the value itself can be exponentially small, doubling
    # the number of digits lost to cancellation
    dps = 30 + int(0.45 * m) if alpha > 1.0 else 30 + int(0.92 * m)
    if dps > _MP_MAX_DPS:
        raise ValueError(
            "argument needs more than the supported working precision "
            f"(alpha={alpha}, z={z}); see module docstring for the envelope"
        )
    with mp.workdps(dps):
        a = mp.mpf(alpha)
        b = mp.mpf(beta)
        zz = mp.mpf(z)
        s = mp.mpf(0)
        term_max = mp.mpf(0)
        eps = mp.mpf(10) ** (-dps - 5)
        t = 1 / mp.gamma(b)
        k = 0
        while True:
            s += t
            at = abs(t)
            if at > term_max:
                term_max = at
            k += 1
            t = zz**k / mp.gamma(a * k + b)
            if k > 5 and abs(t) < eps * max(term_max, abs(s), mp.mpf(1e-300)):
                break
            if k > 60000:
                raise ValueError("series did not converge in the fallback")
        return float(s)


def _eval_neg(alpha, beta, z, tol_near, tol_far):
    out = np.empty_like(z)
    pending = np.ones(z.shape, dtype=bool)
    tol = np.where(np.abs(z) <= _NEAR_LIMIT, tol_near, tol_far)

    if alpha == 1.0 and beta in (1.0, 2.0):
        if beta == 1.0:
            out[:] = np.exp(z)
        else:
            out[:] = np.where(z != 0.0, np.expm1(z) / np.where(z != 0.0, z, 1.0), 1.0)
        return out

    m = np.abs(z) ** (1.0 / alpha)

    sel = pending & (m <= _M_DOUBLE)
    if np.any(sel):
        val, ok = _series_double(alpha, beta, z[sel], tol[sel])
        idx = np.flatnonzero(sel)[ok]
        out.flat[idx] = val[ok]
        pending[idx] = False

    sel = pending & (m <= _M_DD)
    if np.any(sel):
        val, ok = _series_dd(alpha, beta, z[sel], tol[sel])
        idx = np.flatnonzero(sel)[ok]
        out.flat[idx] = val[ok]
        pending[idx] = False

    if np.any(pending):
        sel = pending.copy()
        val, ok = _asym_neg(alpha, beta, z[sel], tol[sel])
        idx = np.flatnonzero(sel)[ok]
        out.flat[idx] = val[ok]
        pending[idx] = False

    if np.any(pending):
        for i in np.flatnonzero(pending):
            out.flat[i] = _mpmath_single(alpha, beta, float(z.flat[i]))
    return out


def ml(params: MLParams, z):
    """Evaluate E_{alpha,beta} at real ``z`` (scalar or array, |z| <= Z_MAX)."""
    alpha, beta = params.alpha, params.beta
    arr = np.asarray(z, dtype=float)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr).ravel().copy()
    if not np.all(np.isfinite(flat)):
        raise ValueError("z must be finite")
    if np.any(np.abs(flat) > Z_MAX):
        raise ValueError(f"|z| exceeds the supported range Z_MAX={Z_MAX:g}")

    out = np.empty_like(flat)
    zero = flat == 0.0
    if np.any(zero):
        out[zero] = 1.0 / gamma(beta)
    pos = flat > 0.0
    if np.any(pos):
        out[pos] = _eval_pos(alpha, beta, flat[pos])
    neg = flat < 0.0
    if np.any(neg):
        out[neg] = _eval_neg(alpha, beta, flat[neg], _TOL_NEAR, _TOL_FAR)

    if scalar:
        return float(out[0])
    return out.reshape(arr.shape)


# ---------------------------------------------------------------------------
# decay envelope on the negative axis


def _dyadic_levels(az: np.ndarray) -> np.ndarray:
    lev = np.zeros(az.shape, dtype=int)
    big = az >= 1.0
    lev[big] = np.floor(np.log2(az[big])).astype(int)
    return lev


def _tail_growth_violation(level_sups: np.ndarray, threshold: float = 1.1) -> float:
    """Max excess of running-sup growth ratios over the tail half of levels.

    The weighted samples |E|(1+|z|) legitimately climb toward their plateau
    over the first levels; unboundedness shows up as persistent growth in the
    later ones, so only the tail half of the level-to-level ratios is scored.
    """
    if level_sups.size < 2:
        return 0.0
    running = np.maximum.accumulate(level_sups)
    ratios = running[1:] / running[:-1]
    start = ratios.size // 2
    tail = ratios[start:]
    if tail.size == 0:
        return 0.0
    return float(max(0.0, np.max(tail) - threshold))


def verify_decay_bound(params: MLParams, z_samples) -> BoundFit:
    """Check sup |E(z)|(1+|z|) saturates across dyadic extensions of z <= 0."""
    if not 1.0 < params.alpha < 2.0:
        raise ValueError("the decay envelope requires alpha strictly in (1, 2)")
    z = np.asarray(z_samples, dtype=float).ravel()
    if z.size == 0:
        raise ValueError("z_samples must be non-empty")
    if np.any(z > 0.0):
        raise ValueError("all samples must lie on the non-positive real axis")

    values = np.abs(ml(params, z)) * (1.0 + np.abs(z))
    az = np.abs(z)
    levels = _dyadic_levels(az)
    uniq = np.unique(levels)
    sups = np.array([values[levels == l].max() for l in uniq])
    violation = _tail_growth_violation(sups)
    mu = 0.5 * (math.pi * params.alpha / 2.0 + math.pi)
    return BoundFit(
        mu=mu,
        c_empirical=float(np.max(values)),
        sample_count=int(z.size),
        max_violation=violation,
    )


def max_ratio(beta: float) -> tuple[float, float]:
    """Argmax and maximum of x**beta / (1 + x) on [0, inf) for beta in (0,1)."""
    beta = float(beta)
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    argmax = beta / (1.0 - beta)
    value = beta**beta * (1.0 - beta) ** (1.0 - beta)
    return argmax, value
