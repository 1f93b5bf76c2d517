"""Dirichlet Laplacian eigenstructure on an interval and a rectangle.

Eigenpairs are analytic (sine basis / tensor sines), so every downstream
estimate check is free of eigensolver error.  The domain object carries a
composite Gauss-Legendre quadrature sized to resolve products of the highest
retained modes, plus boundary quadrature with outward-normal derivatives of
every mode.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpectralDomain",
    "ModeCoefficients",
    "build_interval",
    "build_rectangle",
    "project",
    "synthesize",
    "eval_modes",
    "frac_power_norm",
    "pairwise_sum",
    "tail_stabilizes",
    "domain_to_config",
    "domain_from_config",
    "coeffs_to_csv",
    "coeffs_from_csv",
]


def pairwise_sum(arr: np.ndarray, axis: int = 0) -> np.ndarray:
    """Deterministic pairwise reduction (independent of BLAS threading)."""
    a = np.moveaxis(np.asarray(arr, dtype=float), axis, 0)
    while a.shape[0] > 1:
        n = a.shape[0]
        even = a[0 : n - n % 2 : 2]
        odd = a[1 : n : 2]
        s = even + odd
        if n % 2:
            s = np.concatenate([s, a[-1:]], axis=0)
        a = s
    return a[0]


def tail_stabilizes(terms: np.ndarray, frac: float = 0.125, tol: float = 0.05) -> bool:
    """Partial-sum stabilization heuristic for non-negative term sequences.

    True when the last ``frac`` of the terms contributes at most ``tol`` of
    the total, i.e. the partial sums have visibly flattened.
    """
    t = np.asarray(terms, dtype=float)
    total = float(np.sum(t))
    if total == 0.0:
        return True
    k = max(1, int(len(t) * frac))
    return float(np.sum(t[-k:])) / total <= tol


def _gauss_panels(a: float, b: float, panels: int, order: int = 10):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    pts = (mid[:, None] + half * x[None, :]).ravel()
    wts = np.tile(half * w, panels)
    return pts, wts


@dataclass(frozen=True)
class SpectralDomain:
    """Analytic Dirichlet eigenstructure plus quadrature data."""

    kind: str
    lengths: tuple[float, ...]
    mode_count: int
    eigenvalues: np.ndarray
    mode_index: np.ndarray  # (N,) for interval, (N, 2) for rectangle
    quad_points: np.ndarray  # (Q,) or (Q, 2)
    quad_weights: np.ndarray  # (Q,)
    boundary_points: np.ndarray  # (B,) interval positions or (B, 2)
    boundary_weights: np.ndarray  # (B,)
    boundary_normal_deriv: np.ndarray = field(repr=False)  # (N, B)

    @property
    def is_interval(self) -> bool:
        return self.kind == "interval"


def build_interval(L: float, N: int) -> SpectralDomain:
    """Sine eigenbasis on (0, L): lambda_n = (n pi / L)^2."""
    if L <= 0:
        raise ValueError("L must be positive")
    if N < 1:
        raise ValueError("need at least one mode")
    n = np.arange(1, N + 1)
    lam = (n * math.pi / L) ** 2
    panels = max(4, N // 2 + 3)
    pts, wts = _gauss_panels(0.0, L, panels)
    amp = math.sqrt(2.0 / L)
    dn = amp * (n * math.pi / L)
    # outward normal derivative: -e'(0) at x=0, +e'(L) at x=L
    nd = np.stack([-dn, dn * np.cos(n * math.pi)], axis=1)
    return SpectralDomain(
        kind="interval",
        lengths=(float(L),),
        mode_count=N,
        eigenvalues=lam.astype(float),
        mode_index=n,
        quad_points=pts,
        quad_weights=wts,
        boundary_points=np.array([0.0, L]),
        boundary_weights=np.array([1.0, 1.0]),
        boundary_normal_deriv=nd,
    )


def build_rectangle(L1: float, L2: float, N: int) -> SpectralDomain:
    """Tensor sine eigenbasis on (0,L1)x(0,L2), sorted by eigenvalue.

    Ties are broken lexicographically by the index pair so runs are
    reproducible under degeneracy.
    """
    if L1 <= 0 or L2 <= 0:
        raise ValueError("edge lengths must be positive")
    if N < 1:
        raise ValueError("need at least one mode")
    K = max(2, int(math.isqrt(N)) + 2)
    while True:
        j = np.arange(1, K + 1)
        lj = (j * math.pi / L1) ** 2
        lk = (j * math.pi / L2) ** 2
        lam = lj[:, None] + lk[None, :]
        pairs = [(lam[a, b], a + 1, b + 1) for a in range(K) for b in range(K)]
        pairs.sort()
        # the block is large enough once the N-th value cannot be beaten by
        # any eigenvalue involving an index beyond K
        cutoff = min((math.pi * (K + 1) / L1) ** 2 + (math.pi / L2) ** 2,
                     (math.pi / L1) ** 2 + (math.pi * (K + 1) / L2) ** 2)
        if len(pairs) >= N and pairs[N - 1][0] < cutoff:
            break
        K *= 2
    chosen = pairs[:N]
    lam = np.array([p[0] for p in chosen])
    idx = np.array([[p[1], p[2]] for p in chosen])

    jmax = int(idx[:, 0].max())
    kmax = int(idx[:, 1].max())
    px, wx = _gauss_panels(0.0, L1, max(4, jmax // 2 + 3))
    py, wy = _gauss_panels(0.0, L2, max(4, kmax // 2 + 3))
    PX, PY = np.meshgrid(px, py, indexing="ij")
    pts = np.stack([PX.ravel(), PY.ravel()], axis=1)
    wts = np.outer(wx, wy).ravel()

    amp = 2.0 / math.sqrt(L1 * L2)
    # boundary: four edges, quadrature along each
    bx, bwx = _gauss_panels(0.0, L1, max(4, jmax // 2 + 3))
    by, bwy = _gauss_panels(0.0, L2, max(4, kmax // 2 + 3))
    b_pts = []
    b_wts = []
    nd_cols = []
    jj = idx[:, 0][:, None] * math.pi / L1
    kk = idx[:, 1][:, None] * math.pi / L2
    # x = 0 and x = L1 edges (normal along -x / +x)
    for x0, sgn in ((0.0, -1.0), (L1, 1.0)):
        cosj = np.cos(idx[:, 0][:, None] * math.pi * (x0 / L1))
        nd = sgn * amp * jj * cosj * np.sin(kk * by[None, :])
        nd_cols.append(nd)
        b_pts.append(np.stack([np.full_like(by, x0), by], axis=1))
        b_wts.append(bwy)
    # y = 0 and y = L2 edges
    for y0, sgn in ((0.0, -1.0), (L2, 1.0)):
        cosk = np.cos(idx[:, 1][:, None] * math.pi * (y0 / L2))
        nd = sgn * amp * kk * cosk * np.sin(jj * bx[None, :])
        nd_cols.append(nd)
        b_pts.append(np.stack([bx, np.full_like(bx, y0)], axis=1))
        b_wts.append(bwx)

    return SpectralDomain(
        kind="rectangle",
        lengths=(float(L1), float(L2)),
        mode_count=N,
        eigenvalues=lam,
        mode_index=idx,
        quad_points=pts,
        quad_weights=wts,
        boundary_points=np.concatenate(b_pts, axis=0),
        boundary_weights=np.concatenate(b_wts),
        boundary_normal_deriv=np.concatenate(nd_cols, axis=1),
    )


def eval_modes(domain: SpectralDomain, points) -> np.ndarray:
    """Matrix e_n(x_p) of shape (N, P)."""
    pts = np.asarray(points, dtype=float)
    if domain.is_interval:
        (L,) = domain.lengths
        x = np.atleast_1d(pts)
        if np.any((x < -1e-12) | (x > L + 1e-12)):
            raise ValueError("points must lie in the closed domain")
        n = domain.mode_index
        return math.sqrt(2.0 / L) * np.sin(np.outer(n * math.pi / L, x))
    L1, L2 = domain.lengths
    xy = np.atleast_2d(pts)
    if np.any((xy[:, 0] < -1e-12) | (xy[:, 0] > L1 + 1e-12) | (xy[:, 1] < -1e-12) | (xy[:, 1] > L2 + 1e-12)):
        raise ValueError("points must lie in the closed domain")
    amp = 2.0 / math.sqrt(L1 * L2)
    j = domain.mode_index[:, 0][:, None]
    k = domain.mode_index[:, 1][:, None]
    x = xy[:, 0][None, :]
    y = xy[:, 1][None, :]
    return amp * np.sin(j * math.pi * x / L1) * np.sin(k * math.pi * y / L2)


def project(domain: SpectralDomain, f) -> np.ndarray:
    """Coefficients <f, e_n> by the domain quadrature.

    ``f`` may be a callable on points or an array of samples at
    ``domain.quad_points``.
    """
    if callable(f):
        if domain.is_interval:
            samples = np.asarray(f(domain.quad_points), dtype=float)
        else:
            samples = np.asarray(f(domain.quad_points[:, 0], domain.quad_points[:, 1]), dtype=float)
    else:
        samples = np.asarray(f, dtype=float)
        if samples.shape != domain.quad_points.shape[:1]:
            raise ValueError("sample array must match the domain quadrature nodes")
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples must be finite")
    E = eval_modes(domain, domain.quad_points)
    return E @ (domain.quad_weights * samples)


def synthesize(domain: SpectralDomain, coeffs, points) -> np.ndarray:
    """Evaluate sum_n c_n e_n at points (deterministic pairwise mode sum)."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape[0] != domain.mode_count:
        raise ValueError("coefficient count must match the domain mode count")
    E = eval_modes(domain, points)
    return pairwise_sum(c[:, None] * E, axis=0)


def frac_power_norm(domain: SpectralDomain, coeffs, theta: float) -> float:
    """Weighted-l2 norm (sum lambda^{2 theta} c^2)^(1/2), theta in [-1, 1]."""
    if not -1.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [-1, 1], got {theta}")
    c = np.asarray(coeffs, dtype=float)
    if c.shape[0] != domain.mode_count:
        raise ValueError("coefficient count must match the domain mode count")
    return float(np.sqrt(pairwise_sum(domain.eigenvalues ** (2.0 * theta) * c**2)))


@dataclass
class ModeCoefficients:
    """Spectral data (a_n, b_n) of the two initial conditions."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.a.shape != self.b.shape or self.a.ndim != 1:
            raise ValueError("a and b must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise ValueError("coefficients must be finite")

    def __len__(self) -> int:
        return self.a.size

    def scaled(self, factor: float) -> "ModeCoefficients":
        return ModeCoefficients(self.a * factor, self.b * factor)

    def h1_terms(self, domain: SpectralDomain) -> np.ndarray:
        return domain.eigenvalues * self.a**2


def domain_to_config(domain: SpectralDomain) -> dict:
    return {"kind": domain.kind, "lengths": list(domain.lengths), "mode_count": domain.mode_count}


def domain_from_config(cfg: dict) -> SpectralDomain:
    kind = cfg["kind"]
    if kind == "interval":
        return build_interval(cfg["lengths"][0], cfg["mode_count"])
    if kind == "rectangle":
        return build_rectangle(cfg["lengths"][0], cfg["lengths"][1], cfg["mode_count"])
    raise ValueError(f"unknown domain kind {kind!r}")


def coeffs_to_csv(coeffs: ModeCoefficients, filename: str) -> None:
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "a", "b"])
        for i, (a, b) in enumerate(zip(coeffs.a, coeffs.b), start=1):
            writer.writerow([i, repr(float(a)), repr(float(b))])


def coeffs_from_csv(filename: str) -> ModeCoefficients:
    with open(filename, newline="") as fh:
        rows = list(csv.reader(fh))
    a = np.array([float(r[1]) for r in rows[1:]])
    b = np.array([float(r[2]) for r in rows[1:]])
    return ModeCoefficients(a, b)


def save_domain_config(domain: SpectralDomain, filename: str) -> None:
    with open(filename, "w") as fh:
        json.dump(domain_to_config(domain), fh, sort_keys=True, indent=2)
