"""Smooth radial cutoff windows and their Fourier transforms.

A window is a radial profile f(s) with f(s) = 1 for s <= 1 and f(s) = 0 for
s >= 2; the spatial cutoff at scale R is f_R(x) = f(|x|/R).  Under the
transform convention used for test functions,

    fhat(k) = (2*pi)**(-n/2) * integral( exp(-i k.x) f(|x|) d^n x ),

the scale family obeys the exact identity  fhat_R(k) = R**n * fhat(R*k),
which is what every scaling computation in the package leans on.

Convention summary (pinned once, here):

* test functions / windows: symmetric convention above (real, even fhat);
* correlator evaluators elsewhere in the package: plain transform
  ``S(k) = integral( W(y) exp(+i k.y) d^(...)y )`` with no prefactor.

With this split every closed-form limit in the package holds with unit
constant, e.g. the 2-point limit is exactly  S(0) * integral fhat(k)fhat(-k).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gamma as _gamma_fn
from math import pi, sqrt
from pathlib import Path

import numpy as np
from scipy.interpolate import InterpolatedUnivariateSpline
from scipy.special import j0

from .errors import InvalidArgumentError, NumericalAccuracyError

CACHE_FORMAT_VERSION = 1

#: kinds accepted by make_profile
KINDS = ("mollified-step", "smoothstep", "sharp")

# geometry of the mollified step: indicator of the ball of radius STEP_EDGE
# convolved with a bump of half-width BUMP_HALFWIDTH, so the plateaus are
# exactly 1 on [0, STEP_EDGE - BUMP_HALFWIDTH] and 0 beyond
# STEP_EDGE + BUMP_HALFWIDTH.
STEP_EDGE = 1.5
BUMP_HALFWIDTH = 0.25
SUPPORT_RADIUS = 2.0
GRID_MARGIN = 0.5


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n (2, 2*pi, 4*pi for n=1,2,3)."""
    return 2.0 * pi ** (n / 2.0) / _gamma_fn(n / 2.0)


def _gauss_legendre_panels(a: float, b: float, panels: int, nodes: int):
    """Composite Gauss-Legendre rule on [a, b]: (nodes*panels,) nodes/weights."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def _bump_cdf(halfwidth: float, samples: int = 40001):
    """CDF of the normalized C-infinity bump exp(-1/(1-(u/h)^2)) on [-h, h]."""
    u = np.linspace(-halfwidth, halfwidth, samples)
    t = u / halfwidth
    vals = np.zeros_like(u)
    interior = np.abs(t) < 1.0
    vals[interior] = np.exp(-1.0 / (1.0 - t[interior] ** 2))
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(u))])
    cdf /= cdf[-1]
    return InterpolatedUnivariateSpline(u, cdf, k=3)


def _smoothstep_poly(order: int):
    """Polynomial S with S(0)=0, S(1)=1 and `order` flat derivatives at both ends."""
    from math import comb

    coeffs = np.zeros(2 * order + 2)
    for m in range(order + 1):
        coeffs[order + 1 + m] = comb(order + m, m) * comb(2 * order + 1, order - m) * (-1) ** m
    return np.polynomial.Polynomial(coeffs)


@dataclass(frozen=True)
class WindowProfile:
    """Radial cutoff profile with cached radial Fourier transform.

    Immutable after construction; all evaluators are pure, so concurrent
    reads are safe.
    """

    kind: str
    dim: int
    resolution: int
    smoothness: int  # number of continuous derivatives certified at the edges
    s_grid: np.ndarray = field(repr=False)
    f_samples: np.ndarray = field(repr=False)
    k_grid: np.ndarray = field(repr=False)
    fhat_samples: np.ndarray = field(repr=False)
    k_max: float
    _pos_spline: InterpolatedUnivariateSpline = field(repr=False, compare=False)
    _fhat_spline: InterpolatedUnivariateSpline = field(repr=False, compare=False)
    _tail_env: np.ndarray = field(repr=False, compare=False)

    # -- identity ----------------------------------------------------------

    @property
    def cache_key(self) -> tuple:
        return (self.kind, self.dim, self.resolution, float(self.k_max), self.smoothness)

    # -- position space ----------------------------------------------------

    def value(self, s) -> np.ndarray:
        """Radial profile f(s) (exactly 0 outside the cached support).

        Samples live on a uniform grid, so linear interpolation is accurate
        to ~|f''| (ds)^2/8 and an order of magnitude faster than a spline on
        the large position grids the overlap integrals use.
        """
        s = np.abs(np.asarray(s, dtype=float))
        if self.kind == "sharp":
            return np.where(s <= 1.0, 1.0, 0.0)
        out = np.interp(s, self.s_grid, self.f_samples, right=0.0)
        return np.clip(out, 0.0, 1.0)

    def scaled_value(self, radius: float, x) -> np.ndarray:
        """f_R at position(s) x: value(|x|/R)."""
        x = np.asarray(x, dtype=float)
        r = np.abs(x) if x.ndim == 0 or self.dim == 1 else np.linalg.norm(x, axis=-1)
        return self.value(r / radius)

    def volume_integral(self) -> float:
        """integral of f(|x|) over R^n."""
        s, w = _gauss_legendre_panels(0.0, self.s_grid[-1], 64, 16)
        return unit_sphere_area(self.dim) * float(np.sum(w * self.value(s) * s ** (self.dim - 1)))

    # -- momentum space ----------------------------------------------------

    def fourier_radial(self, kappa, strict: bool = False) -> np.ndarray:
        """fhat at radial momentum |k| = kappa (real; even by construction).

        Beyond the cached range the transform is below ``tail_bound(k_max)``;
        non-strict mode extrapolates it as 0, strict mode raises.
        """
        kappa = np.abs(np.asarray(kappa, dtype=float))
        beyond = kappa > self.k_max
        if strict and np.any(beyond):
            raise NumericalAccuracyError(
                f"momentum {float(np.max(kappa)):.3g} beyond cached range {self.k_max:.3g}",
                bound=self.tail_bound(self.k_max),
            )
        safe = np.minimum(kappa, self.k_max)
        out = self._fhat_spline(safe)
        return np.where(beyond, 0.0, out)

    def fourier(self, k, strict: bool = False) -> np.ndarray:
        """fhat(k) for momentum vector(s) k; radial, so only |k| matters."""
        k = np.asarray(k, dtype=float)
        if self.dim == 1 or k.ndim == 0:
            kappa = np.abs(k)
        else:
            kappa = np.linalg.norm(k, axis=-1)
        return self.fourier_radial(kappa, strict=strict)

    def scaled_fourier(self, radius: float, k, strict: bool = False) -> np.ndarray:
        """Transform of f_R: exactly R**n * fhat(R k), never re-quadratured."""
        if radius <= 0:
            raise InvalidArgumentError("scale radius must be positive")
        return radius ** self.dim * self.fourier(radius * np.asarray(k, dtype=float), strict=strict)

    def fhat_zero(self) -> float:
        return float(self._fhat_spline(0.0))

    def tail_bound(self, kappa: float) -> float:
        """Monotone envelope sup_{|k'| >= kappa} |fhat(k')| on the cached range."""
        idx = np.searchsorted(self.k_grid, kappa)
        if idx >= len(self._tail_env):
            return float(self._tail_env[-1])
        return float(self._tail_env[idx])

    def pair_overlap_integral(self) -> float:
        """integral over R^n of fhat(k) fhat(-k) = integral |fhat|^2 (real even fhat)."""
        s, w = _gauss_legendre_panels(0.0, self.k_max, 512, 12)
        vals = self._fhat_spline(s) ** 2
        return unit_sphere_area(self.dim) * float(np.sum(w * vals * s ** (self.dim - 1)))

    def l2_position(self) -> float:
        """integral over R^n of f(|x|)^2."""
        s, w = _gauss_legendre_panels(0.0, self.s_grid[-1], 64, 16)
        return unit_sphere_area(self.dim) * float(np.sum(w * self.value(s) ** 2 * s ** (self.dim - 1)))

    # -- serialization -----------------------------------------------------

    def to_cache_file(self, path: str | Path) -> Path:
        path = Path(path)
        payload = {
            "format_version": CACHE_FORMAT_VERSION,
            "kind": self.kind,
            "dim": self.dim,
            "resolution": self.resolution,
            "smoothness": self.smoothness,
            "k_max": self.k_max,
            "s_grid": self.s_grid.tolist(),
            "f_samples": self.f_samples.tolist(),
            "k_grid": self.k_grid.tolist(),
            "fhat_samples": self.fhat_samples.tolist(),
        }
        path.write_text(json.dumps(payload))
        return path

    @staticmethod
    def from_cache_file(path: str | Path) -> "WindowProfile":
        payload = json.loads(Path(path).read_text())
        if payload.get("format_version") != CACHE_FORMAT_VERSION:
            raise InvalidArgumentError(
                f"window cache format {payload.get('format_version')!r} not supported"
            )
        return _assemble(
            payload["kind"],
            payload["dim"],
            payload["resolution"],
            payload["smoothness"],
            np.asarray(payload["s_grid"]),
            np.asarray(payload["f_samples"]),
            np.asarray(payload["k_grid"]),
            np.asarray(payload["fhat_samples"]),
            payload["k_max"],
        )


def _assemble(kind, dim, resolution, smoothness, s_grid, f_samples, k_grid, fhat_samples, k_max):
    pos_spline = InterpolatedUnivariateSpline(s_grid, f_samples, k=3)
    fhat_spline = InterpolatedUnivariateSpline(k_grid, fhat_samples, k=5)
    tail = np.maximum.accumulate(np.abs(fhat_samples)[::-1])[::-1]
    return WindowProfile(
        kind=kind,
        dim=dim,
        resolution=resolution,
        smoothness=smoothness,
        s_grid=s_grid,
        f_samples=f_samples,
        k_grid=k_grid,
        fhat_samples=fhat_samples,
        k_max=k_max,
        _pos_spline=pos_spline,
        _fhat_spline=fhat_spline,
        _tail_env=tail,
    )


def _profile_evaluator(kind: str, smoothstep_order: int):
    """Exact radial evaluator (vectorized s >= 0 -> f(s)) plus smoothness order."""
    if kind == "mollified-step":
        cdf = _bump_cdf(BUMP_HALFWIDTH)

        def exact(s):
            s = np.asarray(s, dtype=float)
            lo = np.clip(s - STEP_EDGE, -BUMP_HALFWIDTH, BUMP_HALFWIDTH)
            hi = np.clip(s + STEP_EDGE, -BUMP_HALFWIDTH, BUMP_HALFWIDTH)
            f = cdf(hi) - cdf(lo)
            f = np.where(s <= STEP_EDGE - BUMP_HALFWIDTH, 1.0, f)
            f = np.where(s >= STEP_EDGE + BUMP_HALFWIDTH, 0.0, f)
            return np.clip(f, 0.0, 1.0)

        return exact, 64  # effectively C^inf; certify plenty
    if kind == "smoothstep":
        poly = _smoothstep_poly(smoothstep_order)

        def exact(s):
            s = np.asarray(s, dtype=float)
            f = np.ones_like(s)
            mid = (s > 1.0) & (s < 2.0)
            f[mid] = 1.0 - poly(s[mid] - 1.0)
            f[s >= 2.0] = 0.0
            return f

        return exact, smoothstep_order
    if kind == "sharp":
        return (lambda s: np.where(np.asarray(s) <= 1.0, 1.0, 0.0)), 0
    raise InvalidArgumentError(f"unknown window kind {kind!r}; expected one of {KINDS}")


def radial_fourier_direct(dim: int, s_nodes, s_weights, f_vals, kappa) -> np.ndarray:
    """Direct radial transform of sampled f at momenta kappa (quadrature, no cache).

    Implements (2*pi)^(-n/2) * int exp(-ik.x) f(|x|) d^n x reduced to one
    radial integral; used for cache construction and as the independent
    oracle in tests.
    """
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    s = s_nodes[None, :]
    k = kappa[:, None]
    if dim == 1:
        kern = np.cos(k * s)
        pref = sqrt(2.0 / pi)
        out = pref * np.sum(s_weights * f_vals * kern, axis=1)
    elif dim == 2:
        kern = j0(k * s)
        out = np.sum(s_weights * f_vals * s * kern, axis=1)
    elif dim == 3:
        ks = k * s
        kern = np.where(ks > 1e-12, np.sin(np.where(ks > 1e-12, ks, 1.0)) / np.where(ks > 1e-12, ks, 1.0), 1.0)
        pref = sqrt(2.0 / pi)
        out = pref * np.sum(s_weights * f_vals * s ** 2 * kern, axis=1)
    else:
        raise InvalidArgumentError(f"dimension {dim} not supported (use 1, 2 or 3)")
    return out


def _sharp_fhat(dim: int, kappa: np.ndarray) -> np.ndarray:
    """Closed-form transform of the unit-ball indicator (oracle window)."""
    from scipy.special import j1

    k = np.where(kappa > 1e-8, kappa, 1.0)
    if dim == 1:
        out = sqrt(2.0 / pi) * np.sin(k) / k
        at0 = sqrt(2.0 / pi)
    elif dim == 2:
        out = j1(k) / k
        at0 = 0.5
    else:
        out = sqrt(2.0 / pi) * (np.sin(k) - k * np.cos(k)) / k ** 3
        at0 = sqrt(2.0 / pi) / 3.0
    return np.where(kappa > 1e-8, out, at0)


def make_profile(
    kind: str,
    dim: int,
    resolution: int = 16384,
    *,
    smoothstep_order: int = 3,
    k_max: float = 640.0,
    k_resolution: int = 10240,
) -> WindowProfile:
    """Build a WindowProfile with a cached transform on [0, k_max].

    resolution is the radial sample count on [0, 2.5] (must be >= 1024);
    the transform is evaluated by composite Gauss-Legendre quadrature dense
    enough for the largest cached momentum, from the exact radial profile,
    and spline-interpolated between cache nodes.
    """
    if dim not in (1, 2, 3):
        raise InvalidArgumentError(f"dimension {dim} not supported (use 1, 2 or 3)")
    if resolution < 1024:
        raise InvalidArgumentError("resolution must be at least 2**10 radial samples")
    if kind not in KINDS:
        raise InvalidArgumentError(f"unknown window kind {kind!r}; expected one of {KINDS}")

    s_max = SUPPORT_RADIUS + GRID_MARGIN
    s_grid = np.linspace(0.0, s_max, resolution)
    exact, smoothness = _profile_evaluator(kind, smoothstep_order)
    f_samples = exact(s_grid)
    k_grid = np.linspace(0.0, k_max, k_resolution)

    if kind == "sharp":
        fhat = _sharp_fhat(dim, k_grid)
        return _assemble(kind, dim, resolution, smoothness, s_grid, f_samples, k_grid, fhat, k_max)

    # quadrature nodes for the transform: >= ~6 GL nodes per oscillation cycle
    cycles = k_max * s_max / (2.0 * pi)
    panels = max(48, int(cycles / 1.5) + 1)
    s_nodes, s_weights = _gauss_legendre_panels(0.0, s_max, panels, 16)
    f_vals = exact(s_nodes)

    fhat = np.empty_like(k_grid)
    chunk = 512
    for i in range(0, len(k_grid), chunk):
        fhat[i : i + chunk] = radial_fourier_direct(dim, s_nodes, s_weights, f_vals, k_grid[i : i + chunk])

    return _assemble(kind, dim, resolution, smoothness, s_grid, f_samples, k_grid, fhat, k_max)


def load_or_build(kind: str, dim: int, resolution: int = 4096, cache_dir: str | Path | None = None,
                  **kwargs) -> WindowProfile:
    """Fetch a profile from the cache directory, building and caching on miss."""
    if cache_dir is None:
        return make_profile(kind, dim, resolution, **kwargs)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    name = f"window_{kind}_n{dim}_r{resolution}.json"
    path = cache_dir / name
    if path.exists():
        try:
            prof = WindowProfile.from_cache_file(path)
            if prof.cache_key[:3] == (kind, dim, resolution):
                return prof
        except (ValueError, KeyError, InvalidArgumentError):
            pass
    prof = make_profile(kind, dim, resolution, **kwargs)
    prof.to_cache_file(path)
    return prof
