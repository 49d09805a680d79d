"""Analytic test functions with exact derivative oracles, grids, and the
geometric constants ``k(p, N)`` and ``kappa_N``.

Point convention: a 1-D function accepts an array of any shape; an N-D
function (N >= 2) accepts an array whose last axis has length N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .measure import WeightedSampleSet

__all__ = [
    "AnalyticTestFunction",
    "GridSpec",
    "SampledField",
    "builtin",
    "available",
    "k_constant",
    "ball_volume",
    "sphere_area",
    "sample",
]

SMOOTHNESS_TAGS = ("C-inf", "Lipschitz", "W1p-only")


@dataclass(frozen=True)
class AnalyticTestFunction:
    """A test function together with its derivative oracles.

    ``difference(x, h)`` returns ``f(x + h) - f(x)`` evaluated without
    catastrophic cancellation when a closed form is available.
    ``antiderivative`` (1-D only) is an exact primitive used for averages over
    intervals.
    """

    name: str
    dim: int
    eval: Callable
    gradient: Callable
    laplacian: Callable
    support_radius: float
    smoothness_tag: str
    difference: Optional[Callable] = None
    antiderivative: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.smoothness_tag not in SMOOTHNESS_TAGS:
            raise ValueError(f"unknown smoothness tag {self.smoothness_tag!r}")
        if self.difference is None:
            object.__setattr__(self, "difference", self._plain_difference)

    def __call__(self, x):
        return self.eval(x)

    def _plain_difference(self, x, h):
        x = np.asarray(x, dtype=float)
        h = np.asarray(h, dtype=float)
        direct = self.eval(x + h) - self.eval(x)
        if self.dim == 1 and self.smoothness_tag == "C-inf":
            # second-order Taylor where the direct difference would lose digits
            small = np.abs(h) < 1e-6
            if np.any(small):
                taylor = self.gradient(x) * h + 0.5 * self.laplacian(x) * h * h
                direct = np.where(small, taylor, direct)
        return direct

    def scaled(self, c):
        """Return ``c * f`` with all oracles scaled."""
        anti = None if self.antiderivative is None else (lambda x, _a=self.antiderivative: c * _a(x))
        return AnalyticTestFunction(
            name=f"{c}*{self.name}",
            dim=self.dim,
            eval=lambda x, _f=self.eval: c * _f(x),
            gradient=lambda x, _g=self.gradient: c * _g(x),
            laplacian=lambda x, _l=self.laplacian: c * _l(x),
            support_radius=self.support_radius,
            smoothness_tag=self.smoothness_tag,
            difference=lambda x, h, _d=self.difference: c * _d(x, h),
            antiderivative=anti,
            params=dict(self.params, scale=c),
        )

    def dilated(self, a):
        """Return ``x -> f(a x)`` (a > 0)."""
        anti = None
        if self.antiderivative is not None:
            anti = lambda x, _a=self.antiderivative: _a(a * np.asarray(x)) / a  # noqa: E731
        return AnalyticTestFunction(
            name=f"{self.name}({a}x)",
            dim=self.dim,
            eval=lambda x, _f=self.eval: _f(a * np.asarray(x)),
            gradient=lambda x, _g=self.gradient: a * _g(a * np.asarray(x)),
            laplacian=lambda x, _l=self.laplacian: a * a * _l(a * np.asarray(x)),
            support_radius=self.support_radius / a,
            smoothness_tag=self.smoothness_tag,
            difference=lambda x, h, _d=self.difference: _d(a * np.asarray(x), a * np.asarray(h)),
            antiderivative=anti,
            params=dict(self.params, dilation=a),
        )


def _sq(x, dim):
    x = np.asarray(x, dtype=float)
    return x * x if dim == 1 else np.sum(x * x, axis=-1)


def _gaussian(dim):
    def f(x):
        return np.exp(-_sq(x, dim))

    def grad(x):
        x = np.asarray(x, dtype=float)
        if dim == 1:
            return -2.0 * x * f(x)
        return -2.0 * x * f(x)[..., None]

    def lap(x):
        r2 = _sq(x, dim)
        return (4.0 * r2 - 2.0 * dim) * np.exp(-r2)

    def diff(x, h):
        x = np.asarray(x, dtype=float)
        h = np.asarray(h, dtype=float)
        if dim == 1:
            arg = -2.0 * x * h - h * h
        else:
            arg = -np.sum((2.0 * x + h) * h, axis=-1)
        return f(x) * np.expm1(arg)

    anti = None
    if dim == 1:
        anti = lambda x: 0.5 * np.sqrt(np.pi) * special.erf(np.asarray(x, dtype=float))  # noqa: E731
    return AnalyticTestFunction(
        "gaussian", dim, f, grad, lap, float(np.sqrt(12 * np.log(10))), "C-inf", diff, anti
    )


def _bump(dim):
    def f(x):
        r2 = _sq(x, dim)
        q = 1.0 - r2
        inside = q > 0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            val = np.exp(1.0 - 1.0 / np.where(inside, q, 1.0))
        return np.where(inside, val, 0.0)

    def grad(x):
        x = np.asarray(x, dtype=float)
        r2 = _sq(x, dim)
        q = np.where(r2 < 1, 1.0 - r2, 1.0)
        fac = f(x) * (-2.0 / (q * q))
        return fac * x if dim == 1 else fac[..., None] * x

    def lap(x):
        r2 = _sq(x, dim)
        q = np.where(r2 < 1, 1.0 - r2, 1.0)
        return f(x) * (4.0 * r2 / q**4 - 2.0 * dim / q**2 - 8.0 * r2 / q**3)

    return AnalyticTestFunction("bump", dim, f, grad, lap, 1.0, "C-inf")


def _tent(dim):
    if dim != 1:
        raise ValueError("tent is only defined in dimension 1")

    def f(x):
        return np.maximum(0.0, 1.0 - np.abs(np.asarray(x, dtype=float)))

    def grad(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) < 1, -np.sign(x), 0.0)

    def lap(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def anti(x):
        x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
        left = 0.5 * (x + 1.0) ** 2
        right = 1.0 - 0.5 * (1.0 - x) ** 2
        return np.where(x <= 0, left, right)

    return AnalyticTestFunction("tent", 1, f, grad, lap, 1.0, "W1p-only", None, anti)


def _modulated_gaussian(dim, omega=3.0):
    def first(x):
        x = np.asarray(x, dtype=float)
        return x if dim == 1 else x[..., 0]

    def f(x):
        return np.exp(-_sq(x, dim)) * np.cos(omega * first(x))

    def grad(x):
        x = np.asarray(x, dtype=float)
        g = np.exp(-_sq(x, dim))
        c = np.cos(omega * first(x))
        s = np.sin(omega * first(x))
        if dim == 1:
            return g * (-2.0 * x * c - omega * s)
        out = -2.0 * x * (g * c)[..., None]
        out[..., 0] -= omega * g * s
        return out

    def lap(x):
        r2 = _sq(x, dim)
        x1 = first(x)
        g = np.exp(-r2)
        return g * ((4 * r2 - 2 * dim - omega**2) * np.cos(omega * x1) + 4 * omega * x1 * np.sin(omega * x1))

    return AnalyticTestFunction(
        "modulated_gaussian", dim, f, grad, lap, float(np.sqrt(12 * np.log(10))), "C-inf",
        params={"omega": omega},
    )


_BUILTINS = {
    "gaussian": _gaussian,
    "bump": _bump,
    "tent": _tent,
    "modulated_gaussian": _modulated_gaussian,
}


def available():
    """Names accepted by :func:`builtin`."""
    return sorted(_BUILTINS)


def builtin(name, dim=1):
    """Return a corpus function by name."""
    if name not in _BUILTINS:
        raise ValueError(f"unknown test function {name!r}; known: {available()}")
    if int(dim) != dim or dim < 1:
        raise ValueError("dim must be a positive integer")
    return _BUILTINS[name](int(dim))


def ball_volume(N):
    """Volume of the unit ball in R^N."""
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    return float(np.pi ** (N / 2) / special.gamma(N / 2 + 1))


def sphere_area(N):
    """Surface area of S^{N-1} (N * kappa_N)."""
    return N * ball_volume(N)


def k_constant(p, N):
    """``k(p, N) = int_{S^{N-1}} |<e, w>|^p dsigma(w)`` with unnormalized sigma.

    For N >= 2 the integrand depends on the polar angle only:
    ``|S^{N-2}| int_0^pi |cos th|^p sin^{N-2} th dth``.
    """
    if not np.isfinite(p) or p < 1:
        raise ValueError("p must satisfy p >= 1")
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    if N == 1:
        return 2.0
    integrand = lambda th: np.abs(np.cos(th)) ** p * np.sin(th) ** (N - 2)  # noqa: E731
    half, _ = integrate.quad(integrand, 0.0, np.pi / 2, epsabs=1e-14, epsrel=1e-13, limit=200)
    lower = 2.0 if N - 1 == 1 else sphere_area(N - 1)
    return float(lower * 2.0 * half)


@dataclass(frozen=True)
class GridSpec:
    """Cell decomposition of a box (uniform) or of ``[t_min, t_max]`` (log).

    Parameters
    ----------
    kind : {"uniform", "log"}
    bounds : sequence of (lo, hi) pairs, one per dimension
    cells : sequence of cell counts, one per dimension
    """

    kind: str
    bounds: tuple
    cells: tuple

    def __post_init__(self):
        if self.kind not in ("uniform", "log"):
            raise ValueError("kind must be 'uniform' or 'log'")
        b = tuple((float(lo), float(hi)) for lo, hi in np.atleast_2d(np.asarray(self.bounds, dtype=float)))
        c = tuple(int(n) for n in np.atleast_1d(self.cells))
        if len(b) != len(c):
            raise ValueError("bounds and cells must have the same dimension")
        if any(n < 1 for n in c) or any(hi <= lo for lo, hi in b):
            raise ValueError("cells must be positive and bounds increasing")
        if self.kind == "log" and (len(b) != 1 or b[0][0] <= 0):
            raise ValueError("log grids are 1-D with t_min > 0")
        object.__setattr__(self, "bounds", b)
        object.__setattr__(self, "cells", c)

    @classmethod
    def uniform(cls, lo, hi, cells, dim=1):
        return cls("uniform", ((lo, hi),) * dim, (cells,) * dim)

    @classmethod
    def log(cls, t_min, t_max, cells):
        return cls("log", ((t_min, t_max),), (cells,))

    @property
    def dim(self):
        return len(self.cells)

    @property
    def shape(self):
        return self.cells

    def edges(self, axis=0):
        lo, hi = self.bounds[axis]
        n = self.cells[axis]
        if self.kind == "log":
            return np.geomspace(lo, hi, n + 1)
        return np.linspace(lo, hi, n + 1)

    def midpoints(self, axis=0):
        """Cell representatives: arithmetic midpoints, or geometric for log."""
        e = self.edges(axis)
        if self.kind == "log":
            return np.sqrt(e[:-1] * e[1:])
        return 0.5 * (e[:-1] + e[1:])

    def widths(self, axis=0):
        return np.diff(self.edges(axis))

    def points(self):
        """Cell representatives; shape ``cells`` (1-D) or ``cells + (N,)``."""
        if self.dim == 1:
            return self.midpoints(0)
        mesh = np.meshgrid(*[self.midpoints(k) for k in range(self.dim)], indexing="ij")
        return np.stack(mesh, axis=-1)

    def cell_volumes(self):
        vol = self.widths(0)
        for k in range(1, self.dim):
            vol = np.multiply.outer(vol, self.widths(k))
        return vol

    @property
    def spacing(self):
        """Uniform cell widths per axis."""
        if self.kind != "uniform":
            raise ValueError("spacing is defined for uniform grids only")
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.bounds, self.cells))


@dataclass(frozen=True)
class SampledField:
    """A function sampled at cell representatives of a grid."""

    grid: GridSpec
    values: np.ndarray
    cell_volume: np.ndarray = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)
        vol = self.grid.cell_volumes() if self.cell_volume is None else np.asarray(self.cell_volume, float)
        object.__setattr__(self, "cell_volume", np.broadcast_to(vol, v.shape))

    def to_samples(self):
        return WeightedSampleSet(self.values.ravel(), self.cell_volume.ravel())

    def with_values(self, values):
        return SampledField(self.grid, values, self.cell_volume)


def sample(f, grid):
    """Sample ``f`` at the cell representatives of ``grid``."""
    if grid.dim != f.dim:
        raise ValueError(f"grid dimension {grid.dim} does not match function dimension {f.dim}")
    return SampledField(grid, f.eval(grid.points()))
