"""Weighted samples of measure spaces and the weak-L^p machinery.

A measure space is represented by finitely many cells, each carrying a mass
and a sampled value of the function of interest.  All weak-type quantities are
computed exactly for that discrete measure: the distribution function uses the
strict inequality ``|g| > lambda`` and the Marcinkiewicz quasinorm is obtained
from one descending sort.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WeightedSampleSet",
    "PowerWeight",
    "LogWeight",
    "ProductSampleGrid",
    "distribution",
    "weak_lp_quasinorm",
    "lp_norm",
    "superlevel_curve",
    "mixed_norm_check",
]


def _check_p(p):
    if not np.isfinite(p) or p < 1:
        raise ValueError(f"exponent p must satisfy p >= 1, got {p!r}")


@dataclass(frozen=True)
class WeightedSampleSet:
    """Finite weighted sample of a function on a measure space.

    Parameters
    ----------
    values : array_like
        Sampled function values (one per cell).  Only ``|values|`` matters for
        the weak/strong norms.
    masses : array_like
        Nonnegative cell masses, same length as ``values``.
    """

    values: np.ndarray
    masses: np.ndarray
    total_mass: float = field(init=False)

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=float).ravel())
        m = np.ascontiguousarray(np.asarray(self.masses, dtype=float).ravel())
        if v.shape != m.shape:
            raise ValueError("values and masses must have the same length")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("masses must be finite and nonnegative")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "total_mass", float(np.sum(m)))

    def __len__(self):
        return self.values.size

    def scaled(self, c):
        """Return the sample set of ``c * g`` on the same cells."""
        return WeightedSampleSet(c * self.values, self.masses)

    def _descending(self):
        """Absolute values sorted descending (stable: ties keep index order)
        with cumulative masses."""
        a = np.abs(self.values)
        order = np.argsort(-a, kind="stable")
        return a[order], np.cumsum(self.masses[order])


@dataclass(frozen=True)
class PowerWeight:
    """The measure ``w_gamma = t^(gamma-1) dt`` on ``(0, inf)``."""

    gamma: float

    def __post_init__(self):
        if self.gamma == 0 or not np.isfinite(self.gamma):
            raise ValueError("PowerWeight requires a finite gamma != 0")

    def antiderivative(self, t):
        """``W(t) = t^gamma / gamma`` (``W(inf)`` is 0 for gamma < 0)."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.power(t, self.gamma) / self.gamma

    def mass(self, a, b):
        """Exact mass of ``[a, b]``; accurate for narrow cells."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        g = self.gamma
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = np.log(b) - np.log(a)
            out = np.power(a, g) * np.expm1(g * ratio) / g
            if g > 0:
                out = np.where(a == 0, np.power(b, g) / g, out)
            inf_b = np.isinf(b)
            if np.any(inf_b):
                tail = np.where(g < 0, -np.power(a, g) / g, np.inf)
                out = np.where(inf_b, tail, out)
        return np.where(b > a, out, 0.0)

    def cell_masses(self, edges):
        """Masses of the cells ``[edges[k], edges[k+1]]``."""
        edges = np.asarray(edges, dtype=float)
        if np.any(edges <= 0) or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be positive and strictly increasing")
        return self.mass(edges[:-1], edges[1:])


@dataclass(frozen=True)
class LogWeight:
    """The measure ``v_eta = t^{-1} log^{-eta}(1/t) dt`` on ``(0, 1/2)``.

    In the coordinate ``u = log(1/t)`` it reads ``u^{-eta} du``.
    """

    eta: float
    domain: tuple = (0.0, 0.5)

    def __post_init__(self):
        if not self.eta > 1:
            raise ValueError("LogWeight requires eta > 1")
        lo, hi = self.domain
        if not (0 <= lo < hi <= 0.5):
            raise ValueError("LogWeight domain must be a subinterval of (0, 1/2)")

    def antiderivative_u(self, u):
        """Mass of ``{u' > u}`` i.e. of ``(0, e^{-u})``: ``u^{1-eta}/(eta-1)``."""
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return np.power(u, 1.0 - self.eta) / (self.eta - 1.0)

    def mass_u(self, u_lo, u_hi):
        """Mass of the u-interval ``[u_lo, u_hi]`` (``u_hi`` may be inf)."""
        u_lo = np.asarray(u_lo, dtype=float)
        u_hi = np.asarray(u_hi, dtype=float)
        out = self.antiderivative_u(u_lo) - self.antiderivative_u(u_hi)
        return np.where(u_hi > u_lo, out, 0.0)

    def mass(self, a, b):
        """Mass of the t-interval ``[a, b]`` inside ``(0, 1/2)``."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if np.any(b > 0.5) or np.any(a < 0):
            raise ValueError("LogWeight cells must lie in (0, 1/2)")
        with np.errstate(divide="ignore"):
            return self.mass_u(-np.log(b), -np.log(a))

    def cell_masses(self, edges):
        edges = np.asarray(edges, dtype=float)
        if np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        return self.mass(edges[:-1], edges[1:])


@dataclass(frozen=True)
class ProductSampleGrid:
    """A function ``F(x1, x2)`` sampled on a product of two weighted cell sets."""

    masses1: np.ndarray
    masses2: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        m1 = np.asarray(self.masses1, dtype=float).ravel()
        m2 = np.asarray(self.masses2, dtype=float).ravel()
        F = np.asarray(self.values, dtype=float)
        if F.shape != (m1.size, m2.size):
            raise ValueError(
                f"values shape {F.shape} does not match axes ({m1.size}, {m2.size})"
            )
        if np.any(m1 < 0) or np.any(m2 < 0):
            raise ValueError("masses must be nonnegative")
        object.__setattr__(self, "masses1", m1)
        object.__setattr__(self, "masses2", m2)
        object.__setattr__(self, "values", F)

    def flatten(self):
        return WeightedSampleSet(self.values.ravel(), np.outer(self.masses1, self.masses2).ravel())

    def row(self, i):
        return WeightedSampleSet(self.values[i], self.masses2)


def distribution(samples, lam):
    """Mass of ``{|g| > lam}`` (strict inequality)."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    a = np.abs(samples.values)
    return float(np.sum(samples.masses[a > lam]))


def weak_lp_quasinorm(samples, p):
    """Marcinkiewicz quasinorm ``(sup_lam lam^p m{|g|>lam})^(1/p)``.

    The supremum is approached as ``lam -> v^-`` for a sample value ``v``, so
    it equals ``max_v v^p m{|g| >= v}``, read off one descending sort.
    """
    _check_p(p)
    if len(samples) == 0:
        return 0.0
    a, cum = samples._descending()
    return float(np.max(a**p * cum) ** (1.0 / p))


def lp_norm(samples, p):
    """``(sum |g_i|^p m_i)^(1/p)``."""
    _check_p(p)
    if len(samples) == 0:
        return 0.0
    return float(np.sum(np.abs(samples.values) ** p * samples.masses) ** (1.0 / p))


def superlevel_curve(samples, p, lambda_grid):
    """Exact values of ``lam^p m{|g| > lam}`` on an ascending grid.

    Returns an ``(n, 2)`` array of ``(lam, lam^p * distribution)`` rows.
    """
    lam = np.asarray(lambda_grid, dtype=float).ravel()
    if lam.size == 0:
        raise ValueError("lambda grid is empty")
    if np.any(lam <= 0) or np.any(np.diff(lam) < 0):
        raise ValueError("lambda grid must be positive and ascending")
    a = np.abs(samples.values)
    order = np.argsort(a, kind="stable")
    asc = a[order]
    # suffix sums: mass of the entries at positions >= k in ascending order
    suffix = np.concatenate([np.cumsum(samples.masses[order][::-1])[::-1], [0.0]])
    idx = np.searchsorted(asc, lam, side="right")
    return np.column_stack([lam, lam**p * suffix[idx]])


def mixed_norm_check(product, p):
    """Check ``||F||_{L(p,inf)(X1 x X2)} <= || ||F_x1||_{L(p,inf)(X2)} ||_{L^p(X1)}``.

    Returns ``(lhs, rhs, holds)``.
    """
    _check_p(p)
    lhs = weak_lp_quasinorm(product.flatten(), p)
    rows = np.array([weak_lp_quasinorm(product.row(i), p) for i in range(product.masses1.size)])
    rhs = lp_norm(WeightedSampleSet(rows, product.masses1), p)
    return lhs, rhs, bool(lhs <= rhs * (1 + 1e-12))


def power_cell_superlevel(g, a, b, m, e, kappa, lambda_grid, p):
    """Exact ``lam^p * nu(E_lam)`` for a cell-wise frozen family.

    Each element is a t-interval ``[a, b]`` (``b`` may be ``inf``) carrying a
    frozen nonnegative amplitude ``g`` and an outer mass ``m``.  Inside the
    element the superlevel set is ``{t in [a, b] : g * t**e > lam}`` and the
    t-axis carries the density ``t**(kappa - 1)``; its mass is obtained from the
    exact primitive ``t**kappa / kappa``, so the only discretization is the
    freezing of ``g``.

    Returns an array with one value per entry of the ascending ``lambda_grid``.
    """
    lam = np.asarray(lambda_grid, dtype=float)
    G = lam.size
    g, a, b, m = (np.asarray(v, dtype=float) for v in (g, a, b, m))
    g, a, b, m = (np.broadcast_to(v, np.broadcast_shapes(g.shape, a.shape, b.shape, m.shape)).ravel()
                  for v in (np.abs(g), a, b, m))
    keep = (g > 0) & (m > 0) & (b > a)
    g, a, b, m = g[keep], a[keep], b[keep], m[keep]
    out = np.zeros(G)
    if g.size == 0:
        return out
    if kappa > 0 and e >= 0 and np.any(np.isinf(b)):
        raise ValueError("unbounded element with divergent weight")
    w = PowerWeight(kappa)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if e == 0:
            full_mass = w.mass(a, b)
            i_full = np.searchsorted(lam, g, side="left")
            H = np.bincount(i_full, weights=m * full_mass, minlength=G + 1)
            full = np.cumsum(H[::-1])[::-1][1:]
            return lam**p * full
        if e < 0:
            lam_lo = g * np.power(b, e)
            lam_hi = g * np.power(a, e)
            part_A = -m * w.antiderivative(a)
            part_B = m * np.power(g, -kappa / e) / kappa
        else:
            lam_lo = g * np.power(a, e)
            lam_hi = g * np.power(b, e)
            Wb = np.where(np.isinf(b), 0.0, w.antiderivative(b))
            part_A = m * Wb
            part_B = -m * np.power(g, -kappa / e) / kappa
        full_mass = m * w.mass(a, b)
    i_lo = np.searchsorted(lam, lam_lo, side="right")
    i_hi = np.searchsorted(lam, lam_hi, side="left")
    # full membership on [0, i_lo): reverse cumulative sums of nonnegative terms
    finite_full = np.isfinite(full_mass)
    H = np.bincount(i_lo[finite_full], weights=full_mass[finite_full], minlength=G + 1)
    full = np.cumsum(H[::-1])[::-1][1:]
    # partial membership on [i_lo, i_hi): difference arrays
    sel = i_hi > i_lo
    dA = np.bincount(i_lo[sel], weights=part_A[sel], minlength=G + 1) - np.bincount(
        i_hi[sel], weights=part_A[sel], minlength=G + 1
    )
    dB = np.bincount(i_lo[sel], weights=part_B[sel], minlength=G + 1) - np.bincount(
        i_hi[sel], weights=part_B[sel], minlength=G + 1
    )
    A = np.cumsum(dA)[:G]
    B = np.cumsum(dB)[:G]
    q = p + kappa / e
    # the difference arrays cancel to round-off where no element is partial
    return np.maximum(lam**p * (full + A) + lam**q * B, 0.0)
