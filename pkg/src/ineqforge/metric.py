"""Finite metric measure spaces: ball averages, sharp maximal-type operators,
the Garsia-type pointwise inequality, Vitali covers of Carleson boxes and the
weak-type embedding of Campanato-type spaces.

Balls are closed, ``B(x, r) = {y : d(x, y) <= r}``.  On a finite space the
contents of ``B(x, r)`` change only at the distances from ``x`` to the other
points, so every supremum over radii below is an exact maximum over finitely
many candidates, and integrals against ``d rho`` are exact Stieltjes sums over
the intervals on which the integrand is constant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .measure import PowerWeight, WeightedSampleSet, weak_lp_quasinorm

__all__ = [
    "PointCloudSpace",
    "RadialGauge",
    "CarlesonCover",
    "ball_average",
    "garsia_sequence",
    "garsia_check",
    "sharp_rho_maximal",
    "vitali_carleson_verify",
    "ahlfors_regularity",
    "ccbsy_check",
    "load_point_cloud_csv",
    "load_distance_matrix",
]


@dataclass(frozen=True)
class PointCloudSpace:
    """Finite metric measure space given by a distance matrix and point masses.

    The triangle inequality is checked on all triples for ``n <= 300`` and on
    ``10^4`` random triples otherwise.  Masses must be strictly positive: a
    zero-mass point would not be a Lebesgue point of anything.
    """

    distance: np.ndarray
    masses: np.ndarray
    check_seed: int = 0

    def __post_init__(self):
        D = np.asarray(self.distance, dtype=float)
        m = np.asarray(self.masses, dtype=float).ravel()
        n = m.size
        if D.shape != (n, n):
            raise ValueError("distance matrix must be n x n with one mass per point")
        if n == 0:
            raise ValueError("the space must contain at least one point")
        if not np.all(np.isfinite(D)) or np.any(D < 0):
            raise ValueError("distances must be finite and nonnegative")
        if np.any(np.diag(D) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        if not np.allclose(D, D.T, rtol=0, atol=1e-12 * max(1.0, float(D.max()))):
            raise ValueError("distance matrix must be symmetric")
        if np.any(m <= 0) or not np.all(np.isfinite(m)):
            raise ValueError("point masses must be finite and strictly positive")
        D = 0.5 * (D + D.T)
        tol = 1e-12 * max(1.0, float(D.max()))
        if n <= 300:
            for k in range(n):
                if np.any(D > D[:, k, None] + D[None, k, :] + tol):
                    raise ValueError("distance matrix violates the triangle inequality")
        else:
            rng = np.random.default_rng(self.check_seed)
            i, j, k = rng.integers(0, n, (3, 10_000))
            if np.any(D[i, j] > D[i, k] + D[k, j] + tol):
                raise ValueError("distance matrix violates the triangle inequality")
        D.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "distance", D)
        object.__setattr__(self, "masses", m)
        order = np.argsort(D, axis=1, kind="stable")
        order.setflags(write=False)
        object.__setattr__(self, "_order", order)

    @classmethod
    def from_points(cls, points, masses=None):
        """Euclidean cloud; uniform unit total mass by default."""
        x = np.asarray(points, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        D = np.sqrt(np.maximum(np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=-1), 0.0))
        m = np.full(x.shape[0], 1.0 / x.shape[0]) if masses is None else masses
        return cls(D, m)

    @property
    def n(self):
        return self.masses.size

    @property
    def diam(self):
        return float(self.distance.max())

    def ball_mass(self, x, r):
        return float(np.sum(self.masses[self.distance[x] <= r]))

    def min_positive_distance(self):
        pos = self.distance[self.distance > 0]
        return float(pos.min()) if pos.size else np.inf

    def _ladder(self, x):
        """Sorted neighbours of ``x`` and the tie-group structure.

        Returns ``(order, radii, ends)``: ``radii[k]`` is the k-th distinct
        distance from ``x`` (``radii[0] = 0``) and ``order[:ends[k]]`` lists the
        points of ``B(x, radii[k])``.
        """
        order = self._order[x]
        d = self.distance[x, order]
        last = np.r_[d[1:] != d[:-1], True]
        ends = np.flatnonzero(last) + 1
        return order, d[ends - 1], ends

    def mu(self, r):
        """``inf_x m(B(x, r))`` for an array of radii."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        best = np.full(r.shape, np.inf)
        for x in range(self.n):
            order = self._order[x]
            d = self.distance[x, order]
            cum = np.cumsum(self.masses[order])
            best = np.minimum(best, cum[np.searchsorted(d, r, side="right") - 1])
        return best


@dataclass(frozen=True)
class RadialGauge:
    """Continuous increasing ``rho: (0, inf) -> (0, inf)`` with ``rho(0+) = 0``.

    ``rho_bar(r) = rho(2r)``.  Monotonicity is spot-checked on a 1024-point
    log grid.  ``weight_integral(r, N)``, when given, is the closed form of
    ``int_0^r d rho_bar(l) / l^{2N}``; otherwise it is computed by quadrature.
    """

    rho: Callable
    name: str = "rho"
    check_range: tuple = (1e-8, 1e4)
    weight_integral: Optional[Callable] = None

    def __post_init__(self):
        r = np.geomspace(*self.check_range, 1024)
        v = np.asarray(self.rho(r), dtype=float)
        if np.any(~np.isfinite(v)) or np.any(v <= 0) or np.any(np.diff(v) <= 0):
            raise ValueError(f"gauge {self.name} is not positive and strictly increasing")

    def __call__(self, r):
        return np.asarray(self.rho(np.asarray(r, dtype=float)), dtype=float)

    def rho_bar(self, r):
        return self(2.0 * np.asarray(r, dtype=float))

    @classmethod
    def power(cls, a):
        """``rho(r) = r^a``."""
        if a <= 0:
            raise ValueError("power gauge needs a positive exponent")

        def weight(r, N):
            if a <= 2 * N:
                return np.full(np.shape(r), np.inf)
            return 2.0**a * a / (a - 2 * N) * np.power(r, a - 2 * N)

        return cls(lambda r: np.power(r, a), f"r^{a}", weight_integral=weight)

    @classmethod
    def log_campanato(cls, N, beta):
        """``rho(r) = r^{2N} log(e/r)^{-beta}`` on ``(0, 1]`` and ``r^{2N}`` beyond."""

        def rho(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                small = r ** (2 * N) * np.log(np.e / np.minimum(r, 1.0)) ** (-beta)
            return np.where(r <= 1.0, small, r ** (2 * N))

        def weight(r, n):
            if n != N:
                raise ValueError("weight integral is tabulated for the gauge dimension only")
            if beta <= 1:
                return np.full(np.shape(r), np.inf)
            r = np.asarray(r, dtype=float)
            L = np.log(np.e / np.minimum(2 * r, 1.0))
            small = L**-beta + 2 * N * L ** (1 - beta) / (beta - 1)
            big = 1 + 2 * N / (beta - 1) + 2 * N * np.log(np.maximum(2 * r, 1.0))
            return 4.0**N * np.where(2 * r <= 1, small, big)

        return cls(rho, f"log-campanato(N={N}, beta={beta})", weight_integral=weight)


def ball_average(space, f, x, r):
    """Mass-weighted mean of ``f`` over the closed ball ``B(x, r)``."""
    if r <= 0:
        raise ValueError("radius must be positive")
    inside = space.distance[x] <= r
    w = space.masses[inside]
    return float(np.dot(w, np.asarray(f, dtype=float)[inside]) / np.sum(w))


def _sharp_ladder(space, f, x, rho):
    """Radii ``r_k > 0`` (distinct distances from x) and the values
    ``m(B)/rho(r) int_B |f - (f)_B| dm`` at those radii."""
    order, radii, ends = space._ladder(x)
    v = f[order]
    m = space.masses[order]
    cm = np.cumsum(m)
    cv = np.cumsum(m * v)
    k = slice(1, None) if radii[0] == 0 else slice(None)
    radii, ends = radii[k], ends[k]
    mass = cm[ends - 1]
    avg = cv[ends - 1] / mass
    # oscillation integrals over nested balls
    j = np.arange(v.size)
    mask = j[None, :] < ends[:, None]
    osc = np.sum(mask * m[None, :] * np.abs(v[None, :] - avg[:, None]), axis=1)
    return radii, mass / rho(radii) * osc


def sharp_rho_maximal(space, f, gauge, R=None, inclusive=False, use_rho_bar=False):
    """``f_rho^#(x) = sup_{0 < r < diam} m(B)/rho(r) int_B |f - (f)_B| dm``.

    Between consecutive distances from ``x`` the ball is constant and
    ``rho`` increases, so the supremum is a maximum over the distinct
    distances.  ``R`` restricts to ``r < R`` (``r <= R`` if ``inclusive``).
    """
    f = np.asarray(f, dtype=float)
    rho = gauge.rho_bar if use_rho_bar else gauge
    out = np.zeros(space.n)
    for x in range(space.n):
        r, s = _sharp_ladder(space, f, x, rho)
        if R is None:
            keep = r < space.diam
        else:
            keep = (r <= R) if inclusive else (r < R)
        if np.any(keep):
            out[x] = float(np.max(s[keep]))
    return out


def garsia_sequence(gauge, r0, resolution, max_terms=10_000):
    """Radii with ``rho_bar(r_n) = rho_bar(r_{n-1}) / 2``, ``r_0 = r0``, solved by
    bisection in ``log r`` to ``1e-12`` relative, stopping once ``r_n < resolution``."""
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    out = [float(r0)]
    while out[-1] >= resolution and len(out) < max_terms:
        hi = out[-1]
        target = 0.5 * float(gauge.rho_bar(hi))
        lo = hi / 2
        for _ in range(2000):
            if gauge.rho_bar(lo) < target:
                break
            lo /= 2
        else:
            raise ValueError("gauge does not decrease to zero")
        if not gauge.rho_bar(lo) < target < gauge.rho_bar(hi):
            raise ValueError("gauge is not strictly increasing on the bracket")
        a, b = np.log(lo), np.log(hi)
        while b - a > 1e-13:
            mid = 0.5 * (a + b)
            if gauge.rho_bar(np.exp(mid)) < target:
                a = mid
            else:
                b = mid
        out.append(float(np.exp(0.5 * (a + b))))
    return np.array(out)


def _mu_steps(space):
    """Breakpoints ``0 = c_0 < c_1 < ...`` and values ``mu_k = mu(c_k)`` of the
    right-continuous step function ``mu(r) = inf_x m(B(x, r))``."""
    c = np.unique(np.concatenate([[0.0], space.distance.ravel()]))
    return c, space.mu(c)


def garsia_integral(space, gauge, upper):
    """Exact ``int_0^{upper} d rho_bar / mu^2`` for an array of upper limits."""
    c, mu = _mu_steps(space)
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    rb = gauge.rho_bar(np.maximum(c, 1e-300))
    rb[0] = 0.0
    # full intervals [c_k, c_{k+1})
    inc = (np.diff(rb)) / mu[:-1] ** 2
    cum = np.concatenate([[0.0], np.cumsum(inc)])
    k = np.searchsorted(c, upper, side="right") - 1
    partial = (gauge.rho_bar(upper) - rb[k]) / mu[k] ** 2
    return cum[k] + partial


def garsia_partition_sum(space, gauge, r):
    """Upper Stieltjes sum of ``int_0^r d rho_bar / mu^2`` on the Garsia partition
    (reported alongside the exact integral; not used in the check)."""
    rs = garsia_sequence(gauge, r, 0.5 * space.min_positive_distance())
    rb = gauge.rho_bar(rs)
    rb = np.append(rb, 0.0)
    lows = np.append(rs[1:], 0.0)
    mus = space.mu(lows)
    return float(np.sum((rb[:-1] - rb[1:]) / mus**2))


def garsia_check(space, f, gauge, constant=9.0):
    """Check ``|f(x) - f(y)| <= 9 (int_0^{2d} d rho_bar / mu^2)
    (f^#_{2d, rho_bar}(x) + f^#_{2d, rho_bar}(y))`` for all pairs ``x != y``.

    The restricted maximal functions take the supremum over ``r <= 2d`` (the
    limit of the bound as the auxiliary radius decreases to ``d``).  Returns a
    dict with ``max_violation_ratio`` (max of lhs/rhs over pairs), ``holds``
    and ``degenerate_pairs`` (rhs = 0 < lhs; impossible unless there is a bug).
    """
    f = np.asarray(f, dtype=float)
    n = space.n
    ladders = [_sharp_ladder(space, f, x, gauge.rho_bar) for x in range(n)]
    cummax = [(r, np.maximum.accumulate(s)) for r, s in ladders]
    D = space.distance
    iu, ju = np.triu_indices(n, 1)
    d = D[iu, ju]
    keep = d > 0
    iu, ju, d = iu[keep], ju[keep], d[keep]
    integral = garsia_integral(space, gauge, 2 * d)

    def restricted(idx, q):
        out = np.zeros(q.size)
        for x in np.unique(idx):
            sel = idx == x
            r, M = cummax[x]
            k = np.searchsorted(r, q[sel], side="right") - 1
            out[sel] = np.where(k >= 0, M[np.maximum(k, 0)], 0.0)
        return out

    fx = restricted(iu, 2 * d)
    fy = restricted(ju, 2 * d)
    lhs = np.abs(f[iu] - f[ju])
    rhs = constant * integral * (fx + fy)
    degenerate = int(np.sum((rhs == 0) & (lhs > 0)))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
    worst = float(np.max(ratio)) if ratio.size else 0.0
    return {"max_violation_ratio": worst, "holds": bool(worst <= 1 + 1e-9 and degenerate == 0),
            "degenerate_pairs": degenerate, "pairs": int(lhs.size)}


# ----------------------------------------------------------------------------
# Vitali covers of Carleson boxes


@dataclass
class CarlesonCover:
    centers: np.ndarray
    radii: np.ndarray
    dilation: float = 4.0
    c_m: float = 0.0
    box_masses: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def size(self):
        return self.centers.size


def _admissible_times(space, f, p, lam, weight):
    """Per point: the intervals of admissible ``t`` and ``t_x``.

    For ``t`` in ``[d_k, d_{k+1})`` the ball average is the constant ``a_k``; the
    condition ``|a_k| > lam C(t)^{1/p}`` with ``C(t) = W(t)`` (``t`` for
    Lebesgue measure) holds for ``t < tau_k``.
    """
    g = 1.0 if weight is None else weight.gamma
    w = PowerWeight(g)
    tx = np.zeros(space.n)
    kx = np.zeros(space.n, dtype=int)
    mass = np.zeros(space.n)
    ball_r = np.zeros(space.n)
    for x in range(space.n):
        order, radii, ends = space._ladder(x)
        m = space.masses[order]
        cm = np.cumsum(m)[ends - 1]
        a = np.cumsum(m * f[order])[ends - 1] / cm
        lo = np.where(radii == 0, 0.0, radii)
        hi = np.append(radii[1:], np.inf)
        tau = (g * np.abs(a) ** p / lam**p) ** (1.0 / g)
        top = np.minimum(hi, tau)
        ok = top > lo
        if not np.any(ok):
            continue
        mass[x] = float(np.sum(w.mass(lo[ok], top[ok])))
        k = int(np.argmax(np.where(ok, top, -np.inf)))
        tx[x] = top[k]
        kx[x] = k
        ball_r[x] = radii[k]
    return tx, ball_r, mass, w


def vitali_carleson_verify(space, f, p, lam, weight=None):
    """Constructive check of the weak-type bound for ball averages.

    ``T_t f(x)`` is the average of ``f`` over ``B(x, t)``; the product measure
    is ``m x dt`` (or ``m x t^{gamma-1} dt`` for a :class:`PowerWeight`, with
    threshold ``lam C(t)^{1/p}``, ``C(t) = t^gamma / gamma``).  For every
    ``x`` the supremum ``t_x`` of admissible ``t`` is computed exactly; balls
    ``J_x = {d(x, .) < t_x}`` are selected greedily by decreasing ``t_x``
    (lower index first on ties) when disjoint from those already chosen.

    Verified: disjointness; ``x in B(x_i, 4 t_i)`` with ``t_x <= 2 t_i`` for some
    selected ``i`` (so the Carleson boxes cover the superlevel set); and

        mass(E_lam) <= mass(union of boxes) <= sum_i C(2 t_i) m(B(x_i, 4 t_i))
                    <= c * c_m / lam^p * ||f||_p^p

    with ``c = 2^gamma`` (``2`` for Lebesgue measure) and ``c_m`` the largest
    ratio ``m(B(x_i, 4 t_i)) / m(J_i)``.  A failed inclusion raises
    ``RuntimeError``.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if p < 1:
        raise ValueError("p must satisfy p >= 1")
    if weight is not None and (not isinstance(weight, PowerWeight) or weight.gamma <= 0):
        raise ValueError("weight must be a PowerWeight with gamma > 0")
    f = np.asarray(f, dtype=float)
    D = space.distance
    m = space.masses
    tx, ball_r, mass, w = _admissible_times(space, f, p, lam, weight)
    g = w.gamma
    E = np.flatnonzero(tx > 0)
    order = E[np.lexsort((E, -tx[E]))]
    taken = np.zeros(space.n, dtype=bool)
    sel = []
    for x in order:
        ball = D[x] < tx[x]
        if not np.any(taken & ball):
            sel.append(x)
            taken |= ball
    sel = np.array(sel, dtype=int)
    ti = tx[sel]
    # pairwise disjointness of the selected balls as point sets
    if sel.size:
        member = D[sel] < ti[:, None]
        if np.any(member.sum(axis=0) > 1):
            raise RuntimeError("selected balls are not disjoint")
    # inclusion of (x, t_x) in some box B(x_i, 4 t_i) x (0, 2 t_i)
    for x in E:
        ok = (D[sel, x] <= 4 * ti) & (tx[x] <= 2 * ti)
        if not np.any(ok):
            raise RuntimeError(f"point {x} is not covered by the Carleson boxes")
    Wf = lambda t: w.mass(0.0, t)  # noqa: E731
    measured = float(np.sum(m * mass))
    big = (D[sel] <= 4 * ti[:, None]) if sel.size else np.zeros((0, space.n), bool)
    union = float(np.sum(m * np.max(np.where(big, Wf(2 * ti)[:, None], 0.0), axis=0))) if sel.size else 0.0
    B4 = big @ m if sel.size else np.zeros(0)
    J = (D[sel] < ti[:, None]) @ m if sel.size else np.zeros(0)
    box = float(np.sum(Wf(2 * ti) * B4)) if sel.size else 0.0
    c_m = float(np.max(B4 / J)) if sel.size else 1.0
    norm = float(np.sum(m * np.abs(f) ** p))
    const = 2.0**g
    bound = const * c_m / lam**p * norm
    jensen = float(np.sum(Wf(ti) * J)) if sel.size else 0.0
    cover = CarlesonCover(sel, ti, 4.0, c_m, Wf(2 * ti) * B4 if sel.size else np.zeros(0))
    slack = 1 + 1e-9
    chain = [measured <= union * slack, union <= box * slack, box <= const * c_m * jensen * slack,
             jensen <= norm / lam**p * slack, box <= bound * slack]
    return cover, {"measured_mass": measured, "union_mass": union, "box_mass": box, "bound": bound,
                   "c_m": c_m, "selected": int(sel.size), "superlevel_points": int(E.size),
                   "chain": chain, "holds": bool(all(chain))}


# ----------------------------------------------------------------------------
# Campanato-type embedding


def ahlfors_regularity(space, N=None, n_radii=24):
    """Regularity diagnostics for ``m(B(x, r)) ~ r^N``.

    The exponent is fitted to the largest ball mass over centres (boundary
    truncation only removes mass) at log-spaced radii between twice the
    smallest positive distance and a quarter of the diameter.
    Returns ``(N_fit, c0, C0)`` where ``c0 r^N <= m(B(x, r)) <= C0 r^N`` over
    all centres and those radii (using ``N`` when supplied, else the fit).
    """
    h = space.min_positive_distance()
    if not np.isfinite(h) or 2 * h >= 0.25 * space.diam:
        raise ValueError("too few distinct scales to assess regularity")
    r = np.geomspace(2 * h, 0.25 * space.diam, n_radii)
    mb = np.empty((space.n, r.size))
    for x in range(space.n):
        order = space._order[x]
        d = space.distance[x, order]
        mb[x] = np.cumsum(space.masses[order])[np.searchsorted(d, r, side="right") - 1]
    slope = float(np.polyfit(np.log(r), np.log(mb.max(axis=0)), 1)[0])
    n_use = slope if N is None else N
    q = mb / r**n_use
    return slope, float(q.min()), float(q.max())


def _ccbsy_weight(gauge, N, upper):
    """``int_0^r d rho_bar(l) / l^{2N}`` for an ascending array of ``r``, via
    ``rho_bar(r)/r^{2N} + 2N int_0^r rho_bar(l) l^{-2N-1} dl``."""
    if gauge.weight_integral is not None:
        return np.asarray(gauge.weight_integral(upper, N), dtype=float)
    h = lambda l: float(gauge.rho_bar(l)) * l ** (-2 * N - 1)  # noqa: E731
    out = np.empty(upper.size)
    acc, prev = 0.0, 0.0
    for i, r in enumerate(upper):
        if r > prev:
            val, _ = integrate.quad(h, prev, r, epsabs=0, epsrel=1e-10, limit=200)
            acc += val
            prev = r
        out[i] = float(gauge.rho_bar(r)) / r ** (2 * N) + 2 * N * acc
    return out


def ccbsy_check(space, f, p, gauge, N, max_shape_ratio=100.0, dim_tol=0.35):
    """Weak-type quotient versus the Campanato-type norm on an ``N``-regular space.

    ``lhs``: weak-L^p quasinorm over pairs of
    ``|f(x) - f(y)| / (d^{N/p} int_0^{2d} d rho_bar / l^{2N})``;
    ``rhs``: ``||f^#_{rho_bar}||_p``.  The space must pass a regularity check
    (fitted exponent within ``dim_tol`` of ``N`` and ``C0/c0 <= max_shape_ratio``),
    otherwise ``ValueError`` is raised.  The implied constant is not known in
    closed form, so only the ratio is reported.
    """
    if p <= 1:
        raise ValueError("p must exceed 1")
    n_fit, c0, C0 = ahlfors_regularity(space, N)
    if abs(n_fit - N) > dim_tol or C0 / c0 > max_shape_ratio:
        raise ValueError(f"space is not {N}-regular (fit {n_fit:.3f}, C0/c0 = {C0 / c0:.1f})")
    f = np.asarray(f, dtype=float)
    D = space.distance
    iu, ju = np.nonzero(D > 0)
    d = D[iu, ju]
    u, inv = np.unique(2 * d, return_inverse=True)
    den = d ** (N / p) * _ccbsy_weight(gauge, N, u)[inv]
    vals = np.abs(f[iu] - f[ju]) / den
    m = space.masses
    lhs = weak_lp_quasinorm(WeightedSampleSet(vals, m[iu] * m[ju]), p)
    sharp = sharp_rho_maximal(space, f, gauge, use_rho_bar=True)
    rhs = float(np.sum(m * sharp**p)) ** (1.0 / p)
    return {"lhs_quasinorm": lhs, "rhs_cc_norm": rhs, "ratio": lhs / rhs if rhs > 0 else 0.0,
            "regularity": {"N_fit": n_fit, "c0": c0, "C0": C0}}


# ----------------------------------------------------------------------------
# loaders


def load_point_cloud_csv(path):
    """Rows ``x1,...,xd,mass``; Euclidean distances."""
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row and not row[0].startswith("#")]
    arr = np.array(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ValueError("point-cloud CSV needs at least one coordinate and a mass per row")
    return PointCloudSpace.from_points(arr[:, :-1], arr[:, -1])


def load_distance_matrix(path, masses: Optional[np.ndarray] = None):
    """Whitespace- or comma-separated symmetric matrix; uniform masses by default."""
    with open(path) as fh:
        text = fh.read().replace(",", " ")
    D = np.array([[float(v) for v in line.split()] for line in text.splitlines() if line.strip()])
    m = np.full(D.shape[0], 1.0 / D.shape[0]) if masses is None else masses
    return PointCloudSpace(D, m)
