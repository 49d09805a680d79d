"""Grid maximal operators and the weak-type engine for operator families.

The engine takes any sampled family ``t -> T_t f`` and evaluates the superlevel
functional

    lam^p * (m x w){(x, t) : |T_t f(x)| > lam * t^{gamma/p}}

for a power weight ``w = t^{gamma-1} dt`` (either sign of ``gamma``), or its
logarithmic analogue for ``v_eta = t^{-1} log^{-eta}(1/t) dt``.  Inside each
t-cell the value ``T_t f(x)`` is frozen; the weight and the threshold are
integrated exactly, so the discrete inequality

    sup_lam lam^p (m x w)(E_lam) <= c_w * ||T^* f||_p^p,   T^* = max_t |T_t f|,

holds without any slack (cell by cell, ``{|T_t f| > ...}`` is contained in
``{T^* f > ...}``).  Measurability of ``(x, t) -> T_t f(x)`` is an assumption on
user-supplied families that cannot be checked from samples.

The maximal operators act on a :class:`~ineqforge.corpus.SampledField` over a
uniform grid.  In 1-D balls are intervals and averages use exact cell
intersections; in 2-D a cell belongs to a ball when its center does.  Balls
are clipped to the grid box by default (``boundary="clip"``); with
``boundary="zero"`` the field is extended by zero and normalized by the full
ball measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import fftconvolve

from .corpus import GridSpec, SampledField, ball_volume, sample
from .functionals import LimitEstimate, PairGrid, SuperlevelCurve, _power_pair_curve, extract_limit
from .measure import LogWeight, PowerWeight, power_cell_superlevel

__all__ = [
    "SampledField",
    "OperatorFamilySample",
    "EngineResult",
    "family_engine",
    "difference_quotient_family",
    "dyadic_radii",
    "hl_maximal",
    "fractional_maximal",
    "sharp_maximal",
    "phi_log_maximal",
    "higher_order_experiment",
    "thmph_experiment",
    "campanato_identity",
    "campanato_bsy_embedding",
    "campanato_ratio",
    "holder_constant",
    "sharp_vs_hl_factor",
]

HEAD_TOL = 1e-3


# ----------------------------------------------------------------------------
# operator families and the engine


@dataclass(frozen=True)
class OperatorFamilySample:
    """Values ``T_t f(x)`` on x-cells times parameter cells.

    Parameters
    ----------
    x_masses : (n,) array
        Masses of the x-cells.
    edges : (T + 1,) array
        Strictly increasing positive cell edges of the parameter axis.  For a
        :class:`PowerWeight` the coordinate is ``t``; for a :class:`LogWeight`
        it is ``u = log(1/t)`` (so increasing ``u`` means ``t -> 0``).
    values : (n, T) array
        ``T_t f(x)`` frozen on each cell.
    weight : PowerWeight or LogWeight
    limit_values : (n,) array, optional
        ``lim_{t -> 0} T_t f(x)``; defaults to the column nearest ``t = 0``.
    """

    x_masses: np.ndarray
    edges: np.ndarray
    values: np.ndarray
    weight: Union[PowerWeight, LogWeight]
    limit_values: Optional[np.ndarray] = None

    def __post_init__(self):
        m = np.asarray(self.x_masses, dtype=float).ravel()
        e = np.asarray(self.edges, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float)
        if v.shape != (m.size, e.size - 1):
            raise ValueError(f"values must have shape {(m.size, e.size - 1)}, got {v.shape}")
        if np.any(e <= 0) or np.any(np.diff(e) <= 0):
            raise ValueError("parameter edges must be positive and strictly increasing")
        if np.any(m < 0):
            raise ValueError("x masses must be nonnegative")
        if not np.all(np.isfinite(v)):
            raise ValueError("family values must be finite")
        if isinstance(self.weight, LogWeight):
            lo, hi = self.weight.domain
            if e[0] < np.log(1.0 / hi) * (1 - 1e-12):
                raise ValueError("log-weight cells must lie inside the weight's domain")
        elif not isinstance(self.weight, PowerWeight):
            raise TypeError("weight must be a PowerWeight or a LogWeight")
        lim = self.limit_values
        if lim is None:
            lim = v[:, -1] if isinstance(self.weight, LogWeight) else v[:, 0]
        lim = np.asarray(lim, dtype=float).ravel()
        if lim.size != m.size:
            raise ValueError("limit_values must have one entry per x-cell")
        for name, arr in (("x_masses", m), ("edges", e), ("values", v), ("limit_values", lim)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def is_log(self):
        return isinstance(self.weight, LogWeight)

    @property
    def t_grid(self):
        """Cell representatives in the ``t`` coordinate (may underflow to 0)."""
        mid = np.sqrt(self.edges[:-1] * self.edges[1:])
        return np.exp(-mid) if self.is_log else mid

    def exponents(self, p):
        """``(e, kappa, c_w)``: the cell condition is ``|T| * s^e > lam`` for the
        density ``s^(kappa-1)`` in the native coordinate ``s``; ``c_w`` is the
        constant in the sup bound and in the limit."""
        if self.is_log:
            eta = self.weight.eta
            return (eta - 1.0) / p, 1.0 - eta, 1.0 / (eta - 1.0)
        g = self.weight.gamma
        return -g / p, g, 1.0 / abs(g)


@dataclass
class EngineResult:
    curve: SuperlevelCurve
    sup_bound_lhs: float
    sup_bound_rhs: float
    holds: bool
    limit_estimate: LimitEstimate
    limit_target: float
    meta: dict = field(default_factory=dict)

    @property
    def rel_error(self):
        if self.limit_target == 0:
            return abs(self.limit_estimate.value)
        return abs(self.limit_estimate.value - self.limit_target) / abs(self.limit_target)


def _default_lambdas(fam, p, points=121):
    e, _, _ = fam.exponents(p)
    top = float(np.max(np.abs(fam.values))) if fam.values.size else 0.0
    if top == 0:
        return np.geomspace(1e-3, 1e3, points)
    if fam.is_log:
        s_deep, s_shallow = fam.edges[-1] / 1e3, fam.edges[0]
    else:
        s_deep, s_shallow = fam.edges[0] * 1e3, fam.edges[-1]
    l1, l2 = top * s_deep**e, top * s_shallow**e
    lo, hi = min(l1, l2), max(l1, l2)
    if l1 > l2:
        lo /= 100.0
    else:
        hi *= 100.0
    return np.geomspace(lo, hi, points)


def family_engine(fam, p, lambda_grid=None, rel_tol=0.02):
    """Superlevel curve, sup bound and limit identity for an operator family.

    Returns an :class:`EngineResult` with

    ``sup_bound_lhs``  max over the lambda grid of ``lam^p (m x w)(E_lam)``
    ``sup_bound_rhs``  ``c_w ||T^* f||_p^p`` with ``T^*`` the max over the
                       sampled cells and ``c_w = 1/|gamma|`` (power weight) or
                       ``1/(eta - 1)`` (log weight)
    ``limit_estimate`` plateau as ``lam -> inf`` (``gamma > 0`` and log
                       weight) or ``lam -> 0`` (``gamma < 0``), restricted to
                       lambdas at which the unsampled band next to ``t = 0``
                       carries less than 0.1% of the curve
    ``limit_target``   ``c_w ||lim_{t->0} T_t f||_p^p``
    """
    if not np.isfinite(p) or p < 1:
        raise ValueError("p must satisfy p >= 1")
    lam = _default_lambdas(fam, p) if lambda_grid is None else np.sort(np.asarray(lambda_grid, float).ravel())
    if lam.size == 0 or np.any(lam <= 0):
        raise ValueError("lambda grid must be nonempty and positive")
    e, kappa, c_w = fam.exponents(p)
    g = np.abs(fam.values)
    m = fam.x_masses[:, None]
    a, b = fam.edges[:-1][None, :], fam.edges[1:][None, :]
    vals = power_cell_superlevel(g, a, b, m, e, kappa, lam, p)
    # the band between t = 0 and the sampled cells, frozen at the nearest column
    if fam.is_log:
        head = power_cell_superlevel(g[:, -1], fam.edges[-1], np.inf, fam.x_masses, e, kappa, lam, p)
    else:
        head = power_cell_superlevel(g[:, 0], 0.0, fam.edges[0], fam.x_masses, e, kappa, lam, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(vals + head > 0, head / (vals + head), 0.0)
    t_star = np.max(g, axis=1) if g.shape[1] else np.zeros(g.shape[0])
    rhs = c_w * float(np.sum(fam.x_masses * t_star**p))
    lhs = float(np.max(vals))
    mode = "small_param" if (not fam.is_log and fam.weight.gamma < 0) else "large_param"
    curve = SuperlevelCurve(lam, vals, None, frac, [], {"p": p, "weight": repr(fam.weight)})
    ok = frac < HEAD_TOL
    if np.count_nonzero(ok) >= 3:
        est = extract_limit(SuperlevelCurve(lam[ok], vals[ok]), mode, rel_tol)
    else:
        curve.flags.append("parameter cells do not reach close enough to t = 0")
        est = LimitEstimate(float(vals[-1] if mode == "large_param" else vals[0]), np.inf, (np.nan, np.nan), False)
    target = c_w * float(np.sum(fam.x_masses * np.abs(fam.limit_values) ** p))
    return EngineResult(curve, lhs, rhs, bool(lhs <= rhs * (1 + 1e-12)), est, target,
                        {"mode": mode, "c_w": c_w})


def _x_grid(f, x_cells, half_width):
    L = float(half_width if half_width is not None else 1.5 * f.support_radius)
    grid = GridSpec.uniform(-L, L, x_cells, 1)
    return grid, grid.points(), grid.cell_volumes()


def _parameter_edges(weight, t_cells, t_min, t_max, u_max):
    if isinstance(weight, LogWeight):
        lo, hi = weight.domain
        u_lo = np.log(1.0 / hi)
        u_hi = np.log(1.0 / lo) if lo > 0 else u_max
        return np.geomspace(u_lo, min(u_hi, u_max), t_cells + 1), True
    return np.geomspace(t_min, t_max, t_cells + 1), False


def difference_quotient_family(f, weight, x_cells=4096, t_cells=2048, t_min=1e-8, t_max=None,
                               half_width=None, u_max=1e8):
    """One-sided difference quotients ``T_t f(x) = (f(x + t) - f(x)) / t`` (1-D).

    For a :class:`LogWeight` the parameter axis is ``u = log(1/t)`` up to
    ``u_max``; where ``t = e^{-u}`` is below ``1e-12`` the quotient equals
    ``f'(x)`` to within ``|f''| t``, so the derivative oracle is used.
    """
    if f.dim != 1:
        raise ValueError("difference_quotient_family is one-dimensional")
    grid, x, mx = _x_grid(f, x_cells, half_width)
    if t_max is None:
        t_max = 2 * grid.bounds[0][1]
    edges, is_log = _parameter_edges(weight, t_cells, t_min, t_max, u_max)
    mid = np.sqrt(edges[:-1] * edges[1:])
    t = np.exp(-mid) if is_log else mid
    tiny = t < 1e-12
    vals = np.empty((x.size, t.size))
    big = ~tiny
    vals[:, big] = f.difference(x[:, None], t[None, big]) / t[None, big]
    vals[:, tiny] = f.gradient(x)[:, None]
    return OperatorFamilySample(mx, edges, vals, weight, f.gradient(x))


# ----------------------------------------------------------------------------
# ball machinery on uniform grids


def dyadic_radii(field_):
    """Dyadic ladder from one cell width to the extent of the grid."""
    h = min(field_.grid.spacing)
    extent = max(hi - lo for lo, hi in field_.grid.bounds)
    k = int(np.floor(np.log2(extent / h) + 1e-12))
    return h * 2.0 ** np.arange(k + 1)


def _check_field(field_):
    if field_.grid.kind != "uniform":
        raise ValueError("maximal operators need a uniform grid")
    if field_.grid.dim not in (1, 2):
        raise ValueError("maximal operators are implemented for N = 1, 2")


def _radii(field_, radii, R=None):
    r = dyadic_radii(field_) if radii is None else np.asarray(radii, dtype=float).ravel()
    if r.size == 0:
        raise ValueError("radii must be nonempty")
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    if R is not None:
        r = r[r < R]
    return np.sort(r)


def _offset_weights(r, h):
    """Overlap lengths of ``[-r, r]`` with the cells centred at ``o * h``."""
    k = int(np.ceil(r / h - 0.5 - 1e-12))
    k = max(k, 0)
    o = np.arange(-k, k + 1)
    w = np.clip(np.minimum(o * h + h / 2, r) - np.maximum(o * h - h / 2, -r), 0.0, None)
    return k, w


def _windows_1d(values, r, h, boundary, chunk=1 << 22):
    """Yield ``(rows, neighbour values, weights, ball measure)`` for 1-D balls."""
    n = values.size
    k, w = _offset_weights(r, h)
    vp = np.pad(values, k)
    valid = np.pad(np.ones(n), k)
    width = 2 * k + 1
    step = max(1, chunk // width)
    vwin = sliding_window_view(vp, width)
    mwin = sliding_window_view(valid, width)
    for s in range(0, n, step):
        sl = slice(s, min(n, s + step))
        if boundary == "clip":
            W = w[None, :] * mwin[sl]
        else:
            W = np.broadcast_to(w, (sl.stop - sl.start, width))
        yield sl, vwin[sl], W, W.sum(axis=1)


def _stencil_2d(r, h):
    kx = int(np.floor(r / h[0] + 1e-12))
    ky = int(np.floor(r / h[1] + 1e-12))
    ox, oy = np.meshgrid(np.arange(-kx, kx + 1), np.arange(-ky, ky + 1), indexing="ij")
    inside = (ox * h[0]) ** 2 + (oy * h[1]) ** 2 <= r * r * (1 + 1e-12)
    return ox[inside], oy[inside], inside.astype(float)


def _ball_average(field_, values, r, boundary):
    """Average of ``values`` over ``B(x, r)`` for every cell ``x``."""
    h = field_.grid.spacing
    if field_.grid.dim == 1:
        (lo, hi), = field_.grid.bounds
        edges = field_.grid.edges(0)
        F = np.concatenate([[0.0], np.cumsum(values * h[0])])
        x = field_.grid.midpoints(0)
        num = np.interp(x + r, edges, F) - np.interp(x - r, edges, F)
        den = (np.minimum(x + r, hi) - np.maximum(x - r, lo)) if boundary == "clip" else 2 * r
        return num / den
    _, _, mask = _stencil_2d(r, h)
    num = fftconvolve(values, mask, mode="same")
    den = fftconvolve(np.ones_like(values), mask, mode="same") if boundary == "clip" else mask.sum()
    return num / np.maximum(den, 0.5)


def _ball_integral_2d(field_, fn, r, boundary):
    """``sum_{y in B(x, r)} fn(x, y)`` over stencil offsets (cells counted once)."""
    h = field_.grid.spacing
    ox, oy, _ = _stencil_2d(r, h)
    kx, ky = int(np.max(np.abs(ox))), int(np.max(np.abs(oy)))
    v = field_.values
    nx, ny = v.shape
    vp = np.pad(v, ((kx, kx), (ky, ky)))
    valid = np.pad(np.ones_like(v), ((kx, kx), (ky, ky)))
    acc = np.zeros_like(v)
    cnt = np.zeros_like(v)
    for i, j in zip(ox, oy):
        ys = vp[kx + i : kx + i + nx, ky + j : ky + j + ny]
        ms = valid[kx + i : kx + i + nx, ky + j : ky + j + ny]
        if boundary == "clip":
            acc += ms * fn(v, ys)
            cnt += ms
        else:
            acc += fn(v, ys)
            cnt += 1.0
    return acc, cnt


def _check_boundary(boundary):
    if boundary not in ("clip", "zero"):
        raise ValueError("boundary must be 'clip' or 'zero'")


def hl_maximal(field_, radii=None, boundary="clip"):
    """Centred Hardy--Littlewood maximal function ``sup_r avg_{B(x,r)} |f|``."""
    _check_field(field_)
    _check_boundary(boundary)
    r = _radii(field_, radii)
    a = np.abs(field_.values)
    out = np.zeros_like(a)
    for rr in r:
        out = np.maximum(out, _ball_average(field_, a, rr, boundary))
    return field_.with_values(out)


def fractional_maximal(field_, alpha, radii=None, boundary="clip"):
    """``sup_r r^alpha avg_{B(x,r)} |f|``."""
    _check_field(field_)
    _check_boundary(boundary)
    a = np.abs(field_.values)
    out = np.zeros_like(a)
    for rr in _radii(field_, radii):
        out = np.maximum(out, rr**alpha * _ball_average(field_, a, rr, boundary))
    return field_.with_values(out)


def _oscillation_integrals(field_, r, boundary):
    """``int_{B(x,r)} |f - (f)_B|`` for every cell (exact intersections in 1-D)."""
    h = field_.grid.spacing
    v = field_.values
    if field_.grid.dim == 1:
        out = np.empty_like(v)
        for sl, win, W, mass in _windows_1d(v, r, h[0], boundary):
            avg = np.sum(W * win, axis=1) / mass
            out[sl] = np.sum(W * np.abs(win - avg[:, None]), axis=1)
        return out
    avg = _ball_average(field_, v, r, boundary)
    vol = h[0] * h[1]
    acc, _ = _ball_integral_2d(field_, lambda x, y: np.abs(y - avg), r, boundary)
    return acc * vol


def _sharp_ladder(field_, s, radii, boundary):
    """Rows ``r^{-s-N} int_B |f - (f)_B|`` for each radius (shape (K,) + grid)."""
    N = field_.grid.dim
    return np.stack([rr ** (-s - N) * _oscillation_integrals(field_, rr, boundary) for rr in radii])


def sharp_maximal(field_, s=0.0, radii=None, R=None, boundary="clip"):
    """Sharp fractional maximal function ``sup_{r < R} r^{-s-N} int_{B(x,r)} |f - (f)_B|``.

    ``s = 0`` is the Fefferman--Stein sharp function (up to the factor
    ``kappa_N`` from normalizing by ``r^N`` instead of ``|B|``).  Radii
    default to the dyadic ladder; ``R`` caps them (restricted version).
    """
    _check_field(field_)
    _check_boundary(boundary)
    if not 0 <= s <= 1:
        raise ValueError("s must lie in [0, 1]")
    r = _radii(field_, radii, R)
    if r.size == 0:
        return field_.with_values(np.zeros_like(field_.values))
    return field_.with_values(np.max(_sharp_ladder(field_, s, r, boundary), axis=0))


def phi_log_maximal(field_, s, radii=None, boundary="clip"):
    """``Phi^s f(x) = sup_r avg_{y in B(x,r)} log(1 + |f(x) - f(y)| / r^s)``."""
    _check_field(field_)
    _check_boundary(boundary)
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    v = field_.values
    out = np.zeros_like(v)
    for rr in _radii(field_, radii):
        if field_.grid.dim == 1:
            h = field_.grid.spacing[0]
            cur = np.empty_like(v)
            for sl, win, W, mass in _windows_1d(v, rr, h, boundary):
                cur[sl] = np.sum(W * np.log1p(np.abs(win - v[sl, None]) / rr**s), axis=1) / mass
        else:
            acc, cnt = _ball_integral_2d(field_, lambda x, y: np.log1p(np.abs(x - y) / rr**s), rr, boundary)
            cur = acc / cnt
        out = np.maximum(out, cur)
    return field_.with_values(out)


# ----------------------------------------------------------------------------
# curated families


def _gauss_legendre01(n):
    z, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (z + 1.0), 0.5 * w


def higher_order_experiment(f, p=2.0, gamma=1.0, x_cells=2048, t_cells=1024, t_min=1e-8, t_max=None,
                            half_width=None, nodes=24, n_angles=16, lambda_grid=None, rel_tol=0.02):
    """Engine run for ``T_t f(x) = (f(x) - avg_{B(x,t)} f) / t^2``.

    As ``t -> 0``, ``T_t f -> -Delta f / (2(N + 2))``, so the large-lambda
    limit is ``(1/gamma) (2(N+2))^{-p} ||Delta f||_p^p``.  The result also
    carries ``stated_target = (1/(2(N+2) gamma)) ||Delta f||_p^p`` (the same
    expression without the power ``p`` on the Taylor coefficient), which
    coincides with the limit only when ``p = 1``.

    The ball average is computed from the difference oracle by
    Gauss--Legendre quadrature (radial and, in 2-D, angular), which avoids
    subtracting nearly equal values at small ``t``.
    """
    N = f.dim
    if N not in (1, 2):
        raise ValueError("higher_order_experiment supports N = 1, 2")
    L = float(half_width if half_width is not None else 1.5 * f.support_radius)
    xg = GridSpec.uniform(-L, L, x_cells, N)
    x = xg.points().reshape(-1, N)
    mx = xg.cell_volumes().ravel()
    edges = np.geomspace(t_min, t_max or 2 * L, t_cells + 1)
    t = np.sqrt(edges[:-1] * edges[1:])
    sig, ws = _gauss_legendre01(nodes)
    vals = np.zeros((x.shape[0], t.size))
    if N == 1:
        x1 = x[:, 0]
        for sg, wg in zip(sig, ws):
            h = t * sg
            d = f.difference(x1[:, None], h[None, :]) + f.difference(x1[:, None], -h[None, :])
            vals += 0.5 * wg * d
    else:
        th = 2 * np.pi * (np.arange(n_angles) + 0.5) / n_angles
        for sg, wg in zip(sig, ws):
            for c, s_ in zip(np.cos(th), np.sin(th)):
                h = np.stack(np.broadcast_arrays(t * sg * c, t * sg * s_), axis=-1)
                d = f.difference(x[:, None, :], h[None, :, :])
                vals += (2.0 * sg * wg / n_angles) * d
    vals = -vals / t[None, :] ** 2
    lap = f.laplacian(x[:, 0] if N == 1 else x)
    limit = -lap / (2 * (N + 2))
    fam = OperatorFamilySample(mx, edges, vals, PowerWeight(gamma), limit)
    res = family_engine(fam, p, lambda_grid, rel_tol)
    lap_p = float(np.sum(mx * np.abs(lap) ** p))
    res.meta["stated_target"] = lap_p / (2 * (N + 2) * gamma)
    res.meta["laplacian_lp_power"] = lap_p
    return res


def _one_sided_average(f, x, t, nodes=24):
    """``(1/t) int_x^{x+t} f`` for x (n,) and t (T,)."""
    if f.antiderivative is not None:
        F = f.antiderivative
        out = (F(x[:, None] + t[None, :]) - F(x)[:, None]) / t[None, :]
        small = t < 1e-6
        if np.any(small):
            # where the primitive difference would lose digits use f + f' t / 2
            out[:, small] = f.eval(x)[:, None] + 0.5 * f.gradient(x)[:, None] * t[None, small]
        return out
    sig, ws = _gauss_legendre01(nodes)
    acc = np.zeros((x.size, t.size))
    for sg, wg in zip(sig, ws):
        acc += wg * f.difference(x[:, None], (t * sg)[None, :])
    return f.eval(x)[:, None] + acc


def holder_constant(field_, p):
    """``max |f(x) - f(y)| / |x - y|^{1/p}`` over all pairs of grid points (1-D)."""
    x = field_.grid.points()
    v = field_.values
    best = 0.0
    for i in range(0, x.size, 512):
        dx = np.abs(x[i : i + 512, None] - x[None, :])
        dv = np.abs(v[i : i + 512, None] - v[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dx > 0, dv / dx ** (1.0 / p), 0.0)
        best = max(best, float(np.max(q)))
    return best


def thmph_experiment(f, p=1.0, x_cells=4096, t_cells=1024, t_min=1e-10, half_width=None,
                     lambda_grid=None, rel_tol=0.02, holder_cells=1024):
    """Engine run for the one-sided averages ``T_t f(x) = (1/t) int_x^{x+t} f`` (1-D)
    with Lebesgue measure on the t-axis and threshold ``lam t^{1/p}``.

    The large-lambda limit is ``||f||_p^p``; the result's metadata carries the
    Hoelder constant ``C_f`` of ``f`` of order ``1/p`` estimated over grid pairs.
    """
    if f.dim != 1:
        raise ValueError("thmph_experiment is one-dimensional")
    grid, x, mx = _x_grid(f, x_cells, half_width)
    L = grid.bounds[0][1]
    edges = np.geomspace(t_min, 2 * L, t_cells + 1)
    t = np.sqrt(edges[:-1] * edges[1:])
    vals = _one_sided_average(f, x, t)
    fam = OperatorFamilySample(mx, edges, vals, PowerWeight(1.0), f.eval(x))
    res = family_engine(fam, p, lambda_grid, rel_tol)
    res.meta["holder_constant"] = holder_constant(sample(f, GridSpec.uniform(-L, L, holder_cells)), p)
    return res


# ----------------------------------------------------------------------------
# Campanato-type characterizations


def _as_field(f, x_cells, half_width):
    if isinstance(f, SampledField):
        return f
    L = float(half_width if half_width is not None else 1.5 * f.support_radius)
    return sample(f, GridSpec.uniform(-L, L, x_cells, f.dim))


def campanato_identity(f, s, p, radii=None, gamma=1.0, lambda_grid=None, x_cells=2048, half_width=None,
                       boundary="clip", rel_tol=0.02):
    """Both sides of the restricted sharp-maximal identity.

    ``lhs = (1/gamma) ||f_s^#||_p^p`` and the curve
    ``lam^p (m x R^{gamma-1} dR){(x, R): f^#_{s,1/R}(x) > lam R^{gamma/p}}``,
    where ``f^#_{s,rho}`` is the sharp maximal function restricted to radii
    below ``rho``.  Since ``R -> f^#_{s,1/R}`` is nonincreasing, the curve's
    supremum and its large-lambda limit both equal ``lhs``.

    On the radius ladder ``r_0 < ... < r_K`` the restricted function is the
    running maximum ``M_k`` of the ladder rows for ``R in [1/r_{k+1}, 1/r_k)``
    and ``M_K`` for ``R < 1/r_K``; these R-intervals are integrated exactly.

    Returns a dict with ``lhs``, ``rhs_sup``, ``rhs_lim`` (a LimitEstimate),
    ``curve`` and ``max_pairwise_rel_diff``.
    """
    field_ = _as_field(f, x_cells, half_width)
    _check_field(field_)
    r = _radii(field_, radii)
    rows = _sharp_ladder(field_, s, r, boundary).reshape(r.size, -1)
    M = np.maximum.accumulate(rows, axis=0)
    m = field_.cell_volume.ravel()
    lhs = float(np.sum(m * M[-1] ** p)) / gamma
    a = np.concatenate([[0.0], 1.0 / r[::-1][:-1]])  # R-intervals, ascending in R
    b = 1.0 / r[::-1]
    amp = M[::-1]  # amplitude on [a_j, b_j): M_K first
    top = float(np.max(M[-1])) if M.size else 0.0
    if lambda_grid is None:
        lam_hi = max(top, 1e-300) * (10.0 / r[0]) ** (gamma / p) * 10
        lam = np.geomspace(lam_hi * 1e-8, lam_hi, 161)
    else:
        lam = np.sort(np.asarray(lambda_grid, dtype=float).ravel())
    vals = np.zeros(lam.size)
    for j in range(r.size):
        vals += power_cell_superlevel(amp[j], a[j], b[j], m, -gamma / p, gamma, lam, p)
    curve = SuperlevelCurve(lam, vals, None, None, [], {"s": s, "p": p, "gamma": gamma})
    lim = extract_limit(curve, "large_param", rel_tol)
    rhs_sup = float(np.max(vals))
    trio = np.array([lhs, rhs_sup, lim.value])
    scale = max(float(np.max(np.abs(trio))), 1e-300)
    diff = float(np.max(trio) - np.min(trio)) / scale if lhs > 0 else float(np.max(np.abs(trio)))
    return {"lhs": lhs, "rhs_sup": rhs_sup, "rhs_lim": lim, "curve": curve, "max_pairwise_rel_diff": diff}


def campanato_ratio(field_, sharp_values, s, max_pairs=4_000_000, seed=0):
    """``sup |f(x) - f(y)| / (|x - y|^s (f^#(x) + f^#(y)))`` over grid pairs.

    All pairs are used when there are at most ``max_pairs``; otherwise a
    seeded uniform subsample.  Pairs with a vanishing denominator are skipped.
    Returns ``(sup, mean, pairs_used)``.
    """
    pts = field_.grid.points().reshape(-1, field_.grid.dim)
    v = field_.values.ravel()
    sh = np.asarray(sharp_values).ravel()
    n = v.size
    if n * (n - 1) // 2 <= max_pairs:
        i, j = np.triu_indices(n, 1)
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, max_pairs)
        j = rng.integers(0, n, max_pairs)
        keep = i != j
        i, j = i[keep], j[keep]
    d = np.linalg.norm(pts[i] - pts[j], axis=-1)
    den = d**s * (sh[i] + sh[j])
    ok = den > 0
    q = np.abs(v[i] - v[j])[ok] / den[ok]
    if q.size == 0:
        return 0.0, 0.0, 0
    return float(np.max(q)), float(np.mean(q)), int(q.size)


def campanato_bsy_embedding(f, s, p, x_cells=1024, pair_grid=None, lambda_grid=None, boundary="clip"):
    """Weak-type quotient norm versus the Campanato norm.

    Returns a dict with ``bsy_value`` (the weak-L^p quasinorm of
    ``(f(x) - f(y)) / |x - y|^{N/p + s}`` on ``R^N x R^N``), ``cc_value``
    (``||f_s^#||_p``) and the Campanato pointwise ratio statistics.
    """
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    N = f.dim
    grid = pair_grid or PairGrid(x_cells=2048, t_cells=1024)
    lam = np.geomspace(1e-3, 1e4, 281) if lambda_grid is None else np.sort(np.asarray(lambda_grid, float))
    vals, _ = _power_pair_curve(f, grid, False, N / p + s, float(N), lam, p)
    bsy = float(np.max(vals)) ** (1.0 / p)
    field_ = _as_field(f, x_cells, None)
    sharp = sharp_maximal(field_, s, boundary=boundary)
    cc = float(np.sum(field_.cell_volume * sharp.values**p)) ** (1.0 / p)
    sup_q, mean_q, used = campanato_ratio(field_, sharp.values, s)
    return {"bsy_value": bsy, "cc_value": cc, "ratio_sup": sup_q, "ratio_mean": mean_q, "pairs": used,
            "bsy_to_cc": bsy / cc if cc > 0 else 0.0}


def sharp_vs_hl_factor(field_, radii=None):
    """Constant ``c`` with ``sharp_maximal(f, 0) <= c * hl_maximal(f)`` on the
    same radii.

    ``int_B |f - (f)_B| <= 2 |B| avg_B |f|``, so ``c = 2 max_r |B_r| / r^N``
    with ``|B_r|`` the discrete ball measure: exactly ``2 kappa_1 = 4`` in 1-D
    and, in 2-D, the midpoint-inclusion count times the cell area (which
    exceeds ``pi r^2`` for radii of a few cells).
    """
    _check_field(field_)
    r = _radii(field_, radii)
    if field_.grid.dim == 1:
        return 2.0 * ball_volume(1)
    h = field_.grid.spacing
    return 2.0 * max(_stencil_2d(rr, h)[2].sum() * h[0] * h[1] / rr**2 for rr in r)
