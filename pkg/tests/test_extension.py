import numpy as np
import pytest
from scipy import integrate
from scipy.special import gamma

from ineqforge.corpus import GridSpec, builtin, sample
from ineqforge.extension import (CsKernel, PaddedSpectrum, calibrate_mu, cs_extend, cs_symbol, heat_experiment,
                                 heat_extend, mu_closed_form, spectral_frac_laplacian, verify_cs_bsy)

from conftest import SQRT_PI_2


def _g(cells=1024, L=6.0, dim=1, name="gaussian"):
    return sample(builtin(name, dim), GridSpec.uniform(-L, L, cells, dim))


@pytest.mark.parametrize("N", [1, 2])
@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_kernel_unit_mass(N, s):
    k = CsKernel(N, s)
    assert k.mass(1.0) == pytest.approx(1.0, abs=1e-8)
    assert k.mass(0.01) == pytest.approx(1.0, abs=1e-8)


def test_kernel_half_is_cauchy():
    k = CsKernel(1, 0.5)
    x = np.linspace(-3, 3, 7)
    assert k(x, 0.7) == pytest.approx(0.7 / (np.pi * (x * x + 0.49)), rel=1e-10)
    w = k.cell_weights(0.1, 0.3, 50)
    assert w.sum() == pytest.approx(k.cdf(4.95 / 0.3) - k.cdf(-4.95 / 0.3), rel=1e-12)


def test_kernel_rejects_bad_parameters():
    with pytest.raises(ValueError):
        CsKernel(1, 1.0)
    with pytest.raises(ValueError):
        CsKernel(0, 0.5)


def test_symbol_semigroup_and_small_argument():
    z = np.linspace(0, 5, 101)
    th = cs_symbol(z, 0.5) + 1.0
    assert th == pytest.approx(np.exp(-z), rel=1e-12, abs=1e-15)
    a, b = 0.3, 1.1
    assert (cs_symbol(a * z, 0.5) + 1) * (cs_symbol(b * z, 0.5) + 1) == pytest.approx(
        cs_symbol((a + b) * z, 0.5) + 1, rel=1e-12, abs=1e-15)
    for s in (0.25, 0.75):
        zz = np.array([1e-6, 1e-4])
        # theta_s(z) - 1 = -Gamma(1-s)/Gamma(1+s) (z/2)^{2s} + (z/2)^2/(1-s) + O(z^{2+2s})
        lead = -gamma(1 - s) / gamma(1 + s) * (zz / 2) ** (2 * s) + (zz / 2) ** 2 / (1 - s)
        assert cs_symbol(zz, s) == pytest.approx(lead, rel=1e-6)
        # continuity across the switch between series and Bessel forms
        assert cs_symbol(np.array([1 - 1e-9]), s)[0] == pytest.approx(cs_symbol(np.array([1 + 1e-9]), s)[0], rel=1e-7)


def _poisson_oracle(x, t):
    """u(x, t) for f = exp(-x^2), s = 1/2: (1/pi) int_0^inf e^{-tk} sqrt(pi) e^{-k^2/4} cos(kx) dk."""
    return np.array([integrate.quad(lambda k: np.exp(-t * k - k * k / 4) * np.cos(k * xi), 0, np.inf,
                                    epsabs=1e-14, limit=200)[0] / np.sqrt(np.pi) for xi in x])


@pytest.mark.parametrize("method,pad", [("quadrature", 8), ("spectral", 64)])
def test_extension_matches_fourier_oracle(method, pad):
    # the periodic embedding of the spectral route folds the Cauchy tails of the
    # images back in (offset ~ pi^{3/2} t / (3 P^2) for period P); padding 64x
    # puts that below the tolerance
    fld = _g(4096, 8.0)
    t = np.array([0.05, 0.2, 0.8])
    fam = cs_extend(fld, 0.5, t, method=method, pad_factor=pad)
    idx = np.arange(1024, 3072, 97)
    x = fld.grid.midpoints()[idx]
    for j, tj in enumerate(t):
        assert np.max(np.abs(fam.values[idx, j] - _poisson_oracle(x, tj))) < 1e-5


def test_extension_is_an_approximate_identity():
    fld = _g(2048, 6.0)
    fam = cs_extend(fld, 0.5, np.array([1e-6, 1e-4, 1e-2]))
    err = np.max(np.abs(fam.values - fld.values[:, None]), axis=0)
    assert err[0] < err[1] < err[2] and err[0] < 1e-5
    assert np.all(fam.values >= -1e-12)
    assert np.max(fam.values) <= np.max(fld.values) + 1e-12


@pytest.mark.parametrize("s", [0.5, 0.75])
def test_quadrature_and_spectral_routes_agree(s):
    fld = _g(2048, 6.0)
    t = np.array([0.02, 0.1])
    a = cs_extend(fld, s, t, "quadrature").values
    b = cs_extend(fld, s, t, "spectral", pad_factor=64).values
    assert np.max(np.abs(a - b)[700:1350]) < 1e-4


@pytest.mark.parametrize("dim", [1, 2])
def test_spectral_s1_is_minus_laplacian(dim):
    f = builtin("gaussian", dim)
    fld = _g(1024 if dim == 1 else 128, 6.0, dim)
    got = spectral_frac_laplacian(fld, 1.0).values
    assert np.max(np.abs(got + f.laplacian(fld.grid.points()))) < 1e-6


def test_spectral_s0_is_identity():
    fld = _g()
    assert spectral_frac_laplacian(fld, 0.0).values == pytest.approx(fld.values, abs=1e-12)


def test_spectral_parseval_and_self_adjointness():
    f, g = _g(), _g(name="modulated_gaussian")
    h = f.grid.spacing[0]
    n = PaddedSpectrum(f).shape[0]
    F = np.fft.fft(f.values, n)
    k = 2 * np.pi * np.fft.fftfreq(n, d=h)
    for s in (0.3, 0.7):
        Lf = spectral_frac_laplacian(f, s).values
        Lg = spectral_frac_laplacian(g, s).values
        assert np.dot(Lf, g.values) * h == pytest.approx(np.dot(f.values, Lg) * h, rel=1e-9)
        # <(-Delta)^s f, f> from the full complex spectrum on the same period
        energy = h / n * np.sum(np.abs(k) ** (2 * s) * np.abs(F) ** 2)
        assert np.dot(Lf, f.values) * h == pytest.approx(energy, rel=1e-9)


def test_padding_guards():
    fld = _g()
    with pytest.raises(ValueError):
        PaddedSpectrum(fld.with_values(np.ones(fld.values.shape)))
    with pytest.raises(ValueError):
        PaddedSpectrum(fld, pad_factor=2)
    rough = fld.with_values(np.where(np.abs(fld.grid.midpoints()) < 1, 1.0, 0.0))
    with pytest.raises(ValueError, match="under-resolved"):
        PaddedSpectrum(rough)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_calibration_matches_closed_form_and_scale(s):
    g = builtin("gaussian", 1)
    a = calibrate_mu(s, 1, [g, g.dilated(1.5)])
    b = calibrate_mu(s, 1, [g.dilated(2.0)])
    assert a.fit_quality > 0.999
    assert a.mu_s == pytest.approx(mu_closed_form(s), rel=2e-3)
    assert b.mu_s == pytest.approx(a.mu_s, rel=1e-3)


def test_calibration_rejects_empty_or_poor_family():
    with pytest.raises(ValueError):
        calibrate_mu(0.5, 1, [])
    with pytest.raises(ValueError):
        calibrate_mu(0.5, 1, [builtin("gaussian", 1)], t_grid=[5.0], min_quality=0.9999)


def test_verify_cs_bsy_gaussian_and_scaling():
    g = builtin("gaussian", 1)
    r = verify_cs_bsy(g, 0.5, 2.0, mu=mu_closed_form(0.5), x_cells=2048, t_cells=256)
    assert r["holds"]
    assert r["plateau_rel_error"] < 0.02
    r3 = verify_cs_bsy(g.scaled(3.0), 0.5, 2.0, mu=mu_closed_form(0.5), x_cells=2048, t_cells=256)
    assert r3["lhs"] == pytest.approx(3 * r["lhs"], rel=1e-10)
    assert r3["rhs"] == pytest.approx(3 * r["rhs"], rel=5e-3)
    z = verify_cs_bsy(g.scaled(0.0), 0.5, 2.0, mu=1.0, x_cells=256, t_cells=32)
    assert z["lhs"] == 0 and z["rhs"] == 0


def test_verify_cs_bsy_rejects_bad_inputs():
    g = builtin("gaussian", 1)
    with pytest.raises(ValueError):
        verify_cs_bsy(g, 0.5, 1.0, mu=1.0)
    with pytest.raises(ValueError):
        verify_cs_bsy(g, 0.5, 2.0, mu=-1.0)


def test_heat_extension_and_engine():
    fld = _g(1024, 6.0)
    vals = heat_extend(fld, np.array([0.25]))
    # exp(-x^2) under the heat flow at t: (1 + 4t)^{-1/2} exp(-x^2 / (1 + 4t))
    x = fld.grid.midpoints()
    assert np.max(np.abs(vals[:, 0] - np.exp(-x * x / 2) / np.sqrt(2))) < 1e-10
    r = heat_experiment(builtin("gaussian", 1), 2.0, x_cells=2048, t_cells=256)
    assert r.meta["residual_smallest_t"] < 1e-8
    assert r.holds
    assert r.limit_estimate.value == pytest.approx(SQRT_PI_2, rel=0.02)
    z = heat_experiment(builtin("gaussian", 1).scaled(0.0), 2.0, x_cells=256, t_cells=32)
    assert np.all(z.curve.values == 0)
