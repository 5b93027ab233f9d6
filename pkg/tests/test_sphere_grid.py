import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isofield.errors import DomainError
from isofield.field_model import (
    AngularPowerSpectrum,
    CoefficientLaw,
    HarmonicCoefficients,
    field_energy,
    sample_coefficient_batch,
    sample_coefficients,
)
from isofield.repr_core import coeff_index, conj_compatible_phi
from isofield.sphere_grid import (
    FieldValues,
    analyze,
    build_grid,
    covariance_kernel,
    gauss_legendre_nodes,
    parseval_energy,
    synthesize,
    synthesize_at,
)


def random_coeffs(lmax, seed, law="ComplexGaussian"):
    return sample_coefficients(AngularPowerSpectrum.power_law(lmax, slope=1.0), CoefficientLaw(law), lmax,
                               seed, include_monopole=True)


def test_gauss_legendre_weights():
    x, w = gauss_legendre_nodes(6)
    assert w.sum() == pytest.approx(2.0)
    assert np.sum(w * x ** 10) == pytest.approx(2 / 11)
    with pytest.raises(DomainError):
        gauss_legendre_nodes(0)


def test_grid_layout():
    g = build_grid(4)
    assert (g.n_theta, g.n_phi, g.size) == (5, 9, 45)
    assert g.weights.sum() == pytest.approx(1.0)
    assert np.all(np.diff(g.theta) > 0)  # north to south
    with pytest.raises(DomainError):
        build_grid(-1)


@pytest.mark.parametrize("lmax", [0, 1, 4, 9, 16])
@pytest.mark.parametrize("method", ["dense", "separable"])
def test_roundtrip_and_parseval(lmax, method):
    c = random_coeffs(lmax, seed=lmax)
    vals = synthesize(c, build_grid(lmax), method=method)
    assert vals.is_real
    back = analyze(vals, lmax, method=method)
    assert np.abs(back.data - c.data).max() < 1e-10
    assert abs(field_energy(vals) - parseval_energy(c)) < 1e-10 * max(1.0, parseval_energy(c))


def test_separable_matches_dense():
    c = random_coeffs(12, seed=1)
    g = build_grid(12)
    np.testing.assert_allclose(synthesize(c, g, "separable").values, synthesize(c, g, "dense").values,
                               atol=1e-12)


def test_complex_coefficients_give_complex_field():
    c = HarmonicCoefficients.zeros(2)
    c[2, 1] = 1.0
    vals = synthesize(c, build_grid(2))
    assert not vals.is_real
    nd = build_grid(2).nodes
    np.testing.assert_allclose(vals.values, conj_compatible_phi(2, 1, nd[:, 0], nd[:, 1]), atol=1e-14)
    back = analyze(vals, 2)
    np.testing.assert_allclose(back.data, c.data, atol=1e-13)


def test_unknown_method_and_bandlimit():
    c = random_coeffs(2, 0)
    with pytest.raises(DomainError):
        synthesize(c, build_grid(2), method="fft")
    with pytest.raises(DomainError):
        analyze(synthesize(c, build_grid(2)), 3)


def test_field_values_shape_check():
    with pytest.raises(DomainError):
        FieldValues(build_grid(2), np.zeros(4))


def test_csv_output():
    vals = synthesize(random_coeffs(2, 0), build_grid(2))
    text = vals.to_csv({"seed": 0})
    lines = text.splitlines()
    assert lines[0] == "# seed=0"
    assert lines[1] == "colatitude,longitude,weight,value"
    assert len(lines) == 2 + vals.grid.size


def test_synthesize_at_matches_grid():
    c = random_coeffs(5, 2)
    g = build_grid(5)
    nd = g.nodes
    np.testing.assert_allclose(synthesize_at(c.data[None, :], 5, nd[:, 0], nd[:, 1])[0],
                               synthesize(c, g).values, atol=1e-13)


@given(st.floats(-1, 1))
def test_covariance_kernel_closed_form(c):
    spec = AngularPowerSpectrum((0.0, 1.0, 2.0))
    expected = 3 * c + 2 * 5 * 0.5 * (3 * c * c - 1)
    assert covariance_kernel(spec, c) == pytest.approx(expected, abs=1e-12)


def test_covariance_kernel_matches_sampled_field():
    spec = AngularPowerSpectrum((0.0, 1.0, 0.5))
    batch = sample_coefficient_batch(spec, CoefficientLaw("FixedModulusPhase"), 2, 40_000, seed=5)
    th = np.array([0.3, 1.4])
    ph = np.array([0.2, 2.5])
    T = synthesize_at(batch, 2, th, ph)
    emp = np.mean(T[:, 0] * T[:, 1])
    v = [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]
    cosang = sum(a[0] * a[1] for a in v)
    sd = np.sqrt(np.mean((T[:, 0] * T[:, 1] - emp) ** 2) / T.shape[0])
    assert abs(emp - covariance_kernel(spec, cosang)) < 5 * sd
    assert np.mean(T[:, 0] ** 2) == pytest.approx(spec.total_variance(), rel=0.05)


def test_covariance_kernel_domain():
    with pytest.raises(DomainError):
        covariance_kernel(AngularPowerSpectrum((1.0,)), 1.5)


def test_zonal_coefficient_lands_in_right_slot():
    c = HarmonicCoefficients.zeros(3)
    c[3, 0] = 2.0
    assert c.data[coeff_index(3, 0)] == 2.0
    vals = synthesize(c, build_grid(3))
    np.testing.assert_allclose(analyze(vals, 3).data, c.data, atol=1e-13)
