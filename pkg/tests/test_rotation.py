import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isofield import rng
from isofield.errors import DomainError
from isofield.field_model import (
    AngularPowerSpectrum,
    CoefficientLaw,
    evaluate_torus,
    sample_coefficients,
    sample_torus_coefficients,
)
from isofield.repr_core import EulerRotation, haar_rotation
from isofield.rotation import (
    SpherePoint,
    block_norms,
    extract,
    rotate_coeff_batch,
    rotate_coeffs,
    rotate_point,
    rotate_points,
    rotate_torus_coeffs,
)
from isofield.sphere_grid import synthesize_at

angles = st.tuples(st.floats(0, 2 * np.pi - 1e-9), st.floats(0, np.pi), st.floats(0, 2 * np.pi - 1e-9))


def coeffs(lmax, seed, law="ComplexGaussian"):
    return sample_coefficients(AngularPowerSpectrum.power_law(lmax, slope=1.0), CoefficientLaw(law), lmax, seed)


def field_at(c, p):
    return synthesize_at(c.data[None, :], c.lmax, [p.colatitude], [p.longitude])[0, 0]


def test_rotated_field_equals_field_at_rotated_point():
    for i in range(10):
        gen = rng.stream(99, i)
        g = haar_rotation(gen)
        c = coeffs(8, seed=i, law="FixedModulusPhase")
        x = SpherePoint(float(np.arccos(gen.uniform(-1, 1))), float(gen.uniform(0, 2 * np.pi)))
        assert abs(field_at(rotate_coeffs(c, g), x) - field_at(c, rotate_point(g, x))) < 1e-10


@given(angles, angles)
def test_composition_law(a1, a2):
    g1, g2 = EulerRotation(*a1), EulerRotation(*a2)
    c = coeffs(4, seed=1)
    lhs = rotate_coeffs(rotate_coeffs(c, g1), g2)
    rhs = rotate_coeffs(c, g2.compose(g1))
    assert np.abs(lhs.data - rhs.data).max() < 1e-10


def test_identity_rotation():
    c = coeffs(6, seed=2)
    np.testing.assert_allclose(rotate_coeffs(c, EulerRotation.identity()).data, c.data, atol=1e-14)


def test_rotation_preserves_block_norms_and_reality():
    c = coeffs(7, seed=3)
    r = rotate_coeffs(c, EulerRotation(1.0, 2.0, 3.0))
    np.testing.assert_allclose(block_norms(r), block_norms(c), rtol=1e-12)
    assert r.is_real_field()


def test_z_rotation_is_a_phase():
    c = coeffs(3, seed=4)
    a = 0.7
    r = rotate_coeff_batch(c.data[None, :], 3, EulerRotation(a, 0.0, 0.0))
    # field at (theta, phi - a): phi_lm picks up exp(-i m a)
    assert extract(r, 3, 2)[0] == pytest.approx(np.exp(-2j * a) * c[3, 2])


def test_rotate_point_inverse():
    g = EulerRotation(0.3, 1.1, 4.0)
    p = SpherePoint(0.9, 2.2)
    back = rotate_point(g.inverse(), rotate_point(g, p))
    np.testing.assert_allclose(back.unit_vector(), p.unit_vector(), atol=1e-14)


def test_rotate_points_vectorized_matches_scalar():
    g = EulerRotation(2.0, 0.4, 5.0)
    th, ph = np.array([0.0, 0.5, np.pi]), np.array([0.0, 4.0, 0.0])
    t, p = rotate_points(g, th, ph)
    for i in range(3):
        q = rotate_point(g, SpherePoint(th[i], ph[i]))
        np.testing.assert_allclose(SpherePoint(t[i], p[i]).unit_vector(), q.unit_vector(), atol=1e-14)


def test_sphere_point_poles_and_range():
    assert SpherePoint.from_vector([0, 0, 1]) == SpherePoint(0.0, 0.0)
    assert SpherePoint.from_vector([0, 0, -2]).longitude == 0.0
    with pytest.raises(DomainError):
        SpherePoint(4.0, 0.0)
    with pytest.raises(DomainError):
        SpherePoint(1.0, 2 * np.pi)


def test_torus_shift():
    spec = AngularPowerSpectrum((0.0, 1.0, 1.0))
    c = sample_torus_coefficients(spec, CoefficientLaw("UniformDisk"), 2, seed=5)
    th, shift = np.linspace(0, 6, 11), 1.3
    np.testing.assert_allclose(evaluate_torus(rotate_torus_coeffs(c, shift), th),
                               evaluate_torus(c, th - shift), atol=1e-13)
