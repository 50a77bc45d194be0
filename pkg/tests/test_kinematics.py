import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperdiscovery.errors import InvertedElementError
from hyperdiscovery.kinematics import PATHS, deformation_path, invariants, jacobian, path_derivative

gammas = st.floats(1e-3, 10.0)


@given(gammas)
def test_simple_shear_invariants(g):
    inv = invariants(deformation_path("SS", g))
    assert inv.J == pytest.approx(1.0)
    assert inv.I1b == pytest.approx(3.0 + g * g, rel=1e-12)
    assert inv.I2b == pytest.approx(3.0 + g * g, rel=1e-12)


@given(gammas)
def test_path_jacobians(g):
    s = 1.0 + g
    expected = {"UT": s, "UC": 1 / s, "SS": 1.0, "BT": s * s, "BC": 1 / (s * s), "PS": 1.0}
    for kind in PATHS:
        assert jacobian(deformation_path(kind, g)) == pytest.approx(expected[kind], rel=1e-12)


@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-1.0, 1.0))
def test_invariants_match_eigenvalues(a, b, shear):
    F = np.array([[a, shear], [0.0, b]])
    C = np.eye(3)
    C[:2, :2] = F.T @ F
    lam = np.linalg.eigvalsh(C)
    inv = invariants(F)
    assert inv.I1 == pytest.approx(lam.sum(), rel=1e-12)
    assert inv.I2 == pytest.approx(lam[0] * lam[1] + lam[1] * lam[2] + lam[0] * lam[2], rel=1e-10)
    assert inv.I3 == pytest.approx(np.prod(lam), rel=1e-10)


def test_inverted_gradient_rejected():
    with pytest.raises(InvertedElementError):
        invariants(np.array([[1.0, 0.0], [0.0, -0.5]]))


def test_extreme_compression_keeps_I2_positive():
    inv = invariants(deformation_path("BC", 1e9))
    assert inv.I2 > 0 and inv.I2b > 0


@pytest.mark.parametrize("kind", PATHS)
def test_path_derivative_matches_differences(kind):
    g = np.linspace(0.05, 2.0, 9)
    h = 1e-6
    fd = (deformation_path(kind, g + h) - deformation_path(kind, g - h)) / (2 * h)
    np.testing.assert_allclose(path_derivative(kind, g), fd, atol=1e-8)


def test_identity_at_zero_and_unknown_path():
    for kind in PATHS:
        np.testing.assert_allclose(deformation_path(kind, 0.0), np.eye(2))
    with pytest.raises(ValueError):
        deformation_path("XX", 0.1)
