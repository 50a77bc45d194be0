import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperdiscovery.errors import FeatureDomainError, SchemaError
from hyperdiscovery.features import (
    FeatureLibrary,
    Log,
    MaterialModel,
    MooneyRivlin,
    Volumetric,
    energy_dual,
    evaluate_features,
    feature_derivatives,
    parse_feature,
    strain_energy,
    stress,
)
from oracles import mp_central_differences, mp_features, random_deformation_gradients


def test_library_size_and_order():
    lib = FeatureLibrary.default()
    assert len(lib) == 43
    assert len(FeatureLibrary.default(include_log=False)) == 42
    assert lib.names[:5] == ["MR(i=0,j=1)", "MR(i=1,j=1)", "MR(i=0,j=2)", "MR(i=1,j=2)", "MR(i=2,j=2)"]
    assert lib.names[35:37] == ["VOL(k=1)", "VOL(k=2)"]
    assert lib.names[-1] == "LOG" and lib.has_log


def test_labels():
    assert MooneyRivlin(1, 1).label == "(I1b-3)"
    assert MooneyRivlin(0, 1).label == "(I2b-3)"
    assert MooneyRivlin(2, 5).label == "(I1b-3)^2(I2b-3)^3"
    assert Volumetric(3).label == "(J-1)^6"
    assert Log().label == "log(I2b/3)"


@given(st.sampled_from(FeatureLibrary.default().features))
def test_parse_round_trip(f):
    assert parse_feature(f.name) == f


@pytest.mark.parametrize("bad", ["MR(i=3,j=2)", "VOL(k=0)", "FOO"])
def test_parse_rejects(bad):
    with pytest.raises(SchemaError):
        parse_feature(bad)


def test_features_vanish_at_identity():
    Q = evaluate_features(np.eye(2), FeatureLibrary.default())
    np.testing.assert_allclose(Q, 0.0, atol=1e-15)


def test_values_match_high_precision(rng):
    lib = FeatureLibrary.default()
    F = random_deformation_gradients(rng, 10)
    Q = evaluate_features(F, lib)
    for k, f in enumerate(F):
        ref = np.array([float(v) for v in mp_features([float(x) for x in f.ravel()], lib)])
        np.testing.assert_allclose(Q[k], ref, rtol=1e-10, atol=1e-14)


def test_derivatives_match_differences(rng):
    lib = FeatureLibrary.default()
    F = random_deformation_gradients(rng, 20)
    D = feature_derivatives(F, lib)
    for k, f in enumerate(F):
        np.testing.assert_allclose(D[k], mp_central_differences(f, lib), rtol=1e-8, atol=1e-14)


def test_hessian_matches_gradient_differences(rng):
    lib = FeatureLibrary.default()
    theta = rng.uniform(0, 1, len(lib))
    F = random_deformation_gradients(rng, 5)
    W = energy_dual(F, lib, theta, second_order=True)
    h = 1e-6
    for c in range(4):
        dF = np.zeros(4)
        dF[c] = h
        dF = dF.reshape(2, 2)
        fd = (energy_dual(F + dF, lib, theta).grad - energy_dual(F - dF, lib, theta).grad) / (2 * h)
        np.testing.assert_allclose(W.hess[..., c], fd, rtol=1e-5, atol=1e-6)


def test_log_domain_error():
    lib = FeatureLibrary((Log(),))
    with pytest.raises(FeatureDomainError):
        lib.evaluate_terms(type("Inv", (), {"J": 1.0, "I1b": 3.0, "I2b": np.array(-1.0)})())


def test_neo_hookean_stress_in_shear():
    model = MaterialModel.from_terms(FeatureLibrary.default(), {"MR(i=1,j=1)": 0.5, "VOL(k=1)": 1.5})
    g = 0.3
    F = np.array([[1.0, g], [0.0, 1.0]])
    # J = 1: P = mu * d(I1b)/dF with mu = 1, i.e. dev part of F; P12 = g exactly
    assert stress(model, F)[0, 1] == pytest.approx(g, rel=1e-12)
    assert strain_energy(model, F) == pytest.approx(0.5 * g * g, rel=1e-12)


@settings(max_examples=30)
@given(st.lists(st.floats(-2, 2), min_size=43, max_size=43))
def test_energy_is_linear_in_theta(theta):
    lib = FeatureLibrary.default()
    F = np.array([[1.1, 0.2], [-0.1, 0.9]])
    model = MaterialModel(lib, theta)
    Q = evaluate_features(F, lib)
    assert strain_energy(model, F) == pytest.approx(Q @ np.array(theta), rel=1e-12, abs=1e-14)


def test_model_terms_round_trip():
    lib = FeatureLibrary.default()
    m = MaterialModel.from_terms(lib, {"LOG": 1.0, "VOL(k=1)": 1.5})
    assert m.terms() == {"VOL(k=1)": 1.5, "LOG": 1.0}
    assert [f.name for f in m.active_features] == ["VOL(k=1)", "LOG"]
    with pytest.raises(ValueError):
        MaterialModel(lib, np.zeros(3))
