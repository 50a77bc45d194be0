import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperdiscovery.assembly import EquilibriumSystem
from hyperdiscovery.errors import AllStartsFailed, DiscoveryFailed, EmptyModel, NonConverged
from hyperdiscovery.features import FeatureLibrary, MaterialModel
from hyperdiscovery.solver import (
    SolverConfig,
    admissibility_check,
    discover,
    fixed_point_solve,
    gamma_samples,
    initial_guess,
    multi_start,
    objective,
    threshold_loop,
)


def make_system(A, b, theta_ref=None):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lib = FeatureLibrary.default().subset(range(len(b)))
    x = np.linalg.lstsq(A, b, rcond=None)[0] if theta_ref is None else theta_ref
    return EquilibriumSystem(A, b, float(x @ A @ x), 100.0, lib)


@settings(max_examples=40)
@given(st.floats(0.3, 3.0), st.floats(0.0, 0.09), st.floats(0.01, 0.5))
def test_l1_fixed_point_is_soft_threshold(big, small, lam):
    # with A = I and p = 1 the stationarity condition is theta + lam/2 sign(theta) = b
    b = np.array([big + lam, small * lam])
    theta, _ = fixed_point_solve(np.eye(2), b, lam, 1.0, np.ones(2), eps_tol=1e-9, eps_conv=1e-12, max_iter=10_000)
    assert theta[0] == pytest.approx(big + lam / 2, rel=1e-8)
    assert theta[1] == 0.0


def test_zero_penalty_is_least_squares(rng):
    X = rng.normal(size=(20, 4))
    A, b = X.T @ X, X.T @ rng.normal(size=20)
    theta, _ = fixed_point_solve(A, b, 0.0, 0.25, np.ones(4), eps_conv=1e-12)
    np.testing.assert_allclose(theta, np.linalg.solve(A, b), rtol=1e-10)


def test_non_convergence_raises(rng):
    X = rng.normal(size=(20, 4))
    with pytest.raises(NonConverged):
        fixed_point_solve(X.T @ X, X.T @ rng.normal(size=20), 0.1, 0.25, np.ones(4), eps_conv=1e-300, max_iter=2)


def test_initial_guess_stream():
    a = initial_guess(0, 3, 43)
    np.testing.assert_array_equal(a, initial_guess(0, 3, 43))
    assert not np.array_equal(a, initial_guess(0, 4, 43))
    assert not np.array_equal(a, initial_guess(1, 3, 43))
    assert np.all((a > 0) & (a <= 1))


def test_multi_start_keeps_best(rng):
    X = rng.normal(size=(40, 6))
    theta_true = np.array([1.0, 0, 0, -0.5, 0, 0])
    sys = make_system(X.T @ X, X.T @ (X @ theta_true), theta_true)
    cfg = SolverConfig(n_starts=10)
    best, starts = multi_start(sys, 0.01, cfg, return_starts=True)
    ok = [s for s in starts if s.converged]
    assert objective(sys, best, 0.01, cfg.p) == pytest.approx(min(s.objective for s in ok))
    with pytest.raises(AllStartsFailed):
        multi_start(sys, 0.01, SolverConfig(n_starts=3, max_fp_iters=1, eps_conv=1e-300))


def test_threshold_loop_refits_until_stable():
    A = np.eye(3)
    sys = make_system(A, [1.0, 0.005, 0.02])
    model, passes = threshold_loop(sys, np.array([1.0, 0.005, 0.02]), 0.01, return_passes=True)
    np.testing.assert_allclose(model.theta, [1.0, 0.0, 0.02])
    assert passes == 1
    with pytest.raises(EmptyModel):
        threshold_loop(sys, np.array([0.001, 0.0, 0.0]), 0.01)


def test_objective_counts_only_nonzero_terms():
    sys = make_system(np.eye(2), [1.0, 0.0])
    assert objective(sys, [1.0, 0.0], 0.5, 0.25) == pytest.approx(0.5)


def test_admissibility_examples():
    lib = FeatureLibrary.default()
    good = MaterialModel.from_terms(lib, {"MR(i=1,j=1)": 0.5, "VOL(k=1)": 1.5})
    assert admissibility_check(good)
    neg = MaterialModel.from_terms(lib, {"MR(i=1,j=1)": -0.5, "VOL(k=1)": 1.5})
    verdict = admissibility_check(neg)
    assert not verdict and "along" in verdict.reason
    assert not admissibility_check(MaterialModel(lib))
    # non-monotone: a softening quadratic in I1b overtakes the linear term
    soft = MaterialModel.from_terms(lib, {"MR(i=1,j=1)": 0.5, "MR(i=2,j=2)": -0.01, "VOL(k=1)": 1.5})
    assert not admissibility_check(soft)
    # negative W at an observed state only
    F = np.array([[[1.0, 0.5], [0.0, 1.0]]])
    assert not admissibility_check(neg, quadrature_F=F)


def test_gamma_samples_are_logspaced():
    g = gamma_samples(SolverConfig())
    assert len(g) == 75 and g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1e9)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(p=1.5)
    with pytest.raises(ValueError):
        SolverConfig(kappa=1.0)
    with pytest.raises(ValueError):
        SolverConfig(n_starts=0)
    d = SolverConfig().to_dict()
    assert (d["p"], d["lambda_p0"], d["kappa"], d["n_starts"], d["max_fp_iters"]) == (0.25, 0.01, 5.0, 200, 200)
    assert (d["n_gamma"], d["gamma_max"], d["eps_tol"], d["eps_conv"], d["threshold"], d["lambda_r"]) == (
        75, 1e9, 1e-6, 1e-3, 0.01, 100.0)


def test_discover_recovers_planted_model_and_escalates(rng):
    lib = FeatureLibrary.default()
    from hyperdiscovery.assembly import assemble
    from hyperdiscovery.datagen import GenerationConfig, benchmark_model, forward_solve, generate_mesh
    from hyperdiscovery.kinematics import deformation_gradient

    mesh, part, _ = generate_mesh(600, 0.4)
    data = forward_solve(mesh, part, benchmark_model("NH2"), GenerationConfig(), model_name="NH2")
    sys = assemble(mesh, part, data, lib)
    Fq = [deformation_gradient(mesh, u) for u in data.displacements]
    rep = discover(sys, SolverConfig(n_starts=20), Fq)
    assert set(rep.model.terms()) == {"MR(i=1,j=1)", "VOL(k=1)"}
    assert rep.n_escalations == 0 and rep.trail[0]["passed"]
    doc = rep.to_document()
    assert doc["lambda_p"] == 0.01 and len(doc["starts"]) == 20
    # a lambda_p0 large enough to wipe out every coefficient aborts instead of escalating
    with pytest.raises(DiscoveryFailed) as exc:
        discover(sys, SolverConfig(n_starts=5, lambda_p0=1e6), Fq)
    assert exc.value.trail[-1]["stage"] == "threshold"


def test_discover_escalation_cap():
    # the only fit is an inadmissible negative shear modulus
    lib = FeatureLibrary.default().subset([1])
    sys = EquilibriumSystem(np.eye(1), np.array([-1.0]), 1.0, 100.0, lib)
    with pytest.raises(DiscoveryFailed) as exc:
        discover(sys, SolverConfig(n_starts=2, max_escalations=3))
    lams = [e["lambda_p"] for e in exc.value.trail]
    np.testing.assert_allclose(lams, [0.01, 0.05, 0.25, 1.25])
