import logging

import numpy as np
import pytest

from hyperdiscovery.assembly import (
    EquilibriumSystem,
    StepSystem,
    assemble,
    assemble_fixed,
    balance_residuals,
    internal_force_matrix,
    reduce,
    scatter_operator,
    solve_normal,
)
from hyperdiscovery.datagen import benchmark_model, generate_mesh, internal_force
from hyperdiscovery.errors import DataQualityError, SchemaError
from hyperdiscovery.features import FeatureLibrary

from conftest import benchmark_dataset


@pytest.fixture(scope="module")
def small():
    return generate_mesh(300, 0.4)


def test_scatter_operator_counts(small):
    mesh, _, _ = small
    S = scatter_operator(mesh)
    assert S.shape == (mesh.n_dofs, 6 * mesh.n_elements)
    # each node's DOFs receive one entry per incident element
    counts = np.bincount(mesh.elements.ravel(), minlength=mesh.n_nodes)
    np.testing.assert_array_equal(np.asarray(S.sum(axis=1)).ravel(), np.repeat(counts, 2))


def test_force_matrix_matches_direct_internal_force(small, rng):
    mesh, _, _ = small
    lib = FeatureLibrary.default()
    model = benchmark_model("HW", lib)
    u = 0.05 * rng.normal(size=mesh.n_dofs) * 0.1 + 0.1 * mesh.nodes.ravel()
    f_direct, _ = internal_force(mesh, model, u)
    K = internal_force_matrix(mesh, u, lib)
    np.testing.assert_allclose(K @ model.theta, f_direct, rtol=1e-10, atol=1e-12 * np.abs(f_direct).max())


def test_offset_makes_objective_exact(rng):
    steps = [
        StepSystem(rng.normal(size=(30, 5)), rng.normal(size=30), rng.normal(size=(4, 5)), rng.normal(size=4))
        for _ in range(3)
    ]
    sys = reduce(steps, lambda_r=7.0, library=FeatureLibrary.default().subset(range(5)))
    theta = rng.normal(size=5)
    direct = sum(
        np.sum((s.A_free @ theta - s.b_free) ** 2) + 7.0 * np.sum((s.A_fix @ theta - s.b_fix) ** 2) for s in steps
    )
    assert sys.residual(theta) == pytest.approx(direct, rel=1e-10)
    np.testing.assert_allclose(sys.A, sys.A.T)


def test_feature_count_mismatch_rejected(rng):
    a = StepSystem(np.ones((3, 2)), np.zeros(3), np.ones((1, 2)), np.zeros(1))
    b = StepSystem(np.ones((3, 3)), np.zeros(3), np.ones((1, 3)), np.zeros(1))
    with pytest.raises(ValueError):
        reduce([a, b])
    with pytest.raises(ValueError):
        reduce([])


def test_missing_reaction(small):
    mesh, part, _ = small
    with pytest.raises(SchemaError, match="top_y"):
        assemble_fixed(mesh, part, np.zeros(mesh.n_dofs), {"left_x": 0, "bottom_y": 0, "right_x": 0},
                       FeatureLibrary.default())


def test_inverted_elements_are_skipped_or_rejected(small, caplog):
    mesh, _, _ = small
    lib = FeatureLibrary.default(include_log=False)
    u = np.zeros((mesh.n_nodes, 2))
    # collapse one node far enough to invert its neighbours
    a = mesh.elements[0, 0]
    u[a] = 5.0
    with caplog.at_level(logging.WARNING):
        K = internal_force_matrix(mesh, u.ravel(), lib)
    assert np.all(np.isfinite(K))
    assert "inverted" in caplog.text
    with pytest.raises(DataQualityError):
        internal_force_matrix(mesh, (mesh.nodes * [-2.0, 0.0]).ravel(), lib)


def test_balance_of_truth_models_on_generated_data():
    for name in ("NH2", "HW"):
        mesh, part, clean, _ = benchmark_dataset(name)
        free, fix = balance_residuals(mesh, part, clean, benchmark_model(name))
        assert free.max() <= 1e-8 and fix.max() <= 1e-8


def test_system_save_load(tmp_path):
    mesh, part, clean, _ = benchmark_dataset("NH2")
    sys = assemble(mesh, part, clean, FeatureLibrary.default())
    sys.save(tmp_path / "s.json")
    back = EquilibriumSystem.load(tmp_path / "s.json")
    np.testing.assert_array_equal(back.A, sys.A)
    np.testing.assert_array_equal(back.b, sys.b)
    assert back.library == sys.library and back.n_steps == 4
    sub = sys.restrict([1, 35])
    assert sub.library.names == ["MR(i=1,j=1)", "VOL(k=1)"]


def test_solve_normal_singular_fallback():
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    x = solve_normal(A, np.array([2.0, 2.0]))
    np.testing.assert_allclose(A @ x, [2.0, 2.0], rtol=1e-6)
    assert solve_normal(np.zeros((0, 0)), np.zeros(0)).size == 0
