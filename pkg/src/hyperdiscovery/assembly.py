"""Equilibrium systems linear in the material coefficients.

For one load step the internal force at DOF ``(a, i)`` is linear in
``theta``:

    f_int[(a, i)] = sum_e area_e * (dQ/dF_ij)(F_e) * dN^a/dX_j . theta

Rows at free DOFs form ``A_free theta = b_free`` (bulk balance, ``b_free``
is the zero traction load), and the rows of each Dirichlet subset summed
form ``A_fix theta = b_fix`` with ``b_fix`` the measured reaction sums.
Steps are combined through the normal equations

    A_eqb = sum_l A_free^T A_free + lambda_r A_fix^T A_fix
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import DataQualityError, SchemaError
from .features import FeatureLibrary, feature_derivatives
from .kinematics import deformation_gradient, jacobian

log = logging.getLogger(__name__)

MAX_REJECTED_FRACTION = 0.05


def scatter_operator(mesh):
    """Sparse ``(2 n_n, 6 m)`` matrix adding element-local DOF rows into global rows."""
    return _scatter(mesh.elements.tobytes(), mesh.n_nodes, mesh.n_elements)


@lru_cache(maxsize=8)
def _scatter(elements_bytes, n_nodes, n_el):
    elements = np.frombuffer(elements_bytes, dtype=np.int64).reshape(n_el, 3)
    rows = (2 * elements[:, :, None] + np.arange(2)).ravel()
    cols = np.arange(6 * n_el)
    return sp.csr_matrix((np.ones(6 * n_el), (rows, cols)), shape=(2 * n_nodes, 6 * n_el))


def internal_force_matrix(mesh, displacements, library, reject_inverted=True):
    """Global ``(2 n_n, n_f)`` matrix whose product with ``theta`` is the internal force.

    Elements with ``J <= 0`` are skipped with a warning; if more than 5 %
    of the elements are skipped a :class:`DataQualityError` is raised.
    """
    F = deformation_gradient(mesh, displacements)
    J = jacobian(F)
    ok = J > 0.0
    n_bad = int((~ok).sum())
    if n_bad:
        if not reject_inverted or n_bad > MAX_REJECTED_FRACTION * mesh.n_elements:
            raise DataQualityError(f"{n_bad} of {mesh.n_elements} elements have J <= 0")
        log.warning("skipping %d inverted elements (J <= 0)", n_bad)
    n_f = len(library)
    G = np.zeros((mesh.n_elements, 3, 2, n_f))
    dQ = feature_derivatives(F[ok], library).reshape(-1, n_f, 2, 2)
    G[ok] = np.einsum("e,ekij,eaj->eaik", mesh.areas[ok], dQ, mesh.grads[ok])
    return scatter_operator(mesh) @ G.reshape(6 * mesh.n_elements, n_f)


@dataclass
class StepSystem:
    """Tall per-step blocks; kept only when needed for diagnostics."""

    A_free: np.ndarray
    b_free: np.ndarray
    A_fix: np.ndarray
    b_fix: np.ndarray


def assemble_free(mesh, partition, displacements, library, traction=None):
    """Bulk balance rows ``(A_free, b_free)`` for one load step.

    ``traction`` is an optional vector of external nodal forces (length
    ``2 n_n``); under displacement control it is zero.
    """
    K = internal_force_matrix(mesh, displacements, library)
    A = K[partition.free]
    b = np.zeros(len(partition.free)) if traction is None else np.asarray(traction, float)[partition.free]
    return A, b


def fixed_rows(K, partition):
    return np.stack([K[dofs].sum(axis=0) for dofs in partition.subsets]) if partition.subsets else np.zeros((0, K.shape[1]))


def assemble_fixed(mesh, partition, displacements, reactions, library):
    """Reaction balance rows ``(A_fix, b_fix)`` for one load step.

    ``reactions`` is either a sequence aligned with ``partition.names`` or a
    mapping from subset name to reaction sum.
    """
    if isinstance(reactions, dict):
        missing = [n for n in partition.names if n not in reactions]
        if missing:
            raise SchemaError(f"missing reaction for subset {missing[0]!r}")
        reactions = [reactions[n] for n in partition.names]
    K = internal_force_matrix(mesh, displacements, library)
    return fixed_rows(K, partition), np.asarray(reactions, dtype=float)


def assemble_step(mesh, partition, displacements, reactions, library):
    K = internal_force_matrix(mesh, displacements, library)
    return StepSystem(
        A_free=K[partition.free],
        b_free=np.zeros(len(partition.free)),
        A_fix=fixed_rows(K, partition),
        b_fix=np.asarray(reactions, dtype=float),
    )


@dataclass
class EquilibriumSystem:
    """Normal equations of the joint least-squares problem.

    ``offset`` is ``sum_l |b_free|^2 + lambda_r |b_fix|^2`` so that the
    full residual ``|A_free t - b_free|^2 + lambda_r |A_fix t - b_fix|^2``
    equals ``t.A.t - 2 b.t + offset``.
    """

    A: np.ndarray
    b: np.ndarray
    offset: float
    lambda_r: float
    library: FeatureLibrary
    n_steps: int = 1
    steps: list = field(default_factory=list, repr=False)

    @property
    def n_features(self):
        return len(self.b)

    def residual(self, theta):
        theta = np.asarray(theta, dtype=float)
        return float(theta @ self.A @ theta - 2.0 * self.b @ theta + self.offset)

    def restrict(self, mask_or_indices):
        idx = np.asarray(mask_or_indices)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        return EquilibriumSystem(
            self.A[np.ix_(idx, idx)].copy(),
            self.b[idx].copy(),
            self.offset,
            self.lambda_r,
            self.library.subset(idx),
            self.n_steps,
        )

    def to_document(self):
        return {
            "features": self.library.names,
            "lambda_r": self.lambda_r,
            "n_steps": self.n_steps,
            "offset": self.offset,
            "A_eqb": self.A.tolist(),
            "b_eqb": self.b.tolist(),
        }

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_document(), indent=1))

    @classmethod
    def load(cls, path):
        doc = json.loads(Path(path).read_text())
        return cls(
            np.array(doc["A_eqb"], dtype=float),
            np.array(doc["b_eqb"], dtype=float),
            float(doc["offset"]),
            float(doc["lambda_r"]),
            FeatureLibrary.from_names(doc["features"]),
            int(doc["n_steps"]),
        )


def reduce(steps, lambda_r=100.0, library=None, keep_steps=False):
    """Accumulate per-step blocks into :class:`EquilibriumSystem`.

    ``steps`` is an iterable of :class:`StepSystem`; all must share the
    number of feature columns.
    """
    A = b = None
    offset = 0.0
    kept = []
    n = 0
    for s in steps:
        n_f = s.A_free.shape[1]
        if A is None:
            A = np.zeros((n_f, n_f))
            b = np.zeros(n_f)
        elif n_f != A.shape[0]:
            raise ValueError(f"step {n} has {n_f} feature columns, expected {A.shape[0]}")
        A += s.A_free.T @ s.A_free + lambda_r * (s.A_fix.T @ s.A_fix)
        b += s.A_free.T @ s.b_free + lambda_r * (s.A_fix.T @ s.b_fix)
        offset += float(s.b_free @ s.b_free + lambda_r * (s.b_fix @ s.b_fix))
        if keep_steps:
            kept.append(s)
        n += 1
    if A is None:
        raise ValueError("at least one load step is required")
    A = 0.5 * (A + A.T)
    if library is None:
        library = FeatureLibrary.default()
    return EquilibriumSystem(A, b, offset, float(lambda_r), library, n, kept)


def assemble(mesh, partition, data, library, lambda_r=100.0, keep_steps=False):
    """Assemble and reduce every load step of ``data``."""
    steps = (
        assemble_step(mesh, partition, u, r, library)
        for u, r in zip(data.displacements, data.reactions)
    )
    return reduce(steps, lambda_r, library, keep_steps)


def solve_normal(A, b):
    """Solve ``A x = b`` for symmetric positive semidefinite ``A``.

    Cholesky first; on failure retry with diagonal jitter
    ``1e-12 * trace(A) / n``, then fall back to a symmetric solve.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.size == 0:
        return np.zeros(0)
    try:
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(A), b)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-12 * np.trace(A) / len(A)
    Aj = A + jitter * np.eye(len(A))
    try:
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(Aj), b)
    except np.linalg.LinAlgError:
        return scipy.linalg.solve(Aj, b, assume_a="sym")


def balance_residuals(mesh, partition, data, model):
    """Relative equilibrium residuals of ``model`` on every load step.

    Returns ``(free, fix)`` arrays of length ``L``.  ``b_free`` is zero
    under displacement control, so ``|A_free t - b_free| / |A_free t|`` is
    identically 1 and carries no information; the free residual is instead
    scaled by the gross nodal force, the norm over free DOFs of the summed
    magnitudes of the element contributions.  The reaction residual is
    ``|A_fix t - b_fix| / |b_fix|``.
    """
    S = scatter_operator(mesh)
    free_res, fix_res = [], []
    for u, r in zip(data.displacements, data.reactions):
        F = deformation_gradient(mesh, u)
        dQ = feature_derivatives(F, model.library).reshape(-1, len(model.library), 2, 2)
        P = np.einsum("ekij,k->eij", dQ, model.theta)
        local = np.einsum("e,eij,eaj->eai", mesh.areas, P, mesh.grads).reshape(-1)
        f = S @ local
        gross = (abs(S) @ np.abs(local))[partition.free]
        free_res.append(np.linalg.norm(f[partition.free]) / max(np.linalg.norm(gross), np.finfo(float).tiny))
        sums = np.array([f[d].sum() for d in partition.subsets])
        fix_res.append(np.linalg.norm(sums - r) / max(np.linalg.norm(r), np.finfo(float).tiny))
    return np.array(free_res), np.array(fix_res)
