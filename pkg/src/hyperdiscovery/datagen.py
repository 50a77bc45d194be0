"""Synthetic benchmark data: plate-with-hole quadrant under biaxial tension.

The quadrant ``[0, 1]^2`` minus a quarter disc of radius ``r`` at the
origin is meshed by a single structured map: node ``(k, t)`` sits on the
segment from the arc point at angle ``k/n * pi/2`` to the matching point
on the outer boundary (right edge, then top edge).  Left and bottom edges
are symmetry planes; the right and top edges are pulled in displacement
control.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import scatter_operator
from .errors import GeometryError, SolverError
from .features import FeatureLibrary, MaterialModel, energy_dual, stress
from .kinematics import deformation_gradient, jacobian
from .mesh import LoadstepData, Mesh, partition_dofs

log = logging.getLogger(__name__)

SUBSETS = ("left_x", "bottom_y", "right_x", "top_y")

BENCHMARKS = {
    "NH2": {"MR(i=1,j=1)": 0.5, "VOL(k=1)": 1.5},
    "NH4": {"MR(i=1,j=1)": 0.5, "VOL(k=2)": 1.5},
    "IH": {"MR(i=1,j=1)": 0.5, "MR(i=0,j=1)": 1.0, "MR(i=2,j=2)": 1.0, "VOL(k=1)": 1.5},
    "HW": {
        "MR(i=1,j=1)": 0.5,
        "MR(i=0,j=1)": 1.0,
        "MR(i=1,j=2)": 0.7,
        "MR(i=3,j=3)": 0.2,
        "VOL(k=1)": 1.5,
    },
    "GT": {"MR(i=1,j=1)": 0.5, "VOL(k=1)": 1.5, "LOG": 1.0},
}

DEFAULT_STEPS = {"NH2": 4, "NH4": 4, "IH": 8, "HW": 8, "GT": 8}


def benchmark_model(name, library=None):
    """Ground-truth :class:`MaterialModel` of one of ``NH2, NH4, IH, HW, GT``."""
    if name not in BENCHMARKS:
        raise ValueError(f"unknown benchmark model {name!r}; expected one of {sorted(BENCHMARKS)}")
    if library is None:
        library = FeatureLibrary.default()
    return MaterialModel.from_terms(library, BENCHMARKS[name])


@dataclass
class GenerationConfig:
    n_nodes: int = 2500
    hole_radius: float = 0.4
    n_steps: int | None = None
    delta_increment: float = 0.1
    rho: float = 0.7
    sigma: float = 0.0
    seed: int = 0
    newton_tol: float = 1e-10
    newton_max_iter: int = 30
    max_bisections: int = 4
    tangent: str = "dual"

    def steps_for(self, model_name):
        return self.n_steps if self.n_steps is not None else DEFAULT_STEPS.get(model_name, 4)

    def deltas(self, model_name):
        L = self.steps_for(model_name)
        return self.delta_increment * np.arange(1, L + 1)

    def to_dict(self):
        return asdict(self)


def _grid_counts(n_nodes):
    n_t = max(2, int(round(np.sqrt(n_nodes / 2.0))) - 1)
    n_k = 2 * (n_t + 1) - 2
    return n_k, n_t


def _triangulate(n_k, n_t):
    idx = np.arange((n_k + 1) * (n_t + 1)).reshape(n_k + 1, n_t + 1)
    tris = []
    for k in range(n_k):
        for t in range(n_t):
            a, b, c, d = idx[k, t], idx[k + 1, t], idx[k + 1, t + 1], idx[k, t + 1]
            if (k + t) % 2 == 0:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    return np.array(tris, dtype=np.int64), idx


def generate_mesh(n_nodes=2500, hole_radius=0.4, grading=1.4):
    """Mesh the quadrant and tag its four Dirichlet subsets.

    Returns ``(mesh, partition, boundary)`` where ``boundary`` is the
    list of subset descriptions written into dataset files.
    """
    if not 0.0 <= hole_radius < 1.0:
        raise GeometryError(f"hole radius must lie in [0, 1), got {hole_radius}")
    if hole_radius == 0.0:
        return _square_mesh(n_nodes)
    n_k, n_t = _grid_counts(n_nodes)
    if n_k < 8:
        raise GeometryError(f"{n_k} segments on the hole arc; at least 8 are required")
    s = np.linspace(0.0, 1.0, n_k + 1)
    theta = 0.5 * np.pi * s
    arc = hole_radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    u = 2.0 * s
    outer = np.where(u[:, None] <= 1.0, np.stack([np.ones_like(u), u], 1), np.stack([2.0 - u, np.ones_like(u)], 1))
    t = np.linspace(0.0, 1.0, n_t + 1) ** grading
    nodes = arc[:, None, :] * (1.0 - t[None, :, None]) + outer[:, None, :] * t[None, :, None]
    nodes = nodes.reshape(-1, 2)
    elements, idx = _triangulate(n_k, n_t)
    half = n_k // 2
    boundary = [
        {"name": "left_x", "direction": "x", "node_ids": idx[n_k, :].tolist()},
        {"name": "bottom_y", "direction": "y", "node_ids": idx[0, :].tolist()},
        {"name": "right_x", "direction": "x", "node_ids": idx[: half + 1, n_t].tolist()},
        {"name": "top_y", "direction": "y", "node_ids": idx[half:, n_t].tolist()},
    ]
    # snap boundary coordinates exactly onto their edges
    nodes[idx[n_k, :], 0] = 0.0
    nodes[idx[0, :], 1] = 0.0
    nodes[idx[: half + 1, n_t], 0] = 1.0
    nodes[idx[half:, n_t], 1] = 1.0
    mesh = Mesh.from_arrays(nodes, elements)
    return mesh, partition_dofs(mesh, boundary), boundary


def _square_mesh(n_nodes):
    n = max(2, int(round(np.sqrt(n_nodes))) - 1)
    x = np.linspace(0.0, 1.0, n + 1)
    # grid indexed [x, y] to reuse the quad splitter
    nodes = np.stack(np.meshgrid(x, x, indexing="ij"), axis=-1).reshape(-1, 2)
    elements, idx = _triangulate(n, n)
    boundary = [
        {"name": "left_x", "direction": "x", "node_ids": idx[0, :].tolist()},
        {"name": "bottom_y", "direction": "y", "node_ids": idx[:, 0].tolist()},
        {"name": "right_x", "direction": "x", "node_ids": idx[n, :].tolist()},
        {"name": "top_y", "direction": "y", "node_ids": idx[:, n].tolist()},
    ]
    mesh = Mesh.from_arrays(nodes, elements)
    return mesh, partition_dofs(mesh, boundary), boundary


def prescribed_values(partition, delta, rho):
    """Dirichlet displacement per fixed DOF for loading parameter ``delta``."""
    values = np.zeros(partition.n_dofs)
    load = {"left_x": 0.0, "bottom_y": 0.0, "right_x": delta, "top_y": rho * delta}
    for name, dofs in zip(partition.names, partition.subsets):
        values[dofs] = load[name]
    return values


def _element_tangent(F, model, tangent):
    if tangent == "dual":
        W = energy_dual(F, model.library, model.theta, second_order=True)
        return W.grad, W.hess
    if tangent == "fd":
        P = stress(model, F).reshape(-1, 4)
        h = 1e-7
        H = np.empty(P.shape + (4,))
        for c in range(4):
            dF = np.zeros(4)
            dF[c] = h
            dF = dF.reshape(2, 2)
            H[..., c] = (stress(model, F + dF) - stress(model, F - dF)).reshape(-1, 4) / (2 * h)
        return P, 0.5 * (H + np.swapaxes(H, -1, -2))
    raise ValueError(f"unknown tangent option {tangent!r}; expected 'dual' or 'fd'")


def internal_force(mesh, model, u, tangent=None):
    """Internal nodal forces and, if ``tangent`` is given, the sparse stiffness."""
    F = deformation_gradient(mesh, u)
    if np.any(jacobian(F) <= 0.0):
        raise SolverError("inverted element during Newton iteration")
    if tangent is None:
        P = stress(model, F).reshape(-1, 4)
        H = None
    else:
        P, H = _element_tangent(F, model, tangent)
    P = P.reshape(-1, 2, 2)
    S = scatter_operator(mesh)
    f = S @ np.einsum("e,eij,eaj->eai", mesh.areas, P, mesh.grads).ravel()
    if H is None:
        return f, None
    H = H.reshape(-1, 2, 2, 2, 2)
    Ke = np.einsum("e,eijkl,eaj,ebl->eaibk", mesh.areas, H, mesh.grads, mesh.grads).reshape(-1, 6, 6)
    dofs = mesh.element_dofs().reshape(-1, 6)
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    K = sp.csr_matrix((Ke.ravel(), (rows, cols)), shape=(mesh.n_dofs, mesh.n_dofs))
    return f, K


def _newton(mesh, partition, model, u0, config):
    u = u0.copy()
    free = partition.free
    f, K = internal_force(mesh, model, u, config.tangent)
    for it in range(config.newton_max_iter):
        r = f[free]
        rnorm = np.abs(r).max()
        if rnorm <= config.newton_tol:
            return u, it
        du = spla.spsolve(K[free][:, free].tocsc(), -r)
        step = 1.0
        for _ in range(12):
            trial = u.copy()
            trial[free] += step * du
            try:
                f_new, K_new = internal_force(mesh, model, trial, config.tangent)
            except SolverError:
                step *= 0.5
                continue
            if np.abs(f_new[free]).max() < (1.0 - 1e-4 * step) * rnorm or rnorm < 1e3 * config.newton_tol:
                break
            step *= 0.5
        else:
            raise SolverError("line search failed")
        u, f, K = trial, f_new, K_new
    if np.abs(f[free]).max() <= config.newton_tol:
        return u, config.newton_max_iter
    raise SolverError(
        f"Newton did not converge in {config.newton_max_iter} iterations "
        f"(|r|_inf = {np.abs(f[free]).max():.3e}); try smaller load increments"
    )


def _affine_guess(mesh, delta, rho):
    u = np.zeros((mesh.n_nodes, 2))
    u[:, 0] = delta * mesh.nodes[:, 0]
    u[:, 1] = rho * delta * mesh.nodes[:, 1]
    return u.ravel()


def forward_solve(mesh, partition, model, config=None, deltas=None, model_name=None):
    """Displacement-controlled continuation over the load schedule.

    Each increment that fails is bisected, up to ``config.max_bisections``
    levels.  Returns noiseless :class:`LoadstepData` with one entry per
    requested loading parameter.
    """
    config = config or GenerationConfig()
    if deltas is None:
        deltas = config.deltas(model_name or "NH2")
    free = partition.free
    u = np.zeros(mesh.n_dofs)
    delta_done = 0.0
    records, reactions = [], []
    for target in deltas:
        pending = [(target, 0)]
        while pending:
            d, level = pending[-1]
            guess = u.copy() if delta_done > 0.0 else _affine_guess(mesh, d, config.rho)
            if delta_done > 0.0:
                # scale the previous free solution as predictor
                guess[free] *= d / delta_done
            bc = prescribed_values(partition, d, config.rho)
            fixed = partition.fixed
            guess[fixed] = bc[fixed]
            try:
                u_new, iters = _newton(mesh, partition, model, guess, config)
            except SolverError as exc:
                if level >= config.max_bisections:
                    raise SolverError(f"load step to delta={d:.4g} failed after {level} bisections: {exc}") from exc
                log.info("bisecting increment %.4g -> %.4g", delta_done, d)
                pending.append((0.5 * (delta_done + d), level + 1))
                continue
            log.debug("delta=%.4g converged in %d Newton iterations", d, iters)
            u = u_new
            delta_done = d
            pending.pop()
        f, _ = internal_force(mesh, model, u)
        records.append(u.copy())
        reactions.append([f[dofs].sum() for dofs in partition.subsets])
    return LoadstepData(np.array(records), np.array(reactions), partition.names)


def add_noise(data, sigma, seed=0):
    """Add i.i.d. Gaussian noise of standard deviation ``sigma`` to every DOF."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return data.copy()
    rng = np.random.default_rng(seed)
    noisy = data.displacements + rng.normal(0.0, sigma, size=data.displacements.shape)
    return data.copy(displacements=noisy)


def generate(model_name, config=None):
    """Mesh, solve and (optionally) perturb one benchmark.

    Returns ``(mesh, partition, clean, noisy)``.
    """
    config = config or GenerationConfig()
    mesh, partition, _ = generate_mesh(config.n_nodes, config.hole_radius)
    model = benchmark_model(model_name)
    clean = forward_solve(mesh, partition, model, config, model_name=model_name)
    noisy = add_noise(clean, config.sigma, config.seed)
    return mesh, partition, clean, noisy
