"""Linear-triangle meshes, DOF partitions and the JSON dataset format.

Degrees of freedom are numbered ``2*a + i`` for node ``a`` and direction
``i`` (0 = x, 1 = y), matching the flat displacement layout of the dataset
file ``(u_x^1, u_y^1, u_x^2, ...)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GeometryError, PartitionError, SchemaError

DIRECTIONS = {"x": 0, "y": 1}


def signed_areas(nodes, elements):
    p = nodes[elements]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def shape_gradients(coords):
    """Constant shape-function gradients of one or many linear triangles.

    Parameters
    ----------
    coords : array_like, shape (3, 2) or (m, 3, 2)
        Vertex coordinates.

    Returns
    -------
    grads : ndarray, shape (3, 2) or (m, 3, 2)
        ``grads[..., a, j]`` is the derivative of ``N^a`` along ``X_j``.
    area : float or ndarray
        Signed area; must be positive.
    """
    coords = np.asarray(coords, dtype=float)
    single = coords.ndim == 2
    p = coords[None] if single else coords
    x, y = p[..., 0], p[..., 1]
    area = 0.5 * ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))
    if np.any(area <= 0.0):
        raise GeometryError("element with non-positive area")
    # dN^a/dX = (y_b - y_c) / 2A, dN^a/dY = (x_c - x_b) / 2A with (a, b, c) cyclic
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    grads = np.stack([b, c], axis=-1) / (2.0 * area[:, None, None])
    if single:
        return grads[0], float(area[0])
    return grads, area


@dataclass(frozen=True)
class Mesh:
    """Reference mesh of linear triangles with one-point quadrature.

    Elements are stored counterclockwise; ``grads[e, a, j]`` holds the
    gradient of the shape function of local node ``a`` and ``areas[e]`` the
    quadrature weight.
    """

    nodes: np.ndarray
    elements: np.ndarray
    grads: np.ndarray = field(repr=False)
    areas: np.ndarray = field(repr=False)

    @classmethod
    def from_arrays(cls, nodes, elements):
        nodes = np.array(nodes, dtype=float)
        elements = np.array(elements, dtype=np.int64)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise SchemaError("nodes must be an (n, 2) array")
        if elements.ndim != 2 or elements.shape[1] != 3:
            raise SchemaError("elements must be an (m, 3) array")
        n = len(nodes)
        bad = np.flatnonzero((elements < 0) | (elements >= n))
        if bad.size:
            e = bad[0] // 3
            raise SchemaError(f"elements[{e}] references node outside [0, {n})")
        area = signed_areas(nodes, elements)
        flip = area < 0
        elements[flip] = elements[flip][:, [0, 2, 1]]
        if np.any(np.abs(area) <= 0.0):
            e = int(np.flatnonzero(np.abs(area) <= 0.0)[0])
            raise GeometryError(f"elements[{e}] is degenerate (zero area)")
        grads, areas = shape_gradients(nodes[elements])
        for arr in (nodes, elements, grads, areas):
            arr.setflags(write=False)
        return cls(nodes, elements, grads, areas)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def n_dofs(self):
        return 2 * len(self.nodes)

    def element_dofs(self):
        """(m, 3, 2) global DOF indices per element, local node and direction."""
        return 2 * self.elements[:, :, None] + np.arange(2)[None, None, :]


@dataclass(frozen=True)
class DofPartition:
    """Split of all DOFs into free DOFs and direction-tagged Dirichlet subsets."""

    n_dofs: int
    free: np.ndarray
    names: tuple
    directions: tuple
    subsets: tuple

    @property
    def n_subsets(self):
        return len(self.subsets)

    @property
    def fixed(self):
        if not self.subsets:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(self.subsets))

    def subset(self, name):
        return self.subsets[self.names.index(name)]


def partition_dofs(mesh, boundary):
    """Build the DOF partition from a boundary description.

    ``boundary`` is a sequence of mappings with keys ``name``, ``direction``
    (``"x"`` or ``"y"``) and ``node_ids``.  Every DOF not claimed by a subset
    is free.
    """
    n_dofs = mesh.n_dofs
    owner = np.full(n_dofs, -1, dtype=np.int64)
    names, directions, subsets = [], [], []
    for k, spec in enumerate(boundary):
        name = spec["name"]
        if name in names:
            raise PartitionError(f"duplicate subset name {name!r}")
        direction = spec["direction"]
        if direction not in DIRECTIONS:
            raise SchemaError(f"subset {name!r}: direction must be 'x' or 'y', got {direction!r}")
        nodes = np.unique(np.asarray(spec["node_ids"], dtype=np.int64))
        if nodes.size == 0:
            raise SchemaError(f"subset {name!r} has no nodes")
        if nodes.min() < 0 or nodes.max() >= mesh.n_nodes:
            raise SchemaError(f"subset {name!r} references node outside [0, {mesh.n_nodes})")
        dofs = 2 * nodes + DIRECTIONS[direction]
        taken = owner[dofs] >= 0
        if np.any(taken):
            d = int(dofs[taken][0])
            other = names[owner[d]]
            raise PartitionError(f"DOF (node {d // 2}, {'xy'[d % 2]}) in both {other!r} and {name!r}")
        owner[dofs] = k
        names.append(name)
        directions.append(direction)
        dofs.setflags(write=False)
        subsets.append(dofs)
    free = np.flatnonzero(owner < 0)
    free.setflags(write=False)
    return DofPartition(n_dofs, free, tuple(names), tuple(directions), tuple(subsets))


@dataclass
class LoadstepData:
    """Displacements ``(L, 2 n_n)`` and reaction sums ``(L, n_alpha)`` per load step.

    Reaction columns follow ``names`` (the subset names of the partition).
    """

    displacements: np.ndarray
    reactions: np.ndarray
    names: tuple

    def __post_init__(self):
        self.displacements = np.atleast_2d(np.asarray(self.displacements, dtype=float))
        self.reactions = np.atleast_2d(np.asarray(self.reactions, dtype=float))
        self.names = tuple(self.names)
        if self.reactions.shape != (len(self.displacements), len(self.names)):
            raise SchemaError(
                f"reactions shape {self.reactions.shape} does not match "
                f"{len(self.displacements)} steps x {len(self.names)} subsets"
            )

    @property
    def n_steps(self):
        return len(self.displacements)

    def copy(self, displacements=None):
        u = self.displacements.copy() if displacements is None else displacements
        return LoadstepData(u, self.reactions.copy(), self.names)


def _field(doc, key, where="dataset"):
    try:
        return doc[key]
    except (KeyError, TypeError):
        raise SchemaError(f"{where}: missing field {key!r}") from None


def parse_dataset(doc):
    """Build ``(Mesh, DofPartition, LoadstepData)`` from a decoded JSON document."""
    try:
        nodes = np.asarray(_field(doc, "nodes"), dtype=float)
        elements = np.asarray(_field(doc, "elements"), dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"dataset: nodes/elements not numeric arrays ({exc})") from None
    mesh = Mesh.from_arrays(nodes, elements)
    boundary = _field(doc, "dirichlet_subsets")
    for k, spec in enumerate(boundary):
        for key in ("name", "direction", "node_ids"):
            _field(spec, key, f"dirichlet_subsets[{k}]")
    partition = partition_dofs(mesh, boundary)

    steps = _field(doc, "loadsteps")
    if not steps:
        raise SchemaError("dataset: loadsteps is empty")
    disp, reac = [], []
    for l, step in enumerate(steps):
        where = f"loadsteps[{l}]"
        u = np.asarray(_field(step, "displacements", where), dtype=float)
        if u.shape != (mesh.n_dofs,):
            raise SchemaError(f"{where}.displacements: expected length {mesh.n_dofs}, got {u.size}")
        r = _field(step, "reactions", where)
        missing = [name for name in partition.names if name not in r]
        if missing:
            raise SchemaError(f"{where}.reactions: missing subset {missing[0]!r}")
        disp.append(u)
        reac.append([float(r[name]) for name in partition.names])
    return mesh, partition, LoadstepData(np.array(disp), np.array(reac), partition.names)


def load_dataset(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return parse_dataset(doc)


def dataset_document(mesh, partition, data):
    return {
        "nodes": mesh.nodes.tolist(),
        "elements": mesh.elements.tolist(),
        "dirichlet_subsets": [
            {"name": name, "direction": d, "node_ids": (dofs // 2).tolist()}
            for name, d, dofs in zip(partition.names, partition.directions, partition.subsets)
        ],
        "loadsteps": [
            {
                "displacements": u.tolist(),
                "reactions": {name: float(r) for name, r in zip(data.names, rs)},
            }
            for u, rs in zip(data.displacements, data.reactions)
        ],
    }


def save_dataset(path, mesh, partition, data):
    # json emits repr() floats, which round-trip exactly
    Path(path).write_text(json.dumps(dataset_document(mesh, partition, data)))
