"""Plane-strain kinematics: deformation gradients, invariants, canonical paths.

Deformation gradients are arrays of shape ``(..., 2, 2)`` holding the
in-plane block; the out-of-plane stretch is always 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvertedElementError

PATHS = ("UT", "UC", "SS", "BT", "BC", "PS")


def deformation_gradient(mesh, displacements):
    """Per-element deformation gradient ``I + sum_a u^a (x) grad N^a``.

    ``displacements`` is the flat nodal vector of length ``2 n_n``; returns
    an ``(m, 2, 2)`` array.
    """
    u = np.asarray(displacements, dtype=float).reshape(-1, 2)[mesh.elements]
    return np.eye(2) + np.einsum("eai,eaj->eij", u, mesh.grads)


def element_deformation_gradient(grads, nodal_u):
    """Single element version: ``grads`` (3, 2), ``nodal_u`` (3, 2)."""
    return np.eye(2) + np.asarray(nodal_u, dtype=float).T @ np.asarray(grads, dtype=float)


def components(F):
    F = np.asarray(F, dtype=float)
    return F[..., 0, 0], F[..., 0, 1], F[..., 1, 0], F[..., 1, 1]


@dataclass
class InvariantSet:
    I1: object
    I2: object
    I3: object
    J: object

    @property
    def I1b(self):
        return self.J ** (-2.0 / 3.0) * self.I1

    @property
    def I2b(self):
        return self.J ** (-4.0 / 3.0) * self.I2


def invariants_from_components(f11, f12, f21, f22):
    """Invariants of ``C = F^T F`` with ``C33 = 1`` from the four in-plane components.

    Works for plain arrays and for :class:`~hyperdiscovery.dual.Dual`
    operands alike.  No sign check on ``J`` is made here.
    """
    J = f11 * f22 - f12 * f21
    trC2 = f11 * f11 + f12 * f12 + f21 * f21 + f22 * f22
    I1 = trC2 + 1.0
    I3 = J * J
    # plane strain: I2 = det(C2) + tr(C2) = I1 + I3 - 1, summed without cancellation
    I2 = trC2 + I3
    return InvariantSet(I1, I2, I3, J)


def invariants(F):
    """Invariants of a batch of plane-strain deformation gradients.

    Raises
    ------
    InvertedElementError
        If any ``det F <= 0``.
    """
    inv = invariants_from_components(*components(F))
    if np.any(~(np.asarray(inv.J) > 0.0)):
        raise InvertedElementError("deformation gradient with J <= 0")
    return inv


def jacobian(F):
    F = np.asarray(F, dtype=float)
    return F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]


def deformation_path(kind, gamma):
    """Deformation gradient(s) along one of the six canonical paths.

    ``kind`` is one of ``UT, UC, SS, BT, BC, PS``; ``gamma`` may be a scalar
    or an array, giving shape ``gamma.shape + (2, 2)``.
    """
    g = np.asarray(gamma, dtype=float)
    one = np.ones_like(g)
    zero = np.zeros_like(g)
    s = 1.0 + g
    if kind == "UT":
        rows = [[s, zero], [zero, one]]
    elif kind == "UC":
        rows = [[1.0 / s, zero], [zero, one]]
    elif kind == "SS":
        rows = [[one, g], [zero, one]]
    elif kind == "BT":
        rows = [[s, zero], [zero, s]]
    elif kind == "BC":
        rows = [[1.0 / s, zero], [zero, 1.0 / s]]
    elif kind == "PS":
        rows = [[s, zero], [zero, 1.0 / s]]
    else:
        raise ValueError(f"unknown deformation path {kind!r}; expected one of {PATHS}")
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def path_derivative(kind, gamma):
    """``dF/dgamma`` along a canonical path, same shape as :func:`deformation_path`."""
    g = np.asarray(gamma, dtype=float)
    one = np.ones_like(g)
    zero = np.zeros_like(g)
    d = -1.0 / (1.0 + g) ** 2
    table = {
        "UT": [[one, zero], [zero, zero]],
        "UC": [[d, zero], [zero, zero]],
        "SS": [[zero, one], [zero, zero]],
        "BT": [[one, zero], [zero, one]],
        "BC": [[d, zero], [zero, d]],
        "PS": [[one, zero], [zero, d]],
    }
    if kind not in table:
        raise ValueError(f"unknown deformation path {kind!r}; expected one of {PATHS}")
    return np.stack([np.stack(r, axis=-1) for r in table[kind]], axis=-2)
