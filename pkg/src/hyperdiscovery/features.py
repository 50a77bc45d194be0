"""Feature library for isotropic strain-energy densities and its derivatives.

The library is the concatenation of

* generalized Mooney-Rivlin terms ``(I1b-3)^i (I2b-3)^(j-i)`` for
  ``j = 1..N``, ``i = 0..j``;
* volumetric terms ``(J-1)^(2k)`` for ``k = 1..M``;
* optionally ``log(I2b/3)``.

Every feature vanishes at ``F = I``.  The energy is ``W = Q(F) . theta`` and
the first Piola-Kirchhoff stress ``P = dQ/dF . theta``.  Derivatives with
respect to the in-plane components ``(F11, F12, F21, F22)`` are exact, from
forward-mode dual numbers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .dual import Dual
from .errors import FeatureDomainError, SchemaError
from .kinematics import components, invariants_from_components


@dataclass(frozen=True)
class MooneyRivlin:
    """``(I1b-3)^i (I2b-3)^(j-i)``; ``j`` is the total polynomial degree."""

    i: int
    j: int

    @property
    def name(self):
        return f"MR(i={self.i},j={self.j})"

    @property
    def label(self):
        parts = []
        for base, e in (("(I1b-3)", self.i), ("(I2b-3)", self.j - self.i)):
            if e == 1:
                parts.append(base)
            elif e > 1:
                parts.append(f"{base}^{e}")
        return "".join(parts)


@dataclass(frozen=True)
class Volumetric:
    """``(J-1)^(2k)``."""

    k: int

    @property
    def name(self):
        return f"VOL(k={self.k})"

    @property
    def label(self):
        return f"(J-1)^{2 * self.k}"


@dataclass(frozen=True)
class Log:
    """``log(I2b/3)``."""

    @property
    def name(self):
        return "LOG"

    @property
    def label(self):
        return "log(I2b/3)"


_MR_RE = re.compile(r"^MR\(i=(\d+),j=(\d+)\)$")
_VOL_RE = re.compile(r"^VOL\(k=(\d+)\)$")


def parse_feature(name):
    """Inverse of ``descriptor.name``."""
    name = name.replace(" ", "")
    if name == "LOG":
        return Log()
    m = _MR_RE.match(name)
    if m:
        i, j = int(m[1]), int(m[2])
        if not 0 <= i <= j or j < 1:
            raise SchemaError(f"invalid Mooney-Rivlin feature {name!r}")
        return MooneyRivlin(i, j)
    m = _VOL_RE.match(name)
    if m and int(m[1]) >= 1:
        return Volumetric(int(m[1]))
    raise SchemaError(f"unknown feature descriptor {name!r}")


@dataclass(frozen=True)
class FeatureLibrary:
    """Ordered, immutable tuple of feature descriptors."""

    features: tuple

    @classmethod
    def default(cls, N=7, M=7, include_log=True):
        feats = [MooneyRivlin(i, j) for j in range(1, N + 1) for i in range(0, j + 1)]
        feats += [Volumetric(k) for k in range(1, M + 1)]
        if include_log:
            feats.append(Log())
        return cls(tuple(feats))

    @classmethod
    def from_names(cls, names):
        return cls(tuple(parse_feature(n) for n in names))

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def __getitem__(self, k):
        return self.features[k]

    @property
    def names(self):
        return [f.name for f in self.features]

    def index(self, feature):
        if isinstance(feature, str):
            feature = parse_feature(feature)
        return self.features.index(feature)

    def subset(self, mask_or_indices):
        idx = np.asarray(mask_or_indices)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        return FeatureLibrary(tuple(self.features[int(k)] for k in idx))

    def without(self, *removed):
        removed = {parse_feature(r) if isinstance(r, str) else r for r in removed}
        return FeatureLibrary(tuple(f for f in self.features if f not in removed))

    @property
    def has_log(self):
        return any(isinstance(f, Log) for f in self.features)

    def evaluate_terms(self, inv):
        """Feature values as a list (one entry per feature) of arrays or duals.

        ``inv`` is an :class:`~hyperdiscovery.kinematics.InvariantSet` whose
        entries may be plain arrays or :class:`Dual` objects.
        """
        J = inv.J
        a = inv.I1b - 3.0
        b = inv.I2b - 3.0
        cache = {}

        def power(x, tag, e):
            key = (tag, e)
            if key not in cache:
                cache[key] = x**e
            return cache[key]

        out = []
        for f in self.features:
            if isinstance(f, MooneyRivlin):
                ea, eb = f.i, f.j - f.i
                if eb == 0:
                    out.append(power(a, "a", ea))
                elif ea == 0:
                    out.append(power(b, "b", eb))
                else:
                    out.append(power(a, "a", ea) * power(b, "b", eb))
            elif isinstance(f, Volumetric):
                out.append(power(J - 1.0, "v", 2 * f.k))
            else:
                I2b = inv.I2b
                v = I2b.val if isinstance(I2b, Dual) else np.asarray(I2b)
                if np.any(v <= 0.0):
                    raise FeatureDomainError("log(I2b/3) requires I2b > 0")
                out.append((I2b / 3.0).log() if isinstance(I2b, Dual) else np.log(I2b / 3.0))
        return out


def _as_F(F):
    F = np.asarray(F, dtype=float)
    if F.shape[-2:] != (2, 2):
        raise ValueError(f"expected (..., 2, 2) deformation gradients, got {F.shape}")
    return F


def evaluate_features(F, library):
    """Feature values, shape ``F.shape[:-2] + (n_f,)``."""
    F = _as_F(F)
    inv = invariants_from_components(*components(F))
    with np.errstate(over="ignore", invalid="ignore"):
        terms = library.evaluate_terms(inv)
    shape = F.shape[:-2]
    return np.stack([np.broadcast_to(np.asarray(t, dtype=float), shape) for t in terms], axis=-1)


def _dual_terms(F, library, second_order=False):
    F = _as_F(F)
    f11, f12, f21, f22 = Dual.variables(F.reshape(F.shape[:-2] + (4,)), second_order=second_order)
    inv = invariants_from_components(f11, f12, f21, f22)
    with np.errstate(over="ignore", invalid="ignore"):
        return library.evaluate_terms(inv)


def feature_derivatives(F, library):
    """``dQ_k/dF_ij`` with shape ``F.shape[:-2] + (n_f, 4)``.

    The last axis runs over ``(F11, F12, F21, F22)``.
    """
    F = _as_F(F)
    terms = _dual_terms(F, library)
    shape = F.shape[:-2] + (4,)
    return np.stack([np.broadcast_to(t.grad, shape) for t in terms], axis=-2)


def energy_dual(F, library, theta, second_order=False):
    """``W = Q . theta`` as a :class:`Dual` seeded on the four components of ``F``.

    Only features with nonzero coefficient are evaluated.
    """
    theta = np.asarray(theta, dtype=float)
    active = np.flatnonzero(theta)
    sub = library.subset(active)
    F = _as_F(F)
    if len(sub) == 0:
        z = np.zeros(F.shape[:-2])
        hess = np.zeros(z.shape + (4, 4)) if second_order else None
        return Dual(z, np.zeros(z.shape + (4,)), hess)
    terms = _dual_terms(F, sub, second_order)
    W = None
    for c, t in zip(theta[active], terms):
        W = t * c if W is None else W + t * c
    return W


@dataclass
class MaterialModel:
    """Coefficient vector ``theta`` aligned with a :class:`FeatureLibrary`."""

    library: FeatureLibrary
    theta: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.theta is None:
            self.theta = np.zeros(len(self.library))
        self.theta = np.array(self.theta, dtype=float)
        if self.theta.shape != (len(self.library),):
            raise ValueError(f"theta has length {self.theta.size}, library has {len(self.library)}")

    @classmethod
    def from_terms(cls, library, terms):
        """Build from ``{feature name or descriptor: coefficient}``."""
        theta = np.zeros(len(library))
        for f, c in terms.items():
            theta[library.index(f)] = c
        return cls(library, theta)

    @property
    def active(self):
        return self.theta != 0.0

    @property
    def active_features(self):
        return [f for f, a in zip(self.library, self.active) if a]

    def terms(self):
        return {f.name: float(c) for f, c in zip(self.library, self.theta) if c != 0.0}

    def __call__(self, F):
        return strain_energy(self, F)


def strain_energy(model, F):
    """``W(F)`` for a batch of deformation gradients."""
    F = _as_F(F)
    theta = model.theta
    active = np.flatnonzero(theta)
    if active.size == 0:
        return np.zeros(F.shape[:-2])
    Q = evaluate_features(F, model.library.subset(active))
    return Q @ theta[active]


def stress(model, F):
    """First Piola-Kirchhoff stress, shape ``F.shape``."""
    F = _as_F(F)
    W = energy_dual(F, model.library, model.theta)
    return np.broadcast_to(W.grad, F.shape[:-2] + (4,)).reshape(F.shape).copy()
