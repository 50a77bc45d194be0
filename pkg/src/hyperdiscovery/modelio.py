"""Model files, display strings and curve tables along the canonical paths."""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .features import FeatureLibrary, MaterialModel, strain_energy, stress
from .kinematics import PATHS, deformation_path, path_derivative

FORMAT_VERSION = 1
CURVE_COLUMNS = ("gamma", "W", "P11", "P12", "P22")


def format_model(model, decimals=4):
    """Human-readable ``W``, e.g. ``0.5000*(I1b-3) + 1.5000*(J-1)^2``."""
    parts = []
    for f, c in zip(model.library, model.theta):
        if c == 0.0:
            continue
        mag = f"{abs(c):.{decimals}f}*{f.label}"
        if not parts:
            parts.append(mag if c > 0 else "-" + mag)
        else:
            parts.append(("+ " if c > 0 else "- ") + mag)
    return " ".join(parts) if parts else "W = 0"


def config_hash(*configs):
    """Short stable digest of JSON-serializable configuration dictionaries."""
    blob = json.dumps(list(configs), sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class ModelRecord:
    model: MaterialModel
    provenance: dict = field(default_factory=dict)
    created: str = ""

    def to_document(self):
        lib = self.model.library
        return {
            "format": FORMAT_VERSION,
            "library": lib.names,
            "active": [f.name for f in self.model.active_features],
            # repr floats carry 17 significant digits and round-trip exactly
            "coefficients": [float(c) for c in self.model.theta],
            "display": format_model(self.model),
            "provenance": self.provenance,
            "created": self.created,
        }

    @classmethod
    def from_document(cls, doc):
        try:
            library = FeatureLibrary.from_names(doc["library"])
            theta = np.array(doc["coefficients"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"model file: {exc}") from None
        if theta.shape != (len(library),):
            raise SchemaError("model file: coefficients do not match the library")
        model = MaterialModel(library, theta)
        if "active" in doc and [f.name for f in model.active_features] != list(doc["active"]):
            raise SchemaError("model file: active list disagrees with coefficients")
        return cls(model, dict(doc.get("provenance", {})), str(doc.get("created", "")))

    def dumps(self):
        return json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n"

    def save(self, path):
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        return cls.from_document(doc)


def timestamp(deterministic=True):
    """ISO timestamp; the fixed epoch value keeps outputs byte-identical."""
    if deterministic:
        return "1970-01-01T00:00:00+00:00"
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def default_gamma():
    return np.linspace(0.01, 1.0, 100)


def evaluate_curves(model, kind, gamma=None):
    """``(n, 5)`` table with columns ``gamma, W, P11, P12, P22`` along one path."""
    gamma = default_gamma() if gamma is None else np.asarray(gamma, dtype=float)
    if np.any(gamma <= 0.0):
        raise ValueError("gamma values must be positive")
    F = deformation_path(kind, gamma)
    W = strain_energy(model, F)
    P = stress(model, F)
    return np.column_stack([gamma, W, P[:, 0, 0], P[:, 0, 1], P[:, 1, 1]])


def stress_power(model, kind, gamma):
    """``sum_ij P_ij dF_ij/dgamma``, the exact derivative of ``W`` along the path."""
    P = stress(model, deformation_path(kind, gamma))
    return np.einsum("nij,nij->n", P, path_derivative(kind, gamma))


def write_curves(path, table):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for row in table:
            w.writerow([repr(float(v)) for v in row])


def read_curves(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def _rel_l2(a, b):
    den = np.linalg.norm(b)
    num = np.linalg.norm(a - b)
    if den == 0.0:
        return 0.0 if num == 0.0 else np.inf
    return float(num / den)


def compare_models(a, b, paths=PATHS, gamma=None):
    """Relative L2 discrepancy of ``a`` against reference ``b``.

    Returns ``{path: {"W": e, "P11": e, "P12": e, "P22": e}}``.
    """
    out = {}
    for kind in paths:
        ta = evaluate_curves(a, kind, gamma)
        tb = evaluate_curves(b, kind, gamma)
        out[kind] = {name: _rel_l2(ta[:, k], tb[:, k]) for k, name in enumerate(CURVE_COLUMNS) if k}
    return out
