"""Run configuration: TOML file sections merged with command-line overrides.

Example file::

    seed = 3

    [generation]
    n_nodes = 3000
    rho = 0.7

    [solver]
    n_starts = 100

    [denoise]
    budget = 16
"""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .datagen import GenerationConfig
from .denoise import DenoiseSettings
from .errors import SchemaError
from .solver import SolverConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SECTIONS = {"generation": GenerationConfig, "solver": SolverConfig, "denoise": DenoiseSettings}


@dataclass
class RunConfig:
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    denoise: DenoiseSettings = field(default_factory=DenoiseSettings)
    seed: int = 0

    def to_dict(self):
        return {"seed": self.seed, **{name: asdict(getattr(self, name)) for name in SECTIONS}}

    def with_seed(self, seed):
        """Propagate the global seed into every section."""
        self.seed = int(seed)
        self.generation.seed = self.seed
        self.solver.seed = self.seed
        self.denoise.seed = self.seed
        return self


def _build(cls, values, where):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise SchemaError(f"{where}: unknown key {unknown[0]!r}")
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from None


def parse_config(doc):
    """Validate a decoded TOML mapping; unknown sections or keys are errors."""
    doc = dict(doc)
    seed = doc.pop("seed", None)
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise SchemaError("config: seed must be an integer")
    sections = {}
    for name, values in doc.items():
        if name not in SECTIONS:
            raise SchemaError(f"config: unknown section {name!r}")
        if not isinstance(values, dict):
            raise SchemaError(f"config: [{name}] must be a table")
        sections[name] = values
    if seed is not None:
        # the global seed fills in sections that do not set their own
        for values in (sections.setdefault(name, {}) for name in SECTIONS):
            values.setdefault("seed", seed)
    cfg = RunConfig(**{name: _build(cls, sections.get(name, {}), f"config [{name}]") for name, cls in SECTIONS.items()})
    cfg.seed = 0 if seed is None else seed
    return cfg


def load_config(path=None):
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return parse_config(doc)


def override(section, **values):
    """Replace fields whose override is not ``None``; re-runs validation."""
    current = asdict(section)
    current.update({k: v for k, v in values.items() if v is not None})
    return _build(type(section), current, "command line")
