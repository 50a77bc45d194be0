"""Discover sparse hyperelastic strain-energy densities from displacement fields and reaction forces."""

__version__ = "0.1.0"

from .assembly import EquilibriumSystem, assemble, balance_residuals  # noqa: E402
from .datagen import BENCHMARKS, GenerationConfig, benchmark_model, forward_solve, generate, generate_mesh  # noqa: E402
from .denoise import DenoiseSettings, denoise_displacements, krr_fit, krr_predict, tune_hyperparameters  # noqa: E402
from .errors import DiscoveryFailed, HyperDiscoveryError  # noqa: E402
from .features import FeatureLibrary, MaterialModel, strain_energy, stress  # noqa: E402
from .mesh import DofPartition, LoadstepData, Mesh, load_dataset, save_dataset  # noqa: E402
from .modelio import ModelRecord, compare_models, evaluate_curves, format_model  # noqa: E402
from .pipeline import discover_from_data  # noqa: E402
from .solver import SolverConfig, admissibility_check, discover  # noqa: E402

__all__ = [
    "BENCHMARKS", "DenoiseSettings", "DiscoveryFailed", "DofPartition", "EquilibriumSystem",
    "FeatureLibrary", "GenerationConfig", "HyperDiscoveryError", "LoadstepData", "MaterialModel",
    "Mesh", "ModelRecord", "SolverConfig", "admissibility_check", "assemble", "balance_residuals",
    "benchmark_model", "compare_models", "denoise_displacements", "discover", "discover_from_data", "evaluate_curves",
    "forward_solve", "format_model", "generate", "generate_mesh", "krr_fit", "krr_predict",
    "load_dataset", "save_dataset", "strain_energy", "stress", "tune_hyperparameters",
]
