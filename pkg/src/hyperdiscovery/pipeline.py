"""Dataset in, material model out: optional denoising, assembly, sparse regression."""
from __future__ import annotations

from .assembly import assemble
from .denoise import denoise_displacements
from .features import FeatureLibrary
from .kinematics import deformation_gradient
from .solver import SolverConfig, discover


def discover_from_data(mesh, partition, data, solver_config=None, denoise_settings=None, exclude_log=False):
    """Run the discovery pipeline on one dataset and return the :class:`SolveReport`.

    ``denoise_settings=None`` skips denoising.  The ``W >= 0`` admissibility
    test uses the deformation gradients of every load step.
    """
    solver_config = solver_config or SolverConfig()
    if denoise_settings is not None:
        data = denoise_displacements(mesh, data, denoise_settings)
    library = FeatureLibrary.default(include_log=not exclude_log)
    system = assemble(mesh, partition, data, library, solver_config.lambda_r)
    quadrature_F = [deformation_gradient(mesh, u) for u in data.displacements]
    return discover(system, solver_config, quadrature_F)
