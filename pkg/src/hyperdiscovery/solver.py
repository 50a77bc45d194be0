"""Sparse regression of the material coefficients.

The objective is

    |A_free t - b_free|^2 + lambda_r |A_fix t - b_fix|^2 + lambda_p sum |t_i|^p

handled through its normal-equation form (:class:`EquilibriumSystem`).
The l_p term is treated by the reweighted fixed-point iteration

    t <- (A_eqb + p lambda_p / 2 diag(|t_prev|^(p-2)))^-1 b_eqb

run from many random starts.  The best start is thresholded and re-fit
without penalty; if the result is not physically admissible the penalty
grows by ``kappa`` and everything is repeated.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from .assembly import solve_normal
from .errors import AllStartsFailed, DiscoveryFailed, EmptyModel, NonConverged
from .features import MaterialModel, strain_energy
from .kinematics import PATHS, deformation_path

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    p: float = 0.25
    lambda_p0: float = 0.01
    kappa: float = 5.0
    n_starts: int = 200
    max_fp_iters: int = 200
    eps_tol: float = 1e-6
    eps_conv: float = 1e-3
    threshold: float = 0.01
    n_gamma: int = 75
    gamma_min: float = 1e-3
    gamma_max: float = 1e9
    lambda_r: float = 100.0
    max_escalations: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")
        if self.kappa <= 1.0:
            raise ValueError("kappa must exceed 1")
        for name in ("eps_tol", "eps_conv", "threshold", "lambda_p0", "gamma_max"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")

    def to_dict(self):
        return asdict(self)


def objective(system, theta, lambda_p, p):
    """Full penalized objective, recomputed from the reduced system."""
    theta = np.asarray(theta, dtype=float)
    return system.residual(theta) + lambda_p * float(np.sum(np.abs(theta) ** p * (theta != 0.0)))


def _reweighted_solve(A, b, s, c):
    # (A + c diag(|t|^(p-2))) x = b rewritten with x = S y, S = |t|^((2-p)/2),
    # which stays well conditioned when some weights blow up
    M = (s[:, None] * A * s[None, :]) + c * np.eye(len(s))
    try:
        y = scipy.linalg.cho_solve(scipy.linalg.cho_factor(M), s * b)
    except np.linalg.LinAlgError:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            y = scipy.linalg.solve(M, s * b, assume_a="sym")
    return s * y


def fixed_point_solve(A, b, lambda_p, p, theta0, eps_tol=1e-6, eps_conv=1e-3, max_iter=200):
    """Reweighted fixed-point iteration for the l_p-penalized normal equations.

    Features whose coefficient drops below ``eps_tol`` in magnitude are
    removed for good; their entries are exactly zero in the result.

    Raises
    ------
    NonConverged
        If ``max_iter`` iterations pass without the sup-norm step falling
        below ``eps_conv``, or if a linear solve fails.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    theta = np.array(theta0, dtype=float)
    theta[np.abs(theta) < eps_tol] = 0.0
    active = np.flatnonzero(theta)
    c = 0.5 * p * lambda_p
    for it in range(1, max_iter + 1):
        if active.size == 0:
            return theta, it
        Aa = A[np.ix_(active, active)]
        ba = b[active]
        try:
            if lambda_p == 0.0:
                new_a = solve_normal(Aa, ba)
            else:
                s = np.abs(theta[active]) ** (1.0 - 0.5 * p)
                new_a = _reweighted_solve(Aa, ba, s, c)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NonConverged(f"linear solve failed at iteration {it}: {exc}") from exc
        if not np.all(np.isfinite(new_a)):
            raise NonConverged(f"non-finite iterate at iteration {it}")
        new = np.zeros_like(theta)
        new[active] = new_a
        new[np.abs(new) < eps_tol] = 0.0
        step = np.abs(new - theta).max()
        theta = new
        active = np.flatnonzero(theta)
        if step < eps_conv:
            return theta, it
    raise NonConverged(f"no convergence within {max_iter} fixed-point iterations")


@dataclass
class StartResult:
    index: int
    converged: bool
    objective: float = np.inf
    iterations: int = 0
    n_active: int = 0


def initial_guess(seed, index, n):
    """Start ``index`` draws from its own stream; entries uniform on (0, 1]."""
    rng = np.random.default_rng([seed, index])
    return 1.0 - rng.random(n)


def multi_start(system, lambda_p, config, return_starts=False):
    """Run ``config.n_starts`` fixed-point solves; keep the lowest objective.

    Ties go to the lowest start index.  Raises :class:`AllStartsFailed` if
    no start converges.
    """
    n = system.n_features
    best = None
    best_obj = np.inf
    starts = []
    for k in range(config.n_starts):
        theta0 = initial_guess(config.seed, k, n)
        try:
            theta, iters = fixed_point_solve(
                system.A, system.b, lambda_p, config.p, theta0,
                config.eps_tol, config.eps_conv, config.max_fp_iters,
            )
        except NonConverged:
            starts.append(StartResult(k, False))
            continue
        obj = objective(system, theta, lambda_p, config.p)
        starts.append(StartResult(k, True, obj, iters, int(np.count_nonzero(theta))))
        if obj < best_obj:
            best, best_obj = theta, obj
    if best is None:
        raise AllStartsFailed(f"none of {config.n_starts} starts converged for lambda_p={lambda_p:g}")
    return (best, starts) if return_starts else best


def threshold_loop(system, theta, threshold=0.01, return_passes=False):
    """Zero coefficients below ``threshold`` and re-fit the survivors, until stable.

    Returns a :class:`MaterialModel` over ``system.library``.
    """
    theta = np.asarray(theta, dtype=float)
    active = np.abs(theta) >= threshold
    passes = 0
    while True:
        passes += 1
        if not active.any():
            raise EmptyModel("every coefficient fell below the threshold")
        idx = np.flatnonzero(active)
        refit = solve_normal(system.A[np.ix_(idx, idx)], system.b[idx])
        theta = np.zeros(system.n_features)
        theta[idx] = refit
        below = np.abs(refit) < threshold
        if not below.any():
            break
        active[idx[below]] = False
    model = MaterialModel(system.library, theta)
    return (model, passes) if return_passes else model


@dataclass
class Verdict:
    passed: bool
    reason: str = ""

    def __bool__(self):
        return self.passed


def gamma_samples(config):
    return np.logspace(np.log10(config.gamma_min), np.log10(config.gamma_max), config.n_gamma)


def admissibility_check(model, quadrature_F=None, config=None):
    """Empirical physical admissibility of a strain-energy density.

    Fails if ``W`` is negative at any of the supplied deformation gradients
    (e.g. every quadrature point of every load step), or if along any of
    the six canonical paths ``W`` is non-finite, non-positive or not
    strictly increasing over the sampled ``gamma``.
    """
    config = config or SolverConfig()
    if quadrature_F is not None:
        Fs = [np.asarray(F, dtype=float).reshape(-1, 2, 2) for F in (
            quadrature_F if isinstance(quadrature_F, (list, tuple)) else [quadrature_F])]
        F = np.concatenate(Fs)
        det = F[:, 0, 0] * F[:, 1, 1] - F[:, 0, 1] * F[:, 1, 0]
        F = F[det > 0.0]
        if len(F):
            with np.errstate(all="ignore"):
                W = strain_energy(model, F)
            if not np.all(np.isfinite(W)):
                return Verdict(False, "non-finite W at a quadrature point")
            tol = -1e-12 * max(1.0, float(np.abs(W).max()))
            if W.min() < tol:
                return Verdict(False, f"W = {W.min():.3e} < 0 at a quadrature point")
    gammas = gamma_samples(config)
    for kind in PATHS:
        with np.errstate(all="ignore"):
            W = strain_energy(model, deformation_path(kind, gammas))
        if not np.all(np.isfinite(W)):
            return Verdict(False, f"non-finite W along {kind}")
        if W[0] <= 0.0:
            return Verdict(False, f"W <= 0 along {kind} at gamma={gammas[0]:.3g}")
        bad = np.flatnonzero(np.diff(W) <= 0.0)
        if bad.size:
            return Verdict(False, f"W not increasing along {kind} at gamma={gammas[bad[0] + 1]:.3g}")
    return Verdict(True, "")


@dataclass
class SolveReport:
    model: MaterialModel
    lambda_p: float
    n_escalations: int
    objective: float
    trail: list = field(default_factory=list)
    starts: list = field(default_factory=list, repr=False)

    def to_document(self):
        return {
            "model": self.model.terms(),
            "features": self.model.library.names,
            "theta": self.model.theta.tolist(),
            "lambda_p": self.lambda_p,
            "n_escalations": self.n_escalations,
            "objective": self.objective,
            "trail": self.trail,
            "starts": [asdict(s) for s in self.starts],
        }


def discover(system, config=None, quadrature_F=None):
    """Penalty escalation around multi-start, thresholding and admissibility.

    ``quadrature_F`` are the observed deformation gradients used for the
    ``W >= 0`` check.  Returns a :class:`SolveReport` whose model passed
    :func:`admissibility_check`; raises :class:`DiscoveryFailed` otherwise.
    """
    config = config or SolverConfig()
    lam = config.lambda_p0
    trail = []
    for esc in range(config.max_escalations + 1):
        entry = {"lambda_p": lam}
        try:
            theta, starts = multi_start(system, lam, config, return_starts=True)
        except AllStartsFailed as exc:
            entry.update(stage="multi_start", passed=False, reason=str(exc))
            trail.append(entry)
            log.info("lambda_p=%g: %s", lam, exc)
            lam *= config.kappa
            continue
        entry["n_converged"] = sum(s.converged for s in starts)
        entry["regularized"] = {system.library[k].name: float(theta[k]) for k in np.flatnonzero(theta)}
        try:
            model = threshold_loop(system, theta, config.threshold)
        except EmptyModel as exc:
            entry.update(stage="threshold", passed=False, reason=str(exc))
            trail.append(entry)
            raise DiscoveryFailed(f"lambda_p={lam:g}: {exc}", trail) from exc
        verdict = admissibility_check(model, quadrature_F, config)
        entry.update(stage="admissibility", passed=verdict.passed, reason=verdict.reason, model=model.terms())
        trail.append(entry)
        log.info("lambda_p=%g: %s %s", lam, "admissible" if verdict else "rejected", verdict.reason)
        if verdict:
            return SolveReport(
                model=model,
                lambda_p=lam,
                n_escalations=esc,
                objective=objective(system, model.theta, lam, config.p),
                trail=trail,
                starts=starts,
            )
        lam *= config.kappa
    raise DiscoveryFailed(f"no admissible model after {config.max_escalations} escalations", trail)
