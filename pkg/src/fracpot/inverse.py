"""Potential reconstruction from terminal data by a clamped fixed-point map.

The map sends q to clamp((f - dbar^alpha u^N(q) + psi_h) / g_delta), where
psi_h is a data-regularized discrete Laplacian of the observation.  Iterating
from the upper-bound initial guess clamp((f + psi_h) / g_delta) converges
linearly once the final time is large enough.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .fem import NodalField, Mesh, interpolate_nodal, mass_matrix, _mass_norm, assemble_operators
from .forward import ProblemSpec, solve_forward
from .sparselin import SolveFailure, solve_spd

logger = logging.getLogger(__name__)


class DataFloorError(RuntimeError):
    """Terminal data dipped below the admissible positive floor."""


@dataclass(frozen=True)
class ObservationData:
    """Noisy terminal data on the reconstruction mesh.

    boundary_trace holds the (exact) data values at boundary nodes and
    psi_boundary the known boundary trace q*b - f of the data Laplacian.
    """

    g_delta: NodalField
    delta: float
    boundary_trace: np.ndarray
    psi_boundary: np.ndarray

    def __post_init__(self) -> None:
        bb = self.g_delta.mesh.boundary_nodes
        trace = np.asarray(self.boundary_trace, dtype=float)
        psi_b = np.asarray(self.psi_boundary, dtype=float)
        object.__setattr__(self, "boundary_trace", trace)
        object.__setattr__(self, "psi_boundary", psi_b)
        if self.delta < 0.0:
            raise ValueError(f"noise level must be nonnegative, got {self.delta}")
        if trace.shape != bb.shape or psi_b.shape != bb.shape:
            raise ValueError("boundary arrays must carry one value per boundary node")
        if not np.array_equal(self.g_delta.values[bb], trace):
            raise ValueError("terminal data must match the prescribed boundary trace exactly")


@dataclass(frozen=True)
class ReconstructionResult:
    q_star: NodalField
    iterations: int
    increments: np.ndarray
    errors_vs_truth: np.ndarray | None
    converged: bool


def compute_psi_h(
    mesh: Mesh,
    g_delta: NodalField,
    psi_boundary: np.ndarray,
    lin_tol: float = 1e-12,
) -> NodalField:
    """Data-regularized discrete Laplacian of the terminal observation.

    Interior values solve the mass system (psi, phi) = -(grad I_h g, grad phi)
    over interior test functions; boundary values are prescribed.
    """
    if not g_delta.mesh.matches(mesh):
        raise ValueError("data is not aligned with the mesh")
    ii, bb = mesh.interior_nodes, mesh.boundary_nodes
    psi_b = np.asarray(psi_boundary, dtype=float)
    if psi_b.shape != bb.shape:
        raise ValueError("psi_boundary must carry one value per boundary node")
    mass, stiff, _ = assemble_operators(mesh, NodalField(np.zeros(mesh.n_nodes), mesh))
    rhs = -(stiff @ g_delta.values)[ii] - mass[np.ix_(ii, bb)] @ psi_b
    interior, report = solve_spd(mass[np.ix_(ii, ii)].tocsr(), rhs, lin_tol)
    if not report.converged:
        raise SolveFailure(
            f"mass solve for the data Laplacian stalled at residual {report.final_residual:.3e}"
        )
    full = np.empty(mesh.n_nodes)
    full[ii] = interior
    full[bb] = psi_b
    return NodalField(full, mesh)


def clamp_potential(field: NodalField, m1: float) -> NodalField:
    """Componentwise clamp onto the admissible range [0, M1]."""
    if m1 <= 0.0:
        raise ValueError(f"upper bound must be positive, got {m1}")
    return NodalField(np.clip(field.values, 0.0, m1), field.mesh)


def fixed_point_update(
    f_values: np.ndarray,
    frac_deriv: np.ndarray,
    psi_values: np.ndarray,
    data_values: np.ndarray,
    m1: float,
) -> np.ndarray:
    """Nodal quotient clamp((f - dbar^alpha u^N + psi_h) / g_delta)."""
    return np.clip((f_values - frac_deriv + psi_values) / data_values, 0.0, m1)


def _check_floor(obs: ObservationData, spec: ProblemSpec) -> None:
    low = float(obs.g_delta.values.min())
    if low < spec.M2_floor:
        raise DataFloorError(
            f"terminal data reaches {low:.3e}, below the admissible floor {spec.M2_floor:g}"
        )


def apply_K(
    spec: ProblemSpec, q: NodalField, obs: ObservationData, psi_h: NodalField
) -> NodalField:
    """One application of the clamped fixed-point map."""
    _check_floor(obs, spec)
    forward = solve_forward(spec, q)
    f_nodes = interpolate_nodal(spec.f_expr, spec.mesh).values
    updated = fixed_point_update(
        f_nodes,
        forward.frac_deriv_terminal.values,
        psi_h.values,
        obs.g_delta.values,
        spec.M1,
    )
    return NodalField(updated, spec.mesh)


def _initial_guess(spec: ProblemSpec, q0, f_nodes, psi_h, obs) -> np.ndarray:
    if q0 is None:
        return fixed_point_update(f_nodes, 0.0, psi_h.values, obs.g_delta.values, spec.M1)
    if isinstance(q0, NodalField):
        if not q0.mesh.matches(spec.mesh):
            raise ValueError("initial guess is not aligned with the problem mesh")
        return np.clip(q0.values, 0.0, spec.M1)
    return np.clip(interpolate_nodal(q0, spec.mesh).values, 0.0, spec.M1)


def reconstruct(
    spec: ProblemSpec,
    obs: ObservationData,
    q_true=None,
    q0=None,
) -> ReconstructionResult:
    """Fixed-point iteration from the upper-bound start until the increment
    drops below fp_tol or max_iter is reached.

    When q_true (an expression or callable) is supplied, the absolute error
    ||q_k - I_h q_true|| is traced per iteration, including the initial guess.
    A custom q0 (field or expression) replaces the default upper-bound start.
    """
    mesh = spec.mesh
    _check_floor(obs, spec)
    if not obs.g_delta.mesh.matches(mesh):
        raise ValueError("observation is not aligned with the problem mesh")
    psi_h = compute_psi_h(mesh, obs.g_delta, obs.psi_boundary, spec.lin_tol)
    f_nodes = interpolate_nodal(spec.f_expr, mesh).values
    mass = mass_matrix(mesh)
    q_vals = _initial_guess(spec, q0, f_nodes, psi_h, obs)
    truth = interpolate_nodal(q_true, mesh).values if q_true is not None else None
    errors = [_mass_norm(q_vals - truth, mass)] if truth is not None else None

    increments = []
    converged = False
    for k in range(spec.max_iter):
        forward = solve_forward(spec, NodalField(q_vals, mesh))
        q_next = fixed_point_update(
            f_nodes,
            forward.frac_deriv_terminal.values,
            psi_h.values,
            obs.g_delta.values,
            spec.M1,
        )
        increment = _mass_norm(q_next - q_vals, mass)
        increments.append(increment)
        uphill = float(np.mean(q_next > q_vals + mesh.h))
        q_vals = q_next
        if truth is not None:
            errors.append(_mass_norm(q_vals - truth, mass))
        logger.debug(
            "iteration %d: increment %.3e, uphill fraction %.3f", k + 1, increment, uphill
        )
        if increment <= spec.fp_tol:
            converged = True
            break
    return ReconstructionResult(
        q_star=NodalField(q_vals, mesh),
        iterations=len(increments),
        increments=np.asarray(increments),
        errors_vs_truth=np.asarray(errors) if errors is not None else None,
        converged=converged,
    )
