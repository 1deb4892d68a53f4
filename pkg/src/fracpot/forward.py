"""Fully discrete solver for the (sub)diffusion problem with a potential.

The scheme marches dbar^alpha u^n - Delta_h u^n + q u^n = f in weak form:
at every step the interior system (b_0 tau^{-alpha} M + S + M_q) u^n = rhs
is solved by CG, where the right-hand side carries the convolution-quadrature
history.  Boundary nodes are pinned to the interpolated boundary data and the
system matrix is assembled once per potential.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cq import cq_weights, discrete_caputo
from .fem import (
    Mesh,
    NodalField,
    assemble_load,
    assemble_operators,
    interpolate_nodal,
)
from .sparselin import SolveFailure, solve_spd

_BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class ProblemSpec:
    """Complete description of one forward/inverse problem instance.

    v_expr, b_expr and f_expr are callables of the space variables (a parsed
    field expression or any vectorized function); v must agree with b at the
    boundary nodes.  M1 bounds the admissible potential, M2_floor guards the
    division by terminal data, and the tolerances control the linear solver
    and the fixed-point iteration respectively.
    """

    alpha: float
    T: float
    num_steps: int
    mesh: Mesh
    v_expr: Callable
    b_expr: Callable
    f_expr: Callable
    M1: float
    M2_floor: float = 1e-6
    lin_tol: float = 1e-12
    fp_tol: float = 1e-10
    max_iter: int = 50_000
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.T <= 0.0:
            raise ValueError(f"final time must be positive, got {self.T}")
        if self.num_steps < 1:
            raise ValueError(f"need at least one time step, got {self.num_steps}")
        if self.M1 <= 0.0:
            raise ValueError(f"potential bound M1 must be positive, got {self.M1}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        bb = self.mesh.boundary_nodes
        v_b = interpolate_nodal(self.v_expr, self.mesh).values[bb]
        b_b = interpolate_nodal(self.b_expr, self.mesh).values[bb]
        if not np.allclose(v_b, b_b, rtol=1e-12, atol=1e-12):
            raise ValueError("initial value must match the boundary value on the boundary")

    @property
    def tau(self) -> float:
        return self.T / self.num_steps


@dataclass(frozen=True)
class ForwardSolution:
    """Terminal state, its discrete fractional time derivative, and history.

    `history` has shape (num_steps + 1, n_nodes), row n holding u^n.
    """

    terminal: NodalField
    frac_deriv_terminal: NodalField
    history: np.ndarray


def _check_potential(spec: ProblemSpec, q: NodalField) -> None:
    if not q.mesh.matches(spec.mesh):
        raise ValueError("potential is not aligned with the problem mesh")
    if q.values.min() < -_BOUND_SLACK or q.values.max() > spec.M1 + _BOUND_SLACK:
        raise ValueError(
            f"potential values [{q.values.min():.3g}, {q.values.max():.3g}] "
            f"leave the admissible range [0, {spec.M1:g}]"
        )


def solve_forward(spec: ProblemSpec, q: NodalField) -> ForwardSolution:
    """March the fully discrete scheme to the final time for a given potential."""
    _check_potential(spec, q)
    mesh = spec.mesh
    n_steps = spec.num_steps
    tau = spec.tau
    scale = tau ** (-spec.alpha)
    wts = cq_weights(spec.alpha, n_steps, tau)
    w = wts.weights
    partial = np.cumsum(w)

    mass, stiff, wmass = assemble_operators(mesh, q)
    load = assemble_load(mesh, spec.f_expr)
    b_field = interpolate_nodal(spec.b_expr, mesh)
    u0 = interpolate_nodal(spec.v_expr, mesh).values.copy()

    ii, bb = mesh.interior_nodes, mesh.boundary_nodes
    u0[bb] = b_field.values[bb]
    system = (scale * w[0]) * mass + stiff + wmass
    system_ii = system[np.ix_(ii, ii)].tocsr()
    boundary_coupling = system[np.ix_(ii, bb)] @ b_field.values[bb]
    mass_int = mass[ii]
    rhs_base = load[ii] - boundary_coupling

    history = np.empty((n_steps + 1, mesh.n_nodes))
    history[0] = u0
    x = u0[ii].copy()
    for n in range(1, n_steps + 1):
        past = w[n:0:-1] @ history[:n] - partial[n] * history[0]
        rhs = rhs_base - scale * (mass_int @ past)
        x, report = solve_spd(system_ii, rhs, spec.lin_tol, x0=x)
        if not report.converged:
            raise SolveFailure(
                f"time step {n}/{n_steps}: CG stalled at relative residual "
                f"{report.final_residual:.3e} (target {spec.lin_tol:g})"
            )
        history[n, ii] = x
        history[n, bb] = b_field.values[bb]
    terminal = NodalField(history[-1].copy(), mesh)
    frac = discrete_caputo(history, wts, n_steps)
    return ForwardSolution(terminal, NodalField(frac, mesh), history)


def restrict_to_mesh(field: NodalField, coarse: Mesh) -> NodalField:
    """Sample a fine-mesh field at the nodes of a nested coarser mesh."""
    fine = field.mesh
    if fine.dim != coarse.dim or fine.bounds != coarse.bounds:
        raise ValueError("meshes cover different domains")
    factor, remainder = divmod(fine.cells_per_axis, coarse.cells_per_axis)
    if remainder != 0:
        raise ValueError(
            f"meshes are not nested: {fine.cells_per_axis} cells over {coarse.cells_per_axis}"
        )
    axis_idx = factor * np.arange(coarse.cells_per_axis + 1)
    if coarse.dim == 1:
        idx = axis_idx
    else:
        idx = (axis_idx[:, None] * (fine.cells_per_axis + 1) + axis_idx[None, :]).ravel()
    return NodalField(field.values[idx].copy(), coarse)
