"""Synthetic observations, benchmark problems, rate sweeps and histories.

The 1D benchmark lives on (0, 10) with b = 1, v = x(10-x)/50 + 1, f = 10 and
three reference potentials (smooth cosine, triangle wave, indicator bumps);
the 2D benchmark lives on (0, 3)^2.  Sweeps couple the discretization to the
noise level through h = delta^(1/3) and tau = delta^(1/3) * T / 10, snapping
cell and step counts to integers and reporting the values actually used.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .expressions import parse_field_expr
from .fem import NodalField, Mesh, build_mesh, interpolate_nodal, mass_matrix, _mass_norm
from .forward import ProblemSpec, restrict_to_mesh, solve_forward
from .inverse import DataFloorError, ObservationData, reconstruct
from .sparselin import SolveFailure

logger = logging.getLogger(__name__)

SMOOTH_POTENTIAL = parse_field_expr("3+cos(0.6*pi*x)")
TRIANGLE_POTENTIAL = parse_field_expr("4-tri(x)")
INDICATOR_POTENTIAL = parse_field_expr("4-chi(2,4,x)-chi(6,8,x)")
SMOOTH_POTENTIAL_2D = parse_field_expr("3-cos(pi*x)*cos(pi*y)")

POTENTIALS_1D = {
    "smooth": SMOOTH_POTENTIAL,
    "triangle": TRIANGLE_POTENTIAL,
    "indicator": INDICATOR_POTENTIAL,
}


def benchmark_problem_1d(
    alpha: float = 0.5,
    T: float = 1.0,
    cells: int = 100,
    num_steps: int = 100,
    **overrides,
) -> ProblemSpec:
    """The 1D benchmark problem on (0, 10)."""
    return ProblemSpec(
        alpha=alpha,
        T=T,
        num_steps=num_steps,
        mesh=build_mesh((0.0, 10.0), cells, dim=1),
        v_expr=parse_field_expr("x*(10-x)/50+1"),
        b_expr=parse_field_expr("1"),
        f_expr=parse_field_expr("10"),
        M1=5.0,
        **overrides,
    )


def benchmark_problem_2d(
    alpha: float = 0.5,
    T: float = 1.0,
    cells: int = 30,
    num_steps: int = 100,
    **overrides,
) -> ProblemSpec:
    """The 2D benchmark problem on (0, 3)^2."""
    return ProblemSpec(
        alpha=alpha,
        T=T,
        num_steps=num_steps,
        mesh=build_mesh((0.0, 3.0), cells, dim=2),
        v_expr=parse_field_expr("x*(3-x)*(1/4+y*(3-y)/10)+1"),
        b_expr=parse_field_expr("x*(3-x)/4+1"),
        f_expr=parse_field_expr("10"),
        M1=5.0,
        **overrides,
    )


def _eval_at(func, coords: np.ndarray, dim: int) -> np.ndarray:
    x = coords[:, 0]
    raw = func(x) if dim == 1 else func(x, coords[:, 1])
    return np.array(np.broadcast_to(np.asarray(raw, dtype=float), x.shape))


def make_observation(
    spec: ProblemSpec,
    q_true,
    fine_factor: int,
    delta: float,
    seed: int | None = None,
    fine_step_factor: int | None = None,
) -> ObservationData:
    """Generate terminal data: fine forward solve, restriction, Gaussian noise.

    The fine mesh has fine_factor times the cells of the reconstruction mesh
    (nested by construction) and fine_step_factor times its steps (defaulting
    to fine_factor).  Noise delta * N(0,1) is added at interior nodes only, so
    the boundary trace of the data stays exact.
    """
    if fine_factor < 1:
        raise ValueError(f"fine_factor must be at least 1, got {fine_factor}")
    step_factor = fine_factor if fine_step_factor is None else fine_step_factor
    if step_factor < 1:
        raise ValueError(f"fine_step_factor must be at least 1, got {step_factor}")
    mesh = spec.mesh
    if fine_factor == 1:
        fine_mesh = mesh
    else:
        fine_mesh = build_mesh(mesh.bounds, mesh.cells_per_axis * fine_factor, mesh.dim)
    fine_spec = replace(spec, mesh=fine_mesh, num_steps=spec.num_steps * step_factor)
    q_fine = interpolate_nodal(q_true, fine_mesh)
    solution = solve_forward(fine_spec, q_fine)
    data = restrict_to_mesh(solution.terminal, mesh)
    values = data.values.copy()
    if delta > 0.0:
        rng = np.random.default_rng(spec.seed if seed is None else seed)
        noise = rng.standard_normal(mesh.interior_nodes.size)
        values[mesh.interior_nodes] += delta * noise
    low = float(values.min())
    if low < spec.M2_floor:
        raise DataFloorError(
            f"terminal data reaches {low:.3e} after noise, below the floor {spec.M2_floor:g}"
        )
    bb = mesh.boundary_nodes
    coords_b = mesh.node_coords[bb]
    psi_boundary = _eval_at(q_true, coords_b, mesh.dim) * _eval_at(
        spec.b_expr, coords_b, mesh.dim
    ) - _eval_at(spec.f_expr, coords_b, mesh.dim)
    return ObservationData(
        g_delta=NodalField(values, mesh),
        delta=delta,
        boundary_trace=values[bb].copy(),
        psi_boundary=psi_boundary,
    )


def relative_error(q_star: NodalField, q_true, mesh: Mesh) -> float:
    """Relative FE L2 error of a reconstruction against the true potential."""
    if not q_star.mesh.matches(mesh):
        raise ValueError("reconstruction is not aligned with the mesh")
    mass = mass_matrix(mesh)
    truth = interpolate_nodal(q_true, mesh).values
    denom = _mass_norm(truth, mass)
    if denom == 0.0:
        raise ValueError("true potential has zero norm")
    return _mass_norm(q_star.values - truth, mass) / denom


@dataclass(frozen=True)
class RateRow:
    delta: float
    h: float
    tau: float
    alpha: float
    e_q: float
    iterations: int
    runtime_s: float
    failure: str | None = None


@dataclass(frozen=True)
class RateTable:
    rows: list
    slopes: dict

    def slope(self, alpha: float) -> float:
        return self.slopes[alpha]


def _auto_fine_factor(count: int, dim: int) -> int:
    # 1D data generation targets roughly 1000 cells/steps, mirroring the
    # benchmark reference resolution; 2D uses a flat factor of 10.
    if dim == 1:
        return max(1, round(1000 / count))
    return 10


def rate_sweep(
    template: ProblemSpec,
    q_true,
    deltas,
    alphas,
    fine_factor: int | None = None,
    fine_step_factor: int | None = None,
    base_seed: int | None = None,
) -> RateTable:
    """Reconstruction error against noise level under the coupled refinement.

    Per (alpha, delta): cells = round((b-a)/delta^(1/3)), steps =
    round(10/delta^(1/3)), data from make_observation, then reconstruct and
    record the relative error.  Failed rows are kept with e_q = nan.  The
    returned table carries one fitted log-log slope per alpha.
    """
    deltas = [float(d) for d in deltas]
    if any(d <= 0 for d in deltas) or any(
        d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])
    ):
        raise ValueError("noise levels must be positive and strictly descending")
    a, b = template.mesh.bounds
    dim = template.mesh.dim
    rows = []
    seed0 = template.seed if base_seed is None else base_seed
    for alpha in alphas:
        for delta in deltas:
            index = len(rows)
            width = delta ** (1.0 / 3.0)
            cells = max(2, round((b - a) / width))
            steps = max(1, round(10.0 / width))
            mesh = build_mesh((a, b), cells, dim)
            spec = replace(template, alpha=alpha, mesh=mesh, num_steps=steps)
            factor = _auto_fine_factor(cells, dim) if fine_factor is None else fine_factor
            step_factor = (
                _auto_fine_factor(steps, dim) if fine_step_factor is None else fine_step_factor
            )
            start = time.perf_counter()
            try:
                obs = make_observation(
                    spec, q_true, factor, delta, seed=seed0 + index, fine_step_factor=step_factor
                )
                result = reconstruct(spec, obs)
                e_q = relative_error(result.q_star, q_true, mesh)
                rows.append(
                    RateRow(
                        delta, mesh.h, spec.tau, alpha, e_q,
                        result.iterations, time.perf_counter() - start,
                    )
                )
            except (SolveFailure, DataFloorError) as exc:
                logger.warning("sweep row (alpha=%g, delta=%g) failed: %s", alpha, delta, exc)
                rows.append(
                    RateRow(
                        delta, mesh.h, spec.tau, alpha, float("nan"),
                        0, time.perf_counter() - start, str(exc),
                    )
                )
            logger.info(
                "sweep row alpha=%g delta=%g: e_q=%.4e after %d iterations (%.1fs)",
                alpha, delta, rows[-1].e_q, rows[-1].iterations, rows[-1].runtime_s,
            )
    slopes = {}
    for alpha in alphas:
        pts = [(r.delta, r.e_q) for r in rows if r.alpha == alpha and math.isfinite(r.e_q)]
        if len(pts) >= 2:
            log_d = np.log([p[0] for p in pts])
            log_e = np.log([p[1] for p in pts])
            slopes[alpha] = float(np.polyfit(log_d, log_e, 1)[0])
        else:
            slopes[alpha] = float("nan")
    return RateTable(rows, slopes)


def convergence_history(
    spec: ProblemSpec,
    q_true,
    delta: float,
    q0_override=None,
    fine_factor: int = 1,
    fine_step_factor: int | None = None,
    seed: int | None = None,
) -> list:
    """Per-iteration absolute errors ||q_k - q_true|| as (k, e_k) pairs."""
    obs = make_observation(
        spec, q_true, fine_factor, delta, seed=seed, fine_step_factor=fine_step_factor
    )
    result = reconstruct(spec, obs, q_true=q_true, q0=q0_override)
    return list(enumerate(float(e) for e in result.errors_vs_truth))


def write_field_csv(path, field: NodalField) -> None:
    """Dump a nodal field as node_index,x[,y],value with full precision."""
    mesh = field.mesh
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["node_index", "x", "value"] if mesh.dim == 1 else ["node_index", "x", "y", "value"])
        for i in range(mesh.n_nodes):
            coords = [f"{c:.17g}" for c in mesh.node_coords[i]]
            writer.writerow([i, *coords, f"{field.values[i]:.17g}"])


def read_field_csv(path, mesh: Mesh) -> NodalField:
    """Read a field dump and check it against the expected mesh."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        expected = 2 + mesh.dim
        if header is None or len(header) != expected:
            raise ValueError(f"field dump must have {expected} columns for a {mesh.dim}D mesh")
        values = np.full(mesh.n_nodes, np.nan)
        count = 0
        for row in reader:
            if not row:
                continue
            index = int(row[0])
            if not 0 <= index < mesh.n_nodes:
                raise ValueError(f"node index {index} outside the mesh (0..{mesh.n_nodes - 1})")
            coords = np.array([float(c) for c in row[1:-1]])
            if not np.allclose(coords, mesh.node_coords[index], rtol=1e-9, atol=1e-12):
                raise ValueError(f"node {index} coordinates do not match the mesh")
            values[index] = float(row[-1])
            count += 1
    if count != mesh.n_nodes or not np.all(np.isfinite(values)):
        raise ValueError(f"field dump covers {count} of {mesh.n_nodes} nodes")
    return NodalField(values, mesh)


def write_history_csv(path, errors, increments) -> None:
    """Dump k,e_k,increment rows; increment at k is ||q_k - q_{k-1}||."""
    n_rows = max(len(increments) + 1, len(errors) if errors is not None else 0)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["k", "e_k", "increment"])
        for k in range(n_rows):
            e_k = errors[k] if errors is not None and k < len(errors) else float("nan")
            inc = increments[k - 1] if 1 <= k <= len(increments) else float("nan")
            writer.writerow([k, f"{e_k:.17g}", f"{inc:.17g}"])


def write_sweep_csv(path, table: RateTable) -> None:
    """Dump delta,h,tau,alpha,e_q,iterations,runtime_s rows."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["delta", "h", "tau", "alpha", "e_q", "iterations", "runtime_s"])
        for r in table.rows:
            writer.writerow(
                [
                    f"{r.delta:.17g}", f"{r.h:.17g}", f"{r.tau:.17g}", f"{r.alpha:.17g}",
                    f"{r.e_q:.17g}", r.iterations, f"{r.runtime_s:.17g}",
                ]
            )
