"""Semi-implicit L² gradient flow of the total energy.

Each step treats the constant-coefficient fourth-order part of the
bending gradient implicitly and everything else explicitly:

    rhs = u − τ·(grad_w_eps(u) − γ Δ²u + area-penalty gradient
                 + ε^{−κ}·connectedness subgradient),
    (I + τ γ Δ²) u⁺ = rhs,        γ = 2ε/c0,

with u⁺ clamped to −1 outside the domain. The implicit operator is
symmetric positive definite and independent of u, so it is assembled
once (in the shifted variable w = u + 1, which zeroes the clamp) and
solved by preconditioned conjugate gradients. Δ² is realized as
laplacian∘laplacian, matching the explicit side exactly, so u ≡ −1 is a
fixed point to round-off.

The connectedness subgradient is recomputed every `geodesic_stride`
steps and held in between. Energy reports are refreshed on the logging
stride; the run stops at max_steps, on stagnation (per-step |ΔE| below
1e−12·|E| sustained over 100 steps), or when a caller-supplied stop
condition fires.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import (
    EnergyReport,
    ModelParams,
    area_penalty,
    grad_w_eps,
    total_energy,
)
from .errors import DivergenceError, SolverError
from .grid import DomainMask, Grid2D, ScalarField, laplacian
from .topology import BandPenalty

STAGNATION_REL = 1e-12
STAGNATION_SPAN = 100


@dataclass(frozen=True)
class FlowConfig:
    """Time step, stopping, solver, and output cadences.

    tau = 0 is allowed at construction so the identity behavior of the
    implicit solve stays testable; time stepping itself requires tau > 0.
    """

    tau: float
    max_steps: int = 1000
    solver_tol: float = 1e-8
    solver_max_iter: int = 500
    geodesic_stride: int = 1
    snapshot_stride: int = 1000
    energy_log_stride: int = 10

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")
        if self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")
        if not self.solver_tol > 0:
            raise ValueError("solver_tol must be positive")
        if self.solver_max_iter < 1:
            raise ValueError("solver_max_iter must be at least 1")
        for name in ("geodesic_stride", "snapshot_stride", "energy_log_stride"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class FlowState:
    u: ScalarField
    t: float = 0.0
    step: int = 0
    report: EnergyReport | None = None


def _emit(sinks, method, *args):
    for s in sinks:
        fn = getattr(s, method, None)
        if fn is not None:
            fn(*args)


class FlowDriver:
    """Owns the assembled implicit operator and runs the time loop."""

    def __init__(
        self,
        grid: Grid2D,
        mask: DomainMask,
        params: ModelParams,
        cfg: FlowConfig,
        bands: BandPenalty,
        penalty_on: bool = True,
        subgradient_mode: str = "full",
    ):
        self.grid = grid
        self.mask = mask
        self.params = params
        self.cfg = cfg
        self.bands = bands
        self.penalty_on = penalty_on
        self.subgradient_mode = subgradient_mode
        self.gamma = 2.0 * params.eps / params.c0
        self._inside_flat = np.flatnonzero(mask.inside.ravel())
        self._assemble_operator()
        self._csub: np.ndarray | None = None

    # ---------------------------------------------------------- operator

    def _assemble_operator(self):
        """B = I + τγA² over inside cells, A = clamped 5-point Laplacian.

        In w = u + 1 the −1 clamp outside becomes w = 0, so outside
        neighbors simply drop out; stencil legs past the array edge
        replicate the center (matching the ghost convention of
        grid.laplacian), which shows up as a reduced diagonal.
        """
        ny, nx = self.grid.shape
        h2 = self.grid.h * self.grid.h
        inside = self.mask.inside
        n = self._inside_flat.size
        cell_of = -np.ones(ny * nx, dtype=np.int64)
        cell_of[self._inside_flat] = np.arange(n)

        rows, cols, vals = [], [], []
        jj, ii = np.divmod(self._inside_flat, nx)
        deg = np.zeros(n)
        for dj, di in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            j2, i2 = jj + dj, ii + di
            in_array = (j2 >= 0) & (j2 < ny) & (i2 >= 0) & (i2 < nx)
            deg += in_array  # ghost legs replicate the center: no coupling
            q = j2[in_array] * nx + i2[in_array]
            is_inside = inside.ravel()[q]
            rows.append(np.flatnonzero(in_array)[is_inside])
            cols.append(cell_of[q[is_inside]])
            vals.append(np.full(int(np.count_nonzero(is_inside)), 1.0 / h2))
        rows.append(np.arange(n))
        cols.append(np.arange(n))
        vals.append(-deg / h2)
        A = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )
        self.A = A
        tau_gamma = self.cfg.tau * self.gamma
        if tau_gamma > 0.0:
            B = (sp.identity(n, format="csr") + tau_gamma * (A @ A)).tocsc()
            self.B = B
            self._lu = spla.splu(B)
            self._precond = spla.LinearOperator(B.shape, matvec=self._lu.solve)
        else:
            self.B = sp.identity(n, format="csc")
            self._lu = None
            self._precond = None

    def implicit_solve(self, rhs: ScalarField) -> ScalarField:
        """Solve (I + τγΔ²)x = rhs on inside cells, x = −1 clamped outside."""
        b = rhs.values.ravel()[self._inside_flat] + 1.0
        if self._lu is None:  # τ = 0: identity system
            w = b
        else:
            w, info = spla.cg(
                self.B,
                b,
                rtol=self.cfg.solver_tol,
                atol=0.0,
                maxiter=self.cfg.solver_max_iter,
                M=self._precond,
            )
            if info != 0:
                res = np.linalg.norm(self.B @ w - b) / max(np.linalg.norm(b), 1e-300)
                raise SolverError(
                    f"implicit solve stalled at relative residual {res:.3e}"
                    f" after {self.cfg.solver_max_iter} iterations",
                    residual=res,
                    iterations=self.cfg.solver_max_iter,
                )
        out = np.full(self.grid.shape, -1.0).ravel()
        out[self._inside_flat] = w - 1.0
        return ScalarField(self.grid, out.reshape(self.grid.shape))

    # ---------------------------------------------------------- stepping

    def _refresh_subgradient(self, u: ScalarField):
        self._csub = self.bands.subgradient(
            u, self.params, self.mask, self.subgradient_mode
        ).values

    def explicit_force(self, u: ScalarField) -> np.ndarray:
        p, mask = self.params, self.mask
        gw = grad_w_eps(u, p, mask).values
        lap_u = laplacian(u, mask)
        bilap = laplacian(lap_u, mask).values
        _, pen_grad = area_penalty(u, p, mask)
        force = gw - self.gamma * bilap + pen_grad.values
        if self.penalty_on and self._csub is not None:
            force = force + p.eps ** (-p.kappa) * self._csub
        return force

    def step(self, state: FlowState) -> FlowState:
        cfg = self.cfg
        if not cfg.tau > 0:
            raise ValueError("time stepping requires tau > 0")
        if self.penalty_on and (
            self._csub is None or state.step % cfg.geodesic_stride == 0
        ):
            self._refresh_subgradient(state.u)
        rhs = ScalarField(
            self.grid, state.u.values - cfg.tau * self.explicit_force(state.u)
        )
        if not np.all(np.isfinite(rhs.values)):
            # blow-up shows in the explicit part first; the implicit solve
            # would only obscure it behind a solver failure
            raise DivergenceError(
                f"explicit force became non-finite at step {state.step + 1}",
                step=state.step + 1,
                max_abs=float(np.nanmax(np.abs(state.u.values))),
            )
        u_new = self.implicit_solve(rhs)
        if not np.all(np.isfinite(u_new.values)):
            raise DivergenceError(
                f"non-finite values at step {state.step + 1}",
                step=state.step + 1,
                max_abs=float(np.nanmax(np.abs(u_new.values))),
            )
        return FlowState(
            u=u_new, t=state.t + cfg.tau, step=state.step + 1, report=state.report
        )

    def report(self, u: ScalarField) -> EnergyReport:
        return total_energy(u, self.params, self.mask, self.bands)

    def run(self, initial: ScalarField, sinks=(), stop_condition=None) -> FlowState:
        """Iterate until max_steps, stagnation, or stop_condition(state)."""
        cfg = self.cfg
        state = FlowState(u=initial.copy())
        state.report = self.report(state.u)
        last_logged_step = 0
        last_logged_total = state.report.total
        last_snapshot_step = -1
        stagnant_span = 0
        try:
            _emit(sinks, "on_log", state, state.report)
            _emit(sinks, "on_snapshot", state)
            last_snapshot_step = 0
            while state.step < cfg.max_steps:
                state = self.step(state)
                if state.step % cfg.energy_log_stride == 0 or state.step == cfg.max_steps:
                    state.report = self.report(state.u)
                    _emit(sinks, "on_log", state, state.report)
                    span = state.step - last_logged_step
                    per_step = abs(state.report.total - last_logged_total) / span
                    if per_step < STAGNATION_REL * abs(state.report.total):
                        stagnant_span += span
                    else:
                        stagnant_span = 0
                    last_logged_step = state.step
                    last_logged_total = state.report.total
                if state.step % cfg.snapshot_stride == 0:
                    _emit(sinks, "on_snapshot", state)
                    last_snapshot_step = state.step
                if stagnant_span >= STAGNATION_SPAN:
                    break
                if stop_condition is not None and stop_condition(state):
                    break
            if state.step != last_logged_step or state.report is None:
                state.report = self.report(state.u)
                _emit(sinks, "on_log", state, state.report)
            if state.step != last_snapshot_step:
                _emit(sinks, "on_snapshot", state)
            return state
        finally:
            _emit(sinks, "flush")
