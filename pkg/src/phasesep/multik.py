"""k-component heat flow: lap u_i = u_i sum_{j != i} u_j^2 under the rotation
class generated by u_{i+1}(z) = u_i(Gz), u_i o G^k = u_i and conjugation
evenness of u_1, with boundary data u_{i+1} = Psi o G^i (2d = h k, G the
rotation by pi/d).

Everything is generated from u_1, which is 2*pi/h-periodic and even, so the
Newton finisher works on the cell theta in [0, pi/h]; the other components
enter through exact fold maps of the cell indices.  Flow mechanics (implicit
diffusion, explicit coupling, clamping, exact projection, energy-guarded dt)
are identical to the two-component case.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .almgren import default_ladder, trace
from .diskflow import FlowDiverged, _clamp
from .fields import FieldSet, multik_project, multik_residual, multik_shift, psi_components
from .laplace import CellOperator, DiskHelmholtzSolver


@dataclass
class MultiState:
    fields: FieldSet
    h: int
    t: float = 0.0
    dt: float = 0.0
    energy_trace: list = field(default_factory=list)
    residual: float = np.inf
    clamped_mass: float = 0.0
    steps: int = 0
    newton_iters: int = 0
    converged: bool = False

    def __post_init__(self):
        if self.dt == 0.0:
            self.dt = self.fields.grid.h_r ** 2 / 4.0
        if not self.energy_trace:
            self.energy_trace.append((self.t, self.fields.energy()))
        self._solver = None
        self._solver_dt = None

    def solver(self):
        if self._solver is None or self._solver_dt != self.dt:
            self._solver = DiskHelmholtzSolver(self.fields.grid, 1.0 / self.dt)
            self._solver_dt = self.dt
        return self._solver


def init_multik(d, k, R, grid):
    """Components initialized to (Psi o G^{i-1}); all symmetry residuals 0."""
    two_d = 2 * d
    if abs(two_d - round(two_d)) > 1e-12 or int(round(two_d)) % k != 0:
        raise ValueError(f"2d = {two_d} must be a multiple of k = {k}")
    if grid.d != d or abs(grid.R - R) > 1e-12:
        raise ValueError("grid was built for a different (d, R)")
    h = int(round(two_d)) // k
    return MultiState(fields=psi_components(grid, d, k), h=h)


def _step_inplace(state, energy_slack=1e-10, dt_min_factor=1e-12):
    fields = state.fields
    grid = fields.grid
    dt_min = dt_min_factor * grid.R**2
    old = fields.values.copy()
    E_old = state.energy_trace[-1][1]

    while True:
        sq = old**2
        total = sq.sum(axis=0)
        solver = state.solver()
        inv_dt = 1.0 / state.dt
        for i in range(fields.k):
            reacted = old[i] - state.dt * old[i] * (total - sq[i])
            fields.values[i] = solver.solve(reacted * inv_dt, fields.boundary[i])
        clamped = _clamp(fields.values, grid)
        multik_project(fields, state.h)
        fields.restore_boundary()
        E_new = fields.energy()
        if E_new <= E_old + energy_slack:
            break
        fields.values[:] = old
        state.dt *= 0.5
        if state.dt < dt_min:
            raise FlowDiverged(
                f"dt fell below {dt_min:.3e} with the energy still increasing"
            )
    state.t += state.dt
    state.steps += 1
    state.clamped_mass += clamped
    state.energy_trace.append((state.t, E_new))
    return state


class _MultikCell:
    """Reduced steady system for u_1 on theta in [0, pi/h].

    The other components appear through gather maps M_a with
    u_{a+1}(theta_j) = u_1(theta_j + a*pi/d), folded into the cell by its
    period-and-reflection symmetry.
    """

    def __init__(self, grid, k, h, boundary_cell):
        J = grid.n_theta // (2 * h)
        self.op = CellOperator(grid, J, boundary_cell)
        n = self.op.n_unknowns
        S = multik_shift(grid)
        self.maps = []
        for a in range(1, k):
            src_cols = self.op.cell_index_of(a * S)
            perm = np.empty(n, dtype=int)
            perm[0] = 0
            for i in range(1, grid.n_r):
                base = 1 + (i - 1) * (J + 1)
                perm[base : base + J + 1] = base + src_cols
            self.maps.append(perm)

    def residual(self, x):
        W = np.zeros_like(x)
        for perm in self.maps:
            W += x[perm] ** 2
        return self.op.L @ x + self.op.rhs_boundary - x * W

    def jacobian(self, x):
        n = self.op.n_unknowns
        W = np.zeros_like(x)
        mats = []
        rows = np.arange(n)
        for perm in self.maps:
            xp = x[perm]
            W += xp**2
            mats.append(sp.coo_matrix((2.0 * x * xp, (rows, perm)), shape=(n, n)))
        J = self.op.L - sp.diags(W)
        for m in mats:
            J = J - m
        return J.tocsc()


def _try_newton(state, tol, max_newton=40, even_tol=1e-9):
    fields = state.fields
    grid = fields.grid
    u1 = fields.values[0]
    conj = grid.conjugation_map()
    scale = max(1.0, float(np.abs(u1).max()))
    if float(np.abs(u1 - u1[:, conj]).max()) > even_tol * scale:
        return False

    J = grid.n_theta // (2 * state.h)
    cell = getattr(state, "_cell_system", None)
    if cell is None:
        cell = _MultikCell(grid, fields.k, state.h, fields.boundary[0][: J + 1])
        state._cell_system = cell

    x = cell.op.fold(0.5 * (u1 + u1[:, conj]))
    F = cell.residual(x)
    norm = float(np.abs(F).max())
    E_before = state.energy_trace[-1][1]
    for _ in range(max_newton):
        if norm <= tol:
            break
        delta = spla.splu(cell.jacobian(x)).solve(-F)
        step_len = 1.0
        for _ in range(15):
            x_try = np.maximum(x + step_len * delta, 0.0)
            F_try = cell.residual(x_try)
            norm_try = float(np.abs(F_try).max())
            if norm_try < norm:
                break
            step_len *= 0.5
        else:
            return False
        x, F, norm = x_try, F_try, norm_try
        state.newton_iters += 1
    if norm > tol:
        return False

    u1_new = cell.op.unfold(x)
    candidate = fields.copy()
    S = multik_shift(grid)
    j = np.arange(grid.n_theta)
    for i in range(fields.k):
        candidate.values[i] = u1_new[:, (j + i * S) % grid.n_theta]
    candidate.restore_boundary()
    E_after = candidate.energy()
    if E_after > E_before + 1e-10:
        return False
    res = candidate.pde_residual()
    if res > tol:
        return False
    fields.values[:] = candidate.values
    state.energy_trace.append((state.t, E_after))
    state.residual = res
    return True


def relax_multik(state, tol=1e-8, max_steps=20000, newton_every=50):
    """Flow the k-component system to steady state; same contracts as relax()."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    fields = state.fields
    while state.steps < max_steps:
        _step_inplace(state)
        if state.steps % newton_every == 0:
            state.residual = fields.pde_residual()
            if state.residual <= tol:
                state.converged = True
                return fields
            if _try_newton(state, tol):
                state.converged = True
                return fields
    state.residual = fields.pde_residual()
    state.converged = state.residual <= tol
    return fields


@dataclass
class Theorem15Report:
    symmetry_ok: bool
    frequency_ok: bool
    b_plateau_ok: bool
    details: dict

    @property
    def all_ok(self):
        return self.symmetry_ok and self.frequency_ok and self.b_plateau_ok

    def to_dict(self):
        return {
            "symmetry_ok": bool(self.symmetry_ok),
            "frequency_ok": bool(self.frequency_ok),
            "b_plateau_ok": bool(self.b_plateau_ok),
            "all_ok": bool(self.all_ok),
            "details": self.details,
        }


def verify_theorem15(state, r_ladder=None, freq_slack=1e-2, plateau_band=0.10, sym_tol=1e-12):
    """Check the k-component conclusions on a steady state.

    Reports the ladder of b(r) = r^{-(1+2d)} int_{dB_r} sum u_i^2 (= H/r^{2d}),
    which should flatten toward a positive constant on the top octave, and the
    frequency ladder N(r) <= d.
    """
    fields = state.fields
    d = fields.d
    t = trace(fields, r_ladder if r_ladder is not None else default_ladder(fields.grid))
    b = t.H / t.r ** (2 * d)
    top = t.r >= t.r[-1] / 2.0
    spread = float(b[top].max() / b[top].min() - 1.0)
    sym = multik_residual(fields, state.h)
    mins = [float(u[1:-1].min()) for u in fields.values]
    return Theorem15Report(
        symmetry_ok=bool(sym <= sym_tol),
        frequency_ok=bool(t.N.max() <= d + freq_slack),
        b_plateau_ok=bool(spread <= plateau_band and np.all(b > 0)),
        details={
            "symmetry_residual": sym,
            "max_N": float(t.N.max()),
            "b_top_octave_spread": spread,
            "b_last": float(b[-1]),
            "component_interior_min": mins,
            "r_ladder": [float(r) for r in t.r],
            "b_ladder": [float(x) for x in b],
            "N_ladder": [float(x) for x in t.N],
        },
    )
