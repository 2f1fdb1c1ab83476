"""First eigenvalue of the linearized operator on balls.

The quadratic form is int |grad phi|^2 + |grad psi|^2 + v^2 phi^2 + u^2 psi^2
+ 4 u v phi psi over pairs vanishing on the boundary ring.  The polar 5-point
Laplacian is self-adjoint in the r-weighted inner product (with the center
cell weighted pi h^2/4), so the minimization is a genuine symmetric
generalized eigenproblem; it is solved by preconditioned steepest descent
with a three-term Rayleigh-Ritz subspace (x, preconditioned residual,
previous direction), the preconditioner being one (sigma - lap)^(-1) sweep
per component.

Note the linearized system pairs psi with u^2 (the quadratic form's u^2 psi^2
term); the analogous cross term 2 u v couples the two components.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import FieldSet
from .geometry import DiskGrid, laplacian
from .laplace import DiskHelmholtzSolver


@dataclass
class LinearizedPair:
    grid: DiskGrid
    phi: np.ndarray
    psi: np.ndarray
    lam: float
    iterations: int
    residual: float
    meta: dict = field(default_factory=dict)


def quadrature_weights(grid):
    """Interior node weights of the W-inner product; boundary ring weight 0."""
    w = grid.r * grid.h_r * grid.h_theta
    w = np.broadcast_to(w[:, None], (grid.n_r + 1, grid.n_theta)).copy()
    w[0, :] = np.pi * grid.h_r**2 / 4.0 / grid.n_theta  # center cell, split over columns
    w[-1, :] = 0.0
    return w


def zero_background(grid):
    return FieldSet(grid, grid.d, np.zeros((2, grid.n_r + 1, grid.n_theta)))


def profile_background(profile, grid):
    """The 1D profile extended constantly in y: (u, v)(x, y) = (U, V)(x)."""
    if profile.L < grid.R:
        raise ValueError("profile window shorter than the disk radius")
    x = grid.r[:, None] * np.cos(grid.theta)[None, :]
    u = profile.eval_u(x)
    v = profile.eval_v(x)
    vals = np.stack([u, v])
    vals[:, 0, :] = vals[:, 0, :1]
    return FieldSet(grid, grid.d, vals)


def restrict_background(fields, R):
    """Restriction to the concentric ball of radius R (rings must align)."""
    grid = fields.grid
    pos = R / grid.h_r
    n_sub = int(round(pos))
    if abs(pos - n_sub) > 1e-9 or n_sub < 8:
        raise ValueError(f"R = {R} does not align with the background rings")
    sub = DiskGrid(R, n_sub, grid.n_theta, grid.d)
    return FieldSet(sub, fields.d, fields.values[:, : n_sub + 1, :].copy())


def _apply_operator(background, phi, psi):
    grid = background.grid
    u, v = background.values
    out_phi = -laplacian(grid, phi) + v**2 * phi + 2.0 * u * v * psi
    out_psi = -laplacian(grid, psi) + u**2 * psi + 2.0 * u * v * phi
    out_phi[-1] = 0.0
    out_psi[-1] = 0.0
    return out_phi, out_psi


def rayleigh_quotient(background, phi, psi):
    """Q(phi, psi) / ||(phi, psi)||^2 in the discrete W-inner product."""
    w = quadrature_weights(background.grid)
    a_phi, a_psi = _apply_operator(background, phi, psi)
    num = float(np.sum(w * (phi * a_phi + psi * a_psi)))
    den = float(np.sum(w * (phi**2 + psi**2)))
    return num / den


def first_eigenvalue(background, tol=1e-7, max_iter=1500, seed=0):
    """Minimize the Rayleigh quotient; returns the pair and lambda(R).

    Convergence is declared when the W-norm of the residual A x - lam x drops
    below tol * max(1, |lam|); the eigenvalue error is then of order
    residual^2 / gap, far below the residual itself.  The returned pair is
    L2-normalized and sign-normalized toward phi >= 0 >= psi.
    """
    grid = background.grid
    w = quadrature_weights(grid)
    rng = np.random.default_rng(seed)

    def rand_field():
        f = rng.standard_normal((grid.n_r + 1, grid.n_theta))
        f[0] = f[0, 0]
        f[-1] = 0.0
        # smooth the start a little: one diffusion sweep
        return f

    x = np.stack([rand_field(), rand_field()])
    smoother = DiskHelmholtzSolver(grid, 1.0)
    x[0] = smoother.solve(x[0], np.zeros(grid.n_theta))
    x[1] = smoother.solve(x[1], np.zeros(grid.n_theta))

    def wdot(a, b):
        return float(np.sum(w * (a[0] * b[0] + a[1] * b[1])))

    def apply_A(y):
        return np.stack(_apply_operator(background, y[0], y[1]))

    def normalize(y):
        return y / np.sqrt(wdot(y, y))

    x = normalize(x)
    Ax = apply_A(x)
    lam = wdot(x, Ax)
    p = None
    zb = np.zeros(grid.n_theta)
    helm = None
    sigma = None
    iters = 0
    res_norm = np.inf

    def shifted_solve(rhs, sig, inner=30, rtol=1e-2):
        """Approximate (A + sig)^(-1) rhs by W-metric PCG.

        The background potential can dwarf the Laplacian (it grows like the
        squared boundary data), so a pure (c - lap)^(-1) sweep is a poor
        preconditioner on its own; it serves as the inner preconditioner here.
        """
        z = np.zeros_like(rhs)
        r = rhs.copy()
        r0 = np.sqrt(max(wdot(r, r), 0.0))
        Mr = np.stack([helm.solve(r[0], zb), helm.solve(r[1], zb)])
        Mr[:, -1, :] = 0.0
        pdir = Mr.copy()
        rz = wdot(r, Mr)
        for _ in range(inner):
            Ap = apply_A(pdir) + sig * pdir
            alpha = rz / max(wdot(pdir, Ap), 1e-300)
            z += alpha * pdir
            r -= alpha * Ap
            if np.sqrt(max(wdot(r, r), 0.0)) <= rtol * r0:
                break
            Mr = np.stack([helm.solve(r[0], zb), helm.solve(r[1], zb)])
            Mr[:, -1, :] = 0.0
            rz_new = wdot(r, Mr)
            pdir = Mr + (rz_new / max(rz, 1e-300)) * pdir
            rz = rz_new
        return z

    for iters in range(1, max_iter + 1):
        resid = Ax - lam * x
        res_norm = np.sqrt(max(wdot(resid, resid), 0.0))
        if res_norm <= tol * max(1.0, abs(lam)):
            break
        sig_target = abs(lam) + 1.0 / grid.R**2
        if helm is None or abs(sig_target - sigma) > 0.5 * sigma:
            sigma = sig_target
            helm = DiskHelmholtzSolver(grid, sigma)
        direction = shifted_solve(resid, sigma)
        direction[:, -1, :] = 0.0

        basis = [x, direction] + ([p] if p is not None else [])
        # W-orthonormalize, dropping near-dependent members
        ortho = []
        for b in basis:
            bb = b.copy()
            for o in ortho:
                bb -= wdot(bb, o) * o
            nrm = np.sqrt(max(wdot(bb, bb), 0.0))
            if nrm > 1e-13:
                ortho.append(bb / nrm)
        m = len(ortho)
        A_small = np.empty((m, m))
        applied = [apply_A(o) for o in ortho]
        for i in range(m):
            for j in range(m):
                A_small[i, j] = wdot(ortho[i], applied[j])
        A_small = 0.5 * (A_small + A_small.T)
        vals, vecs = np.linalg.eigh(A_small)
        coef = vecs[:, 0]
        x_new = sum(c * o for c, o in zip(coef, ortho))
        p = x_new - x * wdot(x_new, x)
        nrm_p = np.sqrt(max(wdot(p, p), 0.0))
        p = p / nrm_p if nrm_p > 1e-13 else None
        x = normalize(x_new)
        Ax = apply_A(x)
        lam = wdot(x, Ax)
    else:
        raise RuntimeError(
            f"Rayleigh minimization did not converge (residual {res_norm:.3e})"
        )

    # sign normalization: flip toward phi >= 0, psi <= 0 when sign-definite
    if np.sum(w * x[0]) < 0:
        x[0] *= -1.0
        x[1] *= -1.0 if np.sum(w * x[1]) > 0 else 1.0
    if np.sum(w * x[1]) > 0 and np.sum(w * x[0]) > 0:
        # mixed orientation: the cross term favors opposite signs; flip psi only
        # when that does not raise the quotient
        flipped = np.stack([x[0], -x[1]])
        if rayleigh_quotient(background, flipped[0], flipped[1]) <= lam + 1e-14:
            x = flipped
            Ax = apply_A(x)
            lam = wdot(x, Ax)

    return LinearizedPair(
        grid=grid,
        phi=x[0],
        psi=x[1],
        lam=float(lam),
        iterations=iters,
        residual=float(res_norm),
        meta={"sigma": sigma},
    )


def lambda_monotone(background, R_list, tol=1e-7, slack=1e-8):
    """lambda(R) along nested balls; domain monotonicity demands nonincrease."""
    R_list = sorted(float(R) for R in R_list)
    lams = []
    for R in R_list:
        sub = restrict_background(background, R)
        lams.append(first_eigenvalue(sub, tol=tol).lam)
    diffs = np.diff(lams)
    return {
        "R": R_list,
        "lam": lams,
        "nonincreasing": bool(np.all(diffs <= slack)),
        "worst_increase": float(diffs.max()) if len(diffs) else 0.0,
    }


def sign_structure(pair):
    """Interior sign pattern of the minimizing pair after sign normalization."""
    phi_int = pair.phi[1:-1]
    psi_int = pair.psi[1:-1]
    return {
        "phi_min": float(phi_int.min()),
        "psi_max": float(psi_int.max()),
        "phi_positive": bool(phi_int.min() > 0.0),
        "psi_negative": bool(psi_int.max() < 0.0),
        "margin": float(min(phi_int.min(), -psi_int.max()))
        / max(float(np.abs(pair.phi).max()), 1e-300),
    }
