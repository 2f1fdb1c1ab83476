"""Component fields on a disk grid with frozen boundary data.

A FieldSet holds k nonnegative scalar fields as a (k, n_r+1, n_theta) array;
row 0 of each field is the (replicated) center value and row n_r is the frozen
Dirichlet ring.  Symmetry projections are exact theta-index permutations
followed by orbit averaging in a canonical order, so orbit-equivalent nodes
end up bitwise equal and symmetry residuals are exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    DiskGrid,
    dirichlet_energy,
    disk_integral,
    eval_phi,
    eval_psi,
    pairwise_coupling,
)


@dataclass
class FieldSet:
    grid: DiskGrid
    d: float
    values: np.ndarray            # (k, n_r+1, n_theta)
    boundary: np.ndarray = field(default=None)  # (k, n_theta), frozen outer ring

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3 or self.values.shape[1:] != (
            self.grid.n_r + 1,
            self.grid.n_theta,
        ):
            raise ValueError(
                f"values must have shape (k, {self.grid.n_r + 1}, {self.grid.n_theta})"
            )
        if self.boundary is None:
            self.boundary = self.values[:, -1, :].copy()
        self.boundary = np.asarray(self.boundary, dtype=float)
        self.boundary.setflags(write=False)

    @property
    def k(self):
        return self.values.shape[0]

    def copy(self):
        return FieldSet(self.grid, self.d, self.values.copy(), self.boundary)

    def restore_boundary(self):
        self.values[:, -1, :] = self.boundary

    def energy(self):
        """E = int sum |grad u_i|^2 + sum_{i<j} u_i^2 u_j^2 over the disk."""
        g = sum(dirichlet_energy(self.grid, u) for u in self.values)
        return g + disk_integral(self.grid, pairwise_coupling(self.values))

    def pde_residual(self):
        """sup over interior nodes of |lap u_i - u_i sum_{j!=i} u_j^2|, summed over i."""
        from .geometry import laplacian

        sq = self.values**2
        total = sq.sum(axis=0)
        res = 0.0
        for i, u in enumerate(self.values):
            defect = laplacian(self.grid, u) - u * (total - sq[i])
            res += float(np.abs(defect[:-1]).max())
        return res


def harmonic_pair(grid, d):
    """The pair (Phi^+, Phi^-) for Phi = Re(z^d), sampled then projected.

    The projection turns the rounding-level symmetry defects of the samples
    into exact zeros, so the pair enters the constraint class bitwise.
    """
    phi = grid.sample(lambda p: eval_phi(d, p))
    f = FieldSet(grid, d, np.stack([np.maximum(phi, 0.0), np.maximum(-phi, 0.0)]))
    dihedral_project(f)
    return FieldSet(grid, d, f.values)  # refreeze the boundary post-projection


def psi_components(grid, d, k):
    """The k-tuple (Psi, Psi o G, ..., Psi o G^{k-1}) sampled on the grid.

    Psi o G^i is realized as an exact theta-index shift of the Psi samples
    (G rotates by pi/d, i.e. n_theta/(2d) nodes).
    """
    psi = grid.sample(lambda p: eval_psi(d, k, p))
    shift = grid.n_theta // int(round(2 * d))
    j = np.arange(grid.n_theta)
    comps = [psi[:, (j + i * shift) % grid.n_theta] for i in range(k)]
    f = FieldSet(grid, d, np.stack(comps))
    multik_project(f, int(round(2 * d)) // k)
    return FieldSet(grid, d, f.values)


# -- dihedral class for the two-component problem ----------------------------------
#
# Constraint class: u o T_i = v for every nodal-line reflection T_i.  Composing
# two reflections shows u (and v) are invariant under rotation by 2*pi/d, so the
# class is generated by that rotation plus one reflection.


def dihedral_project(fields):
    """Project (u, v) onto the symmetric class; exact index arithmetic.

    u is averaged over its rotation orbit together with the reflected copies of
    v; orbit means are computed once per canonical node and assigned to all
    orbit members, so the projected pair has symmetry residual exactly 0.
    """
    grid = fields.grid
    d = int(round(fields.d))
    u, v = fields.values
    n = grid.n_theta
    S = n // d  # rotation by 2*pi/d in theta indices
    refl = grid.reflection_map(1)

    vr = v[:, refl]  # v o T_1, same class member as u
    # fold both onto the first rotation cell [0, S), average, then tile
    acc = np.zeros((grid.n_r + 1, S))
    for g in range(d):
        block = slice(g * S, (g + 1) * S)
        acc += u[:, block] + vr[:, block]
    cell = acc / (2 * d)
    u_new = np.tile(cell, d)
    fields.values[0] = u_new
    fields.values[1] = u_new[:, refl]
    fields.values[:, 0, :] = fields.values[:, 0, :1]  # keep center rows constant
    return fields


def dihedral_residual(fields):
    """max over i and nodes of |u(T_i z) - v(z)|; 0 for a projected pair."""
    grid = fields.grid
    d = int(round(fields.d))
    u, v = fields.values
    res = 0.0
    for i in range(1, d + 1):
        res = max(res, float(np.abs(u[:, grid.reflection_map(i)] - v).max()))
    return res


# -- rotation class for the k-component problem ------------------------------------
#
# Constraint class (with 2d = h*k and G the rotation by pi/d):
#   u_{i+1}(theta) = u_i(theta - pi/d),   u_i o G^k = u_i,   u_1(conj z) = u_1(z).
# Everything is generated from u_1, which is 2*pi/h-periodic and even in theta.


def multik_shift(grid):
    """theta-index shift realizing G (rotation by pi/d)."""
    return grid.n_theta // int(round(2 * grid.d))


def multik_component(grid, u1, i):
    """u_{i+1} = u_1 o G^{-i} as an exact index shift (i = 0..k-1)."""
    j = np.arange(grid.n_theta)
    return u1[:, (j + i * multik_shift(grid)) % grid.n_theta]


def multik_project(fields, h):
    """Project a k-component stack onto the rotation class; residuals become 0."""
    grid = fields.grid
    k = fields.k
    n = grid.n_theta
    S = multik_shift(grid)
    j = np.arange(n)

    # pool all components back onto u_1's frame
    pooled = np.zeros_like(fields.values[0])
    for i in range(k):
        pooled += fields.values[i][:, (j - i * S) % n]
    pooled /= k

    # symmetrize u_1 over its own invariances: G^k orbit (h elements) + conjugation.
    # Each orbit term is paired with its mirror before accumulating so that the
    # cell comes out bitwise even (float addition commutes but does not associate).
    period = k * S  # = n/h steps
    jc = j[:period]
    acc = np.zeros((grid.n_r + 1, period))
    for m in range(h):
        block = pooled[:, m * period : (m + 1) * period]
        acc += block + block[:, (-jc) % period]
    cell = acc / (2 * h)
    u1 = np.tile(cell, h)

    for i in range(k):
        fields.values[i] = u1[:, (j + i * S) % n]
    fields.values[:, 0, :] = fields.values[:, 0, :1]
    return fields


def multik_residual(fields, h):
    """max violation over the three defining relations of the rotation class."""
    grid = fields.grid
    k = fields.k
    n = grid.n_theta
    S = multik_shift(grid)
    j = np.arange(n)
    vals = fields.values
    res = 0.0
    for i in range(k):
        # u_i o G^k = u_i ; u_{i+1}(z) = u_i(Gz) ; u_{k+2-i}(z) = u_i(conj z)
        res = max(res, float(np.abs(vals[i][:, (j + k * S) % n] - vals[i]).max()))
        res = max(res, float(np.abs(vals[(i + 1) % k] - vals[i][:, (j + S) % n]).max()))
        res = max(res, float(np.abs(vals[(k - i) % k] - vals[i][:, (-j) % n]).max()))
    return res
