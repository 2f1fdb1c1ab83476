"""Polar grids on disks, the harmonic polynomials used as boundary data, and the
exact dihedral/rotational symmetry maps.

The grid has nodes r_i = i*R/n_r (i = 0..n_r) and theta_j = 2*pi*j/n_theta, with
the center stored once.  Requiring n_theta to be divisible by 4d makes every
reflection across a nodal line of Re(z^d), and every rotation by a sector angle,
an exact permutation of the theta indices: symmetries are enforced bitwise, not
by interpolation.  The theta quadrature is the periodic trapezoid rule (exact
for trigonometric polynomials of degree < n_theta/2), so circle integrals of
cos^2(d*theta) are exact to rounding; bulk integrals use the trapezoid rule in r
against the area weight r dr.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def _as_points(z):
    """Coerce a point or array of points to an (..., 2) float array."""
    p = np.asarray(z, dtype=float)
    if p.shape[-1] != 2:
        raise ValueError(f"points must have a trailing dimension of 2, got shape {p.shape}")
    return p


def eval_phi(d, z):
    """Harmonic polynomial Re(z^d) = r^d cos(d theta) at point(s) z."""
    if d < 1 or int(d) != d:
        raise ValueError(f"degree must be a positive integer, got {d}")
    p = _as_points(z)
    r = np.hypot(p[..., 0], p[..., 1])
    theta = np.arctan2(p[..., 1], p[..., 0])
    out = r**d * np.cos(d * theta)
    return float(out) if out.ndim == 0 else out


def nodal_angle(d, i):
    """Angle of the i-th nodal line of Re(z^d): alpha_i = (2i-1)*pi/(2d)."""
    if not 1 <= i <= d:
        raise ValueError(f"reflection index must be in 1..{d}, got {i}")
    return (2 * i - 1) * np.pi / (2 * d)


def reflect(d, i, z):
    """Reflect point(s) z across the i-th nodal line of Re(z^d).

    theta -> 2*alpha_i - theta with r unchanged; satisfies
    eval_phi(d, reflect(d, i, z)) = -eval_phi(d, z).
    """
    alpha = nodal_angle(d, i)
    p = _as_points(z)
    r = np.hypot(p[..., 0], p[..., 1])
    theta = 2.0 * alpha - np.arctan2(p[..., 1], p[..., 0])
    out = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    return out


def eval_psi(d, k, z):
    """Sector-restricted harmonic boundary function for the k-component system.

    With 2d = h*k, the plane splits into 2d sectors of width pi/d; the first
    component owns the h sectors centered at angles 2*pi*i/h (i = 0..h-1) and on
    each of them takes the value r^d cos(d*(theta - center)), which is >= 0 and
    vanishes on the sector edges.  d may be a half-integer (2d integer); the
    local-angle form keeps the value single-valued there.
    """
    two_d = 2 * d
    if two_d <= 0 or abs(two_d - round(two_d)) > 1e-12:
        raise ValueError(f"2d must be a positive integer, got d={d}")
    two_d = int(round(two_d))
    if k < 1 or two_d % k != 0:
        raise ValueError(f"2d = {two_d} must be a multiple of the component count k={k}")
    h = two_d // k

    p = _as_points(z)
    r = np.hypot(p[..., 0], p[..., 1])
    theta = np.arctan2(p[..., 1], p[..., 0])

    half_width = np.pi / two_d            # sectors have width pi/d = 2*pi/(2d)
    spacing = 2.0 * np.pi / h             # selected sector centers, G^{ik} apart
    # distance from theta to the nearest selected center, folded to [-spacing/2, spacing/2);
    # the strict margin turns the rounding fuzz of points sitting exactly on a
    # sector edge into exact zeros, so shifted copies tile with products == 0
    local = (theta + spacing / 2.0) % spacing - spacing / 2.0
    inside = np.abs(local) < half_width * (1.0 - 1e-13)
    out = np.where(inside, r**d * np.cos(d * local), 0.0)
    out = np.where(r == 0.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DiskGrid:
    """Polar grid on B_R(0) with n_r+1 rings (ring 0 = center) and n_theta angles."""

    R: float
    n_r: int
    n_theta: int
    d: float  # symmetry degree the grid supports exactly

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError(f"radius must be positive, got R={self.R}")
        if self.n_r < 8:
            raise ValueError(f"n_r must be at least 8, got {self.n_r}")
        if self.n_theta < 16:
            raise ValueError(f"n_theta must be at least 16, got {self.n_theta}")
        four_d = 4 * self.d
        if abs(four_d - round(four_d)) > 1e-12:
            raise ValueError(f"4d must be an integer, got d={self.d}")
        four_d = int(round(four_d))
        if self.n_theta % four_d != 0:
            raise ValueError(
                f"n_theta={self.n_theta} must be divisible by 4d={four_d} so that "
                f"reflections and sector rotations map grid nodes to grid nodes"
            )

    @property
    def n_nodes(self):
        return 1 + self.n_r * self.n_theta

    @cached_property
    def h_r(self):
        return self.R / self.n_r

    @cached_property
    def h_theta(self):
        return 2.0 * np.pi / self.n_theta

    @cached_property
    def r(self):
        return np.linspace(0.0, self.R, self.n_r + 1)

    @cached_property
    def theta(self):
        return np.arange(self.n_theta) * self.h_theta

    @cached_property
    def xy(self):
        """Node coordinates, shape (n_r+1, n_theta, 2); ring 0 repeats the center."""
        rr = self.r[:, None]
        return np.stack([rr * np.cos(self.theta), rr * np.sin(self.theta)], axis=-1)

    # -- exact symmetry index maps -------------------------------------------------

    def reflection_map(self, i):
        """theta-index permutation of the reflection across nodal line i."""
        d = self.d
        if int(round(2 * d)) % 1:
            raise ValueError("reflection maps need 2d integer")
        if not 1 <= i <= int(np.floor(d + 1e-9)):
            raise ValueError(f"reflection index must be in 1..{int(d)}, got {i}")
        # theta -> 2*alpha_i - theta ; 2*alpha_i corresponds to (2i-1)*n_theta/(2d) steps
        m = (2 * i - 1) * self.n_theta // int(round(2 * d))
        j = np.arange(self.n_theta)
        return (m - j) % self.n_theta

    def rotation_map(self, steps):
        """theta-index permutation of the rotation by `steps` sector units of pi/d."""
        shift = steps * self.n_theta // int(round(2 * self.d))
        j = np.arange(self.n_theta)
        return (j + shift) % self.n_theta

    def conjugation_map(self):
        """theta-index permutation of z -> conj(z)."""
        j = np.arange(self.n_theta)
        return (-j) % self.n_theta

    def sample(self, fn):
        """Sample fn(points) on all nodes; returns (n_r+1, n_theta) with ring 0 constant."""
        vals = fn(self.xy)
        vals = np.asarray(vals, dtype=float)
        vals[0, :] = vals[0, 0]
        return vals


@dataclass(frozen=True)
class SymmetryMap:
    """A grid symmetry realized as an exact theta-index permutation.

    kind is 'reflection' (index = nodal-line number) or 'rotation'
    (index = power of the elementary pi/d rotation).  The permutation fixes
    every ring, so applying it to a field array is pure index arithmetic.
    """

    d: float
    kind: str
    index: int
    theta_map: np.ndarray
    order: int

    def apply(self, values):
        """Permute a (..., n_theta) field array."""
        return np.ascontiguousarray(values[..., self.theta_map])

    def is_identity_after(self, n):
        j = np.arange(len(self.theta_map))
        m = j
        for _ in range(n):
            m = self.theta_map[m]
        return bool(np.array_equal(m, j))


def make_reflection(grid, i):
    return SymmetryMap(grid.d, "reflection", i, grid.reflection_map(i), order=2)


def make_rotation(grid, power):
    two_d = int(round(2 * grid.d))
    g = np.gcd(power % two_d if power % two_d else two_d, two_d)
    return SymmetryMap(grid.d, "rotation", power, grid.rotation_map(power), order=two_d // g)


def make_disk_grid(R, n_r, n_theta, d):
    """Build a validated DiskGrid; rejects R <= 0 and n_theta not divisible by 4d."""
    return DiskGrid(float(R), int(n_r), int(n_theta), d)


# -- quadrature and discrete calculus on the grid ----------------------------------


def theta_integral(grid, rows):
    """Periodic-trapezoid integral over theta, per ring: h_theta * sum_j."""
    return grid.h_theta * np.asarray(rows).sum(axis=-1)


def radial_weights(grid):
    """Trapezoid weights in r (h at interior rings, h/2 at the ends)."""
    w = np.full(grid.n_r + 1, grid.h_r)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def disk_integral(grid, F):
    """Integral of a node field over B_R: trapz_r of r * (theta integral)."""
    ring = theta_integral(grid, F) * grid.r
    return float(np.sum(radial_weights(grid) * ring))


def gradient_squared(grid, F):
    """|grad F|^2 = F_r^2 + (F_theta / r)^2 on rings 1..n_r; ring 0 is set to 0.

    Centered differences in r (2nd-order one-sided at the outer ring) and in
    theta (periodic).  The center ring carries zero area weight in the
    quadratures, so its entry is irrelevant and kept at 0.
    """
    F = np.asarray(F)
    out = np.zeros_like(F)
    h = grid.h_r
    Fr = np.empty_like(F)
    Fr[1:-1] = (F[2:] - F[:-2]) / (2 * h)
    Fr[-1] = (3 * F[-1] - 4 * F[-2] + F[-3]) / (2 * h)
    Ft = (np.roll(F, -1, axis=-1) - np.roll(F, 1, axis=-1)) / (2 * grid.h_theta)
    r = grid.r[1:, None]
    out[1:] = Fr[1:] ** 2 + (Ft[1:] / r) ** 2
    return out


def staggered_gradient_rings(grid, F):
    """Squared gradient split onto its natural staggered grids.

    Returns (theta_ring, radial_cell): theta_ring[i] is the circle integral of
    (F_theta / r)^2 at ring i (zero at the center ring), using differences on
    theta-cell midpoints; radial_cell[i] (i = 0..n_r-1) is the circle integral
    of F_r^2 at the half-ring radius r_{i+1/2}, from radial cell differences.
    Cell-midpoint differences keep fields with kinks along grid lines (the
    positive/negative parts of harmonic polynomials) exactly one-sided, which
    node-centered differences would smear.
    """
    F = np.asarray(F)
    dth = (np.roll(F, -1, axis=-1) - F) / grid.h_theta
    theta_ring = np.zeros(grid.n_r + 1)
    theta_ring[1:] = grid.h_theta * (dth[1:] ** 2).sum(axis=-1) / grid.r[1:] ** 2
    dr = (F[1:] - F[:-1]) / grid.h_r
    radial_cell = grid.h_theta * (dr**2).sum(axis=-1)
    return theta_ring, radial_cell


def dirichlet_energy(grid, F):
    """int |grad F|^2 over the disk with the staggered quadrature."""
    theta_ring, radial_cell = staggered_gradient_rings(grid, F)
    r_mid = 0.5 * (grid.r[:-1] + grid.r[1:])
    bulk_theta = float(np.sum(radial_weights(grid) * grid.r * theta_ring))
    bulk_radial = float(grid.h_r * np.sum(r_mid * radial_cell))
    return bulk_theta + bulk_radial


def laplacian(grid, F):
    """5-point polar Laplacian; valid on the center and rings 1..n_r-1.

    The outer (Dirichlet) ring of the result is set to 0.  Center closure is
    4*(mean of ring 1 - center)/h^2.
    """
    F = np.asarray(F)
    out = np.zeros_like(F)
    h = grid.h_r
    r = grid.r[1:-1, None]
    d2r = (F[2:] - 2 * F[1:-1] + F[:-2]) / h**2
    dr = (F[2:] - F[:-2]) / (2 * h * r)
    d2t = (np.roll(F, -1, axis=-1) - 2 * F + np.roll(F, 1, axis=-1))[1:-1] / (
        grid.h_theta**2 * r**2
    )
    out[1:-1] = d2r + dr + d2t
    out[0] = 4.0 * (F[1].mean() - F[0, 0]) / h**2
    return out


def pairwise_coupling(values):
    """sum_{i<j} u_i^2 u_j^2 node-wise for a (k, ...) component stack."""
    sq = np.asarray(values) ** 2
    total = sq.sum(axis=0)
    return 0.5 * (total**2 - (sq**2).sum(axis=0))
