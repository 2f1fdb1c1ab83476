"""Fast solver for (c - lap) x = b on the polar grid with a Dirichlet outer ring.

An rfft in theta decouples the 5-point polar Laplacian into one real
tridiagonal system per Fourier mode; the center node couples only to mode 0
and is folded into the ring-1 row by a Schur complement.  Factorizations are
precomputed per value of c (one Thomas sweep, vectorized across modes), so a
solve costs one rfft + O(n_r) vector operations + one irfft.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class CellOperator:
    """Polar Laplacian reduced to the fundamental cell theta in [0, J*h_theta].

    Fields in the symmetric classes are even about both cell edges and
    periodic with period 2J steps, so the full disk is the cell tiled
    n_theta/(2J) times.  Unknowns are the center value plus rings 1..n_r-1 on
    the J+1 cell columns; the Dirichlet ring enters through rhs_boundary.
    """

    def __init__(self, grid, J, boundary_cell):
        if grid.n_theta % (2 * J) != 0:
            raise ValueError("cell length must divide the half grid")
        self.grid = grid
        self.J = J
        self.boundary_cell = np.asarray(boundary_cell, dtype=float)
        if self.boundary_cell.shape != (J + 1,):
            raise ValueError(f"boundary cell must have {J + 1} values")
        n_r = grid.n_r
        self.n_unknowns = 1 + (n_r - 1) * (J + 1)

        h, ht = grid.h_r, grid.h_theta
        rows, cols, vals = [], [], []
        rhs = np.zeros(self.n_unknowns)

        def idx(i, j):
            return 1 + (i - 1) * (J + 1) + j

        self._idx = idx
        # center row: 4 * (full-circle mean of ring 1 - c) / h^2; the cell mean
        # with half weights at the edges equals the circle mean exactly.
        w_mean = np.full(J + 1, 1.0 / J)
        w_mean[0] *= 0.5
        w_mean[-1] *= 0.5
        rows += [0]
        cols += [0]
        vals += [-4.0 / h**2]
        for j in range(J + 1):
            rows += [0]
            cols += [idx(1, j)]
            vals += [4.0 / h**2 * w_mean[j]]

        for i in range(1, n_r):
            r = grid.r[i]
            c_sub = 1.0 / h**2 - 1.0 / (2 * h * r)
            c_sup = 1.0 / h**2 + 1.0 / (2 * h * r)
            c_th = 1.0 / (ht**2 * r**2)
            for j in range(J + 1):
                me = idx(i, j)
                rows += [me]
                cols += [me]
                vals += [-2.0 / h**2 - 2.0 * c_th]
                rows += [me]
                cols += [0 if i == 1 else idx(i - 1, j)]
                vals += [c_sub]
                if i == n_r - 1:
                    rhs[me] += c_sup * self.boundary_cell[j]
                else:
                    rows += [me]
                    cols += [idx(i + 1, j)]
                    vals += [c_sup]
                jm = 1 if j == 0 else j - 1
                jp = J - 1 if j == J else j + 1
                for jj in (jm, jp):
                    rows += [me]
                    cols += [idx(i, jj)]
                    vals += [c_th]

        self.L = sp.coo_matrix(
            (vals, (rows, cols)), shape=(self.n_unknowns, self.n_unknowns)
        ).tocsr()
        self.rhs_boundary = rhs

    def fold(self, full):
        """Full-grid field -> cell unknown vector."""
        J = self.J
        out = np.empty(self.n_unknowns)
        out[0] = full[0, 0]
        out[1:] = full[1 : self.grid.n_r, : J + 1].ravel()
        return out

    def unfold(self, vec):
        """Cell unknown vector -> full-grid field, tiled bitwise."""
        grid = self.grid
        J = self.J
        period = 2 * J
        cell = np.empty((grid.n_r + 1, J + 1))
        cell[0, :] = vec[0]
        cell[1 : grid.n_r] = vec[1:].reshape(grid.n_r - 1, J + 1)
        cell[grid.n_r] = self.boundary_cell
        block = np.empty((grid.n_r + 1, period))
        block[:, : J + 1] = cell
        block[:, J + 1 :] = cell[:, J - 1 : 0 : -1]
        return np.tile(block, grid.n_theta // period)

    def cell_index_of(self, global_theta_steps):
        """Map a global theta offset (in grid steps) to cell indices per column.

        Returns src[j] = cell index of theta_j + offset folded by the cell's
        period-and-reflection symmetry.
        """
        J = self.J
        j = np.arange(J + 1)
        m = (j + global_theta_steps) % (2 * J)
        return np.where(m <= J, m, 2 * J - m)


class DiskHelmholtzSolver:
    """Factorized (c - lap)^(-1) on a DiskGrid for fixed c >= 0 (c > 0 if used alone)."""

    def __init__(self, grid, c):
        self.grid = grid
        self.c = float(c)
        n_r, n_theta = grid.n_r, grid.n_theta
        h = grid.h_r
        ht = grid.h_theta
        m = np.arange(n_theta // 2 + 1)
        mu = (2.0 - 2.0 * np.cos(m * ht)) / ht**2  # theta second-difference symbol

        r = grid.r[1:-1]  # rings 1..n_r-1 carry unknowns
        N = n_r - 1
        M = m.size
        sub = -(1.0 / h**2 - 1.0 / (2.0 * h * r))          # couples to ring i-1
        sup = -(1.0 / h**2 + 1.0 / (2.0 * h * r))          # couples to ring i+1
        diag = self.c + 2.0 / h**2 + mu[None, :] / r[:, None] ** 2  # (N, M)

        # center fold (mode 0 only): (c + 4/h^2) Xc - (4/h^2) X1 = Bc
        alpha = 4.0 / h**2
        self._center_div = self.c + alpha
        self._center_beta = alpha / self._center_div
        diag = diag.copy()
        diag[0, 0] += sub[0] * self._center_beta
        self._center_sub = sub[0]

        # Thomas factorization, vectorized over modes; ring-1 has no sub coupling
        # for m > 0 (those modes vanish at the origin).
        w = np.zeros((N, M))
        diagp = diag.copy()
        for i in range(1, N):
            w[i] = sub[i] / diagp[i - 1]
            diagp[i] = diag[i] - w[i] * sup[i - 1]
        self._w = w
        self._diagp = diagp
        self._sup = sup

    def solve(self, b, boundary):
        """Solve (c - lap) x = b with x = boundary on the outer ring.

        b is a full-grid (n_r+1, n_theta) array (row 0 = center, outer row
        ignored); returns a full-grid x with x[-1] set to boundary bitwise.
        """
        grid = self.grid
        n_r, n_theta = grid.n_r, grid.n_theta
        N = n_r - 1

        B = np.fft.rfft(b[1:n_r], axis=1)  # (N, M)
        g_hat = np.fft.rfft(np.asarray(boundary))
        B[N - 1] -= self._sup[N - 1] * g_hat

        bc = b[0, 0] * n_theta  # center amplitude in rfft units
        B[0, 0] -= self._center_sub * bc / self._center_div

        # forward sweep / back substitution
        Y = np.empty_like(B)
        Y[0] = B[0]
        for i in range(1, N):
            Y[i] = B[i] - self._w[i] * Y[i - 1]
        X = np.empty_like(B)
        X[N - 1] = Y[N - 1] / self._diagp[N - 1]
        for i in range(N - 2, -1, -1):
            X[i] = (Y[i] - self._sup[i] * X[i + 1]) / self._diagp[i]

        xc = (bc + 4.0 / grid.h_r**2 * X[0, 0].real) / self._center_div / n_theta

        out = np.empty((n_r + 1, n_theta))
        out[1:n_r] = np.fft.irfft(X, n=n_theta, axis=1)
        out[0] = xc
        out[-1] = boundary
        return out
