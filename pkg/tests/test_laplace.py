import numpy as np
import pytest

from phasesep.geometry import laplacian, make_disk_grid
from phasesep.laplace import DiskHelmholtzSolver


def dense_operator(grid, c):
    """(c - lap) assembled column by column through the stencil; interior unknowns."""
    n = 1 + (grid.n_r - 1) * grid.n_theta  # center + rings 1..n_r-1

    def pack(full):
        return np.concatenate([[full[0, 0]], full[1 : grid.n_r].ravel()])

    def unpack(vec):
        full = np.zeros((grid.n_r + 1, grid.n_theta))
        full[0] = vec[0]
        full[1 : grid.n_r] = vec[1:].reshape(grid.n_r - 1, grid.n_theta)
        return full

    A = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        A[:, j] = pack(c * unpack(e) - laplacian(grid, unpack(e)))
    return A, pack, unpack


@pytest.mark.parametrize("c", [0.3, 25.0])
def test_solver_matches_dense(c):
    grid = make_disk_grid(1.3, 10, 16, 1)
    rng = np.random.default_rng(0)
    b_full = np.zeros((grid.n_r + 1, grid.n_theta))
    b_full[0] = rng.normal()
    b_full[1 : grid.n_r] = rng.normal(size=(grid.n_r - 1, grid.n_theta))
    boundary = rng.normal(size=grid.n_theta)

    A, pack, unpack = dense_operator(grid, c)
    # lift the boundary into the rhs: the ring n_r-1 stencil sees it through lap
    lift = np.zeros((grid.n_r + 1, grid.n_theta))
    lift[-1] = boundary
    rhs = pack(b_full) + pack(laplacian(grid, lift))
    x_dense = unpack(np.linalg.solve(A, rhs))

    x = DiskHelmholtzSolver(grid, c).solve(b_full, boundary)
    assert np.allclose(x[: grid.n_r], x_dense[: grid.n_r], atol=1e-12)
    assert np.array_equal(x[-1], boundary)


def test_solver_roundtrip():
    grid = make_disk_grid(2.0, 24, 32, 2)
    rng = np.random.default_rng(1)
    x0 = np.zeros((grid.n_r + 1, grid.n_theta))
    x0[0] = 0.7
    x0[1:] = rng.normal(size=(grid.n_r, grid.n_theta))
    c = 3.0
    b = c * x0 - laplacian(grid, x0)
    x = DiskHelmholtzSolver(grid, c).solve(b, x0[-1])
    assert np.abs(x - x0)[: grid.n_r].max() < 1e-11
