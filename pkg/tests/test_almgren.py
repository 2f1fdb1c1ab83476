import numpy as np
import pytest

from phasesep.almgren import (
    AlmgrenTrace,
    Ehat_of_r,
    E_of_r,
    H_of_r,
    N_of_r,
    check_doubling,
    check_growth,
    check_remainder,
    default_ladder,
    trace,
)
from phasesep.fields import FieldSet, harmonic_pair
from phasesep.geometry import make_disk_grid


@pytest.fixture(scope="module")
def grid():
    return make_disk_grid(2.0, 128, 384, 2)


@pytest.fixture(scope="module")
def pair(grid):
    return harmonic_pair(grid, 2)


def test_H_harmonic_pair_exact(grid, pair):
    # theta-trapezoid is exact for cos^2(d theta): H(r) = pi r^(2d) to rounding
    for r in (0.5, 1.0, 1.5, 2.0):
        assert H_of_r(pair, r) == pytest.approx(np.pi * r**4, rel=1e-10)


def test_H_constant_and_zero(grid):
    c = 0.7
    const = FieldSet(grid, 1, np.full((1, grid.n_r + 1, grid.n_theta), c))
    assert H_of_r(const, 1.3) == pytest.approx(2 * np.pi * c**2, rel=1e-12)
    zero = FieldSet(grid, 1, np.zeros((1, grid.n_r + 1, grid.n_theta)))
    assert H_of_r(zero, 1.0) == 0.0
    with pytest.raises(ValueError):
        N_of_r(zero, 1.0)


def test_E_harmonic_pair(grid, pair):
    for r in (1.0, 1.5, 2.0):
        assert E_of_r(pair, r) == pytest.approx(2 * np.pi * r**4, rel=1e-3)


def test_E_constant_fields(grid):
    c1, c2 = 0.5, 1.5
    vals = np.stack(
        [
            np.full((grid.n_r + 1, grid.n_theta), c1),
            np.full((grid.n_r + 1, grid.n_theta), c2),
        ]
    )
    f = FieldSet(grid, 1, vals)
    r = 1.2
    assert E_of_r(f, r) == pytest.approx(np.pi * r**2 * c1**2 * c2**2, rel=1e-4)
    # Ehat doubles the coupling-only energy
    assert Ehat_of_r(f, r) == pytest.approx(2 * E_of_r(f, r), rel=1e-12)


def test_N_harmonic_is_degree(grid, pair):
    for r in (0.5, 1.0, 2.0):
        assert N_of_r(pair, r) == pytest.approx(2.0, abs=1e-3)


def test_Ehat_equals_E_for_harmonic(grid, pair):
    for r in (1.0, 2.0):
        assert Ehat_of_r(pair, r) == pytest.approx(E_of_r(pair, r), rel=1e-12)


def test_trace_and_invariants(grid, pair):
    t = trace(pair)
    assert np.all(np.diff(t.r) > 0)
    assert np.all(t.H > 0)
    assert np.allclose(t.N, t.E / t.H)
    assert np.all(np.diff(t.E) >= 0)  # nonnegative integrand, exact
    assert np.all(t.Ehat >= t.E)
    assert t.sym_residual == 0.0


def test_trace_rejects_unsorted():
    with pytest.raises(ValueError):
        AlmgrenTrace(
            r=np.array([1.0, 1.0]),
            H=np.ones(2),
            E=np.ones(2),
            Ehat=np.ones(2),
            N=np.ones(2),
            coupling=np.zeros(2),
            n=2,
            d=1,
        )


def test_remainder_harmonic_and_negative_control(grid, pair):
    t = trace(pair)
    rep = check_remainder(t)
    assert rep.passed  # coupling identically 0 <= N = d
    bad = AlmgrenTrace(
        r=t.r,
        H=t.H,
        E=t.E,
        Ehat=t.Ehat,
        N=t.N,
        coupling=t.coupling + 10.0,  # inflated coupling violates the bound
        n=2,
        d=t.d,
        sym_residual=0.0,
    )
    assert not check_remainder(bad).passed


def test_doubling_harmonic_and_negative_control(grid, pair):
    t = trace(pair)
    rep = check_doubling(t, 2)
    assert rep.passed
    # a field inflated at the outer rim grows faster than the bound allows
    bad_H = t.H.copy()
    bad_H[-1] *= 1e6
    bad = AlmgrenTrace(
        r=t.r, H=bad_H, E=t.E, Ehat=t.Ehat, N=t.N, coupling=t.coupling, n=2, d=t.d
    )
    assert not check_doubling(bad, 2).passed


def test_growth_harmonic(grid, pair):
    t = trace(pair)
    rep = check_growth(t, 2)
    assert rep.passed
    assert rep.details["fitted_C"] <= 1e-2  # r^{-2d} Ehat constant up to quadrature wiggle


def test_growth_rejects_asymmetric(grid, pair):
    vals = pair.values.copy()
    vals[0, 5, 3] += 1.0  # break the reflection symmetry
    broken = FieldSet(grid, 2, vals)
    t = trace(broken)
    assert t.sym_residual > 0
    with pytest.raises(ValueError):
        check_growth(t, 2)


def test_default_ladder(grid):
    lad = default_ladder(grid)
    assert lad[0] >= grid.R * 0.125 - 1e-12
    assert lad[-1] == grid.R
