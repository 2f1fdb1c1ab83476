"""Acceptance suite: every numbered criterion at its stated tolerance.

Heavy states (production steady solves, eigen ladders, profiles) are shared
through session fixtures, and the criterion-2 / criterion-6 artifacts are
exported under artifacts/acceptance/ in the documented formats so the figures
frontend can render from them without touching solver code.  Each criterion
prints one PASS line (visible with pytest -s; also appended to
artifacts/acceptance/summary.txt).
"""

import os

import numpy as np
import pytest

from phasesep.almgren import (
    E_of_r,
    H_of_r,
    N_of_r,
    check_doubling,
    check_growth,
    check_remainder,
    trace,
)
from phasesep.blowdown import blowdown_ladder, frequency_plateau
from phasesep.diskflow import init_state, relax, verify_theorem4
from phasesep.eigencircle import (
    CircleConfig,
    fit_gap,
    lagrange_multiplier,
    minimize_L,
    minimize_L_newton,
)
from phasesep.fields import harmonic_pair
from phasesep.geometry import make_disk_grid
from phasesep.io import (
    write_csv,
    write_energy_csv,
    write_fields,
    write_json,
    write_trace_csv,
)
from phasesep.multik import init_multik, relax_multik, verify_theorem15
from phasesep.profile1d import (
    almgren_1d,
    normalize,
    shooting_crossing_value,
    sliding_compare,
    solve_profile,
)
from phasesep.stability import (
    first_eigenvalue,
    lambda_monotone,
    profile_background,
    quadrature_weights,
    restrict_background,
    zero_background,
    _apply_operator,
)

ART = os.path.join(os.path.dirname(__file__), "..", "artifacts", "acceptance")

J01 = 2.404825557695773  # scipy.special.jn_zeros(0, 1)[0]

DISK_CASES = {
    1: dict(R=8.0, n_theta=512),
    2: dict(R=16.0, n_theta=512),
    3: dict(R=16.0, n_theta=504),  # 512 is not divisible by 4d = 12
}


def _report(line):
    print(line)
    os.makedirs(ART, exist_ok=True)
    with open(os.path.join(ART, "summary.txt"), "a") as fh:
        fh.write(line + "\n")


@pytest.fixture(scope="session", autouse=True)
def _fresh_summary():
    os.makedirs(ART, exist_ok=True)
    path = os.path.join(ART, "summary.txt")
    if os.path.exists(path):
        os.unlink(path)


@pytest.fixture(scope="session")
def steady_states():
    out = {}
    for d, case in DISK_CASES.items():
        grid = make_disk_grid(case["R"], 256, case["n_theta"], d)
        state = init_state(d, case["R"], grid)
        fields = relax(state, tol=1e-8, max_steps=20000)
        assert state.converged, f"disk d={d} failed to relax"
        out[d] = (state, fields)
        outdir = os.path.join(ART, f"disk_d{d}_R{int(case['R'])}")
        os.makedirs(outdir, exist_ok=True)
        write_fields(os.path.join(outdir, "fields.psfld"), fields)
        write_trace_csv(os.path.join(outdir, "trace.csv"), trace(fields))
        write_energy_csv(os.path.join(outdir, "energy.csv"), state.energy_trace)
        write_json(
            os.path.join(outdir, "report.json"), verify_theorem4(fields).to_dict()
        )
    return out


@pytest.fixture(scope="session")
def d2_R_ladder(steady_states):
    out = {16.0: steady_states[2][1]}
    for R in (8.0, 12.0):
        grid = make_disk_grid(R, 256, 512, 2)
        state = init_state(2, R, grid)
        out[R] = relax(state, tol=1e-8, max_steps=20000)
        assert state.converged
    return out


@pytest.fixture(scope="session")
def profiles():
    p1 = normalize(solve_profile(1.0, 40.0, 4096, tol=1e-10, seed=0))
    p2 = normalize(solve_profile(1.0, 40.0, 4096, tol=1e-10, seed=42))
    return p1, p2


@pytest.fixture(scope="session")
def eigen_ladders():
    out = {}
    lambdas = [1e2, 1e3, 1e4, 1e5, 1e6]
    for d in (2, 3):
        n = 4096 if d == 2 else 4608
        results = [
            minimize_L(CircleConfig(d, lam, n=n, tol=1e-9), seed=0) for lam in lambdas
        ]
        out[d] = (lambdas, results)
        outdir = os.path.join(ART, f"eigen_d{d}")
        os.makedirs(outdir, exist_ok=True)
        rows = []
        for lam, res in zip(lambdas, results):
            mult, _ = lagrange_multiplier(res)
            rows.append([d, lam, res.value, mult, res.iterations, res.residual])
        write_csv(
            os.path.join(outdir, "eigen.csv"),
            ["d", "Lambda", "L_value", "lambda_mult", "iterations", "residual"],
            rows,
        )
        C, slope = fit_gap(d, lambdas, [r.value for r in results])
        write_json(
            os.path.join(outdir, "fit.json"),
            {"d": d, "C": C, "slope": slope, "lambdas": lambdas,
             "values": [r.value for r in results]},
        )
    return out


@pytest.fixture(scope="session")
def multik_steady():
    grid = make_disk_grid(16.0, 256, 480, 3)
    state = init_multik(3, 3, 16.0, grid)
    relax_multik(state, tol=1e-8, max_steps=20000)
    assert state.converged
    outdir = os.path.join(ART, "multik_k3_d3_R16")
    os.makedirs(outdir, exist_ok=True)
    write_fields(os.path.join(outdir, "fields.psfld"), state.fields)
    return state


def test_criterion_1_harmonic_pair_oracle():
    for d, case in DISK_CASES.items():
        grid = make_disk_grid(case["R"], 256, case["n_theta"], d)
        pair = harmonic_pair(grid, d)
        R = case["R"]
        for r in (R / 4, R / 2, 3 * R / 4, R):
            assert H_of_r(pair, r) == pytest.approx(np.pi * r ** (2 * d), rel=1e-3)
            assert E_of_r(pair, r) == pytest.approx(np.pi * d * r ** (2 * d), rel=1e-3)
            assert N_of_r(pair, r) == pytest.approx(d, abs=1e-3)
    _report("ACCEPTANCE 1 PASS: harmonic-pair H, E within 1e-3 and N = d +- 1e-3 "
            "for d in {1,2,3} on the 256-ring production grids")


def test_criterion_2_theorem_41_suite(steady_states):
    for d, (state, fields) in steady_states.items():
        rep = verify_theorem4(
            fields, barrier_tol=1e-8, sym_tol=1e-12, freq_slack=1e-2
        )
        assert rep.sign_ok, f"d={d}: sign check failed"
        assert rep.barrier_ok, f"d={d}: {rep.details}"
        assert rep.symmetry_ok, f"d={d}: {rep.details['symmetry_residual']}"
        assert rep.frequency_ok, f"d={d}: max N = {rep.details['max_N']}"
    _report("ACCEPTANCE 2 PASS: steady states (1,8), (2,16), (3,16) pass all four "
            "structure checks (sign exact, u >= Phi+ - 1e-8, symmetry <= 1e-12, "
            "N <= d + 1e-2)")


def test_criterion_3_section5_inequalities(steady_states):
    for d, (state, fields) in steady_states.items():
        t = trace(fields)
        assert np.all(np.diff(t.N) >= -5e-3), f"d={d}: N not nondecreasing"
        rem = check_remainder(t, slack=1e-2)
        assert rem.passed, f"d={d}: remainder failed"
        dbl = check_doubling(t, d, slack=1e-2)
        assert dbl.passed, f"d={d}: doubling failed"
        gro = check_growth(t, d, slack=1e-2)
        assert gro.passed and gro.details["fitted_C"] >= 0.0
    _report("ACCEPTANCE 3 PASS: N nondecreasing (5e-3), remainder and doubling "
            "inequalities (1e-2), growth bound with fitted C >= 0 on all steady states")


def test_criterion_4_frequency_trend(d2_R_ladder):
    vals = {R: N_of_r(f, 0.9 * R) for R, f in d2_R_ladder.items()}
    assert vals[16.0] >= 1.8
    ordered = [vals[R] for R in (8.0, 12.0, 16.0)]
    assert np.all(np.diff(ordered) > 0)
    _report(f"ACCEPTANCE 4 PASS: N(0.9R) = "
            f"{', '.join(format(v, '.4f') for v in ordered)} monotone across "
            f"R in {{8, 12, 16}} with N(0.9*16) >= 1.8")


def test_criterion_5_1d_uniqueness(profiles):
    p1, p2 = profiles
    t0, gap = sliding_compare(p1, p2)
    assert gap <= 1e-6, f"sliding gap {gap}"
    m_oracle = shooting_crossing_value(1.0)
    m_solver = float(p1.u[p1.n // 2])
    assert abs(m_solver - m_oracle) <= 1e-6
    N32 = almgren_1d(p1, 32.0)
    assert 0.95 <= N32 <= 1.0
    _report(f"ACCEPTANCE 5 PASS: two-seed sliding gap {gap:.2e} <= 1e-6, shooting "
            f"agreement {abs(m_solver - m_oracle):.2e} <= 1e-6, N(32) = {N32:.4f}")


def test_criterion_6_eigenvalue_asymptotics(eigen_ladders):
    for d, (lambdas, results) in eigen_ladders.items():
        values = [r.value for r in results]
        assert np.all(np.array(values) <= d**2 + 1e-6)
        C, slope = fit_gap(d, lambdas, values)
        assert -0.35 <= slope <= -0.15, f"d={d}: slope {slope}"
        cfg = CircleConfig(d, 1e4, n=results[0].config.n, tol=1e-9)
        gap = abs(minimize_L(cfg, seed=0).value - minimize_L_newton(cfg).value)
        assert gap <= 1e-6, f"d={d}: two-optimizer gap {gap}"
    _report("ACCEPTANCE 6 PASS: L <= d^2 + 1e-6 on the Lambda ladder, log-log gap "
            "slopes within [-0.35, -0.15], two-optimizer agreement <= 1e-6 (d = 2, 3)")


def test_criterion_7_stability(profiles):
    # zero background: first Dirichlet eigenvalue of the disk
    g = make_disk_grid(5.0, 128, 64, 1)
    pair = first_eigenvalue(zero_background(g))
    exact = (J01 / 5.0) ** 2
    assert pair.lam == pytest.approx(exact, rel=1e-3)

    # 1D-profile background, nested balls
    p1, _ = profiles
    grid = make_disk_grid(20.0, 256, 128, 1)
    bg = profile_background(p1, grid)
    rep = lambda_monotone(bg, [5.0, 10.0, 20.0])
    assert min(rep["lam"]) >= -1e-6
    assert rep["nonincreasing"]

    # Rayleigh-gradient finite-difference consistency
    g_small = make_disk_grid(5.0, 24, 24, 1)
    bg_small = profile_background(p1, g_small)
    w = quadrature_weights(g_small)
    rng = np.random.default_rng(11)

    def make_pair():
        f = rng.standard_normal((2, g_small.n_r + 1, g_small.n_theta))
        f[:, 0, :] = f[:, 0, :1]
        f[:, -1, :] = 0.0
        return f

    x = make_pair()
    Ax = np.stack(_apply_operator(bg_small, x[0], x[1]))
    den = float(np.sum(w * x**2))
    rho = float(np.sum(w * (x * Ax))) / den

    def quot(z):
        Az = np.stack(_apply_operator(bg_small, z[0], z[1]))
        return float(np.sum(w * (z * Az))) / float(np.sum(w * z**2))

    eps = 1e-5
    for _ in range(10):
        y = make_pair()
        analytic = 2.0 * float(np.sum(w * (y * (Ax - rho * x)))) / den
        fd = (quot(x + eps * y) - quot(x - eps * y)) / (2 * eps)
        assert fd == pytest.approx(analytic, rel=1e-6, abs=1e-9)

    _report(f"ACCEPTANCE 7 PASS: zero-background lambda matches (j01/R)^2 to "
            f"{abs(pair.lam - exact) / exact:.1e} rel, profile-background lambda(R) = "
            f"{', '.join(format(v, '.4f') for v in rep['lam'])} nonincreasing and "
            f">= -1e-6, gradient FD check to 1e-6")


def test_criterion_8_blowdown(steady_states):
    _, fields = steady_states[2]
    rows = blowdown_ladder(fields, [4.0, 8.0, 12.0])
    resid = [r["residual"] for r in rows]
    assert np.all(np.diff(resid) < 0), f"residuals {resid}"
    pl = frequency_plateau(fields)
    assert pl.estimate == 2
    ratios = [r["ratio"] for r in rows]
    assert (max(ratios) - min(ratios)) / min(ratios) <= 0.15
    write_csv(
        os.path.join(ART, "disk_d2_R16", "blowdown.csv"),
        ["R", "L_R", "c", "residual", "N_plateau"],
        [[r["R"], r["L_R"], r["c"], r["residual"], pl.N_outer] for r in rows],
    )
    _report(f"ACCEPTANCE 8 PASS: harmonic-fit residuals {resid[0]:.3f} > "
            f"{resid[1]:.3f} > {resid[2]:.3f}, plateau estimate 2, L_R/R^d band "
            f"{(max(ratios) - min(ratios)) / min(ratios):.3f} <= 0.15")


def test_criterion_9_multik(multik_steady):
    rep = verify_theorem15(multik_steady)
    assert rep.symmetry_ok, rep.details["symmetry_residual"]
    assert rep.details["max_N"] <= 3 + 1e-2
    assert rep.b_plateau_ok, rep.details["b_top_octave_spread"]
    _report(f"ACCEPTANCE 9 PASS: k=3, d=3 steady state has exact symmetries, "
            f"max N = {rep.details['max_N']:.4f} <= 3.01, b-ladder top-octave "
            f"spread {rep.details['b_top_octave_spread']:.3f} <= 0.10")
