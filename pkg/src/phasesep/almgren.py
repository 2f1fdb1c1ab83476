"""Frequency-function machinery on disk fields: H, E, E-hat, N, and the
remainder / doubling / growth checks.

With ambient dimension n = 2 the weights r^{1-n} and r^{2-n} make
H(r) the plain theta-integral of the squared components on the circle and
E(r) the bulk integral up to r.  Ring quantities are precomputed once per
field set; radii off the ring ladder use linear interpolation of field values
(for H) and of the cumulative integral (for E), as ring-aligned ladders avoid
interpolation entirely.

The checks mirror the three inequalities satisfied by symmetric solutions:
the cumulative coupling bound (remainder), H(r2)/H(r1) <= e^d (r2/r1)^{2d}
(doubling), and the lower growth bound on r^{-2d} E-hat whose monotone form is
log(r^{-2d} Ehat(r)) - 2C r^{-1/2} nondecreasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import dihedral_residual, multik_residual
from .geometry import pairwise_coupling, staggered_gradient_rings, theta_integral


@dataclass
class AlmgrenTrace:
    """Sampled (r, H, E, Ehat, N, coupling) rows for one field set."""

    r: np.ndarray
    H: np.ndarray
    E: np.ndarray
    Ehat: np.ndarray
    N: np.ndarray
    coupling: np.ndarray
    n: int                      # ambient dimension (2 for disk fields, 1 for profiles)
    d: float
    sym_residual: float = np.inf
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("trace radii must be strictly increasing")

    def rows(self):
        return zip(self.r, self.H, self.E, self.Ehat, self.N, self.coupling)


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst_margin: float
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "worst_margin": float(self.worst_margin),
            "details": {k: v for k, v in self.details.items()},
        }


class _RingData:
    """Per-ring circle integrals and cumulative bulk integrals for a FieldSet.

    The gradient energy is split onto its staggered grids (theta part on
    rings, radial part on half-ring cells) so that the positive/negative parts
    of harmonic polynomials, whose kinks sit exactly on nodal grid lines, are
    integrated without smearing.
    """

    def __init__(self, fields):
        grid = fields.grid
        self.grid = grid
        sq = fields.values**2
        self.boundary_sq = theta_integral(grid, sq.sum(axis=0))          # ∮ sum u_i^2

        theta_ring = np.zeros(grid.n_r + 1)
        radial_cell = np.zeros(grid.n_r)
        for u in fields.values:
            tr, rc = staggered_gradient_rings(grid, u)
            theta_ring += tr
            radial_cell += rc
        coup = pairwise_coupling(fields.values)

        self.ring_theta = theta_ring * grid.r            # d(bulk)/dr at rings
        self.ring_coup = theta_integral(grid, coup) * grid.r
        r_mid = 0.5 * (grid.r[:-1] + grid.r[1:])
        self.cell_radial = radial_cell * r_mid * grid.h_r  # per-cell bulk content

        def cum_trapz(ring):
            seg = 0.5 * (ring[1:] + ring[:-1]) * grid.h_r
            return np.concatenate([[0.0], np.cumsum(seg)])

        self.cum_theta = cum_trapz(self.ring_theta)
        self.cum_coup = cum_trapz(self.ring_coup)
        self.cum_radial = np.concatenate([[0.0], np.cumsum(self.cell_radial)])

    def _locate(self, r):
        grid = self.grid
        if not 0.0 < r <= grid.R + 1e-12:
            raise ValueError(f"radius {r} outside (0, {grid.R}]")
        pos = min(r, grid.R) / grid.h_r
        i = min(int(np.floor(pos)), grid.n_r - 1)
        return i, pos - i

    def cum_ring_at(self, cum, ring, r):
        """Cumulative ring-based (trapezoid) integral up to radius r."""
        i, frac = self._locate(r)
        if frac == 0.0:
            return float(cum[i])
        r_i = self.grid.r[i]
        f_r = ring[i] + frac * (ring[i + 1] - ring[i])
        return float(cum[i] + 0.5 * (ring[i] + f_r) * (r - r_i))

    def cum_cell_at(self, r):
        """Cumulative cell-based (midpoint) radial-gradient integral up to r."""
        i, frac = self._locate(r)
        out = self.cum_radial[i]
        if frac:
            out = out + frac * self.cell_radial[i]
        return float(out)

    def grad_at(self, r):
        return self.cum_ring_at(self.cum_theta, self.ring_theta, r) + self.cum_cell_at(r)

    def coup_at(self, r):
        return self.cum_ring_at(self.cum_coup, self.ring_coup, r)


def H_of_r(fields, r, _data=None):
    """H(r) = r^{1-n} ∫_{∂B_r} sum u_i^2  (= the theta integral for n = 2)."""
    data = _data or _RingData(fields)
    i, frac = data._locate(r)
    if frac == 0.0:
        return float(data.boundary_sq[i])
    sq_lo = fields.values[:, i, :]
    sq_hi = fields.values[:, i + 1, :]
    interp = (1 - frac) * sq_lo + frac * sq_hi
    return float(fields.grid.h_theta * (interp**2).sum())


def E_of_r(fields, r, _data=None):
    """E(r) = r^{2-n} ∫_{B_r} sum |grad u_i|^2 + sum_{i<j} u_i^2 u_j^2 (n = 2)."""
    data = _data or _RingData(fields)
    return data.grad_at(r) + data.coup_at(r)


def Ehat_of_r(fields, r, _data=None):
    """E(r) with the pairwise coupling counted twice."""
    data = _data or _RingData(fields)
    return data.grad_at(r) + 2.0 * data.coup_at(r)


def N_of_r(fields, r):
    H = H_of_r(fields, r)
    if H <= 0.0:
        raise ValueError(f"degenerate field: H({r}) = 0")
    return E_of_r(fields, r) / H


def default_ladder(grid, count=32, r_min_frac=0.125):
    """Ring-aligned ladder from r_min_frac*R to R."""
    lo = max(1, int(np.ceil(grid.n_r * r_min_frac)))
    idx = np.unique(np.linspace(lo, grid.n_r, count).round().astype(int))
    return grid.r[idx]


def trace(fields, r_list=None):
    """Evaluate the full (r, H, E, Ehat, N, coupling) ladder for a field set.

    coupling(r) = 2 ∫_{B_r} sum_{i<j} u_i^2 u_j^2 / ∫_{∂B_r} sum u_i^2 is the
    integrand of the remainder inequality.  The trace records the symmetry
    residual of the field set so downstream checks can verify their symmetry
    hypothesis.
    """
    grid = fields.grid
    if r_list is None:
        r_list = default_ladder(grid)
    r_list = np.asarray(sorted(float(r) for r in r_list))
    data = _RingData(fields)
    H = np.array([H_of_r(fields, r, data) for r in r_list])
    if np.any(H <= 0.0):
        raise ValueError("degenerate field: H vanishes on the ladder")
    E = np.array([E_of_r(fields, r, data) for r in r_list])
    Ehat = np.array([Ehat_of_r(fields, r, data) for r in r_list])
    coup = np.array(
        [2.0 * data.coup_at(r) / (r * H[i]) for i, r in enumerate(r_list)]
    )
    if fields.k == 2:
        sym = dihedral_residual(fields)
    else:
        h = int(round(2 * fields.d)) // fields.k
        sym = multik_residual(fields, h)
    return AlmgrenTrace(
        r=r_list,
        H=H,
        E=E,
        Ehat=Ehat,
        N=E / H,
        coupling=coup,
        n=2,
        d=fields.d,
        sym_residual=sym,
    )


def check_remainder(t, slack=1e-2):
    """Cumulative coupling bound: ∫_0^r coupling(s) ds <= N(r) (1 + slack)."""
    # trapezoid from 0, using coupling(0) = 0
    rr = np.concatenate([[0.0], t.r])
    cc = np.concatenate([[0.0], t.coupling])
    cum = np.cumsum(0.5 * (cc[1:] + cc[:-1]) * np.diff(rr))
    margin = float((t.N * (1 + slack) - cum).min())
    return CheckReport(
        name="remainder",
        passed=bool(np.all(cum <= t.N * (1 + slack))),
        worst_margin=margin,
        details={"max_cumulative_coupling": float(cum.max())},
    )


def check_doubling(t, d, slack=1e-2):
    """H(r2)/H(r1) <= e^d (r2/r1)^{2d} (1 + slack) over all ladder pairs with r1 > 1.

    The proposition assumes N(R) <= d; that hypothesis is checked first and
    reported.
    """
    hypothesis = bool(t.N[-1] <= d + slack)
    sel = t.r > 1.0
    r, H = t.r[sel], t.H[sel]
    worst = np.inf
    ok = True
    for a in range(len(r)):
        ratio = H[a:] / H[a]
        bound = np.e**d * (r[a:] / r[a]) ** (2 * d) * (1 + slack)
        worst = min(worst, float((bound - ratio).min()))
        ok = ok and bool(np.all(ratio <= bound))
    return CheckReport(
        name="doubling",
        passed=ok and hypothesis,
        worst_margin=worst if np.isfinite(worst) else 0.0,
        details={"hypothesis_N_le_d": hypothesis, "pairs_r_gt_1": int(sel.sum())},
    )


def check_growth(t, d, slack=1e-2, sym_tol=1e-9):
    """Fit the smallest C >= 0 with log(r^{-2d} Ehat) - 2C r^{-1/2} nondecreasing.

    Requires the trace to come from a symmetric field set (the bound only holds
    under the dihedral/rotational symmetries).
    """
    if t.sym_residual > sym_tol:
        raise ValueError(
            f"growth bound requires symmetric fields; residual {t.sym_residual:.2e}"
        )
    if np.any(t.Ehat <= 0.0):
        raise ValueError("Ehat must be positive on the ladder")
    g = np.log(t.Ehat / t.r ** (2 * d))
    dg = np.diff(g)
    delta = 2.0 * (t.r[:-1] ** -0.5 - t.r[1:] ** -0.5)  # positive
    C = float(np.max(np.maximum(0.0, -dg / delta)))
    phi = g - 2.0 * C / np.sqrt(t.r)
    ok = bool(np.all(np.diff(phi) >= -slack))
    return CheckReport(
        name="growth",
        passed=ok,
        worst_margin=float(np.diff(phi).min()) if len(phi) > 1 else 0.0,
        details={"fitted_C": C},
    )


def plateau_estimates(t, d):
    """Top-octave plateau values of H/r^{2d}, E/r^{2d} and N (limit diagnostics)."""
    top = t.r >= t.r[-1] / 2.0
    return {
        "H_over_r2d": float(np.mean(t.H[top] / t.r[top] ** (2 * d))),
        "E_over_r2d": float(np.mean(t.E[top] / t.r[top] ** (2 * d))),
        "N_plateau": float(np.mean(t.N[top])),
        "H_spread": float(
            (t.H[top] / t.r[top] ** (2 * d)).max() / (t.H[top] / t.r[top] ** (2 * d)).min()
            - 1.0
        ),
    }
