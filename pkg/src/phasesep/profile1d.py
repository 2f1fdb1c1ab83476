"""The one-dimensional profile: u'' = u v^2, v'' = v u^2 on a truncated line.

The entire problem is posed with u' -> a at +inf and v the mirror image of u;
we store u only and define v(x) = u(-x) as a reversed view, so the reflection
symmetry is exact bitwise and the crossing u = v sits at x = 0 by construction.
The truncated boundary conditions are u(-L) = 0 and u'(L) = a (one-sided), with
an O(exp(-cL)) truncation bias that the L-doubling test measures.

Newton relaxation uses a 4th-order 5-point stencil in the interior (the plain
2nd-order stencil leaves an O(h^2) ~ 1e-4 bias in the crossing value at
n = 4096, too coarse against the shooting oracle); the two rows next to the
boundary fall back to 2nd order where the solution is exponentially small or
affine, so their truncation error is immaterial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

_POSITIVITY_FLOOR = 1e-300


class ProfileSolveError(RuntimeError):
    """Newton relaxation failed; carries the final residual."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (final residual {residual:.3e})")
        self.residual = residual


@dataclass
class Profile1D:
    L: float
    a: float
    u: np.ndarray          # values at x_i = -L + 2L*i/n, i = 0..n
    tol: float
    residual: float

    @property
    def n(self):
        return len(self.u) - 1

    @property
    def x(self):
        return np.linspace(-self.L, self.L, self.n + 1)

    @property
    def v(self):
        """Mirror field v(x) = u(-x), shared storage."""
        return self.u[::-1]

    @property
    def h(self):
        return 2.0 * self.L / self.n

    def interp_u(self, x):
        return np.interp(x, self.x, self.u)

    def interp_v(self, x):
        return np.interp(x, self.x, self.v)

    def eval_u(self, x):
        """Cubic-spline evaluation; use for cross-grid comparisons (h^4 accurate)."""
        from scipy.interpolate import CubicSpline

        return CubicSpline(self.x, self.u)(x)

    def eval_v(self, x):
        from scipy.interpolate import CubicSpline

        return CubicSpline(self.x, self.v)(x)


def _residual(u, h, a):
    """Discrete residual of u'' = u v^2 with v = reversed u; BC rows included."""
    n = len(u) - 1
    v = u[::-1]
    F = np.empty(n + 1)
    F[0] = u[0]
    F[1] = (u[0] - 2 * u[1] + u[2]) / h**2 - u[1] * v[1] ** 2
    F[n - 1] = (u[n - 2] - 2 * u[n - 1] + u[n]) / h**2 - u[n - 1] * v[n - 1] ** 2
    i = np.arange(2, n - 1)
    F[i] = (-u[i - 2] + 16 * u[i - 1] - 30 * u[i] + 16 * u[i + 1] - u[i + 2]) / (
        12 * h**2
    ) - u[i] * v[i] ** 2
    F[n] = (3 * u[n] - 4 * u[n - 1] + u[n - 2]) / (2 * h) - a
    return F


class _Jacobian:
    """Sparse Jacobian with cached index pattern; data refreshed per iteration."""

    def __init__(self, n, h):
        self.n, self.h = n, h
        rows, cols = [], []
        # BC rows
        rows += [0]
        cols += [0]
        rows += [n, n, n]
        cols += [n, n - 1, n - 2]
        # 2nd-order rows 1 and n-1
        for i in (1, n - 1):
            rows += [i, i, i]
            cols += [i - 1, i, i + 1]
        # 4th-order interior rows
        i = np.arange(2, n - 1)
        for off in (-2, -1, 0, 1, 2):
            rows.append(i)
            cols.append(i + off)
        # reaction terms: diagonal and mirror anti-diagonal on rows 1..n-1
        i = np.arange(1, n)
        rows += [i, i]
        cols += [i, n - i]
        self.rows = np.concatenate([np.atleast_1d(r) for r in rows])
        self.cols = np.concatenate([np.atleast_1d(c) for c in cols])

    def build(self, u):
        n, h = self.n, self.h
        v = u[::-1]
        data = [1.0, 3.0 / (2 * h), -4.0 / (2 * h), 1.0 / (2 * h)]
        for i in (1, n - 1):
            data += [1.0 / h**2, -2.0 / h**2, 1.0 / h**2]
        m = n - 3  # number of 4th-order rows
        c = 12 * h**2
        for coef in (-1.0, 16.0, -30.0, 16.0, -1.0):
            data.append(np.full(m, coef / c))
        i = np.arange(1, n)
        data.append(-(v[i] ** 2))
        data.append(-2.0 * u[i] * v[i])
        flat = np.concatenate([np.atleast_1d(np.asarray(d, dtype=float)) for d in data])
        J = sp.coo_matrix((flat, (self.rows, self.cols)), shape=(n + 1, n + 1))
        return J.tocsc()


def _flow_phase(u, h, a, dt=0.25, steps=250):
    """Semi-implicit heat flow u_t = u_xx - u v^2 with lagged mirror coupling.

    The implicit operator (1/dt - D2 + diag(v^2)) is an M-matrix, so positivity
    is preserved and the far tail decays geometrically per step; this carries
    the ramp initial guess into Newton's basin without clamping artifacts.
    """
    n = len(u) - 1
    main = np.full(n + 1, 1.0 / dt + 2.0 / h**2)
    lower = np.full(n, -1.0 / h**2)
    upper = np.full(n, -1.0 / h**2)
    for _ in range(steps):
        v = u[::-1]
        A = sp.diags(
            [lower, main + v**2, upper], offsets=[-1, 0, 1], format="lil"
        )
        rhs = u / dt
        A[0, :3] = [1.0, 0.0, 0.0]
        rhs[0] = 0.0
        A[n, n - 2 :] = [1.0 / (2 * h), -4.0 / (2 * h), 3.0 / (2 * h)]
        rhs[n] = a
        u = spla.splu(A.tocsc()).solve(rhs)
    return u


def solve_profile(a, L, n, tol=1e-10, seed=0, max_iter=80):
    """Solve the truncated two-point problem: heat-flow start, Newton finish.

    Initial guess is a smoothed ramp a*x^+ plus a small seeded perturbation
    (seeds only move the start point; the discrete solution is unique, which is
    what the two-seed comparison exercises).  The sup-norm residual cannot be
    driven below the rounding floor ~eps * (a*L) / h^2 of the stencil
    evaluation (about 1e-10 at a=1, L=40, n=4096); pick tol accordingly.
    """
    if a <= 0:
        raise ValueError(f"slope a must be positive, got {a}")
    if L < 10.0 / a:
        raise ValueError(f"half-length L={L} too short; need L >= 10/a = {10.0 / a}")
    if n < 512 or n % 2:
        raise ValueError(f"need an even node count n >= 512, got {n}")

    x = np.linspace(-L, L, n + 1)
    w = 1.0 / np.sqrt(a)
    u = 0.5 * a * (x + np.sqrt(x**2 + 4 * w**2))
    rng = np.random.default_rng(seed)
    for _ in range(3):
        c = rng.uniform(-2 * w, 2 * w)
        amp = rng.uniform(-1e-2, 1e-2) * np.sqrt(a)
        u += amp * np.exp(-a * (x - c) ** 2)
    u = np.maximum(u, 0.0)
    u[0] = 0.0

    h = 2.0 * L / n
    u = _flow_phase(u, h, a)
    jac = _Jacobian(n, h)
    F = _residual(u, h, a)
    norm = np.abs(F).max()
    for _ in range(max_iter):
        if norm <= tol:
            break
        delta = spla.splu(jac.build(u)).solve(-F)
        step = 1.0
        for _ in range(20):
            # projected step: clamping keeps the iterate out of the spurious
            # negative oscillations in the far tail, where the true solution
            # underflows to zero anyway
            u_try = np.maximum(u + step * delta, 0.0)
            u_try[0] = 0.0
            F_try = _residual(u_try, h, a)
            norm_try = np.abs(F_try).max()
            if norm_try < norm:
                break
            step *= 0.5
        else:
            raise ProfileSolveError("Newton line search stalled", norm)
        u, F, norm = u_try, F_try, norm_try
    else:
        raise ProfileSolveError("Newton did not converge", norm)

    interior = slice(1, n)
    u[interior] = np.maximum(u[interior], _POSITIVITY_FLOOR)
    norm = np.abs(_residual(u, h, a)).max()
    return Profile1D(L=L, a=a, u=u, tol=tol, residual=float(norm))


def find_crossing(p):
    """Leftmost sign change of u - v, located by linear interpolation."""
    diff = p.u - p.v
    sign = np.sign(diff)
    idx = np.nonzero(np.diff(sign) != 0)[0]
    if len(idx) == 0:
        raise ValueError("profile has no u = v crossing")
    i = idx[0]
    x = p.x
    frac = diff[i] / (diff[i] - diff[i + 1])
    return float(x[i] + frac * (x[i + 1] - x[i]))


def normalize(p):
    """Translate the crossing to 0 and rescale so the slope is 1; idempotent.

    Mirror storage already pins the crossing at x = 0, so translation is a
    no-op for solver output; the rescale (u, v) -> (lam*u(lam*x), ...) with
    lam = a^(-1/2) is applied exactly (values * lam, nodes / lam), which keeps
    the discrete residual covariant (scaled by lam^3) instead of introducing
    resampling error.
    """
    x_c = find_crossing(p)
    if abs(x_c) > 0.5 * p.h:
        raise ValueError(f"crossing at {x_c}, not at the mirror center; profile not mirror-stored")
    if abs(p.a - 1.0) < 1e-14:
        return p
    lam = 1.0 / np.sqrt(p.a)
    return Profile1D(
        L=p.L / lam,
        a=1.0,
        u=lam * p.u,
        tol=p.tol * max(lam**3, 1.0),
        residual=p.residual * lam**3,
    )


def deviation_constant(p):
    """max over nodes of |u - a x^+| + |v - a x^-| (the uniform deviation bound)."""
    x = p.x
    dev = np.abs(p.u - p.a * np.maximum(x, 0.0)) + np.abs(p.v - p.a * np.maximum(-x, 0.0))
    return float(dev.max())


@dataclass
class TranslatedProfile:
    """A (u, v) pair on the profile grid without the mirror-storage constraint.

    Translation breaks the mirror symmetry about x = 0, so translated pairs are
    carried as raw arrays; sliding_compare only needs node values and the grid.
    """

    L: float
    a: float
    u: np.ndarray
    v: np.ndarray

    @property
    def n(self):
        return len(self.u) - 1

    @property
    def h(self):
        return 2.0 * self.L / self.n

    @property
    def x(self):
        return np.linspace(-self.L, self.L, self.n + 1)


def translate(p, shift_nodes):
    """The pair (u(x + t), v(x + t)) with t = shift_nodes * h, as a raw pair.

    The right edge is filled by the asymptotics (u affine with slope a, v -> 0),
    accurate to the exponential truncation level.
    """
    k = int(shift_nodes)
    if k < 0 or k > p.n // 2:
        raise ValueError("shift must be a modest nonnegative node count")
    n = p.n
    u2 = np.empty(n + 1)
    v2 = np.empty(n + 1)
    u2[: n + 1 - k] = p.u[k:]
    v2[: n + 1 - k] = p.v[k:]
    if k:
        u2[n + 1 - k :] = p.u[-1] + p.a * p.h * np.arange(1, k + 1)
        v2[n + 1 - k :] = 0.0
    return TranslatedProfile(L=p.L, a=p.a, u=u2, v=v2)


def sliding_compare(p1, p2, ordering_tol=1e-9):
    """Slide p1 to the right and find the smallest shift that dominates p2.

    Scans t = k*h downward from 16A/a; at each shift requires u_{1,t} >= u_2 and
    v_{1,t} <= v_2 on the overlap window (within ordering_tol, which absorbs
    solver noise at the 1e-10 level).  Returns (t0, gap) with
    gap = sup|u_{1,t0} - u_2| + sup|v_{1,t0} - v_2|.
    """
    if abs(p1.a - p2.a) > 1e-12:
        raise ValueError("profiles must be normalized to the same slope")
    if p1.n != p2.n or abs(p1.L - p2.L) > 1e-12:
        raise ValueError("profiles must share the same grid")
    h = p1.h
    n = p1.n
    A = max(deviation_constant(p1), deviation_constant(p2))
    k_start = int(np.ceil(16.0 * A / p1.a / h))
    if k_start >= n:
        raise ValueError("sliding start 16A/a exceeds the truncation window")

    def ordered(k):
        sl1 = slice(k, n + 1)
        sl2 = slice(0, n + 1 - k)
        ok_u = np.all(p1.u[sl1] >= p2.u[sl2] - ordering_tol)
        ok_v = np.all(p1.v[sl1] <= p2.v[sl2] + ordering_tol)
        return ok_u and ok_v

    if not ordered(k_start):
        raise ValueError(
            f"ordering fails at the sliding start t = 16A/a = {k_start * h:.3f}; "
            f"this would contradict uniqueness at the continuum level"
        )
    k0 = k_start
    for k in range(k_start - 1, -1, -1):
        if not ordered(k):
            break
        k0 = k
    sl1 = slice(k0, n + 1)
    sl2 = slice(0, n + 1 - k0)
    gap = float(
        np.abs(p1.u[sl1] - p2.u[sl2]).max() + np.abs(p1.v[sl1] - p2.v[sl2]).max()
    )
    return k0 * h, gap


def almgren_1d(p, r):
    """1D frequency N(r) = r * int_{-r}^{r}(u'^2 + v'^2 + u^2 v^2) / (boundary mass).

    Ambient-dimension-1 weights: H(r) = u(r)^2 + v(r)^2 + u(-r)^2 + v(-r)^2 and
    E(r) = r * integral.  Gradients live on cell midpoints ((u_{i+1}-u_i)/h
    against the midpoint rule), which is exact for the piecewise-linear pair
    (a x^+, a x^-) and 2nd-order for smooth profiles (the O(h) boundary terms
    cancel by the mirror symmetry).
    """
    if not 0.0 < r < p.L:
        raise ValueError(f"radius must lie in (0, L), got {r}")
    x = p.x
    h = p.h
    du = np.diff(p.u) / h
    dv = np.diff(p.v) / h
    grad_cells = du**2 + dv**2
    # integral of the cell-constant gradient part over [-r, r]
    lo, hi = -r, r
    left = np.maximum(x[:-1], lo)
    right = np.minimum(x[1:], hi)
    width = np.clip(right - left, 0.0, None)
    E_grad = float(np.sum(grad_cells * width))
    # potential term: trapezoid on nodes, clipped to the window
    pot = p.u**2 * p.v**2
    inside = (x >= lo - 1e-12) & (x <= hi + 1e-12)
    xs, ys = x[inside], pot[inside]
    if xs[0] > lo:
        xs = np.concatenate([[lo], xs])
        ys = np.concatenate([[np.interp(lo, x, pot)], ys])
    if xs[-1] < hi:
        xs = np.concatenate([xs, [hi]])
        ys = np.concatenate([ys, [np.interp(hi, x, pot)]])
    E = r * (E_grad + np.trapezoid(ys, xs))
    H = (
        p.interp_u(r) ** 2
        + p.interp_v(r) ** 2
        + p.interp_u(-r) ** 2
        + p.interp_v(-r) ** 2
    )
    if H == 0.0:
        raise ValueError("degenerate boundary mass in almgren_1d")
    return float(E / H)


def frequency_ladder(p, r_list):
    return np.array([almgren_1d(p, r) for r in r_list])


def decay_rate(p, x0=None):
    """Fitted local exponential decay rate of v at x0 (default L/2).

    Uses the first log-slope at x0; by log-convexity of -log v the envelope
    v(x) <= v(x0) exp(-c (x - x0)) then holds for x >= x0 + h.
    """
    if x0 is None:
        x0 = p.L / 2.0
    i0 = int(round((x0 + p.L) / p.h))
    v = p.v
    if v[i0] <= 0 or v[i0 + 1] <= 0:
        raise ValueError("v not positive at the fit point")
    c = (np.log(v[i0]) - np.log(v[i0 + 1])) / p.h
    return float(c), i0


# -- independent shooting oracle ----------------------------------------------------


def shooting_crossing_value(a=1.0, half_span=8.0, step=2e-3, max_bisect=100):
    """Crossing value u = v of the connecting orbit, by RK4 shooting + bisection.

    Integrates the first-order system for (u, u', v, v') from x = -half_span
    with u = 0, v = a*half_span, v' = -a, and bisects on s = u'(-half_span):
    too small and v crashes through zero, too large and v bounces upward.  The
    slope at +inf equals a automatically (conserved energy), so one parameter
    suffices.  Independent of the Newton BVP discretization.
    """

    def integrate(s, record=False):
        x = -half_span
        u, up, v, vp = 0.0, s, a * half_span, -a
        n_steps = int(round(2 * half_span / step))
        hist = [] if record else None
        for _ in range(n_steps):
            if record:
                hist.append((x, u, v))

            def f(state):
                u_, up_, v_, vp_ = state
                return (up_, u_ * v_ * v_, vp_, v_ * u_ * u_)

            state = (u, up, v, vp)
            k1 = f(state)
            k2 = f(tuple(state[i] + 0.5 * step * k1[i] for i in range(4)))
            k3 = f(tuple(state[i] + 0.5 * step * k2[i] for i in range(4)))
            k4 = f(tuple(state[i] + step * k3[i] for i in range(4)))
            u, up, v, vp = tuple(
                state[i] + step / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i])
                for i in range(4)
            )
            x += step
            if v < 0.0:
                return "crash", hist
            if vp > 0.0 and v > 1e-12 * a * half_span:
                return "bounce", hist
        if record:
            hist.append((x, u, v))
        return "through", hist

    s_lo = 0.0
    s_hi = 1e-8 * a
    for _ in range(200):
        outcome, _ = integrate(s_hi)
        if outcome != "crash":
            break
        s_hi *= 4.0
    else:
        raise RuntimeError("could not bracket the shooting parameter")

    for _ in range(max_bisect):
        mid = 0.5 * (s_lo + s_hi)
        outcome, _ = integrate(mid)
        if outcome == "crash":
            s_lo = mid
        elif outcome == "bounce":
            s_hi = mid
        else:
            break
        if s_hi - s_lo <= 1e-18 * s_hi:
            break

    _, hist = integrate(0.5 * (s_lo + s_hi), record=True)
    xs = np.array([p[0] for p in hist])
    us = np.array([p[1] for p in hist])
    vs = np.array([p[2] for p in hist])
    diff = us - vs
    idx = np.nonzero(np.diff(np.sign(diff)) != 0)[0]
    if len(idx) == 0:
        raise RuntimeError("no crossing found on the shooting orbit")
    i = idx[0]
    frac = diff[i] / (diff[i] - diff[i + 1])
    return float(us[i] + frac * (us[i + 1] - us[i]))
