"""Time integration of the two-species system on the moving domain.

The moving interval [g(t), h(t)] is mapped to the reference interval
[-1, 1] by x = (g+h)/2 + y*(h-g)/2.  In the mapped frame both species
gain an advection term zeta(t,y)*f_y from the mesh motion, and the local
diffusion of v picks up the factor xi(t) = (2/(h-g))^2.

One step is implicit-explicit Euler:

  1. front velocities from the current state; fronts advance explicitly;
  2. transform coefficients rebuilt on the new geometry;
  3. u-samples (w) advance explicitly: upwind advection, nonlocal
     operator on the mapped physical nodes, reaction;
  4. v-samples (z) advance with the stiff d2*xi*z_yy term implicit
     (tridiagonal solve) and everything else explicit;
  5. roundoff-scale negatives are clamped to zero, anything worse is a
     solver failure; state invariants are re-checked.

u is only Lipschitz in x, so first order in time plus upwind advection
is the appropriate accuracy class; the upwind choice also preserves
positivity under the stability bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import SolverFailure
from .kernels import Kernel
from .model import Bounds, InitialData, ModelParams, field_bounds, reaction

# negatives above this floor are roundoff and are clamped to zero
_NEG_FLOOR = -1e-13
# multiplicative slack on the 0 <= w <= k1, 0 <= z <= k2 bound checks
_BOUND_SLACK = 1e-8
# safety factor in the stability bound dt <= 0.4*min(...)
_CFL = 0.4


@dataclass(frozen=True)
class ReferenceGrid:
    """Uniform nodes on the reference interval [-1, 1]."""

    n: int  # interval count; n+1 nodes

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"reference grid needs at least 8 intervals, got {self.n}")

    @property
    def y(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.n + 1)

    @property
    def dy(self) -> float:
        return 2.0 / self.n


@dataclass
class State:
    """Fields sampled on the reference nodes at one instant."""

    t: float
    g: float
    h: float
    w: np.ndarray  # u(t, x(t,y_i))
    z: np.ndarray  # v(t, x(t,y_i))


@dataclass(frozen=True)
class TransformedCoeffs:
    xi: float
    zeta: np.ndarray


@dataclass
class Snapshot:
    t: float
    g: float
    h: float
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray


@dataclass
class Trajectory:
    t: np.ndarray
    g: np.ndarray
    h: np.ndarray
    gdot: np.ndarray
    hdot: np.ndarray
    sup_u: np.ndarray
    sup_v: np.ndarray
    u_center: np.ndarray
    v_center: np.ndarray
    termination: str
    n: int  # reference-grid interval count of the producing run
    snapshots: list = field(default_factory=list)

    @property
    def length(self) -> np.ndarray:
        return self.h - self.g


@dataclass
class RunControl:
    horizon: float
    n: int = 200
    dt: Optional[float] = None  # None: derived from the stability bound
    record_every: int = 10
    snapshot_every: int = 0  # 0 disables field snapshots
    stop_rule: Optional[Callable] = None  # called at record points; returns reason or None
    strict: bool = True  # enforce bounds and front monotonicity

    def __post_init__(self):
        if not (self.horizon > 0):
            raise ValueError(f"horizon must be positive, got {self.horizon!r}")
        if self.n < 8:
            raise ValueError(f"n must be at least 8, got {self.n}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if self.dt is not None and not (self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")


def transform_coefficients(s: State, gdot: float, hdot: float) -> TransformedCoeffs:
    """Mapped-frame coefficients: xi = (2/(h-g))^2 and the per-node
    advection speed zeta_i = (2/(h-g)) * x_t(t, y_i)."""
    length = s.h - s.g
    if not (length > 0):
        raise SolverFailure(f"degenerate domain: g={s.g}, h={s.h}")
    y = np.linspace(-1.0, 1.0, len(s.w))
    x_t = 0.5 * (gdot + hdot) + y * 0.5 * (hdot - gdot)
    scale = 2.0 / length
    return TransformedCoeffs(xi=scale * scale, zeta=scale * x_t)


def _front_slopes(z: np.ndarray, dy: float, length: float) -> tuple[float, float]:
    """One-sided second-order v_x at the left and right fronts (physical x)."""
    scale = 2.0 / length
    # Dirichlet values z[0] = z[-1] = 0 are used explicitly
    vx_left = (-3.0 * z[0] + 4.0 * z[1] - z[2]) / (2.0 * dy) * scale
    vx_right = (3.0 * z[-1] - 4.0 * z[-2] + z[-3]) / (2.0 * dy) * scale
    return vx_left, vx_right


def boundary_velocities(s: State, p: ModelParams, k: Kernel) -> tuple[float, float]:
    """Front law: h' = -mu*v_x(h) + rho*int tail(h-x)*u dx, and the
    mirrored expression at g.  The inner dispersal integral is collapsed
    into the kernel's closed-form tail mass; the outer integral is
    trapezoid on the mapped nodes.  Sums use fsum so mirror-symmetric
    states give gdot = -hdot exactly."""
    if np.any(~np.isfinite(s.w)) or np.any(~np.isfinite(s.z)):
        raise SolverFailure(f"non-finite field values at t={s.t}")
    n = len(s.w) - 1
    dy = 2.0 / n
    length = s.h - s.g
    vx_left, vx_right = _front_slopes(s.z, dy, length)
    x = 0.5 * (s.g + s.h) + np.linspace(-1.0, 1.0, n + 1) * 0.5 * length
    wq = np.full(n + 1, dy * 0.5 * length)
    wq[0] *= 0.5
    wq[-1] *= 0.5
    flux_right = math.fsum(wq * k.tail_mass(s.h - x) * s.w)
    flux_left = math.fsum(wq * k.tail_mass(x - s.g) * s.w)
    hdot = -p.mu * vx_right + p.rho * flux_right
    gdot = -p.mu * vx_left - p.rho * flux_left
    return gdot, hdot


class _Stepper:
    """Carries the per-run immutable pieces so the hot loop only builds
    what the moving geometry forces it to rebuild."""

    def __init__(self, p: ModelParams, k: Kernel, n: int, bounds: Bounds, strict: bool = True):
        self.p = p
        self.k = k
        self.grid = ReferenceGrid(n)
        self.bounds = bounds
        self.strict = strict
        y = self.grid.y
        self.y = y
        self.dy = self.grid.dy
        self.ydiff = np.subtract.outer(y, y)
        wq = np.full(n + 1, self.dy)
        wq[0] = wq[-1] = 0.5 * self.dy
        self.wq_ref = wq  # reference-interval trapezoid weights; scale by (h-g)/2
        self.rate_cap = p.d1 + p.a + p.b * bounds.k2 + p.c * bounds.k1 + 1.0

    def velocities(self, s: State) -> tuple[float, float]:
        return boundary_velocities(s, self.p, self.k)

    def step(self, s: State, dt: float, gdot: Optional[float] = None, hdot: Optional[float] = None) -> State:
        p, k = self.p, self.k
        dy = self.dy
        if gdot is None or hdot is None:
            gdot, hdot = self.velocities(s)

        g1 = s.g + dt * gdot
        h1 = s.h + dt * hdot
        length = h1 - g1
        if not (length > 0):
            raise SolverFailure(f"domain collapsed at t={s.t + dt}: g={g1}, h={h1}")

        # coefficients on the advanced geometry, start-of-step velocities
        scale = 2.0 / length
        zeta = scale * (0.5 * (gdot + hdot) + self.y * 0.5 * (hdot - gdot))
        xi = scale * scale

        zeta_max = float(np.max(np.abs(zeta)))
        dt_cap = _CFL * min(
            dy / zeta_max if zeta_max > 0 else math.inf,
            1.0 / self.rate_cap,
        )
        if dt > dt_cap:
            raise SolverFailure(
                f"stability bound violated at t={s.t}: dt={dt:.3e} > {dt_cap:.3e} "
                f"(max |zeta|={zeta_max:.3e}); rerun with a smaller dt"
            )

        w, z = s.w, s.z
        f1, f2 = reaction(p, w, z)

        # nonlocal operator on mapped physical nodes
        Jm = k(self.ydiff * (0.5 * length))
        Ku = Jm @ (self.wq_ref * (0.5 * length) * w)

        dw = _upwind(w, zeta, dy)
        w1 = w + dt * (zeta * dw + p.d1 * (Ku - w) + f1)
        w1[0] = 0.0
        w1[-1] = 0.0

        dz = _upwind(z, zeta, dy)
        rhs = z + dt * (zeta * dz + f2)
        z1 = np.zeros_like(z)
        alpha = dt * p.d2 * xi / (dy * dy)
        m = len(z) - 2
        ab = np.empty((3, m))
        ab[0, :] = -alpha
        ab[1, :] = 1.0 + 2.0 * alpha
        ab[2, :] = -alpha
        try:
            z1[1:-1] = solve_banded((1, 1), ab, rhs[1:-1])
        except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
            raise SolverFailure(f"tridiagonal solve failed at t={s.t}: {exc}") from exc

        _clamp_roundoff(w1, s.t + dt, "u")
        _clamp_roundoff(z1, s.t + dt, "v")

        out = State(t=s.t + dt, g=g1, h=h1, w=w1, z=z1)
        if self.strict:
            self._check_invariants(s, out)
        return out

    def _check_invariants(self, before: State, after: State) -> None:
        if not (after.h > before.h and after.g < before.g):
            raise SolverFailure(
                f"front monotonicity violated at t={after.t}: "
                f"h {before.h} -> {after.h}, g {before.g} -> {after.g}"
            )
        wmax = float(after.w.max())
        zmax = float(after.z.max())
        if not (wmax <= self.bounds.k1 * (1.0 + _BOUND_SLACK)):
            raise SolverFailure(f"u bound breached at t={after.t}: max u={wmax} > k1={self.bounds.k1}")
        if not (zmax <= self.bounds.k2 * (1.0 + _BOUND_SLACK)):
            raise SolverFailure(f"v bound breached at t={after.t}: max v={zmax} > k2={self.bounds.k2}")
        if np.any(~np.isfinite(after.w)) or np.any(~np.isfinite(after.z)):
            raise SolverFailure(f"non-finite field values at t={after.t}")


def _upwind(f: np.ndarray, zeta: np.ndarray, dy: float) -> np.ndarray:
    """First-order upwind derivative for the term f_t = zeta*f_y + ...;
    positive zeta pulls the value from the right neighbor."""
    d = np.zeros_like(f)
    fwd = (f[2:] - f[1:-1]) / dy
    bwd = (f[1:-1] - f[:-2]) / dy
    d[1:-1] = np.where(zeta[1:-1] > 0.0, fwd, bwd)
    return d


def _clamp_roundoff(f: np.ndarray, t: float, name: str) -> None:
    fmin = float(f.min())
    if fmin < _NEG_FLOOR:
        raise SolverFailure(
            f"{name} fell to {fmin:.3e} at t={t}, below the roundoff floor {_NEG_FLOOR}; "
            "the scheme has lost positivity"
        )
    if fmin < 0.0:
        np.clip(f, 0.0, None, out=f)


def step(s: State, p: ModelParams, k: Kernel, dt: float, strict: bool = True) -> State:
    """One IMEX Euler step (standalone form; run() uses the cached path).

    Bounds for the invariant check are derived from the current state,
    treating it as initial data.
    """
    n = len(s.w) - 1
    h0 = 0.5 * (s.h - s.g)
    dy = 2.0 / n
    slope = float(np.max(np.abs(np.diff(s.z)))) / (dy * 0.5 * (s.h - s.g))
    bounds = field_bounds(p, h0, float(s.w.max()), float(s.z.max()), slope)
    return _Stepper(p, k, n, bounds, strict=strict).step(s, dt)


def initial_state(init: InitialData, n: int) -> State:
    grid = ReferenceGrid(n)
    x = grid.y * init.h0
    w = np.asarray(init.u0(x), dtype=float)
    z = np.asarray(init.v0(x), dtype=float)
    w[0] = w[-1] = 0.0
    z[0] = z[-1] = 0.0
    if w.min() < 0 or z.min() < 0:
        raise ValueError("initial profiles must be nonnegative")
    return State(t=0.0, g=-init.h0, h=init.h0, w=w, z=z)


# advection headroom in auto_dt: front speeds may transiently exceed their
# initial values by this factor before the per-step stability check trips
_ZETA_HEADROOM = 4.0


def auto_dt(p: ModelParams, init: InitialData, k: Kernel, n: int) -> float:
    """Step size from the stability bound at the initial state.

    The advection part uses the actual initial front velocities with a
    headroom factor rather than the worst-case speed bound, which is
    hopelessly pessimistic for small data; if speeds later outgrow the
    headroom the per-step stability check aborts the run."""
    state = initial_state(init, n)
    dy = 2.0 / n
    slope0 = float(np.max(np.abs(np.diff(state.z)))) / (dy * init.h0)
    bounds = field_bounds(p, init.h0, float(state.w.max()), float(state.z.max()), slope0)
    gdot, hdot = boundary_velocities(state, p, k)
    zeta0 = max(abs(gdot), abs(hdot)) / init.h0
    return 0.9 * _CFL * min(
        dy / (_ZETA_HEADROOM * zeta0) if zeta0 > 0 else math.inf,
        1.0 / (p.d1 + p.a + p.b * bounds.k2 + p.c * bounds.k1 + 1.0),
    )


class _Recorder:
    """Trajectory samples accumulated during a run; handed to stop rules."""

    def __init__(self):
        self.t = []
        self.g = []
        self.h = []
        self.gdot = []
        self.hdot = []
        self.sup_u = []
        self.sup_v = []
        self.u_center = []
        self.v_center = []

    def add(self, s: State, gdot: float, hdot: float) -> None:
        self.t.append(s.t)
        self.g.append(s.g)
        self.h.append(s.h)
        self.gdot.append(gdot)
        self.hdot.append(hdot)
        self.sup_u.append(float(s.w.max()))
        self.sup_v.append(float(s.z.max()))
        # physical center x=0 pulled back to the reference frame
        y0 = -(s.g + s.h) / (s.h - s.g)
        if -1.0 <= y0 <= 1.0:
            y = np.linspace(-1.0, 1.0, len(s.w))
            self.u_center.append(float(np.interp(y0, y, s.w)))
            self.v_center.append(float(np.interp(y0, y, s.z)))
        else:
            self.u_center.append(0.0)
            self.v_center.append(0.0)

    def to_trajectory(self, termination: str, n: int, snapshots: list) -> Trajectory:
        return Trajectory(
            t=np.asarray(self.t),
            g=np.asarray(self.g),
            h=np.asarray(self.h),
            gdot=np.asarray(self.gdot),
            hdot=np.asarray(self.hdot),
            sup_u=np.asarray(self.sup_u),
            sup_v=np.asarray(self.sup_v),
            u_center=np.asarray(self.u_center),
            v_center=np.asarray(self.v_center),
            termination=termination,
            n=n,
            snapshots=snapshots,
        )


def run(p: ModelParams, init: InitialData, k: Kernel, ctrl: RunControl) -> Trajectory:
    """Integrate until the horizon or until the stop rule fires.

    Deterministic given inputs: fixed dt, fixed recording cadence, no
    adaptivity.  The initial sample and the final state are always
    recorded.
    """
    state = initial_state(init, ctrl.n)
    dy = 2.0 / ctrl.n
    slope0 = float(np.max(np.abs(np.diff(state.z)))) / (dy * init.h0)
    bounds = field_bounds(p, init.h0, float(state.w.max()), float(state.z.max()), slope0)
    stepper = _Stepper(p, k, ctrl.n, bounds, strict=ctrl.strict)

    dt = ctrl.dt if ctrl.dt is not None else auto_dt(p, init, k, ctrl.n)
    n_steps = max(1, math.ceil(ctrl.horizon / dt))

    rec = _Recorder()
    snapshots: list[Snapshot] = []
    termination = "horizon"

    def snap(s: State) -> None:
        x = 0.5 * (s.g + s.h) + stepper.y * 0.5 * (s.h - s.g)
        snapshots.append(Snapshot(t=s.t, g=s.g, h=s.h, x=x, u=s.w.copy(), v=s.z.copy()))

    gdot, hdot = stepper.velocities(state)
    rec.add(state, gdot, hdot)
    if ctrl.snapshot_every > 0:
        snap(state)

    for istep in range(1, n_steps + 1):
        state = stepper.step(state, dt, gdot, hdot)
        recorded = False
        if istep % ctrl.record_every == 0 or istep == n_steps:
            gdot, hdot = stepper.velocities(state)
            rec.add(state, gdot, hdot)
            recorded = True
        else:
            gdot, hdot = stepper.velocities(state)
        if ctrl.snapshot_every > 0 and (istep % ctrl.snapshot_every == 0 or istep == n_steps):
            snap(state)
        if recorded and ctrl.stop_rule is not None:
            reason = ctrl.stop_rule(rec)
            if reason:
                termination = f"stop:{reason}"
                break

    return rec.to_trajectory(termination, ctrl.n, snapshots)


def fixed_domain_run(
    d: float,
    theta0: float,
    interval: tuple[float, float],
    u0: np.ndarray,
    k: Kernel,
    T: float,
    dt: Optional[float] = None,
) -> tuple[np.ndarray, str]:
    """Nonlocal logistic equation u_t = d*(K u - u) + u*(theta0 - u) on a
    fixed interval (no boundary condition is needed; the operator is
    nonlocal).  Returns the final field and a persistence verdict:
    'persists' when the sup-norm plateaus above 1e-3, 'dies' when it
    decays below 1e-6, 'undecided' otherwise.
    """
    l1, l2 = interval
    if not (l2 > l1):
        raise ValueError(f"degenerate interval ({l1}, {l2})")
    u = np.asarray(u0, dtype=float).copy()
    n = len(u)
    if n < 9:
        raise ValueError("need at least 9 samples")
    hx = (l2 - l1) / (n - 1)
    if hx >= k.radius / 4.0:
        raise ValueError(f"spacing {hx:.3g} too coarse for kernel radius {k.radius:.3g}")
    if u.min() < 0:
        raise ValueError("u0 must be nonnegative")

    x = l1 + np.arange(n) * hx
    Jm = k(np.subtract.outer(x, x))
    wq = np.full(n, hx)
    wq[0] = wq[-1] = 0.5 * hx
    Mw = Jm * wq[np.newaxis, :]

    cap = max(theta0, float(u.max()), 0.0)
    if dt is None:
        dt = _CFL / (d + abs(theta0) + 2.0 * cap + 1.0)
    n_steps = max(1, math.ceil(T / dt))
    check_every = max(1, int(round(1.0 / dt)))  # compare sup-norms ~1 time unit apart

    sup_prev = float(u.max())
    verdict = "undecided"
    for istep in range(1, n_steps + 1):
        u = u + dt * (d * (Mw @ u - u) + u * (theta0 - u))
        _clamp_roundoff(u, istep * dt, "u")
        if float(u.max()) > 10.0 * (cap + 1.0):
            raise SolverFailure(f"fixed-domain run blew up at t={istep * dt}")
        if istep % check_every == 0 or istep == n_steps:
            sup_now = float(u.max())
            if sup_now < 1e-6:
                verdict = "dies"
                break
            if sup_now > 1e-3 and abs(sup_now - sup_prev) <= 1e-6 * sup_now:
                verdict = "persists"
                break
            sup_prev = sup_now
    return u, verdict
