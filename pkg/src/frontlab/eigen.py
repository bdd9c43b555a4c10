"""Principal eigenvalue of the nonlocal dispersal operator on an interval.

The operator acts on samples over (ell1, ell2) as

    (L phi)(x) = d * ( integral J(x-y) phi(y) dy  -  phi(x) ) + theta0 * phi(x)

Discretization is collocation on uniform nodes with trapezoid weights:
A[i,j] = d*w_j*J(x_i - x_j) + (theta0 - d)*delta_ij.  Only the matrix
M[i,j] = d*w_j*J(x_i - x_j) depends on the geometry; it is entrywise
nonnegative with positive diagonal, so its top eigenpair is a simple
Perron pair and lambda_p = nu_top + theta0 - d.

The Perron pair is found by the power method, realized as repeated
matrix squaring with max-entry normalization: squaring k times applies
the 2^k-th power, which converges even when the spectral gap is tiny
(long intervals).  The reported eigenvalue is the weighted Rayleigh
quotient of the returned eigenvector, so Rayleigh consistency holds to
roundoff by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, RegimeError
from .kernels import Kernel

# sup-norm tolerance on the normalized eigenvector between squarings
_VEC_TOL = 1e-12
# each squaring doubles the applied power; 64 rounds is power 2^64
_MAX_SQUARINGS = 64
# operator-application residual, relative to the dispersal scale d
_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class EigenProblem:
    """Eigenproblem for d*(K_Omega - I) + theta0 on Omega = (ell1, ell2)."""

    d: float
    theta0: float
    ell1: float
    ell2: float
    n: int
    kernel: Kernel

    def __post_init__(self):
        if not (math.isfinite(self.d) and self.d > 0):
            raise ValueError(f"d must be positive and finite, got {self.d!r}")
        if not math.isfinite(self.theta0):
            raise ValueError(f"theta0 must be finite, got {self.theta0!r}")
        if not (self.ell2 > self.ell1):
            raise ValueError(f"degenerate interval ({self.ell1}, {self.ell2})")
        if self.n < 8:
            raise ValueError(f"need at least 8 nodes, got {self.n}")
        if self.spacing >= self.kernel.radius / 4.0:
            raise ValueError(
                f"node spacing {self.spacing:.3g} too coarse for kernel radius "
                f"{self.kernel.radius:.3g}; need spacing < radius/4"
            )

    @property
    def spacing(self) -> float:
        return (self.ell2 - self.ell1) / (self.n - 1)


@dataclass
class EigenResult:
    lambda_p: float
    eigenfunction: np.ndarray  # strictly positive, sup-normalized
    x: np.ndarray
    residual: float
    iterations: int  # squaring rounds (applied power is 2**iterations)


def default_n(ell1: float, ell2: float, kernel: Kernel) -> int:
    """Node count targeting spacing radius/8.

    ceil keeps spacing <= radius/8; when length is a multiple of the
    radius the support edges of J(x_i - .) land on nodes, where the
    trapezoid rule is exact for kinked kernels and row sums cannot
    exceed unit mass.
    """
    length = ell2 - ell1
    intervals = math.ceil(length / (kernel.radius / 8.0))
    return max(9, intervals + 1)


def _geometry_matrix(prob: EigenProblem) -> tuple[np.ndarray, np.ndarray]:
    """M = d * J(x_i - x_j) * w_j and the trapezoid weights.

    Node differences are built from index differences, so intervals of
    equal length produce bit-identical matrices regardless of position.
    """
    h = prob.spacing
    idx = np.arange(prob.n, dtype=float)
    diff = np.subtract.outer(idx, idx) * h
    w = np.full(prob.n, h)
    w[0] = w[-1] = 0.5 * h
    return prob.d * prob.kernel(diff) * w[np.newaxis, :], w


def lambda_p(prob: EigenProblem) -> EigenResult:
    """Top eigenpair of the discretized operator; see module docstring."""
    M, w = _geometry_matrix(prob)
    P = M / M.max()
    v_prev = P.sum(axis=1)
    v_prev /= v_prev.max()

    converged = False
    rounds = 0
    for rounds in range(1, _MAX_SQUARINGS + 1):
        P = P @ P
        P /= P.max()
        v = P.sum(axis=1)
        vmax = v.max()
        if not (math.isfinite(vmax) and vmax > 0):
            raise ConvergenceError("power iterate degenerated (overflow or zero vector)")
        v /= vmax
        if np.max(np.abs(v - v_prev)) <= _VEC_TOL:
            converged = True
            break
        v_prev = v

    phi = v
    Mphi = M @ phi
    nu = float(np.dot(phi * w, Mphi) / np.dot(phi * w, phi))
    residual = float(np.max(np.abs(Mphi - nu * phi)))
    if not converged and residual > _RESIDUAL_TOL * prob.d:
        raise ConvergenceError(
            f"eigen iteration did not converge in {_MAX_SQUARINGS} squaring rounds; "
            f"last residual {residual:.3e}"
        )
    if np.any(phi <= 0.0):
        raise ConvergenceError("computed eigenvector is not strictly positive")

    x = prob.ell1 + np.arange(prob.n) * prob.spacing
    return EigenResult(
        lambda_p=nu + prob.theta0 - prob.d,
        eigenfunction=phi,
        x=x,
        residual=residual,
        iterations=rounds,
    )


def lambda_p_interval(
    d: float, theta0: float, ell1: float, ell2: float, kernel: Kernel, n: int | None = None
) -> EigenResult:
    """Convenience wrapper choosing the node count automatically."""
    if n is None:
        n = default_n(ell1, ell2, kernel)
    return lambda_p(EigenProblem(d=d, theta0=theta0, ell1=ell1, ell2=ell2, n=n, kernel=kernel))


@dataclass(frozen=True)
class CriticalLengthResult:
    ell_star: float
    lambda_at_ell_star: float
    bracket: tuple[float, float]
    n: int


def critical_length(
    d1: float,
    a: float,
    kernel: Kernel,
    tol: float = 1e-4,
    ell_max: float | None = None,
) -> CriticalLengthResult:
    """Interval length at which the principal eigenvalue of the dispersal
    operator plus constant rate a crosses zero.

    Exists only for 0 < a < d1: the eigenvalue runs from a - d1 (< 0) for
    short intervals up to a (> 0) for long ones, strictly increasing, so
    bisection on length applies.  The bracket is first located by
    geometric expansion/shrinkage at a fixed spacing target, then refined
    with a node count frozen for the whole bisection so the discrete
    eigenvalue is a smooth function of length.
    """
    if not (0.0 < a < d1):
        raise RegimeError(
            f"critical length requires 0 < a < d1; got a={a}, d1={d1} "
            "(eigenvalue never changes sign)"
        )
    radius = kernel.radius
    if ell_max is None:
        ell_max = 50.0 * radius
    spacing = radius / 10.0

    def n_for(ell: float) -> int:
        return max(9, math.ceil(ell / spacing) + 1)

    def lam(ell: float, n: int) -> float:
        return lambda_p(EigenProblem(d=d1, theta0=a, ell1=0.0, ell2=ell, n=n, kernel=kernel)).lambda_p

    lo = 8.0 * spacing
    f_lo = lam(lo, n_for(lo))
    if f_lo > 0.0:
        hi, f_hi = lo, f_lo
        while f_lo > 0.0:
            hi, f_hi = lo, f_lo
            lo *= 0.5
            if lo < 1e-9 * radius:
                raise RegimeError(
                    f"no sign change found above length {lo:.3e}; eigenvalue stays positive"
                )
            f_lo = lam(lo, n_for(lo))
    else:
        hi = 2.0 * lo
        f_hi = lam(hi, n_for(hi))
        while f_hi <= 0.0:
            lo, f_lo = hi, f_hi
            hi *= 2.0
            if hi > ell_max:
                raise RegimeError(
                    f"no sign change found below ell_max={ell_max:.3g}; "
                    "raise ell_max or check parameters"
                )
            f_hi = lam(hi, n_for(hi))

    # frozen node count: the finest the bracket needs
    n_fix = n_for(hi)
    f_lo = lam(lo, n_fix)
    f_hi = lam(hi, n_fix)
    # re-evaluation at the common grid may nudge the endpoint signs
    while f_lo > 0.0:
        lo *= 0.5
        f_lo = lam(lo, n_fix)
    while f_hi <= 0.0:
        hi *= 2.0
        if hi > ell_max:
            raise RegimeError(f"no sign change found below ell_max={ell_max:.3g}")
        f_hi = lam(hi, n_fix)

    mid, f_mid = lo, f_lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = lam(mid, n_fix)
        if f_mid <= 0.0:
            lo = mid
        else:
            hi = mid
        if (hi - lo) < tol and abs(f_mid) < 1e-6:
            break
    else:
        raise ConvergenceError(
            f"critical-length bisection stalled: bracket ({lo}, {hi}), last eigenvalue {f_mid:.3e}"
        )
    return CriticalLengthResult(ell_star=mid, lambda_at_ell_star=f_mid, bracket=(lo, hi), n=n_fix)
