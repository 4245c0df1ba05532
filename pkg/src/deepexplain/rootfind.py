"""Root points: the admissible input closest to an observation at which a
neuron's link reaches a given level.

For a neuron ``G(beta @ theta + bias)`` with monotone ``G`` the level set
``G = a`` is the hyperplane ``beta @ theta = G^-1(a) - bias``, so the search
reduces to a Euclidean projection onto that hyperplane intersected with the
input box.  The projection is ``clip(x - lam * beta)`` for the multiplier
``lam`` at which the clipped point lands on the hyperplane; ``lam`` is found
by bisection and then polished on the final active set.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleTarget, NonFiniteInput, RootSolveError
from .links import link_eval

DEFAULT_TOL_ROOT = 1e-9
BOUND_ATOL = 1e-12


@dataclass(frozen=True)
class InputDomain:
    """Axis-aligned box ``lower <= x <= upper``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=np.float64).ravel()
        hi = np.array(self.upper, dtype=np.float64).ravel()
        if lo.shape != hi.shape:
            raise ValueError("lower and upper bounds differ in length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("domain bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("domain has lower > upper")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_data(cls, X, margin=0.0):
        """Per-column ``[min - margin, max + margin]`` of a data matrix."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[0] == 0:
            raise ValueError("cannot build a domain from an empty matrix")
        return cls(X.min(axis=0) - margin, X.max(axis=0) + margin)

    @classmethod
    def box(cls, low, high, dim):
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @property
    def dim(self):
        return self.lower.shape[0]

    def contains(self, x, atol=BOUND_ATOL):
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def clip(self, x):
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True)
class RootTarget:
    """Either the attainable minimum of the link over the box
    (``level is None``) or an explicit level ``a``."""

    level: float = None

    @classmethod
    def minimum(cls):
        return cls(None)

    @classmethod
    def explicit(cls, a):
        return cls(float(a))

    @property
    def is_minimum(self):
        return self.level is None


@dataclass(frozen=True)
class RootPoint:
    theta: np.ndarray
    achieved: float
    residual: float
    distance: float
    level: float


def _preact_range(beta, bias, domain):
    lo = np.where(beta > 0, domain.lower, domain.upper) @ beta + bias
    hi = np.where(beta > 0, domain.upper, domain.lower) @ beta + bias
    return float(lo), float(hi)


def attainable_extremum(beta, bias, link, domain, maximize=False):
    """Corner of the box minimising (or maximising) the neuron output.

    Coordinates with zero weight sit at the box midpoint.  The value is
    exact because the preactivation is linear and the link monotone.
    """
    beta = np.asarray(beta, dtype=np.float64)
    mid = 0.5 * (domain.lower + domain.upper)
    low_side = np.where(beta > 0, domain.lower, domain.upper)
    high_side = np.where(beta > 0, domain.upper, domain.lower)
    theta = np.where(beta == 0, mid, high_side if maximize else low_side)
    return theta, float(link_eval(link, beta @ theta + bias))


def attainable_range(beta, bias, link, domain):
    lo, hi = _preact_range(np.asarray(beta, dtype=np.float64), bias, domain)
    return float(link_eval(link, lo)), float(link_eval(link, hi))


def project_onto_hyperplane(x, beta, level, domain, xtol=1e-12):
    """Closest point to ``x`` in ``{theta in box : beta @ theta == level}``.

    The caller guarantees that the level is attainable over the box.
    """
    x = np.asarray(x, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    lower, upper = domain.lower, domain.upper

    def theta_at(lam):
        return np.clip(x - lam * beta, lower, upper)

    # excess(lam) is non-increasing in lam
    def excess(lam):
        return beta @ theta_at(lam) - level

    theta = theta_at(0.0)
    if excess(0.0) == 0.0:
        return theta
    nz = beta != 0
    if not np.any(nz):
        return theta
    with np.errstate(over="ignore"):
        breaks = np.concatenate(
            [(x[nz] - lower[nz]) / beta[nz], (x[nz] - upper[nz]) / beta[nz]]
        )
    # subnormal weights give infinite breakpoints; they cannot move beta @ theta
    breaks = breaks[np.isfinite(breaks)]
    if breaks.size == 0:
        return theta
    lo = min(float(breaks.min()), 0.0) - 1.0
    hi = max(float(breaks.max()), 0.0) + 1.0
    while hi - lo > xtol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    theta = theta_at(lam)

    # on the final segment the clipped map is affine: solve it exactly
    free = nz & (theta > lower) & (theta < upper)
    denom = beta[free] @ beta[free]
    if denom > 0:
        fixed_sum = beta[~free] @ theta[~free]
        lam_exact = (beta[free] @ x[free] + fixed_sum - level) / denom
        cand = theta.copy()
        cand[free] = x[free] - lam_exact * beta[free]
        cand = np.clip(cand, lower, upper)
        if abs(beta @ cand - level) <= abs(beta @ theta - level):
            theta = cand
    return theta


def solve_root(x, beta, bias, link, domain, target=None, tol_root=DEFAULT_TOL_ROOT):
    """Root point for one neuron and observation ``x``.

    ``target`` defaults to the attainable minimum.  Raises
    :class:`InfeasibleTarget` if an explicit level lies outside what the
    neuron can produce over ``domain``.
    """
    x = np.asarray(x, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(beta)) and np.isfinite(bias)):
        raise NonFiniteInput("root search needs finite inputs")
    if x.shape != beta.shape or x.shape != domain.lower.shape:
        raise ValueError("x, beta and domain must have the same length")
    target = RootTarget.minimum() if target is None else target
    z_lo, z_hi = _preact_range(beta, bias, domain)

    if target.is_minimum:
        level = float(link_eval(link, z_lo))
        if link.kind == "relu" and level == 0.0:
            # relu reaches 0 on a half-space, not just the corner
            theta = _relu_zero_set(x, beta, bias, domain)
        else:
            theta, _ = attainable_extremum(beta, bias, link, domain)
            theta = np.where(beta == 0, domain.clip(x), theta)
    else:
        level = float(target.level)
        if not link.admits_level(level):
            raise ValueError(f"level {level!r} is outside the image of {link.kind}")
        a_lo, a_hi = float(link_eval(link, z_lo)), float(link_eval(link, z_hi))
        if level < a_lo - tol_root or level > a_hi + tol_root:
            raise InfeasibleTarget(level, (a_lo, a_hi))
        if link.kind == "relu" and level == 0.0:
            theta = _relu_zero_set(x, beta, bias, domain)
        else:
            z_star = min(max(link.inverse(level), z_lo), z_hi)
            theta = project_onto_hyperplane(domain.clip(x), beta, z_star - bias, domain)

    theta = domain.clip(theta)
    achieved = float(link_eval(link, beta @ theta + bias))
    residual = abs(achieved - level)
    if residual > tol_root:
        raise RootSolveError(
            f"root residual {residual:.3e} exceeds tol_root {tol_root:.1e}"
        )
    theta.setflags(write=False)
    return RootPoint(theta, achieved, residual, float(np.linalg.norm(theta - x)), level)


def _relu_zero_set(x, beta, bias, domain):
    xc = domain.clip(x)
    if beta @ xc + bias <= 0.0:
        return xc
    return project_onto_hyperplane(xc, beta, -bias, domain)
