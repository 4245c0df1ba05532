"""Stepwise first-order Taylor attribution for a single neuron.

Along the straight path ``p(t) = x0 + t (x - x0)`` the neuron output changes
by ``sum_j g(beta @ p_j + bias) * (beta @ dx)`` with ``dx = (x - x0) / n``.
Splitting the inner product per coordinate gives each feature's share; the
sum over features reproduces the scalar Riemann term exactly, so the only
error left is the quadrature error, which the grid refinement controls.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateWeights, ToleranceNotReached
from .links import link_deriv, link_eval

SCHEMES = ("left", "midpoint")


@dataclass(frozen=True)
class GridSpec:
    """How many path steps to take.

    ``fixed`` starts at ``n`` and never refines unless ``n_max`` is larger;
    ``proportional`` starts at ``ceil(||x - x0||_inf / step)`` clamped to
    ``[n_min, n_max]`` and doubles while the error exceeds tolerance.
    """

    mode: str = "proportional"
    n: int = 0
    step: float = 0.01
    n_min: int = 50
    n_max: int = 2**20
    scheme: str = "midpoint"

    def __post_init__(self):
        if self.mode not in ("fixed", "proportional"):
            raise ValueError(f"unknown grid mode {self.mode!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.mode == "fixed":
            if self.n < 1:
                raise ValueError("fixed grid needs n >= 1")
            object.__setattr__(self, "n_max", max(int(self.n_max), int(self.n)))
        else:
            if not self.step > 0:
                raise ValueError("step must be positive")
            if not 1 <= self.n_min <= self.n_max:
                raise ValueError("need 1 <= n_min <= n_max")

    @classmethod
    def fixed(cls, n, scheme="midpoint", n_max=None):
        return cls("fixed", n=int(n), n_max=int(n if n_max is None else n_max), scheme=scheme)

    @classmethod
    def proportional(cls, step=0.01, n_min=50, n_max=2**20, scheme="midpoint"):
        return cls("proportional", step=float(step), n_min=int(n_min), n_max=int(n_max), scheme=scheme)

    def initial_points(self, x0, x):
        if self.mode == "fixed":
            return self.n
        span = float(np.max(np.abs(np.asarray(x) - np.asarray(x0)), initial=0.0))
        n = math.ceil(span / self.step) if span > 0 else 1
        return int(min(max(n, self.n_min), self.n_max))

    def doubled(self):
        """Same spec with the starting grid doubled (capped at ``n_max``)."""
        if self.mode == "fixed":
            return replace(self, n=min(2 * self.n, self.n_max))
        return replace(self, n_min=min(2 * self.n_min, self.n_max))


DEFAULT_GRID = GridSpec()


@dataclass(frozen=True)
class AttributionResult:
    contributions: np.ndarray
    bias_contribution: float
    baseline_shares: np.ndarray
    predicted: float
    baseline_value: float
    reconstruction_error: float
    grid_points_used: int

    def explained(self):
        """Total reassembled from the parts; equals ``predicted`` up to the
        reconstruction error."""
        base = self.baseline_value if self.baseline_shares is None else self.baseline_shares.sum()
        return float(self.contributions.sum() + self.bias_contribution + base)


def build_path(x0, x, n):
    """The ``n + 1`` equally spaced points from ``x0`` to ``x``."""
    x0 = np.asarray(x0, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x0.shape != x.shape:
        raise ValueError(f"path endpoints differ in shape: {x0.shape} vs {x.shape}")
    if n < 1:
        raise ValueError("n must be >= 1")
    t = np.arange(n + 1, dtype=np.float64) / n
    return x0 + t[:, None] * (x - x0)


def _path_terms(x0, x, beta, bias, link, n, scheme):
    """Per-feature Riemann sums of ``g(beta @ p_j + bias) * beta_k * dx_k``.

    The preactivation is affine along the path, so only ``n`` scalars are
    evaluated regardless of the input dimension.
    """
    offset = 0.5 if scheme == "midpoint" else 0.0
    t = (np.arange(n, dtype=np.float64) + offset) / n
    z0 = beta @ x0 + bias
    dz = beta @ (x - x0)
    gsum = np.sum(link_deriv(link, z0 + t * dz))
    delta = (x - x0) / n
    return gsum * beta * delta


def integrated_gradients_reference(x, baseline, beta, bias, link, n, scheme="midpoint"):
    """Riemann integrated gradients of one neuron from a user baseline."""
    x = np.asarray(x, dtype=np.float64)
    baseline = np.asarray(baseline, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if not x.shape == baseline.shape == beta.shape:
        raise ValueError("x, baseline and beta must have the same length")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    return _path_terms(baseline, x, beta, float(bias), link, int(n), scheme)


def redistribute_baseline(a, beta):
    """Split the level ``a`` across features in proportion to ``|beta|``."""
    beta = np.asarray(beta, dtype=np.float64)
    weights = np.abs(beta)
    total = weights.sum()
    if a == 0:
        return np.zeros_like(beta)
    if total == 0:
        raise DegenerateWeights("cannot redistribute a nonzero baseline over all-zero weights")
    shares = a * weights / total
    # fold rounding residue into the largest share so the sum is a
    shares[np.argmax(weights)] += a - shares.sum()
    return shares


def stepwise_attribute(x, beta, bias, link, root, grid=None, tol=1e-6, redistribute=False):
    """Attribute ``G(beta @ x + bias) - G(beta @ x0 + bias)`` to the features.

    ``root`` is a :class:`~deepexplain.rootfind.RootPoint` (or a bare
    starting vector).  The grid is doubled until the reconstruction error is
    at most ``tol``; :class:`ToleranceNotReached` is raised if ``n_max`` is
    hit first.
    """
    grid = DEFAULT_GRID if grid is None else grid
    x = np.asarray(x, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    bias = float(bias)
    x0 = np.asarray(getattr(root, "theta", root), dtype=np.float64)
    if not x.shape == x0.shape == beta.shape:
        raise ValueError("x, root and beta must have the same length")

    predicted = float(link_eval(link, beta @ x + bias))
    a = float(link_eval(link, beta @ x0 + bias))
    target = predicted - a
    n = grid.initial_points(x0, x)
    while True:
        rho = _path_terms(x0, x, beta, bias, link, n, grid.scheme)
        error = abs(rho.sum() - target)
        if error <= tol:
            break
        if n >= grid.n_max:
            raise ToleranceNotReached(n, error, tol)
        n = min(2 * n, grid.n_max)

    shares = redistribute_baseline(a, beta) if redistribute else None
    return AttributionResult(
        contributions=rho,
        bias_contribution=0.0,
        baseline_shares=shares,
        predicted=predicted,
        baseline_value=a,
        reconstruction_error=float(error),
        grid_points_used=int(n),
    )
