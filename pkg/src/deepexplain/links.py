"""Element-wise link functions G and their first derivatives g.

Every link here is monotone non-decreasing.  Links whose derivative is
constant once the output is known (linear, relu, leaky relu) are called
trivial: attributing through them needs no path integration.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

KINDS = ("linear", "relu", "leaky_relu", "tanh", "sigmoid")
TRIVIAL_KINDS = frozenset({"linear", "relu", "leaky_relu"})

_ALIASES = {"leaky-relu": "leaky_relu", "leakyrelu": "leaky_relu", "identity": "linear"}


@dataclass(frozen=True)
class LinkFunction:
    kind: str
    slope: float = 0.0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown activation {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        slope = float(self.slope) if kind == "leaky_relu" else 0.0
        if not np.isfinite(slope) or slope < 0:
            raise ValueError(f"leaky_relu slope must be finite and >= 0, got {slope}")
        object.__setattr__(self, "slope", slope)

    def __call__(self, y):
        return link_eval(self, y)

    def deriv(self, y):
        return link_deriv(self, y)

    @property
    def trivial(self):
        return is_trivial(self)

    @property
    def image(self):
        """Closure of the output range as ``(low, high)``."""
        if self.kind == "sigmoid":
            return 0.0, 1.0
        if self.kind == "tanh":
            return -1.0, 1.0
        if self.kind == "relu":
            return 0.0, np.inf
        return -np.inf, np.inf

    def admits_level(self, a):
        """True if ``a`` lies strictly inside a bounded image (or anywhere in
        an unbounded one, endpoint included for relu)."""
        lo, hi = self.image
        if self.kind == "relu":
            return a >= 0.0
        return lo < a < hi

    def inverse(self, a):
        """Preactivation at which the link takes value ``a``.

        For relu, ``a == 0`` is reached on a whole half-line; the boundary
        point 0 is returned.
        """
        if not self.admits_level(a):
            raise ValueError(f"level {a!r} outside the image of {self.kind}")
        if self.kind == "sigmoid":
            return float(logit(a))
        if self.kind == "tanh":
            return float(np.arctanh(a))
        if self.kind == "leaky_relu" and a < 0:
            if self.slope == 0:
                raise ValueError("leaky_relu with zero slope cannot reach negative levels")
            return a / self.slope
        return float(a)

    def to_dict(self):
        if self.kind == "leaky_relu":
            return {"activation": self.kind, "slope": self.slope}
        return {"activation": self.kind}


def link_eval(link, y):
    y = np.asarray(y, dtype=np.float64)
    kind = link.kind
    if kind == "linear":
        out = y.copy()
    elif kind == "relu":
        out = np.maximum(y, 0.0)
    elif kind == "leaky_relu":
        out = np.where(y > 0, y, link.slope * y)
    elif kind == "tanh":
        out = np.tanh(y)
    else:
        out = expit(y)
    return out if out.ndim else float(out)


def link_deriv(link, y):
    """First derivative of the link; relu and leaky relu use the left
    derivative at the kink (0 and ``slope`` respectively)."""
    y = np.asarray(y, dtype=np.float64)
    kind = link.kind
    if kind == "linear":
        out = np.ones_like(y)
    elif kind == "relu":
        out = np.where(y > 0, 1.0, 0.0)
    elif kind == "leaky_relu":
        out = np.where(y > 0, 1.0, link.slope)
    elif kind == "tanh":
        t = np.tanh(y)
        out = 1.0 - t * t
    else:
        s = expit(y)
        out = s * (1.0 - s)
    return out if out.ndim else float(out)


def is_trivial(link):
    return link.kind in TRIVIAL_KINDS
