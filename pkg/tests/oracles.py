"""Independent reference computations used by the tests.

Nothing here imports the attribution or root-finding code; everything is
written from scratch with plain loops, the math module or brute force.
"""

import math

import numpy as np


def scalar_link(kind, slope=0.0):
    if kind == "linear":
        return lambda y: y
    if kind == "relu":
        return lambda y: y if y > 0 else 0.0
    if kind == "leaky_relu":
        return lambda y: y if y > 0 else slope * y
    if kind == "tanh":
        return math.tanh
    if kind == "sigmoid":
        return lambda y: 1.0 / (1.0 + math.exp(-y))
    raise ValueError(kind)


def hand_forward(model, x):
    """Forward pass with explicit Python loops."""
    h = [float(v) for v in x]
    for layer in model.layers:
        G = scalar_link(layer.link.kind, layer.link.slope)
        W = layer.weights.tolist()
        b = layer.biases.tolist()
        h = [G(sum(wij * hj for wij, hj in zip(row, h)) + bi) for row, bi in zip(W, b)]
    return h


def brute_force_root_distance(x, beta, bias, G, lower, upper, level, n=400, band=1e-3):
    """Smallest distance from ``x`` to a grid point with ``|G - level| <= band``.

    Returns ``(distance, grid_diagonal)``; distance is ``inf`` if no grid
    point falls in the band.
    """
    g0 = np.linspace(lower[0], upper[0], n)
    g1 = np.linspace(lower[1], upper[1], n)
    P0, P1 = np.meshgrid(g0, g1, indexing="ij")
    Z = beta[0] * P0 + beta[1] * P1 + bias
    vals = np.vectorize(G)(Z)
    mask = np.abs(vals - level) <= band
    diag = math.hypot(g0[1] - g0[0], g1[1] - g1[0])
    if not mask.any():
        return math.inf, diag
    d = np.hypot(P0[mask] - x[0], P1[mask] - x[1])
    return float(d.min()), diag


def regime_collapse(model, x):
    """Freeze every piecewise-linear link at its regime at ``x`` and fold the
    network into one affine map; returns ``(coefficients, offset)``.

    Only valid for models made of linear / relu / leaky relu layers.
    """
    h = np.asarray(x, dtype=float)
    A = np.eye(len(h))
    c = np.zeros(len(h))
    for layer in model.layers:
        z = layer.weights @ h + layer.biases
        kind = layer.link.kind
        if kind == "linear":
            d = np.ones_like(z)
        elif kind == "relu":
            d = (z > 0).astype(float)
        elif kind == "leaky_relu":
            d = np.where(z > 0, 1.0, layer.link.slope)
        else:
            raise ValueError("regime collapse needs piecewise-linear links")
        A = d[:, None] * (layer.weights @ A)
        c = d * (layer.weights @ c + layer.biases)
        h = d * z
    return A, c


def sigmoid(y):
    return 1.0 / (1.0 + math.exp(-y))


def dsigmoid(y):
    s = sigmoid(y)
    return s * (1.0 - s)


def segment_root_distance(x, beta, offset, lower, upper):
    """Exact distance from ``x`` to the segment ``{t : beta . t = offset}``
    inside a 2-D box, or ``inf`` if the line misses the box."""
    beta = np.asarray(beta, dtype=float)
    u = np.array([-beta[1], beta[0]]) / math.hypot(*beta)
    p0 = beta * offset / (beta @ beta)
    s_lo, s_hi = -math.inf, math.inf
    for k in range(2):
        if u[k] == 0:
            if not lower[k] <= p0[k] <= upper[k]:
                return math.inf
            continue
        a, b = (lower[k] - p0[k]) / u[k], (upper[k] - p0[k]) / u[k]
        s_lo, s_hi = max(s_lo, min(a, b)), min(s_hi, max(a, b))
    if s_lo > s_hi:
        return math.inf
    s = min(max(float(u @ (np.asarray(x) - p0)), s_lo), s_hi)
    return float(np.linalg.norm(p0 + s * u - x))
