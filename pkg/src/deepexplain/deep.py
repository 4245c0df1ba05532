"""Layer-wise attribution of a whole MLP and chaining back to the inputs.

Each layer is explained neuron by neuron: trivial links get the exact
regime decomposition ``g * W_ij * h_j`` (plus ``g * b_i`` for the bias),
non-trivial ones a root search followed by stepwise path attribution whose
baseline value lands in the bias column.  Hidden-layer rows are then
normalised by the neuron output into shares summing to one, and the output
neuron's contributions are pushed through those shares down to the inputs.

With ``chaining="exact"`` a non-trivial hidden neuron is explained relative
to the coordinate that the downstream neuron's root assigns to it, so the
upstream share matrices differ per downstream neuron and the number of
matrices grows with the product of layer widths.  ``chaining="shared"``
uses one root per neuron (its own attainable minimum) and one share matrix
per layer.
"""

from dataclasses import dataclass
from numbers import Real

import numpy as np

from .attribution import DEFAULT_GRID, redistribute_baseline, stepwise_attribute
from .errors import (
    ChainingLimitExceeded,
    DeepExplainError,
    InfeasibleTarget,
    OutOfDomain,
    ToleranceNotReached,
    locate,
)
from .links import link_deriv
from .model import forward, layer_activations
from .rootfind import InputDomain, RootTarget, attainable_range, solve_root

EPS_DEAD = 1e-12
DOMAIN_ATOL = 1e-9


@dataclass(frozen=True)
class ContributionMatrix:
    """Per-neuron contributions of one layer; the last column is the bias.

    ``kind`` is ``"raw"`` (output units) or ``"share"`` (rows sum to one).
    """

    entries: np.ndarray
    layer_index: int
    kind: str = "raw"
    roots: tuple = None
    errors: np.ndarray = None
    grid_points: int = 1


@dataclass(frozen=True)
class ThresholdSpec:
    level: float


@dataclass(frozen=True)
class DeepAttribution:
    feature_contributions: np.ndarray
    bias_total: float
    reference_value: float
    predicted: float
    reconstruction_error: float
    matrices: tuple = ()
    baseline_shares: np.ndarray = None
    baseline_bias: float = 0.0
    grid_points_used: int = 1
    max_neuron_error: float = 0.0

    @property
    def redistributed(self):
        return self.baseline_shares is not None

    def explained(self):
        """Sum of all parts; matches ``predicted`` within the error."""
        total = self.feature_contributions.sum() + self.bias_total
        if self.redistributed:
            return float(total + self.baseline_shares.sum() + self.baseline_bias)
        return float(total + self.reference_value)


def layer_attribute(layer, input_vector, domain, grid=None, tol=1e-6, target=None,
                    layer_index=0, redistribute=False):
    """Raw contribution matrix of every neuron in ``layer``.

    ``target`` is a single :class:`RootTarget`, ``None`` (attainable minimum)
    or a per-neuron sequence of them.  Trivial links are decomposed exactly
    unless an explicit level is requested for that neuron.  The tolerance is
    split evenly across the neurons of the layer.
    """
    grid = DEFAULT_GRID if grid is None else grid
    h = np.asarray(input_vector, dtype=np.float64)
    n_out = layer.out_dim
    if target is None or isinstance(target, RootTarget):
        targets = [target] * n_out
    else:
        targets = list(target)
        if len(targets) != n_out:
            raise ValueError(f"need {n_out} targets, got {len(targets)}")
    if not domain.contains(h, DOMAIN_ATOL):
        raise OutOfDomain(f"layer {layer_index}: input lies outside its domain")

    link = layer.link
    z = layer.weights @ h + layer.biases
    entries = np.zeros((n_out, layer.in_dim + 1))
    roots = [None] * n_out
    errors = np.zeros(n_out)
    grid_points = 1
    neuron_tol = tol / n_out
    for i in range(n_out):
        t = targets[i]
        w, b = layer.weights[i], layer.biases[i]
        if link.trivial and (t is None or t.is_minimum):
            g = link_deriv(link, z[i])
            entries[i, :-1] = g * w * h
            entries[i, -1] = g * b
            continue
        try:
            root = solve_root(h, w, b, link, domain, t)
            res = stepwise_attribute(h, w, b, link, root, grid, neuron_tol, redistribute)
        except (InfeasibleTarget, ToleranceNotReached) as err:
            raise locate(err, layer_index, i) from None
        roots[i] = root
        errors[i] = res.reconstruction_error
        grid_points = max(grid_points, res.grid_points_used)
        entries[i, :-1] = res.contributions
        if redistribute:
            entries[i, :-1] += res.baseline_shares
        else:
            entries[i, -1] = res.baseline_value
    return ContributionMatrix(entries, layer_index, "raw", tuple(roots), errors, grid_points)


def to_share_matrix(raw, neuron_outputs, eps_dead=EPS_DEAD):
    """Normalise raw rows by the neuron outputs so each live row sums to 1.

    Whatever the quadrature left unexplained is folded into the bias
    column; rows of dead neurons (``|output| <= eps_dead``) become zero.
    """
    out = np.asarray(neuron_outputs, dtype=np.float64)
    entries = np.zeros_like(raw.entries)
    live = np.abs(out) > eps_dead
    entries[live] = raw.entries[live] / out[live, None]
    entries[live, -1] += 1.0 - entries[live].sum(axis=1)
    return ContributionMatrix(entries, raw.layer_index, "share", raw.roots, raw.errors, raw.grid_points)


def domains_from_data(model, X, margin=0.0):
    """Input box of every layer from a reference dataset.

    Entry ``l`` bounds the vector fed into layer ``l``: the raw features for
    ``l == 0`` and the empirical per-neuron activation range of layer
    ``l - 1`` otherwise.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    acts = layer_activations(model, X)
    return [InputDomain.from_data(X, margin)] + [
        InputDomain.from_data(acts[l], margin) for l in range(len(model.layers) - 1)
    ]


def _threshold_level(mode):
    if isinstance(mode, ThresholdSpec):
        return float(mode.level)
    if isinstance(mode, Real) and not isinstance(mode, bool):
        return float(mode)
    if mode in ("min", "minimum", None):
        return None
    raise ValueError(f"unknown mode {mode!r}")


class _Chain:
    """Memoised feature-share maps for one observation."""

    def __init__(self, model, trace, domains, grid, tol, chaining, max_matrices):
        self.model = model
        self.trace = trace
        self.domains = domains
        self.grid = grid
        self.tol = tol
        self.chaining = chaining
        self.max_matrices = max_matrices
        self.memo = {}
        self.matrices = []
        self.d = model.input_dim

    def key_for(self, layer_index, root):
        """Levels that a downstream root imposes on layer ``layer_index``."""
        if self.chaining == "shared" or layer_index < 0 or root is None:
            return None
        layer = self.model.layers[layer_index]
        if layer.link.trivial:
            return None
        return tuple(float(v) for v in root.theta)

    def feature_map(self, l, key):
        """``(out_dim_l, d + 1)`` map from layer ``l`` outputs to feature
        and bias shares."""
        if l < 0:
            return np.hstack([np.eye(self.d), np.zeros((self.d, 1))])
        if (l, key) in self.memo:
            return self.memo[(l, key)]
        if len(self.matrices) >= self.max_matrices:
            raise ChainingLimitExceeded(
                f"more than {self.max_matrices} share matrices needed; "
                "use chaining='shared' for this model"
            )
        layer = self.model.layers[l]
        h = self.trace.layer_input(l)
        targets = None
        if key is not None:
            lo, hi = zip(*(attainable_range(w, b, layer.link, self.domains[l])
                           for w, b in zip(layer.weights, layer.biases)))
            targets = [RootTarget.explicit(min(max(v, a), c)) for v, a, c in zip(key, lo, hi)]
        raw = layer_attribute(layer, h, self.domains[l], self.grid, self.tol, targets, l)
        share = to_share_matrix(raw, self.trace.post[l])
        self.matrices.append(share)

        F = np.zeros((layer.out_dim, self.d + 1))
        live = np.abs(self.trace.post[l]) > EPS_DEAD
        for i in range(layer.out_dim):
            if not live[i]:
                # a dead neuron carries no input signal: its mass is bias
                F[i, -1] = 1.0
                continue
            up = self.feature_map(l - 1, self.key_for(l - 1, raw.roots[i]))
            F[i] = share.entries[i, :-1] @ up
            F[i, -1] += share.entries[i, -1]
        self.memo[(l, key)] = F
        return F


def deep_explain(model, x, domains, grid=None, tol=1e-6, mode="min", redistribute=False,
                 chaining="exact", max_matrices=10_000):
    """Decompose ``model(x)`` into per-feature contributions.

    ``mode`` is ``"min"`` (reference level = attainable minimum of the
    output link, or 0 for a trivial output link) or a threshold given as a
    :class:`ThresholdSpec` or plain number.  With ``redistribute`` the
    reference level is split over the output weights and chained down too.
    """
    if chaining not in ("exact", "shared"):
        raise ValueError(f"unknown chaining {chaining!r}")
    if model.output_dim != 1:
        raise ValueError("deep_explain needs a single-output model")
    if len(domains) != len(model.layers):
        raise ValueError(f"need {len(model.layers)} domains, got {len(domains)}")
    for l, (dom, layer) in enumerate(zip(domains, model.layers)):
        if dom.dim != layer.in_dim:
            raise ValueError(f"domain {l} has dimension {dom.dim}, expected {layer.in_dim}")
    threshold = _threshold_level(mode)
    out_link = model.layers[-1].link
    if threshold is not None and not out_link.admits_level(threshold):
        raise ValueError(f"threshold {threshold!r} outside the image of {out_link.kind}")
    trace = forward(model, x)
    if not domains[0].contains(trace.inputs, DOMAIN_ATOL):
        raise OutOfDomain("observation lies outside the input domain")

    grid = DEFAULT_GRID if grid is None else grid
    while True:
        result = _explain_once(model, trace, domains, grid, tol, threshold, redistribute,
                               chaining, max_matrices)
        if result.reconstruction_error <= tol:
            return result
        start = grid.n if grid.mode == "fixed" else grid.n_min
        if start >= grid.n_max:
            raise ToleranceNotReached(result.grid_points_used, result.reconstruction_error, tol)
        grid = grid.doubled()


def _explain_once(model, trace, domains, grid, tol, threshold, redistribute, chaining,
                  max_matrices):
    L = len(model.layers)
    out_layer = model.layers[-1]
    out_target = None if threshold is None else RootTarget.explicit(threshold)
    out_raw = layer_attribute(out_layer, trace.layer_input(L - 1), domains[L - 1], grid, tol,
                              out_target, L - 1)
    row = out_raw.entries[0]
    out_root = out_raw.roots[0]
    predicted = float(trace.post[-1][0])

    chain = _Chain(model, trace, domains, grid, tol, chaining, max_matrices)
    down = chain.feature_map(L - 2, chain.key_for(L - 2, out_root))
    total = row[:-1] @ down

    if out_root is None:
        # exact regime decomposition: reference 0, output bias is a bias
        reference = 0.0
        bias_total = float(total[-1] + row[-1])
    else:
        reference = threshold if threshold is not None else float(row[-1])
        bias_total = float(total[-1])

    baseline_shares, baseline_bias = None, 0.0
    if redistribute:
        base = np.zeros(model.input_dim + 1)
        if out_root is not None:
            base = redistribute_baseline(reference, out_layer.weights[0]) @ down
        baseline_shares, baseline_bias = base[:-1], float(base[-1])

    features = total[:-1]
    error = abs(features.sum() + bias_total - (predicted - reference))
    matrices = (out_raw, *chain.matrices)
    grid_points = max(m.grid_points for m in matrices)
    neuron_err = max(float(np.max(m.errors, initial=0.0)) for m in matrices)
    return DeepAttribution(
        feature_contributions=features,
        bias_total=bias_total,
        reference_value=reference,
        predicted=predicted,
        reconstruction_error=float(error),
        matrices=matrices,
        baseline_shares=baseline_shares,
        baseline_bias=baseline_bias,
        grid_points_used=grid_points,
        max_neuron_error=neuron_err,
    )


def explain_dataset(model, observations, domains=None, **kwargs):
    """Run :func:`deep_explain` on every row.

    Rows that fail keep their :class:`DeepExplainError` in the returned
    list instead of aborting the batch.  ``domains`` default to the box
    spanned by ``observations`` themselves.
    """
    X = np.asarray(observations, dtype=np.float64)
    if X.size == 0:
        return []
    X = np.atleast_2d(X)
    if domains is None:
        domains = domains_from_data(model, X)
    results = []
    for x in X:
        try:
            results.append(deep_explain(model, x, domains, **kwargs))
        except DeepExplainError as err:
            results.append(err)
    return results
