"""Dense MLP representation, forward pass and the JSON model file format.

Model files look like::

    {
      "format_version": 1,
      "input_dim": 2,
      "feature_names": ["age", "bmi"],        # optional
      "layers": [
        {"activation": "relu", "weights": [[1.0, -2.0]], "biases": [0.5]},
        {"activation": "leaky_relu", "slope": 0.1, "weights": [[3.0]], "biases": [0.0]}
      ]
    }
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ModelFormatError, NonFiniteInput
from .links import LinkFunction, link_eval

FORMAT_VERSION = 1


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Layer:
    """One dense layer: ``link(weights @ inputs + biases)``."""

    weights: np.ndarray
    biases: np.ndarray
    link: LinkFunction

    def __post_init__(self):
        w = _frozen(self.weights)
        b = _frozen(self.biases)
        if w.ndim != 2:
            raise ModelFormatError(f"weights must be 2-D, got shape {w.shape}")
        if b.ndim != 1 or b.shape[0] != w.shape[0]:
            raise ModelFormatError(
                f"biases length {b.shape} does not match {w.shape[0]} weight rows"
            )
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ModelFormatError("layer parameters must be finite")
        if isinstance(self.link, str):
            object.__setattr__(self, "link", LinkFunction(self.link))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def in_dim(self):
        return self.weights.shape[1]

    @property
    def out_dim(self):
        return self.weights.shape[0]


@dataclass(frozen=True)
class MlpModel:
    layers: tuple
    input_dim: int
    format_version: int = FORMAT_VERSION
    feature_names: tuple = None

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ModelFormatError("a model needs at least one layer")
        if int(self.input_dim) <= 0:
            raise ModelFormatError("input_dim must be positive")
        prev = int(self.input_dim)
        for i, layer in enumerate(layers):
            if layer.in_dim != prev:
                raise ModelFormatError(
                    f"layers[{i}]: expects {layer.in_dim} inputs but receives {prev}"
                )
            prev = layer.out_dim
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "input_dim", int(self.input_dim))
        if self.feature_names is not None:
            names = tuple(str(n) for n in self.feature_names)
            if len(names) != self.input_dim or len(set(names)) != len(names):
                raise ModelFormatError(
                    "feature_names must list input_dim distinct names"
                )
            object.__setattr__(self, "feature_names", names)

    @property
    def n_hidden(self):
        return len(self.layers) - 1

    @property
    def output_dim(self):
        return self.layers[-1].out_dim

    def names(self):
        if self.feature_names is not None:
            return list(self.feature_names)
        return [f"x{i}" for i in range(self.input_dim)]


@dataclass(frozen=True)
class ForwardTrace:
    pre: tuple
    post: tuple
    inputs: np.ndarray = field(default=None)

    @property
    def output(self):
        out = self.post[-1]
        return float(out[0]) if out.shape == (1,) else out

    def layer_input(self, index):
        """Vector fed into layer ``index``."""
        return self.inputs if index == 0 else self.post[index - 1]


def _check_vector(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.input_dim,):
        raise ValueError(f"expected input of length {model.input_dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("input contains non-finite values")
    return x


def forward(model, x):
    x = _check_vector(model, x)
    pre, post = [], []
    h = x
    for layer in model.layers:
        z = layer.weights @ h + layer.biases
        h = np.asarray(link_eval(layer.link, z), dtype=np.float64)
        pre.append(z)
        post.append(h)
    return ForwardTrace(tuple(pre), tuple(post), x)


def predict(model, X):
    """Batch forward pass; returns ``(n, output_dim)``."""
    return layer_activations(model, X)[-1]


def layer_activations(model, X):
    """Post-activations of every layer for a batch, one ``(n, out_dim)`` array each."""
    H = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if H.shape[1] != model.input_dim:
        raise ValueError(f"expected {model.input_dim} columns, got {H.shape[1]}")
    out = []
    for layer in model.layers:
        H = np.asarray(link_eval(layer.link, H @ layer.weights.T + layer.biases))
        H = np.atleast_2d(H)
        out.append(H)
    return out


def collapse_linear(model):
    """Fold a stack of linear layers into one ``(weights, biases)`` pair."""
    w = np.eye(model.input_dim)
    b = np.zeros(model.input_dim)
    for layer in model.layers:
        if layer.link.kind != "linear":
            raise ValueError("collapse_linear needs an all-linear model")
        w = layer.weights @ w
        b = layer.weights @ b + layer.biases
    return w, b


# -- file format -----------------------------------------------------------


def _as_matrix(rows, where):
    if not isinstance(rows, list) or not rows:
        raise ModelFormatError(f"{where}: expected a non-empty list of rows")
    width = None
    for r, row in enumerate(rows):
        if not isinstance(row, list):
            raise ModelFormatError(f"{where}: row {r} is not a list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ModelFormatError(
                f"{where}: row {r} has {len(row)} entries, expected {width}"
            )
    try:
        return np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{where}: non-numeric entry ({exc})") from None


def parse_model(obj):
    """Build an :class:`MlpModel` from the decoded JSON object."""
    if not isinstance(obj, dict):
        raise ModelFormatError("model file must hold a JSON object")
    for key in ("format_version", "input_dim", "layers"):
        if key not in obj:
            raise ModelFormatError(f"missing top-level key {key!r}")
    version = obj["format_version"]
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {version!r}")
    input_dim = obj["input_dim"]
    if not isinstance(input_dim, int) or input_dim <= 0:
        raise ModelFormatError("input_dim must be a positive integer")
    raw_layers = obj["layers"]
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ModelFormatError("layers must be a non-empty list")

    layers = []
    prev = input_dim
    for i, spec in enumerate(raw_layers):
        where = f"layers[{i}]"
        if not isinstance(spec, dict):
            raise ModelFormatError(f"{where}: expected an object")
        name = spec.get("activation")
        try:
            link = LinkFunction(str(name), spec.get("slope", 0.0))
        except (ValueError, TypeError) as exc:
            raise ModelFormatError(f"{where}.activation: {exc}") from None
        if name in ("leaky_relu", "leaky-relu") and "slope" not in spec:
            raise ModelFormatError(f"{where}: leaky_relu needs a 'slope'")
        w = _as_matrix(spec.get("weights"), f"{where}.weights")
        if w.shape[1] != prev:
            raise ModelFormatError(
                f"{where}.weights: {w.shape[1]} columns, expected {prev}"
            )
        biases = spec.get("biases")
        if not isinstance(biases, list) or len(biases) != w.shape[0]:
            raise ModelFormatError(
                f"{where}.biases: expected a list of {w.shape[0]} numbers"
            )
        try:
            b = np.array(biases, dtype=np.float64)
        except (TypeError, ValueError):
            raise ModelFormatError(f"{where}.biases: non-numeric entry") from None
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ModelFormatError(f"{where}: non-finite parameter")
        layers.append(Layer(w, b, link))
        prev = w.shape[0]
    return MlpModel(tuple(layers), input_dim, version, obj.get("feature_names"))


def load_model(path):
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_model(obj)


def model_to_dict(model):
    out = {"format_version": model.format_version, "input_dim": model.input_dim}
    if model.feature_names is not None:
        out["feature_names"] = list(model.feature_names)
    out["layers"] = [
        {
            **layer.link.to_dict(),
            "weights": layer.weights.tolist(),
            "biases": layer.biases.tolist(),
        }
        for layer in model.layers
    ]
    return out


def save_model(model, path):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def random_model(sizes, links, rng, scale=1.0, feature_names=None):
    """Gaussian-initialised model, mostly for tests and demos.

    ``sizes`` lists layer widths including the input, ``links`` names one
    activation per layer.
    """
    if len(links) != len(sizes) - 1:
        raise ValueError("need one link per layer")
    layers = []
    for fan_in, fan_out, link in zip(sizes[:-1], sizes[1:], links):
        w = rng.normal(0.0, scale / np.sqrt(fan_in), size=(fan_out, fan_in))
        b = rng.normal(0.0, 0.5 * scale, size=fan_out)
        layers.append(Layer(w, b, link if isinstance(link, LinkFunction) else LinkFunction(link)))
    return MlpModel(tuple(layers), sizes[0], feature_names=feature_names)
