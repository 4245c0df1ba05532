"""Exception hierarchy shared by the whole package."""


class DeepExplainError(Exception):
    """Base class for every error raised by deepexplain."""


class ModelFormatError(DeepExplainError, ValueError):
    """A model file or in-memory model description is malformed."""


class DataError(DeepExplainError, ValueError):
    """A dataset, grouping or stats file could not be used."""


class ZeroVariance(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} has zero variance")


class NonFiniteInput(DeepExplainError, ValueError):
    pass


class OutOfDomain(DeepExplainError, ValueError):
    pass


class InfeasibleTarget(DeepExplainError):
    """The requested link level cannot be reached inside the input box."""

    def __init__(self, level, attainable, *, layer=None, neuron=None):
        self.level = level
        self.attainable = attainable
        self.layer = layer
        self.neuron = neuron
        lo, hi = attainable
        where = _location(layer, neuron)
        super().__init__(
            f"target level {level!r} is outside the attainable range "
            f"[{lo!r}, {hi!r}]{where}"
        )


class ToleranceNotReached(DeepExplainError):
    """Grid refinement hit its ceiling before the error dropped below tol."""

    def __init__(self, n_max, final_error, tol, *, layer=None, neuron=None):
        self.n_max = n_max
        self.final_error = final_error
        self.tol = tol
        self.layer = layer
        self.neuron = neuron
        where = _location(layer, neuron)
        super().__init__(
            f"reconstruction error {final_error:.3e} > tol {tol:.3e} "
            f"with {n_max} grid points{where}"
        )


class RootSolveError(DeepExplainError):
    pass


class DegenerateWeights(DeepExplainError, ValueError):
    pass


class ChainingLimitExceeded(DeepExplainError):
    pass


def _location(layer, neuron):
    if layer is None and neuron is None:
        return ""
    return f" (layer {layer}, neuron {neuron})"


def locate(err, layer, neuron):
    """Attach a layer/neuron position to an infeasibility or tolerance error."""
    if isinstance(err, InfeasibleTarget):
        return InfeasibleTarget(err.level, err.attainable, layer=layer, neuron=neuron)
    if isinstance(err, ToleranceNotReached):
        return ToleranceNotReached(
            err.n_max, err.final_error, err.tol, layer=layer, neuron=neuron
        )
    return err
