"""Resolution-invariant deep operators on a small numpy autodiff engine.

Subpackages: :mod:`rdolab.pdegen` (data generators) and :mod:`rdolab.harness`
(training, evaluation, reporting).
"""
from .errors import (
    ConfigError,
    DimensionError,
    FormatError,
    GraphError,
    ModeOverflowError,
    NumericalError,
    RdoError,
    ResolutionMismatchError,
)
from .models import (
    DeepOnetModel,
    FnoModel,
    FunctionSample,
    GridSpec,
    ModelSpec,
    QuerySet,
    RdoModel,
    build_model,
    integral_reduce,
)
from .tensor import Tensor, backward, no_grad

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DeepOnetModel",
    "DimensionError",
    "FnoModel",
    "FormatError",
    "FunctionSample",
    "GraphError",
    "GridSpec",
    "ModeOverflowError",
    "ModelSpec",
    "NumericalError",
    "QuerySet",
    "RdoError",
    "RdoModel",
    "ResolutionMismatchError",
    "Tensor",
    "backward",
    "build_model",
    "integral_reduce",
    "no_grad",
]
