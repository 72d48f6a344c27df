"""Fractional heat-kernel diffusion with a source term for graph semi-supervised learning."""
from . import _backend
from .graph import (Graph, GraphError, LaplacianKind, Projector, build_graph, from_adjacency,
                    is_connected, lambda_max, laplacian, projector, read_edgelist, write_edgelist)
from .operators import (Chebyshev, KernelOperator, NumericalError, SpectralExact, Subordination,
                        TruncatedSpectral, build_operator)
from .solver import (LabelState, StepperKind, build_source, integrate, one_hot, predict,
                     solve_closed_form, stability_max_dt, step)
from .spectral import SpectralDecomposition, SpectralError, eigendecompose

__version__ = "0.1.0"
BACKEND = _backend.NAME
