"""Electrical-network kernels on embedded weighted graphs.

Green functions and transfer currents drive exact probabilities for
spanning trees, two-component forests, spanning unicycles and abelian
sandpiles, plus the Gaussian statistics of their pattern fields; an
exhaustive enumeration oracle certifies every formula at desk scale.
"""

__version__ = "0.1.0"

from .graph import (DirectedEdge, OneForm, VertexFunction, WeightedGraph,
                    coderivative, derivative, inner_form, inner_vertex,
                    laplacian)
from .green import (GreenOperator, TransferCurrent, dual_transfer_check,
                    green, transfer_current, transfer_current_entries,
                    transfer_current_spectral)
from .planar import PlanarDual, planar_dual, trace_faces
from .util import ToleranceBreach, ValidationError
