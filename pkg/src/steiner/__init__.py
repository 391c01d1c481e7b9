"""Discrete Steiner symmetrization in codimension k on regular grids.

The package rearranges grid functions and voxel sets slice by slice, evaluates
convex gradient functionals and anisotropic surface energies, and reports the
gaps and slice statistics that the symmetrization inequalities predict.
"""

from .grid import (
    FormatError,
    Grid,
    GridFunction,
    VoxelSet,
    ball_volume,
    essential_projection,
    load,
    save,
    section,
)
from .rearrange import (
    cell_order,
    codim1_symmetrize,
    distribution,
    schwarz_slice,
    slice_max,
    steiner_rearrange,
    steiner_symmetrize_set,
    subgraph,
    superlevel,
)
from .integrand import (
    PowerIntegrand,
    RadialAffineIntegrand,
    RecessionError,
    SurfaceIntegrand,
    euclidean_norm,
    homogeneity_selftest,
    lift,
    recession,
    y_norm,
)
from .functionals import (
    bv_functional,
    dirichlet_integral,
    gradient,
    subgraph_energy,
    surface_energy_faces,
    surface_energy_mollified,
)
from .diagnostics import (
    chain_report,
    coarea_irregularity_probe,
    condition_report,
    critical_measure,
    perimeter_report,
    polya_szego_report,
    slice_analysis,
    verify_lambda_derivatives,
)
from .generators import GENERATORS, generate

__version__ = "0.1.0"
