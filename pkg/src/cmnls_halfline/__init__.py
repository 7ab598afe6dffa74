"""Numerical toolkit for unified-transform analysis of the coupled derivative
NLS (CMNLS) system on the half-line.

Modules
-------
lax_core           Lax pair, spectral variables, conjugation and 3x3 algebra
fields             initial/boundary data containers, interpolation, I/O
pde_reference      method-of-lines reference solver on the line
direct_scattering  eigenfunctions and the spectral functions s, S, c
rh_assembly        regions, S_n, jump matrices, M, asymptotics, reconstruction
residues_global    zeros, residue conditions, global relation
verification       verification suites driven by the ``cmnls`` command
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .lax_core import DEFAULT_PARAMS, ModelParams, k_of, make_spectral_point  # noqa: F401
from .fields import FieldData, build_field_data, load_field_data, save_field_data  # noqa: F401
from .direct_scattering import QuadOptions, compute_S, compute_c, compute_s  # noqa: F401
from .rh_assembly import (REGIONS, assemble_M, assemble_Sn, classify_region, jump_matrix,  # noqa: F401
                          reconstruct_uv, region_map_grid)
from .residues_global import find_zeros, global_relation_residual, residue_coefficients  # noqa: F401
