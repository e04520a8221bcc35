"""Closed-form spectral geometry of Heisenberg nilmanifolds."""

from .model import CharacterLabel, HeisenbergModel, HermiteFamily, HermiteLabel, LatticeError
from .spectrum import (PaneitzConstants, dual_lattice_points, laplace_eigenvalue, paneitz_constants,
                       paneitz_discriminant, paneitz_eigenvalue, paneitz_roots, scalar_curvature,
                       lowest_nonzero, spectrum_lines, spectrum_record, yamabe_eigenvalue,
                       yamabe_null_parameter,
                       yamabe_shift)
from .counting import (NegativeCount, UnsupportedDimension, count_negative, count_negative_paneitz,
                       count_negative_yamabe, fit_slope)
