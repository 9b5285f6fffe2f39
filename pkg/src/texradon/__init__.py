"""Radon transform on SO(3), pole figures and harmonic inversion."""

from .errors import (
    BandLimitError,
    CalibrationError,
    FormatError,
    IndexRangeError,
    ModelError,
    PropagationError,
    RankDeficiencyError,
    TexRadonError,
)
from .goniometry import (
    OdfModel,
    PoleFigureGrid,
    Reconstruction,
    default_grid,
    even_projector,
    make_odf,
    pole_figure,
    pole_figure_geometric,
    read_polefig,
    reconstruct_even,
    write_polefig,
)
from .harmonics import (
    HarmonicCoeffsSO3,
    PairHarmonicCoeffs,
    read_so3coef,
    s2s2_analyze,
    s2s2_function,
    s2s2_synthesize,
    so3_analyze,
    so3_function,
    so3_synthesize,
    sph_harm,
    wigner_d,
    wigner_D,
    wigner_D_matrix,
    write_so3coef,
)
from .inversion import (
    MultiplierSpec,
    calibrate_dual_symbol,
    dual_symbol,
    invert_backprojection,
    invert_slice,
    sqrt_multiplier_s2s2,
)
from .radon import dual_radon, radon_geometric, radon_harmonic, s3_circle_integral
from .rotations import EulerZYZ, Rotation, fiber_rotation, so3_quadrature, s2_quadrature

__version__ = "0.1.0"

__all__ = [
    "BandLimitError",
    "calibrate_dual_symbol",
    "CalibrationError",
    "default_grid",
    "dual_radon",
    "dual_symbol",
    "EulerZYZ",
    "even_projector",
    "fiber_rotation",
    "FormatError",
    "HarmonicCoeffsSO3",
    "IndexRangeError",
    "invert_backprojection",
    "invert_slice",
    "make_odf",
    "ModelError",
    "MultiplierSpec",
    "OdfModel",
    "PairHarmonicCoeffs",
    "pole_figure",
    "pole_figure_geometric",
    "PoleFigureGrid",
    "PropagationError",
    "radon_geometric",
    "radon_harmonic",
    "RankDeficiencyError",
    "read_polefig",
    "read_so3coef",
    "reconstruct_even",
    "Reconstruction",
    "Rotation",
    "s2_quadrature",
    "s2s2_analyze",
    "s2s2_function",
    "s2s2_synthesize",
    "s3_circle_integral",
    "so3_analyze",
    "so3_function",
    "so3_quadrature",
    "so3_synthesize",
    "sph_harm",
    "sqrt_multiplier_s2s2",
    "TexRadonError",
    "wigner_d",
    "wigner_D",
    "wigner_D_matrix",
    "write_polefig",
    "write_so3coef",
]
