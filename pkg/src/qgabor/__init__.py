"""Quaternionic Gabor expansions on the critical-density lattice.

Modules: :mod:`.quaternion` (algebra), :mod:`.field` (sampled signals and
file formats), :mod:`.qft` (two-sided and windowed quaternion Fourier
transforms), :mod:`.zak` (Zak transform and theta series) and
:mod:`.gabor` (atoms, synthesis, sharp functional, coefficient extraction).
"""

from .errors import QGaborError
from .field import GridSpec, QField
from .gabor import SHARP, LatticePoint, RelaxedCoefficients, extract_coefficients, sharp_functional, synthesize
from .qft import qft_forward, qft_inverse, wqft, wqft_reconstruct
from .quaternion import Quaternion
from .zak import ZakGrid, theta, zak_grid

__version__ = "0.1.0"

__all__ = [
    "QGaborError", "GridSpec", "QField", "Quaternion", "LatticePoint", "SHARP", "RelaxedCoefficients",
    "synthesize", "sharp_functional", "extract_coefficients", "qft_forward", "qft_inverse", "wqft",
    "wqft_reconstruct", "ZakGrid", "theta", "zak_grid",
]
