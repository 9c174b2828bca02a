"""Critical configurations of five points on the 2-sphere under the biquadratic potential.

Submodules
----------
config        configurations, potentials, energies, reference shapes
spectral      Gram spectrum, decoupled frame, centroid case labels
equilibrium   equilibrium residuals and finite-difference checks
polynomials   exact Sturm root isolation and transcribed certificates
cauchy        Cauchy-type determinant experiments
special_case  the mirror-pair reduction and its branch analysis
search        seeded multistart descent and class catalog
acceptance    the numbered acceptance checks
cli           ``sphere-eq`` command line
"""

__version__ = "0.1.0"

from .config import (
    BIQUADRATIC,
    BiquadraticShift,
    Configuration,
    energy,
    fingerprint,
    fp,
    octahedron,
    random_config,
    tbp,
    tetrahedron,
)
from .equilibrium import residual_general
from .spectral import normalize, spectral_data, spectral_energy

__all__ = [
    "BIQUADRATIC",
    "BiquadraticShift",
    "Configuration",
    "energy",
    "fingerprint",
    "fp",
    "normalize",
    "octahedron",
    "random_config",
    "residual_general",
    "spectral_data",
    "spectral_energy",
    "tbp",
    "tetrahedron",
]
