"""youngpath: pathwise integration and solvers for dy = sigma(y) dx with
power-type coefficients driven by Holder-continuous signals."""

__version__ = "0.1.0"

from youngpath.errors import (
    CertificateError,
    DivergenceError,
    LadderResolutionError,
    NonIntegrableError,
    YoungPathError,
)
from youngpath.paths import GridPath, HurstSpec, generate_fbm, holder_norm, roughness_modulus

__all__ = [
    "CertificateError",
    "DivergenceError",
    "GridPath",
    "HurstSpec",
    "LadderResolutionError",
    "NonIntegrableError",
    "YoungPathError",
    "__version__",
    "generate_fbm",
    "holder_norm",
    "roughness_modulus",
]
