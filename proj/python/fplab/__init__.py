"""Fisher information rates along Fokker-Planck channels."""

from ._core import *  # noqa: F401,F403
from ._core import CertificateError, DomainError, IsoGaussian, NumericalError

__all__ = [name for name in dir() if not name.startswith("_")]
