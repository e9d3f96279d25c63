"""Typed inhomogeneous random graphs: theory, sampling and Monte Carlo checks."""
from .model import (AlphaLogNOverN, BlockModelSpec, CriticalWindow, LambdaOverN, LogSqOverN2,
                    ModelSpec, PowerLaw, validate, validate_blocks)

__all__ = ["AlphaLogNOverN", "BlockModelSpec", "CriticalWindow", "LambdaOverN", "LogSqOverN2",
           "ModelSpec", "PowerLaw", "validate", "validate_blocks"]
__version__ = "0.1.0"
