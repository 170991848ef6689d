"""Numerical laboratory for 2xk-periodic Aztec diamond tilings."""

from .model import (
    DiamondGeometry,
    FaceWeights,
    WeightSpec,
    face_weights,
    fig_2x3_spec,
    gauge_from_faces,
    geometry,
    load_model,
    save_model,
    uniform_spec,
    validate_spec,
)
from .spectral import SpectralData, discriminant, eigen, phi

__all__ = [
    "DiamondGeometry",
    "FaceWeights",
    "SpectralData",
    "WeightSpec",
    "discriminant",
    "eigen",
    "face_weights",
    "fig_2x3_spec",
    "gauge_from_faces",
    "geometry",
    "load_model",
    "phi",
    "save_model",
    "uniform_spec",
    "validate_spec",
]

__version__ = "0.1.0"
