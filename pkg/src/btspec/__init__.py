"""Spectral lab for -h^2 Laplacian + e^{i alpha} x_1 on smooth bounded planar domains."""
from .geometry import Domain, build_domain, preset_domain
from .model import ModelParams, mu_n, mirrored_mu_n

__all__ = ["Domain", "ModelParams", "build_domain", "mirrored_mu_n", "mu_n", "preset_domain"]
__version__ = "0.1.0"
