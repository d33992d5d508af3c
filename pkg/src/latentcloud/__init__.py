"""latentcloud: latent geometry of high-dimensional point clouds.

Simulates the random function model of data, quantifies concentration of
pairwise dot products and cosines, computes Vietoris-Rips persistence and
diagram distances, and tests isometry between latent and observed geometry
through k-NN geodesic regression.
"""

__version__ = "0.1.0"

from ._core import BACKEND_NAME
from . import concentration, geodesic, homology, model

__all__ = ["BACKEND_NAME", "concentration", "geodesic", "homology", "model",
           "__version__"]
