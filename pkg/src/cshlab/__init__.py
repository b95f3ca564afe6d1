"""cshlab: a desk-scale numerical laboratory for a non-abelian
Chern-Simons-Higgs gauge system on the periodic plane.

Subpackages cover the su(n) coefficient calculus (`lie`), the 2D
pseudospectral engine (`grid`), null forms and gauge identities
(`nullforms`), wave evolution (`evolution`), dyadic space-time frequency
analysis (`xsb`), and anisotropic wave-packet scaling experiments (`knapp`).
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
