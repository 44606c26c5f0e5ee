"""Ground-space steering of commuting Pauli models and reachability floors.

Subpackages by task: gf2 and pauli hold the binary symplectic algebra,
cph the spectrum engine, steering the blind protocol and its channels,
ed and models the exact-diagonalization reference layer, analysis the
reduced-state toolbox, glassfloor the non-steerable bounds, and runner
the ensemble driver behind the command line.
"""

from ._backend import backend_name

__all__ = ["backend_name", "__version__"]
__version__ = "0.1.0"
