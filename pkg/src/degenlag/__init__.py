"""degenlag: constraint analysis and Hamilton-Jacobi verification for
degenerate (singular) Lagrangian systems.

The package takes a symbolic Lagrangian on velocity phase space and builds
the three presymplectic pictures attached to it (Lagrangian, Hamiltonian,
and the unified velocity-momentum formalism), runs the constraint-chain
stabilization algorithm in each, produces explicit solution vector-field
families, and verifies candidate Hamilton-Jacobi sections against the
defining conditions in all three settings.
"""

from .symbolic import BACKEND
from .mechanics import LagrangianSystem
from .pontryagin import PontryaginSystem, build_pontryagin
from .gnh import ChainStatus, ConstraintChain, PresymplecticSystem, constraint_chain
from .hamilton_jacobi import HJReport, Section, Verdict, hj_check_sr

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChainStatus",
    "ConstraintChain",
    "HJReport",
    "LagrangianSystem",
    "PontryaginSystem",
    "PresymplecticSystem",
    "Section",
    "Verdict",
    "build_pontryagin",
    "constraint_chain",
    "hj_check_sr",
    "__version__",
]
