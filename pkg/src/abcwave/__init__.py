"""Damped wave equation with non-locally reacting acoustic boundary conditions.

Finite element simulator and spectral analyzer on 2-D disk and annulus
domains: P1 Galerkin assembly of the coupled bulk/boundary system,
implicit-midpoint time stepping with exact discrete energy bookkeeping,
conserved functionals, stationary-state projectors and dense
eigenstructure checks of the first-order generator.
"""

from .geometry import DomainSpec, build_mesh
from .coefficients import CoefficientSet, Profile
from .assembly import assemble_all
from .system import BlockSystem, build_generator, build_projectors
from .timeint import StepperConfig, run, step

__all__ = [
    "BlockSystem",
    "CoefficientSet",
    "DomainSpec",
    "Profile",
    "StepperConfig",
    "assemble_all",
    "build_generator",
    "build_mesh",
    "build_projectors",
    "run",
    "step",
]

__version__ = "0.1.0"
