"""Equivariant kinematic systems and observers on homogeneous spaces."""

from .errors import (
    AlgebraConsistencyError,
    BranchCutError,
    ConfigError,
    EqobsError,
    GroupMismatchError,
    IntegrationError,
    RegistrationError,
    StabilizerCompatibilityError,
    TransitivityError,
    UnsupportedError,
    UsageError,
)
from .lie import SE3, SL3, SO3, AlgebraElement, GroupElement, MatrixLieGroup, ProductGroup
from .homogeneous import SPHERE, GroupAction, Manifold
from .observer import EquivariantSystem, Innovation, ObserverState
from .integrators import IntegratorConfig, step_group, step_observer
from .catalog import get_system

__version__ = "0.1.0"
