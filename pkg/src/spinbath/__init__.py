"""Equilibrium spin chains under strong bath coupling.

Exact diagonalization of effective (bath-dressed) spin Hamiltonians, with a
reaction-coordinate benchmark for validation.
"""
from .spinops import DomainError, SizeCapError
from .spectral import (
    Brownian,
    DivergentIntegralError,
    QuadratureError,
    RCParams,
    SuperOhmic,
    UnsupportedVariantError,
)
from .models import BathScheme, ChainSpec, FullyConnectedSpec, SchemeKind
from .mapping import BathAttachment, EffectiveHamiltonian
from .thermo import ThermalState, gibbs_state
from .rcbench import RCTruncation, ReducedState

__version__ = "0.1.0"

__all__ = [
    "BathAttachment",
    "BathScheme",
    "Brownian",
    "ChainSpec",
    "DivergentIntegralError",
    "DomainError",
    "EffectiveHamiltonian",
    "FullyConnectedSpec",
    "QuadratureError",
    "RCParams",
    "RCTruncation",
    "ReducedState",
    "SchemeKind",
    "SizeCapError",
    "SuperOhmic",
    "ThermalState",
    "UnsupportedVariantError",
    "gibbs_state",
]
