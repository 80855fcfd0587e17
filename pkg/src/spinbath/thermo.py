"""Gibbs states and equilibrium spin observables."""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .spinops import DomainError, eigendecompose, n_sites_of, pauli_monomial

IMAG_ATOL = 1e-10


@dataclass(frozen=True)
class ThermalState:
    """Eigendecomposition of H with Boltzmann populations at inverse temperature beta.

    Populations are computed relative to the ground energy, so ``beta * E``
    never overflows; ``log_partition`` is log Tr exp(-beta H).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    beta: float
    log_partition: float
    populations: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @functools.cached_property
    def rho(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.populations) @ v.conj().T


def gibbs_state(h, beta: float) -> ThermalState:
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    evals, evecs = eigendecompose(h)
    return gibbs_from_spectrum(evals, evecs, beta)


def gibbs_from_spectrum(evals, evecs, beta: float) -> ThermalState:
    """Thermal state from an existing ascending eigendecomposition."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    evals = np.asarray(evals, dtype=float)
    shifted = evals - evals[0]
    weights = np.exp(-beta * shifted)
    z = weights.sum()
    return ThermalState(evals, evecs, float(beta), float(np.log(z) - beta * evals[0]), weights / z)


def _rho(state) -> np.ndarray:
    return state.rho if hasattr(state, "rho") else np.asarray(state)


def expectation(state, obs) -> float:
    """Tr[rho obs]; the state may be a ThermalState, a ReducedState or a density matrix."""
    rho = _rho(state)
    obs = np.asarray(obs)
    if obs.shape != rho.shape:
        raise DomainError(f"observable shape {obs.shape} does not match state {rho.shape}")
    val = np.sum(rho.T * obs)
    if abs(val.imag) > IMAG_ATOL:
        raise DomainError(f"expectation has imaginary residue {val.imag:.3e}; observable not Hermitian?")
    return float(val.real)


def pauli_expectation(state, ops: dict[int, str]) -> float:
    """<P> for a Pauli string given as {site: axis}, without forming P densely."""
    rho = _rho(state)
    rows, vals = pauli_monomial(n_sites_of(rho), ops)
    # Tr(rho P) = sum_c rho[c, rows_c] P[rows_c, c]
    val = np.sum(rho[np.arange(len(rows)), rows] * vals)
    if abs(val.imag) > IMAG_ATOL:
        raise DomainError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


@dataclass(frozen=True)
class CorrelationMatrix:
    axis: str
    values: np.ndarray


def correlation_matrix(state, axis: str) -> CorrelationMatrix:
    """N x N matrix of <s^a_i s^a_j> with unit diagonal."""
    rho = _rho(state)
    n = n_sites_of(rho)
    out = np.eye(n)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            out[i - 1, j - 1] = out[j - 1, i - 1] = pauli_expectation(rho, {i: axis, j: axis})
    return CorrelationMatrix(axis, out)


def structure_factor(state, axis: str) -> float:
    """(1/N^2) sum_{i,j} <s^a_i s^a_j>, autocorrelators included."""
    rho = _rho(state)
    n = n_sites_of(rho)
    offdiag = sum(
        pauli_expectation(rho, {i: axis, j: axis}) for i in range(1, n + 1) for j in range(i + 1, n + 1)
    )
    return (n + 2.0 * offdiag) / n**2


def magnetization(state, axis: str) -> np.ndarray:
    rho = _rho(state)
    n = n_sites_of(rho)
    return np.array([pauli_expectation(rho, {i: axis}) for i in range(1, n + 1)])
