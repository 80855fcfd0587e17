"""Reaction-coordinate benchmark: spin chain plus truncated RC oscillators.

The enlarged Hamiltonian is diagonalized densely, its Gibbs state formed and
the RC modes (trailing tensor factors) traced out. Residual-bath terms are
omitted; they are weak by construction and do not enter equilibrium.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .mapping import BathAttachment
from .spinops import MAX_DIM, DomainError, SizeCapError, hermitize
from .thermo import gibbs_state, structure_factor

DEFAULT_LEVELS = 8
CONVERGENCE_TOL = 1e-4


@dataclass(frozen=True)
class RCTruncation:
    levels: int = DEFAULT_LEVELS
    n_modes: int = 1

    def __post_init__(self):
        if self.levels < 1:
            raise DomainError(f"RC truncation needs at least one level, got {self.levels}")
        if self.n_modes < 0:
            raise DomainError("n_modes must be non-negative")

    @property
    def bath_dim(self) -> int:
        return self.levels**self.n_modes

    def enlarged_dim(self, spin_dim: int) -> int:
        return spin_dim * self.bath_dim

    def check(self, spin_dim: int) -> None:
        dim = self.enlarged_dim(spin_dim)
        if dim > MAX_DIM:
            raise SizeCapError(
                f"RC-enlarged dimension {dim} ({spin_dim} x {self.levels}^{self.n_modes}) "
                f"exceeds the cap of {MAX_DIM}"
            )


@dataclass(frozen=True)
class ReducedState:
    rho: np.ndarray
    levels: int
    beta: float
    params: dict = field(default_factory=dict)


def ladder(levels: int) -> np.ndarray:
    """Truncated position-like operator a + a^dagger (sqrt(m) off-diagonals)."""
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1) + np.diag(
        np.sqrt(np.arange(1, levels, dtype=float)), -1
    )


def rc_hamiltonian(h_s, attachments: Sequence[BathAttachment], trunc: RCTruncation) -> np.ndarray:
    """H_S + sum_b [Omega_b n_b + lam_b S_b (a_b + a_b^dagger)] on spin x RC^B."""
    h_s = hermitize(h_s)
    if len(attachments) != trunc.n_modes:
        raise DomainError(f"{len(attachments)} attachments but truncation has {trunc.n_modes} modes")
    d = h_s.shape[0]
    trunc.check(d)
    m = trunc.levels
    eye_m = np.eye(m)
    number = np.diag(np.arange(m, dtype=float))
    x = ladder(m)

    def mode_op(b, single):
        factors = [single if k == b else eye_m for k in range(trunc.n_modes)]
        out = np.ones((1, 1))
        for f in factors:
            out = np.kron(out, f)
        return out

    h = np.kron(h_s, np.eye(trunc.bath_dim))
    for b, att in enumerate(attachments):
        if att.op.shape != h_s.shape:
            raise DomainError("coupling operator dimension does not match the system")
        h = h + att.rc.omega * np.kron(np.eye(d), mode_op(b, number))
        if att.rc.lam:
            h = h + att.rc.lam * np.kron(att.op, mode_op(b, x))
    return h


def partial_trace(rho, spin_dim: int) -> np.ndarray:
    """Trace out the trailing factor of a (spin_dim * k)-dimensional operator."""
    rho = np.asarray(rho)
    total = rho.shape[0]
    if total % spin_dim:
        raise DomainError(f"dimension {total} is not a multiple of {spin_dim}")
    k = total // spin_dim
    return np.einsum("iaja->ij", rho.reshape(spin_dim, k, spin_dim, k))


def rc_reduced_state(h_rc, beta: float, trunc: RCTruncation, params: dict | None = None) -> ReducedState:
    dim = np.asarray(h_rc).shape[0]
    if dim % trunc.bath_dim:
        raise DomainError(f"dimension {dim} does not factor with {trunc.levels}^{trunc.n_modes}")
    state = gibbs_state(h_rc, beta)
    rho = partial_trace(state.rho, dim // trunc.bath_dim)
    rho = 0.5 * (rho + rho.conj().T)
    return ReducedState(rho, trunc.levels, float(beta), dict(params or {}))


def rc_benchmark(h_s, attachments: Sequence[BathAttachment], beta: float, levels: int = DEFAULT_LEVELS) -> ReducedState:
    trunc = RCTruncation(levels, len(attachments))
    h = rc_hamiltonian(h_s, attachments, trunc)
    return rc_reduced_state(h, beta, trunc, {"rc": [a.rc for a in attachments]})


def default_observables() -> dict[str, Callable]:
    return {f"S_{a}": (lambda st, a=a: structure_factor(st, a)) for a in "xyz"}


@dataclass
class ConvergenceReport:
    levels: list[int]
    values: dict[str, list[float]]
    converged: bool
    converged_at: int | None
    tol: float = CONVERGENCE_TOL

    def successive_differences(self, name: str) -> list[float]:
        v = self.values[name]
        return [abs(b - a) for a, b in zip(v[:-1], v[1:])]


def rc_convergence(
    h_s,
    attachments: Sequence[BathAttachment],
    beta: float,
    m_grid: Sequence[int],
    observables: Mapping[str, Callable] | None = None,
    tol: float = CONVERGENCE_TOL,
) -> ConvergenceReport:
    """Evaluate observables for each truncation in ``m_grid``.

    ``converged_at`` is the smallest M from which every later step changes
    every observable by less than ``tol``.
    """
    m_grid = [int(m) for m in m_grid]
    if not m_grid:
        raise DomainError("m_grid must not be empty")
    if any(b <= a for a, b in zip(m_grid[:-1], m_grid[1:])):
        raise DomainError(f"m_grid must be strictly ascending, got {m_grid}")
    RCTruncation(m_grid[-1], len(attachments)).check(np.asarray(h_s).shape[0])
    observables = dict(observables or default_observables())
    values: dict[str, list[float]] = {k: [] for k in observables}
    for m in m_grid:
        st = rc_benchmark(h_s, attachments, beta, m)
        for name, fn in observables.items():
            values[name].append(float(fn(st)))
    steps_ok = [
        all(abs(values[k][i + 1] - values[k][i]) < tol for k in values) for i in range(len(m_grid) - 1)
    ]
    converged_at = None
    for i in range(len(steps_ok)):
        if all(steps_ok[i:]):
            converged_at = m_grid[i]
            break
    converged = bool(steps_ok) and steps_ok[-1]
    return ConvergenceReport(m_grid, values, converged, converged_at, tol)
