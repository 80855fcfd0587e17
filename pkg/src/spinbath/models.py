"""System Hamiltonians and bath coupling operators for the four locality schemes."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .spinops import DomainError, check_sites, pauli_site


@dataclass(frozen=True)
class ChainSpec:
    """Open XYZ chain with per-site splittings ``deltas`` and uniform exchange."""

    n_sites: int
    deltas: tuple[float, ...]
    j_x: float = 0.0
    j_y: float = 0.0
    j_z: float = 0.0

    def __post_init__(self):
        check_sites(self.n_sites)
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        if len(self.deltas) != self.n_sites:
            raise DomainError(
                f"deltas has {len(self.deltas)} entries, expected n_sites={self.n_sites}"
            )

    @classmethod
    def uniform(cls, n_sites: int, delta: float, j_x=0.0, j_y=0.0, j_z=0.0) -> "ChainSpec":
        return cls(n_sites, (delta,) * n_sites, j_x, j_y, j_z)

    @property
    def couplings(self) -> dict[str, float]:
        return {"x": self.j_x, "y": self.j_y, "z": self.j_z}


@dataclass(frozen=True)
class FullyConnectedSpec:
    """All-to-all Ising model; ``j`` is dimensionless and scales the x-x coupling by Delta/8."""

    n_sites: int
    delta: float
    j: float

    def __post_init__(self):
        check_sites(self.n_sites)
        if self.n_sites < 2:
            raise DomainError("fully-connected model needs n_sites >= 2")

    @property
    def xx_coefficient(self) -> float:
        return self.j * self.delta / 8.0


class SchemeKind(str, enum.Enum):
    GLOBAL = "global"
    LOCAL = "local"
    HALF = "half"
    PAIRWISE = "pairwise"


@dataclass(frozen=True)
class BathScheme:
    """Coupling topology plus one spectral density per bath.

    The bath count is checked against the chain length by :func:`bath_sites`.
    """

    kind: SchemeKind
    baths: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        object.__setattr__(self, "baths", tuple(self.baths))

    @classmethod
    def uniform(cls, kind, n_sites: int, bath) -> "BathScheme":
        """Scheme in which every bath carries the same spectral density."""
        return cls(kind, (bath,) * n_baths(kind, n_sites))


def n_baths(kind, n_sites: int) -> int:
    kind = SchemeKind(kind)
    if kind is SchemeKind.GLOBAL:
        return 1
    if kind is SchemeKind.LOCAL:
        return n_sites
    if n_sites % 2:
        raise DomainError(f"{kind.value} scheme requires an even number of sites, got {n_sites}")
    return 2 if kind is SchemeKind.HALF else n_sites // 2


def bath_sites(kind, n_sites: int) -> list[tuple[int, ...]]:
    """1-based sites attached to each bath, in bath order."""
    kind = SchemeKind(kind)
    check_sites(n_sites)
    n_baths(kind, n_sites)
    sites = range(1, n_sites + 1)
    if kind is SchemeKind.GLOBAL:
        return [tuple(sites)]
    if kind is SchemeKind.LOCAL:
        return [(i,) for i in sites]
    if kind is SchemeKind.HALF:
        half = n_sites // 2
        return [tuple(range(1, half + 1)), tuple(range(half + 1, n_sites + 1))]
    return [(2 * n - 1, 2 * n) for n in range(1, n_sites // 2 + 1)]


def site_to_bath(kind, n_sites: int) -> list[int]:
    """0-based bath index of every site (index 0 is site 1)."""
    out = [0] * n_sites
    for b, group in enumerate(bath_sites(kind, n_sites)):
        for site in group:
            out[site - 1] = b
    return out


def _check_scheme(scheme: BathScheme, n_sites: int) -> None:
    expected = n_baths(scheme.kind, n_sites)
    if len(scheme.baths) != expected:
        raise DomainError(
            f"{scheme.kind.value} scheme on {n_sites} sites needs {expected} baths, "
            f"got {len(scheme.baths)}"
        )


def heisenberg_chain(spec: ChainSpec) -> np.ndarray:
    """Open-boundary XYZ chain: sum_i D_i sz_i + sum_a J_a sum_i s^a_i s^a_{i+1}."""
    n = spec.n_sites
    dim = 2**n
    dtype = complex if spec.j_y else float
    h = np.zeros((dim, dim), dtype=dtype)
    for i, d in enumerate(spec.deltas, start=1):
        if d:
            h += d * pauli_site(n, i, "z")
    for axis, j in spec.couplings.items():
        if not j:
            continue
        for i in range(1, n):
            h += j * (pauli_site(n, i, axis) @ pauli_site(n, i + 1, axis))
    if np.iscomplexobj(h) and not np.any(h.imag):
        h = h.real.copy()
    return h


def ising_chain(spec: ChainSpec) -> np.ndarray:
    """Transverse-field Ising chain; rejects nonzero ``j_y`` or ``j_z``."""
    if spec.j_y or spec.j_z:
        raise DomainError("ising_chain requires j_y = j_z = 0")
    return heisenberg_chain(spec)


def collective_x(n_sites: int, sites: Sequence[int] | None = None) -> np.ndarray:
    sites = range(1, n_sites + 1) if sites is None else sites
    return sum(pauli_site(n_sites, i, "x") for i in sites)


def fully_connected_ising(spec: FullyConnectedSpec) -> np.ndarray:
    """-(D/2) sum sz_i + (J D / 8) sum_{i,j} sx_i sx_j, the i = j terms included."""
    n = spec.n_sites
    sz = sum(pauli_site(n, i, "z") for i in range(1, n + 1))
    sx = collective_x(n)
    return -0.5 * spec.delta * sz + spec.xx_coefficient * (sx @ sx)


def coupling_operators(scheme: BathScheme, n_sites: int) -> list[np.ndarray]:
    """One collective sigma^x operator per bath of ``scheme``."""
    _check_scheme(scheme, n_sites)
    return [collective_x(n_sites, group) for group in bath_sites(scheme.kind, n_sites)]
