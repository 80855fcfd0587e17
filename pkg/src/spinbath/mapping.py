"""Effective system Hamiltonians that absorb strong system-bath coupling.

Three routes are provided:

* :func:`effh_generic` -- the reaction-coordinate effective Hamiltonian for any
  set of mutually commuting coupling operators, evaluated exactly in their
  joint eigenbasis.
* ``effh_global`` / ``effh_local`` / ``effh_half`` / ``effh_pairwise`` /
  ``effh_fully_connected`` -- closed forms for the bath schemes, assembled
  from Pauli-term coefficients.
* :func:`polaron_hamiltonian` -- full-polaron system Hamiltonian with
  temperature-dependent dressing, for super-Ohmic baths.

Every closed-form builder returns an :class:`EffectiveHamiltonian` carrying
both the matrix and its Pauli-term table, so coefficients can be compared
directly. Identity shifts are kept in both; they do not affect any Gibbs
observable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import spectral
from .models import (
    BathScheme,
    ChainSpec,
    FullyConnectedSpec,
    SchemeKind,
    _check_scheme,
    coupling_operators,
    site_to_bath,
)
from .spectral import RCParams, SuperOhmic, UnsupportedVariantError
from .spinops import DomainError, add_pauli, check_sites, hermitize, pauli_monomial, x_basis_rotation

COMMUTE_ATOL = 1e-10

Term = tuple[tuple[int, str], ...]


@dataclass(frozen=True)
class BathAttachment:
    """A coupling operator together with its reaction-coordinate parameters."""

    op: np.ndarray
    rc: RCParams


@dataclass
class EffectiveHamiltonian:
    h: np.ndarray
    picture: str
    scheme: str
    params: dict = field(default_factory=dict)
    beta: Optional[float] = None
    terms: Optional[dict] = None

    def coefficient(self, *ops: tuple[int, str]) -> float:
        """Coefficient of a Pauli term, e.g. ``coefficient((1, 'x'), (2, 'x'))``."""
        if self.terms is None:
            raise DomainError("this Hamiltonian was not built from a term table")
        return self.terms.get(_key(*ops), 0.0)


def _key(*ops: tuple[int, str]) -> Term:
    return tuple(sorted(ops))


class _Terms(dict):
    def add(self, coef: float, *ops: tuple[int, str]) -> None:
        if coef == 0.0:
            return
        k = _key(*ops)
        self[k] = self.get(k, 0.0) + float(coef)

    def bond(self, i: int, j: int, axis: str, coef: float) -> None:
        self.add(coef, (i, axis), (j, axis))


def build_from_terms(n_sites: int, terms: dict) -> np.ndarray:
    """Assemble a Hermitian matrix from a Pauli-term table."""
    check_sites(n_sites)
    dim = 2**n_sites
    h = np.zeros((dim, dim))
    for key, coef in terms.items():
        if not key:
            h[np.diag_indices(dim)] += coef
            continue
        _, vals = pauli_monomial(n_sites, dict(key))
        if np.iscomplexobj(vals):
            raise DomainError(f"term {key} is not real")
        add_pauli(h, coef, dict(key))
    return h


# ---------------------------------------------------------------------------
# generic dictionary
# ---------------------------------------------------------------------------


def _check_commuting(ops: Sequence[np.ndarray]) -> None:
    for a in range(len(ops)):
        for b in range(a + 1, len(ops)):
            c = ops[a] @ ops[b] - ops[b] @ ops[a]
            err = np.max(np.abs(c), initial=0.0)
            if err > COMMUTE_ATOL:
                raise DomainError(
                    f"coupling operators {a} and {b} do not commute (|[S_a, S_b]| = {err:.3e})"
                )


def joint_eigenbasis(ops: Sequence[np.ndarray]) -> tuple[np.ndarray, list[np.ndarray]]:
    """Common eigenbasis of commuting Hermitian operators and each operator's eigenvalues.

    Collective sigma^x operators are diagonal in the x product basis, which is
    tried first. Otherwise a generic real combination is diagonalized.
    """
    ops = [hermitize(op) for op in ops]
    dim = ops[0].shape[0]
    _check_commuting(ops)
    n = dim.bit_length() - 1
    if 2**n == dim:
        rot = x_basis_rotation(n)
        rotated = [rot.T @ op @ rot for op in ops]
        if all(np.max(np.abs(r - np.diag(np.diag(r)))) <= COMMUTE_ATOL for r in rotated):
            return rot, [np.real(np.diag(r)).copy() for r in rotated]
    rng = np.random.default_rng(20240611)
    weights = rng.uniform(0.5, 1.5, size=len(ops))
    combo = sum(w * op for w, op in zip(weights, ops))
    _, vecs = np.linalg.eigh(combo)
    evals = []
    for op in ops:
        r = vecs.conj().T @ op @ vecs
        off = np.max(np.abs(r - np.diag(np.diag(r))))
        if off > 1e-8 * max(1.0, np.max(np.abs(op))):
            raise DomainError("could not find a joint eigenbasis for the coupling operators")
        evals.append(np.real(np.diag(r)).copy())
    return vecs, evals


def gaussian_dress(
    h_s: np.ndarray,
    ops: Sequence[np.ndarray],
    rates: Sequence[float],
    shifts: Sequence[float],
) -> np.ndarray:
    """Damp h_s elements by exp(-sum_n rate_n (s_a - s_b)^2), then subtract sum_n shift_n S_n^2.

    (a, b) index the joint eigenbasis of ``ops``; ``s`` are their eigenvalues.
    """
    h_s = hermitize(h_s)
    if not ops:
        return h_s.copy()
    vecs, svals = joint_eigenbasis(ops)
    h_rot = vecs.conj().T @ h_s @ vecs
    expo = np.zeros(h_rot.shape)
    for rate, s in zip(rates, svals):
        if rate:
            expo -= rate * (s[:, None] - s[None, :]) ** 2
    h_rot = h_rot * np.exp(expo)
    h_rot[np.diag_indices_from(h_rot)] -= sum(
        shift * s**2 for shift, s in zip(shifts, svals)
    )
    out = vecs @ h_rot @ vecs.conj().T
    return hermitize(out, atol=1e-9 * max(1.0, np.max(np.abs(out))))


def effh_generic(h_s: np.ndarray, attachments: Sequence[BathAttachment]) -> EffectiveHamiltonian:
    """Reaction-coordinate effective Hamiltonian for commuting coupling operators.

    Equals the resummed dictionary series
    ``exp(-c S^2/2) (sum_n c^n/n! S^n H S^n) exp(-c S^2/2) - (lam^2/Omega) S^2``
    with ``c = lam^2/Omega^2``, applied bath by bath.
    """
    ops = [a.op for a in attachments]
    h = gaussian_dress(
        h_s,
        ops,
        [0.5 * a.rc.damping for a in attachments],
        [a.rc.reorganization for a in attachments],
    )
    return EffectiveHamiltonian(
        h, "effh", "generic", {"rc": [a.rc for a in attachments]}
    )


def attachments_for(scheme: BathScheme, n_sites: int, rcs: Sequence[RCParams]) -> list[BathAttachment]:
    ops = coupling_operators(scheme, n_sites)
    if len(rcs) != len(ops):
        raise DomainError(f"expected {len(ops)} RC parameter sets, got {len(rcs)}")
    return [BathAttachment(op, rc) for op, rc in zip(ops, rcs)]


# ---------------------------------------------------------------------------
# EFFH closed forms
# ---------------------------------------------------------------------------


def _mixers(chain: ChainSpec, rc: RCParams) -> tuple[float, float]:
    """J_y, J_z of a bond whose two sites share one bath."""
    e8 = math.exp(-8.0 * rc.damping)
    jy = 0.5 * chain.j_y * (1 + e8) + 0.5 * chain.j_z * (1 - e8)
    jz = 0.5 * chain.j_z * (1 + e8) + 0.5 * chain.j_y * (1 - e8)
    return jy, jz


def _suppression(rc: RCParams) -> float:
    return math.exp(-2.0 * rc.damping)


def _finish(chain, terms, scheme, picture, params, beta=None) -> EffectiveHamiltonian:
    h = build_from_terms(chain.n_sites, terms)
    return EffectiveHamiltonian(h, picture, scheme, params, beta, dict(terms))


def _shared_bath_block(t: _Terms, chain: ChainSpec, sites: Sequence[int], rc: RCParams) -> None:
    """Terms of a contiguous block of sites all attached to one bath."""
    dz = _suppression(rc)
    jy, jz = _mixers(chain, rc)
    e = rc.reorganization
    for i in sites:
        t.add(chain.deltas[i - 1] * dz, (i, "z"))
    for i, j in zip(sites[:-1], sites[1:]):
        t.bond(i, j, "x", chain.j_x)
        t.bond(i, j, "y", jy)
        t.bond(i, j, "z", jz)
    for a, i in enumerate(sites):
        for j in sites[a + 1 :]:
            t.bond(i, j, "x", -2.0 * e)
    t.add(-e * len(sites))


def _cross_bath_bond(t: _Terms, chain: ChainSpec, i: int, rc_i: RCParams, rc_j: RCParams) -> None:
    damp = _suppression(rc_i) * _suppression(rc_j)
    t.bond(i, i + 1, "x", chain.j_x)
    t.bond(i, i + 1, "y", chain.j_y * damp)
    t.bond(i, i + 1, "z", chain.j_z * damp)


def effh_global(chain: ChainSpec, rc: RCParams) -> EffectiveHamiltonian:
    """Whole chain on one bath: dressed splittings, y/z mixing, all-to-all FM x-x term."""
    t = _Terms()
    _shared_bath_block(t, chain, list(range(1, chain.n_sites + 1)), rc)
    return _finish(chain, t, "global", "effh", {"rc": [rc]})


def effh_local(chain: ChainSpec, rcs: Sequence[RCParams]) -> EffectiveHamiltonian:
    """One bath per site: only nearest-neighbour y/z suppression, no generated couplings."""
    n = chain.n_sites
    if len(rcs) != n:
        raise DomainError(f"local scheme needs {n} RC parameter sets, got {len(rcs)}")
    t = _Terms()
    for i in range(1, n + 1):
        t.add(chain.deltas[i - 1] * _suppression(rcs[i - 1]), (i, "z"))
    for i in range(1, n):
        _cross_bath_bond(t, chain, i, rcs[i - 1], rcs[i])
    t.add(-sum(rc.reorganization for rc in rcs))
    return _finish(chain, t, "local", "effh", {"rc": list(rcs)})


def effh_half(chain: ChainSpec, rc_left: RCParams, rc_right: RCParams) -> EffectiveHamiltonian:
    """Two baths on the two halves; the middle bond keeps J_x bare (domain-wall bond)."""
    n = chain.n_sites
    if n % 2:
        raise DomainError(f"half-and-half scheme requires even n_sites, got {n}")
    half = n // 2
    t = _Terms()
    _shared_bath_block(t, chain, list(range(1, half + 1)), rc_left)
    _shared_bath_block(t, chain, list(range(half + 1, n + 1)), rc_right)
    _cross_bath_bond(t, chain, half, rc_left, rc_right)
    return _finish(chain, t, "half", "effh", {"rc": [rc_left, rc_right]})


def effh_pairwise(chain: ChainSpec, rcs: Sequence[RCParams]) -> EffectiveHamiltonian:
    """Sites (2n-1, 2n) share bath n; the x coupling inside a pair becomes J_x - 2 lam_n^2/Omega_n."""
    n = chain.n_sites
    if n % 2:
        raise DomainError(f"pairwise scheme requires even n_sites, got {n}")
    if len(rcs) != n // 2:
        raise DomainError(f"pairwise scheme needs {n // 2} RC parameter sets, got {len(rcs)}")
    t = _Terms()
    for b, rc in enumerate(rcs, start=1):
        _shared_bath_block(t, chain, [2 * b - 1, 2 * b], rc)
    # bond (2b, 2b+1) joins bath b and bath b+1
    for b in range(1, n // 2):
        _cross_bath_bond(t, chain, 2 * b, rcs[b - 1], rcs[b])
    return _finish(chain, t, "pairwise", "effh", {"rc": list(rcs)})


def effh_fully_connected(spec: FullyConnectedSpec, rc: RCParams) -> EffectiveHamiltonian:
    """-(D~/2) sum sz + (J D/8 - lam^2/Omega) sum_{i,j} sx_i sx_j."""
    n = spec.n_sites
    g = spec.xx_coefficient - rc.reorganization
    t = _Terms()
    for i in range(1, n + 1):
        t.add(-0.5 * spec.delta * _suppression(rc), (i, "z"))
        for j in range(i + 1, n + 1):
            t.bond(i, j, "x", 2.0 * g)
    t.add(g * n)
    return _finish(spec, t, "global", "effh", {"rc": [rc]})


def critical_coupling(spec: FullyConnectedSpec, omega: float) -> float:
    """RC coupling at which the net x-x coefficient of the fully-connected model vanishes."""
    return math.sqrt(spec.xx_coefficient * omega) if spec.xx_coefficient > 0 else 0.0


def critical_alpha(spec: FullyConnectedSpec, omega_c: float) -> float:
    """Super-Ohmic coupling at which J D / 8 = 2 omega_c alpha."""
    return max(spec.xx_coefficient, 0.0) / (2.0 * omega_c)


def effh_scheme(scheme: BathScheme, chain: ChainSpec) -> EffectiveHamiltonian:
    """Dispatch to the closed form of ``scheme``; densities are mapped with ``rc_params``."""
    _check_scheme(scheme, chain.n_sites)
    rcs = [spectral.rc_params(sd) for sd in scheme.baths]
    kind = scheme.kind
    if kind is SchemeKind.GLOBAL:
        return effh_global(chain, rcs[0])
    if kind is SchemeKind.LOCAL:
        return effh_local(chain, rcs)
    if kind is SchemeKind.HALF:
        return effh_half(chain, rcs[0], rcs[1])
    return effh_pairwise(chain, rcs)


# ---------------------------------------------------------------------------
# full polaron
# ---------------------------------------------------------------------------


def _require_superohmic(scheme: BathScheme) -> None:
    for sd in scheme.baths:
        if not isinstance(sd, SuperOhmic):
            raise UnsupportedVariantError(
                f"polaron picture needs SuperOhmic baths, got {type(sd).__name__}"
            )


def polaron_hamiltonian(scheme: BathScheme, chain: ChainSpec, beta: float) -> EffectiveHamiltonian:
    """Full-polaron system Hamiltonian at inverse temperature ``beta``.

    Splittings scale with <C>; x bonds between sites on a common bath lose
    2 E_I (at any range); y/z bonds on a common bath mix through <CC> and
    <SS>, and across baths they are damped by <C><C>. A constant sum of E_0
    completes it.
    """
    n = chain.n_sites
    _check_scheme(scheme, n)
    _require_superohmic(scheme)
    owner = site_to_bath(scheme.kind, n)
    sd = [scheme.baths[owner[i]] for i in range(n)]
    t = _Terms()
    for i in range(1, n + 1):
        t.add(chain.deltas[i - 1] * spectral.dressing(sd[i - 1], beta), (i, "z"))
        t.add(spectral.polaron_e0(sd[i - 1]))
    for i in range(1, n):
        a, b = sd[i - 1], sd[i]
        same = owner[i - 1] == owner[i]
        cc, ss = spectral.joint_dressing(a, b, beta, same)
        if same:
            t.bond(i, i + 1, "x", chain.j_x - 2.0 * spectral.polaron_ei(a, b))
        else:
            t.bond(i, i + 1, "x", chain.j_x)
        t.bond(i, i + 1, "y", chain.j_y * cc + chain.j_z * ss)
        t.bond(i, i + 1, "z", chain.j_z * cc + chain.j_y * ss)
    for i in range(1, n + 1):
        for j in range(i + 2, n + 1):
            if owner[i - 1] == owner[j - 1]:
                t.bond(i, j, "x", -2.0 * spectral.polaron_ei(sd[i - 1], sd[j - 1]))
    return _finish(chain, t, scheme.kind.value, "polaron", {"baths": list(scheme.baths)}, beta)


def polaron_fully_connected(spec: FullyConnectedSpec, sd: SuperOhmic, beta: float) -> EffectiveHamiltonian:
    """-(D <C>/2) sum sz + (J D/8 - E_I) sum_{i,j} sx_i sx_j; E_I = 2 omega_c alpha."""
    if not isinstance(sd, SuperOhmic):
        raise UnsupportedVariantError("polaron picture needs a SuperOhmic bath")
    n = spec.n_sites
    g = spec.xx_coefficient - spectral.polaron_ei(sd, sd)
    t = _Terms()
    for i in range(1, n + 1):
        t.add(-0.5 * spec.delta * spectral.dressing(sd, beta), (i, "z"))
        for j in range(i + 1, n + 1):
            t.bond(i, j, "x", 2.0 * g)
    t.add(g * n)
    return _finish(spec, t, "global", "polaron", {"baths": [sd]}, beta)


def polaron_generic(h_s: np.ndarray, scheme: BathScheme, beta: float) -> np.ndarray:
    """Polaron dressing of an arbitrary ``h_s`` in the joint x eigenbasis.

    Each bath contributes exp(-phi_b (S_a - S_b)^2 / 4) to an element and
    -E_I,b S_b^2 to the diagonal, which holds when all sites of a bath couple
    with equal strength. Reference path for :func:`polaron_hamiltonian`.
    """
    _require_superohmic(scheme)
    n = h_s.shape[0].bit_length() - 1
    ops = coupling_operators(scheme, n)
    rates = [0.25 * spectral.dressing_exponent(sd, beta) for sd in scheme.baths]
    shifts = [spectral.polaron_ei(sd, sd) for sd in scheme.baths]
    return gaussian_dress(h_s, ops, rates, shifts)
