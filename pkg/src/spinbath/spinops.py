"""Dense many-spin operators on the 2^N Hilbert space of a spin-1/2 chain.

Operators are plain complex (or real) ``numpy`` arrays. Site 1 is the
leftmost Kronecker factor, i.e. the most significant bit of a basis index.
"""
from __future__ import annotations

import functools
from typing import Iterable, Sequence

import numpy as np

MAX_SITES = 12
MAX_DIM = 8192
HERMITIAN_ATOL = 1e-12

AXES = ("x", "y", "z")

_PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class DomainError(ValueError):
    """Raised when an operation is called outside its mathematical domain."""


class SizeCapError(DomainError):
    """Raised when a requested Hilbert space exceeds the dense-storage cap."""


def check_sites(n_sites: int) -> None:
    if int(n_sites) != n_sites or n_sites < 1:
        raise DomainError(f"n_sites must be a positive integer, got {n_sites!r}")
    if n_sites > MAX_SITES:
        raise SizeCapError(f"n_sites={n_sites} exceeds the dense cap of {MAX_SITES} sites")


def check_dim(dim: int) -> None:
    if dim > MAX_DIM:
        raise SizeCapError(f"Hilbert-space dimension {dim} exceeds the cap of {MAX_DIM}")


def pauli(axis: str) -> np.ndarray:
    """Single-site Pauli matrix for ``axis`` in {'i', 'x', 'y', 'z'}."""
    try:
        return _PAULI[axis.lower()].copy()
    except KeyError:
        raise DomainError(f"unknown Pauli axis {axis!r}") from None


def pauli_monomial(n_sites: int, ops: dict[int, str]) -> tuple[np.ndarray, np.ndarray]:
    """Sparse form of a Pauli string: ``P[rows[c], c] = vals[c]``, zero elsewhere.

    Every Pauli string has exactly one nonzero per column: x and y flip the
    site bit, y and z attach a phase that depends on it.
    """
    check_sites(n_sites)
    cols = np.arange(2**n_sites)
    mask = 0
    vals = np.ones(cols.shape, dtype=complex)
    for site, axis in ops.items():
        if not 1 <= site <= n_sites:
            raise DomainError(f"site {site} out of range [1, {n_sites}]")
        axis = axis.lower()
        if axis not in _PAULI:
            raise DomainError(f"unknown Pauli axis {axis!r}")
        if axis == "i":
            continue
        shift = n_sites - site
        sign = 1.0 - 2.0 * ((cols >> shift) & 1)
        if axis in ("x", "y"):
            mask |= 1 << shift
        if axis == "z":
            vals *= sign
        elif axis == "y":
            # sigma^y |0> = i|1>, sigma^y |1> = -i|0>
            vals *= 1j * sign
    if not np.any(vals.imag):
        vals = vals.real.copy()
    return cols ^ mask, vals


def add_pauli(out: np.ndarray, coef, ops: dict[int, str]) -> np.ndarray:
    """In-place ``out += coef * P`` for the Pauli string ``ops``; O(dim) work."""
    rows, vals = pauli_monomial(n_sites_of(out), ops)
    out[rows, np.arange(len(rows))] += coef * vals
    return out


@functools.lru_cache(maxsize=512)
def _pauli_site_cached(n_sites: int, site: int, axis: str) -> np.ndarray:
    out = pauli_string(n_sites, {site: axis})
    out.setflags(write=False)
    return out


def pauli_site(n_sites: int, site: int, axis: str) -> np.ndarray:
    """Pauli operator ``sigma^axis`` acting on ``site`` (1-based) of an N-site chain.

    Returns a read-only array; real dtype for x/z, complex for y.
    """
    check_sites(n_sites)
    axis = axis.lower()
    if axis not in AXES:
        raise DomainError(f"axis must be one of {AXES}, got {axis!r}")
    if not 1 <= site <= n_sites:
        raise DomainError(f"site {site} out of range [1, {n_sites}]")
    return _pauli_site_cached(int(n_sites), int(site), axis)


def pauli_string(n_sites: int, ops: dict[int, str]) -> np.ndarray:
    """Tensor product of Paulis at the given sites, identity elsewhere (dense)."""
    rows, vals = pauli_monomial(n_sites, ops)
    dim = len(rows)
    out = np.zeros((dim, dim), dtype=vals.dtype)
    out[rows, np.arange(dim)] = vals
    return out


def pauli_string_kron(n_sites: int, ops: dict[int, str]) -> np.ndarray:
    """Same as :func:`pauli_string` by explicit Kronecker products (slow reference)."""
    check_sites(n_sites)
    for site in ops:
        if not 1 <= site <= n_sites:
            raise DomainError(f"site {site} out of range [1, {n_sites}]")
    factors = [_PAULI[ops.get(k, "i").lower()] for k in range(1, n_sites + 1)]
    return _maybe_real(functools.reduce(np.kron, factors))


def identity(dim: int) -> np.ndarray:
    return np.eye(dim)


def _as_operator(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"operator must be a square matrix, got shape {a.shape}")
    return a


def _maybe_real(a: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(a) and not np.any(a.imag):
        return a.real.copy()
    return a


def _check_same_dim(*ops: np.ndarray) -> None:
    dims = {op.shape[0] for op in ops}
    if len(dims) > 1:
        raise DomainError(f"dimension mismatch: {sorted(dims)}")


def compose(a, b) -> np.ndarray:
    """Matrix product ``a @ b``."""
    a, b = _as_operator(a), _as_operator(b)
    _check_same_dim(a, b)
    return a @ b


def scale_add(terms: Iterable[tuple[float, np.ndarray]]) -> np.ndarray:
    """Real-weighted sum of operators."""
    terms = list(terms)
    if not terms:
        raise DomainError("scale_add needs at least one term")
    ops = [_as_operator(op) for _, op in terms]
    _check_same_dim(*ops)
    dtype = np.result_type(*ops, float)
    out = np.zeros(ops[0].shape, dtype=dtype)
    for (coef, _), op in zip(terms, ops):
        if np.iscomplexobj(coef):
            raise DomainError("scale_add coefficients must be real")
        out += coef * op
    return out


def adjoint(a) -> np.ndarray:
    return _as_operator(a).conj().T


def trace(a) -> complex:
    return complex(np.trace(_as_operator(a)))


def commutator(a, b) -> np.ndarray:
    a, b = _as_operator(a), _as_operator(b)
    _check_same_dim(a, b)
    return a @ b - b @ a


def is_hermitian(a, atol: float = HERMITIAN_ATOL) -> bool:
    a = _as_operator(a)
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= atol)


def hermitize(a, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return ``(a + a^dagger)/2``; raise if ``a`` is not Hermitian within ``atol``."""
    a = _as_operator(a)
    err = np.max(np.abs(a - a.conj().T), initial=0.0)
    if err > atol:
        raise DomainError(f"operator is not Hermitian (max |A - A^dagger| = {err:.3e})")
    return _maybe_real(0.5 * (a + a.conj().T))


def eigendecompose(h) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvectors (as columns) of a Hermitian matrix.

    Matrices with an exactly vanishing imaginary part are diagonalized in real
    arithmetic.
    """
    h = hermitize(h)
    check_dim(h.shape[0])
    evals, evecs = np.linalg.eigh(h)
    return evals, evecs


def spectral_norm(a) -> float:
    a = _as_operator(a)
    if a.shape[0] == 0:
        return 0.0
    if is_hermitian(a, atol=1e-9 * max(1.0, np.max(np.abs(a)))):
        return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (a + a.conj().T)))))
    return float(np.linalg.norm(a, 2))


def n_sites_of(op) -> int:
    """Number of spin-1/2 sites of a 2^N operator."""
    dim = _as_operator(op).shape[0]
    n = dim.bit_length() - 1
    if 2**n != dim:
        raise DomainError(f"dimension {dim} is not a power of two")
    return n


def pauli_coefficient(op, ops: dict[int, str]) -> float:
    """Real coefficient of a Pauli string in the expansion of a Hermitian operator.

    ``ops`` maps 1-based sites to axes; an empty dict selects the identity.
    """
    op = _as_operator(op)
    n = n_sites_of(op)
    rows, vals = pauli_monomial(n, ops)
    # Tr(P A) = sum_c P[rows_c, c] A[c, rows_c]
    val = np.sum(vals * op[np.arange(len(rows)), rows]) / op.shape[0]
    return float(np.real(val))


@functools.lru_cache(maxsize=16)
def x_basis_rotation(n_sites: int) -> np.ndarray:
    """Hadamard product ``H^{(x)N}``: columns are sigma^x product eigenstates.

    Basis state with bit 0 at a site carries sigma^x eigenvalue +1 there.
    """
    check_sites(n_sites)
    had = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    out = functools.reduce(np.kron, [had] * n_sites)
    out.setflags(write=False)
    return out


def x_eigenvalues(n_sites: int, sites: Sequence[int]) -> np.ndarray:
    """Diagonal of ``sum_{i in sites} sigma^x_i`` in the x product basis."""
    check_sites(n_sites)
    idx = np.arange(2**n_sites)
    out = np.zeros(2**n_sites)
    for site in sites:
        bit = (idx >> (n_sites - site)) & 1
        out += 1.0 - 2.0 * bit
    return out
