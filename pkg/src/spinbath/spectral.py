"""Bath spectral densities and the bath-averaged coefficients derived from them.

Two families are supported:

* :class:`Brownian` -- peaked at ``omega0`` with width ``gamma * omega0``; it is
  the exact pre-image of a reaction-coordinate mode with parameters
  ``(lam, omega0)``.
* :class:`SuperOhmic` -- ``alpha * w**3 / omega_c**2 * exp(-w / omega_c)``, the
  family for which the full-polaron closed forms hold.

Units: hbar = k_B = 1.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .spinops import DomainError

QUAD_RTOL = 1e-9
SMALL_OMEGA = 1e-8


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class DivergentIntegralError(DomainError):
    """A requested moment of the spectral density does not exist."""


class UnsupportedVariantError(DomainError):
    """The operation is not defined for this spectral-density family."""


@dataclass(frozen=True)
class Brownian:
    lam: float
    omega0: float
    gamma: float

    def __post_init__(self):
        if self.lam < 0:
            raise DomainError(f"Brownian lam must be >= 0, got {self.lam}")
        if self.omega0 <= 0:
            raise DomainError(f"Brownian omega0 must be > 0, got {self.omega0}")
        if self.gamma <= 0:
            raise DomainError(f"Brownian gamma must be > 0, got {self.gamma}")
        if self.gamma > 0.1:
            warnings.warn(
                f"Brownian gamma={self.gamma} > 0.1: residual bath coupling is not weak",
                stacklevel=2,
            )

    @property
    def scale(self) -> float:
        return self.omega0


@dataclass(frozen=True)
class SuperOhmic:
    alpha: float
    omega_c: float

    def __post_init__(self):
        if self.alpha < 0:
            raise DomainError(f"SuperOhmic alpha must be >= 0, got {self.alpha}")
        if self.omega_c <= 0:
            raise DomainError(f"SuperOhmic omega_c must be > 0, got {self.omega_c}")

    @property
    def scale(self) -> float:
        return self.omega_c


SpectralDensity = Union[Brownian, SuperOhmic]


@dataclass(frozen=True)
class RCParams:
    """Reaction-coordinate coupling ``lam`` and frequency ``omega``."""

    lam: float
    omega: float

    def __post_init__(self):
        if self.omega <= 0:
            raise DomainError(f"RC frequency must be > 0, got {self.omega}")
        if self.lam < 0:
            raise DomainError(f"RC coupling must be >= 0, got {self.lam}")

    @property
    def reorganization(self) -> float:
        """lam**2 / omega, the bath-induced x-x energy scale."""
        return self.lam**2 / self.omega

    @property
    def damping(self) -> float:
        """lam**2 / omega**2, the Gaussian dressing rate."""
        return (self.lam / self.omega) ** 2


def k_of(sd: SpectralDensity, omega):
    """Evaluate K(omega) for scalar or array ``omega >= 0``."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("spectral density is defined for omega >= 0")
    if isinstance(sd, Brownian):
        num = 4.0 * sd.gamma * sd.omega0**2 * sd.lam**2 * w
        den = (w**2 - sd.omega0**2) ** 2 + (2.0 * np.pi * sd.gamma * sd.omega0 * w) ** 2
        out = num / den
    elif isinstance(sd, SuperOhmic):
        out = sd.alpha * w**3 / sd.omega_c**2 * np.exp(-w / sd.omega_c)
    else:
        raise UnsupportedVariantError(f"unknown spectral density {sd!r}")
    return float(out) if out.ndim == 0 else out


def quadrature(
    integrand: Callable[[float], float],
    scale: float = 1.0,
    zero_limit: float | None = None,
    rtol: float = QUAD_RTOL,
) -> float:
    """Integrate a decaying function over (0, inf).

    The domain is mapped to (0, 1] with ``w = -scale * log(u)``. Below
    ``w = SMALL_OMEGA * scale`` the integrand is replaced by ``zero_limit``
    when given, which sidesteps removable singularities such as coth at 0.
    """
    if scale <= 0:
        raise DomainError("quadrature scale must be positive")
    cut = SMALL_OMEGA * scale

    def f(w):
        if w < cut and zero_limit is not None:
            return zero_limit
        return integrand(w)

    def g(u):
        if u <= 0.0:
            return 0.0
        w = -scale * math.log(u)
        return f(w) * scale / u

    out = integrate.quad(g, 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=500, full_output=1)
    val, err, info = out[:3]
    if len(out) > 3:
        # quad reports non-convergence through an extra message instead of warning
        raise QuadratureError(f"quadrature did not converge (abserr={err:.3e}, neval={info['neval']}): {out[3]}")
    if not np.isfinite(val):
        raise QuadratureError(f"quadrature returned {val} (abserr={err}, neval={info['neval']})")
    return float(val)


def _quad_or_zero(integrand, scale, zero_limit=None, weight=1.0) -> float:
    if weight == 0.0:
        return 0.0
    return quadrature(integrand, scale=scale, zero_limit=zero_limit)


def moment(sd: SpectralDensity, power: int) -> float:
    """Numerical moment ``int_0^inf w**power K(w) dw``.

    Raises :class:`DivergentIntegralError` if the integrand does not decay.
    The Brownian form falls off as w**-3, so only powers below 2 exist.
    """
    if isinstance(sd, Brownian):
        if power >= 2:
            raise DivergentIntegralError(
                f"Brownian moment of order {power} diverges (K ~ w^-3 at large w)"
            )
        if sd.lam == 0:
            return 0.0
        # the Lorentzian-like peak needs explicit breakpoints for qags
        w0, width = sd.omega0, 2 * np.pi * sd.gamma * sd.omega0
        pts = sorted({max(w0 - 5 * width, 0.0), w0, w0 + 5 * width})
        f = lambda w: w**power * k_of(sd, w)
        head = integrate.quad(f, 0.0, pts[-1], points=pts[1:-1] or None,
                              epsabs=0.0, epsrel=QUAD_RTOL, limit=500)[0]
        tail = integrate.quad(f, pts[-1], np.inf, epsabs=0.0, epsrel=QUAD_RTOL, limit=500)[0]
        return float(head + tail)
    if isinstance(sd, SuperOhmic):
        if sd.alpha == 0:
            return 0.0
        return quadrature(lambda w: w**power * k_of(sd, w), scale=sd.omega_c, zero_limit=0.0)
    raise UnsupportedVariantError(f"unknown spectral density {sd!r}")


def rc_params(sd: SpectralDensity) -> RCParams:
    """Reaction-coordinate parameters of a spectral density.

    Brownian: the stored ``(lam, omega0)``. SuperOhmic: from the moments
    ``lam**2 = M1 / Omega`` and ``Omega**2 = M3 / M1`` with closed forms
    ``M1 = 24 alpha omega_c**3`` and ``M3 = 720 alpha omega_c**5``.
    """
    if isinstance(sd, Brownian):
        return RCParams(sd.lam, sd.omega0)
    if isinstance(sd, SuperOhmic):
        omega = math.sqrt(30.0) * sd.omega_c
        m1 = 24.0 * sd.alpha * sd.omega_c**3
        return RCParams(math.sqrt(m1 / omega), omega)
    raise UnsupportedVariantError(f"unknown spectral density {sd!r}")


def rc_params_from_moments(sd: SpectralDensity) -> RCParams:
    """Same as :func:`rc_params` but by numerical integration of the moments."""
    m1 = moment(sd, 1)
    m3 = moment(sd, 3)
    if m1 == 0:
        return RCParams(0.0, math.sqrt(30.0) * sd.scale)
    omega = math.sqrt(m3 / m1)
    return RCParams(math.sqrt(m1 / omega), omega)


def _require_superohmic(*sds) -> float:
    for sd in sds:
        if not isinstance(sd, SuperOhmic):
            raise UnsupportedVariantError(
                f"polaron coefficients need SuperOhmic densities, got {type(sd).__name__}"
            )
    cutoffs = {sd.omega_c for sd in sds}
    if len(cutoffs) > 1:
        raise DomainError(f"baths must share omega_c, got {sorted(cutoffs)}")
    return sds[0].omega_c


def polaron_e0(sd: SpectralDensity) -> float:
    """Per-site polaron energy shift -2 omega_c alpha."""
    wc = _require_superohmic(sd)
    return -2.0 * wc * sd.alpha


def polaron_ei(sd_a: SpectralDensity, sd_b: SpectralDensity) -> float:
    """Bath-induced x-x interaction energy 2 omega_c sqrt(alpha_a alpha_b)."""
    wc = _require_superohmic(sd_a, sd_b)
    return 2.0 * wc * math.sqrt(sd_a.alpha * sd_b.alpha)


def polaron_e0_quadrature(sd: SpectralDensity) -> float:
    """-int K(w)/w dw, evaluated numerically."""
    _require_superohmic(sd)
    return -_quad_or_zero(lambda w: k_of(sd, w) / w, sd.omega_c, 0.0, sd.alpha)


def polaron_ei_quadrature(sd_a: SpectralDensity, sd_b: SpectralDensity) -> float:
    """int sqrt(K_a K_b)/w dw, evaluated numerically."""
    wc = _require_superohmic(sd_a, sd_b)
    return _quad_or_zero(
        lambda w: math.sqrt(k_of(sd_a, w) * k_of(sd_b, w)) / w, wc, 0.0, sd_a.alpha * sd_b.alpha
    )


def _dressing_integral(amp: float, omega_c: float, beta: float) -> float:
    """2 int amp * w / omega_c**2 * exp(-w/omega_c) coth(beta w / 2) dw."""
    if amp == 0:
        return 0.0

    def f(w):
        return amp * w / omega_c**2 * math.exp(-w / omega_c) / math.tanh(0.5 * beta * w)

    limit = 2.0 * amp / (beta * omega_c**2)
    return 2.0 * quadrature(f, scale=omega_c, zero_limit=limit)


def _check_beta(beta: float) -> float:
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    return float(beta)


@functools.lru_cache(maxsize=4096)
def dressing_exponent(sd: SpectralDensity, beta: float) -> float:
    """phi = 2 int K(w)/w**2 coth(beta w / 2) dw, so that <C> = exp(-phi)."""
    beta = _check_beta(beta)
    wc = _require_superohmic(sd)
    return _dressing_integral(sd.alpha, wc, beta)


def dressing(sd: SpectralDensity, beta: float) -> float:
    """Thermal average <cos B> of one site's bath displacement."""
    return math.exp(-dressing_exponent(sd, beta))


@functools.lru_cache(maxsize=4096)
def joint_dressing(
    sd_a: SpectralDensity, sd_b: SpectralDensity, beta: float, same_bath: bool
) -> tuple[float, float]:
    """Bath averages (<C_a C_b>, <S_a S_b>) for two sites.

    Sites on the same bath share modes, so the two cosines are correlated;
    on different baths the averages factorize and <S S> vanishes.
    """
    beta = _check_beta(beta)
    wc = _require_superohmic(sd_a, sd_b)
    if not same_bath:
        return dressing(sd_a, beta) * dressing(sd_b, beta), 0.0
    ra, rb = math.sqrt(sd_a.alpha), math.sqrt(sd_b.alpha)
    phi_plus = _dressing_integral((ra + rb) ** 2, wc, beta)
    phi_minus = _dressing_integral((ra - rb) ** 2, wc, beta)
    ep, em = math.exp(-phi_plus), math.exp(-phi_minus)
    return 0.5 * (ep + em), -0.5 * (ep - em)
