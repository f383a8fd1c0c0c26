"""Weierstrass elliptic functions on the torus C / (Z + tau Z).

Every function is evaluated through rapidly convergent q-series.  The
modulus is first moved into the standard fundamental domain of SL(2, Z)
when its imaginary part is small, and the argument is reduced to the period
cell centred at the origin, so that the nome and the exponential factors in
the series stay bounded.  The reductions are undone exactly through the
homogeneity and quasi-periodicity laws.

Conventions: the periods are ``omega_1 = 1``, ``omega_2 = tau`` and
``omega_3 = 1 + tau``; ``eta_k`` are the quasi-periods of zeta along
``omega_k``; ``e_k = wp(omega_k / 2)``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Config

PI = math.pi
TWO_PI_I = 2j * math.pi
SQRT3_2 = math.sqrt(3.0) / 2.0
_MAX_THETA_TERMS = 200


class DomainError(ValueError):
    """Raised for arguments outside the domain of convergence."""


class PoleProximityError(ValueError):
    """Raised when an argument lies within the pole floor of the lattice."""


def _as_output(arr):
    arr = np.asarray(arr)
    if arr.ndim == 0:
        return complex(arr)
    return arr


def theta1(v, q, deriv: int = 0, tol: float = DEFAULT.series_tol, scaled: bool = False):
    """Odd Jacobi theta function and its derivatives in ``v``.

    Parameters
    ----------
    v : complex or array_like
        Argument.
    q : complex
        Jacobi nome ``exp(i pi tau)``, with ``|q| < 1``.  The fractional
        power ``q**(1/4)`` uses the principal branch.
    deriv : int
        Derivative order in ``v``, between 0 and 3.
    tol : float
        Summation stops once the next term is below ``tol`` times the
        running magnitude.
    scaled : bool
        Drop the common factor ``q**(1/4)``; ratios of scaled values stay
        finite when ``q`` underflows.

    Returns
    -------
    complex or ndarray
        ``2 * sum_n (-1)**n q**((n + 1/2)**2) sin((2n + 1) v)`` or its
        ``deriv``-th derivative.
    """
    q = complex(q)
    if not abs(q) < 1.0:
        raise DomainError(f"theta series needs |q| < 1, got |q| = {abs(q):.6g}")
    if deriv not in (0, 1, 2, 3):
        raise ValueError("deriv must be 0, 1, 2 or 3")
    v = np.asarray(v, dtype=complex)
    if q == 0:
        if scaled:
            return _as_output(2.0 * np.sin(v + deriv * PI / 2.0))
        return _as_output(np.zeros_like(v))
    logq = np.log(q)
    shift = 0.25 if scaled else 0.0
    absq = abs(q)
    imv = float(np.max(np.abs(v.imag))) if v.size else 0.0
    total = np.zeros_like(v)
    phase = deriv * PI / 2.0
    for n in range(_MAX_THETA_TERMS):
        k = 2 * n + 1
        coef = 2.0 * (-1) ** n * np.exp(logq * ((n + 0.5) ** 2 - shift)) * k**deriv
        total = total + coef * np.sin(k * v + phase)
        # bound on the next term
        kn = k + 2
        bound = 2.0 * absq ** ((n + 1.5) ** 2 - shift) * kn**deriv * math.exp(min(kn * imv, 700.0))
        scale = float(np.max(np.abs(total))) if total.size else 0.0
        if bound < tol * max(scale, 1e-300) or bound == 0.0:
            break
    return _as_output(total)


def reduce_tau(tau: complex):
    """Move ``tau`` into the standard fundamental domain of SL(2, Z).

    Returns
    -------
    tau_r : complex
        Reduced modulus with ``|Re tau_r| <= 1/2`` and ``|tau_r| >= 1``.
    gamma : tuple of int
        ``(a, b, c, d)`` with ``tau_r = (a tau + b) / (c tau + d)``.
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise DomainError("tau must lie in the upper half plane")
    a, b, c, d = 1, 0, 0, 1
    t = tau
    for _ in range(10000):
        n = math.floor(t.real + 0.5)
        if n:
            t -= n
            a, b = a - n * c, b - n * d
        if abs(t) < 1.0 - 1e-15:
            t = -1.0 / t
            a, b, c, d = -c, -d, a, b
        else:
            break
    else:  # pragma: no cover - the loop terminates for Im tau > 0
        raise DomainError("modulus reduction did not terminate")
    return t, (a, b, c, d)


class _Frame:
    """Series evaluation for one modulus with ``Im tau >= sqrt(3)/2``."""

    def __init__(self, tau: complex, config: Config):
        self.tau = complex(tau)
        self.config = config
        self.nome = np.exp(1j * PI * self.tau)
        self.q = np.exp(TWO_PI_I * self.tau)
        t1 = theta1(0.0, self.nome, 1, config.series_tol, scaled=True)
        t3 = theta1(0.0, self.nome, 3, config.series_tol, scaled=True)
        self.theta1_prime0 = t1
        self.eta1 = -(PI**2 / 3.0) * t3 / t1
        self.eta2 = self.tau * self.eta1 - TWO_PI_I
        # on the reduced cell |q x| and |q / x| are at most |q|**(1/2)
        rho = abs(self.q) ** 0.5
        nmax = 1
        while rho ** (nmax + 1) * (nmax + 1) ** 3 >= config.series_tol and nmax < 400:
            nmax += 1
        self.n = np.arange(1, nmax + 1, dtype=float)
        self.b = 1.0 / (1.0 - self.q ** self.n)

    def reduce(self, u):
        n = np.round(u.imag / self.tau.imag)
        w = u - n * self.tau
        m = np.round(w.real)
        return w - m, m, n

    def core(self, ur):
        """Return zeta, wp, wp', wp'' at reduced arguments ``ur``."""
        up = ur.imag >= 0
        sgn = np.where(up, 1.0, -1.0)
        # x = exp(2 pi i u) on the side where |x| <= 1
        xs = np.exp(TWO_PI_I * sgn * ur)
        one_minus = -np.expm1(TWO_PI_I * sgn * ur)
        cot = -1j * sgn * (1.0 + xs) / one_minus
        csc2 = -4.0 * xs / one_minus**2
        # q^n x^(+-n) as single exponentials; |Im ur| <= Im tau / 2 keeps both bounded
        u = ur[..., None]
        P = np.exp(TWO_PI_I * self.n * (self.tau + u))
        M = np.exp(TWO_PI_I * self.n * (self.tau - u))
        b = self.b
        n = self.n
        s_minus = np.sum(b * (P - M), axis=-1)
        s_plus = np.sum(n * b * (P + M), axis=-1)
        s2_minus = np.sum(n**2 * b * (P - M), axis=-1)
        s3_plus = np.sum(n**3 * b * (P + M), axis=-1)
        zeta = self.eta1 * ur + PI * cot - TWO_PI_I * s_minus
        wp = -self.eta1 + PI**2 * csc2 - 4.0 * PI**2 * s_plus
        wp1 = -2.0 * PI**3 * csc2 * cot - 8j * PI**3 * s2_minus
        wp2 = PI**4 * (6.0 * csc2**2 - 4.0 * csc2) + 16.0 * PI**4 * s3_plus
        return zeta, wp, wp1, wp2

    def sigma_reduced(self, ur):
        th = theta1(PI * ur, self.nome, 0, self.config.series_tol, scaled=True)
        return np.exp(self.eta1 * ur**2 / 2.0) * th / (PI * self.theta1_prime0)


@dataclass(frozen=True)
class QuarterConstants:
    """Values of zeta, wp, wp' and wp'' at a quarter period ``omega_k / 4``."""

    zeta: complex
    wp: complex
    wp1: complex
    wp2: complex


@dataclass(frozen=True, eq=False)
class LatticeContext:
    """Invariants of the lattice ``Z + tau Z``.

    Instances are immutable and may be shared between threads.  Use
    :func:`lattice_context` to build one.
    """

    tau: complex
    q: complex
    eta1: complex
    eta2: complex
    eta3: complex
    e1: complex
    e2: complex
    e3: complex
    g2: complex
    g3: complex
    quarter: dict
    warnings: tuple = ()
    config: Config = DEFAULT
    _frame: _Frame = field(default=None, repr=False)
    _gamma: tuple = field(default=(1, 0, 0, 1), repr=False)
    _lam: complex = field(default=1.0, repr=False)

    @property
    def e(self):
        return (self.e1, self.e2, self.e3)

    def omega(self, k: int) -> complex:
        return (1.0, self.tau, 1.0 + self.tau)[k - 1]

    def eta(self, k: int) -> complex:
        return (self.eta1, self.eta2, self.eta3)[k - 1]

    def ek(self, k: int) -> complex:
        return (self.e1, self.e2, self.e3)[k - 1]


def _map_in(z, ctx: LatticeContext):
    u = np.asarray(z, dtype=complex) / ctx._lam
    ur, m, n = ctx._frame.reduce(u)
    floor = ctx.config.pole_floor
    if np.any(np.abs(ur) * abs(ctx._lam) < floor):
        raise PoleProximityError(
            f"argument within {floor:g} of a lattice point (tau = {ctx.tau})")
    return ur, m, n


def _evaluate(z, ctx: LatticeContext):
    """zeta, wp, wp', wp'' of the lattice of ``ctx`` (arrays)."""
    ur, m, n = _map_in(z, ctx)
    fr = ctx._frame
    zeta, wp, wp1, wp2 = fr.core(ur)
    zeta = zeta + m * fr.eta1 + n * fr.eta2
    lam = ctx._lam
    return zeta / lam, wp / lam**2, wp1 / lam**3, wp2 / lam**4


@functools.lru_cache(maxsize=4096)
def lattice_context(tau: complex, config: Config = DEFAULT) -> LatticeContext:
    """Build the invariants of the lattice ``Z + tau Z``.

    The quasi-period ``eta_1`` comes from the theta constants and
    ``eta_2`` from the Legendre relation ``tau eta_1 - eta_2 = 2 pi i``.

    Parameters
    ----------
    tau : complex
        Modulus with positive imaginary part.
    config : Config
        Tolerances.
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise DomainError("tau must lie in the upper half plane")
    warnings = []
    if tau.imag < SQRT3_2:
        tau_r, gamma = reduce_tau(tau)
    else:
        tau_r, gamma = tau, (1, 0, 0, 1)
    a, b, c, d = gamma
    lam = c * tau + d
    if tau.imag < config.im_tau_floor:
        warnings.append(
            f"Im tau = {tau.imag:.3g} is below the floor {config.im_tau_floor:.3g}; "
            f"reduction multiplier |c tau + d| = {abs(lam):.3g}, expect lost digits")
    fr = _Frame(tau_r, config)
    # 1 = lam (a - c tau_r), so eta_1 transforms with (a, -c)
    eta1 = (a * fr.eta1 - c * fr.eta2) / lam
    eta2 = tau * eta1 - TWO_PI_I
    proto = LatticeContext(
        tau=tau, q=complex(np.exp(TWO_PI_I * tau)), eta1=complex(eta1),
        eta2=complex(eta2), eta3=complex(eta1 + eta2), e1=0j, e2=0j, e3=0j,
        g2=0j, g3=0j, quarter={}, warnings=tuple(warnings), config=config,
        _frame=fr, _gamma=gamma, _lam=complex(lam))
    halves = np.array([0.5, tau / 2.0, (1.0 + tau) / 2.0])
    e = _evaluate(halves, proto)[1]
    e1, e2, e3 = (complex(v) for v in e)
    g2 = -4.0 * (e1 * e2 + e1 * e3 + e2 * e3)
    g3 = 4.0 * e1 * e2 * e3
    quarters = _evaluate(halves / 2.0, proto)
    quarter = {
        k: QuarterConstants(*(complex(arr[k - 1]) for arr in quarters))
        for k in (1, 2, 3)
    }
    return LatticeContext(
        tau=tau, q=proto.q, eta1=proto.eta1, eta2=proto.eta2, eta3=proto.eta3,
        e1=e1, e2=e2, e3=e3, g2=g2, g3=g3, quarter=quarter,
        warnings=proto.warnings, config=config, _frame=fr, _gamma=gamma,
        _lam=proto._lam)


def wp_all(z, ctx: LatticeContext):
    """Return ``(wp, wp', wp'')`` at ``z`` in one pass."""
    _, wp, wp1, wp2 = _evaluate(z, ctx)
    return _as_output(wp), _as_output(wp1), _as_output(wp2)


def zeta_wp(z, ctx: LatticeContext):
    """Return ``(zeta, wp)`` at ``z`` in one pass."""
    zeta, wp, _, _ = _evaluate(z, ctx)
    return _as_output(zeta), _as_output(wp)


def wp(z, ctx: LatticeContext):
    """Weierstrass ``wp`` function.

    Raises
    ------
    PoleProximityError
        If ``z`` lies within the pole floor of a lattice point.
    """
    return _as_output(_evaluate(z, ctx)[1])


def wp_prime(z, ctx: LatticeContext):
    """First derivative of ``wp``."""
    return _as_output(_evaluate(z, ctx)[2])


def wp_second(z, ctx: LatticeContext):
    """Second derivative of ``wp``."""
    return _as_output(_evaluate(z, ctx)[3])


def zeta_w(z, ctx: LatticeContext):
    """Weierstrass zeta function, with ``zeta(z + omega_k) = zeta(z) + eta_k``."""
    return _as_output(_evaluate(z, ctx)[0])


def sigma_w(z, ctx: LatticeContext):
    """Weierstrass sigma function (entire, odd, ``sigma'(0) = 1``)."""
    lam = ctx._lam
    u = np.asarray(z, dtype=complex) / lam
    fr = ctx._frame
    ur, m, n = fr.reduce(u)
    big_eta = m * fr.eta1 + n * fr.eta2
    big_omega = m + n * fr.tau
    sign = np.where((m + n + m * n) % 2 == 0, 1.0, -1.0)
    val = sign * np.exp(big_eta * (ur + big_omega / 2.0)) * fr.sigma_reduced(ur)
    return _as_output(lam * val)


def lattice_distance(z, tau: complex) -> float:
    """Distance from ``z`` to the nearest point of ``Z + tau Z``."""
    tau = complex(tau)
    z = complex(z)
    n0 = round(z.imag / tau.imag)
    best = math.inf
    for n in (n0 - 1, n0, n0 + 1):
        w = z - n * tau
        m0 = round(w.real)
        for m in (m0 - 1, m0, m0 + 1):
            best = min(best, abs(w - m))
    return best
