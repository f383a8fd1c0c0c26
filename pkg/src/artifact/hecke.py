"""Hecke form Z(r, s, tau), pre-modular forms and Green-function derivatives.

``Z(r, s, tau) = zeta(r + s tau) - r eta_1 - s eta_2``.  For real ``(r, s)``
it equals ``-4 pi dG/dz`` of the Green function of the torus at
``z = r + s tau`` and is a weight-one modular form in ``tau``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Config
from .kernel import (
    PI,
    SQRT3_2,
    TWO_PI_I,
    LatticeContext,
    PoleProximityError,
    lattice_context,
    reduce_tau,
    wp_all,
    zeta_wp,
)

# m_k = (m0, m1, m2, m3) and the shift (r_k, s_k) - (r, s)
M_K = {1: (1, 1, 0, 0), 2: (1, 0, 1, 0), 3: (1, 0, 0, 1)}
SHIFT = {1: (0.5, 0.0), 2: (0.0, 0.5), 3: (0.5, 0.5)}
# tau lies in lambda_k F0 - beta_k when (tau + beta_k) / lambda_k lies in F0
LAMBDA_BETA = {1: (0.5, 0.0), 2: (2.0, 0.0), 3: (2.0, 1.0)}


def shifted_pair(r, s, k: int):
    """Return ``(r_k, s_k)``: the pair translated by the half period of index k."""
    dr, ds = SHIFT[k]
    return r + dr, s + ds


def tau_k(tau: complex, k: int) -> complex:
    """Modulus ``2 tau``, ``tau / 2`` or ``(1 + tau) / 2`` for k = 1, 2, 3."""
    if k == 1:
        return 2.0 * tau
    if k == 2:
        return tau / 2.0
    if k == 3:
        return (1.0 + tau) / 2.0
    raise ValueError("k must be 1, 2 or 3")


@dataclass(frozen=True)
class GammaMatrix:
    """Element ``[[a, b], [c, d]]`` of SL(2, Z)."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self.as_tuple()} is not 1")

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)

    def inverse(self) -> "GammaMatrix":
        return GammaMatrix(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "GammaMatrix") -> "GammaMatrix":
        a, b, c, d = self.as_tuple()
        e, f, g, h = other.as_tuple()
        return GammaMatrix(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def act(self, tau):
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def factor(self, tau):
        return self.c * tau + self.d

    def act_pair(self, r, s):
        """Image ``(r', s')`` of a pair, from ``(s', r') = (s, r) gamma^{-1}``."""
        return self.a * r - self.b * s, self.d * s - self.c * r


IDENTITY = GammaMatrix(1, 0, 0, 1)


def modular_transform(r, s, tau, gamma: GammaMatrix):
    """Move ``(r, s, tau)`` by ``gamma``.

    Returns
    -------
    r_new, s_new, tau_new, factor
        With ``Z(r_new, s_new, tau_new) = factor * Z(r, s, tau)`` and
        ``factor = c tau + d``.
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError("tau must lie in the upper half plane")
    r_new, s_new = gamma.act_pair(r, s)
    return r_new, s_new, gamma.act(tau), gamma.factor(tau)


def reducing_gamma(tau: complex) -> GammaMatrix:
    """SL(2, Z) element taking ``tau`` to the standard fundamental domain."""
    return GammaMatrix(*reduce_tau(tau)[1])


def _is_real(x) -> bool:
    return np.isrealobj(x) or abs(np.imag(x)) == 0.0


def _z_qseries(r: float, s: float, tau, derivative: bool = False, tol: float = 1e-17):
    """q-expansion of Z for real r and 0 <= s < 1, vectorised over ``tau``.

    With ``x = exp(2 pi i z)`` and ``q = exp(2 pi i tau)``::

        Z = 2 pi i s - pi i (1 + x) / (1 - x)
            - 2 pi i sum_n [x q^n / (1 - x q^n) - x^{-1} q^n / (1 - x^{-1} q^n)]

    When ``derivative`` is true the tau-derivative is returned as well.
    """
    with np.errstate(all="ignore"):
        # far-out Newton iterates overflow to nan, which the callers reject
        return _z_qseries_raw(r, s, tau, derivative, tol)


def _z_qseries_raw(r, s, tau, derivative, tol):
    tau = np.asarray(tau, dtype=complex)
    z = r + s * tau
    arg = TWO_PI_I * z
    x = np.exp(arg)
    one_minus_x = -np.expm1(arg)
    q = np.exp(TWO_PI_I * tau)
    qmax = float(np.max(np.abs(q)))
    # the x^{-1} q^n terms decay like |q|^(n - s)
    nterms = 2 + int(math.ceil(math.log(tol) / math.log(qmax))) if qmax > 0 else 1
    n = np.arange(1, nterms + 1, dtype=float)
    qn = q[..., None] ** n
    w_plus = x[..., None] * qn
    w_minus = qn / x[..., None]
    val = 2j * PI * s - 1j * PI * (1.0 + x) / one_minus_x
    val = val - TWO_PI_I * np.sum(w_plus / (1.0 - w_plus) - w_minus / (1.0 - w_minus), axis=-1)
    if not derivative:
        return val
    dval = 4.0 * PI**2 * s * x / one_minus_x**2
    dval = dval + 4.0 * PI**2 * np.sum(
        (n + s) * w_plus / (1.0 - w_plus) ** 2 - (n - s) * w_minus / (1.0 - w_minus) ** 2,
        axis=-1)
    return val, dval


def _reduce_pair(r: float, s: float):
    return r - math.floor(r), s - math.floor(s)


def _check_off_lattice(r, s, tau, config: Config):
    rr = r - round(r)
    ss = s - round(s)
    if abs(rr + ss * tau) < config.pole_floor:
        raise PoleProximityError(f"(r, s) = ({r}, {s}) is a lattice point")


def hecke_Z_real(r: float, s: float, tau: complex, derivative: bool = False,
                 config: Config = DEFAULT):
    """Hecke form for real ``(r, s)`` via the q-expansion.

    The modulus is moved into the standard fundamental domain first, the
    pair is transported along and reduced modulo Z^2, and the weight-one
    factor is divided out.  With ``derivative`` the tau-derivative is also
    returned.
    """
    tau = complex(tau)
    r = float(r)
    s = float(s)
    _check_off_lattice(r, s, tau, config)
    if tau.imag < SQRT3_2:
        g = reducing_gamma(tau)
    else:
        g = IDENTITY
    r1, s1 = g.act_pair(r, s)
    r1, s1 = _reduce_pair(r1, s1)
    tau1 = g.act(tau)
    lam = g.factor(tau)
    if derivative:
        val, dval = _z_qseries(r1, s1, tau1, derivative=True)
        val = complex(val)
        dval = complex(dval)
        return val / lam, dval / lam**3 - g.c * val / lam**2
    return complex(_z_qseries(r1, s1, tau1)) / lam


def hecke_Z_zeta(r, s, tau: complex, config: Config = DEFAULT) -> complex:
    """Hecke form straight from its definition with the zeta function."""
    ctx = lattice_context(complex(tau), config)
    return hecke_Z_ctx(r, s, ctx)


def hecke_Z_ctx(r, s, ctx: LatticeContext) -> complex:
    z = r + s * ctx.tau
    zeta, _ = zeta_wp(z, ctx)
    return complex(zeta - r * ctx.eta1 - s * ctx.eta2)


def hecke_Z(r, s, tau: complex, config: Config = DEFAULT) -> complex:
    """Hecke form ``Z(r, s, tau) = zeta(r + s tau) - r eta_1 - s eta_2``.

    Real pairs use the q-expansion; complex pairs use the zeta function.

    Raises
    ------
    PoleProximityError
        If ``(r, s)`` is in Z^2.
    """
    if _is_real(r) and _is_real(s):
        return hecke_Z_real(float(np.real(r)), float(np.real(s)), tau, config=config)
    return hecke_Z_zeta(r, s, tau, config)


def hecke_Z_grid(r: float, s: float, taus) -> np.ndarray:
    """Vectorised q-expansion of ``Z(r, s, .)`` over moduli with ``Im tau >= 0.05``.

    Intended for coarse scans, where no modular reduction is applied.
    """
    r, s = _reduce_pair(float(r), float(s))
    return _z_qseries(r, s, np.asarray(taus, dtype=complex), tol=1e-16)


def premodular_Zmk(r, s, tau: complex, k: int, config: Config = DEFAULT) -> complex:
    """Pre-modular form ``Z^2 - wp(r + s tau) + e_k``."""
    ctx = lattice_context(complex(tau), config)
    z = r + s * ctx.tau
    zeta, wp = zeta_wp(z, ctx)
    zz = zeta - r * ctx.eta1 - s * ctx.eta2
    return complex(zz * zz - wp + ctx.ek(k))


def premodular_Zn000(r, s, tau: complex, n: int, config: Config = DEFAULT) -> complex:
    """Pre-modular forms of type ``(n, 0, 0, 0)`` for n = 1, 2, 3."""
    ctx = lattice_context(complex(tau), config)
    z = r + s * ctx.tau
    zeta, _ = zeta_wp(z, ctx)
    p, p1, _ = wp_all(z, ctx)
    Z = zeta - r * ctx.eta1 - s * ctx.eta2
    if n == 1:
        return complex(Z)
    if n == 2:
        return complex(Z**3 - 3.0 * p * Z - p1)
    if n == 3:
        return complex(Z**6 - 15.0 * p * Z**4 - 20.0 * p1 * Z**3
                       + (27.0 * ctx.g2 / 4.0 - 45.0 * p**2) * Z**2
                       - 12.0 * p * p1 * Z - 1.25 * p1**2)
    raise ValueError("n must be 1, 2 or 3")


def translation_identity(r, s, tau: complex, direction: str = "s",
                         config: Config = DEFAULT) -> complex:
    """Residual of the half-period translation law of Z.

    For ``direction='s'`` returns
    ``Z(r, s + 1/2) - Z(r, s) - wp'(z) / (2 (wp(z) - e_2))`` and for ``'r'``
    the analogue with ``r + 1/2`` and ``e_1``; ``z = r + s tau``.
    """
    ctx = lattice_context(complex(tau), config)
    if direction == "s":
        r2, s2, e = r, s + 0.5, ctx.e2
    elif direction == "r":
        r2, s2, e = r + 0.5, s, ctx.e1
    else:
        raise ValueError("direction must be 'r' or 's'")
    z = r + s * ctx.tau
    p, p1, _ = wp_all(z, ctx)
    return hecke_Z_ctx(r2, s2, ctx) - hecke_Z_ctx(r, s, ctx) - p1 / (2.0 * (p - e))


def pair_of_point(z: complex, tau: complex):
    """Real coordinates ``(r, s)`` with ``z = r + s tau``."""
    z = complex(z)
    tau = complex(tau)
    s = z.imag / tau.imag
    return z.real - s * tau.real, s


def green_gradient(z: complex, ctx: LatticeContext) -> complex:
    """``-4 pi dG/dz`` of the torus Green function, which equals ``Z(r, s, tau)``."""
    r, s = pair_of_point(z, ctx.tau)
    return hecke_Z_ctx(r, s, ctx)


def green_hessian_degeneracy(i: int, tau: complex, config: Config = DEFAULT) -> float:
    """Positive multiple of ``det D^2 G`` at the half period ``omega_i / 2``.

    From ``Z = zeta(z) - eta_1 z + pi (z - conj z) / Im tau`` one gets
    ``dZ/dz = -wp - eta_1 + pi / Im tau`` and ``dZ/dzbar = -pi / Im tau``;
    the determinant is ``(pi/Im tau)^2 - |e_i + eta_1 - pi/Im tau|^2`` up to
    the factor ``1 / (4 pi^2)``.  It is negative at a saddle and vanishes on
    the degeneracy curve.
    """
    ctx = lattice_context(complex(tau), config)
    y = ctx.tau.imag
    a = PI / y
    return a * a - abs(ctx.ek(i) + ctx.eta1 - a) ** 2


def _parity_index(x: int, y: int) -> int:
    # half period (y + x tau) / 2 modulo the lattice
    x, y = x % 2, y % 2
    if (x, y) == (0, 1):
        return 1
    if (x, y) == (1, 0):
        return 2
    if (x, y) == (1, 1):
        return 3
    raise ValueError("both entries even: not a column of an SL(2, Z) matrix")


def half_period_permutation(gamma: GammaMatrix) -> dict:
    """Map ``j -> k`` with ``e_j(gamma tau) = (c tau + d)^2 e_k(tau)``."""
    a, b, c, d = gamma.as_tuple()
    return {1: _parity_index(c, d), 2: _parity_index(a, b), 3: _parity_index(a + c, b + d)}


def premodular_index_after(gamma: GammaMatrix, k: int) -> int:
    """Index ``k'`` with ``Z^(m_k')(r', s', tau') = (c tau + d)^2 Z^(m_k)(r, s, tau)``."""
    perm = half_period_permutation(gamma)
    for j, kk in perm.items():
        if kk == k:
            return j
    raise AssertionError("parity table is not a permutation")
