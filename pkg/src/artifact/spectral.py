"""Spectral curve of the generalized Lame equation with two singular points.

The equation is ``y'' = q(z; T, E) y`` with the even elliptic potential::

    q = 2 (wp(z + w) + wp(z - w)) + T (zeta(z + w) - zeta(z - w)) - E,

where ``w = omega_k / 4``.  All quantities written ``wp``, ``wp1``, ``wp2``,
``zeta`` without an argument are the quarter-period constants at ``w``.
The variable ``x = wp(z) - wp(w)`` turns ``q`` and the even elliptic solution
``Phi_e`` into rational functions of ``x``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .config import DEFAULT, Config
from .hecke import hecke_Z_ctx, shifted_pair
from .kernel import (
    TWO_PI_I,
    LatticeContext,
    lattice_context,
    sigma_w,
    wp_all,
    zeta_wp,
)


class SpectralError(RuntimeError):
    """Raised when an algebraic reconstruction step cannot be completed."""


def other_indices(k: int):
    """The two half-period indices different from ``k``."""
    return tuple(j for j in (1, 2, 3) if j != k)


def constrained_E(T: complex, ctx: LatticeContext, k: int) -> complex:
    """Accessory parameter ``E = -T^2/4 + eta_k T / 2 + e_k``."""
    return -T * T / 4.0 + ctx.eta(k) * T / 2.0 + ctx.ek(k)


@dataclass(frozen=True)
class LameParams:
    """Parameters ``(k, T, E, tau)`` of the equation."""

    k: int
    T: complex
    E: complex
    tau: complex
    config: Config = DEFAULT

    @classmethod
    def constrained(cls, T: complex, tau: complex, k: int, config: Config = DEFAULT):
        ctx = lattice_context(complex(tau), config)
        return cls(k, complex(T), constrained_E(complex(T), ctx, k), complex(tau), config)

    @property
    def ctx(self) -> LatticeContext:
        return lattice_context(self.tau, self.config)

    @property
    def is_constrained(self) -> bool:
        E0 = constrained_E(self.T, self.ctx, self.k)
        return abs(self.E - E0) <= 1e-12 * (1.0 + abs(E0))

    def quarter_point(self) -> complex:
        return self.ctx.omega(self.k) / 4.0


def apparent_obstruction(params: LameParams) -> complex:
    """``T (T^2 - 2 eta_k T + 4 E - 4 e_k)``; the singular points are apparent iff it vanishes."""
    ctx = params.ctx
    T, E, k = params.T, params.E, params.k
    return T * (T * T - 2.0 * ctx.eta(k) * T + 4.0 * E - 4.0 * ctx.ek(k))


def potential(z, params: LameParams):
    """Evaluate ``q(z; T, E)`` directly from the Weierstrass functions."""
    ctx = params.ctx
    w = params.quarter_point()
    z = np.asarray(z, dtype=complex)
    zp, pp = zeta_wp(z + w, ctx)
    zm, pm = zeta_wp(z - w, ctx)
    out = 2.0 * (pp + pm) + params.T * (zp - zm) - params.E
    return out if np.ndim(out) else complex(out)


def potential_coeffs(params: LameParams):
    """Coefficients with ``q = a_m2 / x^2 + a_m1 / x + a_0``.

    ``a_m2 = 2 wp1^2``, ``a_m1 = 2 wp2 - wp1 T`` and ``a_0 = -E + 2 zeta T + 4 wp``.
    """
    qc = params.ctx.quarter[params.k]
    T, E = params.T, params.E
    return 2.0 * qc.wp1**2, 2.0 * qc.wp2 - qc.wp1 * T, -E + 2.0 * qc.zeta * T + 4.0 * qc.wp


def d0_general(params: LameParams) -> complex:
    """Constant term of ``Phi_e`` before ``E`` is eliminated."""
    qc = params.ctx.quarter[params.k]
    T, E = params.T, params.E
    p1sq = qc.wp1**2
    return 0.25 * (4.0 * p1sq * E + 3.0 * p1sq * T**2 - 8.0 * qc.zeta * p1sq * T
                   + 32.0 * qc.wp * p1sq - 3.0 * qc.wp2**2)


def even_coefficients(T: complex, ctx: LatticeContext, k: int):
    """``(d2, d1, d0)`` of ``Phi_e = d2 / x^2 + d1 / x + d0`` under the constraint on E."""
    qc = ctx.quarter[k]
    p1, p2 = qc.wp1, qc.wp2
    d2 = p1**4
    d1 = p1**2 * (p1 * T + p2)
    d0 = 0.25 * (2.0 * p1**2 * T**2 + 2.0 * p1 * p2 * T
                 + 4.0 * (8.0 * qc.wp + ctx.ek(k)) * p1**2 - 3.0 * p2**2)
    return d2, d1, d0


@dataclass(frozen=True)
class EvenSolution:
    """Even elliptic solution ``Phi_e`` of the third-order equation
    ``Phi''' - 4 q Phi' - 2 q' Phi = 0``."""

    d2: complex
    d1: complex
    d0: complex
    params: LameParams

    def _x(self, z):
        ctx = self.params.ctx
        p, p1, p2 = wp_all(z, ctx)
        return np.asarray(p) - ctx.quarter[self.params.k].wp, p, p1, p2

    def __call__(self, z):
        x = self._x(z)[0]
        out = self.d2 / x**2 + self.d1 / x + self.d0
        return out if np.ndim(out) else complex(out)

    def derivatives(self, z):
        """Return ``(Phi, Phi', Phi'', Phi''')`` at ``z`` by the chain rule in ``x``."""
        x, p, p1, p2 = self._x(z)
        p3 = 12.0 * p * p1
        d2, d1, d0 = self.d2, self.d1, self.d0
        f = d2 / x**2 + d1 / x + d0
        f1 = -2.0 * d2 / x**3 - d1 / x**2
        f2 = 6.0 * d2 / x**4 + 2.0 * d1 / x**3
        f3 = -24.0 * d2 / x**5 - 6.0 * d1 / x**4
        phi1 = f1 * p1
        phi2 = f2 * p1**2 + f1 * p2
        phi3 = f3 * p1**3 + 3.0 * f2 * p1 * p2 + f1 * p3
        return f, phi1, phi2, phi3


def phi_even(params: LameParams) -> EvenSolution:
    """Even elliptic solution for constrained parameters."""
    if not params.is_constrained:
        raise ValueError("phi_even needs E = -T^2/4 + eta_k T/2 + e_k")
    d2, d1, d0 = even_coefficients(params.T, params.ctx, params.k)
    return EvenSolution(d2, d1, d0, params)


def spectral_Q1(T: complex, tau: complex, k: int, config: Config = DEFAULT) -> complex:
    """Spectral polynomial as ``d0 d1 - a0 d0^2``."""
    params = LameParams.constrained(T, tau, k, config)
    _, d1, d0 = even_coefficients(params.T, params.ctx, k)
    a0 = potential_coeffs(params)[2]
    return d0 * d1 - a0 * d0**2


def spectral_Q2(T: complex, tau: complex, k: int, config: Config = DEFAULT) -> complex:
    """Spectral polynomial in factored form
    ``-(wp1^4 / 16) (T^2 - 12 e_k) (T^2 - 4 e_k + 4 e_i) (T^2 - 4 e_k + 4 e_j)``."""
    ctx = lattice_context(complex(tau), config)
    i, j = other_indices(k)
    ek = ctx.ek(k)
    T2 = complex(T) ** 2
    p1 = ctx.quarter[k].wp1
    return -(p1**4 / 16.0) * (T2 - 12.0 * ek) * (T2 - 4.0 * ek + 4.0 * ctx.ek(i)) \
        * (T2 - 4.0 * ek + 4.0 * ctx.ek(j))


def spectral_Q(T: complex, tau: complex, k: int, config: Config = DEFAULT):
    """Both evaluations ``(Q1, Q2)`` of the spectral polynomial."""
    return spectral_Q1(T, tau, k, config), spectral_Q2(T, tau, k, config)


def spectral_Q_at_zero(tau: complex, k: int, config: Config = DEFAULT) -> complex:
    """Closed form ``Q(0) = 12 wp1^4 e_k (e_i - e_k)(e_j - e_k)``."""
    ctx = lattice_context(complex(tau), config)
    i, j = other_indices(k)
    ek = ctx.ek(k)
    return 12.0 * ctx.quarter[k].wp1 ** 4 * ek * (ctx.ek(i) - ek) * (ctx.ek(j) - ek)


def wronskian_invariant(phi: EvenSolution, z) -> complex:
    """``Phi Phi''/2 - Phi'^2/4 - q Phi^2``, constant in ``z`` and equal to Q(T)."""
    f, f1, f2, _ = phi.derivatives(z)
    qv = potential(z, phi.params)
    out = 0.5 * f * f2 - 0.25 * f1**2 - qv * f**2
    return out if np.ndim(out) else complex(out)


# -- inversion of wp ---------------------------------------------------------

def _cell_grid(ctx: LatticeContext, n: int = 16):
    a = (np.arange(n) + 0.5) / n
    A, B = np.meshgrid(a, a)
    return (A + B * ctx.tau).ravel()


def invert_wp(w: complex, w1: complex | None, ctx: LatticeContext,
              maxiter: int = 60) -> complex:
    """Find ``u`` with ``wp(u) = w`` and, when ``w1`` is given, ``wp'(u) = w1``.

    Newton's method on ``wp(u) - w`` is started from the best points of a
    grid on the period cell and from the small-argument guess ``w**-1/2``.
    The sign of ``u`` is then chosen to match ``w1``.
    """
    w = complex(w)
    grid = _cell_grid(ctx)
    vals = np.asarray(wp_all(grid, ctx)[0])
    order = np.argsort(np.abs(vals - w))
    seeds = list(grid[order[:4]])
    if w != 0:
        seeds.insert(0, 1.0 / cmath.sqrt(w))
    best = None
    for u in seeds:
        try:
            for _ in range(maxiter):
                p, p1, _ = wp_all(u, ctx)
                if p1 == 0:
                    break
                step = (p - w) / p1
                u = u - step
                if abs(step) < 1e-15 * (1.0 + abs(u)):
                    break
            p, p1, _ = wp_all(u, ctx)
        except (ValueError, FloatingPointError, ZeroDivisionError):
            continue
        err = abs(p - w) / (1.0 + abs(w))
        if best is None or err < best[0]:
            best = (err, u, p1)
        if err < 1e-13:
            break
    if best is None or best[0] > 1e-9:
        raise SpectralError(f"could not invert wp at {w}")
    _, u, p1 = best
    if w1 is not None and abs(p1 + w1) < abs(p1 - w1):
        u = -u
    return complex(u)


def pair_from_sigma_kappa(sigma: complex, kappa: complex, ctx: LatticeContext):
    """Solve ``sigma = r + s tau`` and ``kappa = zeta(sigma) - r eta_1 - s eta_2``.

    By the Legendre relation ``s = (kappa - zeta(sigma) + sigma eta_1) / (2 pi i)``.
    """
    zeta, _ = zeta_wp(sigma, ctx)
    s = (kappa - zeta + sigma * ctx.eta1) / TWO_PI_I
    r = sigma - s * ctx.tau
    return complex(r), complex(s)


# -- spectral points and monodromy data ---------------------------------------

@dataclass(frozen=True)
class SpectralPoint:
    """Point ``P = (T, C)`` on the curve ``C^2 = Q(T)``."""

    T: complex
    C: complex
    tau: complex
    k: int
    config: Config = DEFAULT

    @classmethod
    def from_T(cls, T: complex, tau: complex, k: int, branch: int = 1,
               config: Config = DEFAULT):
        Q = spectral_Q2(T, tau, k, config)
        return cls(complex(T), branch * cmath.sqrt(Q), complex(tau), k, config)

    def dual(self) -> "SpectralPoint":
        return SpectralPoint(self.T, -self.C, self.tau, self.k, self.config)

    @property
    def params(self) -> LameParams:
        return LameParams.constrained(self.T, self.tau, self.k, self.config)

    def curve_residual(self) -> float:
        Q = spectral_Q2(self.T, self.tau, self.k, self.config)
        return abs(self.C**2 - Q) / (1.0 + abs(Q))


@dataclass(frozen=True)
class MonodromyData:
    """Output of the reconstruction ``T -> (wp(sigma), wp'(sigma), kappa) -> (r, s)``."""

    wp_sigma: complex
    wp1_sigma: complex
    kappa: complex
    sigma: complex
    r: complex
    s: complex
    sqrt_minus_Q: complex


def monodromy_data_from_point(P: SpectralPoint) -> MonodromyData:
    """Monodromy data of a point with ``T^2 != 12 e_k`` and ``Q(T) != 0``.

    With ``S = sqrt(-Q) = -i C``, the branch for which ``psi(P)`` has
    logarithmic derivative ``(i C + Phi_e'/2) / Phi_e``::

        wp(sigma)  = e_k + (12 e_k^2 - g2) / (T^2 - 12 e_k)
        wp'(sigma) = -4 (12 e_k^2 - g2) S / (wp1^2 (T^2 - 12 e_k)^2)
        kappa      = 2 S / (wp1^2 (T^2 - 12 e_k))
    """
    ctx = lattice_context(P.tau, P.config)
    k = P.k
    ek = ctx.ek(k)
    p1 = ctx.quarter[k].wp1
    T2 = P.T * P.T
    denom = T2 - 12.0 * ek
    if abs(denom) < 1e-12 * (1.0 + abs(ek)):
        raise SpectralError("T^2 = 12 e_k: data (r, s) = (0, 0), not completely reducible")
    c12 = 12.0 * ek * ek - ctx.g2
    S = -1j * P.C
    wps = ek + c12 / denom
    wp1s = -4.0 * c12 * S / (p1**2 * denom**2)
    kappa = 2.0 * S / (p1**2 * denom)
    # consistency of (wp, wp') with the cubic
    cubic = 4.0 * (wps - ctx.e1) * (wps - ctx.e2) * (wps - ctx.e3)
    if abs(wp1s**2 - cubic) > 1e-7 * (1.0 + abs(cubic)):
        raise SpectralError("reconstructed wp'(sigma) is inconsistent with wp(sigma)")
    sigma = invert_wp(wps, wp1s, ctx)
    r, s = pair_from_sigma_kappa(sigma, kappa, ctx)
    return MonodromyData(complex(wps), complex(wp1s), complex(kappa), sigma, r, s, complex(S))


def monodromy_data_from_T(T: complex, tau: complex, k: int, branch: int = 1,
                          config: Config = DEFAULT) -> MonodromyData:
    """Monodromy data for ``P = (T, branch * sqrt(Q(T)))``."""
    return monodromy_data_from_point(SpectralPoint.from_T(T, tau, k, branch, config))


@dataclass(frozen=True)
class TSolution:
    """Spectral points whose monodromy data is a prescribed pair ``(r, s)``.

    ``points`` holds ``(T, C)`` and ``(-T, C')``; both carry the same data.
    """

    T2: complex
    points: tuple
    shifted_residual: float


def solve_T_from_rs(r, s, tau: complex, k: int, tol: float | None = None,
                    config: Config = DEFAULT) -> TSolution | None:
    """Find ``T`` with monodromy data ``(r, s)``, or None when ``Z(r_k, s_k, tau) != 0``.

    ``T^2 = 12 e_k + (12 e_k^2 - g2) / (wp(sigma) - e_k)`` with
    ``sigma = r + s tau``; ``C`` is fixed by
    ``wp'(sigma) = 4 (12 e_k^2 - g2) i C / (wp1^2 (T^2 - 12 e_k)^2)``.
    """
    ctx = lattice_context(complex(tau), config)
    tol = config.zero_tol if tol is None else tol
    ek = ctx.ek(k)
    sigma = r + s * ctx.tau
    p, p1, _ = wp_all(sigma, ctx)
    if abs(p - ek) < 1e-12 * (1.0 + abs(ek)):
        raise SpectralError("sigma is the half period omega_k / 2")
    rk, sk = shifted_pair(r, s, k)
    zk = hecke_Z_ctx(rk, sk, ctx)
    Z = hecke_Z_ctx(r, s, ctx)
    scale = 1.0 + abs(Z) + abs(p1 / (p - ek))
    if abs(zk) > tol * scale:
        return None
    c12 = 12.0 * ek * ek - ctx.g2
    T2 = 12.0 * ek + c12 / (p - ek)
    denom = T2 - 12.0 * ek
    pq1 = ctx.quarter[k].wp1
    S = -p1 * pq1**2 * denom**2 / (4.0 * c12)
    C = 1j * S
    T = cmath.sqrt(T2)
    pts = (SpectralPoint(T, C, ctx.tau, k, config), SpectralPoint(-T, C, ctx.tau, k, config))
    return TSolution(complex(T2), pts, float(abs(zk)))


# -- Baker-Akhiezer function ---------------------------------------------------

@dataclass(frozen=True)
class BakerAkhiezerData:
    """Zeros ``a1, a2``, rate ``c`` and multipliers of the Baker-Akhiezer function

    ``psi(z) = exp(c z) sigma(z - a1) sigma(z - a2) / (sigma(z - w) sigma(z + w))``
    with ``w = omega_k / 4``.
    """

    a1: complex
    a2: complex
    c: complex
    lambda1: complex
    lambda2: complex
    r: complex
    s: complex
    point: SpectralPoint = field(repr=False)


def zeros_a1a2(P: SpectralPoint) -> BakerAkhiezerData:
    """Reconstruct the zeros of the Baker-Akhiezer function from ``(T, C)``.

    ``wp(a1) + wp(a2) = (2 wp d0 - d1) / d0`` and
    ``wp(a1) wp(a2) = (wp^2 d0 - wp d1 + d2) / d0``; the signs of ``a_i``
    follow from ``wp'(a1) = -2 S (wp - wp(a1))^2 / (d0 (wp(a1) - wp(a2)))``
    and the same with the roles exchanged, ``S = -i C``.  The rate is
    ``c = T/2 + eta_k/2 + zeta(a1 - w) + zeta(a2 - w)``.
    """
    ctx = lattice_context(P.tau, P.config)
    k = P.k
    qc = ctx.quarter[k]
    d2, d1, d0 = even_coefficients(P.T, ctx, k)
    if abs(d0) < 1e-12 * (abs(d1) + abs(d2)):
        raise SpectralError("d0(T) = 0: the zeros of Phi_e are not given by the quotient form")
    wq = qc.wp
    ssum = (2.0 * wq * d0 - d1) / d0
    sprod = (wq * wq * d0 - wq * d1 + d2) / d0
    disc = cmath.sqrt(ssum * ssum - 4.0 * sprod)
    pa1 = (ssum + disc) / 2.0
    pa2 = (ssum - disc) / 2.0
    if abs(pa1 - pa2) < 1e-10 * (1.0 + abs(pa1)):
        raise SpectralError("wp(a1) = wp(a2): degenerate configuration")
    S = -1j * P.C
    pp1 = -2.0 * S * (wq - pa1) ** 2 / (d0 * (pa1 - pa2))
    pp2 = 2.0 * S * (wq - pa2) ** 2 / (d0 * (pa1 - pa2))
    a1 = invert_wp(pa1, pp1, ctx)
    a2 = invert_wp(pa2, pp2, ctx)
    w = ctx.omega(k) / 4.0
    zeta1, _ = zeta_wp(a1 - w, ctx)
    zeta2, _ = zeta_wp(a2 - w, ctx)
    c = P.T / 2.0 + ctx.eta(k) / 2.0 + zeta1 + zeta2
    total = a1 + a2
    s = (ctx.eta1 * total - c) / TWO_PI_I
    r = total - s * ctx.tau
    lam1 = cmath.exp(-TWO_PI_I * s)
    lam2 = cmath.exp(TWO_PI_I * r)
    return BakerAkhiezerData(a1, a2, complex(c), lam1, lam2, complex(r), complex(s), P)


def baker_akhiezer_eval(data: BakerAkhiezerData, z, normalize_at: complex | None = None):
    """Evaluate ``psi(P; z)`` by the sigma quotient, optionally scaled to 1 at a base point."""
    P = data.point
    ctx = lattice_context(P.tau, P.config)
    w = ctx.omega(P.k) / 4.0
    z = np.asarray(z, dtype=complex)

    def raw(u):
        return (np.exp(data.c * u) * sigma_w(u - data.a1, ctx) * sigma_w(u - data.a2, ctx)
                / (sigma_w(u - w, ctx) * sigma_w(u + w, ctx)))

    out = raw(z)
    if normalize_at is not None:
        out = out / raw(complex(normalize_at))
    return out if np.ndim(out) else complex(out)


def log_derivative(P: SpectralPoint, z):
    """``phi(P; z) = (i C + Phi_e'/2) / Phi_e``, the logarithmic derivative of psi."""
    phi = phi_even(P.params)
    f, f1, _, _ = phi.derivatives(z)
    out = (1j * P.C + 0.5 * f1) / f
    return out if np.ndim(out) else complex(out)


def ba_wronskian(P: SpectralPoint, z, z0: complex):
    """``W(f, g) = f' g - f g'`` of ``f = psi(P; z)`` and ``g = psi(P*; z)``,
    both normalized to 1 at ``z0``.

    Derivatives come from the logarithmic derivatives, so the value is
    independent of finite differencing.  It should equal ``2 i C / Phi_e(z0)``.
    """
    f = baker_akhiezer_eval(zeros_a1a2(P), z, z0)
    g = baker_akhiezer_eval(zeros_a1a2(P.dual()), z, z0)
    out = f * g * (log_derivative(P, z) - log_derivative(P.dual(), z))
    return out if np.ndim(out) else complex(out)


class MonodromyTag(str, Enum):
    COMPLETELY_REDUCIBLE = "completely_reducible"
    NOT_COMPLETELY_REDUCIBLE = "not_completely_reducible"


@dataclass(frozen=True)
class MonodromyClass:
    """Completely reducible with data ``(r, s)``, or not completely reducible.

    In the second case ``(r, s)`` is the degenerate limit in one half of
    ``Z^2`` when known; the data ``D`` of the normal form is not computed.
    """

    tag: MonodromyTag
    r: complex | None = None
    s: complex | None = None
    Q: complex = 0j


def classify_point(P: SpectralPoint, tol: float | None = None) -> MonodromyClass:
    """Completely reducible iff ``Q(T) != 0``."""
    tol = P.config.zero_tol if tol is None else tol
    ctx = lattice_context(P.tau, P.config)
    k = P.k
    Q = spectral_Q2(P.T, P.tau, k, P.config)
    ek = ctx.ek(k)
    T2 = P.T * P.T
    i, j = other_indices(k)
    roots = {12.0 * ek: (0.0, 0.0)}
    for m in (i, j):
        roots[4.0 * ek - 4.0 * ctx.ek(m)] = _half_pair(m)
    scale = max(abs(x) for x in roots)
    for root, pair in roots.items():
        if abs(T2 - root) <= tol * scale:
            return MonodromyClass(MonodromyTag.NOT_COMPLETELY_REDUCIBLE, *pair, Q=Q)
    data = monodromy_data_from_point(P)
    return MonodromyClass(MonodromyTag.COMPLETELY_REDUCIBLE, data.r, data.s, Q=Q)


def _half_pair(j: int):
    return {1: (0.5, 0.0), 2: (0.0, 0.5), 3: (0.5, 0.5)}[j]
