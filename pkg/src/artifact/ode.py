"""Direct checks on ``y'' = q(z; T, E) y``: local Frobenius series and cycle monodromy.

These routines do not use the spectral curve; they only evaluate the
potential and integrate, so they serve as an independent check of the
algebraic layer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .spectral import LameParams, MonodromyTag, potential

CLEARANCE = 0.08


@dataclass(frozen=True)
class FrobeniusReport:
    """Local series ``y = sum c_n t^(n-1)`` at a singular point, ``t = z - z_s``."""

    singularity: complex
    obstruction: complex
    coefficients: tuple
    laurent: tuple


def laurent_coefficients(f, center: complex, radius: float, jmin: int, jmax: int,
                         n: int = 128):
    """Coefficients ``b_j`` of ``f(center + t) = sum b_j t^j`` for ``jmin <= j <= jmax``.

    Trapezoidal rule on the circle ``|t| = radius``, computed with one FFT.
    """
    theta = 2 * math.pi * np.arange(n) / n
    t = radius * np.exp(1j * theta)
    vals = np.asarray(f(center + t), dtype=complex)
    c = np.fft.fft(vals) / n
    out = {}
    for j in range(jmin, jmax + 1):
        out[j] = c[j % n] / radius**j
    return out


def frobenius_at(params: LameParams, singularity: complex, m_max: int = 6) -> FrobeniusReport:
    """Recursion for the exponent ``-1`` series at a double pole of ``q``.

    With ``q = sum_j b_j t^j`` (``b_{-2} = 2``) the coefficients obey
    ``n (n - 3) c_n = sum_{m < n} b_{n-2-m} c_m``; at ``n = 3`` the left side
    vanishes and the right side is the obstruction to a log-free solution.
    """
    ctx = params.ctx
    w = params.quarter_point()
    pts = [2 * w, w, -w]
    # distance to the nearest other pole of q
    d = min(abs(singularity - p - m - n * ctx.tau)
            for p in pts for m in (-1, 0, 1) for n in (-1, 0, 1)
            if abs(singularity - p - m - n * ctx.tau) > 1e-9)
    d = min(d, min(abs(2 * w - m - n * ctx.tau) for m in (-1, 0, 1) for n in (-1, 0, 1)
                   if abs(2 * w - m - n * ctx.tau) > 1e-9))
    b = laurent_coefficients(lambda z: potential(z, params), singularity, 0.3 * d,
                             -2, m_max)
    c = [1.0 + 0j]
    obstruction = 0j
    for n in range(1, m_max + 1):
        rhs = sum(b[n - 2 - m] * c[m] for m in range(n))
        if n == 3:
            obstruction = rhs
            c.append(0j)
        else:
            c.append(rhs / (n * (n - 3)))
    return FrobeniusReport(complex(singularity), complex(obstruction),
                           tuple(complex(x) for x in c), tuple(complex(b[j]) for j in sorted(b)))


def frobenius_apparent(params: LameParams, m_max: int = 6):
    """Frobenius reports at the two singular points ``+w`` and ``-w``."""
    w = params.quarter_point()
    return [frobenius_at(params, w, m_max), frobenius_at(params, -w, m_max)]


# -- paths ------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """Straight piece ``a -> b``."""

    a: complex
    b: complex

    def point(self, t):
        return self.a + t * (self.b - self.a)

    def velocity(self, t):
        return self.b - self.a


@dataclass(frozen=True)
class Arc:
    """Circular piece around ``center`` from angle ``th0`` to ``th1``."""

    center: complex
    radius: float
    th0: float
    th1: float

    def point(self, t):
        return self.center + self.radius * np.exp(1j * (self.th0 + t * (self.th1 - self.th0)))

    def velocity(self, t):
        th = self.th0 + t * (self.th1 - self.th0)
        return 1j * self.radius * (self.th1 - self.th0) * np.exp(1j * th)


def singular_points(params: LameParams, span: int = 2):
    """Poles of ``q`` near the fundamental cell: ``+-w`` translated by the lattice."""
    w = params.quarter_point()
    tau = params.ctx.tau
    return [sgn * w + m + n * tau for sgn in (1, -1)
            for m in range(-span, span + 1) for n in range(-span, span + 1)]


def plan_path(a: complex, b: complex, singular, radius: float, clearance: float = CLEARANCE,
              side: int = 1):
    """Straight path ``a -> b`` with semicircular detours around close singular points.

    ``side = +1`` runs each detour counterclockwise about its singular point,
    ``-1`` clockwise.  The detour radius is ``max(radius, clearance)``.
    """
    rad = max(radius, clearance)
    u = (b - a) / abs(b - a)
    L = abs(b - a)
    hits = []
    for p in singular:
        t = ((p - a) * u.conjugate()).real
        dist = abs(((p - a) * u.conjugate()).imag)
        if -rad < t < L + rad and dist < clearance:
            hits.append((t, p))
    hits.sort(key=lambda h: h[0])
    pieces = []
    cur = a
    for t, p in hits:
        # leave the line a distance rad before the projection of p, come back after
        h = math.sqrt(max(rad**2 - abs(((p - a) * u.conjugate()).imag) ** 2, 0.0))
        enter = a + (t - h) * u
        leave = a + (t + h) * u
        if abs(enter - a) > 1e-12 and abs(enter - cur) > 1e-14:
            pieces.append(Segment(cur, enter))
        th0 = np.angle(enter - p)
        th1 = np.angle(leave - p)
        delta = (th1 - th0) % (2 * math.pi)
        pieces.append(Arc(p, rad, th0, th0 + delta if side > 0 else th0 + delta - 2 * math.pi))
        cur = leave
    if abs(b - cur) > 1e-14:
        pieces.append(Segment(cur, b))
    return pieces


def _rhs_factory(params: LameParams, piece):
    def rhs(t, Y):
        z = piece.point(t)
        v = piece.velocity(t)
        y = Y[0:4:2] + 1j * Y[1:4:2]
        p = Y[4:8:2] + 1j * Y[5:8:2]
        qv = potential(z, params)
        dy = v * p
        dp = v * qv * y
        out = np.empty(8)
        out[0:4:2], out[1:4:2] = dy.real, dy.imag
        out[4:8:2], out[5:8:2] = dp.real, dp.imag
        return out
    return rhs


def transport(params: LameParams, pieces, Y0: np.ndarray, rtol: float | None = None):
    """Transport the fundamental matrix ``[[y1, y2], [y1', y2']]`` along a path."""
    rtol = params.config.ode_rtol if rtol is None else rtol
    Y = np.asarray(Y0, dtype=complex)
    for piece in pieces:
        state = np.empty(8)
        y, p = Y[0], Y[1]
        state[0:4:2], state[1:4:2] = y.real, y.imag
        state[4:8:2], state[5:8:2] = p.real, p.imag
        sol = solve_ivp(_rhs_factory(params, piece), (0.0, 1.0), state, method="DOP853",
                        rtol=rtol, atol=rtol * 1e-3)
        if not sol.success:
            raise RuntimeError(f"integration failed: {sol.message}")
        s = sol.y[:, -1]
        Y = np.array([s[0:4:2] + 1j * s[1:4:2], s[4:8:2] + 1j * s[5:8:2]])
    return Y


@dataclass(frozen=True)
class CycleMonodromy:
    """Monodromy matrices along ``z -> z + 1`` and ``z -> z + tau``.

    With the solution vector ``Y = (y1, y2)^T``, ``Y(z + omega_j) = M_j Y(z)``.
    """

    M1: np.ndarray
    M2: np.ndarray
    base: complex

    @property
    def t1(self) -> complex:
        return complex(np.trace(self.M1))

    @property
    def t2(self) -> complex:
        return complex(np.trace(self.M2))

    @property
    def commutator(self) -> float:
        return float(np.linalg.norm(self.M1 @ self.M2 - self.M2 @ self.M1))

    @property
    def dets(self):
        return complex(np.linalg.det(self.M1)), complex(np.linalg.det(self.M2))


def default_base(tau: complex) -> complex:
    return 0.31 + 0.43 * complex(tau)


def cycle_matrix(params: LameParams, base: complex, period: complex, basis=None,
                 side: int = 1, via: complex | None = None) -> np.ndarray:
    """Monodromy matrix of the cycle ``base -> base + period``.

    ``basis`` is the fundamental matrix at ``base`` (identity by default).
    ``via`` inserts an intermediate point, giving a different path in the
    same homotopy class when no singular point is enclosed.
    """
    tau = params.ctx.tau
    radius = 0.05 * min(1.0, abs(tau))
    sing = singular_points(params)
    ends = [base, via, base + period] if via is not None else [base, base + period]
    pieces = []
    for a, b in zip(ends[:-1], ends[1:]):
        pieces += plan_path(a, b, sing, radius, side=side)
    Y0 = np.eye(2, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    Y1 = transport(params, pieces, Y0)
    # columns of Y are the solutions; Y(z + w) = Y(z) N, so M = N^T
    N = np.linalg.solve(Y0, Y1)
    return N.T


def integrate_monodromy(params: LameParams, base: complex | None = None, basis=None,
                        side: int = 1) -> CycleMonodromy:
    """Monodromy along both fundamental cycles from a common base point."""
    tau = params.ctx.tau
    base = default_base(tau) if base is None else complex(base)
    M1 = cycle_matrix(params, base, 1.0, basis, side)
    M2 = cycle_matrix(params, base, tau, basis, side)
    return CycleMonodromy(M1, M2, base)


def local_monodromy(params: LameParams, singularity: complex, radius: float = 0.05) -> np.ndarray:
    """Monodromy of a small positive loop around a singular point."""
    arc = Arc(complex(singularity), radius, 0.0, 2 * math.pi)
    Y1 = transport(params, [arc], np.eye(2, dtype=complex))
    return Y1.T


@dataclass(frozen=True)
class UnitaryVerdict:
    unitary: bool
    tag: MonodromyTag
    t1: complex
    t2: complex
    commutator: float
    dets: tuple = ()


def verify_unitary(params: LameParams, tol: float = 1e-6, q_tol: float = 1e-8) -> UnitaryVerdict:
    """Trace-level unitarity test: both traces real in ``[-2, 2]`` and commuting cycles.

    Parameters on ``Q(T) = 0`` are not completely reducible and are reported
    as not unitary without integrating.
    """
    from .spectral import spectral_Q2
    Q = spectral_Q2(params.T, params.tau, params.k, params.config)
    scale = abs(params.ctx.quarter[params.k].wp1) ** 4 * (1.0 + abs(params.T)) ** 6
    if abs(Q) <= q_tol * scale:
        return UnitaryVerdict(False, MonodromyTag.NOT_COMPLETELY_REDUCIBLE, math.nan, math.nan,
                              math.nan)
    cm = integrate_monodromy(params)
    ok = True
    for t in (cm.t1, cm.t2):
        if abs(t.imag) > tol or abs(t.real) > 2 + tol:
            ok = False
    if cm.commutator > tol * 10:
        ok = False
    return UnitaryVerdict(ok, MonodromyTag.COMPLETELY_REDUCIBLE, cm.t1, cm.t2, cm.commutator,
                          cm.dets)

