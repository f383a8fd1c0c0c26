"""Zeros of the Hecke form in the modulus, region predicates and the domain Lambda.

Pairs ``(r, s)`` are real and are normally reduced to the square
``[0, 1] x [0, 1/2]`` using ``Z(-r, -s) = -Z(r, s)`` and periodicity in Z^2.
Moduli live in ``F0 = {0 <= Re tau <= 1, |tau - 1/2| >= 1/2}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .config import DEFAULT, Config
from .hecke import (
    LAMBDA_BETA,
    GammaMatrix,
    _z_qseries,
    green_hessian_degeneracy,
    hecke_Z_ctx,
    hecke_Z_real,
    premodular_Zmk,
    shifted_pair,
)
from .kernel import PoleProximityError, lattice_context, reduce_tau, wp_all

SQRT3 = math.sqrt(3.0)
VERTICES = ((0.5, 0.0), (0.0, 0.5), (0.5, 0.5))


class NewtonError(RuntimeError):
    """Raised when Newton's method fails to converge."""


class Region(str, Enum):
    SQUARE = "square"
    DELTA0 = "delta0"
    DELTA1 = "delta1"
    DELTA2 = "delta2"
    DELTA3 = "delta3"
    SQUARE_M1 = "square_m1"
    SQUARE_M2 = "square_m2"
    SQUARE_M3 = "square_m3"
    HALF_LATTICE = "half_lattice"
    F = "F"
    F0 = "F0"
    LAMBDA = "Lambda"
    SCALED_F0_1 = "scaled_F0_1"
    SCALED_F0_2 = "scaled_F0_2"
    SCALED_F0_3 = "scaled_F0_3"


# -- pairs -------------------------------------------------------------------

def _frac(x: float) -> float:
    return x - math.floor(x)


def is_half_lattice(r: float, s: float, tol: float = 1e-12) -> bool:
    return abs(2 * r - round(2 * r)) < tol and abs(2 * s - round(2 * s)) < tol


def reduce_pair(r: float, s: float):
    """Representative of ``+-(r, s) mod Z^2`` in ``[0, 1) x [0, 1/2]``.

    Returns ``(r', s', sign)`` with ``Z(r', s') = sign * Z(r, s)``.
    """
    r, s = _frac(float(r)), _frac(float(s))
    if s > 0.5:
        return _frac(-r), 1.0 - s, -1
    return r, s, 1


def region_of(r: float, s: float) -> set:
    """All region labels containing the reduced representative of ``(r, s)``."""
    if is_half_lattice(r, s):
        return {Region.HALF_LATTICE}
    r, s, _ = reduce_pair(r, s)
    out = {Region.SQUARE}
    if 0 < r < 0.5 and 0 < s < 0.5:
        out.add(Region.DELTA0 if r + s > 0.5 else Region.DELTA3 if r + s < 0.5 else Region.SQUARE)
    if 0.5 < r < 1 and 0 < s < 0.5:
        out.add(Region.DELTA1 if r + s > 1 else Region.DELTA2 if r + s < 1 else Region.SQUARE)
    if 0 < s <= 0.5 and ((1 - s) / 2 < r < 0.5 or 0.5 < r < (2 - s) / 2):
        out.add(Region.SQUARE_M1)
    if 0 < r < 1 and 0 < s < 0.5 and r + 2 * s > 1:
        out.add(Region.SQUARE_M2)
    if (0 < r < 0.5 and 0 < s < 0.5 and r < s) or (0.5 < r < 1 and 0 < s < 0.5 and r + s > 1):
        out.add(Region.SQUARE_M3)
    return out


def in_delta0(r: float, s: float) -> bool:
    return Region.DELTA0 in region_of(r, s)


# -- moduli ------------------------------------------------------------------

def in_F0(tau: complex, tol: float = 1e-12) -> bool:
    tau = complex(tau)
    return (tau.imag > 0 and -tol <= tau.real <= 1 + tol
            and abs(tau - 0.5) >= 0.5 - tol)


def in_F(tau: complex, tol: float = 1e-12) -> bool:
    tau = complex(tau)
    if abs(tau - complex(0.5, SQRT3 / 2)) < tol:
        return True
    return (tau.imag > 0 and -tol <= tau.real < 1 - tol
            and abs(tau) >= 1 - tol and abs(tau - 1) > 1 + tol)


def in_scaled_F0(tau: complex, k: int, tol: float = 1e-12) -> bool:
    """Membership in ``lambda_k F0 - beta_k``, i.e. ``(tau + beta_k) / lambda_k`` in F0."""
    lam, beta = LAMBDA_BETA[k]
    return in_F0((complex(tau) + beta) / lam, tol)


def reduce_to_F(tau: complex):
    """Return ``(tau_F, gamma)`` with ``tau_F = gamma tau`` in ``F`` (so also in F0)."""
    tau_r, g = reduce_tau(complex(tau))
    gamma = GammaMatrix(*g)
    if tau_r.real < 0 or (abs(tau_r - complex(-0.5, SQRT3 / 2)) < 1e-12):
        gamma = GammaMatrix(1, 1, 0, 1) @ gamma
        tau_r = tau_r + 1
    # points with |tau - 1| = 1 on the right belong to F through tau -> tau - 1
    return complex(tau_r), gamma


def regions_of_tau(tau: complex) -> set:
    out = set()
    if in_F0(tau):
        out.add(Region.F0)
    if in_F(tau):
        out.add(Region.F)
    for k, lab in ((1, Region.SCALED_F0_1), (2, Region.SCALED_F0_2), (3, Region.SCALED_F0_3)):
        if in_scaled_F0(tau, k):
            out.add(lab)
    if Region.F0 in out and lambda_by_hessian(tau):
        out.add(Region.LAMBDA)
    return out


# -- zeros in tau ------------------------------------------------------------

@dataclass(frozen=True)
class TauZero:
    """A simple zero ``tau_star`` of ``Z(r, s, .)``."""

    tau_star: complex
    residual: float
    newton_iterations: int
    derivative_at_zero: complex
    r: float = 0.0
    s: float = 0.0


def newton_tau(r: float, s: float, tau0: complex, tol: float = 1e-14,
               maxiter: int = 60, config: Config = DEFAULT) -> TauZero:
    """Newton's method on ``tau -> Z(r, s, tau)`` with the analytic tau-derivative."""
    tau = complex(tau0)
    for it in range(1, maxiter + 1):
        val, dval = hecke_Z_real(r, s, tau, derivative=True, config=config)
        if dval == 0:
            raise NewtonError("vanishing derivative")
        step = val / dval
        new = tau - step
        while new.imag <= 0.1 * tau.imag:
            step *= 0.5
            new = tau - step
            if abs(step) < 1e-300:
                raise NewtonError("step pushed out of the upper half plane")
        tau = new
        if abs(step) < tol * (1.0 + abs(tau)):
            val, dval = hecke_Z_real(r, s, tau, derivative=True, config=config)
            return TauZero(tau, float(abs(val)), it, complex(dval), r, s)
        if tau.imag > 1e3 or tau.imag < 1e-6:
            raise NewtonError("iterate escaped to a cusp")
    raise NewtonError(f"no convergence from {tau0}")


# frames covering F0: the upper part and neighbourhoods of the cusps 0 and 1
_CUSP_FRAMES = (
    GammaMatrix(1, 0, 0, 1),
    GammaMatrix(0, 1, -1, 0),   # tau' = -1/tau, cusp 0 -> infinity
    GammaMatrix(0, 1, -1, 1),   # tau' = 1/(1 - tau), cusp 1 -> infinity
)


def _frame_seeds(n: int):
    """Seed grids for the three frames: F0 near infinity and the images of the cusp regions."""
    a = (np.arange(n) + 0.5) / n
    upper = (a[:, None] + 1j * (0.1 + 2.9 * a[None, :])).ravel()
    upper = upper[np.abs(upper - 0.5) >= 0.5]
    # the cusp regions of F0 map to strips of width one high up
    strip_im = 1.0 + 9.0 * a
    cusp0 = (-a[:, None] + 1j * strip_im[None, :]).ravel()
    cusp1 = (a[:, None] + 1j * strip_im[None, :]).ravel()
    return upper, cusp0, cusp1


def _grid_abs_Z(r: float, s: float, taus):
    rr, ss, _ = reduce_pair(r, s)
    return np.abs(_z_qseries(rr, ss, taus, tol=1e-16))


def find_tau_zero(r: float, s: float, seed: complex | None = None, n_seed: int = 24,
                  n_best: int = 3, config: Config = DEFAULT) -> TauZero | None:
    """Zero of ``Z(r, s, .)`` in F0, or None.

    Seeds are the best points of a ``n_seed x n_seed`` grid in each of three
    frames (the upper part of F0 and the two cusp neighbourhoods), refined by
    Newton in the frame where the zero is well conditioned.
    """
    if is_half_lattice(r, s):
        raise PoleProximityError("(r, s) lies in 1/2 Z^2: every tau is a zero")
    tries = []
    if seed is not None:
        tries.append((_CUSP_FRAMES[0], complex(seed)))
    grids = _frame_seeds(n_seed)
    for g, grid in zip(_CUSP_FRAMES, grids):
        rg, sg = g.act_pair(r, s)
        vals = _grid_abs_Z(rg, sg, grid)
        for idx in np.argsort(vals)[:n_best]:
            tries.append((g, complex(grid[idx])))
    tries.sort(key=lambda t: 0 if t[0] is _CUSP_FRAMES[0] else 1)
    for g, t0 in tries:
        rg, sg = g.act_pair(r, s)
        try:
            zero = newton_tau(rg, sg, t0, config=config)
        except (NewtonError, PoleProximityError, OverflowError, ZeroDivisionError):
            continue
        tau = g.inverse().act(zero.tau_star)
        if not in_F0(tau, 1e-9):
            continue
        return polish_zero(r, s, tau, config)
    return None


def polish_zero(r: float, s: float, tau: complex, config: Config = DEFAULT) -> TauZero:
    """A final Newton pass in the original frame, reporting the residual there."""
    try:
        z = newton_tau(r, s, tau, maxiter=8, config=config)
    except NewtonError:
        val, dval = hecke_Z_real(r, s, tau, derivative=True, config=config)
        return TauZero(complex(tau), float(abs(val)), 0, complex(dval), r, s)
    if abs(z.tau_star - tau) > 1e-6 * (1 + abs(tau)):
        val, dval = hecke_Z_real(r, s, tau, derivative=True, config=config)
        return TauZero(complex(tau), float(abs(val)), 0, complex(dval), r, s)
    return z


def f0_grid(n: int = 60, im_max: float = 6.0):
    """Cell-centred ``n x n`` grid of ``[0, 1] x (0, im_max]`` restricted to F0."""
    a = (np.arange(n) + 0.5) / n
    g = (a[:, None] + 1j * im_max * a[None, :]).ravel()
    return g[np.abs(g - 0.5) >= 0.5]


def grid_minimum(r: float, s: float, n: int = 60, im_max: float = 6.0):
    """Minimum of ``|Z(r, s, .)|`` over the F0 grid and the point where it is attained."""
    grid = f0_grid(n, im_max)
    vals = _grid_abs_Z(r, s, grid)
    i = int(np.argmin(vals))
    return float(vals[i]), complex(grid[i])


def asymptotic_lower_bound(s: float, im_min: float = 6.0) -> float:
    """Lower bound of ``|Z(r, s, tau)|`` on ``Im tau >= im_min`` from the q-expansion."""
    _, s, _ = reduce_pair(0.0, s)
    if s == 0:
        return 0.0
    y = im_min
    a = math.exp(-2 * math.pi * s * y)
    b = math.exp(-2 * math.pi * (1 - s) * y)
    q = math.exp(-2 * math.pi * y)
    tail = 2 * math.pi * (a / (1 - a) + b / (1 - b) + 2 * q / (1 - q) ** 2 / (1 - math.sqrt(q)))
    return max(0.0, 2 * math.pi * abs(s - 0.5) - tail)


@dataclass
class BasinReport:
    """Distinct Newton limits in F0 from a grid of starting points."""

    zeros: list
    counts: list
    n_seeds: int
    n_converged: int

    @property
    def n_basins(self) -> int:
        return len(self.zeros)


def newton_basins(r: float, s: float, n: int = 60, im_max: float = 6.0,
                  maxiter: int = 40, config: Config = DEFAULT) -> BasinReport:
    """Run Newton from every point of the F0 grid at once and cluster the limits in F0."""
    rr, ss, _ = reduce_pair(r, s)
    tau = f0_grid(n, im_max)
    n_seeds = tau.size
    active = np.ones(tau.shape, dtype=bool)
    done = np.zeros(tau.shape, dtype=bool)
    for _ in range(maxiter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        t = tau[idx]
        with np.errstate(all="ignore"):
            val, dval = _z_qseries(rr, ss, t, derivative=True, tol=1e-16)
            step = val / dval
            new = t - step
        bad = ~np.isfinite(new) | (new.imag < 0.02) | (new.imag > 60)
        tau[idx] = new
        conv = ~bad & (np.abs(step) < 1e-13 * (1 + np.abs(new)))
        done[idx[conv]] = True
        active[idx[bad | conv]] = False
    limits = tau[done]
    zeros, counts = [], []
    for t in limits:
        for j, z in enumerate(zeros):
            if abs(z - t) < 1e-7:
                counts[j] += 1
                break
        else:
            zeros.append(complex(t))
            counts.append(1)
    keep_z, keep_c = [], []
    for z, c in zip(zeros, counts):
        if not in_F0(z, 1e-9):
            continue
        zp = polish_zero(rr, ss, z, config)
        if zp.residual < 1e-9:
            keep_z.append(zp)
            keep_c.append(c)
    return BasinReport(keep_z, keep_c, n_seeds, int(done.sum()))


# -- pre-modular zeros -----------------------------------------------------------

def premodular_factor_pairs(r: float, s: float, k: int):
    """Factor pairs and modulus map of ``Z^(m_k)``: ``[(r1, s1), (r2, s2)], tau -> tau'``."""
    if k == 1:
        return [(r, s / 2), (r, (s + 1) / 2)], (lambda t: 2 * t), (lambda t: t / 2)
    if k == 2:
        return [(r / 2, s), ((r + 1) / 2, s)], (lambda t: t / 2), (lambda t: 2 * t)
    if k == 3:
        return ([((r - s) / 2, s), ((r - s + 1) / 2, s)],
                (lambda t: (1 + t) / 2), (lambda t: 2 * t - 1))
    raise ValueError("k must be 1, 2 or 3")


def tau_zero_premodular(r: float, s: float, k: int, config: Config = DEFAULT):
    """Zeros of ``Z^(m_k)(r, s, .)`` in ``lambda_k F0 - beta_k``, found factor by factor."""
    pairs, _, back = premodular_factor_pairs(r, s, k)
    out = []
    for j, (a, b) in enumerate(pairs, start=1):
        if is_half_lattice(a, b):
            continue
        z = find_tau_zero(a, b, config=config)
        if z is not None:
            out.append((j, back(z.tau_star)))
    return out


def tau_map(r: float, s: float, k: int = 0, config: Config = DEFAULT) -> TauZero | None:
    """``tau^(0)(r, s)`` for k = 0, else the zero of ``Z(r_k, s_k, .)`` in F0."""
    if k:
        r, s = shifted_pair(r, s, k)
    return find_tau_zero(r, s, config=config)


def continuation_limit(r0: float, s0: float, direction, eps=(0.05, 0.02, 0.01, 0.005, 0.002)):
    """Follow ``tau^(0)`` towards a boundary point of Delta0 and return the trajectory."""
    dr, ds = direction
    path = []
    seed = None
    for e in eps:
        z = find_tau_zero(r0 + e * dr, s0 + e * ds, seed=seed)
        if z is None:
            break
        seed = z.tau_star
        path.append((e, z.tau_star))
    return path


# -- degenerate curves and b0 -----------------------------------------------------

def _bisect(f, a: float, b: float, tol: float):
    fa, fb = f(a), f(b)
    if fa == 0:
        return a, 0.0
    if fb == 0:
        return b, 0.0
    if (fa > 0) == (fb > 0):
        return None, None
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0:
            return m, 0.0
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    m = 0.5 * (a + b)
    return m, f(m)


@lru_cache(maxsize=None)
def compute_b0(tol: float = 1e-10):
    """``b0`` with the i = 1 degeneracy at ``tau = 1/2 + i b0 / 2``; returns ``(b0, residual)``."""
    f = lambda b: green_hessian_degeneracy(1, complex(0.5, b / 2))
    b0, res = _bisect(f, 1.0, SQRT3, tol)
    if b0 is None:
        raise RuntimeError("no sign change of the i = 1 functional on (1, sqrt 3)")
    return b0, abs(res)


def sign_changes_on_line(b_lo: float = 1.0, b_hi: float = SQRT3, n: int = 400) -> int:
    bs = np.linspace(b_lo, b_hi, n)
    v = np.array([green_hessian_degeneracy(1, complex(0.5, b / 2)) for b in bs])
    return int(np.sum(np.sign(v[1:]) != np.sign(v[:-1])))


@dataclass
class CurveTrace:
    i: int
    points: list
    excluded: list = field(default_factory=list)


def trace_degenerate_curve(i: int, samples: int = 41, tol: float = 1e-10,
                           im_top: float = 6.0) -> CurveTrace:
    """Sample the degeneracy curve ``C_i`` by bisection on scan lines.

    ``C_1`` is cut by vertical lines ``Re tau = x`` between the lower boundary
    of F0 and ``Im tau = 3``.  ``C_2`` and ``C_3`` are cut by horizontal lines
    ``Im tau = y``, on the right and left halves of F0 respectively.  Their
    distance to ``Re tau = 1/2`` decays faster than exponentially in ``y``,
    so rows above ``Im tau = 6`` are not resolved in double precision.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    pts, excluded = [], []
    f = lambda t: green_hessian_degeneracy(i, t)
    if i == 1:
        xs = np.linspace(0.0, 1.0, samples + 2)[1:-1]
        for x in xs:
            y_lo = math.sqrt(max(0.25 - (x - 0.5) ** 2, 0.0)) + 1e-9
            y, _ = _bisect(lambda y: f(complex(x, y)), max(y_lo, 1e-3), 3.0, tol)
            if y is None:
                excluded.append((float(x), "no sign change"))
            else:
                pts.append(complex(x, y))
    elif i in (2, 3):
        ys = np.geomspace(0.05, im_top, samples)
        for y in ys:
            half = math.sqrt(0.25 - y * y) if y < 0.5 else 0.0
            if i == 3:
                lo, hi = 0.0, 0.5 - half
            else:
                lo, hi = 0.5 + half, 1.0
            if y >= 0.5:
                lo, hi = (0.0, 0.5) if i == 3 else (0.5, 1.0)
            x, _ = _bisect(lambda x: f(complex(x, y)), lo, hi, tol)
            if x is None:
                excluded.append((float(y), "no sign change"))
            else:
                pts.append(complex(x, y))
    else:
        raise ValueError("i must be 1, 2 or 3")
    return CurveTrace(i, pts, excluded)


# -- membership in Lambda ------------------------------------------------------------

def lambda_by_hessian(tau: complex) -> bool:
    """Cross-check: inside F0, Lambda is where all three half periods are saddles."""
    return all(green_hessian_degeneracy(i, tau) < 0 for i in (1, 2, 3))


@dataclass(frozen=True)
class MembershipResult:
    """Outcome of the search for ``(r, s)`` in Delta0 with ``Z(r, s, tau) = 0``."""

    member: bool
    inconclusive: bool
    witness: tuple | None
    residual: float
    metric: float
    tau: complex


def _Z_and_jac(r: float, s: float, ctx):
    z = r + s * ctx.tau
    val = hecke_Z_ctx(r, s, ctx)
    p = complex(wp_all(z, ctx)[0])
    dr = -p - ctx.eta1
    ds = -ctx.tau * p - ctx.eta2
    return val, dr, ds


def _deflation(x):
    m = 1.0
    dm = np.zeros(2)
    for v in VERTICES:
        d = x - np.array(v)
        n2 = float(d @ d)
        f = 1.0 / n2 + 1.0
        m_other = m
        m *= f
        # product rule, accumulated
        dm = dm * f + m_other * (-2.0 * d / n2**2)
    return m, dm


def _vertex_distance(r: float, s: float) -> float:
    return min(math.hypot(r - a, s - b) for a, b in VERTICES)


# opening angles of Delta0 at its vertices
_WEDGES = {(0.5, 0.0): (0.5 * math.pi, 0.75 * math.pi),
           (0.0, 0.5): (-0.25 * math.pi, 0.0),
           (0.5, 0.5): (math.pi, 1.5 * math.pi)}


def _vertex_ring_seeds(n_rad: int = 10, n_ang: int = 7):
    # near the boundary of Lambda the witness sits close to a vertex
    out = []
    for (vr, vs), (a0, a1) in _WEDGES.items():
        for rad in np.geomspace(2e-3, 0.12, n_rad):
            for ang in a0 + (a1 - a0) * (np.arange(n_ang) + 0.5) / n_ang:
                out.append((vr + rad * math.cos(ang), vs + rad * math.sin(ang)))
    return out


def lambda_membership(tau: complex, n_seed: int = 14, band=(1e-6, 1e-3),
                      config: Config = DEFAULT) -> MembershipResult:
    """Decide whether ``tau`` (in F0) lies in Lambda.

    Solves ``Z(r, s, tau) = 0`` over ``(r, s)`` in Delta0 by Newton's method on
    the two real unknowns, deflated at the three trivial zeros (the vertices
    of Delta0).  Seeds come from a triangular grid.  Without a converged
    witness the smallest value of ``|Z| / dist(vertices)`` decides: above the
    band means not a member, inside the band is reported as inconclusive.
    """
    tau = complex(tau)
    ctx = lattice_context(tau, config)
    a = (np.arange(n_seed) + 0.5) / n_seed * 0.5
    seeds = [(x, y) for x in a for y in a if x + y > 0.5]
    seeds += _vertex_ring_seeds()
    best_metric = math.inf
    scored = []
    for r, s in seeds:
        val = hecke_Z_ctx(r, s, ctx)
        m = abs(val) / _vertex_distance(r, s)
        best_metric = min(best_metric, m)
        scored.append((m, r, s))
    scored.sort()
    for _, r0, s0 in scored[:16]:
        x = np.array([r0, s0])
        ok = False
        for _ in range(60):
            val, dr, ds = _Z_and_jac(x[0], x[1], ctx)
            m, dm = _deflation(x)
            F = np.array([val.real, val.imag]) * m
            J = np.array([[dr.real, ds.real], [dr.imag, ds.imag]]) * m \
                + np.outer([val.real, val.imag], dm)
            try:
                step = np.linalg.solve(J, F)
            except np.linalg.LinAlgError:
                break
            nrm = float(np.hypot(*step))
            if nrm > 0.1:
                step *= 0.1 / nrm
            x = x - step
            if not (-0.2 < x[0] < 0.7 and -0.2 < x[1] < 0.7):
                break
            if float(np.hypot(*step)) < 1e-15:
                ok = True
                break
        if not ok:
            continue
        r, s = float(x[0]), float(x[1])
        try:
            val = hecke_Z_ctx(r, s, ctx)
        except PoleProximityError:
            continue
        dist = _vertex_distance(r, s)
        best_metric = min(best_metric, abs(val) / max(dist, 1e-300))
        if abs(val) < 1e-10 and dist > 1e-6 and in_delta0(r, s):
            return MembershipResult(True, False, (r, s), float(abs(val)), 0.0, tau)
    inconclusive = band[0] <= best_metric <= band[1]
    return MembershipResult(False, inconclusive, None, math.nan, best_metric, tau)


def membership_any(tau: complex, config: Config = DEFAULT):
    """Membership of the SL(2, Z)-orbit of ``tau``: reduce to F, then test."""
    tau_F, gamma = reduce_to_F(tau)
    return lambda_membership(tau_F, config=config), gamma


def exclusion_margin(r: float, s: float, k: int, config: Config = DEFAULT):
    """``|Z^(m_k)(r, s, tau*)|`` at the F0 zero of ``Z(r_k, s_k, .)``, or None."""
    rk, sk = shifted_pair(r, s, k)
    if is_half_lattice(rk, sk):
        return None
    z = find_tau_zero(rk, sk, config=config)
    if z is None:
        return None
    return z.tau_star, abs(premodular_Zmk(r, s, z.tau_star, k, config))
