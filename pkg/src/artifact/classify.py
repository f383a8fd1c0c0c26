"""Classification of tori by the solution families of the two-point curvature equation.

A torus ``tau`` has a non-even family iff ``Z(r, s, tau) = 0`` for some real
``(r, s)`` outside ``1/2 Z^2``, and an even family for index ``k`` iff the same
holds at ``tau_k`` (``2 tau``, ``tau / 2`` or ``(1 + tau) / 2``).  Both are
decided by reducing the modulus to F and searching Delta0.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .atlas import (
    compute_b0,
    find_tau_zero,
    is_half_lattice,
    lambda_by_hessian,
    membership_any,
)
from .config import DEFAULT, Config
from .hecke import hecke_Z, hecke_Z_ctx, premodular_Zmk, shifted_pair, tau_k
from .kernel import lattice_context
from .ode import integrate_monodromy
from .spectral import SpectralError, monodromy_data_from_point, solve_T_from_rs


class Verdict(str, Enum):
    EXISTS = "exists"
    NONE = "none"
    INCONCLUSIVE = "inconclusive"


@dataclass
class FamilyVerdict:
    """Verdict for one family with its witness in the reduced and original frames."""

    verdict: Verdict
    modulus: complex
    reduced_modulus: complex
    witness_reduced: tuple | None = None
    witness: tuple | None = None
    residual: float = math.nan
    metric: float = math.nan
    hessian_check: bool | None = None


@dataclass
class ClassificationReport:
    tau: complex
    k: int
    even_family: FamilyVerdict
    noneven_family: FamilyVerdict
    notes: list = field(default_factory=list)

    @property
    def inconclusive(self) -> bool:
        return Verdict.INCONCLUSIVE in (self.even_family.verdict, self.noneven_family.verdict)

    def to_dict(self):
        return asdict(self)


def _family(modulus: complex, config: Config) -> FamilyVerdict:
    res, gamma = membership_any(modulus, config)
    hess = lambda_by_hessian(res.tau)
    if res.member:
        # Z(r', s', gamma tau) = (c tau + d) Z(r, s, tau): pull the witness back
        r, s = gamma.inverse().act_pair(*res.witness)
        residual = abs(hecke_Z(r, s, modulus, config))
        return FamilyVerdict(Verdict.EXISTS, complex(modulus), res.tau, res.witness, (r, s),
                             float(residual), res.metric, hess)
    v = Verdict.INCONCLUSIVE if res.inconclusive else Verdict.NONE
    return FamilyVerdict(v, complex(modulus), res.tau, None, None, math.nan, res.metric, hess)


def even_pair_from_witness(a: float, b: float, k: int):
    """Pair ``(r, s)`` with ``Z^(m_k)(r, s, tau) = 0`` from a zero ``Z(a, b, tau_k) = 0``."""
    if k == 1:
        return a, 2 * b
    if k == 2:
        return 2 * a, b
    if k == 3:
        return 2 * a + b, b
    raise ValueError("k must be 1, 2 or 3")


def classify_torus(tau: complex, k: int, config: Config = DEFAULT) -> ClassificationReport:
    """Even and non-even verdicts for the torus ``tau`` and half-period index ``k``."""
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError("tau must lie in the upper half plane")
    notes = []
    noneven = _family(tau, config)
    even = _family(tau_k(tau, k), config)
    if even.verdict is Verdict.EXISTS:
        r, s = even_pair_from_witness(*even.witness, k)
        val = abs(premodular_Zmk(r, s, tau, k, config))
        notes.append(f"even witness (r, s) = ({r:.12g}, {s:.12g}) with |Z^(m_k)| = {val:.3e}")
    for name, fam in (("even", even), ("non-even", noneven)):
        if fam.hessian_check is not None and fam.verdict is not Verdict.INCONCLUSIVE:
            agree = fam.hessian_check == (fam.verdict is Verdict.EXISTS)
            if not agree:
                notes.append(f"{name}: Hessian sign test disagrees with the Newton search")
    if abs(tau.real) < 1e-14 and k == 3:
        b0, _ = compute_b0()
        notes.append(f"rectangle torus: even family expected iff b > {b0:.10f} or b < {1 / b0:.10f}")
    return ClassificationReport(tau, k, even, noneven, notes)


# -- rectangle obstruction -------------------------------------------------------------

@dataclass(frozen=True)
class ObstructionVerdict:
    """With ``h = (m1 + m2 - m0 - m3) / 2``: ``holds_plus`` is ``h >= 1, m1, m2 >= 1`` and
    ``holds_minus`` is ``h <= -1, m0, m3 >= 1``."""

    m: tuple
    holds_plus: bool
    holds_minus: bool

    @property
    def even_excluded_on_rectangles(self) -> bool:
        """Neither condition holds: no even solution on any rectangular torus."""
        return not (self.holds_plus or self.holds_minus)


def rectangle_obstruction(m) -> ObstructionVerdict:
    """Evaluate the two sign conditions on ``(m1 + m2 - m0 - m3) / 2``."""
    m = tuple(int(x) for x in m)
    if len(m) != 4 or min(m) < 0:
        raise ValueError("m must be four nonnegative integers")
    m0, m1, m2, m3 = m
    h = (m1 + m2 - m0 - m3) / 2
    return ObstructionVerdict(m, h >= 1 and m1 >= 1 and m2 >= 1, h <= -1 and m0 >= 1 and m3 >= 1)


# -- end-to-end pipeline ---------------------------------------------------------------

class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class PipelineRecord:
    r: complex
    s: complex
    k: int
    verdict: str
    tau_star: complex | None = None
    zero_residual: float = math.nan
    premodular: float = math.nan
    T: complex | None = None
    roundtrip_error: float = math.nan
    trace_errors: tuple = (math.nan, math.nan)
    traces: tuple = ()
    commutator: float = math.nan


def _mod1_distance(x: complex) -> float:
    return abs(x - round(x.real))


def full_pipeline(r, s, tau: complex | None = None, k: int = 1, integrate: bool = True,
                  premodular_tol: float = 1e-8, config: Config = DEFAULT) -> PipelineRecord:
    """Criterion check from a pair ``(r, s)`` to integrated monodromy.

    Without ``tau`` the zero of ``Z(r_k, s_k, .)`` in F0 is located (real
    pairs only); with ``tau`` the given modulus is used.  Stages: zero,
    pre-modular value, solve for ``T``, recover ``(r, s)``, integrate.
    """
    rk, sk = shifted_pair(r, s, k)
    if np.isreal(r) and np.isreal(s) and is_half_lattice(float(np.real(r)), float(np.real(s))):
        raise PipelineError("input", "(r, s) lies in 1/2 Z^2")
    if tau is None:
        try:
            zero = find_tau_zero(float(np.real(rk)), float(np.real(sk)), config=config)
        except ValueError as exc:
            raise PipelineError("zero", str(exc)) from exc
        if zero is None:
            return PipelineRecord(r, s, k, "none")
        tau = zero.tau_star
        zres = zero.residual
    else:
        tau = complex(tau)
        ctx = lattice_context(tau, config)
        zres = abs(hecke_Z_ctx(rk, sk, ctx))
        if zres > config.zero_tol:
            return PipelineRecord(r, s, k, "none", tau, zres)
    pm = abs(premodular_Zmk(r, s, tau, k, config))
    rec = PipelineRecord(r, s, k, "non_even", tau, float(zres), float(pm))
    if pm < premodular_tol:
        rec.verdict = "even_branch"
        return rec
    try:
        sol = solve_T_from_rs(r, s, tau, k, config=config)
    except SpectralError as exc:
        raise PipelineError("solve", str(exc)) from exc
    if sol is None:
        raise PipelineError("solve", "Z(r_k, s_k, tau) is not zero at the located modulus")
    P = sol.points[0]
    rec.T = P.T
    try:
        data = monodromy_data_from_point(P)
    except SpectralError as exc:
        raise PipelineError("recover", str(exc)) from exc
    rec.roundtrip_error = max(_mod1_distance(data.r - r), _mod1_distance(data.s - s))
    if integrate:
        try:
            cm = integrate_monodromy(P.params)
        except RuntimeError as exc:
            raise PipelineError("integrate", str(exc)) from exc
        e1 = abs(cm.t1 - 2 * np.cos(2 * np.pi * s))
        e2 = abs(cm.t2 - 2 * np.cos(2 * np.pi * r))
        rec.trace_errors = (float(e1), float(e2))
        rec.traces = (cm.t1, cm.t2)
        rec.commutator = cm.commutator
    return rec
