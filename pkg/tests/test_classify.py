import cmath
import math

import numpy as np
import pytest

from artifact.atlas import compute_b0, reduce_to_F
from artifact.classify import (
    PipelineError,
    Verdict,
    classify_torus,
    even_pair_from_witness,
    full_pipeline,
    rectangle_obstruction,
)
from artifact.hecke import GammaMatrix, hecke_Z, premodular_Zmk, shifted_pair, tau_k
from artifact.spectral import monodromy_data_from_T

HEX = cmath.exp(1j * math.pi / 3)


@pytest.fixture(scope="module")
def b0():
    return compute_b0()[0]


# -- corollaries ---------------------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3])
def test_hexagonal_torus(k):
    rep = classify_torus(HEX, k)
    assert rep.noneven_family.verdict is Verdict.EXISTS
    assert rep.even_family.verdict is Verdict.NONE
    r, s = rep.noneven_family.witness
    assert abs(hecke_Z(r, s, HEX)) < 1e-9
    assert rep.noneven_family.witness_reduced == pytest.approx((1 / 3, 1 / 3), abs=1e-7)


@pytest.mark.parametrize("b", [0.7, 1.0, 1.8])
@pytest.mark.parametrize("k", [1, 2])
def test_rectangular_no_families(b, k):
    rep = classify_torus(1j * b, k)
    assert rep.noneven_family.verdict is Verdict.NONE
    assert rep.even_family.verdict is Verdict.NONE


@pytest.mark.parametrize("b", [0.5, 0.7, 1.0, 1.3, 1.6, 2.2])
def test_rectangular_k3(b, b0):
    rep = classify_torus(1j * b, 3)
    assert rep.noneven_family.verdict is Verdict.NONE
    expected = b > b0 or b < 1 / b0
    assert (rep.even_family.verdict is Verdict.EXISTS) == expected
    assert any("rectangle torus" in n for n in rep.notes)


@pytest.mark.parametrize("edge", ["b0", "1/b0"])
def test_k3_flip(edge, b0):
    e = b0 if edge == "b0" else 1 / b0
    lo = classify_torus(1j * (e - 1e-3), 3).even_family.verdict
    hi = classify_torus(1j * (e + 1e-3), 3).even_family.verdict
    assert {lo, hi} == {Verdict.EXISTS, Verdict.NONE}


def test_even_witness_is_premodular_zero():
    rep = classify_torus(2.2j, 3)
    fam = rep.even_family
    r, s = even_pair_from_witness(*fam.witness, 3)
    assert abs(premodular_Zmk(r, s, 2.2j, 3)) < 1e-8
    assert abs(hecke_Z(*fam.witness, tau_k(2.2j, 3))) < 1e-9


def test_witness_transport():
    tau = 1.3 + 0.6j  # outside F, reduced first
    rep = classify_torus(tau, 1)
    fam = rep.noneven_family
    tf, _ = reduce_to_F(tau)
    assert abs(fam.reduced_modulus - tf) < 1e-9 or fam.verdict is Verdict.NONE
    if fam.verdict is Verdict.EXISTS:
        assert fam.residual < 1e-8


def test_classify_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        classify_torus(0.3 - 1j, 1)


def test_report_serialisable():
    d = classify_torus(HEX, 2).to_dict()
    assert d["k"] == 2 and "even_family" in d


def test_even_pair_from_witness_checks_k():
    with pytest.raises(ValueError):
        even_pair_from_witness(0.1, 0.2, 4)


# -- consistency across k -------------------------------------------------------------------

def test_k_consistency():
    """Even verdict for k = 1 at tau equals that for k = 2 at tau' with tau'/2 = gamma(2 tau)."""
    rng = np.random.default_rng(5)
    gammas = [GammaMatrix(0, -1, 1, 0), GammaMatrix(1, 1, 0, 1), GammaMatrix(1, 0, 1, 1),
              GammaMatrix(2, 1, 1, 1)]
    for i in range(20):
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 1.5))
        g = gammas[i % len(gammas)]
        tau2 = 2 * g.act(2 * tau)
        assert abs(reduce_to_F(tau_k(tau2, 2))[0] - reduce_to_F(tau_k(tau, 1))[0]) < 1e-9
        a = classify_torus(tau, 1).even_family.verdict
        b = classify_torus(tau2, 2).even_family.verdict
        assert a == b


# -- rectangle obstruction -------------------------------------------------------------------

@pytest.mark.parametrize("m,h_plus,h_minus", [
    ((1, 0, 0, 0), False, False),
    ((0, 1, 1, 0), True, False),
    ((1, 1, 0, 0), False, False),
    ((2, 0, 0, 1), False, True),
    ((0, 2, 0, 0), False, False),
])
def test_obstruction(m, h_plus, h_minus):
    v = rectangle_obstruction(m)
    assert (v.holds_plus, v.holds_minus) == (h_plus, h_minus)
    assert v.even_excluded_on_rectangles == (not (h_plus or h_minus))


def test_obstruction_n000_family():
    for n in range(1, 6):
        assert rectangle_obstruction((n, 0, 0, 0)).even_excluded_on_rectangles


@pytest.mark.parametrize("m", [(1, 0, 0), (-1, 0, 0, 0)])
def test_obstruction_rejects(m):
    with pytest.raises(ValueError):
        rectangle_obstruction(m)


# -- pipeline -----------------------------------------------------------------------------------

def unshift(r0, s0, k):
    dr, ds = shifted_pair(0.0, 0.0, k)
    return r0 - dr, s0 - ds


@pytest.mark.parametrize("k,pair", [(1, (0.3, 0.35)), (2, (0.42, 0.27)), (3, (0.25, 0.4))])
def test_pipeline_located_zero(k, pair):
    r, s = unshift(*pair, k)
    rec = full_pipeline(r, s, k=k)
    assert rec.verdict == "non_even"
    assert rec.zero_residual < 1e-6
    assert rec.premodular > 1e-5
    assert rec.roundtrip_error < 1e-6
    assert max(rec.trace_errors) < 1e-6
    assert rec.commutator < 1e-6


@pytest.mark.parametrize("k", [1, 2, 3])
def test_pipeline_P0_is_even_branch(k):
    tau = 0.21 + 1.02j
    d = monodromy_data_from_T(0.0, tau, k)
    rec = full_pipeline(d.r, d.s, tau=tau, k=k)
    assert rec.verdict == "even_branch"
    assert rec.premodular < 1e-8


def test_pipeline_no_zero():
    r, s = unshift(0.1, 0.1, 2)  # shifted pair in Delta3
    assert full_pipeline(r, s, k=2).verdict == "none"


def test_pipeline_given_tau_without_zero():
    rec = full_pipeline(0.2, 0.3, tau=0.1 + 1.1j, k=1)
    assert rec.verdict == "none" and rec.zero_residual > 1e-8


def test_pipeline_rejects_half_lattice():
    with pytest.raises(PipelineError) as info:
        full_pipeline(0.5, 0.0, k=1)
    assert info.value.stage == "input"


def test_no_common_zero_sampled():
    rng = np.random.default_rng(24)
    located = 0
    for i in range(50):
        k = 1 + i % 3
        r, s = rng.uniform(-1, 1, 2)
        rec = full_pipeline(float(r), float(s), k=k, integrate=False)
        assert rec.verdict != "even_branch"
        if rec.verdict == "non_even":
            located += 1
            assert rec.premodular > 1e-5
    assert located >= 5
