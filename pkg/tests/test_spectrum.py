"""Instantaneous spectra, gap minima and the analytic gap predictor."""

import math

import numpy as np
import pytest

from ampanneal import spectrum
from ampanneal.drives import Uniform
from ampanneal.problem import DEFAULT_ENSEMBLE, AmpParams, sector_energies
from ampanneal.spectrum import (
    critical_kappa,
    forward_gap,
    gap_profile,
    level_diagram,
    multiphoton_rate,
    multiphoton_rate_sum,
    overlap_trace,
)


def test_gap_positive_and_min_consistent():
    params = DEFAULT_ENSEMBLE.params(0, 8)
    prof = gap_profile(Uniform(), params, resolution=100)
    assert np.all(prof.gaps > 0)
    assert prof.delta_min <= prof.gaps.min() + 1e-12
    assert 0.0 <= prof.s_min <= 1.0


def test_gap_endpoint_classical():
    # set/size where one flip off the ground state is the first excited
    # sector: at s=1 the gap is then f(1-1/n) - f(1)
    params = DEFAULT_ENSEMBLE.params(3, 12)
    f = sector_energies(params)
    assert f[-2] == sorted(f)[1]
    prof = gap_profile(Uniform(), params, resolution=100)
    assert prof.gaps[-1] == pytest.approx(f[-2] - f[-1], abs=1e-10)


def test_easiest_set_gap_magnitude():
    # delta_min at n=8 ~ 2^(-2.04 - 0.31*8) within 15%
    params = DEFAULT_ENSEMBLE.params(3, 8)
    prof = gap_profile(Uniform(), params)
    expect = 2.0 ** (-2.04 - 0.31 * 8)
    assert abs(prof.delta_min / expect - 1.0) < 0.15


def test_gap_profile_csv(tmp_path):
    params = DEFAULT_ENSEMBLE.params(3, 5)
    prof = gap_profile(Uniform(), params, resolution=20)
    path = tmp_path / "gap.csv"
    prof.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (21, 2)
    assert np.allclose(data[:, 1], prof.gaps)


def test_critical_kappa_easiest():
    params = DEFAULT_ENSEMBLE.params(3, 8)
    kappa_c = critical_kappa(params)
    assert abs(kappa_c - 1.73) < 0.1


def test_critical_kappa_vanishes_with_asymmetry():
    # degenerate wells cross at zero field: kappa_c -> 0 as a -> 0
    # (second-order well depths give the sqrt(a) approach to the limit)
    vals = [critical_kappa(AmpParams(8, a, 0.8)) for a in (0.2, 0.01, 1e-6)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 0.005


def test_critical_kappa_matches_numerical_minimum_location():
    params = DEFAULT_ENSEMBLE.params(3, 10)
    prof = gap_profile(Uniform(), params)
    kappa_numeric = (1.0 - prof.s_min) / prof.s_min
    kappa_c = critical_kappa(params)
    assert abs(kappa_numeric / kappa_c - 1.0) < 0.2


def test_flip_denominator_product():
    # n=6, xp=0.8, kappa_c=1: U_1 = 1*(1/0.8 + 2*0.8) = 2.85, and the
    # full product matches a direct evaluation.
    params = AmpParams(n=6, a=0.2, xp=0.8)
    kc = 1.0
    c_lo = 1 / 0.8 + 2 * kc**2 * 0.8
    c_hi = 1.2 / 0.2 + 2 * kc**2 * 0.2 / 1.2
    assert c_lo == pytest.approx(2.85)
    manual = 1.0
    for nn in range(1, 6):
        manual *= nn * c_lo if nn <= 0.8 * 6 else (6 - nn) * c_hi
    log_prod = spectrum._log_denominators(params, kc)
    assert math.exp(log_prod) == pytest.approx(manual, rel=1e-12)


def test_forward_gap_correction_factor():
    params = DEFAULT_ENSEMBLE.params(0, 8)
    plain = forward_gap(params, corrected=False, units="field")
    corr = forward_gap(params, corrected=True, units="field")
    assert corr / plain == pytest.approx(2 * math.pi / 8)
    with pytest.raises(ValueError):
        forward_gap(params, units="bogus")
    with pytest.raises(ValueError):
        forward_gap(params, kappa_c=-1.0)


def test_forward_gap_field_units_formula():
    params = AmpParams(n=7, a=0.28, xp=0.7)
    kc = critical_kappa(params)
    manual = math.factorial(7) * kc**7 / math.exp(
        spectrum._log_denominators(params, kc)
    )
    assert forward_gap(params, corrected=False, units="field") == pytest.approx(
        manual, rel=1e-10
    )


def test_level_diagram_shape():
    params = DEFAULT_ENSEMBLE.params(3, 6)
    diag = level_diagram(Uniform(), params, k_levels=4, resolution=20)
    assert diag.diffs.shape == (4, 21)
    assert np.all(diag.diffs >= -1e-12)
    # first excited row equals the gap profile
    prof = gap_profile(Uniform(), params, resolution=20)
    assert np.allclose(diag.diffs[0], prof.gaps, atol=1e-9)


def test_overlap_endpoints_and_crossing():
    params = DEFAULT_ENSEMBLE.params(0, 8)
    tr = overlap_trace(Uniform(), params, [0.0, 1.0])
    assert tr["ground_up"][0] == pytest.approx(2.0**-8, abs=1e-10)
    assert tr["ground_down"][0] == pytest.approx(2.0**-8, abs=1e-10)
    assert tr["ground_up"][1] == pytest.approx(1.0, abs=1e-10)
    # false well dominates the ground state below the transition and the
    # true well above it
    prof = gap_profile(Uniform(), params)
    s_c = prof.s_min
    tr = overlap_trace(Uniform(), params, [s_c - 0.05, s_c + 0.05])
    assert tr["ground_down"][0] > tr["ground_up"][0]
    assert tr["ground_up"][1] > tr["ground_down"][1]


def test_multiphoton_rate():
    assert multiphoton_rate(0.5, 2.0, 0.0, 9) == pytest.approx(0.125)
    assert multiphoton_rate(0.5, 2.0, 0.3, 1) == pytest.approx(
        0.125 * (1 + 2 * 0.09)
    )
    assert multiphoton_rate(0.4, 1.7, 0.3, 12) == pytest.approx(
        multiphoton_rate_sum(0.4, 1.7, 0.3, 12), rel=1e-12
    )
    with pytest.raises(ValueError):
        multiphoton_rate(0.5, 0.0, 0.3, 4)
    with pytest.raises(ValueError):
        multiphoton_rate(0.5, 1.0, -0.1, 4)
