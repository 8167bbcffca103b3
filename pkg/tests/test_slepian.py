import math

import numpy as np
import pytest

import excursia as ex

from conftest import ALL_MODELS, VALID_MODELS

T_STAR = 2.0 * np.arccosh(2.0)


def test_e0_at_zero_is_one():
    for m in ALL_MODELS:
        assert ex.e0(m, 0.0) == 1.0


def test_e0_pointwise_values():
    assert ex.e0(ex.Diffusion(d=2), T_STAR) == pytest.approx(0.5, rel=1e-12)
    assert ex.e0(ex.RandomAcceleration(), math.log(2.0)) == pytest.approx(math.sqrt(3.0 / 7.0), rel=1e-12)


def test_e0_generic_matches_closed_forms():
    # both evaluation paths agree at 1000 random points to relative 1e-10
    rng = np.random.default_rng(314159)
    ts = rng.uniform(1e-3, 30.0, 1000)
    for m in ALL_MODELS:
        a = np.asarray(ex.e0(m, ts))
        b = np.asarray(ex.e0_closed(m, ts))
        mask = np.abs(b) > 1e-290
        assert np.all(np.abs(a[mask] - b[mask]) <= 1e-10 * np.abs(b[mask])), m.spec_string()


def test_e0_stable_near_zero():
    ts = np.array([1e-12, 1e-8, 1e-6, 1e-4])
    for m in ALL_MODELS:
        vals = np.asarray(ex.e0(m, ts))
        assert np.all(np.isfinite(vals))
        assert np.all(np.abs(vals - 1.0) < 1e-3)


def test_mean_excursion_values():
    assert ex.mean_excursion(ex.Diffusion(d=2)) == pytest.approx(2 * math.pi, rel=1e-14)
    assert ex.mean_excursion(ex.RandomAcceleration()) == pytest.approx(2 * math.pi / math.sqrt(3.0), rel=1e-14)
    assert ex.mean_excursion(ex.ShiftedGaussian(alpha=0.0)) == pytest.approx(math.pi, rel=1e-14)


def test_crossing_intensity_reciprocal_identity():
    for m in ALL_MODELS:
        assert ex.crossing_intensity(m) * ex.mean_excursion(m) == pytest.approx(1.0, abs=1e-14)
    assert ex.crossing_intensity(ex.Diffusion(d=2)) == pytest.approx(1.0 / (2 * math.pi), rel=1e-14)
    assert ex.crossing_intensity(ex.ShiftedGaussian(alpha=0.0)) == pytest.approx(1.0 / math.pi, rel=1e-14)
    assert ex.crossing_intensity(ex.MaternHalfInteger(nu=2.5)) == pytest.approx(1.0 / (math.pi * math.sqrt(3.0)), rel=1e-14)


def test_validate_verdicts():
    rep = ex.validate_iia(ex.Diffusion(d=2))
    assert rep.verdict == "valid"
    assert rep.tail_class.kind == "exponential"
    assert rep.tail_class.rate == pytest.approx(0.5, rel=0.03)

    rep = ex.validate_iia(ex.ShiftedGaussian(alpha=2.0))
    assert rep.verdict == "invalid_oscillating"
    assert not rep.usable
    assert rep.first_violation_t is not None

    rep = ex.validate_iia(ex.GeneralizedLaplace(alpha=1.0))
    assert rep.verdict == "valid_but_power_tail_warning"
    assert rep.usable
    assert rep.tail_class.kind == "power_law"
    assert rep.tail_class.exponent == pytest.approx(-3.0, abs=0.05)

    rep = ex.validate_iia(ex.ShiftedGaussian(alpha=0.0))
    assert rep.verdict == "valid"
    assert rep.tail_class.kind == "superexponential"


def test_validate_diffusion_rates_within_3_percent():
    for d in range(1, 11):
        rep = ex.validate_iia(ex.Diffusion(d=d))
        assert rep.tail_class.rate == pytest.approx(d / 4.0, rel=0.03), d


def test_validate_small_grid_flags_inconclusive():
    rep = ex.validate_iia(ex.Diffusion(d=2), t_max=0.4, step=0.01)
    assert rep.classification_inconclusive


def test_validate_grid_preconditions():
    with pytest.raises(ValueError):
        ex.validate_iia(ex.Diffusion(d=2), t_max=-1.0)
    with pytest.raises(ValueError):
        ex.validate_iia(ex.Diffusion(d=2), t_max=1.0, step=2.0)


def test_divisor_distribution_fields():
    for m in VALID_MODELS:
        div = ex.divisor_distribution(m)
        assert float(np.asarray(div.survival(0.0))) == 1.0
        ts = np.arange(0.0, 30.0, 0.05)
        vals = np.asarray(div.survival(ts))
        assert np.all(vals >= -1e-12) and np.all(vals <= 1.0 + 1e-12)
        assert np.all(np.diff(vals) <= 1e-12)
        assert div.mean == pytest.approx(ex.mean_excursion(m) / 2.0, rel=1e-12)


def test_divisor_mean_identity_by_quadrature():
    # integral of E0 over [0, inf) equals mu/2 to relative 1e-6
    for m in VALID_MODELS:
        total = ex.laplace_e0(m, 0.0)
        assert total == pytest.approx(ex.mean_excursion(m) / 2.0, rel=1e-6), m.spec_string()


def test_check_equivalence_examples():
    grid = np.arange(0.1, 10.0 + 1e-9, 0.01)
    for m in [ex.Diffusion(d=2), ex.RandomAcceleration(), ex.ShiftedGaussian(alpha=2.0)]:
        assert ex.check_equivalence(m, grid) <= 1e-5, m.spec_string()


def test_check_equivalence_rejects_bad_grid():
    with pytest.raises(ValueError):
        ex.check_equivalence(ex.Diffusion(d=2), [0.0, 1.0])
    with pytest.raises(ValueError):
        ex.check_equivalence(ex.Diffusion(d=2), [2.0, 1.0])
