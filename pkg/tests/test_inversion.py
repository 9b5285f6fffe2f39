import numpy as np
import pytest

import texradon.inversion as inv
from oracles import rayleigh_sqrt_symbol
from texradon.errors import CalibrationError, FormatError
from texradon.harmonics import HarmonicCoeffsSO3, s2s2_function
from texradon.inversion import (
    MultiplierSpec,
    calibrate_dual_symbol,
    dual_scale,
    dual_symbol,
    format_dual_symbol,
    frozen_dual_symbol,
    invert_backprojection,
    invert_formula_a,
    invert_slice,
    parse_dual_symbol,
    read_dual_symbol,
    required_multiplier,
    s2s2_sqrt_symbol,
    so3_sqrt_symbol,
    write_dual_symbol,
)
from texradon.radon import radon_harmonic


def test_symbols_are_two_l_plus_one():
    expect = tuple(2.0 * l + 1 for l in range(11))
    assert s2s2_sqrt_symbol(10).values == expect
    assert so3_sqrt_symbol(10).values == expect


@pytest.mark.parametrize("l", [1, 2, 3])
def test_symbol_against_finite_differences(l):
    assert abs(rayleigh_sqrt_symbol(l) - s2s2_sqrt_symbol(3).values[l]) < 1e-4


def test_multiplier_spec():
    with pytest.raises(ValueError):
        MultiplierSpec((1.0, 0.0))
    a = MultiplierSpec((1.0, 2.0, 3.0))
    b = MultiplierSpec((2.0, 2.0))
    assert a.compose(b).values == (2.0, 4.0)
    c = HarmonicCoeffsSO3.single(2, 1, 0, 0, 1.0)
    assert a(c)[1, 0, 0] == 2.0
    with pytest.raises(ValueError):
        b(c)


def test_invert_slice_identity(rng):
    c = HarmonicCoeffsSO3.random(12, rng, real=False)
    assert invert_slice(radon_harmonic(c)).max_abs_diff(c) < 1e-14


def test_formula_a_matches_slice(rng):
    c = HarmonicCoeffsSO3.random(10, rng)
    P = radon_harmonic(c)
    assert invert_formula_a(P).max_abs_diff(invert_slice(P)) < 1e-12


def test_backprojection_matches_slice(rng):
    c = HarmonicCoeffsSO3.random(5, rng)
    F = s2s2_function(radon_harmonic(c))
    assert invert_backprojection(F, 5).max_abs_diff(c) < 1e-11


def test_frozen_table_shape():
    k = frozen_dual_symbol()
    assert len(k) >= 17
    assert k[0] == 1.0
    assert np.allclose([v * (2 * l + 1) for l, v in enumerate(k)], 1.0, atol=1e-12)


def test_frozen_matches_fresh_measurement():
    """Regression: re-measure the dual symbol and compare with the shipped table."""
    fresh = calibrate_dual_symbol(8)
    frozen = frozen_dual_symbol()[:9]
    assert np.max(np.abs(np.array(fresh) - np.array(frozen))) < 1e-12


def test_dual_scale_and_required_multiplier():
    k = dual_symbol(6)
    assert np.isclose(dual_scale(k), 1 / (4 * np.pi))
    assert np.allclose(required_multiplier(k), [2 * l + 1 for l in range(7)], rtol=1e-12)


def test_drift_is_detected(monkeypatch, rng):
    drifted = tuple(v * (1.01 if l == 3 else 1.0) for l, v in enumerate(frozen_dual_symbol()))
    monkeypatch.setattr(inv, "frozen_dual_symbol", lambda: drifted)
    c = HarmonicCoeffsSO3.random(4, rng)
    with pytest.raises(CalibrationError, match="degree 3"):
        invert_backprojection(s2s2_function(radon_harmonic(c)), 4)
    with pytest.raises(CalibrationError):
        invert_formula_a(radon_harmonic(c))


def test_dual_symbol_file_round_trip(tmp_path):
    k = frozen_dual_symbol()[:5]
    p = tmp_path / "d.txt"
    write_dual_symbol(p, k)
    assert read_dual_symbol(p) == k
    assert format_dual_symbol(k).startswith("dualsym v1 L=4\n0 0 0 1 0\n")


def test_dual_symbol_parse_errors():
    with pytest.raises(FormatError):
        parse_dual_symbol("dualsym v1 L=1\n0 0 0 1 0\n1 1 0 0.3 0\n")
    with pytest.raises(FormatError):
        parse_dual_symbol("dualsym v1 L=1\n0 0 0 1 0\n")


def test_multiplier_examples(rng):
    P = radon_harmonic(HarmonicCoeffsSO3.random(4, rng))
    from texradon.inversion import sqrt_multiplier_s2s2

    once = sqrt_multiplier_s2s2(P)
    twice = sqrt_multiplier_s2s2(once)
    assert np.array_equal(once.blocks[0], P.blocks[0])
    assert np.allclose(once.blocks[2], 5 * P.blocks[2])
    for l in range(5):
        assert np.allclose(twice.blocks[l], (2 * l + 1) ** 2 * P.blocks[l])


def test_constants_invert_to_constants():
    one = lambda h, r: np.ones(h.shape[:-1])  # noqa: E731
    expect = HarmonicCoeffsSO3.single(3, 0, 0, 0, 1.0)
    assert invert_backprojection(one, 3).max_abs_diff(expect) < 1e-13
    from texradon.harmonics import s2s2_analyze

    assert invert_slice(s2s2_analyze(one, 3)).max_abs_diff(expect) < 1e-14


def test_backprojection_keeps_degrees_apart():
    c = HarmonicCoeffsSO3.single(6, 4, 2, -3, 1.0)
    F = s2s2_function(radon_harmonic(c), real=False)
    out = invert_backprojection(F, 6)
    assert max(np.abs(out.blocks[l]).max() for l in range(7) if l != 4) < 1e-9


def test_kappa_positive_and_decreasing():
    k = np.array(frozen_dual_symbol())
    assert np.all(k > 0) and np.all(np.diff(k) < 0)


def test_calibration_is_bitwise_reproducible():
    assert calibrate_dual_symbol(4) == calibrate_dual_symbol(4)


def test_non_scalar_response_is_rejected(monkeypatch):
    import texradon.inversion as mod

    real_analyze = mod.so3_analyze
    monkeypatch.setattr(mod, "so3_analyze", lambda f, L: real_analyze(f, L) * 1.0 + HarmonicCoeffsSO3.single(L, L, 0, 1, 1e-6))
    with pytest.raises(CalibrationError, match="not scalar"):
        mod.measure_dual_symbol(2)


def test_unimodal_odf_from_sampled_pair_data():
    """Sample the pair function on a grid, analyze, invert, at L = 16."""
    from texradon.goniometry import OdfModel, make_odf
    from texradon.harmonics import s2s2_analyze
    from texradon.rotations import Rotation

    c = make_odf(OdfModel("unimodal", Rotation.from_euler(0.2, 0.9, -1.3), 20.0, 16))
    P = s2s2_analyze(s2s2_function(radon_harmonic(c)), 16)
    assert invert_formula_a(P).max_abs_diff(c) < 1e-10
    assert invert_slice(P).max_abs_diff(c) < 1e-10
