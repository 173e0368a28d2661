import numpy as np
import pytest
from hypothesis import given

from ipsw.domain import (
    DgpSpec,
    ExtendedDgpSpec,
    TargetSample,
    TrialSample,
    probability_ratio,
    trial_ate,
    true_ate,
    validate_dgp,
)
from ipsw.errors import (
    InvalidStratumId,
    NegativeVariance,
    ProbabilityNotNormalized,
    PiOutOfRange,
    SupportViolation,
    TauShiftNotCentered,
    ValidationError,
)
from strategies import specs


def test_toy_is_valid(toy):
    assert validate_dgp(toy) == []
    np.testing.assert_array_equal(toy.p_R, [0.25, 0.75])
    np.testing.assert_array_equal(toy.p_T, [0.7, 0.3])


def test_missing_trial_support_is_reported():
    spec = DgpSpec(p_R=[1.0, 0.0], p_T=[0.9, 0.1], pi=0.5, mean0=0, mean1=1, var0=1, var1=1)
    errs = validate_dgp(spec)
    assert [type(e) for e in errs] == [SupportViolation]


def test_boundary_pi_is_rejected():
    spec = DgpSpec(p_R=[0.5, 0.5], p_T=[0.5, 0.5], pi=1.0, mean0=0, mean1=1, var0=1, var1=1)
    assert [type(e) for e in validate_dgp(spec)] == [PiOutOfRange]


def test_all_violations_are_collected():
    spec = DgpSpec(p_R=[0.6, 0.6], p_T=[1.0, 0.0], pi=[0.0, 0.5], mean0=0, mean1=1, var0=[-1, 1], var1=1)
    kinds = {type(e) for e in validate_dgp(spec)}
    assert kinds == {ProbabilityNotNormalized, PiOutOfRange, NegativeVariance}
    with pytest.raises(ValidationError) as info:
        spec.check()
    assert "p_R" in str(info.value)


def test_strata_absent_from_both_populations_are_dropped():
    spec = DgpSpec(p_R=[0.5, 0.0, 0.5], p_T=[0.2, 0.0, 0.8], pi=0.5, mean0=[0, 9, 1], mean1=[1, 9, 2],
                   var0=1, var1=1, labels=("a", "gone", "c"))
    assert spec.size == 2
    assert spec.labels == ("a", "c")
    np.testing.assert_array_equal(spec.mean0, [0, 1])


def test_arrays_are_read_only(toy):
    with pytest.raises(ValueError):
        toy.p_R[0] = 0.5


def test_probability_ratio(toy):
    assert probability_ratio(toy, 1) == pytest.approx(0.4, abs=1e-15)
    assert probability_ratio(toy, 0) == pytest.approx(2.8, abs=1e-15)
    same = toy.replace(p_T=toy.p_R)
    assert probability_ratio(same, 0) == 1.0 and probability_ratio(same, 1) == 1.0
    with pytest.raises(InvalidStratumId):
        probability_ratio(toy, 2)


def test_target_and_trial_ate(toy):
    assert true_ate(toy) == pytest.approx(5.1, abs=1e-12)
    assert trial_ate(toy) == pytest.approx(8.25, abs=1e-12)
    const = toy.replace(mean1=[4.0, 4.0])
    assert true_ate(const) == pytest.approx(4.0) and trial_ate(const) == pytest.approx(4.0)
    single = DgpSpec(p_R=[1.0], p_T=[1.0], pi=0.5, mean0=1.0, mean1=3.5, var0=1, var1=1)
    assert true_ate(single) == 2.5


@given(specs())
def test_ate_gap_is_the_shift_weighted_effect(spec):
    gap = np.dot(spec.p_T - spec.p_R, spec.tau)
    assert abs(true_ate(spec) - trial_ate(spec) - gap) <= 1e-9 * (1 + np.abs(spec.tau).max())
    assert true_ate(spec.replace(p_T=spec.p_R)) == pytest.approx(trial_ate(spec), abs=1e-9)


@given(specs())
def test_weights_average_to_one_under_the_trial(spec):
    assert abs(np.dot(spec.p_R, spec.weights) - 1.0) <= 1e-12


def test_trial_sample_validation():
    s = TrialSample([0, 1, 1], [1, 0, 1], [1.0, 2.0, 3.0])
    assert s.n == 3
    with pytest.raises(ValueError):
        TrialSample([0, 1], [1, 2], [1.0, 2.0])
    with pytest.raises(ValueError):
        TrialSample([0, 1], [1], [1.0, 2.0])
    with pytest.raises(InvalidStratumId):
        TrialSample([-1], [1], [1.0])
    with pytest.raises(InvalidStratumId):
        TrialSample([0.5], [1], [1.0])
    with pytest.raises(ValueError):
        TargetSample([])


def test_extended_spec_flattening(toy):
    ext = ExtendedDgpSpec(toy, [0.5, 0.5], [0.5, 0.5], tau_shift=[[-2, 2], [-2, 2]])
    flat = ext.check().flatten()
    assert flat.size == 4
    np.testing.assert_allclose(flat.p_R, [0.125, 0.125, 0.375, 0.375])
    np.testing.assert_allclose(flat.tau, [1, 5, 8, 12])
    assert true_ate(flat) == pytest.approx(true_ate(toy), abs=1e-12)
    np.testing.assert_array_equal(ext.coarsen_map(), [0, 0, 1, 1])
    assert ext.flat_index(1, 0) == 2


def test_extended_spec_rejects_uncentered_shift(toy):
    ext = ExtendedDgpSpec(toy, [0.5, 0.5], [0.5, 0.5], tau_shift=[[1, 2], [0, 0]])
    with pytest.raises(ValidationError) as info:
        ext.check()
    assert any(isinstance(v, TauShiftNotCentered) for v in info.value.violations)


def test_extended_spec_requires_every_level_in_trial(toy):
    with pytest.raises(ValidationError):
        ExtendedDgpSpec(toy, [1.0, 0.0], [0.5, 0.5]).check()


def test_non_modifier_extension_keeps_target_ate(toy):
    ext = ExtendedDgpSpec(toy, [0.2, 0.8], [0.6, 0.4]).check()
    assert true_ate(ext.flatten()) == pytest.approx(true_ate(toy), abs=1e-12)
    assert not ext.is_modifier and ext.is_shifted
