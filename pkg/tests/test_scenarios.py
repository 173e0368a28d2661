import numpy as np
import pytest

from ipsw.domain import DgpSpec, ExtendedDgpSpec, trial_ate, true_ate, validate_dgp
from ipsw.errors import ParameterOutOfRange, ParseError, ValidationError
from ipsw.scenarios import (
    ADJUSTMENT_SETS,
    COVARIATES,
    GIRL,
    XSUP,
    NonshiftedModifier,
    SemiSynthParams,
    ShiftedNonModifier,
    ToyParams,
    config_hash,
    dumps,
    extended_document,
    heteroscedastic_dgp,
    load_config,
    load_spec,
    params_document,
    parse_adjustment,
    parse_document,
    semi_synthetic_design,
    semi_synthetic_dgp,
    serialize_spec,
    toy_dgp,
    toy_extended_dgp,
)
from ipsw.theory import effect_modifier_reduction, inflation_factor, var_pihat_exact


# -- toy -------------------------------------------------------------------------------


def test_toy_defaults(toy):
    assert trial_ate(toy) == pytest.approx(8.25, abs=1e-12)
    assert true_ate(toy) == pytest.approx(5.1, abs=1e-12)
    assert toy.p_R.min() == 0.25
    np.testing.assert_array_equal(toy.mean0, [0.0, 0.0])
    np.testing.assert_array_equal(toy.tau, [3.0, 10.0])
    assert validate_dgp(toy) == []


def test_toy_params_validate():
    with pytest.raises(ParameterOutOfRange):
        ToyParams(p_R1=1.0)
    with pytest.raises(ParameterOutOfRange):
        ToyParams(baseline_var=-1)
    spec = toy_dgp(ToyParams(p_R1=0.3))
    assert trial_ate(spec) == pytest.approx(true_ate(spec))


def test_toy_extended_modes():
    ext = toy_extended_dgp(mode=ShiftedNonModifier(q_T=(0.5, 0.5), q_R=(0.5, 0.5)))
    assert not ext.is_modifier and inflation_factor(ext.q_R, ext.q_T) == 1.0
    mod = toy_extended_dgp(mode=NonshiftedModifier())
    np.testing.assert_array_equal(mod.q_R, mod.q_T)
    np.testing.assert_array_equal(mod.tau_shift, [[-2, 2], [-2, 2]])
    assert effect_modifier_reduction(mod).variance_reduction > 0
    bal = toy_extended_dgp(mode=ShiftedNonModifier((0.5, 0.5), balanced=True))
    imb = toy_extended_dgp(mode=ShiftedNonModifier((0.5, 0.5), balanced=False))
    assert inflation_factor(imb.q_R, imb.q_T) > inflation_factor(bal.q_R, bal.q_T)
    with pytest.raises(ValidationError):
        toy_extended_dgp(mode=NonshiftedModifier(tau_shift=(1.0, 1.0)))


def test_extended_flatten_preserves_base_cate():
    ext = toy_extended_dgp(mode=NonshiftedModifier(q=(0.25, 0.75), tau_shift=(-3.0, 1.0)))
    flat = ext.flatten()
    assert true_ate(flat) == pytest.approx(true_ate(ext.base))
    tau = flat.tau.reshape(2, 2)
    np.testing.assert_allclose(tau @ ext.q_T, ext.base.tau)


def test_heteroscedastic_spec_favours_reweighting():
    spec = heteroscedastic_dgp()
    assert validate_dgp(spec) == []
    assert var_pihat_exact(spec, 500, 10_000) < 0.5 * (4 * 100 + 4 * 100) / 500


# -- semi-synthetic ----------------------------------------------------------------------------


def test_semi_synthetic_outcome_model():
    design = semi_synthetic_design(include_xsup=False)
    spec = design.spec
    assert design.names == COVARIATES and spec.size == 3 * 2 * 3 * 3 * 3 * 4
    lv = design.levels
    row = np.flatnonzero((lv[:, 0] == 1) & (lv[:, 1] == 1) & (lv[:, 5] == 1) & (lv[:, 4] == 2))[0]
    assert spec.mean0[row] == 9.0
    assert spec.tau[row] == 78.0
    girl = np.flatnonzero((lv[:, 0] == 1) & (lv[:, 1] == GIRL))[0]
    assert spec.mean0[girl] == 4.0
    assert validate_dgp(spec) == []


def test_semi_synthetic_cate_depends_only_on_ttt_and_bp():
    design = semi_synthetic_design(include_xsup=False)
    spec = design.spec
    key = design.groups(("ttt", "bp"))
    for g in np.unique(key):
        vals = spec.tau[key == g]
        assert np.all(vals == vals[0])
        w = spec.p_T[key == g]
        assert np.dot(w, vals) / w.sum() == pytest.approx(vals[0], abs=1e-12)


def test_semi_synthetic_noise_grows_with_ttt():
    design = semi_synthetic_design(include_xsup=False)
    ttt = design.column("ttt")
    sd = [np.sqrt(design.spec.var1[ttt == k][0]) for k in (1, 2, 3, 4)]
    assert sd == [2.0, 6.0, 10.0, 14.0]


def test_semi_synthetic_xsup_is_non_shifted_modifier():
    params = SemiSynthParams()
    design = semi_synthetic_design(params)
    assert design.names[-1] == XSUP
    base = semi_synthetic_dgp(params)
    assert design.spec.size == base.size * params.xsup_levels
    assert true_ate(design.spec) == pytest.approx(true_ate(base), abs=1e-9)
    xs = design.column(XSUP)
    shares_R = [design.spec.p_R[xs == v].sum() for v in range(1, 6)]
    shares_T = [design.spec.p_T[xs == v].sum() for v in range(1, 6)]
    np.testing.assert_allclose(shares_R, 0.2)
    np.testing.assert_allclose(shares_T, 0.2)
    assert semi_synthetic_design(SemiSynthParams(xsup_scale=0.0)).names == COVARIATES


def test_semi_synthetic_param_validation():
    bad = dict(SemiSynthParams().trial)
    bad["ttt"] = (0.5, 0.5, 0.5, 0.5)
    with pytest.raises(ParameterOutOfRange, match="trial.ttt"):
        SemiSynthParams(trial=bad)
    with pytest.raises(ParameterOutOfRange, match="noise_scale"):
        SemiSynthParams(noise_scale=(3, 2, 1, 0))
    with pytest.raises(ParameterOutOfRange):
        SemiSynthParams(trial={"ttt": (1, 0, 0, 0)})


def test_adjustment_parsing():
    design = semi_synthetic_design()
    assert parse_adjustment("minimal", design) == ("ttt", "bp")
    assert parse_adjustment("minimal+glasgow", design) == ADJUSTMENT_SETS["minimal+glasgow"]
    assert parse_adjustment("minimal+age", design) == ("ttt", "bp", "age")
    assert parse_adjustment("full", design) == design.names
    with pytest.raises(ParameterOutOfRange):
        parse_adjustment("minimal+shoe_size", design)
    g = design.groups(("ttt", "bp"))
    assert g.max() + 1 == 12
    assert np.all(design.groups(()) == 0)


def test_semi_synthetic_directions_in_theory():
    design = semi_synthetic_design()
    spec = design.spec
    def coarse(names):
        g = design.groups(ADJUSTMENT_SETS[names])
        k = g.max() + 1
        p_R = np.bincount(g, spec.p_R, k)
        p_T = np.bincount(g, spec.p_T, k)
        m1 = np.bincount(g, spec.p_R * spec.mean1, k) / p_R
        m0 = np.bincount(g, spec.p_R * spec.mean0, k) / p_R
        v1 = np.bincount(g, spec.p_R * (spec.var1 + spec.mean1**2), k) / p_R - m1**2
        v0 = np.bincount(g, spec.p_R * (spec.var0 + spec.mean0**2), k) / p_R - m0**2
        return DgpSpec(p_R=p_R, p_T=p_T, pi=0.5, mean0=m0, mean1=m1, var0=v0, var1=v1)

    # within a merged cell, trial units are i.i.d. from the trial mixture, so
    # its first two moments give the exact variance of the coarse estimator
    v_min = var_pihat_exact(coarse("minimal"), 3000, 10_000)
    assert var_pihat_exact(coarse("minimal+xsup"), 3000, 10_000) < v_min
    assert var_pihat_exact(coarse("minimal+glasgow"), 3000, 10_000) > v_min


def test_joint_csv(tmp_path):
    path = tmp_path / "joint.csv"
    rows = ["combo_id," + ",".join(COVARIATES) + ",p_R,p_T",
            "0,1,1,1,1,1,1,0.5,0.25",
            "1,2,2,1,1,2,4,0.5,0.75"]
    path.write_text("\n".join(rows) + "\n")
    doc = {"semi_synthetic": {"joint_csv": "joint.csv", "xsup_scale": 0.0}}
    cfg = parse_document(doc, base_dir=tmp_path)
    assert cfg.spec.size == 2
    np.testing.assert_allclose(cfg.spec.p_T, [0.25, 0.75])
    assert cfg.spec.tau[1] == 15 * 2 + 3
    path.write_text("combo_id,glasgow,p_R,p_T\n0,1,1,1\n")
    with pytest.raises(ParseError, match="missing columns"):
        parse_document(doc, base_dir=tmp_path)
    path.write_text("combo_id," + ",".join(COVARIATES) + ",p_R,p_T\n0,9,1,1,1,1,1,1,1\n")
    with pytest.raises(ParseError, match="glasgow=9"):
        parse_document(doc, base_dir=tmp_path)


# -- config documents --------------------------------------------------------------------------------


def test_round_trip_flat_spec(tmp_path, toy):
    path = tmp_path / "toy.toml"
    path.write_text(serialize_spec(toy))
    loaded = load_spec(path)
    assert loaded == toy
    assert load_config(path).kind == "strata"


def test_round_trip_named_scenarios(tmp_path):
    for doc, expect in (
        (params_document(ToyParams(tau1=12.0)), toy_dgp(ToyParams(tau1=12.0))),
        (params_document(SemiSynthParams()), semi_synthetic_design().spec),
    ):
        path = tmp_path / "c.toml"
        path.write_text(dumps(doc))
        assert load_config(path).spec == expect
    doc = {**params_document(ToyParams()), **extended_document(NonshiftedModifier())}
    path.write_text(dumps(doc))
    loaded = load_spec(path)
    assert isinstance(loaded, ExtendedDgpSpec)
    assert loaded == toy_extended_dgp(mode=NonshiftedModifier())
    doc = {**params_document(ToyParams()), **extended_document(ShiftedNonModifier(balanced=False))}
    assert parse_document(doc).extended.q_R.tolist() == [0.25, 0.75]


def test_p_T_not_normalized_is_named(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(
        "[[strata]]\np_R = 0.5\np_T = 0.5\npi = 0.5\nmean0 = 0\nmean1 = 1\n"
        "[[strata]]\np_R = 0.5\np_T = 0.7\npi = 0.5\nmean0 = 0\nmean1 = 1\n"
    )
    with pytest.raises(ValidationError, match="p_T"):
        load_spec(path)


def test_optional_fields_default(tmp_path):
    path = tmp_path / "min.toml"
    path.write_text(
        "[[strata]]\np_R = 0.4\np_T = 0.5\npi = 0.5\nmean0 = 0\nmean1 = 1\n"
        "[[strata]]\np_R = 0.6\np_T = 0.5\npi = 0.5\nmean0 = 0\nmean1 = 2\n"
    )
    spec = load_spec(path)
    assert spec.labels == ("0", "1")
    np.testing.assert_array_equal(spec.var0, [1.0, 1.0])


@pytest.mark.parametrize("text,match", [
    ("[[strata]]\np_R = 1.0\np_T = 1.0\npi = 0.5\nmean0 = 0\n", "mean1"),
    ("[[strata]]\np_R = 'a'\np_T = 1.0\npi = 0.5\nmean0 = 0\nmean1 = 1\n", r"strata\[0\].p_R"),
    ("[[strata]]\nid = 3\np_R = 1.0\np_T = 1.0\npi = 0.5\nmean0 = 0\nmean1 = 1\n", "ids"),
    ("[toy]\n[semi_synthetic]\n", "exactly one"),
    ("[toy]\nsize = 3\n", "unknown fields"),
    ("[toy]\n[extended]\nmode = 'sideways'\n", "extended.mode"),
    ("[oops]\n", "unknown top-level"),
    ("not = [toml\n", "bad.toml"),
])
def test_parse_errors_name_the_field(tmp_path, text, match):
    path = tmp_path / "bad.toml"
    path.write_text(text)
    with pytest.raises(ParseError, match=match):
        load_spec(path)


def test_invalid_toy_value_is_validation_error():
    with pytest.raises(ValidationError):
        parse_document({"toy": {"p_R1": 2.0}})


def test_missing_file_is_os_error(tmp_path):
    with pytest.raises(OSError):
        load_spec(tmp_path / "nope.toml")


def test_config_hash_is_stable():
    assert config_hash(b"abc") == config_hash(b"abc") != config_hash(b"abd")
