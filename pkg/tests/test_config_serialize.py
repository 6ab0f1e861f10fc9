import json

import numpy as np
import pytest

from entdistill.channels import chi_ideal
from entdistill.config import (
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    config_to_dict,
    derive_seed,
    parse_config,
    seed_int,
)
from entdistill.serialize import (
    counts_csv,
    counts_from_dict,
    counts_to_dict,
    dumps_json,
    emit,
    fmt_real,
    matrix_csv,
    matrix_from_dict,
    matrix_to_dict,
    parse_counts_csv,
    read_counts,
    report_csv,
    table_csv,
)
from entdistill.states import bell, density_from_ket, make_mixed_approx
from entdistill.tomography import simulate_counts

ROW1 = {
    "family": "phi",
    "epsilon": 0.59,
    "lambda": 0.54,
    "t_v": 0.3777,
    "acquisition_scale": 4490,
    "noise": "poisson",
    "seed": 7,
    "mc_trials": 1000,
}


def test_minimal_config_defaults():
    cfg = config_from_dict({"epsilon": 0.49, "t_v": 0.2401})
    assert (cfg.lam, cfg.theta, cfg.acquisition_scale, cfg.noise) == (0.0, 0.0, 10000.0, "none")
    assert cfg.method == "linear" and cfg.family == "phi" and cfg.seed == 0


@pytest.mark.parametrize(
    "doc,key",
    [
        ({"epsilon": -0.1}, "epsilon"),
        ({"epsilon": 0.5, "lambda": 1.5}, "lambda"),
        ({"epsilon": 0.5, "bogus": 1}, "bogus"),
        ({"epsilon": 0.5, "family": "chi"}, "family"),
        ({"epsilon": 0.5, "tv_list": [0.1, 2.0]}, "tv_list[1]"),
        ({"epsilon": 0.5, "seed": -3}, "seed"),
        ({"epsilon": 0.5, "seed": 1.5}, "seed"),
        ({"epsilon": 0.5, "acquisition_scale": 0}, "acquisition_scale"),
        ({"epsilon": "half"}, "epsilon"),
        ({"epsilon": 0.5, "noise": None}, "noise"),
        ({"epsilon": 0.5, "mc_trials": 1}, "mc_trials"),
    ],
)
def test_config_errors_name_the_key(doc, key):
    with pytest.raises(ConfigError) as exc:
        config_from_dict(doc)
    assert str(exc.value).startswith(key + ":")


@pytest.mark.parametrize(
    "command,missing",
    [("distill", "t_v"), ("qpt", "tv_true"), ("qst", "counts_file"), ("sweep-eps", "eps_list")],
)
def test_required_keys_per_command(command, missing):
    with pytest.raises(ConfigError, match=f"^{missing}: required"):
        config_from_dict({"epsilon": 0.5, "t_v": 0.3} if missing != "t_v" else {"epsilon": 0.5}, command)


def test_table1_needs_nothing():
    assert config_from_dict({}, "table1") == ExperimentConfig()


def test_parse_config_file(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(ROW1))
    cfg = parse_config(p, "distill")
    assert cfg.lam == 0.54 and cfg.mc_trials == 1000
    bad = tmp_path / "bad.json"
    bad.write_text("{epsilon: 1")
    with pytest.raises(ConfigError, match="not valid JSON"):
        parse_config(bad)


def test_config_round_trip():
    cfg = config_from_dict(ROW1)
    doc = config_to_dict(cfg)
    assert config_from_dict(doc) == cfg
    assert dumps_json(doc) == dumps_json(config_to_dict(config_from_dict(json.loads(dumps_json(doc)))))


def test_derive_seed_stable():
    a = seed_int(derive_seed(5, 1, 2))
    assert a == seed_int(derive_seed(5, 1, 2))
    assert a != seed_int(derive_seed(5, 2, 1))
    assert a != seed_int(derive_seed(6, 1, 2))


def test_fmt_real():
    assert fmt_real(1 / 3) == "0.333333333333"
    assert fmt_real(-0.0) == "0"
    assert fmt_real(float("nan")) == ""
    assert fmt_real(1e-20) == "1e-20"


def test_bell_matrix_json():
    doc = matrix_to_dict(density_from_ket(bell()), "two_qubit")
    assert list(doc) == ["basis", "dim", "entries"]
    assert doc["basis"] == "HH,HV,VH,VV"
    assert doc["entries"][0][0] == [0.5, 0.0] and doc["entries"][3][3] == [0.5, 0.0]
    assert doc["entries"][0][3] == [0.5, 0.0]


def test_chi_matrix_json():
    doc = matrix_to_dict(chi_ideal(0.0), "pauli")
    assert doc["basis"] == "I,X,Y,Z"
    quarter = [doc["entries"][i][j] for i in (0, 3) for j in (0, 3)]
    assert quarter == [[0.25, 0.0]] * 4


def test_matrix_requires_basis_for_4x4():
    with pytest.raises(ValueError, match="basis"):
        matrix_to_dict(np.eye(4))


def test_matrix_round_trip_byte_identical():
    m = make_mixed_approx(0.59, 0.54) + 1e-3j * np.triu(np.ones((4, 4)), 1)
    text = dumps_json(matrix_to_dict(m, "two_qubit"))
    back, basis = matrix_from_dict(json.loads(text))
    assert dumps_json(matrix_to_dict(back, basis)) == text
    assert matrix_csv(back, basis).splitlines()[0] == "row,col,re,im"


def test_counts_csv_round_trip():
    t = simulate_counts(make_mixed_approx(0.59, 0.54), acquisition_scale=4490, noise="poisson", seed=1)
    text = counts_csv(t)
    assert text.splitlines()[0] == "arm1,arm2,count"
    assert "\r" not in text
    back = parse_counts_csv(text, t.acquisition_scale)
    assert counts_csv(back) == text
    assert back.entries == t.entries
    with pytest.raises(ValueError, match="header"):
        parse_counts_csv("a,b,c\n")


def test_counts_json_round_trip(tmp_path):
    t = simulate_counts(density_from_ket(bell()), acquisition_scale=1000)
    text = dumps_json(counts_to_dict(t))
    assert dumps_json(counts_to_dict(counts_from_dict(json.loads(text)))) == text
    p = emit(t, tmp_path / "c.json")
    assert dumps_json(counts_to_dict(read_counts(p))) == text
    p = emit(t, tmp_path / "c.csv", "csv")
    assert counts_csv(read_counts(p)) == counts_csv(t)


def test_report_and_table_csv():
    text = report_csv({"a": 1, "b": {"c": 0.5, "d": float("nan")}, "e": True})
    assert text == "key,value\na,1\nb.c,0.5\nb.d,\ne,true\n"
    rows = [{"x": 1.0, "y": "phi"}, {"x": 2.5, "y": "psi"}]
    assert table_csv(rows) == "x,y\n1,phi\n2.5,psi\n"


def test_json_nan_is_null():
    assert json.loads(dumps_json({"v": float("nan")})) == {"v": None}


def test_emit_rejects_format(tmp_path):
    with pytest.raises(ValueError, match="format"):
        emit({"a": 1}, tmp_path / "x.yaml", "yaml")
