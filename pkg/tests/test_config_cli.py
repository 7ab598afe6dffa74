import json

import numpy as np
import pytest

from cmnls_halfline import cli
from cmnls_halfline.config import DEFAULTS, load_config, quad_options
from cmnls_halfline.errors import (CFLViolationError, ParameterError, SchemaError, SolverInstabilityError,
                                   UnresolvedZeroError, ValidityDomainError)
from cmnls_halfline.fields import save_field_data

SMALL_TOML = """
name = "tiny"
[grid]
L = 20.0
T = 1.0
dx = 0.05
store_dt = 0.01
store_x_every = 1
{extra}
[initial]
u_amp = {u}
v_amp = {v}
"""


def write_config(tmp_path, u=0.0, v=0.0, extra=""):
    p = tmp_path / "run.toml"
    p.write_text(SMALL_TOML.format(u=u, v=v, extra=extra))
    return p


def test_defaults_validate():
    cfg = load_config()
    assert cfg == DEFAULTS
    assert cfg is not DEFAULTS


def test_toml_config(tmp_path):
    cfg = load_config(write_config(tmp_path, 0.1, 0.2))
    assert cfg["name"] == "tiny" and cfg["grid"]["dx"] == 0.05
    assert cfg["initial"]["v_amp"] == 0.2
    assert cfg["initial"]["width"] == DEFAULTS["initial"]["width"]


@pytest.mark.parametrize("over", [
    {"bogus": 1},
    {"grid": {"dy": 1}},
    {"grid": 3},
    {"tolerances": {"det": -1e-8}},
    {"tolerances": {"det": "small"}},
    {"grid": {"dx": 0.0}},
    {"model": {"epsilon": 2}},
    {"sampling": {"region_box": [1, 0, -1, 1]}},
])
def test_bad_overrides(over):
    with pytest.raises(ParameterError):
        load_config(overrides=over)


def test_missing_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "nope.toml")
    with pytest.raises(FileNotFoundError):
        load_config(overrides={"paths": {"dataset": str(tmp_path / "nope.json")}})


def test_quad_options_override():
    cfg = load_config(overrides={"quadrature": {"override_guard": True}})
    assert quad_options(cfg).override_guard
    assert not quad_options(cfg, fine=True).override_guard
    assert quad_options(load_config(), fine=True, override_guard=True).override_guard


@pytest.mark.parametrize("exc,code", [
    (SchemaError("x"), 3), (ParameterError("x"), 2), (CFLViolationError("x"), 4),
    (ValidityDomainError("x", column=1, growth=20.0), 4), (SolverInstabilityError("x"), 5),
    (UnresolvedZeroError("x"), 5), (FileNotFoundError("x"), 3), (json.JSONDecodeError("x", "", 0), 3),
])
def test_exit_code_mapping(exc, code):
    assert cli.exit_code_for(exc) == code


@pytest.fixture(scope="module")
def zero_file(tmp_path_factory, zero_data):
    p = tmp_path_factory.mktemp("data") / "zero.json"
    save_field_data(zero_data, p)
    return p


def test_usage_errors(tmp_path, zero_file):
    assert cli.main([]) == 2
    assert cli.main(["verify", "--config", str(tmp_path / "missing.toml"), "--dataset", str(zero_file)]) == 2
    assert cli.main(["verify", "--dataset", str(zero_file), "--suite", "nonsense",
                     "--out-dir", str(tmp_path)]) == 2
    assert cli.main(["verify", "--dataset", str(zero_file), "--threads", "0"]) == 2
    assert cli.main(["verify", "--out-dir", str(tmp_path)]) == 2


def test_corrupted_dataset_exit_3(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "cmnls-fielddata", "arrays": {"u0": ')
    assert cli.main(["verify", "--dataset", str(bad), "--out-dir", str(tmp_path)]) == 3
    assert cli.main(["global", "--dataset", str(tmp_path / "absent.json"), "--out-dir", str(tmp_path)]) == 3


def test_cfl_violation_exit_4(tmp_path):
    cfg = write_config(tmp_path, 0.3, 0.2, extra="dt = 0.01")
    assert cli.main(["generate", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 4


def test_reconstruct_without_interior_exit_4(tmp_path, zero_data):
    p = tmp_path / "bare.json"
    save_field_data(zero_data.replace(u_int=None, v_int=None), p)
    assert cli.main(["reconstruct", "--dataset", str(p), "--out-dir", str(tmp_path)]) == 4


def test_verify_zero_data_is_deterministic(tmp_path, zero_file, capsys):
    args = ["verify", "--dataset", str(zero_file), "--suite", "symmetry", "--suite", "global"]
    assert cli.main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out-dir", str(tmp_path / "b"), "--threads", "3"]) == 0
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()
    doc = json.loads(a)
    assert doc["pass"] and doc["suites"] == ["symmetry", "global"] and doc["failed"] == []
    meta = json.loads((tmp_path / "a" / "report.meta.json").read_text())
    assert meta["command"] == "verify" and "created_utc" in meta
    assert "PASS symmetry." in capsys.readouterr().out


def test_regions_csv(tmp_path):
    cfg = tmp_path / "r.json"
    cfg.write_text(json.dumps({"sampling": {"region_resolution": 80, "oracle_points": 500}}))
    assert cli.main(["regions", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
    rows = (tmp_path / "regions_raster.csv").read_text().splitlines()
    assert rows[0] == "re,im,code" and len(rows) == 80 * 80 + 1
    codes = {int(r.split(",")[2]) for r in rows[1:]}
    assert {1, 2, 3, 4} <= codes
    poly = (tmp_path / "regions_polylines.csv").read_text().splitlines()
    assert poly[0] == "curve,segment,re,im" and len(poly) > 10
    assert json.loads((tmp_path / "regions.json").read_text())["pass"]


def test_generate_writes_dataset(tmp_path):
    cfg = write_config(tmp_path, 0.3, 0.2)
    out = tmp_path / "out"
    assert cli.main(["generate", "--config", str(cfg), "--out-dir", str(out)]) == 0
    data = json.loads((out / "tiny.json").read_text())
    assert data["schema"] == "cmnls-fielddata"
    rep = json.loads((out / "generate.json").read_text())
    assert rep["name"] == "tiny" and len(rep["dataset_sha256"]) == 64
    assert rep["mass_drift"] < 1e-8
    assert (out / "generate.meta.json").exists()
    assert np.isfinite(rep["L"])
