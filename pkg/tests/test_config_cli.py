import csv
import json
from importlib import resources

import numpy as np
import pytest

from cliffordtm.cli import main, read_signal
from cliffordtm.config import RunConfig
from cliffordtm.exceptions import ConfigError, CliffordError
from cliffordtm.hardy import load_hardy
from cliffordtm.sphere import build_grid
from cliffordtm.tm import TMSystem

DATA = resources.files("cliffordtm") / "data"


def test_config_round_trip(tmp_path):
    cfg = RunConfig(m=3, quad_degree=30, n_max=4)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.to_json()))
    assert RunConfig.load(p) == cfg
    assert cfg.replace(seed=None, m=1).m == 1


@pytest.mark.parametrize("obj,key", [({"m": 9}, "m"), ({"r_max": 1.5}, "r_max"), ({"bogus": 1}, "bogus"), ({"n_max": 2.5}, "n_max"), ({"domain": "disk"}, "domain")])
def test_config_errors_name_the_key(obj, key):
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_dict(obj)
    assert exc.value.key == key


def test_malformed_config_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "m": 2,\n  "seed": ,\n}\n')
    with pytest.raises(ConfigError) as exc:
        RunConfig.load(p)
    assert exc.value.key == f"{p}:3"
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "missing.json")


def test_cli_verify_subset(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["verify", "--only", "algebra", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] and [c["criterion"] for c in report["checks"]] == [1, 2]
    assert "[PASS]  1 algebra_laws" in capsys.readouterr().out


def test_cli_verify_fails_with_low_degree(tmp_path):
    assert main(["verify", "--only", "kernels", "--quad-degree", "4", "--out", str(tmp_path / "r.json")]) == 1


def test_cli_monobasis(tmp_path):
    out = tmp_path / "basis.json"
    assert main(["monobasis", "--m", "2", "--k", "1", "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["self_grams"][0][0] == pytest.approx(2 / 3)
    assert obj["certificate"]["max_offdiagonal"] < 1e-12


def test_cli_tm(tmp_path):
    out = tmp_path / "tm.json"
    assert main(["tm", "--poles", str(DATA / "example_poles_m2.json"), "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert len(obj["atoms"]) == 5
    assert obj["gram_identity_defect"] < 1e-10
    back = TMSystem.from_json(obj)
    assert np.allclose(back.norms, obj["norms"])


def test_cli_tm_bad_input(tmp_path, capsys):
    p = tmp_path / "poles.json"
    p.write_text("[[0.1, 0.2]]")
    assert main(["tm", "--poles", str(p), "--out", str(tmp_path / "x.json")]) == 2
    assert "m+1 = 3" in capsys.readouterr().err
    p.write_text("[[0.1, 0.2,\n")
    assert main(["tm", "--poles", str(p)]) == 2


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_cli_afd(tmp_path):
    out = tmp_path / "run.csv"
    args = ["afd", "--input", str(DATA / "example_combo_m2.json"), "--n-max", "10", "--out", str(out), "--emit-plot-data"]
    assert main(args) == 0
    rows = read_csv(out)
    assert rows[0] == ["step", "pole_0", "pole_1", "pole_2", "dir_0", "dir_1", "dir_2", "coeff_sc", "coeff_e1", "coeff_e2", "coeff_e12", "term_energy", "residual_energy"]
    res = np.array([float(r[-1]) for r in rows[1:]])
    assert np.all(np.diff(res) <= 1e-12)
    f = load_hardy(DATA / "example_combo_m2.json")
    assert res[-1] < 1e-8 * f.norm_sq
    plot = read_csv(tmp_path / "run_residual.csv")
    assert float(plot[1][1]) == pytest.approx(f.norm_sq, rel=1e-10)
    # deterministic output
    out2 = tmp_path / "run2.csv"
    assert main(args[:-3] + ["--out", str(out2)]) == 0
    assert out.read_text() == out2.read_text()


def test_cli_afd_dimension_mismatch(tmp_path):
    assert main(["afd", "--m", "3", "--input", str(DATA / "example_combo_m2.json"), "--out", str(tmp_path / "r.csv")]) == 2


def test_cli_embed_ball(tmp_path):
    grid = build_grid(1, 20)
    sig = tmp_path / "sig.csv"
    lines = ['# {"m": 1, "degree": 20}', "index,value"] + [f"{i},{float(v)!r}" for i, v in enumerate(grid.nodes[:, 0])]
    sig.write_text("\n".join(lines) + "\n")
    out = tmp_path / "hardy.json"
    assert main(["embed", "--m", "1", "--signal", str(sig), "--out", str(out)]) == 0
    F = load_hardy(out)
    assert np.allclose(F.value(np.array([[0.2, -0.1]])), [[0.2, -0.1]], atol=1e-9)


def test_cli_embed_halfspace_sidecar(tmp_path):
    sig = tmp_path / "sig.csv"
    from cliffordtm.embed import FlatGrid

    grid = FlatGrid(1, 8.0, 40, 4)
    sig.write_text("\n".join(f"{i},{float(np.exp(-y[0] ** 2))!r}" for i, y in enumerate(grid.nodes)) + "\n")
    (tmp_path / "sig.json").write_text(json.dumps({"m": 1, "half_width": 8.0, "n_panels": 40, "order": 4}))
    out = tmp_path / "h.json"
    assert main(["embed", "--m", "1", "--domain", "halfspace", "--signal", str(sig), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["type"] == "cauchy_lift"


def test_read_signal_errors(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("0,1.0\n")
    with pytest.raises(CliffordError):
        read_signal(p)
    p.write_text('# {"m": 1}\n0,abc\n')
    with pytest.raises(CliffordError):
        read_signal(p)


def test_cli_algebra_op(tmp_path):
    a = tmp_path / "a.json"
    a.write_text(json.dumps({"m": 2, "coeffs": [1.0, 0.0, 0.0, 1.0]}))
    out = tmp_path / "inv.json"
    assert main(["algebra", "--a", str(a), "--op", "inverse", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["coeffs"] == [0.5, 0.0, 0.0, -0.5]
    assert main(["algebra", "--a", str(a), "--op", "mul"]) == 2
    b = tmp_path / "b.json"
    b.write_text(json.dumps({"m": 3, "coeffs": [1, 0, 0, 0, 0, 0, 0, 1]}))
    assert main(["algebra", "--a", str(b), "--op", "inverse"]) == 2
