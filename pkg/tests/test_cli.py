import csv
import io
import json
import math

import pytest

from srvsim.cli import ExperimentConfig, ConfigError, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config: ")
    config = json.loads(lines[0][len("# config: "):])
    return config, list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


@pytest.mark.parametrize("argv", [
    ["correlate", "--protocol", "svozil"],
    ["correlate", "--protocol", "tb", "--omega", "1.0"],
    ["correlate", "--protocol", "ns", "--omega", "2.0"],
    ["correlate", "--n-samples", "0"],
    ["attack", "--n-sweep", "7"],
    ["svozil-curve", "--protocol", "tb"],
    ["correlate", "--protocol", "xyz"],
    ["chsh", "--settings", "0,1,2"],
    ["correlate", "--seed", "-1"],
])
def test_validation_exits_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 2
    err = capsys.readouterr().err.strip()
    assert err.startswith("error:") and "\n" not in err


def test_config_invariants():
    with pytest.raises(ConfigError):
        ExperimentConfig("correlate", "ns").validate()
    cfg = ExperimentConfig("correlate", "svozil", omega=1.5707963).validate()
    assert cfg.omega == math.pi / 2


def test_correlate_default_grid(capsys):
    code, out, _ = run(capsys, "correlate", "--protocol", "tb", "--n-samples", "20000", "--seed", "7")
    assert code == 0
    config, rows = table(out)
    assert config["seed"] == 7 and config["protocol"] == "tb"
    assert len(rows) == 17
    assert list(rows[0]) == ["theta", "empirical", "analytic", "stderr", "n", "seed"]
    thetas = [float(r["theta"]) for r in rows]
    assert thetas[1] == pytest.approx(math.pi / 16) and thetas[-1] == pytest.approx(math.pi)
    for r in rows:
        assert float(r["analytic"]) == pytest.approx(-math.cos(float(r["theta"])), abs=1e-8)


def test_correlate_svozil_analytic_column(capsys):
    code, out, _ = run(capsys, "correlate", "--protocol", "svozil", "--omega", "1.5707963",
                       "--n-samples", "1000")
    _, rows = table(out)
    by_theta = {round(float(r["theta"]), 6): float(r["analytic"]) for r in rows}
    assert by_theta[0.0] == -1.0
    assert by_theta[round(math.pi / 2, 6)] == 0.0


def test_json_mirrors_csv(capsys):
    args = ["correlate", "--protocol", "tb", "--n-samples", "5000", "--grid-points", "5"]
    _, csv_out, _ = run(capsys, *args)
    _, json_out, _ = run(capsys, *args, "--format", "json")
    config, rows = table(csv_out)
    doc = json.loads(json_out)
    assert doc["config"]["output_format"] == "json"
    assert len(doc["rows"]) == len(rows)
    for jr, cr in zip(doc["rows"], rows):
        assert list(jr) == list(cr)
        for k in cr:
            assert float(jr[k]) == float(cr[k])


def test_byte_identical_reruns(tmp_path):
    outs = []
    for workers in ("1", "3", "1"):
        path = tmp_path / f"run{len(outs)}.csv"
        assert main(["correlate", "--protocol", "ns", "--omega", "0.8", "--n-samples", "140000",
                     "--grid-points", "3", "--workers", workers, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_svozil_curve(capsys):
    code, out, _ = run(capsys, "svozil-curve", "--omega", "0.5", "--n-samples", "2000")
    _, rows = table(out)
    assert code == 0 and len(rows) == 33 and "quantum" in rows[0]


def test_chsh_rows(capsys):
    code, out, _ = run(capsys, "chsh", "--protocol", "svozil", "--omega", "1.5707963",
                       "--n-samples", "20000")
    _, rows = table(out)
    analytic, empirical = rows
    assert float(analytic["S_max"]) == 4.0
    assert float(analytic["two_term"]) == pytest.approx(2.0)
    assert abs(float(empirical["S_max"]) - 4.0) < 0.1
    _, out, _ = run(capsys, "chsh", "--protocol", "tb")
    assert float(table(out)[1][0]["S_max"]) == pytest.approx(2 * math.sqrt(2), abs=1e-8)
    _, out, _ = run(capsys, "chsh", "--protocol", "svozil", "--omega", "0")
    assert float(table(out)[1][0]["S_max"]) == pytest.approx(2.0, abs=1e-8)


def test_attack_tb_with_transcripts(tmp_path):
    path = tmp_path / "report.csv"
    assert main(["attack", "--protocol", "tb", "--n-sweep", "360", "--seed", "3",
                 "--out", str(path)]) == 0
    config, rows = table(path.read_text())
    row = rows[0]
    assert config["delta"] == pytest.approx(math.pi / 360)
    assert float(row["angular_error"]) <= 2 * math.pi / 360
    assert row["within_uncertainty"] == "true"
    assert int(row["cbits_per_round"]) == 1
    for name in row["transcripts"].split():
        lines = (tmp_path / name).read_text().splitlines()
        assert lines[0] == "index,l1x,l1y,l1z,l2x,l2y,l2z,alpha,beta,c"
        assert len(lines) == 721
        assert not lines[1].endswith(",")


def test_attack_ntb_has_no_cbits(tmp_path):
    path = tmp_path / "ntb.json"
    assert main(["attack", "--protocol", "ntb", "--seed", "3", "--format", "json",
                 "--out", str(path)]) == 0
    row = json.loads(path.read_text())["rows"][0]
    assert row["cbit_count"] == 0 and row["cbits_per_round"] == 0
    for name in row["transcripts"].split():
        assert all(line.endswith(",") for line in (tmp_path / name).read_text().splitlines()[1:])


def test_attack_ns_circle(capsys):
    code, out, _ = run(capsys, "attack", "--protocol", "ns", "--omega", "1.5707963", "--seed", "5")
    row = table(out)[1][0]
    assert code == 0 and float(row["angular_error"]) <= 2 * math.pi / 360


def test_attack_unlocatable_exits_1(capsys):
    code, _, err = run(capsys, "attack", "--protocol", "svozil", "--omega", "0")
    assert code == 1 and err.startswith("error:")


def test_random_seed_is_recorded(capsys):
    _, out, _ = run(capsys, "correlate", "--seed", "random", "--n-samples", "10", "--grid-points", "2")
    config, rows = table(out)
    assert 0 <= config["seed"] < 2**64
    assert int(rows[0]["seed"]) == config["seed"]
