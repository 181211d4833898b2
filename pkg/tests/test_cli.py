import json
import math

import pytest

from majorate.cli import main
from majorate.service.schemas import EntropyResponse, RayleighResponse


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body_lines(text):
    """CSV payload without the timestamp header line."""
    return [l for l in text.splitlines() if not l.startswith("# timestamp")]


class TestCommands:
    def test_entropy_uniform(self, capsys):
        code, out, _ = run(capsys, "entropy", "--p", "[0.5,0.5]")
        assert code == 0
        row = out.strip().splitlines()[-1].split(",")
        assert float(row[0]) == pytest.approx(math.log(2))
        assert float(row[1]) == 0.0

    def test_check(self, capsys):
        code, out, _ = run(capsys, "check", "--a", "[1,0]", "--b", "[0.5,0.5]")
        assert code == 0
        assert out.strip().splitlines()[-1] == "True"

    def test_rate_expand_resonance(self, capsys):
        code, out, _ = run(capsys, "rate-expand", "--p", "[0.75,0.25]",
                           "--q", "[0.75,0.25]", "--n", "8")
        assert code == 0
        row = out.strip().splitlines()[-1].split(",")
        assert float(row[0]) == 1.0  # R_inf
        assert float(row[2]) == 0.0  # coefficient

    def test_epsilon_witness_column(self, capsys):
        code, out, _ = run(capsys, "epsilon", "--a", "[0.7,0.3]", "--b", "[0.9,0.1]")
        assert code == 0
        row = out.strip().splitlines()[-1].split(",")
        assert float(row[0]) == pytest.approx(0.2)
        assert row[3] == "0.7;0.3"

    def test_rayleigh_grid(self, capsys):
        code, out, _ = run(capsys, "rayleigh", "--nu", "4", "--mu-grid=-2:2:5")
        assert code == 0
        rows = out.strip().splitlines()[-5:]
        zs = [float(r.split(",")[1]) for r in rows]
        assert zs == sorted(zs)

    def test_convergence_n_grid(self, capsys):
        code, out, _ = run(capsys, "convergence", "--p", "[0.75,0.25]",
                           "--q", "[0.9,0.1]", "--n-grid", "4,8")
        assert code == 0
        data_rows = [l for l in out.splitlines()
                     if l and not l.startswith("#") and not l.startswith("n,")]
        assert len(data_rows) == 2


class TestExitCodes:
    def test_validation_error(self, capsys):
        code, _, err = run(capsys, "entropy", "--p", "[0.7,0.4]")
        assert code == 2
        assert "NotNormalised" in err

    def test_missing_flag(self, capsys):
        code, _, err = run(capsys, "entropy")
        assert code == 2
        assert "--p is required" in err

    def test_cap_error(self, capsys):
        code, _, err = run(capsys, "tail-scan", "--p", "[0.2,0.2,0.2,0.2,0.2]",
                           "--n", "300", "--cap-classes", "100")
        assert code == 3
        assert "ClassExplosion" in err


class TestOutputs:
    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "res.csv"
        code, out, _ = run(capsys, "entropy", "--p", "[0.5,0.5]",
                           "--out", str(target))
        assert code == 0
        assert out == ""
        assert target.read_text().endswith("0.69314718056,0,,\n")

    def test_determinism_excluding_timestamp(self, capsys):
        _, out1, _ = run(capsys, "rate-exact", "--p", "[0.75,0.25]",
                         "--q", "[0.9,0.1]", "--n", "6", "--eps", "0.1",
                         "--seed", "7")
        _, out2, _ = run(capsys, "rate-exact", "--p", "[0.75,0.25]",
                         "--q", "[0.9,0.1]", "--n", "6", "--eps", "0.1",
                         "--seed", "7")
        assert body_lines(out1) == body_lines(out2)

    def test_json_round_trip(self, capsys):
        code, out, _ = run(capsys, "entropy", "--p", "[0.75,0.25]",
                           "--format", "json")
        assert code == 0
        doc = json.loads(out)
        body = EntropyResponse.model_validate(doc["result"])
        assert body.H == pytest.approx(0.5623351446188083, abs=1e-11)
        assert doc["meta"]["command"] == "entropy"
        assert doc["meta"]["seed"] == 0

    def test_json_rows_round_trip(self, capsys):
        code, out, _ = run(capsys, "rayleigh", "--nu", "0.25",
                           "--mu-grid=-1:1:3", "--format", "json")
        doc = json.loads(out)
        body = RayleighResponse.model_validate(doc["result"])
        assert len(body.rows) == 3

    def test_twelve_significant_digits(self, capsys):
        _, out, _ = run(capsys, "entropy", "--p", "[0.5,0.5]")
        value = out.strip().splitlines()[-1].split(",")[0]
        assert value == "0.69314718056"

    def test_input_file_payload(self, capsys, tmp_path):
        payload = tmp_path / "req.json"
        payload.write_text(json.dumps({"a": {"entries": [1.0, 0.0]},
                                       "b": {"entries": [0.5, 0.5]}}))
        code, out, _ = run(capsys, "check", "--input", str(payload))
        assert code == 0
        assert out.strip().splitlines()[-1] == "True"

    def test_metadata_echo(self, capsys):
        _, out, _ = run(capsys, "check", "--a", "[1,0]", "--b", "[0.5,0.5]",
                        "--seed", "41")
        assert "# seed: 41" in out
        assert "# version:" in out
