import json
import subprocess
import sys

import pytest

from ewens_moments.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _header(text):
    first = text.splitlines()[0]
    assert first.startswith("# config: ")
    return json.loads(first[len("# config: "):])


def test_verify_small_passes(capsys):
    code, out, _ = run(["verify", "--n", "8", "--theta", "2", "--orders", "4"], capsys)
    assert code == 0
    assert '"passed": true' in out
    assert ",false" not in out


def test_instance_lugo_json(capsys):
    code, out, _ = run(["--n", "20000", "--theta", "2", "instance", "--kind", "lugo",
                        "--gamma", "0.3333333", "--delta", "0.5"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["command"] == "instance"
    text = json.dumps(doc)
    for key in ("upsilon", "gap", "finite_n"):
        assert key in text


def test_malformed_spec_exit_3(capsys):
    code, _, err = run(["moments", "--n", "5", "--spec", "{bad"], capsys)
    assert code == 3
    assert "spec" in err


def test_unknown_subcommand_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_domain_and_resource_codes(capsys):
    assert run(["--theta", "-1", "moments", "--n", "5"], capsys)[0] == 4
    assert run(["tv", "--n", "2000", "--r", "10", "--method", "enumerate"], capsys)[0] == 5


def test_sample_reproducible_from_header(capsys, tmp_path):
    argv = ["sample", "--n", "12", "--theta", "3/2", "--count", "3000", "--seed", "9", "--orders", "3"]
    code, first, _ = run(argv, capsys)
    assert code == 0
    cfg = _header(first)
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps(cfg["spec"]))
    again = ["sample", "--n", str(cfg["n"]), "--theta", cfg["theta"], "--count", str(cfg["count"]),
             "--seed", str(cfg["seed"]), "--orders", str(cfg["orders"]), "--method", cfg["method"],
             "--spec", str(spec_file)]
    code, second, _ = run(again, capsys)
    assert code == 0
    assert second == first


def test_out_path_and_formats(capsys, tmp_path):
    target = tmp_path / "tv.json"
    code, out, _ = run(["--format", "json", "--out", str(target), "tv", "--n", "60", "--r", "1,5,60"], capsys)
    assert code == 0 and out == ""
    doc = json.loads(target.read_text())
    values = [row["tv"] for row in doc["tv"]]
    assert values == sorted(values)


def test_moments_csv_columns(capsys):
    code, out, _ = run(["moments", "--n", "30", "--theta", "2", "--spec", '{"explicit": {"1": 1}}',
                        "--orders", "3"], capsys)
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines[0].split(",")[:2] == ["l", "exact_gamma"]
    assert len(lines) == 4


def test_spectral_subcommand(capsys):
    code, out, _ = run(["spectral", "--n", "20", "--count", "50", "--window", "0:1/4"], capsys)
    assert code == 0
    assert _header(out)["command"] == "spectral"


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "ewens_moments.cli", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "verify" in out.stdout
