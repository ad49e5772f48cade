"""Command line interface: outputs, config resolution, exit codes."""

import io
import json
import math

import numpy as np
import pytest

from onsim.cli import build_parser, main


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _parse_record_line(line: str) -> dict:
    out = {}
    for token in line.split():
        key, _, value = token.partition("=")
        out[key] = float(value)
    return out


def _load_csv(text: str) -> tuple[list, np.ndarray]:
    lines = text.strip().split("\n")
    data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)
    return lines[0].split(","), data


def test_gap_free_theory(capsys):
    code, out, err = _run(capsys, ["gap", "--w", "1", "--lambda", "0", "--beta", "0.5"])
    assert code == 0 and err == ""
    rec = _parse_record_line(out)
    closed = 1.0 / math.tanh(0.25) / 2.0
    assert abs(rec["x0"] - closed) < 1e-10
    assert rec["omega"] == 1.0
    assert abs(rec["residual"]) < 1e-12


def test_gap_zero_temperature(capsys):
    code, out, _ = _run(capsys, ["gap", "--w", "1", "--beta", "inf"])
    assert code == 0
    assert _parse_record_line(out)["x0"] == pytest.approx(0.5, abs=1e-12)


def test_gap_oracle_column(capsys):
    code, out, _ = _run(
        capsys,
        ["gap", "--w", "1", "--lambda", "1", "--beta", "0.5", "--oracle", "100000"],
    )
    assert code == 0
    rec = _parse_record_line(out)
    assert "oracle" in rec
    assert abs(rec["oracle"] - rec["x0"]) < 1e-5


def test_gap_rejects_falling_potential(capsys):
    code, out, err = _run(capsys, ["gap", "--coeffs", "1:-1", "--beta", "0.5"])
    assert code == 2
    assert "positive" in err


def test_simulate_free_theory(capsys):
    code, out, _ = _run(
        capsys,
        ["simulate", "--w", "1", "--lambda", "0", "--beta", "0.5", "--s", "1",
         "--n-periods", "3"],
    )
    assert code == 0
    header, data = _load_csv(out)
    assert header == ["t", "x", "x_dot", "u", "u_dot", "energy_x"]
    t, x, u = data[:, 0], data[:, 1], data[:, 3]
    x0 = 1.0 / math.tanh(0.25) / 2.0
    assert np.min(x) > x0 - 1e-8
    assert np.max(x) < x0 + 1.0 + 1e-8
    assert np.max(x) - np.min(x) > 0.9  # it actually oscillates
    assert float(np.max(np.abs(u - np.cos(t)))) < 1e-8
    assert abs(t[-1] - 3.0 * math.pi) < 1e-9


def test_simulate_static(capsys):
    code, out, _ = _run(
        capsys,
        ["simulate", "--w", "1", "--lambda", "1", "--beta", "0.5", "--s", "0",
         "--n-periods", "3"],
    )
    assert code == 0
    _, data = _load_csv(out)
    assert float(np.max(data[:, 1]) - np.min(data[:, 1])) < 1e-10


def test_simulate_span_flags_conflict(capsys):
    base = ["simulate", "--w", "1", "--beta", "0.5", "--s", "1"]
    assert _run(capsys, base + ["--t-end", "1", "--n-periods", "2"])[0] == 2
    assert _run(capsys, base)[0] == 2
    assert _run(capsys, base + ["--n-periods", "0"])[0] == 2


def test_model_flag_conflicts(capsys):
    code, _, err = _run(
        capsys,
        ["simulate", "--coeffs", "1:0.5", "--w", "1", "--beta", "0.5", "--s", "1",
         "--t-end", "1"],
    )
    assert code == 2 and "not both" in err
    assert _run(capsys, ["simulate", "--beta", "0.5", "--s", "1", "--t-end", "1"])[0] == 2
    assert _run(capsys, ["simulate", "--w", "1", "--s", "1", "--t-end", "1"])[0] == 2


def test_beta_parsing(capsys):
    assert _run(capsys, ["gap", "--w", "1", "--beta", "abc"])[0] == 2
    assert _run(capsys, ["gap", "--w", "1", "--beta", "-2"])[0] == 2
    assert _run(capsys, ["gap", "--w", "1", "--beta", "Infinity"])[0] == 0


def test_floquet_free_theory(capsys):
    code, out, _ = _run(
        capsys, ["floquet", "--w", "1", "--lambda", "0", "--beta", "0.5", "--s", "1"]
    )
    assert code == 0
    payload = json.loads(out)
    assert set(payload) == {
        "period", "x_f", "monodromy", "trace", "det_error",
        "symmetry_error", "multipliers", "classification",
    }
    assert payload["classification"] == "boundary"
    assert abs(payload["trace"] + 2.0) < 1e-7
    assert abs(payload["period"] - math.pi) < 1e-9
    assert len(payload["monodromy"]) == 2
    assert {"re", "im"} == set(payload["multipliers"][0])


def test_floquet_demo_point(capsys):
    code, out, _ = _run(
        capsys, ["floquet", "--w", "1", "--lambda", "1", "--beta", "0.5", "--s", "1"]
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["classification"] == "oscillatory"
    assert payload["det_error"] < 1e-8
    assert payload["symmetry_error"] < 1e-8


def test_beats_demo_point(capsys, tmp_path):
    env_path = tmp_path / "envelope.csv"
    code, out, _ = _run(
        capsys,
        ["beats", "--w", "1", "--lambda", "1", "--beta", "0.5", "--s", "1",
         "--n-periods", "30", "--envelope-csv", str(env_path)],
    )
    assert code == 0
    payload = json.loads(out)
    assert set(payload) == {
        "min_envelope", "max_envelope_late", "recurrence_ratio",
        "modulation_depth", "n_envelope_cycles",
    }
    assert 0.0 <= payload["min_envelope"] <= 1.0 + 1e-9
    assert payload["modulation_depth"] > 0.0
    env_lines = env_path.read_text().strip().split("\n")
    assert env_lines[0] == "t,amplitude"
    assert len(env_lines) >= 11


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "w": 1.0, "lambda": 0.0, "beta": 0.5, "s": 1.0, "n-periods": 2,
    }))
    code, out, _ = _run(capsys, ["simulate", "--config", str(cfg)])
    assert code == 0
    _, data = _load_csv(out)
    x0 = 1.0 / math.tanh(0.25) / 2.0
    assert abs(np.max(data[:, 1]) - (x0 + 1.0)) < 1e-8
    # explicit flag beats the file entry
    code, out, _ = _run(capsys, ["simulate", "--config", str(cfg), "--s", "2"])
    assert code == 0
    _, data = _load_csv(out)
    assert abs(np.max(data[:, 1]) - (x0 + 2.0)) < 1e-8


def test_config_file_errors(capsys, tmp_path):
    missing = tmp_path / "nope.json"
    assert _run(capsys, ["gap", "--config", str(missing)])[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    assert _run(capsys, ["gap", "--config", str(bad)])[0] == 2
    array = tmp_path / "array.json"
    array.write_text("[1, 2]")
    assert _run(capsys, ["gap", "--config", str(array)])[0] == 2


def test_scan_inline_single_point(capsys):
    code, out, err = _run(
        capsys,
        ["scan", "--w-values", "1", "--lambda-values", "0",
         "--beta-values", "0.5", "--s-values", "1"],
    )
    assert code == 0 and err == ""
    lines = out.strip().split("\n")
    assert lines[0].split(",")[0] == "w"
    assert len(lines) == 2
    assert lines[1].split(",")[9] == "boundary"


def test_scan_grid_file(capsys, tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({
        "w": [1.0], "lambda": [0.0, 1.0], "beta": [0.5], "s": [1.0],
    }))
    code, out, _ = _run(capsys, ["scan", "--grid", str(grid)])
    assert code == 0
    lines = out.strip().split("\n")
    assert len(lines) == 3
    assert lines[1].split(",")[9] == "boundary"
    assert lines[2].split(",")[9] == "oscillatory"

    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text(json.dumps({"w": [1.0], "lambda": [0.0]}))
    assert _run(capsys, ["scan", "--grid", str(incomplete)])[0] == 2


def test_scan_requires_a_grid(capsys):
    assert _run(capsys, ["scan"])[0] == 2
    assert _run(capsys, ["scan", "--w-values", "1"])[0] == 2


def test_scan_assert_stable_gate(capsys):
    args = ["scan", "--w-values", "1", "--lambda-values", "1",
            "--beta-values", "0.5", "--s-values", "1"]
    assert _run(capsys, args + ["--assert-stable"])[0] == 0
    # an absurdly tight unit-circle tolerance must trip the gate
    code, _, err = _run(capsys, args + ["--assert-stable", "1e-30"])
    assert code == 4
    assert "resonance gate" in err


def test_scan_failed_point_reporting(capsys):
    args = ["scan", "--coeffs-values", "1:0.5;1:-1",
            "--beta-values", "0.5", "--s-values", "1"]
    code, out, err = _run(capsys, args)
    assert code == 0
    assert "scan point failed" in err
    assert out.strip().split("\n")[2].split(",")[8] == "error"
    code, _, err = _run(capsys, args + ["--assert-stable"])
    assert code == 3
    assert "cannot certify" in err


def test_output_file(capsys, tmp_path):
    target = tmp_path / "gap.txt"
    code, out, _ = _run(
        capsys, ["gap", "--w", "1", "--beta", "0.5", "--out", str(target)]
    )
    assert code == 0
    assert out == ""
    assert target.read_text().startswith("x0=")


def test_byte_identical_reruns(capsys):
    args = ["floquet", "--w", "1", "--lambda", "1", "--beta", "0.5", "--s", "1"]
    first = _run(capsys, args)
    second = _run(capsys, args)
    assert first == second
    args = ["simulate", "--w", "1", "--lambda", "1", "--beta", "0.5", "--s", "1",
            "--n-periods", "2"]
    assert _run(capsys, args) == _run(capsys, args)


def test_unknown_arguments_exit_two(capsys):
    assert main(["gap", "--w", "1", "--beta", "0.5", "--bogus"]) == 2
    assert main(["not-a-command"]) == 2
    capsys.readouterr()


def test_help_documents_every_flag(capsys):
    parser = build_parser()
    subparsers = next(
        a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction"
    )
    for name, sub in subparsers.choices.items():
        code = main([name, "--help"])
        help_text = capsys.readouterr().out
        assert code == 0
        for action in sub._actions:
            for opt in action.option_strings:
                if opt.startswith("--"):
                    assert opt in help_text, f"{name} help misses {opt}"
