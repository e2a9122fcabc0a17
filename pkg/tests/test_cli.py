import csv
import io
import json

import pytest

from cavity_branching.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    metadata = {}
    lines = text.splitlines()
    body_start = 0
    for k, line in enumerate(lines):
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            metadata[key] = value
        else:
            body_start = k
            break
    reader = csv.reader(io.StringIO("\n".join(lines[body_start:])))
    rows = list(reader)
    return metadata, rows[0], rows[1:]


def test_point_symmetric_reports_unit_ratio(capsys):
    code, out, _ = run_cli(capsys, "point", "--gamma-b", "1", "--gamma-c", "1",
                           "--delta-b", "2", "--delta-c", "-2", "--g", "1",
                           "--delta", "0")
    assert code == 0
    ratio_line = next(line for line in out.splitlines() if line.startswith("ratio"))
    assert abs(float(ratio_line.split()[2]) - 1.0) < 1e-6
    assert "poles" in out


def test_point_rejects_zero_kappa(capsys):
    code, _, err = run_cli(capsys, "point", "--kappa", "0")
    assert code == 2
    assert "kappa" in err


def test_point_numerical_failure_exit_code(capsys):
    # closed c channel: the branching ratio is undefined
    code, _, err = run_cli(capsys, "point", "--gamma-c", "0")
    assert code == 3
    assert "ratio undefined" in err


def test_point_both_routes_reports_disagreement(capsys):
    code, out, _ = run_cli(capsys, "point", "--delta-b", "2", "--delta-c", "-2",
                           "--g", "1", "--delta", "2", "--route", "both")
    assert code == 0
    line = next(l for l in out.splitlines() if "disagreement" in l)
    assert float(line.split("=")[1]) < 1e-5


def test_point_json_round_trips_through_config(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "point", "--delta-b", "1.5", "--delta-c",
                           "-0.5", "--g", "0.8", "--delta", "1.1",
                           "--format", "json")
    assert code == 0
    payload = json.loads(out)
    config_path = tmp_path / "rerun.json"
    config_path.write_text(json.dumps(payload["config"]))
    code2, out2, _ = run_cli(capsys, "point", "--config", str(config_path),
                             "--format", "json")
    assert code2 == 0
    payload2 = json.loads(out2)
    assert payload2["p_b"] == payload["p_b"]
    assert payload2["ratio"] == payload["ratio"]


def test_point_flag_overrides_config(capsys, tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"params": {"gamma_b": 2.0,
                                                  "delta_b": 1.0,
                                                  "delta_c": 1.0}}))
    code, out, _ = run_cli(capsys, "point", "--config", str(config_path),
                           "--gamma-b", "4", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["config"]["params"]["gamma_b"] == 4.0
    # degenerate detunings: ratio equals gamma_b / gamma_c exactly
    assert payload["ratio"] == pytest.approx(4.0, rel=1e-9)


def test_config_rejects_unknown_keys(capsys, tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"sweep": {}}))
    code, _, err = run_cli(capsys, "point", "--config", str(config_path))
    assert code == 2
    assert "sweep" in err


def test_dynamics_csv_columns_and_balance(capsys):
    code, out, _ = run_cli(capsys, "dynamics", "--delta-b", "2", "--delta-c",
                           "-2", "--g", "1", "--delta", "2", "--t-max", "8",
                           "--samples", "101")
    assert code == 0
    _, header, rows = parse_csv(out)
    assert header[:3] == ["t", "alpha_re", "alpha_im"]
    first = dict(zip(header, map(float, rows[0])))
    assert first["t"] == 0.0 and first["alpha_sq"] == 1.0
    for row in rows:
        values = dict(zip(header, map(float, row)))
        total = values["norm"] + values["rho_bb"] + values["rho_cc"]
        assert abs(total - 1.0) < 1e-7


def test_dynamics_auto_t_max_decays(capsys):
    code, out, _ = run_cli(capsys, "dynamics", "--g", "0.5", "--delta", "1")
    assert code == 0
    _, header, rows = parse_csv(out)
    final = dict(zip(header, map(float, rows[-1])))
    assert final["norm"] < 1e-6


def test_figure_fig4_row_count(capsys):
    code, out, _ = run_cli(capsys, "figure", "fig4", "--points", "5")
    assert code == 0
    metadata, header, rows = parse_csv(out)
    assert len(rows) == 5 * 3
    assert metadata["figure"] == "fig4"


def test_figure_fig2_metadata_override(capsys):
    code, out, _ = run_cli(capsys, "figure", "fig2", "--points", "3",
                           "--omega-bc", "6")
    assert code == 0
    metadata, _, _ = parse_csv(out)
    assert metadata["omega_bc"] == "6"


def test_figure_fig3a_rows_are_unitary(capsys):
    code, out, _ = run_cli(capsys, "figure", "fig3a", "--points", "5")
    assert code == 0
    _, header, rows = parse_csv(out)
    i_b, i_c = header.index("p_b"), header.index("p_c")
    for row in rows:
        assert abs(float(row[i_b]) + float(row[i_c]) - 1.0) < 1e-6


def test_figure_fig3b_two_columns(capsys):
    code, out, _ = run_cli(capsys, "figure", "fig3b", "--t-max", "4",
                           "--samples", "51")
    assert code == 0
    metadata, header, rows = parse_csv(out)
    assert header == ["t", "alpha_sq_two_channel", "alpha_sq_single_channel"]
    assert float(rows[0][1]) == 1.0 and float(rows[0][2]) == 1.0


def test_figure_unknown_name_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["figure", "fig9"])
    assert info.value.code == 2
    err = capsys.readouterr().err
    assert "fig2" in err and "fig5" in err


def test_figure_output_deterministic(capsys, tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(["figure", "fig3a", "--points", "4", "--out", str(out1)]) == 0
    assert main(["figure", "fig3a", "--points", "4", "--out", str(out2),
                 "--workers", "2"]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_sweep_command_from_config(capsys, tmp_path):
    config = {
        "sweep": {
            "axes": [{"name": "drive_g", "values": [0.0, 1.0, 2.0]}],
            "base": {"gamma_b": 1.0, "gamma_c": 1.0, "delta_b": 2.0,
                     "delta_c": -2.0, "drive_detuning": 2.0},
        },
    }
    config_path = tmp_path / "sweep.json"
    config_path.write_text(json.dumps(config))
    code, out, _ = run_cli(capsys, "sweep", "--config", str(config_path))
    assert code == 0
    _, header, rows = parse_csv(out)
    assert len(rows) == 3
    ratio = float(rows[0][header.index("ratio")])
    assert abs(ratio - 1.0) < 1e-6


def test_sweep_requires_config(capsys):
    code, _, err = run_cli(capsys, "sweep")
    assert code == 2
    assert "config" in err


def test_selftest_fast_smoke(capsys):
    code, out, _ = run_cli(capsys, "selftest", "--fast", "--suite",
                           "drive_effect", "--suite", "dynamics_closed_forms")
    assert code == 0
    assert "PASS" in out and "drive_effect" in out


def test_selftest_unknown_suite_exits_2(capsys):
    code, _, err = run_cli(capsys, "selftest", "--suite", "nope")
    assert code == 2
    assert "unitarity" in err


def test_selftest_catches_injected_detuning_sign_error(capsys, monkeypatch):
    import cavity_branching.model as model_module

    true_resolvent = model_module.resolvent

    def mutated(z, params):
        return true_resolvent(z, params.replace(delta_b=-params.delta_b))

    monkeypatch.setattr(model_module, "resolvent", mutated)
    code, out, _ = run_cli(capsys, "selftest", "--fast", "--suite",
                           "symmetric_case")
    assert code == 1
    assert "FAIL" in out and "symmetric_case" in out
