import json

import numpy as np
import pytest

from ergodyn.cli import main
from ergodyn.emit import (
    format_series_csv,
    format_summary_json,
    format_sweep_csv,
    read_series_csv,
    write_series_csv,
)
from ergodyn.errors import ConfigError
from ergodyn.scenarios import (
    ScenarioConfig,
    load_config,
    parse_config_text,
    run_scenario,
    sweep,
)


def run(name, **overrides):
    cfg = load_config(None, {"scenario": name, **overrides})
    return run_scenario(cfg)


# ------------------------------------------------------------- config


def test_config_file_parsing_and_override(tmp_path):
    cfg_file = tmp_path / "case.cfg"
    cfg_file.write_text(
        "# comment line\n"
        "scenario = single-mode-superposition\n"
        "theta = 0.5\n"
        "omega = 1.5\n"
        "steps = 11\n"
        "comparison = true\n"
    )
    cfg = load_config(cfg_file, {"theta": "0.7"})
    assert cfg.scenario == "single-mode-superposition"
    assert cfg.theta == pytest.approx(0.7)  # flag wins over file
    assert cfg.omega == (1.5,)
    assert cfg.steps == 11
    assert cfg.comparison is True


def test_config_rejects_unknown_key():
    with pytest.raises(ConfigError):
        parse_config_text("not_a_key = 3\n")


def test_config_field_level_errors():
    with pytest.raises(ConfigError) as err:
        run("single-mode-superposition", theta="2.5")
    assert err.value.field == "theta"
    with pytest.raises(ConfigError) as err:
        run("single-mode-superposition", n="3", cutoffs="2")
    assert err.value.field == "cutoffs"
    with pytest.raises(ConfigError) as err:
        run("moon-degenerate", omega_b="1.9")
    assert err.value.field == "omega_b"
    with pytest.raises(ConfigError) as err:
        run("custom-state")
    assert err.value.field == "amplitudes"
    with pytest.raises(ConfigError) as err:
        run("custom-state", amplitudes="1,0,0", cutoffs="2", omega="1.0",
            engine="analytic")
    assert err.value.field == "engine"
    with pytest.raises(ConfigError):
        ScenarioConfig(scenario="nope").validated()


# ------------------------------------------------------------- scenarios


def test_eigenstate_channels_are_constant():
    series, summary = run("single-eigenstate", n="3", steps="101")
    np.testing.assert_allclose(series.channels["p_0"], 0.0, atol=1e-12)
    np.testing.assert_allclose(series.channels["p_3"], 1.0, atol=1e-12)
    assert summary["coherence"] == pytest.approx(0.0, abs=1e-12)


def test_degenerate_interferometer_is_constant():
    series, _ = run(
        "moon-degenerate", phi=str(np.pi / 4), steps="101", t_max="50"
    )
    np.testing.assert_allclose(series.channels["p_2_0"], 0.5, atol=1e-10)
    np.testing.assert_allclose(series.channels["p_0_1"], 0.5, atol=1e-10)


def test_gravitational_asymmetry_amplitude():
    series, summary = run("gravitational-mzi", steps="401")
    expected = 1e-2 * 1e5 / 6.371e6**2
    assert summary["asymmetry_amplitude"] == pytest.approx(expected, rel=1e-2)
    assert summary["asymmetry_closed_form"] == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "name,overrides",
    [
        ("single-mode-superposition", {"theta": str(np.pi / 3)}),
        ("single-eigenstate", {}),
        ("two-mode-separable", {}),
        ("multimode-product", {"ns": "1,2", "omega": "1.0,1.3"}),
        ("entangled-noon", {}),
        ("moon-degenerate", {}),
        ("moon-perturbative", {"eps": "1e-3"}),
        ("gravitational-mzi", {}),
    ],
)
def test_oracle_triangle_on_closed_form_scenarios(name, overrides):
    # all three engines agree wherever a closed form exists
    _, summary = run(name, steps="101", engine="all", **overrides)
    assert summary["engines_agree"], summary["residuals"]
    assert set(summary["residuals"]) == {
        "analytic_vs_exponential",
        "exponential_vs_rk4",
    }


def test_single_mode_with_ground_offset():
    # nonzero ground energy shifts the gap to n*omega - E0
    _, summary = run(
        "single-mode-superposition",
        theta=str(np.pi / 4),
        n="3",
        E0="0.5",
        steps="101",
    )
    assert summary["energy_gap"] == pytest.approx(2.5, abs=1e-12)
    assert summary["engines_agree"]


def test_single_mode_matches_closed_form_channels():
    series, summary = run(
        "single-mode-superposition", theta=str(np.pi / 3), n="2", steps="301"
    )
    t = series.times
    gap = 2.0
    c2 = np.cos(np.pi / 3) ** 2
    expected = c2 - c2 * np.sin(np.sin(np.pi / 3) * gap * t) ** 2
    np.testing.assert_allclose(series.channels["p_0"], expected, atol=1e-9)
    assert summary["omega_osc"] == pytest.approx(np.sin(np.pi / 3) * gap, abs=1e-12)
    assert summary["engines_agree"]


def test_comparison_channels_standard_dynamics_constant():
    series, _ = run(
        "single-mode-superposition",
        theta=str(np.pi / 4),
        n="3",
        steps="101",
        comparison="true",
    )
    np.testing.assert_allclose(series.channels["std_p_0"], 0.5, atol=1e-12)
    np.testing.assert_allclose(series.channels["std_p_3"], 0.5, atol=1e-12)
    np.testing.assert_allclose(series.channels["std_n_expect"], 1.5, atol=1e-12)
    delta = series.channels["delta_p_3"]
    assert delta[0] == pytest.approx(0.0, abs=1e-12)
    # peak deviation reaches 1/2 up to the grid resolution of the maximum
    assert delta.max() == pytest.approx(0.5, abs=5e-3)


def test_custom_state_channels_partition():
    series, summary = run(
        "custom-state",
        amplitudes="0.6,0,0.8,0",
        cutoffs="3",
        omega="1.0",
        steps="101",
    )
    total = sum(
        series.channels[name]
        for name in series.channels
        if name.startswith("p_") and name != "p_survival"
    )
    np.testing.assert_allclose(total, 1.0, atol=1e-9)
    assert summary["residuals"].keys() == {"exponential_vs_rk4"}


def test_multimode_periodicity_flag():
    _, summary = run(
        "multimode-product",
        ns="1,1",
        omega=f"{np.sqrt(2)},{3 * np.sqrt(2)}",
        base_omega="1.0",
        steps="51",
        engine="exponential",
    )
    assert summary["periodic"] is True
    _, summary = run(
        "multimode-product",
        ns="1,1",
        omega=f"{np.sqrt(2)},2.0",
        base_omega="1.0",
        steps="51",
        engine="exponential",
    )
    assert summary["periodic"] is False


def test_engine_selection_analytic_only():
    series, summary = run(
        "entangled-noon", engine="analytic", steps="101"
    )
    assert summary["residuals"] == {}
    p00, pnm = series.channels["p_0_0"], series.channels["p_2_3"]
    np.testing.assert_allclose(p00 + pnm, 1.0, atol=1e-12)


def test_perturbative_residual_scales_quadratically():
    residuals = {}
    for eps in ("1e-2", "1e-3"):
        _, summary = run(
            "moon-perturbative", eps=eps, steps="201", engine="all"
        )
        residuals[eps] = summary["residuals"]["analytic_vs_exponential"]
    ratio = residuals["1e-2"] / residuals["1e-3"]
    assert 50 <= ratio <= 200


# ------------------------------------------------------------- sweep


def test_sweep_omega_osc_column():
    cfg = load_config(
        None,
        {
            "scenario": "single-mode-superposition",
            "n": "2",
            "steps": "51",
            "engine": "exponential",
        },
    )
    thetas = [0.0, np.pi / 8, np.pi / 4, 3 * np.pi / 8, np.pi / 2]
    rows = sweep(cfg, "theta", thetas)
    gap = 2.0
    for row, theta in zip(rows, thetas):
        assert row["omega_osc"] == pytest.approx(np.sin(theta) * gap, abs=1e-9)


def test_sweep_rejects_unknown_parameter():
    cfg = load_config(None, {"scenario": "single-mode-superposition"})
    with pytest.raises(ConfigError):
        sweep(cfg, "engine", [1.0])


def test_sweep_empty_values_gives_header_only():
    table = format_sweep_csv([], "theta")
    assert table == (
        "theta,omega_osc,energy_gap,coherence,negativity,"
        "max_cross_engine_residual\n"
    )


# ------------------------------------------------------------- emission


def test_csv_shape_and_roundtrip(tmp_path):
    series, _ = run("single-mode-superposition", steps="3", t_max="1.0",
                    engine="exponential")
    text = format_series_csv(series)
    lines = text.splitlines()
    assert len(lines) == 4  # header + 3 samples
    assert lines[0].startswith("t,")
    assert not lines[0].endswith(",")
    path = tmp_path / "out.csv"
    write_series_csv(series, path)
    times, channels = read_series_csv(path)
    np.testing.assert_array_equal(times, series.times)
    for name, values in channels.items():
        np.testing.assert_array_equal(values, series.channels[name])


def test_emission_byte_stable(tmp_path):
    out = []
    for _ in range(2):
        series, summary = run("entangled-noon", steps="41", engine="exponential")
        out.append((format_series_csv(series), format_summary_json(summary)))
    assert out[0] == out[1]


def test_csv_probability_rows_sum_to_one(tmp_path):
    series, _ = run("two-mode-separable", steps="81", engine="exponential")
    path = tmp_path / "sep.csv"
    write_series_csv(series, path)
    _, channels = read_series_csv(path)
    total = (
        channels["p_0_0"]
        + channels["p_2_0"]
        + channels["p_0_3"]
        + channels["p_2_3"]
    )
    np.testing.assert_allclose(total, 1.0, atol=1e-9)


def test_summary_json_is_valid_and_sorted():
    _, summary = run("single-eigenstate", steps="21", engine="exponential")
    text = format_summary_json(summary)
    parsed = json.loads(text)
    assert parsed["scenario"] == "single-eigenstate"
    assert list(parsed) == sorted(parsed)


# ------------------------------------------------------------- CLI


def test_cli_run_writes_outputs(tmp_path, capsys):
    csv_path = tmp_path / "series.csv"
    json_path = tmp_path / "summary.json"
    code = main(
        [
            "run",
            "--scenario", "single-eigenstate",
            "--steps", "21",
            "--engine", "exponential",
            "--csv", str(csv_path),
            "--json", str(json_path),
        ]
    )
    assert code == 0
    assert csv_path.exists() and json_path.exists()
    summary = json.loads(json_path.read_text())
    assert summary["scenario"] == "single-eigenstate"
    stdout = capsys.readouterr().out
    assert '"single-eigenstate"' in stdout


def test_cli_config_file_with_flag_override(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("scenario = single-eigenstate\nsteps = 21\nn = 2\n")
    json_path = tmp_path / "s.json"
    code = main(
        [
            "run",
            "--config", str(cfg_file),
            "--n", "3",
            "--engine", "exponential",
            "--json", str(json_path),
        ]
    )
    assert code == 0
    assert json.loads(json_path.read_text())["config"]["n"] == 3


def test_cli_validation_error_exit_code(capsys):
    assert main(["run", "--scenario", "does-not-exist"]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_cli_compare_adds_channels(tmp_path):
    csv_path = tmp_path / "cmp.csv"
    code = main(
        [
            "compare",
            "--scenario", "single-mode-superposition",
            "--steps", "21",
            "--engine", "exponential",
            "--csv", str(csv_path),
        ]
    )
    assert code == 0
    header = csv_path.read_text().splitlines()[0]
    assert "std_p_0" in header and "delta_p_3" in header


def test_cli_sweep_table(capsys):
    code = main(
        [
            "sweep",
            "--scenario", "single-mode-superposition",
            "--steps", "31",
            "--engine", "exponential",
            "--parameter", "theta",
            "--values", "0,0.785398163,1.5707963",
        ]
    )
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("theta,omega_osc")
    assert len(lines) == 4


def test_cli_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert "gravitational-mzi" in out and "custom-state" in out


def test_cli_engine_disagreement_exit_code(monkeypatch, capsys):
    import ergodyn.scenarios as sc

    monkeypatch.setattr(sc, "TOL_RK4", 1e-30)
    code = main(
        [
            "run",
            "--scenario", "single-mode-superposition",
            "--steps", "21",
            "--engine", "all",
        ]
    )
    assert code == 3
    assert "engine disagreement" in capsys.readouterr().err


def test_cli_selftest_wiring(monkeypatch, capsys):
    import ergodyn.acceptance as acc
    from ergodyn.acceptance import CriterionResult

    def fake_pass():
        return CriterionResult(1, "stub", True, "ok")

    def fake_fail():
        return CriterionResult(2, "stub", False, "no")

    monkeypatch.setattr(acc, "CRITERIA", (fake_pass,))
    assert main(["selftest"]) == 0
    assert "PASS" in capsys.readouterr().out
    monkeypatch.setattr(acc, "CRITERIA", (fake_pass, fake_fail))
    assert main(["selftest"]) == 1
    assert "FAIL" in capsys.readouterr().out
