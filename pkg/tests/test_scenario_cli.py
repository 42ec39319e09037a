"""Scenario schema validation, builders, and the command-line front end."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from contactrel import (
    GaussianMomentum,
    ParseError,
    ValidationError,
    build_density_spec,
    build_initial_state,
    build_integrator_config,
    build_system,
    load_scenario,
    preset_names,
    preset_scenario,
    serialize_scenario,
)
from contactrel.cli import main


def _minimal(**overrides) -> dict:
    doc = {
        "metric": {"kind": "minkowski"},
        "mass": {"kind": "constant", "m0": 1.0},
        "initial": {"kind": "single", "p_spatial": [0.5, 0.0, 0.0]},
        "stop": [{"kind": "lambda_reached", "value": 1.0}],
    }
    doc.update(overrides)
    return doc


def _gas_doc(**outputs) -> dict:
    return {
        "name": "small-gas",
        "metric": {"kind": "minkowski"},
        "mass": {"kind": "exp_decay", "m0": 1.0, "alpha": 0.1},
        "initial": {
            "kind": "ensemble",
            "n": 200,
            "seed": 4,
            "momentum": {"kind": "gaussian", "mean": [0, 0, 0], "sigma": [0.2, 0.2, 0.2]},
        },
        "stop": [{"kind": "lambda_reached", "value": 1.0}],
        "outputs": {"path": "gas", "reports": 4, "snapshot_stride": 2, **outputs},
    }


# ---------------------------------------------------------------------------
# schema


def test_minimal_scenario_fills_defaults():
    cfg = load_scenario(_minimal())
    assert cfg.name == "scenario"
    assert cfg.c == 1.0
    assert cfg.initial["q0"] == [0.0, 0.0, 0.0, 0.0]
    assert cfg.initial["phi0"] == 0.0
    assert cfg.initial["allow_off_shell"] is False
    assert cfg.integrator["method"] == "rk45"
    assert cfg.integrator["rel_tol"] == 1e-10
    assert cfg.integrator["abs_tol"] == 1e-12
    assert cfg.outputs["format"] == "csv"
    assert cfg.outputs["stride"] == 1
    assert cfg.outputs["reports"] == 50
    assert cfg.outputs["reparametrize_phi"] is False


def test_unknown_top_level_key_rejected():
    with pytest.raises(ValidationError, match="speed"):
        load_scenario(_minimal(speed=3.0))


def test_unknown_nested_key_rejected():
    with pytest.raises(ValidationError, match="integrator.step"):
        load_scenario(_minimal(integrator={"step": 0.1}))


def test_missing_point_mass_strength_rejected():
    doc = _minimal(metric={"kind": "weak_field", "potential": {"kind": "point_mass"}})
    with pytest.raises(ValidationError, match="potential.GM"):
        load_scenario(doc)


def test_zero_rest_mass_in_decay_law_rejected():
    with pytest.raises(ValidationError, match="mass.m0"):
        load_scenario(_minimal(mass={"kind": "exp_decay", "m0": 0.0, "alpha": 0.1}))


def test_negative_decay_rate_is_allowed():
    cfg = load_scenario(_minimal(mass={"kind": "exp_decay", "m0": 1.0, "alpha": -0.1}))
    assert cfg.mass["alpha"] == -0.1


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as err:
        load_scenario('{\n  "metric": }')
    assert err.value.line == 2
    assert "line 2" in str(err.value)


def test_non_object_document_rejected(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2, 3]")
    with pytest.raises(ValidationError, match="must be a JSON object"):
        load_scenario(path)


def test_momentum_input_must_be_exactly_one():
    init = {"kind": "single", "p_spatial": [0.5, 0, 0], "v": [0.5, 0, 0]}
    with pytest.raises(ValidationError, match="exactly one"):
        load_scenario(_minimal(initial=init))
    with pytest.raises(ValidationError, match="exactly one"):
        load_scenario(_minimal(initial={"kind": "single"}))


def test_off_shell_momentum_needs_explicit_flag():
    init = {"kind": "single", "p": [-2.0, 0.0, 0.0, 0.0]}
    cfg = load_scenario(_minimal(initial=init))
    sys = build_system(cfg)
    with pytest.raises(ValidationError, match="off the mass shell"):
        build_initial_state(cfg, sys)
    cfg2 = load_scenario(_minimal(initial={**init, "allow_off_shell": True}))
    s = build_initial_state(cfg2, build_system(cfg2))
    assert s.p[0] == -2.0


def test_ensemble_rejects_non_lambda_stops():
    doc = _gas_doc()
    doc["stop"] = [{"kind": "tau_reached", "value": 1.0}]
    with pytest.raises(ValidationError, match="lambda_reached"):
        load_scenario(doc)


def test_ensemble_rejects_reparametrized_companions():
    with pytest.raises(ValidationError, match="single runs"):
        load_scenario(_gas_doc(reparametrize_tau=True))


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"stop": [{"kind": "tau_reached", "value": 1.0}]}, "tau"),
        ({"stop": [{"kind": "mass_floor", "value": 0.5}]}, "mass_floor"),
        ({"integrator": {"shell_projection": 5}}, "shell_projection"),
        ({"outputs": {"reparametrize_tau": True}}, "reparametrize_tau"),
    ],
)
def test_massless_scenarios_reject_mass_dependent_features(patch, field):
    doc = _minimal(mass={"kind": "zero"})
    doc["initial"]["p_spatial"] = [1.0, 0.0, 0.0]
    doc.update(patch)
    with pytest.raises(ValidationError, match=field):
        load_scenario(doc)


def test_load_from_file_and_missing_file(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(_minimal()))
    assert load_scenario(path).kind == "single"
    assert load_scenario(str(path)).kind == "single"
    with pytest.raises(ParseError, match="cannot read"):
        load_scenario(str(tmp_path / "nope.json"))


def test_serialization_round_trips_every_preset():
    for name in preset_names():
        cfg = preset_scenario(name)
        assert load_scenario(serialize_scenario(cfg)) == cfg


# ---------------------------------------------------------------------------
# builders


def test_build_initial_state_from_velocity():
    doc = _minimal(initial={"kind": "single", "v": [0.6, 0.0, 0.0]})
    cfg = load_scenario(doc)
    s = build_initial_state(cfg, build_system(cfg))
    assert s.p[0] == pytest.approx(-1.25, abs=1e-14)
    assert s.p[1] == pytest.approx(0.75, abs=1e-14)


def test_build_density_spec_maps_fields():
    cfg = load_scenario(_gas_doc())
    spec = build_density_spec(cfg)
    assert isinstance(spec.momentum, GaussianMomentum)
    assert spec.momentum.sigma == (0.2, 0.2, 0.2)
    assert spec.q_center == (0.0, 0.0, 0.0, 0.0)
    assert spec.phi_halfwidth == 0.0


def test_build_density_spec_rejects_single_kind():
    cfg = load_scenario(_minimal())
    with pytest.raises(ValidationError):
        build_density_spec(cfg)


def test_build_integrator_config_translates_stops():
    doc = _minimal(
        integrator={"method": "rk4", "fixed_step": 0.01},
        stop=[
            {"kind": "lambda_reached", "value": 2.0},
            {"kind": "coordinate_bound", "value": 1.5, "axis": 1},
        ],
    )
    cfg = load_scenario(doc)
    ic = build_integrator_config(cfg)
    assert ic.method == "rk4"
    assert ic.fixed_step == 0.01
    assert ic.max_step == math.inf
    kinds = {(s.kind, s.value, s.axis) for s in ic.stop}
    assert kinds == {("lambda_reached", 2.0, 0), ("coordinate_bound", 1.5, 1)}


# ---------------------------------------------------------------------------
# command line


def test_cli_presets_lists_every_name(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in preset_names():
        assert name in out


def test_cli_run_preset_writes_companions(tmp_path, capsys):
    assert main(["run", "--preset", "decay-flat", "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "lambda_reached" in out
    names = {p.name for p in tmp_path.iterdir()}
    assert "decay_flat.csv" in names
    assert "decay_flat_tau.csv" in names
    header = (tmp_path / "decay_flat.csv").read_text().splitlines()[0]
    assert header == (
        "lambda,q0,q1,q2,q3,p0,p1,p2,p3,phi,H,tau,shell_residual"
    )


def test_cli_run_scenario_file_jsonl(tmp_path, capsys):
    doc = _minimal()
    doc["outputs"] = {"path": "traj", "format": "jsonl"}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "traj.jsonl").read_text().splitlines()
    first = json.loads(lines[0])
    assert first["lambda"] == 0.0
    assert first["p0"] == pytest.approx(-math.sqrt(1.25))
    capsys.readouterr()


def test_cli_requires_exactly_one_source(tmp_path, capsys):
    assert main(["run"]) == 2
    assert main(["run", "x.json", "--preset", "decay-flat"]) == 2
    assert main(["run", "--preset", "no-such-preset"]) == 2
    capsys.readouterr()


def test_cli_kind_guards(tmp_path, capsys):
    # ensemble preset under `run`, single preset under `ensemble`
    assert main(["run", "--preset", "decay-gas", "--out-dir", str(tmp_path)]) == 2
    assert main(["ensemble", "--preset", "decay-flat", "--out-dir", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "error:" in err


def test_cli_ensemble_outputs_and_determinism(tmp_path, capsys):
    path = tmp_path / "gas.json"
    path.write_text(json.dumps(_gas_doc()))
    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    assert main(["ensemble", str(path), "--out-dir", str(dir_a)]) == 0
    assert main(["ensemble", str(path), "--out-dir", str(dir_b)]) == 0
    capsys.readouterr()

    names = {p.name for p in dir_a.iterdir()}
    # reports=4, snapshot_stride=2 -> snapshots at report indices 0, 2, 4
    assert names == {
        "gas_series.csv",
        "gas_snapshot_0000.csv",
        "gas_snapshot_0002.csv",
        "gas_snapshot_0004.csv",
    }
    for name in sorted(names):
        assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes()

    series = (dir_a / "gas_series.csv").read_text().splitlines()
    assert series[0] == "lambda,total_weight,entropy,entropy_rate_analytic"
    assert len(series) == 6  # header + reports + 1


def test_cli_ensemble_csv_jsonl_parity(tmp_path, capsys):
    for fmt in ("csv", "jsonl"):
        doc = _gas_doc(format=fmt)
        p = tmp_path / f"gas_{fmt}.json"
        p.write_text(json.dumps(doc))
        assert main(["ensemble", str(p), "--out-dir", str(tmp_path / fmt)]) == 0
    capsys.readouterr()

    csv_lines = (tmp_path / "csv" / "gas_series.csv").read_text().splitlines()
    jsonl_lines = (tmp_path / "jsonl" / "gas_series.jsonl").read_text().splitlines()
    header = csv_lines[0].split(",")
    assert len(csv_lines) - 1 == len(jsonl_lines)
    for row, line in zip(csv_lines[1:], jsonl_lines):
        rec = json.loads(line)
        for key, cell in zip(header, row.split(",")):
            assert float(cell) == rec[key]


def test_cli_verify_json_with_perturbation(capsys):
    # One full battery pass in-process; the deliberate field perturbation must
    # be caught by the divergence identity and nothing else.
    code = main(["verify", "--json", "--perturb-divergence"])
    out = capsys.readouterr().out
    assert code == 1
    records = [json.loads(line) for line in out.splitlines() if line.strip()]
    by_name = {r["name"]: r for r in records}
    assert len(by_name) == 12
    assert by_name["divergence-identity"]["passed"] is False
    for name, rec in by_name.items():
        if name != "divergence-identity":
            assert rec["passed"] is True, name


def test_cli_reports_parse_errors_as_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert main(["run", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err
