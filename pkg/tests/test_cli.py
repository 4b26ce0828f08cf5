"""End-to-end checks of the batch front-end: files, exit codes, determinism."""

import json
import subprocess
import sys

import numpy as np
import pytest

from dressedgf import cli


def _write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload, indent=1))
    return str(path)


def _read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#")
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    return header, rows


CHAIN_BOUND = {
    "bath": {"builder": "chain", "n_sites": 40, "omega_c": 0.0, "j": 1.0},
    "emitters": [{"omega0": 2.5, "g": 0.3, "site": 10}],
}


def test_spectrum_outputs_sorted_levels_and_single_band(tmp_path):
    cfg = _write_config(tmp_path, "run.json", {
        "bath": {"builder": "chain", "n_sites": 8, "omega_c": 0.0, "j": 1.0},
    })
    assert cli.main(["spectrum", "--config", cfg, "--out", str(tmp_path)]) == 0
    header, rows = _read_csv(tmp_path / "spectrum.csv")
    assert header == ["k", "energy"]
    energies = [float(r[1]) for r in rows]
    assert len(energies) == 8
    assert energies == sorted(energies)
    _, band_rows = _read_csv(tmp_path / "bands.csv")
    kinds = [r[0] for r in band_rows]
    # one band plus the two unbounded exterior gaps
    assert kinds == ["gap", "band", "gap"]
    assert band_rows[0][1] == "-inf" and band_rows[2][2] == "inf"


def test_spectrum_reports_dimerized_gap(tmp_path):
    cfg = _write_config(tmp_path, "run.json", {
        "bath": {"builder": "ssh", "n_cells": 10, "omega_c": 0.0, "j1": 1.0, "j2": 0.4},
    })
    assert cli.main(["spectrum", "--config", cfg, "--out", str(tmp_path)]) == 0
    _, rows = _read_csv(tmp_path / "bands.csv")
    gaps = [r for r in rows if r[0] == "gap"]
    bands = [r for r in rows if r[0] == "band"]
    assert len(bands) == 2 and len(gaps) == 3
    inner = [g for g in gaps if g[1] != "-inf" and g[2] != "inf"]
    assert len(inner) == 1
    lo, hi = float(inner[0][1]), float(inner[0][2])
    assert lo < 0.0 < hi


def test_bound_states_csv_matches_oracle_column(tmp_path):
    cfg = _write_config(tmp_path, "run.json", CHAIN_BOUND)
    assert cli.main(["bound-states", "--config", cfg, "--out", str(tmp_path)]) == 0
    header, rows = _read_csv(tmp_path / "bound_states.csv")
    assert header[:2] == ["index", "energy"]
    # detuning above the band still repels a weak partner below the bottom
    assert len(rows) == 2
    for r in rows:
        row = dict(zip(header, r))
        assert float(row["oracle_error"]) < 1e-9
        assert row["is_vds"] == "false" and row["in_band"] == "false"
    top = dict(zip(header, rows[1]))
    assert float(top["energy"]) > 2.0
    wf_header, wf_rows = _read_csv(tmp_path / "wavefunctions.csv")
    assert wf_header == ["site", "re_0", "im_0", "re_1", "im_1"]
    assert len(wf_rows) == 40
    norm = sum(float(r[3]) ** 2 + float(r[4]) ** 2 for r in wf_rows)
    atomic = float(top["atomic_amplitude"])
    assert abs(norm + atomic ** 2 - 1.0) < 1e-10


def test_outputs_are_byte_identical_across_runs(tmp_path):
    cfg = _write_config(tmp_path, "run.json", CHAIN_BOUND)
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    for out in ("a", "b"):
        assert cli.main(["bound-states", "--config", cfg,
                         "--out", str(tmp_path / out)]) == 0
    for name in ("bound_states.csv", "wavefunctions.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_scattering_respects_k_subset(tmp_path):
    cfg = _write_config(tmp_path, "run.json", {
        "bath": {"builder": "chain", "n_sites": 12, "omega_c": 0.0, "j": 1.0},
        "emitters": [{"omega0": 2.5, "g": 0.3, "site": 4}],
        "k_indices": [0, 3, 5],
    })
    assert cli.main(["scattering", "--config", cfg, "--out", str(tmp_path)]) == 0
    _, rows = _read_csv(tmp_path / "scattering.csv")
    assert [int(r[0]) for r in rows] == [0, 3, 5]
    for r in rows:
        assert r[4] == "false"
        assert float(r[5]) < 1e-5


def test_scattering_rejects_out_of_range_index(tmp_path, capsys):
    cfg = _write_config(tmp_path, "run.json", {
        "bath": {"builder": "chain", "n_sites": 12, "omega_c": 0.0, "j": 1.0},
        "emitters": [{"omega0": 2.5, "g": 0.3, "site": 4}],
        "k_indices": [99],
    })
    assert cli.main(["scattering", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "k index 99" in capsys.readouterr().err


def test_effective_json_and_g_sweep(tmp_path):
    cfg = _write_config(tmp_path, "run.json", {
        "bath": {"builder": "chain", "n_sites": 60, "omega_c": 0.0, "j": 1.0},
        "emitters": [
            {"omega0": 2.5, "g": 0.1, "site": 28},
            {"omega0": 2.5, "g": 0.1, "site": 32},
        ],
        "g_sweep": [0.05, 0.1],
    })
    assert cli.main(["effective", "--config", cfg, "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "effective.json").read_text())
    assert payload["m"] == 2
    assert payload["route"] == "analytic"
    assert "decomposition" in payload
    errs = payload["oracle"]["eigenvalue_errors"]
    assert errs is not None and max(errs) < 1e-4
    header, rows = _read_csv(tmp_path / "gsweep.csv")
    assert header == ["g", "max_eigenvalue_error"]
    assert [float(r[0]) for r in rows] == [0.05, 0.1]
    assert float(rows[0][1]) < float(rows[1][1])


def test_effective_in_band_fails_with_runtime_exit(tmp_path, capsys):
    cfg = _write_config(tmp_path, "run.json", {
        "bath": {"builder": "chain", "n_sites": 20, "omega_c": 0.0, "j": 1.0},
        "emitters": [{"omega0": 0.1, "g": 0.2, "site": 8}],
    })
    assert cli.main(["effective", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_compare_reports_all_checks_green(tmp_path):
    cfg = _write_config(tmp_path, "run.json", {
        "bath": {"builder": "chain", "n_sites": 8, "omega_c": 0.0, "j": 1.0},
        "emitters": [{"omega0": 2.5, "g": 0.3, "site": 3}],
    })
    assert cli.main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "compare_report.json").read_text())
    assert payload["all_passed"] is True
    assert payload["seed"] == cli.DEFAULT_SEED
    assert all(c["passed"] for c in payload["checks"])


def test_unknown_config_key_is_named(tmp_path, capsys):
    cfg = _write_config(tmp_path, "run.json", {
        "bath": {"builder": "chain", "n_sites": 8, "omega_c": 0.0, "j": 1.0},
        "bogus": 1,
    })
    assert cli.main(["spectrum", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "'bogus'" in capsys.readouterr().err


def test_config_syntax_error_carries_line(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n "bath": {,}\n}\n')
    assert cli.main(["spectrum", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_missing_emitter_field_is_named(tmp_path, capsys):
    cfg = _write_config(tmp_path, "run.json", {
        "bath": {"builder": "chain", "n_sites": 8, "omega_c": 0.0, "j": 1.0},
        "emitters": [{"omega0": 1.0, "g": 0.1}],
    })
    assert cli.main(["bound-states", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "'site'" in capsys.readouterr().err


def test_inline_and_file_baths_agree(tmp_path):
    bath = {
        "n_sites": 4,
        "frequencies": 0.5,
        "hoppings": [[0, 1, 1.0, 0.0], [1, 2, 1.0, 0.0], [2, 3, 1.0, 0.0]],
    }
    bath_file = tmp_path / "bath.json"
    bath_file.write_text(json.dumps(bath))
    cfg_inline = _write_config(tmp_path, "inline.json", {"bath": bath})
    cfg_file = _write_config(tmp_path, "fromfile.json",
                             {"bath": {"file": str(bath_file)}})
    (tmp_path / "x").mkdir()
    (tmp_path / "y").mkdir()
    assert cli.main(["spectrum", "--config", cfg_inline, "--out", str(tmp_path / "x")]) == 0
    assert cli.main(["spectrum", "--config", cfg_file, "--out", str(tmp_path / "y")]) == 0
    assert (tmp_path / "x" / "spectrum.csv").read_bytes() == \
        (tmp_path / "y" / "spectrum.csv").read_bytes()


def test_delta_flag_overrides_config(tmp_path):
    base = {
        "bath": {"builder": "chain", "n_sites": 12, "omega_c": 0.0, "j": 1.0},
        "emitters": [{"omega0": 2.5, "g": 0.3, "site": 4}],
        "k_indices": [2],
    }
    cfg = _write_config(tmp_path, "run.json", base)
    (tmp_path / "coarse").mkdir()
    (tmp_path / "fine").mkdir()
    assert cli.main(["scattering", "--config", cfg, "--out", str(tmp_path / "coarse"),
                     "--delta", "1e-4"]) == 0
    assert cli.main(["scattering", "--config", cfg, "--out", str(tmp_path / "fine"),
                     "--delta", "1e-9"]) == 0
    _, coarse = _read_csv(tmp_path / "coarse" / "scattering.csv")
    _, fine = _read_csv(tmp_path / "fine" / "scattering.csv")
    assert float(fine[0][5]) < float(coarse[0][5])


def test_console_script_is_installed(tmp_path):
    cfg = _write_config(tmp_path, "run.json", {
        "bath": {"builder": "chain", "n_sites": 5, "omega_c": 0.0, "j": 1.0},
    })
    proc = subprocess.run(
        [sys.executable, "-m", "dressedgf.cli", "spectrum",
         "--config", cfg, "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "spectrum.csv").exists()
