import json

import numpy as np
import pytest

from signalwall.cli import main
from signalwall.inverse import slab_transmission_db


def read_csv_columns(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


def test_transmission_summary_and_csv(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["transmission", "-o", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "23.07" in printed
    assert "42.48" in printed
    header, rows = read_csv_columns(out)
    assert header == ["freq_GHz", "t_dB", "t_phase_deg", "r_dB", "r_phase_deg", "pol", "theta_deg"]
    assert len(rows) == 141


def test_transmission_with_antennas_summary(tmp_path, capsys):
    out = tmp_path / "ta.csv"
    assert main(["transmission", "--with-antennas", "-o", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "improvement" in printed
    assert "onset" in printed
    onset_line = [l for l in printed.splitlines() if "onset" in l][0]
    onset = float(onset_line.split(":")[1].split("GHz")[0])
    assert 2.0 <= onset <= 3.5


def test_transmission_reruns_are_byte_identical(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["transmission", "--with-antennas", "-o", str(a)]) == 0
    assert main(["transmission", "--with-antennas", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_rhcp_equals_te_at_normal_incidence(tmp_path):
    cp = tmp_path / "cp.csv"
    te = tmp_path / "te.csv"
    assert main(["transmission", "--theta", "0", "--pol", "RHCP", "-o", str(cp)]) == 0
    assert main(["transmission", "--theta", "0", "--pol", "TE", "-o", str(te)]) == 0
    _, cp_rows = read_csv_columns(cp)
    _, te_rows = read_csv_columns(te)
    for row_cp, row_te in zip(cp_rows, te_rows):
        assert row_cp[:5] == row_te[:5]  # identical numbers, only the pol label differs


def test_uvalue_analytical(capsys):
    assert main(["uvalue", "--analytical"]) == 0
    printed = capsys.readouterr().out
    assert "0.1509" in printed


def test_uvalue_bare_fv_matches_analytical(capsys):
    assert main(["uvalue", "--bare"]) == 0
    printed = capsys.readouterr().out
    values = [float(line.split("U = ")[1].split()[0]) for line in printed.splitlines() if "U = " in line]
    assert len(values) == 2
    assert values[1] == pytest.approx(values[0], rel=0.005)


def test_fit_permittivity_roundtrip_via_cli(tmp_path, capsys):
    f = np.linspace(2.0, 8.0, 61)
    db = slab_transmission_db(5.84, 0.0, 0.205, 0.06, 290.0, f)
    path = tmp_path / "meas.csv"
    with path.open("w") as fh:
        fh.write("freq_GHz,s21_dB\n")
        for fi, di in zip(f, db):
            fh.write(f"{fi:.6f},{di:.9f}\n")
    assert main(["fit-permittivity", str(path), "--thickness", "290", "--starts", "6"]) == 0
    printed = capsys.readouterr().out
    assert "a = 5.84" in printed
    assert "residual" in printed


def test_fit_requires_thickness(tmp_path, capsys):
    path = tmp_path / "m.csv"
    path.write_text("freq_GHz,s21_dB\n1.0,-3.0\n")
    with pytest.raises(SystemExit) as exc:
        main(["fit-permittivity", str(path)])
    assert exc.value.code == 2


def test_unknown_material_maps_to_usage_exit(tmp_path, capsys):
    scenario = {"wall": {"layers": [{"material": "mythril", "thickness_mm": 100.0}]}}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(scenario))
    assert main(["transmission", "--scenario", str(path)]) == 2
    assert "mythril" in capsys.readouterr().err


def test_sweep_infeasible_exit_code(tmp_path, capsys):
    assert main(["sweep", "--separations", "150", "--u-limit", "0.05", "-o", str(tmp_path / "s.csv")]) == 3
    printed = capsys.readouterr().out
    assert "no separation" in printed


def test_empty_separations_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--separations", "nonsense"])
    assert exc.value.code == 2


def test_materials_list(capsys):
    assert main(["materials", "list"]) == 0
    printed = capsys.readouterr().out
    assert "concrete" in printed
    assert "rock_wool" in printed
    assert "a=5.24" in printed


def test_materials_flag_merges_user_database(tmp_path, capsys):
    extra = tmp_path / "extra.json"
    extra.write_text(json.dumps({"materials": [{"name": "hempcrete", "thermal_conductivity": 0.07}]}))
    assert main(["materials", "list", "--materials", str(extra)]) == 0
    printed = capsys.readouterr().out
    assert "hempcrete" in printed
    assert "concrete" in printed


def test_fdtd_validate_small_band(capsys):
    assert main(["fdtd-validate", "--band", "3.4:3.6", "--step", "0.1"]) == 0
    printed = capsys.readouterr().out
    assert "max |delta|" in printed
    max_delta = float(printed.splitlines()[-1].split(":")[1].split("dB")[0])
    assert max_delta <= 0.5
