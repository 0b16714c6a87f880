import csv
import json
import re
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conjfun import io
from conjfun.cli import BUILTIN, load_domain_config, main
from conjfun.pipeline import CSV_COLUMNS

DOCS = Path(__file__).resolve().parents[1] / "docs" / "outputs.md"


def test_solve_square(tmp_path, capsys):
    assert main(["solve", "square", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["M"] == pytest.approx(1.0, abs=1e-10)
    assert rep["reci"] <= 1e-10
    assert rep["delta"] == []
    for f in ("timings.json", "map.csv", "canonical.svg", "map.svg"):
        assert (tmp_path / f).stat().st_size > 0
    assert json.loads((tmp_path / "timings.json").read_text())["factorizations"] == 2
    assert "M=1" in capsys.readouterr().out


def test_report_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["solve", "two_holes_disk", "--p", "3", "--h", "0.4", "--grade", "0.15,2", "--out", str(d),
                     "--density", "2", "--dump-conjugate"]) == 0
    for f in ("report.json", "conjugate.json", "map.csv", "map.svg", "canonical.svg"):
        assert (a / f).read_bytes() == (b / f).read_bytes(), f
    dump = json.loads((a / "conjugate.json").read_text())
    assert len(dump["delta"]) == 2 and np.array(dump["S"]).shape == (3, 3)


def test_map_csv_header_matches_docs(tmp_path):
    assert main(["solve", "square", "--out", str(tmp_path), "--density", "1"]) == 0
    header = (tmp_path / "map.csv").read_text().splitlines()[0]
    assert f"Header: `{header}`" in DOCS.read_text()


def test_study_csv(tmp_path, capsys):
    assert main(["study", "slit_square", "--p-range", "2:4", "--h", "0.3", "--grade", "0.15,4",
                 "--overkill", "2", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "convergence.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert f"Header: `{','.join(CSV_COLUMNS)}`" in DOCS.read_text()
    assert [int(r["p"]) for r in rows] == [2, 3, 4]
    reci = [float(r["reci"]) for r in rows]
    assert reci[2] < reci[0]
    assert all(float(r["err_primary"]) > 0 for r in rows)
    assert (tmp_path / "convergence.svg").exists()
    assert re.search(r"slope=-\d", capsys.readouterr().out)


def test_bad_spec_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"outer": [], "corners": [0, 1, 2, 3]}')
    assert main(["solve", str(bad), "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]
    bad.write_text("{not json")
    assert main(["solve", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["solve", "no_such_config", "--out", str(tmp_path / "o")]) == 2


def test_degree_beyond_basis_exits_2(tmp_path):
    assert main(["solve", "square", "--p", "15", "--out", str(tmp_path)]) == 2


def test_bad_grade_flag(tmp_path):
    assert main(["solve", "square", "--grade", "0.15", "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("preset,lhs", [("torus", 0), ("cube", 8), ("genus2", -8)])
def test_check_euler_presets(preset, lhs, capsys):
    assert main(["check-euler", "--preset", preset]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lhs"] == out["rhs"] == lhs and out["valid"]


def test_check_euler_custom_mismatch(capsys):
    # a consistent all-quad count claimed for the wrong genus
    assert main(["check-euler", "--valences", "4,4,4,4", "--faces", "4,4,4,4", "--genus", "0"]) == 1
    # counts that break the handshake are malformed input
    assert main(["check-euler", "--valences", "4,4,4", "--faces", "4", "--genus", "1"]) == 2
    assert main(["check-euler", "--valences", "4"]) == 2


def test_mesh_command(tmp_path):
    out = tmp_path / "m.json"
    assert main(["mesh", "--spec", "slit_square", "--h", "0.3", "--grade", "0.15,2", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert len(d["elements"]) > 0


def test_seed_override_changes_layout(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["mesh", "--spec", "random_segments_5", "--h", "8", "--out", str(a)]) == 0
    assert main(["--seed", "7", "mesh", "--spec", "random_segments_5", "--h", "8", "--out", str(b)]) == 0
    assert a.read_text() != b.read_text()


def test_all_builtin_configs_load():
    for name in BUILTIN:
        cfg = load_domain_config(name)
        assert cfg["name"] == name and "run" in cfg


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "conjfun", "check-euler", "--preset", "cube"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and json.loads(r.stdout)["lhs"] == 8


def test_json_writer():
    s = io.dumps({"b": 0.1, "a": [1, 2.0], "c": None, "d": True, "e": float("nan")})
    assert s.index('"a"') < s.index('"b"')
    assert "0.10000000000000001" in s and "2.0" in s and "NaN" in s
    with pytest.raises(TypeError):
        io.dumps({"x": object()})


def test_lattice_triangles_cover_reference():
    from conjfun.modulus import reference_lattice
    for d in (1, 2, 5):
        lat = reference_lattice(d)
        tris = io.lattice_triangles(d)
        assert len(tris) == d * d
        v = lat[tris]
        a, b = v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]
        area = 0.5 * np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
        assert area.sum() == pytest.approx(0.5)
