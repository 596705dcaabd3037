import json

import pytest

import config_manager
import mesher
from core_model import GridReport, Violation


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(config_manager.CONFIG_ENV_VAR, raising=False)


def base_args(scene, *extra):
    return ["--scene", str(scene), "--f-min", "0", "--f-max", "4e9", *extra]


def test_happy_path_writes_json(tmp_path, corner_reflector_path, capsys):
    out = tmp_path / "grid.json"
    assert mesher.run(base_args(corner_reflector_path, "--out", str(out))) == mesher.EXIT_OK
    data = json.loads(out.read_text(encoding="utf-8"))
    assert set(data) == {"x", "y", "z", "unit", "report"}
    salida = capsys.readouterr().out
    assert "Celdas:" in salida
    assert "ingesta" in salida and "mallado" in salida


def test_report_echoes_parameter_set(corner_reflector_path, capsys):
    args = base_args(corner_reflector_path, "--max-cell-model", "40", "--max-cell-space", "30",
                     "--min-cell-global", "300")
    assert mesher.run(args) == mesher.EXIT_OK
    assert "max_cell_model = 40, max_cell_space = 30, min_cell_global = 300" in capsys.readouterr().out


def test_pml_out_of_range_exits_with_error(corner_reflector_path, capsys):
    assert mesher.run(base_args(corner_reflector_path, "--pml-n", "3")) == mesher.EXIT_ERROR
    assert "[4, 50]" in capsys.readouterr().err


def test_bad_flag_exits_with_error(corner_reflector_path):
    assert mesher.run(base_args(corner_reflector_path, "--no-existe")) == mesher.EXIT_ERROR
    assert mesher.run(base_args(corner_reflector_path, "--n", "1,2")) == mesher.EXIT_ERROR


def test_help_lists_every_flag(capsys):
    assert mesher.run(["--help"]) == mesher.EXIT_OK
    ayuda = " ".join(capsys.readouterr().out.split())
    for flag in ("--scene", "--f-min", "--f-max", "--max-cell-model", "--max-cell-space",
                 "--min-cell-global", "--n", "--res-fraction", "--pml-n", "--grading-ratio-max",
                 "--out", "--format", "--report", "--threads", "--config"):
        assert flag in ayuda
    assert "lambda_min / valor" in ayuda
    assert "por defecto: 40" in ayuda


def test_missing_scene_file(tmp_path, capsys):
    assert mesher.run(base_args(tmp_path / "nada.json")) == mesher.EXIT_ERROR
    assert "Error" in capsys.readouterr().err


def test_multiple_formats_derive_suffixes(tmp_path, corner_reflector_path):
    out = tmp_path / "malla.json"
    args = base_args(corner_reflector_path, "--out", str(out), "--format", "json",
                     "--format", "vtk", "--format", "solver-xml", "--format", "csv")
    assert mesher.run(args) == mesher.EXIT_OK
    for ext in (".json", ".vtk", ".xml", ".csv"):
        assert (tmp_path / f"malla{ext}").is_file()


def test_format_inferred_from_suffix(tmp_path, corner_reflector_path):
    out = tmp_path / "malla.vtk"
    assert mesher.run(base_args(corner_reflector_path, "--out", str(out))) == mesher.EXIT_OK
    assert out.read_text().startswith("# vtk DataFile Version 3.0")


def test_runs_are_byte_identical(tmp_path, corner_reflector_path):
    a, b = tmp_path / "a.xml", tmp_path / "b.xml"
    assert mesher.run(base_args(corner_reflector_path, "--out", str(a))) == mesher.EXIT_OK
    assert mesher.run(base_args(corner_reflector_path, "--out", str(b))) == mesher.EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_flags_override_config_file(tmp_path, corner_reflector_path, capsys):
    config = tmp_path / "c.json"
    config.write_text(json.dumps({"max-cell-model": 50, "pml-n": 10, "report": "json"}), encoding="utf-8")
    args = base_args(corner_reflector_path, "--config", str(config), "--max-cell-model", "45")
    assert mesher.run(args) == mesher.EXIT_OK
    datos = json.loads(capsys.readouterr().out)
    assert datos["params"]["max_cell_model"] == 45
    assert datos["params"]["pml_n"] == 10


def test_save_config(tmp_path, corner_reflector_path):
    destino = tmp_path / "guardado.json"
    args = base_args(corner_reflector_path, "--pml-n", "12", "--save-config", str(destino))
    assert mesher.run(args) == mesher.EXIT_OK
    assert json.loads(destino.read_text(encoding="utf-8"))["pml-n"] == 12


def test_violations_exit_code(corner_reflector_path, monkeypatch):
    def fake_generate(tree, materials, band, params, threads=0):
        report = GridReport((1, 1, 1), 1, (1.0,) * 3, (1.0,) * 3, (1.0,) * 3, 1e-12,
                            violations=[Violation("RATIO", "x", 0, "razón 3 > 2", 3.0)])
        return None, report

    monkeypatch.setattr(mesher.meshline_engine, "generate_grid", fake_generate)
    assert mesher.run(base_args(corner_reflector_path)) == mesher.EXIT_VIOLATIONS


@pytest.mark.parametrize("contenido", [{"pml-n": "ocho"}, {"f-max": None}, {"threads": "dos"}])
def test_config_value_with_wrong_type_exits_with_message(tmp_path, corner_reflector_path, capsys, contenido):
    config = tmp_path / "c.json"
    config.write_text(json.dumps(contenido), encoding="utf-8")
    args = ["--scene", str(corner_reflector_path), "--config", str(config)]
    assert mesher.run(args) == mesher.EXIT_ERROR
    assert capsys.readouterr().err.startswith("Error: ")
