import json

from core_model import FrequencyBand, GridReport, MeshParams, Violation
from reporting_manager import axis_table, format_report_text, report_to_json


def sample_report(violations=()):
    return GridReport(cells_per_axis=(93, 37, 77), total_cells=264_957,
                      min_delta=(2.5e-4, 3e-4, 4e-4), max_delta=(2.5e-3,) * 3,
                      max_adjacent_ratio=(2.0, 1.5, 1.8), cfl_dt=4.5e-13,
                      violations=list(violations),
                      warnings=["Banda con DC: relleno = lambda_min / 2 = 0.0375 m"],
                      timings={"ingest_s": 0.012, "mesh_s": 0.004})


def test_axis_table():
    tabla = axis_table(sample_report())
    assert list(tabla.index) == ["x", "y", "z"]
    assert tabla.loc["y", "celdas"] == 37


def test_text_report_contents():
    texto = format_report_text(sample_report(), MeshParams(), FrequencyBand(0.0, 4e9))
    assert "93 x 37 x 77 = 264,957" in texto
    assert "max_cell_model = 40, max_cell_space = 30, min_cell_global = 300" in texto
    assert "ingesta 0.012 s, mallado 0.004 s" in texto
    assert "Sin violaciones" in texto
    assert "Banda con DC" in texto


def test_text_report_lists_violations():
    texto = format_report_text(sample_report([Violation("RATIO", "z", 12, "razón 3.000 > 2")]))
    assert "Violaciones: 1" in texto
    assert "[RATIO] eje z intervalo 12" in texto


def test_json_report():
    datos = json.loads(report_to_json(sample_report(), MeshParams(), FrequencyBand(0.0, 4e9)))
    assert datos["report"]["total_cells"] == 264_957
    assert datos["params"]["pml_n"] == 8
    assert datos["band"]["f_max"] == 4e9
