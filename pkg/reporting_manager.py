import json
import logging

import pandas as pd

from core_model import AXES

# Configura el sistema de registro para este módulo.
logging.basicConfig(level=logging.INFO,
                    format='%(asctime)s - %(levelname)s - %(message)s')


def axis_table(report):
    """
    Tabla por eje del informe (celdas, espaciado mínimo/máximo, razón máxima).

    Returns:
        pd.DataFrame: Una fila por eje, indexada por 'x', 'y', 'z'.
    """
    return pd.DataFrame({
        "celdas": list(report.cells_per_axis),
        "min_delta_m": list(report.min_delta),
        "max_delta_m": list(report.max_delta),
        "razon_max": list(report.max_adjacent_ratio),
    }, index=pd.Index(AXES, name="eje"))


def format_report_text(report, params=None, band=None):
    """
    Genera el resumen legible del GridReport para la consola.
    Incluye los parámetros usados, la tabla por eje, el total de celdas, el paso CFL,
    los tiempos separados de ingesta y mallado, y las violaciones y avisos.
    """
    lineas = ["📊 Informe de malla"]
    if band is not None:
        lineas.append(f"   Banda: {band.f_min:g} Hz - {band.f_max:g} Hz")
    if params is not None:
        lineas.append(
            f"   max_cell_model = {params.max_cell_model:g}, max_cell_space = {params.max_cell_space:g}, "
            f"min_cell_global = {params.min_cell_global:g}")
        lineas.append(
            f"   n = {list(params.n)}, res_fraction = {list(params.res_fraction)}, "
            f"pml_n = {params.pml_n}, grading_ratio_max = {params.grading_ratio_max:g}")

    tabla = axis_table(report).to_string(
        float_format=lambda v: f"{v:.6g}", justify="right")
    lineas.extend("   " + fila for fila in tabla.splitlines())

    nx, ny, nz = report.cells_per_axis
    lineas.append(f"   Celdas: {nx} x {ny} x {nz} = {report.total_cells:,}")
    lineas.append(f"   Paso CFL: {report.cfl_dt:.6g} s")
    if report.timings:
        lineas.append(
            f"   Tiempo: ingesta {report.timings.get('ingest_s', 0.0):.3f} s, "
            f"mallado {report.timings.get('mesh_s', 0.0):.3f} s")

    if report.violations:
        lineas.append(f"❌ Violaciones: {len(report.violations)}")
        for v in report.violations:
            lineas.append(f"   [{v.rule}] eje {v.axis} intervalo {v.index}: {v.message}")
    else:
        lineas.append("✅ Sin violaciones")
    for aviso in report.warnings:
        lineas.append(f"⚠️ {aviso}")
    return "\n".join(lineas)


def report_to_json(report, params=None, band=None):
    """Serializa el informe (y opcionalmente parámetros y banda) como JSON indentado."""
    datos = {"report": report.to_dict()}
    if params is not None:
        datos["params"] = params.to_dict()
    if band is not None:
        datos["band"] = band.to_dict()
    return json.dumps(datos, indent=4, ensure_ascii=False, sort_keys=True, allow_nan=False)
