# -*- coding: utf-8 -*-
"""
export_manager.py
Serialización de mallas: JSON de líneas, VTK legacy RECTILINEAR_GRID,
fragmento XML para el solver (RectilinearGrid) y CSV de la secuencia de malla.

Todas las coordenadas se escriben con 17 cifras significativas y punto decimal,
de modo que la lectura devuelve exactamente los mismos float64.
"""

import json
import logging
import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd

from core_model import AXES, ExportError, RectilinearGrid

logging.basicConfig(level=logging.INFO,
                    format='%(asctime)s - %(levelname)s - %(message)s')

FORMATS = ("json", "vtk", "solver-xml", "csv")
SUFFIXES = {"json": ".json", "vtk": ".vtk", "solver-xml": ".xml", "csv": ".csv"}


def format_coordinate(value):
    """Representación decimal de 17 cifras, independiente del locale."""
    return format(float(value), ".17g")


def _write_text(path, text, que):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        logging.error(f"❌ No se pudo escribir {que} en {path}: {e}", exc_info=True)
        raise ExportError(f"No se pudo escribir {que} en {path}: {e}") from e
    logging.info(f"✅ {que} guardado en {path}")


# ---------- JSON ----------

def write_lines_json(grid, report, path):
    """
    Guarda las líneas y el informe en JSON.

    Args:
        grid (RectilinearGrid): Malla a exportar.
        report (GridReport | dict | None): Informe que se incrusta bajo "report".
        path: Ruta de salida.
    """
    if report is None:
        report_dict = {}
    elif hasattr(report, "to_dict"):
        report_dict = report.to_dict()
    else:
        report_dict = dict(report)
    try:
        informe = json.dumps(report_dict, ensure_ascii=False, sort_keys=True, allow_nan=False)
    except (TypeError, ValueError) as e:
        raise ExportError(f"El informe no es serializable como JSON estricto: {e}") from e
    # Los arrays se renderizan a mano para fijar las 17 cifras.
    partes = [f'  "{eje}": [{", ".join(format_coordinate(v) for v in grid.lines(eje))}]' for eje in AXES]
    partes.append('  "unit": "m"')
    partes.append(f'  "report": {informe}')
    _write_text(path, "{\n" + ",\n".join(partes) + "\n}\n", "JSON de líneas")


def read_lines_json(path):
    """Lee un JSON de líneas. Devuelve (x, y, z) como arrays float64 y el dict de informe."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ExportError(f"No se pudo leer el JSON de líneas {path}: {e}") from e
    axes = tuple(np.asarray(data[eje], dtype=np.float64) for eje in AXES)
    return axes, data.get("report", {})


# ---------- VTK ----------

def write_vtk_rectilinear(grid, path, title="FDTD rectilinear mesh"):
    """Legacy VTK ASCII con DATASET RECTILINEAR_GRID (una coordenada por línea)."""
    nx, ny, nz = grid.shape
    lineas = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET RECTILINEAR_GRID",
              f"DIMENSIONS {nx} {ny} {nz}"]
    for eje in AXES:
        coords = grid.lines(eje)
        lineas.append(f"{eje.upper()}_COORDINATES {coords.size} double")
        lineas.extend(format_coordinate(v) for v in coords)
    _write_text(path, "\n".join(lineas) + "\n", "VTK")


# ---------- XML DEL SOLVER ----------

def write_solver_xml(grid, path):
    """Fragmento <RectilinearGrid DeltaUnit="1" CoordSystem="0"> con XLines/YLines/ZLines en metros."""
    raiz = ET.Element("RectilinearGrid", {"DeltaUnit": "1", "CoordSystem": "0"})
    for eje in AXES:
        nodo = ET.SubElement(raiz, f"{eje.upper()}Lines")
        nodo.text = ",".join(format_coordinate(v) for v in grid.lines(eje))
    _write_text(path, ET.tostring(raiz, encoding="unicode") + "\n", "XML del solver")


def read_solver_xml(path):
    """Lee el fragmento XML y devuelve una RectilinearGrid sin banda ni parámetros."""
    try:
        raiz = ET.parse(path).getroot()
    except (OSError, ET.ParseError) as e:
        raise ExportError(f"No se pudo leer el XML {path}: {e}") from e
    axes = []
    for eje in AXES:
        nodo = raiz.find(f"{eje.upper()}Lines")
        if nodo is None or not (nodo.text or "").strip():
            raise ExportError(f"{path}: falta el elemento {eje.upper()}Lines")
        axes.append(np.array([float(v) for v in nodo.text.split(",")], dtype=np.float64))
    return RectilinearGrid(*axes)


# ---------- CSV ----------

def sequence_frame(grid):
    """Tabla axis / index / position: la curva índice-posición de cada eje."""
    return pd.concat(
        [pd.DataFrame({"axis": eje, "index": np.arange(grid.lines(eje).size),
                       "position": grid.lines(eje)}) for eje in AXES],
        ignore_index=True)


def write_sequence_csv(grid, path):
    try:
        sequence_frame(grid).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as e:
        logging.error(f"❌ No se pudo escribir el CSV en {path}: {e}", exc_info=True)
        raise ExportError(f"No se pudo escribir el CSV en {path}: {e}") from e
    logging.info(f"✅ CSV de secuencia guardado en {path}")


WRITERS = {
    "json": lambda grid, report, path: write_lines_json(grid, report, path),
    "vtk": lambda grid, report, path: write_vtk_rectilinear(grid, path),
    "solver-xml": lambda grid, report, path: write_solver_xml(grid, path),
    "csv": lambda grid, report, path: write_sequence_csv(grid, path),
}


def export(grid, report, path, fmt):
    """Escribe la malla en el formato indicado (json | vtk | solver-xml | csv)."""
    if fmt not in WRITERS:
        raise ExportError(f"Formato desconocido: {fmt} (válidos: {', '.join(FORMATS)})")
    WRITERS[fmt](grid, report, path)
