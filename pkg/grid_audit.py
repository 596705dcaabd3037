# -*- coding: utf-8 -*-
"""
grid_audit.py
Verificación independiente de una RectilinearGrid contra las restricciones de
mallado y construcción del GridReport. La auditoría no lanza excepciones: los
hallazgos se devuelven como datos (Violation / avisos).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from core_model import (AXES, GridReport, Violation, cfl_timestep,
                        quarter_mid_padding, target_cell_size, wavelengths)

logging.basicConfig(level=logging.INFO,
                    format='%(asctime)s - %(levelname)s - %(message)s')

RTOL = 1e-9


@dataclass(frozen=True)
class AuditRule:
    id: str
    severity: str  # violation | warning
    description: str


AUDIT_RULES = {
    r.id: r for r in (
        AuditRule("MONOTONE", "violation", "Las líneas de cada eje son estrictamente crecientes"),
        AuditRule("MIN_CELL", "violation", "Ningún espaciado es menor que lambda_min / min_cell_global"),
        AuditRule("MODEL_MAX", "violation",
                  "Los intervalos que tocan el modelo no superan lambda_min / max_cell_model "
                  "(aviso si la celda mínima impide dividir)"),
        AuditRule("SPACE_MAX", "violation",
                  "Los intervalos fuera del modelo no superan lambda_min / max_cell_space "
                  "(aviso si la celda mínima impide dividir)"),
        AuditRule("CRITICAL_ON_LINE", "violation",
                  "Cada coordenada crítica ajustada coincide exactamente con una línea"),
        AuditRule("PADDING", "violation",
                  "El dominio se extiende al menos el relleno + la PML más allá del modelo"),
        AuditRule("RATIO", "violation",
                  "La razón entre espaciados adyacentes no supera grading_ratio_max "
                  "(aviso si la celda mínima impide dividir)"),
        AuditRule("PML_COUNT", "violation",
                  "Las pml_n celdas exteriores de cada extremo miden exactamente lambda_min / max_cell_space"),
    )
}


def cell_counts(grid):
    """
    Cuenta las celdas de la malla (celdas = líneas - 1 por eje).

    Returns:
        tuple: (celdas por eje, total).
    """
    per_axis = tuple(max(len(lines) - 1, 0) for lines in grid.axes)
    return per_axis, math.prod(per_axis)


def _check_axis(eje, lines, extent, critical, targets, d, params):
    hallazgos, avisos = [], []
    diffs = np.diff(lines)

    def add(rule, index, message, value=float("nan")):
        hallazgos.append(Violation(rule, eje, int(index), message, float(value)))

    if lines.size < 2:
        add("MONOTONE", -1, f"Eje {eje}: se necesitan al menos 2 líneas (hay {lines.size})")
        return hallazgos, avisos
    for i in np.flatnonzero(~(diffs > 0)):
        add("MONOTONE", i, f"Eje {eje}: líneas no crecientes en el intervalo {i}", diffs[i])

    min_cell, model_t, space_t = targets["min"], targets["model"], targets["space"]
    for i in np.flatnonzero((diffs > 0) & (diffs < min_cell * (1.0 - RTOL))):
        add("MIN_CELL", i, f"Eje {eje}: espaciado {diffs[i]:.6g} m < mínimo {min_cell:.6g} m", diffs[i])

    def indivisible(delta):
        # Partir en dos dejaría trozos por debajo de la celda mínima.
        return delta / 2.0 < min_cell * (1.0 + RTOL)

    m0, m1 = extent
    a, b = lines[:-1], lines[1:]
    en_modelo = (a < m1) & (b > m0)
    for regla, zona, objetivo, nombre in (("MODEL_MAX", en_modelo, model_t, "modelo"),
                                          ("SPACE_MAX", ~en_modelo, space_t, "espacio")):
        for i in np.flatnonzero(zona & (diffs > objetivo * (1.0 + RTOL))):
            mensaje = f"espaciado {diffs[i]:.6g} m > máximo de {nombre} {objetivo:.6g} m"
            if indivisible(diffs[i]):
                avisos.append(f"{regla} eje {eje} intervalo {i}: {mensaje}, la celda mínima impide dividir")
            else:
                add(regla, i, f"Eje {eje}: {mensaje}", diffs[i])

    if critical is not None and len(critical):
        critical = np.asarray(critical, dtype=np.float64)
        for c in critical[~np.isin(critical, lines)]:
            add("CRITICAL_ON_LINE", np.searchsorted(lines, c),
                f"Eje {eje}: la coordenada crítica {c!r} no está en ninguna línea", c)

    pml_n = params.pml_n
    requerido = d + pml_n * space_t
    tol = RTOL * max(requerido, abs(m0), abs(m1), 1e-30)
    if lines[0] > m0 - requerido + tol:
        add("PADDING", 0, f"Eje {eje}: el dominio empieza en {lines[0]:.6g} m, se necesita <= "
            f"{m0 - requerido:.6g} m", m0 - lines[0])
    if lines[-1] < m1 + requerido - tol:
        add("PADDING", diffs.size - 1, f"Eje {eje}: el dominio acaba en {lines[-1]:.6g} m, se necesita >= "
            f"{m1 + requerido:.6g} m", lines[-1] - m1)

    if diffs.size >= 2 and np.all(diffs > 0):
        izq, der = diffs[:-1], diffs[1:]
        mayor = np.maximum(izq, der)
        razon = mayor / np.minimum(izq, der)
        for i in np.flatnonzero(razon > params.grading_ratio_max * (1.0 + RTOL)):
            if indivisible(mayor[i]):
                avisos.append(f"RATIO eje {eje} intervalo {i}: razón {razon[i]:.3f} > "
                              f"{params.grading_ratio_max:g}, la celda mínima impide dividir")
            else:
                add("RATIO", i, f"Eje {eje}: razón {razon[i]:.3f} > {params.grading_ratio_max:g} "
                    f"entre los intervalos {i} y {i + 1}", razon[i])

    if diffs.size < 2 * pml_n:
        add("PML_COUNT", 0, f"Eje {eje}: {diffs.size} celdas no alcanzan para 2 x {pml_n} celdas PML")
    else:
        for lado, celdas, frontera, ok_frontera in (
                ("inicial", diffs[:pml_n], 0, lines[pml_n] <= m0 - d + tol),
                ("final", diffs[-pml_n:], diffs.size - pml_n, lines[-1 - pml_n] >= m1 + d - tol)):
            desvio = np.abs(celdas - space_t)
            if np.any(desvio > RTOL * space_t) or not ok_frontera:
                add("PML_COUNT", frontera,
                    f"Eje {eje}: la PML {lado} no tiene {pml_n} celdas de {space_t:.6g} m fuera del relleno",
                    float(desvio.max()))
    return hallazgos, avisos


def audit(grid, params, band, critical=None):
    """
    Evalúa las 8 reglas en cada eje y construye el GridReport.

    Args:
        grid (RectilinearGrid): Malla a verificar (no se modifica).
        params (MeshParams): Parámetros con los que se generó.
        band (FrequencyBand): Banda de excitación.
        critical: Coordenadas críticas ajustadas por eje (o None para omitir CRITICAL_ON_LINE).

    Returns:
        GridReport: Recuento, espaciados, gradación, paso CFL, violaciones y avisos.
    """
    wl = wavelengths(band)
    d = quarter_mid_padding(wl.lambda_min, wl.lambda_max)
    targets = {
        "model": target_cell_size(wl.lambda_min, params.max_cell_model),
        "space": target_cell_size(wl.lambda_min, params.max_cell_space),
        "min": target_cell_size(wl.lambda_min, params.min_cell_global),
    }

    violations, warnings = [], []
    if params.max_cell_model <= params.max_cell_space:
        warnings.append(
            f"Se recomienda max_cell_model > max_cell_space (recibido {params.max_cell_model:g} <= "
            f"{params.max_cell_space:g}): el modelo queda con celdas más gruesas que el espacio")
    if not params.min_cell_global > params.max_cell_model:
        warnings.append(
            f"min_cell_global ({params.min_cell_global:g}) debería superar max_cell_model "
            f"({params.max_cell_model:g})")
    if wl.unbounded:
        warnings.append(f"Banda con DC: relleno = lambda_min / 2 = {d:.6g} m")

    min_delta, max_delta, max_ratio = [], [], []
    for i, eje in enumerate(AXES):
        lines = grid.lines(i)
        crit = critical[i] if critical is not None else None
        hallazgos, avisos = _check_axis(eje, lines, grid.model_extent[i], crit, targets, d, params)
        violations.extend(hallazgos)
        warnings.extend(avisos)
        for aviso in avisos:
            logging.warning(f"⚠️ {aviso}")

        diffs = np.diff(lines)
        min_delta.append(float(diffs.min()) if diffs.size else float("nan"))
        max_delta.append(float(diffs.max()) if diffs.size else float("nan"))
        if diffs.size >= 2 and np.all(diffs > 0):
            max_ratio.append(float(np.max(np.maximum(diffs[:-1], diffs[1:]) / np.minimum(diffs[:-1], diffs[1:]))))
        else:
            max_ratio.append(1.0)

    try:
        cfl_dt = cfl_timestep(*min_delta, c=band.c)
    except ValueError:
        cfl_dt = float("nan")

    per_axis, total = cell_counts(grid)
    if violations:
        logging.warning(f"⚠️ Auditoría: {len(violations)} violaciones "
                        f"({', '.join(sorted({v.rule for v in violations}))})")
    else:
        logging.info(f"✅ Auditoría sin violaciones ({total:,} celdas, dt CFL {cfl_dt:.4g} s)")

    return GridReport(cells_per_axis=per_axis, total_cells=total,
                      min_delta=tuple(min_delta), max_delta=tuple(max_delta),
                      max_adjacent_ratio=tuple(max_ratio), cfl_dt=cfl_dt,
                      violations=violations, warnings=warnings)
