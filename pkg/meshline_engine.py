# -*- coding: utf-8 -*-
"""
meshline_engine.py
Núcleo del algoritmo: convierte los vértices agrupados por material en tres
arrays de líneas de malla estrictamente crecientes.

Secuencia por eje:
    proyección -> ajuste (snapping) -> refinamiento de bordes -> relleno de
    intervalos -> suavizado de gradación -> relleno del dominio + PML
"""

from __future__ import annotations

import logging
import math
import os
import time
from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

import grid_audit
import scene_ingest
from core_model import (AXES, EmptyGeometryError, InvalidArgumentError,
                        MeshParams, RectilinearGrid, quarter_mid_padding,
                        target_cell_size, wavelengths)

logging.basicConfig(level=logging.INFO,
                    format='%(asctime)s - %(levelname)s - %(message)s')

# Tolerancia relativa de todas las comparaciones de tamaño de celda.
RTOL = 1e-9
# Holgura al redondear g / t hacia arriba (absorbe 0.9 / 0.3 = 3.0000000000000004).
_CEIL_SLACK = 1e-12
# Margen sobre grading_ratio_max al detectar pares que hay que dividir.
_RATIO_SLACK = 1e-10
# Fracción de (r - 1) que se resta al crecimiento de la rampa de relleno.
_RAMP_MARGIN = 1e-3


@dataclass(frozen=True)
class CriticalCoordinate:
    """
    Posición de un eje donde pueden cambiar epsilon o mu.
    members guarda las posiciones originales fusionadas en esta coordenada.
    """
    position: float
    is_material_boundary: bool = True
    source_materials: frozenset = frozenset()
    members: tuple = field(default=(), compare=False, repr=False)


@dataclass(frozen=True)
class AxisPlan:
    axis: str
    critical: tuple
    model_extent: tuple
    lambda_min: float
    padding_distance: float
    targets: Mapping
    n_side: int
    res_fraction: float
    pml_n: int
    grading_ratio_max: float = 2.0


class Region(NamedTuple):
    start: float
    end: float
    kind: str  # model | space | pml


def _axis_index(axis):
    if isinstance(axis, str):
        return AXES.index(axis.lower())
    return int(axis)


# ---------- PROYECCIÓN Y AJUSTE ----------

def project_critical_coords(groups, axis):
    """
    Proyecta todos los vértices de los grupos sobre el eje.

    Returns:
        list: CriticalCoordinate ordenadas y sin duplicados exactos. Cada vértice marca
              una posible transición de material, así que todas llevan la bandera de borde.
    """
    idx = _axis_index(axis)
    por_posicion = {}
    for group in groups:
        for p in np.unique(group.vertices[:, idx]):
            por_posicion.setdefault(float(p), set()).add(group.material.id)
    if not por_posicion:
        raise EmptyGeometryError(f"Sin geometría que proyectar sobre el eje {AXES[idx]}")
    return [CriticalCoordinate(p, True, frozenset(mats), (p,))
            for p, mats in sorted(por_posicion.items())]


def _merge_cluster(cluster):
    if len(cluster) == 1:
        return cluster[0]
    members = tuple(m for c in cluster for m in (c.members or (c.position,)))
    return CriticalCoordinate(
        float(np.mean(members)),
        any(c.is_material_boundary for c in cluster),
        frozenset().union(*(c.source_materials for c in cluster)),
        members)


def snap_coordinates(coords, min_cell):
    """
    Fusiona en su centroide los grupos máximos de coordenadas consecutivas cuyo
    recorrido total es menor que min_cell. Repite hasta que ningún hueco sea menor.
    """
    actual = list(coords)
    while True:
        clusters = []
        for c in actual:
            if clusters and c.position - clusters[-1][0].position < min_cell:
                clusters[-1].append(c)
            else:
                clusters.append([c])
        if len(clusters) == len(actual):
            return actual
        actual = [_merge_cluster(cl) for cl in clusters]


# ---------- REFINAMIENTO ----------

def refinement_offsets(n_side, res_fraction, lambda_min, min_cell, grading_ratio=2.0):
    """Desplazamientos de un lado: progresión geométrica cuya extensión total es lambda_min / res_fraction."""
    if n_side <= 0:
        return np.empty(0)
    r = grading_ratio
    extension = lambda_min / res_fraction
    s0 = extension * (r - 1.0) / (r ** n_side - 1.0)
    if s0 < min_cell:
        s0 = min_cell
    return s0 * (r ** np.arange(1, n_side + 1) - 1.0) / (r - 1.0)


def refine_edges(coords, n_side, res_fraction, lambda_min, min_cell,
                 grading_ratio=2.0, domain=None):
    """
    Inserta n_side líneas graduadas a cada lado de cada coordenada de borde.

    Se descartan las líneas a menos de min_cell de una coordenada crítica o de una
    línea insertada por otra coordenada, las que pasan del punto medio hacia la
    coordenada vecina y las que caen fuera del dominio con relleno.

    Returns:
        np.ndarray: Posiciones insertadas, ordenadas.
    """
    offsets = refinement_offsets(n_side, res_fraction, lambda_min, min_cell, grading_ratio)
    if offsets.size == 0 or not coords:
        return np.empty(0)

    pos = np.array([c.position for c in coords], dtype=np.float64)
    tol = min_cell * (1.0 - RTOL)
    candidatos, duenos = [], []
    for i, c in enumerate(coords):
        if not c.is_material_boundary:
            continue
        p = c.position
        limite_izq = 0.5 * (pos[i - 1] + p) if i > 0 else -math.inf
        limite_der = 0.5 * (p + pos[i + 1]) if i + 1 < len(pos) else math.inf
        for q in np.concatenate((p - offsets, p + offsets)):
            if not (limite_izq < q < limite_der):
                continue
            if domain is not None and not (domain[0] <= q <= domain[1]):
                continue
            candidatos.append(q)
            duenos.append(i)
    if not candidatos:
        return np.empty(0)

    cand = np.array(candidatos)
    duenos = np.array(duenos)

    # Distancia a la coordenada crítica más cercana.
    j = np.searchsorted(pos, cand)
    izq = pos[np.clip(j - 1, 0, len(pos) - 1)]
    der = pos[np.clip(j, 0, len(pos) - 1)]
    distancia = np.minimum(np.abs(cand - izq), np.abs(der - cand))
    keep = distancia >= tol
    cand, duenos = cand[keep], duenos[keep]

    # Choques entre patrones de coordenadas vecinas: se eliminan ambas líneas.
    orden = np.argsort(cand, kind="stable")
    cand, duenos = cand[orden], duenos[orden]
    if cand.size > 1:
        choque = (np.diff(cand) < tol) & (duenos[1:] != duenos[:-1])
        fuera = np.zeros(cand.size, dtype=bool)
        fuera[:-1] |= choque
        fuera[1:] |= choque
        cand = cand[~fuera]
    return np.unique(cand)


# ---------- REGIONES Y RELLENO ----------

def classify_regions(model_extent, padded_extent, pml_thickness=0.0):
    """
    Etiqueta los intervalos del eje como model, space o pml.

    Args:
        model_extent: [min, max] del modelo.
        padded_extent: [min, max] del dominio completo (PML incluida).
        pml_thickness: Espesor de la PML en cada extremo.
    """
    m0, m1 = (float(v) for v in model_extent)
    p0, p1 = (float(v) for v in padded_extent)
    if m0 > m1 or p0 > p1:
        raise InvalidArgumentError(f"Extensiones invertidas: modelo {model_extent}, dominio {padded_extent}")
    if m0 < p0 or m1 > p1:
        raise InvalidArgumentError(f"El modelo {model_extent} no está contenido en el dominio {padded_extent}")
    if pml_thickness < 0:
        raise InvalidArgumentError(f"pml_thickness debe ser >= 0 (recibido {pml_thickness})")

    regions = []
    fin_pml_izq = min(p0 + pml_thickness, m0)
    if fin_pml_izq > p0:
        regions.append(Region(p0, fin_pml_izq, "pml"))
    if m0 > fin_pml_izq:
        regions.append(Region(fin_pml_izq, m0, "space"))
    regions.append(Region(m0, m1, "model"))
    inicio_pml_der = max(p1 - pml_thickness, m1)
    if inicio_pml_der > m1:
        regions.append(Region(m1, inicio_pml_der, "space"))
    if p1 > inicio_pml_der:
        regions.append(Region(inicio_pml_der, p1, "pml"))
    return regions


def _subdivide(lines, k):
    """Parte cada intervalo i en k[i] trozos iguales conservando las líneas originales."""
    a = lines[:-1]
    g = np.diff(lines)
    k = np.asarray(k, dtype=np.int64)
    if np.all(k == 1):
        return lines.copy()
    idx = np.repeat(np.arange(len(g)), k)
    j = np.arange(idx.size) - np.repeat(np.cumsum(k) - k, k)
    puntos = a[idx] + g[idx] * (j / k[idx])
    return np.append(puntos, lines[-1])


def fill_intervals(fixed_lines, regions, targets):
    """
    Subdivide cada hueco g en ceil(g / t) partes iguales, con t el objetivo de su región.
    Un hueco que toca varias regiones usa el objetivo más fino.

    Si targets trae "min", ninguna parte baja de la celda mínima: el número de partes se
    limita a floor(g / min) aunque la parte resultante quede por encima del objetivo.
    """
    lines = np.asarray(fixed_lines, dtype=np.float64)
    if lines.size < 2:
        return lines.copy()
    a, b = lines[:-1], lines[1:]
    g = b - a
    t = np.full(g.shape, np.inf)
    for region in regions:
        objetivo = targets.get(region.kind, targets["space"])
        solape = (a < region.end) & (b > region.start)
        t = np.where(solape, np.minimum(t, objetivo), t)
    t = np.where(np.isinf(t), targets["space"], t)
    k = np.maximum(1, np.ceil(g / t * (1.0 - _CEIL_SLACK))).astype(np.int64)

    min_cell = targets.get("min")
    if min_cell:
        tope = _max_pieces(g, min_cell)
        limitados = k > tope
        if limitados.any():
            logging.warning(
                f"⚠️ {int(limitados.sum())} huecos quedan por encima de su objetivo: "
                f"dividirlos más bajaría de la celda mínima {min_cell:.4g} m")
            k = np.minimum(k, tope)
    return _subdivide(lines, k)


def _max_pieces(g, min_cell):
    """Mayor número de partes iguales de cada hueco que no baja de min_cell (al menos 1)."""
    return np.maximum(1, np.floor(g / min_cell * (1.0 + _CEIL_SLACK))).astype(np.int64)


# ---------- SUAVIZADO ----------

def smooth_grading(lines, r_max, min_cell, locked=0):
    """
    Mientras dos intervalos adyacentes superen la razón r_max, el mayor se divide en
    el menor número de trozos iguales que la cumple frente a su vecino, sin bajar de
    min_cell. Las líneas de entrada se conservan.

    Con r_max = 2, espaciados [0.01, 0.08] quedan en [0.01, 0.02, 0.02, 0.02, 0.02].

    Args:
        locked (int): Intervalos de cada extremo que no se dividen.
    """
    lines = np.asarray(lines, dtype=np.float64)
    g = np.diff(lines)
    if g.size < 2:
        return lines.copy()

    tope = _max_pieces(g, min_cell)
    if locked:
        tope[:locked] = 1
        tope[max(g.size - locked, 0):] = 1
    limite = r_max * (1.0 + _RATIO_SLACK)
    k = np.ones(g.size, dtype=np.int64)
    while True:
        u = g / k
        pedido = k.copy()
        for grande, pequeno, desplazamiento in ((u[:-1], u[1:], 0), (u[1:], u[:-1], 1)):
            viol = np.flatnonzero(grande > limite * pequeno)
            if viol.size == 0:
                continue
            destino = viol + desplazamiento
            necesario = np.ceil(g[destino] / (r_max * pequeno[viol]) * (1.0 - _CEIL_SLACK))
            np.maximum.at(pedido, destino, necesario.astype(np.int64))
        nuevo = np.minimum(pedido, tope)
        if np.array_equal(nuevo, k):
            break
        k = nuevo
    return _subdivide(lines, k)


# ---------- RELLENO DEL DOMINIO ----------

def _uniform_padding(distance, space_target):
    if distance <= 0:
        return np.empty(0)
    k = max(1, math.ceil(distance / space_target * (1.0 - _CEIL_SLACK)))
    pasos = distance * np.arange(1, k + 1) / k
    pasos[-1] = distance
    return pasos


def _graded_padding(outer_cell, distance, space_target, grading_ratio):
    """
    Distancias acumuladas del relleno de un extremo: celdas que crecen desde outer_cell
    con razón algo menor que grading_ratio hasta alcanzar space_target, y después celdas
    de space_target hasta cubrir al menos distance.
    """
    crecimiento = 1.0 + (grading_ratio - 1.0) * (1.0 - _RAMP_MARGIN)
    celdas = []
    c = outer_cell
    while c * crecimiento < space_target * (1.0 - RTOL):
        c *= crecimiento
        celdas.append(c)
    resto = distance - math.fsum(celdas)
    if resto > 0:
        celdas.extend([space_target] * max(1, math.ceil(resto / space_target * (1.0 - _CEIL_SLACK))))
    return np.cumsum(celdas) if celdas else np.empty(0)


def pad_axis(lines, padding_distance, space_target, pml_n, grading_ratio=None):
    """
    Extiende ambos extremos: padding_distance en ceil(padding_distance / space_target)
    celdas iguales y después pml_n celdas PML de exactamente space_target.

    Con grading_ratio, el relleno de cada extremo arranca en la celda exterior de las
    líneas y crece hasta space_target sin superar esa razón; cubre al menos
    padding_distance, así que la unión núcleo/relleno/PML queda graduada.
    """
    lines = np.asarray(lines, dtype=np.float64)
    if lines.size == 0:
        raise InvalidArgumentError("pad_axis necesita al menos una línea")
    if padding_distance < 0:
        raise InvalidArgumentError(f"padding_distance debe ser >= 0 (recibido {padding_distance})")
    if not space_target > 0:
        raise InvalidArgumentError(f"space_target debe ser > 0 (recibido {space_target})")
    if pml_n < 0:
        raise InvalidArgumentError(f"pml_n debe ser >= 0 (recibido {pml_n})")
    if grading_ratio is not None and not grading_ratio > 1:
        raise InvalidArgumentError(f"grading_ratio debe ser > 1 (recibido {grading_ratio})")

    if grading_ratio is None:
        izq = der = _uniform_padding(padding_distance, space_target)
    else:
        d = np.diff(lines)
        izq = _graded_padding(d[0] if d.size else space_target,
                              padding_distance, space_target, grading_ratio)
        der = _graded_padding(d[-1] if d.size else space_target,
                              padding_distance, space_target, grading_ratio)

    def exterior(pasos):
        base = pasos[-1] if pasos.size else 0.0
        return np.concatenate((pasos, base + space_target * np.arange(1, pml_n + 1)))

    return np.concatenate(((lines[0] - exterior(izq))[::-1], lines, lines[-1] + exterior(der)))


# ---------- COMPOSICIÓN ----------

def _build_axis(plan):
    if not plan.critical:
        raise EmptyGeometryError(f"Sin coordenadas críticas en el eje {plan.axis}")
    min_cell = plan.targets["min"]
    space = plan.targets["space"]
    r = plan.grading_ratio_max

    snapped = snap_coordinates(list(plan.critical), min_cell)
    fijas = np.array([c.position for c in snapped], dtype=np.float64)
    d = plan.padding_distance

    insertadas = refine_edges(snapped, plan.n_side, plan.res_fraction, plan.lambda_min,
                              min_cell, grading_ratio=r,
                              domain=(fijas[0] - d, fijas[-1] + d))
    lines = np.union1d(fijas, insertadas)
    m0, m1 = plan.model_extent
    regions = classify_regions((m0, m1), (min(lines[0], m0), max(lines[-1], m1)))
    lines = fill_intervals(lines, regions, plan.targets)
    # Una celda fija de space_target a cada lado limita las celdas exteriores a r * space_target.
    lines = smooth_grading(np.concatenate(([lines[0] - space], lines, [lines[-1] + space])),
                           r, min_cell, locked=1)[1:-1]
    lines = pad_axis(lines, d, space, plan.pml_n, grading_ratio=r)

    logging.debug(
        f"📐 Eje {plan.axis}: {len(plan.critical)} coordenadas críticas, {len(snapped)} tras ajuste, "
        f"{insertadas.size} de refinamiento, {lines.size} líneas")
    return lines, snapped


def generate_axis(plan):
    """Ejecuta la secuencia completa de un eje y devuelve su array de líneas."""
    lines, _ = _build_axis(plan)
    return lines


def build_axis_plans(groups, band, params):
    """Prepara los tres AxisPlan a partir de los grupos de material."""
    wl = wavelengths(band)
    d = quarter_mid_padding(wl.lambda_min, wl.lambda_max)
    targets = {
        "model": target_cell_size(wl.lambda_min, params.max_cell_model),
        "space": target_cell_size(wl.lambda_min, params.max_cell_space),
        "min": target_cell_size(wl.lambda_min, params.min_cell_global),
    }
    if not targets["min"] <= targets["model"] <= targets["space"]:
        logging.warning(
            f"⚠️ Orden de objetivos atípico: min={targets['min']:.4g} m, "
            f"model={targets['model']:.4g} m, space={targets['space']:.4g} m")
    if wl.unbounded:
        logging.warning(f"⚠️ Banda con DC: relleno = lambda_min / 2 = {d:.6g} m")

    plans = []
    for i, eje in enumerate(AXES):
        critical = project_critical_coords(groups, i)
        extent = (min(g.extent[0][i] for g in groups), max(g.extent[1][i] for g in groups))
        plans.append(AxisPlan(axis=eje, critical=tuple(critical), model_extent=extent,
                              lambda_min=wl.lambda_min, padding_distance=d, targets=targets,
                              n_side=params.n[i], res_fraction=params.res_fraction[i],
                              pml_n=params.pml_n, grading_ratio_max=params.grading_ratio_max))
    return plans


def _workers(threads):
    if threads and threads > 0:
        return threads
    env = os.getenv("MESHER_THREADS")
    if env and env.isdigit() and int(env) > 0:
        return int(env)
    return min(len(AXES), os.cpu_count() or 1)


def _as_params(params):
    if params is None:
        return MeshParams()
    if isinstance(params, Mapping):
        return MeshParams.from_mapping(params)
    return params


def mesh_groups(groups, band, params=None, threads=0):
    """
    Núcleo de mallado sin ingesta: tres ejes (en paralelo) + auditoría.

    Returns:
        tuple: (RectilinearGrid, GridReport, coordenadas críticas ajustadas por eje).
    """
    params = _as_params(params)
    if not groups:
        raise EmptyGeometryError("La escena no contiene formas")
    plans = build_axis_plans(groups, band, params)
    with ThreadPoolExecutor(max_workers=_workers(threads)) as pool:
        resultados = list(pool.map(_build_axis, plans))

    snapped = [np.array([c.position for c in s]) for _, s in resultados]
    grid = RectilinearGrid(*(lines for lines, _ in resultados), band=band, params=params,
                           model_extent=tuple((s[0], s[-1]) for s in snapped))
    report = grid_audit.audit(grid, params, band, snapped)
    return grid, report, snapped


def generate_grid(tree, materials, band, params=None, threads=0):
    """
    Ingesta (recorrido, carga, fusión) + mallado de los tres ejes + auditoría.

    Returns:
        tuple: (RectilinearGrid, GridReport) con tiempos de ingesta y mallado.
    """
    params = _as_params(params)
    t0 = time.perf_counter()
    shapes = scene_ingest.dfs_shapes(tree)
    geometries = scene_ingest.load_geometries(tree, shapes, threads)
    groups = scene_ingest.fuse_by_material(shapes, geometries, materials)
    t1 = time.perf_counter()
    grid, report, _ = mesh_groups(groups, band, params, threads)
    t2 = time.perf_counter()
    report.timings = {"ingest_s": t1 - t0, "mesh_s": t2 - t1}
    logging.info(
        f"✅ Malla {grid.shape[0]}x{grid.shape[1]}x{grid.shape[2]} líneas, "
        f"{report.total_cells:,} celdas (ingesta {t1 - t0:.3f} s, mallado {t2 - t1:.3f} s)")
    return grid, report
