# -*- coding: utf-8 -*-
"""
scene_ingest.py
Lectura de la escena (árbol de ensamblaje + sólidos), recorrido en profundidad
para extraer las formas hoja y agrupación de vértices por material.

Formato de escena (JSON UTF-8):
    {
      "unit_scale": 1.0,
      "materials": [{"id": "cu", "epsilon_r": 1, "mu_r": 1, "kind": "conductor"}],
      "root": {"compound": {"id": "C1", "children": [
                  {"shape": {"id": "S1", "material": "cu", "box": {"min": [0,0,0], "max": [1,1,1]}}},
                  {"shape": {"id": "S2", "material": "cu", "stl": "pieza.stl"}}]}}
    }
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

import stl_utils
from core_model import (CycleError, DuplicateShapeError, MalformedSceneError,
                        MissingMeshFileError, NonFiniteCoordinateError,
                        SceneError, StlError, UnknownMaterialError)

logging.basicConfig(level=logging.INFO,
                    format='%(asctime)s - %(levelname)s - %(message)s')

MATERIAL_KINDS = ("dielectric", "conductor", "source-region")


@dataclass(frozen=True)
class Material:
    id: str
    epsilon_r: float = 1.0
    mu_r: float = 1.0
    kind: str = "dielectric"

    def __post_init__(self):
        if not (self.epsilon_r > 0 and self.mu_r > 0):
            raise MalformedSceneError(
                f"Material '{self.id}': epsilon_r y mu_r deben ser > 0")
        if self.kind not in MATERIAL_KINDS:
            raise MalformedSceneError(
                f"Material '{self.id}': kind '{self.kind}' no es uno de {MATERIAL_KINDS}")


@dataclass(frozen=True)
class Box:
    """Caja alineada con los ejes, en metros."""
    min: tuple
    max: tuple


@dataclass(frozen=True)
class Shape:
    id: str
    material_id: str
    source: Union[Path, Box]


@dataclass(frozen=True)
class Compound:
    id: str
    children: tuple = ()


Node = Union[Compound, Shape]


@dataclass(frozen=True)
class GeometryTree:
    root: Node
    unit_scale: float = 1.0


@dataclass(frozen=True, eq=False)
class ShapeGeometry:
    """Vértices únicos (k, 3) y caja envolvente ((min x, y, z), (max x, y, z))."""
    vertices: np.ndarray
    extent: tuple


@dataclass(frozen=True, eq=False)
class MaterialGroup:
    material: Material
    vertices: np.ndarray
    extent: tuple
    shape_ids: tuple = ()


@dataclass(frozen=True, eq=False)
class SceneModel:
    """Resultado completo de la ingesta de una escena."""
    tree: GeometryTree
    materials: dict
    shapes: list
    geometries: dict
    groups: list


# ---------- PARSEO ----------

def _vector3(valor, donde):
    if not isinstance(valor, (list, tuple)) or len(valor) != 3:
        raise MalformedSceneError(f"{donde}: se esperaba una lista [x, y, z]")
    try:
        v = tuple(float(c) for c in valor)
    except (TypeError, ValueError) as e:
        raise MalformedSceneError(f"{donde}: coordenada no numérica ({e})") from e
    if not all(math.isfinite(c) for c in v):
        raise MalformedSceneError(f"{donde}: coordenada no finita")
    return v


def _parse_materials(datos):
    if not isinstance(datos, list):
        raise MalformedSceneError("'materials' debe ser una lista")
    materials = {}
    for entrada in datos:
        if not isinstance(entrada, dict) or "id" not in entrada:
            raise MalformedSceneError(f"Material sin 'id': {entrada!r}")
        try:
            material = Material(id=str(entrada["id"]),
                                epsilon_r=float(entrada.get("epsilon_r", 1.0)),
                                mu_r=float(entrada.get("mu_r", 1.0)),
                                kind=str(entrada.get("kind", "dielectric")))
        except (TypeError, ValueError) as e:
            raise MalformedSceneError(f"Material '{entrada['id']}' mal formado: {e}") from e
        if material.id in materials:
            raise MalformedSceneError(f"Material duplicado: '{material.id}'")
        materials[material.id] = material
    return materials


def _parse_node(datos, base_dir, materials, ancestros, shape_ids):
    if not isinstance(datos, dict) or len(datos) != 1:
        raise MalformedSceneError(f"Nodo mal formado: {datos!r}")
    tipo, cuerpo = next(iter(datos.items()))
    if not isinstance(cuerpo, dict) or "id" not in cuerpo:
        raise MalformedSceneError(f"Nodo '{tipo}' sin 'id'")
    node_id = str(cuerpo["id"])

    if tipo == "compound":
        # Un compuesto que reaparece entre sus propios ancestros cierra un ciclo.
        if node_id in ancestros:
            raise CycleError(f"Ciclo detectado: '{node_id}' se contiene a sí mismo")
        hijos = cuerpo.get("children", [])
        if not isinstance(hijos, list):
            raise MalformedSceneError(f"'children' de '{node_id}' debe ser una lista")
        ancestros.append(node_id)
        children = tuple(_parse_node(h, base_dir, materials, ancestros, shape_ids) for h in hijos)
        ancestros.pop()
        return Compound(node_id, children)

    if tipo == "shape":
        if node_id in shape_ids:
            raise DuplicateShapeError(f"Id de forma duplicado: '{node_id}'")
        shape_ids.add(node_id)
        material_id = cuerpo.get("material")
        if material_id not in materials:
            raise UnknownMaterialError(
                f"La forma '{node_id}' referencia un material desconocido: '{material_id}'")
        if "box" in cuerpo:
            caja = cuerpo["box"]
            if not isinstance(caja, dict):
                raise MalformedSceneError(f"'box' de '{node_id}' debe tener 'min' y 'max'")
            lo = _vector3(caja.get("min"), f"{node_id}.box.min")
            hi = _vector3(caja.get("max"), f"{node_id}.box.max")
            if any(a > b for a, b in zip(lo, hi)):
                raise MalformedSceneError(f"'box' de '{node_id}' tiene min > max")
            source = Box(lo, hi)
        elif "stl" in cuerpo:
            source = (base_dir / str(cuerpo["stl"])).resolve()
            if not source.is_file():
                raise MissingMeshFileError(
                    f"No se encuentra el STL de la forma '{node_id}': {source}")
        else:
            raise MalformedSceneError(f"La forma '{node_id}' necesita 'box' o 'stl'")
        return Shape(node_id, str(material_id), source)

    raise MalformedSceneError(f"Tipo de nodo desconocido: '{tipo}'")


def parse_scene(path):
    """
    Carga la escena y resuelve materiales y ficheros de malla.

    Args:
        path: Ruta del documento de escena (JSON UTF-8).

    Returns:
        tuple: (GeometryTree, dict de Material por id).
    """
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            datos = json.load(f)
    except FileNotFoundError as e:
        raise SceneError(f"No existe el fichero de escena {path}") from e
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise MalformedSceneError(f"Escena mal formada {path}: {e}") from e
    except OSError as e:
        raise SceneError(f"No se pudo leer la escena {path}: {e}") from e

    if not isinstance(datos, dict) or "root" not in datos:
        raise MalformedSceneError(f"La escena {path} necesita la clave 'root'")
    try:
        unit_scale = float(datos.get("unit_scale", 1.0))
    except (TypeError, ValueError) as e:
        raise MalformedSceneError(f"'unit_scale' no numérico: {e}") from e
    if not (math.isfinite(unit_scale) and unit_scale > 0):
        raise MalformedSceneError(f"'unit_scale' debe ser > 0 (recibido {unit_scale})")

    materials = _parse_materials(datos.get("materials", []))
    root = _parse_node(datos["root"], path.parent, materials, [], set())
    logging.info(f"✅ Escena cargada: {path} ({len(materials)} materiales)")
    return GeometryTree(root, unit_scale), materials


# ---------- RECORRIDO ----------

def dfs_shapes(tree, visit=None):
    """
    Recorrido en profundidad (preorden, orden del documento) que devuelve solo las formas.
    Los compuestos se visitan pero no forman parte de la salida.

    Args:
        tree (GeometryTree): Árbol de ensamblaje.
        visit (callable, opcional): Se llama con cada nodo visitado (compuestos y formas).
    """
    root = tree.root if isinstance(tree, GeometryTree) else tree
    shapes = []
    pila = [root]
    while pila:
        nodo = pila.pop()
        if visit is not None:
            visit(nodo)
        if isinstance(nodo, Shape):
            shapes.append(nodo)
        else:
            # Se apilan en orden inverso para visitar los hijos en orden del documento.
            pila.extend(reversed(nodo.children))
    return shapes


# ---------- GEOMETRÍA ----------

def _geometry_from_points(points, donde):
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) == 0:
        raise StlError(f"{donde}: sin vértices")
    if not np.all(np.isfinite(points)):
        raise NonFiniteCoordinateError(f"{donde}: coordenadas no finitas (NaN/Inf)")
    vertices = np.unique(points, axis=0)
    extent = (tuple(float(v) for v in vertices.min(axis=0)),
              tuple(float(v) for v in vertices.max(axis=0)))
    return ShapeGeometry(vertices, extent)


def load_shape_geometry(shape, unit_scale=1.0):
    """
    Extrae los vértices únicos de una forma (deduplicación exacta) y su caja envolvente.
    Para una caja en línea los vértices son sus 8 esquinas; unit_scale solo afecta a los STL.
    """
    if isinstance(shape.source, Box):
        (x0, y0, z0), (x1, y1, z1) = shape.source.min, shape.source.max
        esquinas = [(x, y, z) for x in (x0, x1) for y in (y0, y1) for z in (z0, z1)]
        return _geometry_from_points(esquinas, f"Forma '{shape.id}'")
    triangles = stl_utils.read_stl(shape.source)
    return _geometry_from_points(triangles.reshape(-1, 3) * unit_scale, f"STL {shape.source}")


def _overlap(a, b):
    return all(a[0][i] < b[1][i] and b[0][i] < a[1][i] for i in range(3))


def fuse_by_material(shapes, geometries, materials):
    """
    Agrupa las formas por material: un grupo por material presente, con la unión de
    vértices y la caja envolvente unión. Aproxima la fusión booleana a nivel de vértices.

    Args:
        shapes (list): Formas en orden de recorrido.
        geometries (dict): ShapeGeometry por id de forma.
        materials (dict): Material por id.

    Returns:
        list: MaterialGroup en orden de primera aparición del material.
    """
    miembros = {}
    for shape in shapes:
        miembros.setdefault(shape.material_id, []).append(shape.id)

    groups = []
    for material_id, ids in miembros.items():
        geoms = [geometries[i] for i in ids]
        vertices = np.unique(np.vstack([g.vertices for g in geoms]), axis=0)
        extent = (tuple(float(v) for v in vertices.min(axis=0)),
                  tuple(float(v) for v in vertices.max(axis=0)))
        for i in range(len(geoms)):
            for j in range(i + 1, len(geoms)):
                if _overlap(geoms[i].extent, geoms[j].extent):
                    logging.warning(
                        f"⚠️ Fusión aproximada: '{ids[i]}' y '{ids[j]}' ({material_id}) se solapan; "
                        f"sus vértices interiores se conservan como coordenadas críticas.")
        groups.append(MaterialGroup(materials[material_id], vertices, extent, tuple(ids)))
    return groups


def load_geometries(tree, shapes, threads=0):
    """Carga las geometrías de todas las formas, en paralelo (entradas independientes)."""
    workers = threads if threads and threads > 0 else min(8, (os.cpu_count() or 1) + 4)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        cargadas = list(pool.map(lambda s: load_shape_geometry(s, tree.unit_scale), shapes))
    return {shape.id: geom for shape, geom in zip(shapes, cargadas)}


def load_scene(path, threads=0):
    """Ingesta completa: parseo, recorrido, carga de sólidos y fusión por material."""
    tree, materials = parse_scene(path)
    shapes = dfs_shapes(tree)
    geometries = load_geometries(tree, shapes, threads)
    groups = fuse_by_material(shapes, geometries, materials)
    logging.info(f"✅ {len(shapes)} formas, {len(groups)} grupos de material")
    return SceneModel(tree, materials, shapes, geometries, groups)
