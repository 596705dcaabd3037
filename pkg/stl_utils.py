# -*- coding: utf-8 -*-
"""
stl_utils.py
Lectura y escritura de sólidos STL (ASCII y binario). Las normales se ignoran.
"""

import logging
import re

import numpy as np

from core_model import StlError

logging.basicConfig(level=logging.INFO,
                    format='%(asctime)s - %(levelname)s - %(message)s')

# Cabecera de 80 bytes + contador uint32 little-endian.
BINARY_HEADER_SIZE = 84
# normal (3 float32) + 3 vértices (9 float32) + palabra de atributos (uint16).
BINARY_RECORD = np.dtype([('normal', '<f4', (3,)),
                          ('vertices', '<f4', (3, 3)),
                          ('attr', '<u2')])

_NUM = r'([^\s]+)'
_VERTEX_RE = re.compile(rb'vertex\s+' + rb'\s+'.join([_NUM.encode()] * 3))


def _looks_binary(data):
    """Un binario coherente tiene exactamente 84 + 50 * n bytes."""
    if len(data) < BINARY_HEADER_SIZE:
        return False
    count = int(np.frombuffer(data, dtype='<u4', count=1, offset=80)[0])
    return len(data) == BINARY_HEADER_SIZE + count * BINARY_RECORD.itemsize


def _parse_ascii(data, path):
    vertices = []
    for match in _VERTEX_RE.finditer(data):
        try:
            vertices.append([float(v.decode('utf-8', 'replace')) for v in match.groups()])
        except ValueError as e:
            raise StlError(f"Coordenada ilegible en {path}: {e}") from e
    if len(vertices) % 3 != 0:
        raise StlError(f"STL ASCII truncado en {path}: {len(vertices)} vértices no forman triángulos")
    return np.asarray(vertices, dtype=np.float64).reshape(-1, 3, 3)


def _parse_binary(data, path):
    if len(data) < BINARY_HEADER_SIZE:
        raise StlError(f"STL binario truncado en {path}: faltan cabecera y contador")
    count = int(np.frombuffer(data, dtype='<u4', count=1, offset=80)[0])
    esperado = BINARY_HEADER_SIZE + count * BINARY_RECORD.itemsize
    if len(data) < esperado:
        raise StlError(
            f"STL binario truncado en {path}: {count} triángulos declarados, {len(data)} bytes (se esperaban {esperado})")
    records = np.frombuffer(data, dtype=BINARY_RECORD, count=count, offset=BINARY_HEADER_SIZE)
    return records['vertices'].astype(np.float64)


def read_stl(path):
    """
    Lee un STL y devuelve sus triángulos.

    Args:
        path: Ruta del fichero STL.

    Returns:
        np.ndarray: Array (n, 3, 3) float64 con los vértices de cada triángulo.
    """
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except OSError as e:
        raise StlError(f"No se pudo leer el STL {path}: {e}") from e

    es_ascii = data.lstrip().startswith(b'solid') and not _looks_binary(data)
    triangles = _parse_ascii(data, path) if es_ascii else _parse_binary(data, path)

    if len(triangles) == 0:
        raise StlError(f"El STL {path} no contiene triángulos")
    logging.debug(f"STL {path}: {len(triangles)} triángulos ({'ASCII' if es_ascii else 'binario'})")
    return triangles


def write_stl_ascii(path, triangles, name="solid"):
    """Escribe triángulos (n, 3, 3) como STL ASCII con normales nulas."""
    triangles = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 3)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(f"solid {name}\n")
        for tri in triangles:
            f.write("  facet normal 0 0 0\n    outer loop\n")
            for v in tri:
                f.write(f"      vertex {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
            f.write("    endloop\n  endfacet\n")
        f.write(f"endsolid {name}\n")


def write_stl_binary(path, triangles):
    triangles = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 3)
    records = np.zeros(len(triangles), dtype=BINARY_RECORD)
    records['vertices'] = triangles
    with open(path, 'wb') as f:
        f.write(np.zeros(80, dtype='uint8').tobytes())
        f.write(np.array(len(triangles), dtype='<u4').tobytes())
        f.write(records.tobytes())


def box_triangles(min_corner, max_corner):
    """12 triángulos de la caja alineada con los ejes (36 registros de vértice)."""
    (x0, y0, z0), (x1, y1, z1) = min_corner, max_corner
    c = np.array([[x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
                  [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1]], dtype=np.float64)
    caras = [(0, 2, 1), (0, 3, 2), (4, 5, 6), (4, 6, 7), (0, 1, 5), (0, 5, 4),
             (1, 2, 6), (1, 6, 5), (2, 3, 7), (2, 7, 6), (3, 0, 4), (3, 4, 7)]
    return np.array([[c[i], c[j], c[k]] for i, j, k in caras])
