# -*- coding: utf-8 -*-
"""
core_model.py
Tipos de dominio del mallador y ecuaciones cerradas de dimensionado:
longitudes de onda de la banda, distancia de relleno (cuarto de la longitud
de onda media), paso temporal CFL y tamaños objetivo de celda.
Todas las funciones son puras; los valores son inmutables tras construirse.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

logging.basicConfig(level=logging.INFO,
                    format='%(asctime)s - %(levelname)s - %(message)s')

# Velocidad de la luz en el vacío (m/s).
C0 = 299792458.0

# Rango permitido para el número de celdas PML por extremo.
PML_N_MIN = 4
PML_N_MAX = 50

AXES = ("x", "y", "z")


# ---------- EXCEPCIONES ----------

class MeshError(Exception):
    """Error base de todo el mallador."""


class InvalidBandError(MeshError, ValueError):
    """Banda de frecuencias no válida (f_max <= 0, f_min < 0 o f_min > f_max)."""


class InvalidArgumentError(MeshError, ValueError):
    """Argumento fuera de dominio en una ecuación u operación."""


class ParameterError(MeshError, ValueError):
    """Parámetros de mallado fuera de rango."""


class SceneError(MeshError):
    """Error al interpretar la escena."""


class MalformedSceneError(SceneError):
    pass


class UnknownMaterialError(SceneError):
    pass


class MissingMeshFileError(SceneError):
    pass


class CycleError(SceneError):
    pass


class DuplicateShapeError(SceneError):
    pass


class StlError(MeshError):
    """STL ilegible, truncado o sin triángulos."""


class NonFiniteCoordinateError(StlError):
    pass


class EmptyGeometryError(MeshError):
    """No hay geometría que proyectar sobre un eje."""


class ExportError(MeshError):
    """Fallo de E/S al escribir un fichero de salida."""


class ConfigError(MeshError):
    """Fichero de configuración ausente o mal formado."""


# ---------- TIPOS ----------

class Wavelengths(NamedTuple):
    """Longitudes de onda extremas. lambda_max es None cuando la banda incluye DC (no acotada)."""
    lambda_min: float
    lambda_max: Optional[float]

    @property
    def unbounded(self):
        return self.lambda_max is None


@dataclass(frozen=True)
class FrequencyBand:
    """
    Banda de excitación.

    Args:
        f_min (float): Frecuencia mínima en Hz (>= 0). f_min = 0 representa una excitación con DC.
        f_max (float): Frecuencia máxima en Hz (> 0).
        c (float): Velocidad de propagación en m/s.
    """
    f_min: float
    f_max: float
    c: float = C0

    def __post_init__(self):
        if not (math.isfinite(self.f_max) and self.f_max > 0):
            raise InvalidBandError(f"f_max debe ser > 0 (recibido {self.f_max})")
        if not (math.isfinite(self.f_min) and self.f_min >= 0):
            raise InvalidBandError(f"f_min debe ser >= 0 (recibido {self.f_min})")
        if self.f_min > self.f_max:
            raise InvalidBandError(
                f"f_min ({self.f_min}) no puede superar f_max ({self.f_max})")
        if not (math.isfinite(self.c) and self.c > 0):
            raise InvalidBandError(f"c debe ser > 0 (recibido {self.c})")

    @property
    def is_dc(self):
        return self.f_min == 0

    def to_dict(self):
        return {"f_min": self.f_min, "f_max": self.f_max, "c": self.c}


@dataclass(frozen=True)
class MeshParams:
    """
    Fracciones de longitud de onda y controles de refinamiento.

    Los tres primeros campos son divisores de lambda_min: la celda objetivo dentro del
    modelo es lambda_min / max_cell_model, fuera del modelo lambda_min / max_cell_space
    y la celda mínima global lambda_min / min_cell_global.
    n y res_fraction son listas por eje (X, Y, Z): líneas de refinamiento por lado y
    fracción de longitud de onda de la ventana de refinamiento.
    """
    max_cell_model: float = 40.0
    max_cell_space: float = 30.0
    min_cell_global: float = 300.0
    n: tuple = (3, 3, 3)
    res_fraction: tuple = (6.0, 6.0, 6.0)
    pml_n: int = 8
    grading_ratio_max: float = 2.0

    def __post_init__(self):
        # Normaliza las listas a tuplas para que la instancia sea hashable e inmutable.
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "res_fraction", tuple(float(v) for v in self.res_fraction))
        for nombre in ("max_cell_model", "max_cell_space", "min_cell_global"):
            valor = getattr(self, nombre)
            if not (math.isfinite(valor) and valor > 0):
                raise ParameterError(f"{nombre} debe ser > 0 (recibido {valor})")
        if len(self.n) != 3 or any(v < 0 for v in self.n):
            raise ParameterError(f"n debe ser una lista de 3 enteros >= 0 (recibido {list(self.n)})")
        if len(self.res_fraction) != 3 or any(not (v > 0 and math.isfinite(v)) for v in self.res_fraction):
            raise ParameterError(
                f"res_fraction debe ser una lista de 3 reales > 0 (recibido {list(self.res_fraction)})")
        if isinstance(self.pml_n, bool) or int(self.pml_n) != self.pml_n \
                or not (PML_N_MIN <= self.pml_n <= PML_N_MAX):
            raise ParameterError(
                f"pml_n debe ser un entero en [{PML_N_MIN}, {PML_N_MAX}] (recibido {self.pml_n})")
        object.__setattr__(self, "pml_n", int(self.pml_n))
        if not (math.isfinite(self.grading_ratio_max) and self.grading_ratio_max > 1):
            raise ParameterError(
                f"grading_ratio_max debe ser > 1 (recibido {self.grading_ratio_max})")

    @classmethod
    def from_mapping(cls, datos):
        """Construye los parámetros desde un dict (claves con guion o guion bajo)."""
        normalizado = {str(k).replace("-", "_"): v for k, v in datos.items()}
        campos = {k: normalizado[k] for k in cls.__dataclass_fields__ if k in normalizado}
        return cls(**campos)

    def to_dict(self):
        return {
            "max_cell_model": self.max_cell_model,
            "max_cell_space": self.max_cell_space,
            "min_cell_global": self.min_cell_global,
            "n": list(self.n),
            "res_fraction": list(self.res_fraction),
            "pml_n": self.pml_n,
            "grading_ratio_max": self.grading_ratio_max,
        }


@dataclass(frozen=True, eq=False)
class RectilinearGrid:
    """
    Malla rectilínea no uniforme: tres arrays de coordenadas estrictamente crecientes (m).
    model_extent guarda, por eje, el intervalo [min, max] del modelo mallado.
    """
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    band: Optional[FrequencyBand] = None
    params: Optional[MeshParams] = None
    model_extent: tuple = ((0.0, 0.0), (0.0, 0.0), (0.0, 0.0))

    def __post_init__(self):
        for eje in AXES:
            arr = np.array(getattr(self, eje), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, eje, arr)
        object.__setattr__(self, "model_extent",
                           tuple((float(lo), float(hi)) for lo, hi in self.model_extent))

    def lines(self, axis):
        """Devuelve las líneas del eje (índice 0..2 o nombre 'x', 'y', 'z')."""
        if isinstance(axis, str):
            axis = AXES.index(axis.lower())
        return (self.x, self.y, self.z)[axis]

    @property
    def axes(self):
        return (self.x, self.y, self.z)

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    def __eq__(self, other):
        if not isinstance(other, RectilinearGrid):
            return NotImplemented
        return (all(np.array_equal(a, b) for a, b in zip(self.axes, other.axes))
                and self.band == other.band and self.params == other.params
                and self.model_extent == other.model_extent)

    __hash__ = None


class Violation(NamedTuple):
    """Hallazgo de auditoría: regla, eje, índice del intervalo, mensaje y valor medido."""
    rule: str
    axis: str
    index: int
    message: str
    value: float = float("nan")


@dataclass
class GridReport:
    """Resumen de una malla: celdas, espaciados, gradación, paso CFL y hallazgos."""
    cells_per_axis: tuple
    total_cells: int
    min_delta: tuple
    max_delta: tuple
    max_adjacent_ratio: tuple
    cfl_dt: float
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_dict(self):
        """Dict serializable en JSON estricto: los valores no finitos se escriben como None."""
        return {
            "cells_per_axis": list(self.cells_per_axis),
            "total_cells": self.total_cells,
            "min_delta": [_json_float(v) for v in self.min_delta],
            "max_delta": [_json_float(v) for v in self.max_delta],
            "max_adjacent_ratio": [_json_float(v) for v in self.max_adjacent_ratio],
            "cfl_dt": _json_float(self.cfl_dt),
            "violations": [dict(v._asdict(), value=_json_float(v.value)) for v in self.violations],
            "warnings": list(self.warnings),
            "timings": {k: _json_float(v) for k, v in self.timings.items()},
        }


def _json_float(value):
    value = float(value)
    return value if math.isfinite(value) else None


# ---------- ECUACIONES ----------

def wavelengths(band):
    """
    Calcula las longitudes de onda extremas de la banda.

    Args:
        band (FrequencyBand): Banda de excitación.

    Returns:
        Wavelengths: lambda_min = c / f_max; lambda_max = c / f_min, o None si f_min = 0.
    """
    if not band.f_max > 0:
        raise InvalidBandError(f"f_max debe ser > 0 (recibido {band.f_max})")
    lambda_min = band.c / band.f_max
    lambda_max = band.c / band.f_min if band.f_min > 0 else None
    return Wavelengths(lambda_min, lambda_max)


def quarter_mid_padding(lambda_min, lambda_max):
    """
    Distancia entre el borde del modelo y la condición absorbente: un cuarto de la
    longitud de onda media, lambda_min * lambda_max / (2 (lambda_min + lambda_max)).
    Con lambda_max no acotada (None) devuelve el límite analítico lambda_min / 2.
    """
    if not lambda_min > 0:
        raise InvalidArgumentError(f"lambda_min debe ser > 0 (recibido {lambda_min})")
    if lambda_max is None or math.isinf(lambda_max):
        return lambda_min / 2.0
    if not lambda_max > 0:
        raise InvalidArgumentError(f"lambda_max debe ser > 0 (recibido {lambda_max})")
    return lambda_min * lambda_max / (2.0 * (lambda_min + lambda_max))


def cfl_timestep(dx, dy, dz, c=C0):
    """
    Cota superior del paso temporal FDTD (condición de Courant-Friedrichs-Lewy)
    a partir de los espaciados mínimos de cada eje.

    Returns:
        float: 1 / (c * sqrt(1/dx^2 + 1/dy^2 + 1/dz^2)) en segundos.
    """
    for nombre, valor in (("dx", dx), ("dy", dy), ("dz", dz)):
        if not valor > 0:
            raise InvalidArgumentError(f"{nombre} debe ser > 0 (recibido {valor})")
    if not c > 0:
        raise InvalidArgumentError(f"c debe ser > 0 (recibido {c})")
    return 1.0 / (c * math.sqrt(1.0 / dx ** 2 + 1.0 / dy ** 2 + 1.0 / dz ** 2))


def target_cell_size(lambda_min, fraction):
    """Tamaño de celda expresado como fracción de la longitud de onda más corta."""
    if not lambda_min > 0:
        raise InvalidArgumentError(f"lambda_min debe ser > 0 (recibido {lambda_min})")
    if not fraction > 0:
        raise InvalidArgumentError(f"fraction debe ser > 0 (recibido {fraction})")
    return lambda_min / fraction
