import json
from pathlib import Path

import pytest

from core_model import FrequencyBand, MeshParams
from scene_ingest import Box, Compound, GeometryTree, Material, Shape

SCENES_DIR = Path(__file__).resolve().parent.parent / "scenes"


def _box_shape(shape_id, x0, material="m"):
    return Shape(shape_id, material, Box((x0, 0.0, 0.0), (x0 + 0.01, 0.01, 0.01)))


@pytest.fixture
def nested_tree():
    """C1[C2[C3[S1], C4[C5[S2, S3], S4]], C6[S5, S6, S7]]"""
    s = {i: _box_shape(f"S{i}", 0.02 * i) for i in range(1, 8)}
    c3 = Compound("C3", (s[1],))
    c5 = Compound("C5", (s[2], s[3]))
    c4 = Compound("C4", (c5, s[4]))
    c2 = Compound("C2", (c3, c4))
    c6 = Compound("C6", (s[5], s[6], s[7]))
    return GeometryTree(Compound("C1", (c2, c6)))


@pytest.fixture
def single_material():
    return {"m": Material("m", epsilon_r=4.0)}


@pytest.fixture
def band_dc():
    return FrequencyBand(0.0, 4e9)


@pytest.fixture
def default_params():
    return MeshParams()


@pytest.fixture
def corner_reflector_path():
    return SCENES_DIR / "corner_reflector.json"


@pytest.fixture
def write_scene(tmp_path):
    """Escribe un documento de escena en tmp_path y devuelve su ruta."""
    def _write(document, name="scene.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def nested_assembly_path():
    """Documento de escena con 6 compuestos y 7 formas anidados como nested_tree."""
    return Path(__file__).resolve().parent / "data" / "nested_assembly.json"
