import json

import pytest

import config_manager
from core_model import ConfigError, InvalidBandError, ParameterError


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(config_manager.CONFIG_ENV_VAR, raising=False)


def test_missing_default_file_gives_defaults():
    assert config_manager.load_parameters() == config_manager.DEFAULT_PARAMETERS


def test_explicit_missing_file_raises(tmp_path):
    with pytest.raises(ConfigError):
        config_manager.load_parameters(tmp_path / "no_existe.json")


def test_malformed_file_raises(tmp_path):
    path = tmp_path / "roto.json"
    path.write_text("{ pml-n: 8", encoding="utf-8")
    with pytest.raises(ConfigError):
        config_manager.load_parameters(path)


def test_file_overrides_defaults_and_accepts_underscores(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"max_cell_model": 50, "pml-n": 10}), encoding="utf-8")
    params = config_manager.load_parameters(path)
    assert params["max-cell-model"] == 50
    assert params["pml-n"] == 10
    assert params["max-cell-space"] == 30.0


def test_env_var_points_to_config(tmp_path, monkeypatch):
    path = tmp_path / "env.json"
    path.write_text(json.dumps({"f-max": 2e9}), encoding="utf-8")
    monkeypatch.setenv(config_manager.CONFIG_ENV_VAR, str(path))
    assert config_manager.load_parameters()["f-max"] == 2e9


def test_save_then_load(tmp_path):
    path = tmp_path / "guardado.json"
    params = dict(config_manager.DEFAULT_PARAMETERS, **{"n": [1, 2, 3]})
    assert config_manager.save_parameters(params, path)
    assert config_manager.load_parameters(path)["n"] == [1, 2, 3]


def test_save_to_missing_directory_fails(tmp_path):
    assert not config_manager.save_parameters({}, tmp_path / "no" / "c.json")


def test_merge_precedence_flags_over_config_over_defaults():
    merged = config_manager.merge_parameters({"max-cell-model": 50, "pml-n": 10},
                                             {"max-cell-model": 45, "pml-n": None})
    assert merged["max-cell-model"] == 45
    assert merged["pml-n"] == 10
    assert merged["min-cell-global"] == 300.0


def test_build_objects():
    merged = config_manager.merge_parameters({}, {"f-min": 1e9, "f-max": 3e9, "res-fraction": [4, 5, 6]})
    params = config_manager.build_mesh_params(merged)
    band = config_manager.build_band(merged)
    assert params.res_fraction == (4.0, 5.0, 6.0)
    assert (band.f_min, band.f_max) == (1e9, 3e9)


def test_build_objects_validate():
    with pytest.raises(ParameterError):
        config_manager.build_mesh_params(config_manager.merge_parameters({}, {"pml-n": 3}))
    with pytest.raises(InvalidBandError):
        config_manager.build_band(config_manager.merge_parameters({}, {"f-min": 5e9}))


@pytest.mark.parametrize("valores", [{"pml-n": "ocho"}, {"n": 3}, {"max-cell-model": "fino"}])
def test_mesh_params_with_wrong_type(valores):
    with pytest.raises(ConfigError):
        config_manager.build_mesh_params(config_manager.merge_parameters(valores, {}))


@pytest.mark.parametrize("valores", [{"f-max": None}, {"f-min": "cero"}])
def test_band_with_wrong_type(valores):
    with pytest.raises(ConfigError):
        config_manager.build_band(config_manager.merge_parameters(valores, {}))


@pytest.mark.parametrize("valor, esperado", [(0, 0), (None, 0), (4, 4)])
def test_build_threads(valor, esperado):
    assert config_manager.build_threads({"threads": valor}) == esperado


@pytest.mark.parametrize("valor", [-1, "dos", 1.5])
def test_build_threads_invalid(valor):
    with pytest.raises(ConfigError):
        config_manager.build_threads({"threads": valor})
