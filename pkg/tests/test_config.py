import numpy as np
import pytest

import coneflow
from coneflow import configs
from coneflow.core.config import (
    DEFAULT_CONFIGS,
    Configs,
    check_known_keys,
    load_config,
    merge_settings,
    using_settings,
)
from coneflow.core.errors import ConfigValidationError, ConeflowError
from coneflow.core.globals import global_vars, next_run_id
from coneflow.utils import LoguruFormatter, make_rng, output_dir


def test_getattrs_dotted_key():
    assert configs.getattrs("flow.c_stab.euler") == 0.2
    assert configs.getattrs("spectra.tolerance.circle") == 0.001


def test_getattrs_falls_back_to_defaults():
    partial = Configs({"flow": {"scheme": "rk4"}})
    assert partial.getattrs("flow.scheme") == "rk4"
    assert partial.getattrs("flow.t_max") == DEFAULT_CONFIGS.getattrs("flow.t_max")


def test_missing_key_raises():
    with pytest.raises(KeyError):
        Configs({})["nothing"]


def test_unknown_override_key_names_path():
    with pytest.raises(ConfigValidationError) as excinfo:
        check_known_keys({"flow": {"shceme": "rk4"}}, DEFAULT_CONFIGS.to_dict())
    assert "flow.shceme" in str(excinfo.value)
    assert excinfo.value.module == "config"


def test_free_form_metadata_stays_open():
    check_known_keys({"metadata": {"anything": 1}}, DEFAULT_CONFIGS.to_dict())


def test_merge_settings_does_not_touch_globals():
    merged = merge_settings({"seed": 7})
    assert merged.seed == 7
    assert configs.seed == 42


def test_using_settings_restores():
    with using_settings({"flow": {"trace_every": 3}}):
        assert configs.getattrs("flow.trace_every") == 3
    assert configs.getattrs("flow.trace_every") == 10


def test_load_config_rejects_unknown_extension(tmp_path):
    path = tmp_path / "settings.ini"
    path.write_text("[flow]\n")
    with pytest.raises(ConfigValidationError):
        load_config(str(path))


def test_load_config_toml(tmp_path):
    path = tmp_path / "coneflow.toml"
    path.write_text('[flow]\nscheme = "rk4"\n')
    assert load_config(str(path)).flow.scheme == "rk4"


def test_errors_name_module_and_index():
    err = ConeflowError("bad node", module="immersion", index=5)
    assert str(err) == "[immersion @ index 5] bad node"
    assert isinstance(err, ValueError)


def test_output_dir_precedence(monkeypatch):
    monkeypatch.delenv("CONEFLOW_OUT", raising=False)
    assert output_dir() == configs.getattrs("settings.output.directory")
    monkeypatch.setenv("CONEFLOW_OUT", "/tmp/from-env")
    assert output_dir() == "/tmp/from-env"
    assert output_dir("explicit") == "explicit"


def test_module_rngs_are_reproducible_and_independent():
    a = make_rng("slag").standard_normal(4)
    b = make_rng("slag").standard_normal(4)
    c = make_rng("flow").standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    assert not np.allclose(a, make_rng("slag", seed=1).standard_normal(4))


def test_loguru_formatter_truncates():
    formatter = LoguruFormatter(fmt="{message}", max_length=10, suffix_length=3)
    record = {"message": "x" * 30, "extra": {}}
    fmt = formatter.loguru_format(record)
    assert "trunc_message" in fmt
    assert record["extra"]["trunc_message"].endswith("xxx")


def test_to_yaml_round_trips():
    text = Configs({"flow": {"scheme": "rk4", "c_stab": {"rk4": 0.4}}}).to_yaml()
    assert "scheme: rk4" in text
    assert "rk4: 0.4" in text


def test_init_runs_once(monkeypatch):
    monkeypatch.setattr(global_vars, "initialized", False)
    seen = []
    coneflow.init(lambda c: seen.append(c.getattrs("seed")))
    coneflow.init(lambda c: seen.append("again"))
    try:
        assert seen == [42]
        assert configs.info.start_time
    finally:
        configs.pop("info", None)


def test_run_ids_increase():
    first, second = next_run_id(), next_run_id("case")
    assert first.startswith("run-")
    assert second.startswith("case-")
    assert int(second.split("-")[1]) == int(first.split("-")[1]) + 1
