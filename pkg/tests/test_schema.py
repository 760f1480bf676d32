from dataclasses import dataclass
from typing import List, Optional

import pytest

from simam_core import schema
from simam_core.errors import ConfigError
from simam_core.nn import ArchitectureConfig, StageOperator, load_architecture
from simam_core.training import OptimizerKind, RunConfig, load_run_config


@dataclass(frozen=True)
class Inner:
    rate: float = 1.0
    count: int = 2


@dataclass(frozen=True)
class Outer:
    name: str
    inner: Inner = Inner()
    tags: List[str] = ()
    limit: Optional[int] = None


def test_from_dict_nested_defaults():
    value = schema.from_dict(Outer, {"name": "a", "inner": {"rate": 3}})
    assert value == Outer("a", Inner(3.0, 2))
    assert isinstance(value.inner.rate, float)


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigError, match=r"\$\.inner: unknown field\(s\) speed"):
        schema.from_dict(Outer, {"name": "a", "inner": {"speed": 1}})


def test_wrong_type_names_the_path():
    with pytest.raises(ConfigError, match=r"\$\.inner\.count"):
        schema.from_dict(Outer, {"name": "a", "inner": {"count": 1.5}})


def test_enum_by_name_or_value():
    assert schema.from_dict(StageOperator, "MBConv6-k5") is StageOperator.MBCONV6_K5
    assert schema.from_dict(StageOperator, "MBCONV6_K5") is StageOperator.MBCONV6_K5
    with pytest.raises(ConfigError):
        schema.from_dict(StageOperator, "MBConv3-k3")


def test_parse_error_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "name": "x",\n  "inner": {"rate": ]\n}\n', encoding="utf-8")
    with pytest.raises(ConfigError, match=r"broken\.json:3"):
        schema.load(Outer, path)


def test_relaxed_json_is_accepted(tmp_path):
    path = tmp_path / "relaxed.json"
    path.write_text("{name: 'x', inner: {rate: 2}}", encoding="utf-8")
    assert schema.load(Outer, path).inner.rate == 2.0


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        schema.load(Outer, "/nonexistent/config.json")


def test_dumps_then_load_architecture(tmp_path):
    config = load_architecture("desk_scale")
    path = tmp_path / "arch.json"
    path.write_text(schema.dumps(config), encoding="utf-8")
    assert schema.load(ArchitectureConfig, path) == config


@pytest.mark.parametrize("name", ["desk_train", "stanford_cars_train"])
def test_shipped_run_configs_load(name):
    run = load_run_config(name)
    assert isinstance(run, RunConfig)
    load_architecture(run.architecture)


def test_stanford_cars_recipe():
    run = load_run_config("stanford_cars_train")
    assert run.train.optimizer.kind is OptimizerKind.SGD
    assert run.train.optimizer.lr0 == 1e-3
    assert run.train.scheduler.t_max == 21000
    assert run.train.scheduler.eta_min == 1e-7


def test_unknown_config_name():
    with pytest.raises(ConfigError, match="no such config"):
        schema.resolve_path("no_such_architecture")
