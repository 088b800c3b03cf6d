# Relata/simulation/config.py

import math
from typing import Any, Dict, Mapping, Optional

import yaml
from loguru import logger

from Relata.constants import CONFIG_SCHEMA_VERSION
from Relata.exceptions import ConfigError, ConsistencyError, UnknownKeyError
from Relata.experiment import ExperimentGeometry, Model, NonBeforePolicy, SimulationConfig, parse_flag

TOP_LEVEL_KEYS = {
    "schema_version", "geometry", "angles", "model", "trials", "seed", "stream",
    "tie_tolerance", "nonbefore_policy", "distinguishability",
}
GEOMETRY_KEYS = {"L1", "L2", "L", "V", "tau", "delta_t", "tau_jitter_sd", "path_jitter_sd"}
ANGLE_KEYS = {"alpha_deg", "beta_deg"}

# 使用者給的 δt 與 (L2 − L1)/c 的比對容許誤差
DELTA_T_REL_TOL = 1e-6
DELTA_T_ABS_TOL = 1e-21


def _check_keys(section: Mapping[str, Any], allowed, name: str) -> None:
    if not isinstance(section, Mapping):
        raise ConfigError(f"must be a mapping, got {type(section).__name__}", field=name)
    unknown = set(section) - allowed
    if unknown:
        raise UnknownKeyError(unknown, section=name)


def _number(section: Mapping[str, Any], key: str, field: str, default: Optional[float] = None) -> Optional[float]:
    if key not in section:
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        # PyYAML 把 4e-12 這種沒有小數點的寫法讀成字串
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"must be a number, got {value!r}", field=field)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"must be finite, got {value!r}", field=field)
    return value


def _integer(section: Mapping[str, Any], key: str, default: int) -> int:
    if key not in section:
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"must be an integer, got {value!r}", field=key)
    return value


def _parse_geometry(section: Mapping[str, Any]) -> ExperimentGeometry:
    _check_keys(section, GEOMETRY_KEYS, "geometry")
    values = {key: _number(section, key, f"geometry.{key}") for key in GEOMETRY_KEYS}
    if values["V"] is None:
        raise ConfigError("is required", field="geometry.V")
    extras = {
        "V": values["V"],
        "tau": values["tau"] or 0.0,
        "tau_jitter_sd": values["tau_jitter_sd"] or 0.0,
        "path_jitter_sd": values["path_jitter_sd"] or 0.0,
    }
    has_paths = values["L1"] is not None or values["L2"] is not None

    if has_paths:
        if values["L1"] is None or values["L2"] is None:
            raise ConfigError("L1 and L2 must be given together", field="geometry")
        geometry = ExperimentGeometry(L1=values["L1"], L2=values["L2"], **extras)
        if values["L"] is not None and not math.isclose(values["L"], geometry.L, rel_tol=1e-12):
            raise ConsistencyError(f"L = {values['L']!r} m but L1 + L2 = {geometry.L!r} m", field="geometry.L")
    elif values["L"] is not None and values["delta_t"] is not None:
        if values["L"] <= 0:
            raise ConfigError(f"must be > 0, got {values['L']!r}", field="geometry.L")
        geometry = ExperimentGeometry.from_total_length(values["L"], values["delta_t"], **extras)
    else:
        raise ConfigError("give L1 and L2, or L and delta_t", field="geometry")

    if values["delta_t"] is not None and not math.isclose(
        values["delta_t"], geometry.delta_t, rel_tol=DELTA_T_REL_TOL, abs_tol=DELTA_T_ABS_TOL
    ):
        raise ConsistencyError(
            f"delta_t = {values['delta_t']!r} s but (L2 - L1)/c = {geometry.delta_t!r} s; delta_t is derived",
            field="geometry.delta_t",
        )
    return geometry


def config_from_dict(document: Mapping[str, Any]) -> SimulationConfig:
    """
    驗證設定文件並套用預設值。

    Args:
        document (Mapping[str, Any]): 已解析的設定文件

    Returns:
        SimulationConfig: 完整的模擬設定

    Raises:
        UnknownKeyError: 出現未定義的欄位
        ConfigError: 欄位缺漏、型別錯誤或違反界限
        ConsistencyError: 重複欄位彼此矛盾
        InvalidVelocityError: |V| >= c
    """
    if not isinstance(document, Mapping):
        raise ConfigError("config document must be a mapping")
    _check_keys(document, TOP_LEVEL_KEYS, "config")

    version = document.get("schema_version", CONFIG_SCHEMA_VERSION)
    if version != CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {version!r}", field="schema_version")
    if "geometry" not in document:
        raise ConfigError("is required", field="geometry")
    if "angles" not in document:
        raise ConfigError("is required", field="angles")

    geometry = _parse_geometry(document["geometry"])
    angles = document["angles"]
    _check_keys(angles, ANGLE_KEYS, "angles")
    alpha_deg = _number(angles, "alpha_deg", "angles.alpha_deg", 0.0)
    beta_deg = _number(angles, "beta_deg", "angles.beta_deg", 0.0)

    try:
        model = Model(str(document.get("model", Model.QM.value)).lower())
    except ValueError:
        raise ConfigError(f"must be 'qm' or 'ad', got {document['model']!r}", field="model")
    try:
        policy = NonBeforePolicy(str(document.get("nonbefore_policy", NonBeforePolicy.ERROR.value)).lower())
    except ValueError:
        choices = ", ".join(p.value for p in NonBeforePolicy)
        raise ConfigError(f"must be one of {choices}, got {document['nonbefore_policy']!r}",
                          field="nonbefore_policy")

    flags = document.get("distinguishability", ["u", "u"])
    if not isinstance(flags, (list, tuple)) or len(flags) != 2:
        raise ConfigError(f"must be a pair of u/d flags, got {flags!r}", field="distinguishability")

    config = SimulationConfig(
        geometry=geometry,
        alpha_deg=alpha_deg,
        beta_deg=beta_deg,
        model=model,
        trials=_integer(document, "trials", 100_000),
        seed=_integer(document, "seed", 0),
        stream=_integer(document, "stream", 0),
        tie_tolerance=_number(document, "tie_tolerance", "tie_tolerance", 0.0),
        nonbefore_policy=policy,
        distinguishability=(parse_flag(flags[0]), parse_flag(flags[1])),
    )
    logger.debug("parsed {}", config)
    return config


def parse_config(text: str) -> SimulationConfig:
    """
    解析 YAML（或 JSON）設定文件。

    也接受執行紀錄 manifest，此時使用其中的 `config` 區段。

    Args:
        text (str): 設定檔內容

    Returns:
        SimulationConfig: 完整的模擬設定

    Raises:
        ConfigError: 無法解析或內容無效
    """
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"not a valid YAML document: {e}")
    if isinstance(document, Mapping) and "manifest_version" in document:
        if "config" not in document:
            raise ConfigError("manifest has no config section")
        document = document["config"]
    return config_from_dict(document)


def config_to_dict(config: SimulationConfig) -> Dict[str, Any]:
    """以設定檔格式輸出完整設定；重新解析會得到相同的 SimulationConfig。"""
    geometry = config.geometry
    return {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "geometry": {
            "L1": geometry.L1,
            "L2": geometry.L2,
            "V": geometry.V,
            "tau": geometry.tau,
            "delta_t": geometry.delta_t,
            "tau_jitter_sd": geometry.tau_jitter_sd,
            "path_jitter_sd": geometry.path_jitter_sd,
        },
        "angles": {"alpha_deg": config.alpha_deg, "beta_deg": config.beta_deg},
        "model": config.model.value,
        "trials": config.trials,
        "seed": config.seed,
        "stream": config.stream,
        "tie_tolerance": config.tie_tolerance,
        "nonbefore_policy": config.nonbefore_policy.value,
        "distinguishability": [flag.value for flag in config.distinguishability],
    }
