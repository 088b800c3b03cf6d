# Relata/export/manifest.py

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, TextIO, Union

from loguru import logger

from Relata import __version__
from Relata.constants import BLOCK_SIZE, DRAWS_PER_TRIAL, MANIFEST_VERSION
from Relata.exceptions import ConfigError, UnsupportedConfigurationError
from Relata.experiment import SimulationConfig
from Relata.physics.statistics import marginals, outcome_intervals
from Relata.simulation.config import config_to_dict, parse_config
from Relata.simulation.rng import TrialStream
from Relata.simulation.trial_runner import SimulationResult, expected_correlation

TIMESTAMP_FIELD = "timestamp"


def build_manifest(result: SimulationResult, timestamp: Optional[datetime] = None,
                   canonical: bool = False) -> Dict[str, Any]:
    """
    建立可重現執行的紀錄文件。

    文件本身即可重現該次執行：config 區段為完整展開的設定，rng 區段記錄產生器與區塊大小。

    Args:
        result (SimulationResult): 模擬結果
        timestamp (datetime, optional): 執行時間，預設為現在（UTC）
        canonical (bool): True 時省略時間戳，用於逐位元比對

    Returns:
        Dict[str, Any]: manifest 內容
    """
    config = result.config
    estimate = result.estimate
    sides = marginals(result.counts)
    try:
        e_closed = expected_correlation(config)
    except UnsupportedConfigurationError:
        e_closed = None
    intervals = outcome_intervals(result.counts)

    manifest: Dict[str, Any] = {
        "manifest_version": MANIFEST_VERSION,
        "relata_version": __version__,
    }
    if not canonical:
        manifest[TIMESTAMP_FIELD] = (timestamp or datetime.now(timezone.utc)).isoformat()
    manifest.update({
        "seed": config.seed,
        "config": config_to_dict(config),
        "rng": {
            "generator": TrialStream.generator_name,
            "key": "seed + stream * 2**64",
            "block_size": BLOCK_SIZE,
            "draws_per_trial": DRAWS_PER_TRIAL,
        },
        "summary": {
            "trials": result.counts.total,
            "counts": result.counts.as_dict(),
            "class_counts": result.counts.class_counts,
            "class_fractions": result.counts.class_fractions(),
            "E_hat": estimate.e_hat,
            "SE": estimate.se,
            "E_closed": e_closed,
            "marginals": {"p1_plus": sides.p1, "se1": sides.se1, "p2_plus": sides.p2, "se2": sides.se2},
            "outcome_intervals": {
                row.outcome: {"lower": float(row.lower), "upper": float(row.upper)}
                for row in intervals.itertuples(index=False)
            },
            "interval_method": {"method": "clopper-pearson", "confidence": 0.95},
        },
    })
    return manifest


def canonical_manifest(manifest: Dict[str, Any]) -> Dict[str, Any]:
    """去掉 timestamp 的副本，用於比較輸出是否可重現。"""
    return {key: value for key, value in manifest.items() if key != TIMESTAMP_FIELD}


def dumps_manifest(manifest: Dict[str, Any]) -> str:
    return json.dumps(manifest, indent=2, allow_nan=False) + "\n"


def write_manifest(manifest: Dict[str, Any], destination: Union[str, Path, TextIO]) -> None:
    """
    將執行紀錄以 JSON 寫入檔案路徑或已開啟的文字串流。

    Args:
        manifest (Dict[str, Any]): 執行紀錄
        destination (Union[str, Path, TextIO]): 輸出路徑或串流
    """
    text = dumps_manifest(manifest)
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text, encoding="utf-8")
        logger.info("wrote manifest to {}", destination)
    else:
        destination.write(text)


def load_config_or_manifest(path: Union[str, Path]) -> SimulationConfig:
    """
    讀取設定檔或先前輸出的 manifest。

    Args:
        path (str | Path): YAML 設定檔或 JSON manifest 的路徑

    Returns:
        SimulationConfig: 解析後的設定

    Raises:
        ConfigError: 檔案無法讀取或內容不合法
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}")
    return parse_config(text)
