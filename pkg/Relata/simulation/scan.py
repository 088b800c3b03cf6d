# Relata/simulation/scan.py

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from Relata.exceptions import UsageError
from Relata.experiment import Model, SimulationConfig
from Relata.simulation.trial_runner import TrialRunner, expected_correlation

SCAN_COLUMNS = ["alpha", "beta", "model", "E_closed", "E_hat", "SE", "N"]


def _parse_range(text: str) -> np.ndarray:
    parts = text.strip().split(":")
    try:
        numbers = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"Invalid angle range {text!r}; expected START[:STOP:STEP] in degrees.")
    if len(numbers) == 1:
        return np.array(numbers)
    if len(numbers) != 3:
        raise UsageError(f"Invalid angle range {text!r}; expected START[:STOP:STEP] in degrees.")
    start, stop, step = numbers
    if not all(math.isfinite(x) for x in numbers) or step <= 0:
        raise UsageError(f"Invalid angle range {text!r}; step must be positive.")
    if stop < start:
        return np.array([])
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


@dataclass(frozen=True)
class AngleGrid:
    """
    以度為單位的 (α, β) 網格點。

    語法為 ``ALPHA,BETA``：ALPHA 是 ``START[:STOP:STEP]``；BETA 可以是同樣格式的範圍
    （取笛卡兒積）、``alpha``（β = α）或 ``-alpha``（β = −α）。
    """
    points: Tuple[Tuple[float, float], ...]

    @classmethod
    def parse(cls, spec: str) -> "AngleGrid":
        """
        解析角度網格字串。

        Args:
            spec (str): 例如 '0:90:11.25,-alpha' 或 '0:80:10,0:80:10'

        Returns:
            AngleGrid: 網格點

        Raises:
            UsageError: 語法錯誤或網格為空
        """
        if spec is None or "," not in spec:
            raise UsageError(f"Invalid angle grid {spec!r}; expected ALPHA,BETA.")
        alpha_text, beta_text = (part.strip() for part in spec.split(",", 1))
        alphas = _parse_range(alpha_text)
        if beta_text in ("alpha", "+alpha"):
            points = [(a, a) for a in alphas.tolist()]
        elif beta_text == "-alpha":
            points = [(a, -a) for a in alphas.tolist()]
        else:
            betas = _parse_range(beta_text)
            points = [(a, b) for a in alphas.tolist() for b in betas.tolist()]
        if not points:
            raise UsageError(f"Angle grid {spec!r} is empty.")
        return cls(tuple(points))

    def __len__(self):
        return len(self.points)


def run_scan(config: SimulationConfig, grid: AngleGrid, models: Optional[List[Model]] = None,
             workers: int = 1, progress: bool = False) -> pd.DataFrame:
    """
    在每個網格點上以兩種模型執行模擬，比較估計值與封閉形式。

    每個 (網格點, 模型) 使用獨立的亂數子串流 stream = 2·點編號 + 模型編號，
    因此結果只取決於 seed 與網格。

    Args:
        config (SimulationConfig): 基本設定（幾何、試驗數、seed）
        grid (AngleGrid): 角度網格
        models (List[Model], optional): 要執行的模型，預設 QM 與 AD
        workers (int): 每次模擬的執行緒數
        progress (bool): 是否顯示進度條

    Returns:
        pd.DataFrame: 欄位 alpha, beta, model, E_closed, E_hat, SE, N
    """
    models = models or [Model.QM, Model.AD]
    rows = []
    tasks = [(i, point, model) for i, point in enumerate(grid.points) for model in models]
    for index, (alpha, beta), model in tqdm(tasks, desc="scan", unit="run", disable=not progress, leave=False):
        point_config = config.replace(
            alpha_deg=alpha,
            beta_deg=beta,
            model=model,
            stream=2 * index + (0 if model is Model.QM else 1),
        )
        result = TrialRunner(point_config, workers=workers).run()
        estimate = result.estimate
        rows.append({
            "alpha": alpha,
            "beta": beta,
            "model": model.value,
            "E_closed": expected_correlation(point_config),
            "E_hat": estimate.e_hat,
            "SE": estimate.se,
            "N": estimate.n,
        })
    logger.debug("scan finished: {} points x {} models", len(grid), len(models))
    return pd.DataFrame(rows, columns=SCAN_COLUMNS)
