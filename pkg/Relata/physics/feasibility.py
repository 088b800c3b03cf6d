# Relata/physics/feasibility.py

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy import stats

from Relata.constants import C, C_SQUARED
from Relata.exceptions import InfeasibleConfigurationError, InvalidQueryError, RelataError
from Relata.experiment import ExperimentGeometry, Flag
from Relata.physics.relativity import (
    ExperimentClass,
    ImpactClass,
    build_impact_contexts,
    classify_experiment,
)

SWEEP_AXES = ("V", "L", "delta_t")

# 三種光纖長度情境及其公布的 δt 上限（秒）
FIBER_SCENARIOS: Tuple[Tuple[str, float, float], ...] = (
    ("4 km fiber Bell test", 4_000.0, 4.4e-12),
    ("24 km quantum channel", 24_000.0, 26.4e-12),
    ("100 km long-distance link", 100_000.0, 111e-12),
)


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if value is None or not math.isfinite(value) or value <= 0:
            raise InvalidQueryError(f"{name} must be positive and finite, got {value!r}.")


def max_delay(V: float, L: float) -> float:
    """
    計算「先行-先行」配置允許的最大光程延遲 δt < VL/c²（忽略 τ）。

    Args:
        V (float): BS2 速度，m/s，0 < V < c
        L (float): 總距離 L1 + L2，公尺

    Returns:
        float: δt 的嚴格上限，秒

    Raises:
        InvalidQueryError: 輸入非正或 V >= c
    """
    _require_positive(V=V, L=L)
    if V >= C:
        raise InvalidQueryError(f"V must be below c = 299792458 m/s, got {V!r}.")
    return V * L / C_SQUARED


def required_velocity(delta_t: float, tau: float, L: float) -> float:
    """
    計算「先行-先行」配置所需的最低 BS2 速度 c²·(τ + δt)/L。

    Raises:
        InvalidQueryError: L 非正，或 τ + δt 非正
        InfeasibleConfigurationError: 所需速度不小於光速
    """
    _require_positive(L=L)
    if not (math.isfinite(delta_t) and math.isfinite(tau)):
        raise InvalidQueryError(f"delta_t and tau must be finite, got {delta_t!r}, {tau!r}.")
    total_delay = tau + delta_t
    if total_delay <= 0:
        raise InvalidQueryError(f"tau + delta_t must be positive, got {total_delay!r}.")
    velocity = C_SQUARED * total_delay / L
    if velocity >= C:
        raise InfeasibleConfigurationError(
            f"Required velocity {velocity:.6g} m/s is not below c = 299792458 m/s "
            f"(delta_t={delta_t!r} s, tau={tau!r} s, L={L!r} m)."
        )
    return velocity


def tilt_angle(V: float) -> float:
    """滿足 tan θ = V/c 的傾斜角 θ（弧度）。"""
    if not (math.isfinite(V) and abs(V) < C):
        raise InvalidQueryError(f"V must satisfy |V| < c, got {V!r}.")
    return math.atan(V / C)


@dataclass(frozen=True)
class FeasibilityQuery:
    """
    可行性問題：V 與 δt 之中恰好一個未知。

    Args:
        L (float): 總距離 L1 + L2，公尺
        V (float, optional): BS2 速度，m/s
        tau (float): 發射延遲，秒
        delta_t (float, optional): 光程延遲，秒
    """
    L: float
    V: Optional[float] = None
    tau: float = 0.0
    delta_t: Optional[float] = None

    @property
    def unknown(self) -> str:
        missing = [name for name in ("V", "delta_t") if getattr(self, name) is None]
        if len(missing) != 1:
            raise InvalidQueryError(
                f"Exactly one of V and delta_t must be unknown; missing {missing or 'none'}."
            )
        return missing[0]

    def solve(self) -> Tuple[str, float]:
        """
        求出未知的那一個量。

        Returns:
            Tuple[str, float]: ('delta_t_max', 秒) 或 ('V_min', m/s)
        """
        if self.unknown == "delta_t":
            return "delta_t_max", max_delay(self.V, self.L)
        return "V_min", required_velocity(self.delta_t, self.tau, self.L)


def _axis_values(start: float, stop: float, step: float) -> np.ndarray:
    if not all(math.isfinite(x) for x in (start, stop, step)) or step <= 0:
        raise InvalidQueryError(f"Sweep needs finite start/stop and step > 0, got {start}:{stop}:{step}.")
    if stop < start:
        raise InvalidQueryError(f"Sweep range is empty: start {start!r} > stop {stop!r}.")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def sweep(
    axis: str,
    values: Optional[Iterable[float]] = None,
    start: Optional[float] = None,
    stop: Optional[float] = None,
    step: Optional[float] = None,
    V: Optional[float] = None,
    L: Optional[float] = None,
    tau: float = 0.0,
    delta_t: Optional[float] = None,
) -> pd.DataFrame:
    """
    沿單一軸掃描可行性條件。

    axis 為 'V' 或 'L' 時，value 欄為 maxDelay；axis 為 'delta_t' 時，value 欄為
    requiredVelocity。feasible 欄在固定的 δt（或掃描中的 δt）嚴格小於 VL/c² 時為 True。
    沒有可比較的固定參數時（V、L 軸未給 delta_t，delta_t 軸未給 V），feasible 表示該點存在
    低於光速的先行-先行配置，也就是 value 可以算出。
    發生錯誤的列保留下來並標記為不可行，錯誤訊息寫在 error 欄。

    Args:
        axis (str): 'V'、'L' 或 'delta_t'
        values (Iterable[float], optional): 明確的輸入值；未給時由 start/stop/step 產生（含終點）
        start, stop, step (float, optional): 掃描範圍
        V, L, tau, delta_t (float, optional): 固定參數

    Returns:
        pd.DataFrame: 欄位 input, value, feasible, error，依 input 排序

    Raises:
        InvalidQueryError: 軸名稱無效、範圍為空，或缺少該軸需要的固定參數
    """
    if axis not in SWEEP_AXES:
        raise InvalidQueryError(f"Unknown sweep axis {axis!r}; use one of {', '.join(SWEEP_AXES)}.")
    name, fixed = {"V": ("L", L), "L": ("V", V), "delta_t": ("L", L)}[axis]
    if fixed is None:
        raise InvalidQueryError(f"Sweeping {axis} needs a fixed {name}.")
    if values is None:
        inputs = _axis_values(start, stop, step)
    else:
        inputs = np.array(sorted(float(v) for v in values), dtype=float)
    if inputs.size == 0:
        raise InvalidQueryError("Sweep range is empty.")

    rows = []
    for x in inputs.tolist():
        row = {"input": x, "value": math.nan, "feasible": False, "error": ""}
        try:
            if axis == "delta_t":
                row["value"] = required_velocity(x, tau, L)
                row["feasible"] = V is None or tau + x < max_delay(V, L)
            else:
                velocity, length = (x, L) if axis == "V" else (V, x)
                row["value"] = max_delay(velocity, length)
                row["feasible"] = delta_t is None or tau + delta_t < row["value"]
        except RelataError as e:
            row["error"] = e.message
            logger.debug("sweep row {}={} flagged: {}", axis, x, e.message)
        rows.append(row)
    return pd.DataFrame(rows, columns=["input", "value", "feasible", "error"])


def fiber_scenarios(V: float = 100.0) -> pd.DataFrame:
    """
    三種光纖長度情境的 δt 上限，並列公布值與計算值。

    Returns:
        pd.DataFrame: 欄位 scenario, L, printed, computed, deviation（相對誤差）
    """
    rows = []
    for name, length, printed in FIBER_SCENARIOS:
        computed = max_delay(V, length)
        rows.append({
            "scenario": name,
            "L": length,
            "printed": printed,
            "computed": computed,
            "deviation": (computed - printed) / printed,
        })
    return pd.DataFrame(rows)


def class_probabilities(
    geometry: ExperimentGeometry,
    flags: Sequence[Flag] = (Flag.U, Flag.U),
    tie_tolerance: float = 0.0,
) -> Dict[ExperimentClass, float]:
    """
    計算高斯抖動模型下各實驗類別的機率。

    令 Z = τ′ + (L2′ − L1)/c ~ N(τ + δt, σ_τ² + (σ_path/c)²)，撞擊 1（靜止分光鏡）在 Z > tol 時
    為先行，撞擊 2 在 Z < VL/c² − tol/γ 時為先行。沒有抖動時直接以撞擊分類判斷，
    結果只有一個類別，機率為 1。

    Args:
        geometry (ExperimentGeometry): 實驗幾何
        flags (Sequence[Flag]): 兩側的可區分旗標
        tie_tolerance (float): 同時判定的容許值（秒）

    Returns:
        Dict[ExperimentClass, float]: 機率大於 0 的類別及其機率
    """
    flag1, flag2 = flags
    d_class = {
        (Flag.D, Flag.D): (ImpactClass.DISTINGUISHABLE, ImpactClass.DISTINGUISHABLE),
        (Flag.D, Flag.U): (ImpactClass.DISTINGUISHABLE, ImpactClass.BEFORE),
        (Flag.U, Flag.D): (ImpactClass.BEFORE, ImpactClass.DISTINGUISHABLE),
    }
    if (flag1, flag2) in d_class:
        return {ExperimentClass(*d_class[(flag1, flag2)]): 1.0}

    if not geometry.has_jitter:
        return {classify_experiment(*build_impact_contexts(geometry, flags=flags), tie_tolerance): 1.0}

    mean = geometry.tau + geometry.delta_t
    sd = math.hypot(geometry.tau_jitter_sd, geometry.path_jitter_sd / C)
    gamma = 1.0 / math.sqrt(1.0 - (geometry.V / C) ** 2)
    lower = tie_tolerance
    upper = geometry.V * geometry.L / C_SQUARED - tie_tolerance / gamma

    def below(x: float) -> float:
        return float(stats.norm.cdf(x, loc=mean, scale=sd))

    def probability(first_before: bool, second_before: bool) -> float:
        # 第一個撞擊先行: Z > lower；第二個撞擊先行: Z < upper
        lo = lower if first_before else -math.inf
        hi = math.inf if first_before else lower
        if second_before:
            hi = min(hi, upper)
        else:
            lo = max(lo, upper)
        if hi <= lo:
            return 0.0
        return (1.0 if hi == math.inf else below(hi)) - (0.0 if lo == -math.inf else below(lo))

    result = {}
    for first_before in (True, False):
        for second_before in (True, False):
            key = ExperimentClass(
                ImpactClass.BEFORE if first_before else ImpactClass.NON_BEFORE,
                ImpactClass.BEFORE if second_before else ImpactClass.NON_BEFORE,
            )
            p = probability(first_before, second_before)
            if p > 0:
                result[key] = p
    logger.debug("class probabilities for {}: {}", geometry, {str(k): v for k, v in result.items()})
    return result
