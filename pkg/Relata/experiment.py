# Relata/experiment.py

import math
import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from Relata.constants import C
from Relata.exceptions import ConfigError, InvalidInputError, InvalidVelocityError


class Flag(str, Enum):
    """撞擊的可區分旗標：u 表示輸入子系綜不可區分，d 表示可區分。"""
    U = "u"
    D = "d"


class Model(str, Enum):
    QM = "qm"
    AD = "ad"


class NonBeforePolicy(str, Enum):
    """替代描述遇到 (NonBefore, NonBefore) 實驗時的處理方式。"""
    ERROR = "error"
    TREAT_AS_QM = "treat-as-qm"
    TREAT_AS_LOCAL = "treat-as-local"


@dataclass(frozen=True)
class AngleSettings:
    """
    兩側半波片的旋轉角度，單位為弧度。

    Args:
        alpha (float): 第 1 側的旋轉角度
        beta (float): 第 2 側的旋轉角度
    """
    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise InvalidInputError(f"Angles must be finite, got alpha={self.alpha!r}, beta={self.beta!r}.")

    @classmethod
    def from_degrees(cls, alpha_deg: float, beta_deg: float) -> "AngleSettings":
        return cls(float(np.deg2rad(alpha_deg)), float(np.deg2rad(beta_deg)))

    @staticmethod
    def _reduce(angle: float) -> float:
        # 已在 [-π/2, π/2) 內的角度原樣返回，保留 45° + (-45°) = 0 的精確性
        half = math.pi / 2
        if -half <= angle < half:
            return angle
        return (angle + half) % math.pi - half

    def reduced(self) -> "AngleSettings":
        """
        將兩個角度約化到 [-π/2, π/2)。所有聯合分布對每個角度都以 π 為週期。

        Returns:
            AngleSettings: 約化後的角度
        """
        return AngleSettings(self._reduce(self.alpha), self._reduce(self.beta))

    def swapped(self) -> "AngleSettings":
        return AngleSettings(self.beta, self.alpha)

    def __repr__(self):
        return f"<AngleSettings(alpha={math.degrees(self.alpha):g}°, beta={math.degrees(self.beta):g}°)>"


@dataclass(frozen=True)
class ExperimentGeometry:
    """
    移動分光鏡實驗的一維配置。

    光源位於原點，BS1 位於 -L1，BS2 位於 +L2。光子 1 抵達時 BS1 靜止；
    光子 2 抵達時 BS2 以速度 V 移動。

    Args:
        L1 (float): 光源到 BS1 的光程，公尺
        L2 (float): 光源到 BS2 的光程，公尺
        V (float): 撞擊時 BS2 的速度，m/s，正值表示遠離光源
        tau (float): 光子 2 相對光子 1 的發射延遲，秒
        tau_jitter_sd (float): 每次試驗 tau 的高斯抖動標準差，秒
        path_jitter_sd (float): 每次試驗 L2 的高斯抖動標準差，公尺
    """
    L1: float
    L2: float
    V: float = 0.0
    tau: float = 0.0
    tau_jitter_sd: float = 0.0
    path_jitter_sd: float = 0.0

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_total_length(cls, L: float, delta_t: float, **kwargs) -> "ExperimentGeometry":
        """
        由總長度 L = L1 + L2 與光程延遲 δt 建立幾何。

        Args:
            L (float): 兩分光鏡之間的總光程，公尺
            delta_t (float): (L2 - L1) / c，秒
            **kwargs: 其餘 ExperimentGeometry 欄位

        Returns:
            ExperimentGeometry: 對稱放置的幾何
        """
        path_difference = C * delta_t
        return cls(L1=(L - path_difference) / 2, L2=(L + path_difference) / 2, **kwargs)

    @property
    def delta_t(self) -> float:
        return (self.L2 - self.L1) / C

    @property
    def L(self) -> float:
        return self.L1 + self.L2

    def validate(self) -> None:
        """
        檢查幾何參數的不變量。

        Raises:
            InvalidInputError: 任何欄位不是有限實數
            ConfigError: 光程非正或抖動標準差為負
            InvalidVelocityError: |V| >= c
        """
        for name in ("L1", "L2", "V", "tau", "tau_jitter_sd", "path_jitter_sd"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"geometry.{name} must be finite, got {getattr(self, name)!r}.")
        for name in ("L1", "L2"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"must be > 0, got {getattr(self, name)!r}", field=f"geometry.{name}")
        for name in ("tau_jitter_sd", "path_jitter_sd"):
            if getattr(self, name) < 0:
                raise ConfigError(f"must be >= 0, got {getattr(self, name)!r}", field=f"geometry.{name}")
        if abs(self.V) >= C:
            raise InvalidVelocityError(
                self.V, f"geometry.V: velocity {self.V!r} m/s violates |V| < c = 299792458 m/s."
            )

    @property
    def has_jitter(self) -> bool:
        return self.tau_jitter_sd > 0 or self.path_jitter_sd > 0


@dataclass(frozen=True)
class SimulationConfig:
    """
    完整解析後的執行設定。

    角度以設定檔中的度數原樣保存，執行紀錄重新解析時會得到相同的浮點數值。
    """
    geometry: ExperimentGeometry
    alpha_deg: float
    beta_deg: float
    model: Model = Model.QM
    trials: int = 100_000
    seed: int = 0
    stream: int = 0
    tie_tolerance: float = 0.0
    nonbefore_policy: NonBeforePolicy = NonBeforePolicy.ERROR
    distinguishability: Tuple[Flag, Flag] = field(default=(Flag.U, Flag.U))

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"must be >= 1, got {self.trials!r}", field="trials")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"must satisfy 0 <= seed < 2**64, got {self.seed!r}", field="seed")
        if not 0 <= self.stream < 2 ** 64:
            raise ConfigError(f"must satisfy 0 <= stream < 2**64, got {self.stream!r}", field="stream")
        if not (math.isfinite(self.tie_tolerance) and self.tie_tolerance >= 0):
            raise ConfigError(f"must be finite and >= 0, got {self.tie_tolerance!r}", field="tie_tolerance")

    @property
    def angles(self) -> AngleSettings:
        return AngleSettings.from_degrees(self.alpha_deg, self.beta_deg)

    def replace(self, **changes) -> "SimulationConfig":
        return dataclasses.replace(self, **changes)

    def __repr__(self):
        return (
            f"<SimulationConfig(model={self.model.value}, trials={self.trials}, seed={self.seed}, "
            f"alpha={self.alpha_deg}°, beta={self.beta_deg}°)>"
        )


def parse_flag(value: Optional[str]) -> Flag:
    try:
        return Flag(str(value).lower())
    except ValueError:
        raise ConfigError(f"must be 'u' or 'd', got {value!r}", field="distinguishability")


@dataclass(frozen=True)
class CountsTable:
    """
    依 (++, +-, -+, --) 順序的各結果試驗次數，以及各實驗類別的試驗次數
    （鍵的格式如 "Before,NonBefore"）。
    """
    n_pp: int = 0
    n_pm: int = 0
    n_mp: int = 0
    n_mm: int = 0
    class_counts: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if min(self.n_pp, self.n_pm, self.n_mp, self.n_mm) < 0:
            raise ConfigError("outcome counts must be non-negative", field="counts")

    @classmethod
    def from_array(cls, counts, class_counts: Optional[Dict[str, int]] = None) -> "CountsTable":
        n_pp, n_pm, n_mp, n_mm = (int(n) for n in counts)
        return cls(n_pp, n_pm, n_mp, n_mm, dict(class_counts or {}))

    @property
    def total(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm

    def as_array(self) -> np.ndarray:
        return np.array([self.n_pp, self.n_pm, self.n_mp, self.n_mm], dtype=np.int64)

    def as_dict(self) -> Dict[str, int]:
        return {"++": self.n_pp, "+-": self.n_pm, "-+": self.n_mp, "--": self.n_mm}

    def class_fractions(self) -> Dict[str, float]:
        total = self.total
        return {key: count / total for key, count in self.class_counts.items()} if total else {}

    def __add__(self, other: "CountsTable") -> "CountsTable":
        merged = dict(self.class_counts)
        for key, count in other.class_counts.items():
            merged[key] = merged.get(key, 0) + count
        return CountsTable.from_array(self.as_array() + other.as_array(), dict(sorted(merged.items())))

    def scaled(self, factor: int) -> "CountsTable":
        return CountsTable.from_array(
            self.as_array() * factor, {key: count * factor for key, count in self.class_counts.items()}
        )

    def __repr__(self):
        return f"<CountsTable(++={self.n_pp}, +-={self.n_pm}, -+={self.n_mp}, --={self.n_mm})>"
