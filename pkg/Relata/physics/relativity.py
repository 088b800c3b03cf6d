# Relata/physics/relativity.py

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple, Sequence, Tuple, Union

import numpy as np

from Relata.constants import C, C_SQUARED, TIE_ROUNDING_ULPS
from Relata.exceptions import DegenerateGeometryError, InvalidInputError, InvalidVelocityError
from Relata.experiment import ExperimentGeometry, Flag

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class SpacetimeEvent:
    """
    實驗室座標系中的一個事件：光子撞擊分光鏡的時間與位置。

    Args:
        t (float): 實驗室時間，秒
        x (float): 沿光源-分光鏡軸的位置，公尺（光源在原點，BS1 在負側，BS2 在正側）
    """
    t: float
    x: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.x)):
            raise InvalidInputError(f"Event coordinates must be finite, got t={self.t!r}, x={self.x!r}.")

    def shifted(self, dt: float = 0.0, dx: float = 0.0) -> "SpacetimeEvent":
        return SpacetimeEvent(self.t + dt, self.x + dx)


@dataclass(frozen=True)
class FrameVelocity:
    """
    分光鏡靜止座標系相對實驗室的速度。

    Args:
        v (float): 速度，m/s，帶正負號（正值 = 在第 2 側遠離光源）

    Raises:
        InvalidInputError: v 不是有限實數
        InvalidVelocityError: |v| >= c
    """
    v: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.v):
            raise InvalidInputError(f"Frame velocity must be finite, got {self.v!r}.")
        if abs(self.v) >= C:
            raise InvalidVelocityError(self.v)

    @classmethod
    def at_rest(cls) -> "FrameVelocity":
        return cls(0.0)

    @property
    def beta(self) -> float:
        return self.v / C

    @property
    def gamma(self) -> float:
        if self.v == 0.0:
            return 1.0
        return 1.0 / math.sqrt(1.0 - self.beta * self.beta)


class ImpactClass(IntEnum):
    """撞擊類別：先行 (b)、非先行 (a) 與可區分 (d)。"""
    BEFORE = 0
    NON_BEFORE = 1
    DISTINGUISHABLE = 2

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def from_name(cls, name: str) -> "ImpactClass":
        for member, display in _DISPLAY_NAMES.items():
            if display == name:
                return member
        raise ValueError(f"Unknown impact class {name!r}")


_DISPLAY_NAMES = {
    ImpactClass.BEFORE: "Before",
    ImpactClass.NON_BEFORE: "NonBefore",
    ImpactClass.DISTINGUISHABLE: "Distinguishable",
}
_LABELS = {ImpactClass.BEFORE: "b", ImpactClass.NON_BEFORE: "a", ImpactClass.DISTINGUISHABLE: "d"}


class ExperimentClass(NamedTuple):
    first: ImpactClass
    second: ImpactClass

    def __str__(self):
        return f"({self.first.display_name}, {self.second.display_name})"

    @property
    def key(self) -> str:
        return f"{self.first.display_name},{self.second.display_name}"

    @property
    def code(self) -> int:
        return 3 * int(self.first) + int(self.second)

    @classmethod
    def from_code(cls, code: int) -> "ExperimentClass":
        return cls(ImpactClass(code // 3), ImpactClass(code % 3))

    @property
    def is_before_nonbefore(self) -> bool:
        return set(self) == {ImpactClass.BEFORE, ImpactClass.NON_BEFORE}


@dataclass(frozen=True)
class ImpactContext:
    """一次撞擊，連同其分光鏡的靜止座標系與可區分旗標。"""
    event: SpacetimeEvent
    frame: FrameVelocity
    distinguishability: Flag = Flag.U

    def __post_init__(self):
        if not isinstance(self.distinguishability, Flag):
            raise InvalidInputError(f"Distinguishability must be a Flag, got {self.distinguishability!r}.")


def _check_velocity(v: ArrayLike) -> None:
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("Frame velocity must be finite.")
    if np.any(np.abs(v) >= C):
        raise InvalidVelocityError(float(np.max(np.abs(v))))


def _gamma(v: ArrayLike) -> ArrayLike:
    beta = np.asarray(v, dtype=float) / C
    return 1.0 / np.sqrt(1.0 - beta * beta)


def boosted_difference(dt: ArrayLike, dx: ArrayLike, v: ArrayLike) -> ArrayLike:
    """
    勞侖茲變換的差值形式 γ·(Δt − vΔx/c²)，可逐元素作用於 numpy 陣列。

    純量與向量化的分類都呼叫這個函式，兩者結果逐位元相同。
    """
    return _gamma(v) * (dt - v * dx / C_SQUARED)


def rounding_slack(t_i: ArrayLike, t_j: ArrayLike, x_i: ArrayLike, x_j: ArrayLike, v: ArrayLike) -> ArrayLike:
    """
    boosted_difference 可解析的最小時間差。

    兩事件各自的座標（例如 L1/c 與 L2/c）帶有捨入誤差，差值比這個量還小時無法判斷先後，
    分類時視為同時（非先行）。

    Args:
        t_i, t_j (ArrayLike): 兩事件的實驗室時間，秒
        x_i, x_j (ArrayLike): 兩事件的位置，公尺
        v (ArrayLike): 觀察座標系速度，m/s

    Returns:
        ArrayLike: 非負的時間容許量，秒
    """
    speed = np.abs(v)
    scale = np.abs(t_i) + np.abs(t_j) + speed * (np.abs(x_i) + np.abs(x_j)) / C_SQUARED
    return TIE_ROUNDING_ULPS * np.finfo(float).eps * _gamma(speed) * scale


def time_difference_in_frame(e_i: SpacetimeEvent, e_j: SpacetimeEvent, frame: FrameVelocity) -> float:
    """
    計算兩事件在指定座標系中的時間差 t'_i − t'_j。

    Args:
        e_i (SpacetimeEvent): 事件 i
        e_j (SpacetimeEvent): 事件 j
        frame (FrameVelocity): 觀察座標系

    Returns:
        float: 有號時間差（秒）；負值表示 e_i 在該座標系中先於 e_j

    Raises:
        InvalidInputError: 座標或速度不是有限實數
        InvalidVelocityError: |v| >= c
    """
    for value in (e_i.t, e_i.x, e_j.t, e_j.x, frame.v):
        if not math.isfinite(value):
            raise InvalidInputError(f"Non-finite input {value!r}.")
    _check_velocity(frame.v)
    return float(boosted_difference(e_i.t - e_j.t, e_i.x - e_j.x, frame.v))


def is_spacelike(e_i: SpacetimeEvent, e_j: SpacetimeEvent) -> bool:
    """兩事件無法以不超過光速的訊號連結時回傳 True。"""
    return abs(e_i.t - e_j.t) * C < abs(e_i.x - e_j.x)


def classify_impact(self_ctx: ImpactContext, other: ImpactContext, tie_tolerance: float = 0.0) -> ImpactClass:
    """
    依據撞擊自身分光鏡的靜止座標系判斷撞擊類別。

    Args:
        self_ctx (ImpactContext): 被分類的撞擊
        other (ImpactContext): 另一個光子的撞擊
        tie_tolerance (float): 同時判定的容許誤差，秒；差值 >= -(tie_tolerance + 捨入容許量) 視為非先行

    Returns:
        ImpactClass: BEFORE、NON_BEFORE 或 DISTINGUISHABLE

    Raises:
        InvalidInputError: tie_tolerance 為負或非有限
    """
    if not (math.isfinite(tie_tolerance) and tie_tolerance >= 0):
        raise InvalidInputError(f"tie_tolerance must be finite and >= 0, got {tie_tolerance!r}.")
    if self_ctx.distinguishability is Flag.D:
        return ImpactClass.DISTINGUISHABLE
    # 對方為 d 時不看時間
    if other.distinguishability is Flag.D:
        return ImpactClass.BEFORE
    me, them = self_ctx.event, other.event
    difference = time_difference_in_frame(me, them, self_ctx.frame)
    slack = float(rounding_slack(me.t, them.t, me.x, them.x, self_ctx.frame.v))
    if difference < -(tie_tolerance + slack):
        return ImpactClass.BEFORE
    return ImpactClass.NON_BEFORE


def classify_experiment(ctx1: ImpactContext, ctx2: ImpactContext, tie_tolerance: float = 0.0) -> ExperimentClass:
    """以兩個撞擊各自的類別標記整個實驗。"""
    return ExperimentClass(
        classify_impact(ctx1, ctx2, tie_tolerance),
        classify_impact(ctx2, ctx1, tie_tolerance),
    )


def classify_experiment_arrays(
    t1: np.ndarray, x1: ArrayLike, v1: float, flag1: Flag,
    t2: np.ndarray, x2: ArrayLike, v2: float, flag2: Flag,
    tie_tolerance: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    classify_experiment 的向量化版本，一次分類多次試驗。

    Returns:
        Tuple[np.ndarray, np.ndarray]: 撞擊 1 與撞擊 2 的 ImpactClass 代碼（int8）
    """
    t1, t2 = np.broadcast_arrays(np.asarray(t1, dtype=float), np.asarray(t2, dtype=float))
    x1 = np.broadcast_to(np.asarray(x1, dtype=float), t1.shape)
    x2 = np.broadcast_to(np.asarray(x2, dtype=float), t2.shape)
    for array in (t1, x1, t2, x2):
        if not np.all(np.isfinite(array)):
            raise InvalidInputError("Event coordinates must be finite.")
    _check_velocity(v1)
    _check_velocity(v2)

    def _side(own_flag, partner_flag, t_own, x_own, t_other, x_other, v):
        if own_flag is Flag.D:
            return np.full(t_own.shape, ImpactClass.DISTINGUISHABLE, dtype=np.int8)
        if partner_flag is Flag.D:
            return np.full(t_own.shape, ImpactClass.BEFORE, dtype=np.int8)
        difference = boosted_difference(t_own - t_other, x_own - x_other, v)
        slack = rounding_slack(t_own, t_other, x_own, x_other, v)
        before = difference < -(tie_tolerance + slack)
        return np.where(before, ImpactClass.BEFORE, ImpactClass.NON_BEFORE).astype(np.int8)

    first = _side(flag1, flag2, t1, x1, t2, x2, v1)
    second = _side(flag2, flag1, t2, x2, t1, x1, v2)
    return first, second


def build_impact_contexts(
    geometry: ExperimentGeometry,
    jitter_draws: Tuple[float, float] = (0.0, 0.0),
    flags: Sequence[Flag] = (Flag.U, Flag.U),
) -> Tuple[ImpactContext, ImpactContext]:
    """
    由幾何參數建立兩個撞擊事件。

    光子 1 於 t = L1/c 撞擊靜止的 BS1（x = −L1）；光子 2 於 t = τ′ + L2′/c 撞擊以速度 V
    移動的 BS2（x = +L2）。τ′ = τ + σ_τ·z₀，L2′ = L2 + σ_path·z₁。

    Args:
        geometry (ExperimentGeometry): 實驗幾何
        jitter_draws (Tuple[float, float]): 標準常態抽樣 (z₀, z₁)
        flags (Sequence[Flag]): 兩側的 u/d 標記

    Returns:
        Tuple[ImpactContext, ImpactContext]: 兩個撞擊的上下文

    Raises:
        DegenerateGeometryError: 抖動後 L2′ <= 0
    """
    z_tau, z_path = jitter_draws
    tau = geometry.tau + geometry.tau_jitter_sd * z_tau
    path2 = geometry.L2 + geometry.path_jitter_sd * z_path
    if path2 <= 0:
        raise DegenerateGeometryError(f"Jittered optical path L2' = {path2!r} m is not positive.")
    first = ImpactContext(SpacetimeEvent(geometry.L1 / C, -geometry.L1), FrameVelocity.at_rest(), flags[0])
    second = ImpactContext(SpacetimeEvent(tau + path2 / C, geometry.L2), FrameVelocity(geometry.V), flags[1])
    return first, second


def threshold_velocity(delta_time: float, delta_x: float) -> float:
    """
    臨界速度 c²·Δt/Δx：較晚事件處的分光鏡速度超過此值時，會看到該事件先發生。

    Args:
        delta_time (float): t_later − t_earlier（秒）
        delta_x (float): x_later − x_earlier（公尺），為 0 時回傳 inf
    """
    if delta_x == 0:
        return math.inf
    return C_SQUARED * delta_time / delta_x
