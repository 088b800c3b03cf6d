# Relata/physics/correlations.py

import math
from dataclasses import dataclass
from typing import Dict, Iterator, Tuple

import numpy as np
from loguru import logger

from Relata.exceptions import InvalidStateError, UnsupportedConfigurationError
from Relata.experiment import AngleSettings, Flag, NonBeforePolicy
from Relata.physics.relativity import ExperimentClass, ImpactClass

# 固定的結果順序 (++, +-, -+, --)，抽樣與 CSV 皆依此順序
OUTCOMES: Tuple[Tuple[int, int], ...] = ((1, 1), (1, -1), (-1, 1), (-1, -1))
OUTCOME_KEYS: Tuple[str, ...] = ("++", "+-", "-+", "--")
_SIGMA_OMEGA = np.array([s * w for s, w in OUTCOMES], dtype=float)

NORM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class JointDistribution:
    """
    四種偵測結果 (σ, ω) 的聯合機率，σ 屬於光子 1，ω 屬於光子 2。

    +1 為穿透埠，−1 為反射埠。
    """
    p_pp: float
    p_pm: float
    p_mp: float
    p_mm: float

    @classmethod
    def from_array(cls, values) -> "JointDistribution":
        return cls(*(float(v) for v in values))

    def as_array(self) -> np.ndarray:
        return np.array([self.p_pp, self.p_pm, self.p_mp, self.p_mm], dtype=float)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(OUTCOME_KEYS, self.as_array().tolist()))

    def __getitem__(self, outcome: Tuple[int, int]) -> float:
        return float(self.as_array()[OUTCOMES.index(tuple(outcome))])

    def __iter__(self) -> Iterator[float]:
        return iter(self.as_array().tolist())

    def marginals(self) -> Tuple[float, float]:
        """兩側各自得到 +1 的機率"""
        return self.p_pp + self.p_pm, self.p_pp + self.p_mp

    def correlation(self) -> float:
        return correlation(self)

    def cumulative(self) -> np.ndarray:
        cumulative = np.cumsum(self.as_array())
        cumulative[-1] = 1.0
        return cumulative


def correlation(distribution: JointDistribution) -> float:
    """相關係數 E = Σ σω·p(σ, ω)"""
    return float(np.dot(_SIGMA_OMEGA, distribution.as_array()))


def _from_correlation(e: float) -> JointDistribution:
    # 邊際為 1/2 且相關係數為 E 的唯一分布
    same = (1.0 + e) / 4.0
    opposite = (1.0 - e) / 4.0
    return JointDistribution(same, opposite, opposite, same)


# ---------------------------------------------------------------- state vectors

BASIS = ("H1H2", "H1V2", "V1H2", "V1V2")


def bell_state() -> np.ndarray:
    """
    兩光子偏振糾纏態 (|H1H2> − |V1V2>)/√2。

    Returns:
        np.ndarray: 基底 {H1H2, H1V2, V1H2, V1V2} 上的四個複數振幅
    """
    amplitude = 1.0 / math.sqrt(2.0)
    return np.array([amplitude, 0.0, 0.0, -amplitude], dtype=complex)


def rotation(theta: float) -> np.ndarray:
    """偏振旋轉矩陣：H → cos θ·H + sin θ·V，V → −sin θ·H + cos θ·V"""
    c, s = math.cos(theta), math.sin(theta)
    # 欄為輸入 (H, V)，列為輸出 (H, V)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _check_normalized(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.shape != (4,):
        raise InvalidStateError(f"State vector must have 4 amplitudes, got shape {state.shape}.")
    norm = float(np.vdot(state, state).real)
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise InvalidStateError(f"State vector squared norm is {norm!r}, expected 1.")
    return state


def apply_wave_plates(state: np.ndarray, angles: AngleSettings) -> np.ndarray:
    """
    對兩個光子分別施加半波片旋轉 R(α)⊗R(β)。

    Args:
        state (np.ndarray): 已歸一化的四維態向量
        angles (AngleSettings): 兩側旋轉角

    Returns:
        np.ndarray: 旋轉後的態向量
    """
    state = _check_normalized(state)
    operator = np.kron(rotation(angles.alpha), rotation(angles.beta))
    return operator @ state


def oracle_joint_distribution(state: np.ndarray, angles: AngleSettings) -> JointDistribution:
    """
    直接由態向量計算通過半波片後的量測統計。

    偏振分光鏡讓 H 穿透（+1）、V 反射（−1），因此 p(σ, ω) 為對應基底振幅的平方。
    只用來驗證封閉形式，蒙地卡羅模擬不會呼叫。

    Args:
        state (np.ndarray): 已歸一化的四維態向量
        angles (AngleSettings): 兩側旋轉角

    Returns:
        JointDistribution: 四種結果的機率

    Raises:
        InvalidStateError: 態向量未歸一化
    """
    rotated = apply_wave_plates(state, angles)
    # 基底順序 HH, HV, VH, VV 正好對應 ++, +-, -+, --
    probabilities = np.abs(rotated) ** 2
    return JointDistribution.from_array(probabilities)


def mixture_joint_distribution(angles: AngleSettings) -> JointDistribution:
    """
    (H1, H2) 與 (V1, V2) 兩種確定偏振光子對的等權混合。

    每個光子各自以 cos²θ（H 輸入）或 sin²θ（V 輸入）的機率穿透，
    逐一分支相加即為可區分撞擊的預測。
    """
    ca, sa = math.cos(angles.alpha) ** 2, math.sin(angles.alpha) ** 2
    cb, sb = math.cos(angles.beta) ** 2, math.sin(angles.beta) ** 2
    branch_h = np.array([ca * cb, ca * sb, sa * cb, sa * sb])
    branch_v = np.array([sa * sb, sa * cb, ca * sb, ca * cb])
    return JointDistribution.from_array(0.5 * (branch_h + branch_v))


# ---------------------------------------------------------------- closed forms

def qm_joint_distribution(angles: AngleSettings) -> JointDistribution:
    """量子力學：p(σ, ω) = [1 + σω·cos 2(α+β)]/4"""
    angles = angles.reduced()
    return _from_correlation(math.cos(2.0 * (angles.alpha + angles.beta)))


def local_joint_distribution(angles: AngleSettings) -> JointDistribution:
    """局域模型：p(σ, ω) = [1 + σω·cos 2α·cos 2β]/4"""
    angles = angles.reduced()
    return _from_correlation(math.cos(2.0 * angles.alpha) * math.cos(2.0 * angles.beta))


def qm_model_distribution(flags: Tuple[Flag, Flag], angles: AngleSettings) -> JointDistribution:
    """
    標準量子力學的選擇規則：只看可區分性，不看撞擊時序。

    Args:
        flags (Tuple[Flag, Flag]): 兩側撞擊的 u/d 標記
        angles (AngleSettings): 半波片角度

    Returns:
        JointDistribution: 兩側皆為 u 時為糾纏分布，否則為局域分布
    """
    if all(flag is Flag.U for flag in flags):
        return qm_joint_distribution(angles)
    return local_joint_distribution(angles)


def ad_joint_distribution(
    experiment_class: ExperimentClass,
    angles: AngleSettings,
    nonbefore_policy: NonBeforePolicy = NonBeforePolicy.ERROR,
) -> JointDistribution:
    """
    替代描述（AD）的選擇規則。

    (Before, NonBefore) 與 (NonBefore, Before) 依循疊加原理，(Before, Before) 及任何含
    Distinguishable 的類別只使用局域資訊。(NonBefore, NonBefore) 依 nonbefore_policy 處理。

    Args:
        experiment_class (ExperimentClass): 相對論模組的分類結果
        angles (AngleSettings): 半波片角度
        nonbefore_policy (NonBeforePolicy): 兩個非先行撞擊時的處理方式

    Returns:
        JointDistribution: 對應的聯合分布

    Raises:
        UnsupportedConfigurationError: (NonBefore, NonBefore) 且 policy 為 error
    """
    experiment_class = ExperimentClass(*(ImpactClass(c) for c in experiment_class))
    if ImpactClass.DISTINGUISHABLE in experiment_class:
        return local_joint_distribution(angles)
    if experiment_class.is_before_nonbefore:
        return qm_joint_distribution(angles)
    if experiment_class == (ImpactClass.BEFORE, ImpactClass.BEFORE):
        return local_joint_distribution(angles)

    # (NonBefore, NonBefore)
    if nonbefore_policy is NonBeforePolicy.TREAT_AS_QM:
        logger.debug("(NonBefore, NonBefore) treated as entangled")
        return qm_joint_distribution(angles)
    if nonbefore_policy is NonBeforePolicy.TREAT_AS_LOCAL:
        logger.debug("(NonBefore, NonBefore) treated as local")
        return local_joint_distribution(angles)
    raise UnsupportedConfigurationError(str(experiment_class))


def qm_correlation(alpha, beta):
    """向量化的 cos 2(α+β)，供網格計算使用"""
    return np.cos(2.0 * (np.asarray(alpha) + np.asarray(beta)))


def local_correlation(alpha, beta):
    """向量化的 cos 2α·cos 2β"""
    return np.cos(2.0 * np.asarray(alpha)) * np.cos(2.0 * np.asarray(beta))
