# Relata/physics/statistics.py

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from Relata.exceptions import EmptyCountsError, InvalidInputError
from Relata.experiment import CountsTable
from Relata.physics.correlations import OUTCOME_KEYS

CorrelationFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CorrelationEstimate:
    """
    由計數表估計的相關係數。

    Args:
        e_hat (float): (n++ + n-- − n+- − n-+) / N
        se (float): 插入式二項標準誤 √((1 − ê²)/N)
        n (int): 試驗次數
    """
    e_hat: float
    se: float
    n: int

    def z_score(self, expected: float) -> float:
        """與期望值相差幾個標準誤；se 為 0 且兩者不同時回傳 inf。"""
        difference = self.e_hat - expected
        if self.se == 0:
            return 0.0 if difference == 0 else math.inf
        return difference / self.se


@dataclass(frozen=True)
class MarginalEstimate:
    """兩側各自得到 +1 的頻率及其二項標準誤。"""
    p1: float
    se1: float
    p2: float
    se2: float
    n: int


@dataclass(frozen=True)
class ChshSettings:
    """
    CHSH 量測的四個分析器角度，單位為弧度。

    S = E(α, β) − E(α, β′) + E(α′, β) + E(α′, β′)。
    """
    alpha: float
    alpha_p: float
    beta: float
    beta_p: float

    @classmethod
    def optimal(cls) -> "ChshSettings":
        """由 {0, π/4} × {π/8, −π/8} 組成、對 cos 2(α+β) 達到 2√2 的設定。"""
        return cls(alpha=math.pi / 4, alpha_p=0.0, beta=-math.pi / 8, beta_p=math.pi / 8)

    def pairs(self) -> Tuple[Tuple[float, float], ...]:
        """依 ab、ab′、a′b、a′b′ 順序排列的 (α, β)。"""
        return (
            (self.alpha, self.beta),
            (self.alpha, self.beta_p),
            (self.alpha_p, self.beta),
            (self.alpha_p, self.beta_p),
        )


@dataclass(frozen=True)
class ChshResult:
    s: float
    se: float
    settings: Optional[ChshSettings] = None

    def z_score(self, expected: float) -> float:
        if self.se == 0:
            return 0.0 if self.s == expected else math.inf
        return (self.s - expected) / self.se


def estimate_correlation(counts: CountsTable) -> CorrelationEstimate:
    """
    由計數表估計相關係數 E 與其標準誤。

    Args:
        counts (CountsTable): 四種結果的計數

    Returns:
        CorrelationEstimate: ê、se 與 N

    Raises:
        EmptyCountsError: 總計數為 0
    """
    n = counts.total
    if n == 0:
        raise EmptyCountsError()
    e_hat = (counts.n_pp + counts.n_mm - counts.n_pm - counts.n_mp) / n
    # |ê| = 1 時標準誤退化為 0
    se = math.sqrt(max(0.0, 1.0 - e_hat * e_hat) / n)
    return CorrelationEstimate(e_hat=e_hat, se=se, n=n)


def chsh(
    e_ab: CorrelationEstimate,
    e_ab_p: CorrelationEstimate,
    e_a_p_b: CorrelationEstimate,
    e_a_p_b_p: CorrelationEstimate,
    settings: Optional[ChshSettings] = None,
) -> ChshResult:
    """
    將四個相關係數估計值組合成 S = E_ab − E_ab′ + E_a′b + E_a′b′。

    四組設定各自獨立抽樣，標準誤以平方和開根號合併。
    """
    estimates = (e_ab, e_ab_p, e_a_p_b, e_a_p_b_p)
    s = e_ab.e_hat - e_ab_p.e_hat + e_a_p_b.e_hat + e_a_p_b_p.e_hat
    se = math.sqrt(sum(estimate.se ** 2 for estimate in estimates))
    return ChshResult(s=s, se=se, settings=settings)


def chsh_from_closed_form(correlation_fn: CorrelationFunction, settings: ChshSettings) -> float:
    """以封閉形式的相關函數計算四組設定下的 S。"""
    e_ab, e_ab_p, e_a_p_b, e_a_p_b_p = (float(correlation_fn(a, b)) for a, b in settings.pairs())
    return e_ab - e_ab_p + e_a_p_b + e_a_p_b_p


def chsh_grid_extremum(correlation_fn: CorrelationFunction, step_deg: float = 1.0) -> Tuple[float, ChshSettings]:
    """
    在等間距角度網格上搜尋 |S| 的最大值。

    對每一組 (β, β′)，α 與 α′ 的項彼此獨立，可以分別取極值，因此只需 O(n³) 次運算，
    且結果等於四重網格窮舉的最大值。角度範圍取 [0°, 180°)，因為相關函數對每個角度以 π 為週期。

    Args:
        correlation_fn (CorrelationFunction): 可向量化的 E(α, β)
        step_deg (float): 網格間距，度

    Returns:
        Tuple[float, ChshSettings]: 最大 |S| 與達到它的設定
    """
    if not (math.isfinite(step_deg) and step_deg > 0):
        raise InvalidInputError(f"step_deg must be positive, got {step_deg!r}.")
    grid = np.deg2rad(np.arange(0.0, 180.0, step_deg))
    table = np.asarray(correlation_fn(grid[:, None], grid[None, :]), dtype=float)

    best = -math.inf
    best_settings = None
    for sign in (1.0, -1.0):
        signed = sign * table
        for b in range(len(grid)):
            # 行：α 或 α′；列：β′
            difference = signed[:, b:b + 1] - signed
            total = signed[:, b:b + 1] + signed
            a_index = difference.argmax(axis=0)
            a_p_index = total.argmax(axis=0)
            values = difference.max(axis=0) + total.max(axis=0)
            b_p = int(values.argmax())
            if values[b_p] > best:
                best = float(values[b_p])
                best_settings = ChshSettings(
                    alpha=float(grid[a_index[b_p]]),
                    alpha_p=float(grid[a_p_index[b_p]]),
                    beta=float(grid[b]),
                    beta_p=float(grid[b_p]),
                )
    return best, best_settings


def marginals(counts: CountsTable) -> MarginalEstimate:
    """
    計算兩側各自得到 +1 的頻率（無訊號傳遞檢查用）。

    Raises:
        EmptyCountsError: 總計數為 0
    """
    n = counts.total
    if n == 0:
        raise EmptyCountsError()
    p1 = (counts.n_pp + counts.n_pm) / n
    p2 = (counts.n_pp + counts.n_mp) / n
    return MarginalEstimate(
        p1=p1,
        se1=math.sqrt(p1 * (1 - p1) / n),
        p2=p2,
        se2=math.sqrt(p2 * (1 - p2) / n),
        n=n,
    )


def _clopper_pearson(k: int, n: int, confidence: float) -> Tuple[float, float]:
    tail = (1.0 - confidence) / 2.0
    lower = 0.0 if k == 0 else float(stats.beta.ppf(tail, k, n - k + 1))
    upper = 1.0 if k == n else float(stats.beta.ppf(1.0 - tail, k + 1, n - k))
    return lower, upper


def _wilson(k: int, n: int, confidence: float) -> Tuple[float, float]:
    z = float(stats.norm.ppf(1.0 - (1.0 - confidence) / 2.0))
    p_hat = k / n
    a = p_hat + z ** 2 / (2 * n)
    b = math.sqrt(p_hat * (1 - p_hat) / n + z ** 2 / (4 * n ** 2))
    c = 1 + z ** 2 / n
    return max(0.0, (a - z * b) / c), min(1.0, (a + z * b) / c)


def outcome_intervals(counts: CountsTable, confidence: float = 0.95, method: str = "clopper-pearson") -> pd.DataFrame:
    """
    每一種結果機率的信賴區間。

    Args:
        counts (CountsTable): 計數表
        confidence (float): 信賴水準，介於 0 與 1
        method (str): 'clopper-pearson'（精確區間）或 'wilson'

    Returns:
        pd.DataFrame: 欄位 outcome, count, p_hat, lower, upper

    Raises:
        EmptyCountsError: 總計數為 0
        InvalidInputError: 信賴水準或方法無效
    """
    n = counts.total
    if n == 0:
        raise EmptyCountsError()
    if not 0 < confidence < 1:
        raise InvalidInputError(f"confidence must lie in (0, 1), got {confidence!r}.")
    methods = {"clopper-pearson": _clopper_pearson, "wilson": _wilson}
    if method not in methods:
        raise InvalidInputError(f"Unknown interval method {method!r}; use one of {sorted(methods)}.")

    rows = []
    for key, k in zip(OUTCOME_KEYS, counts.as_array().tolist()):
        lower, upper = methods[method](k, n, confidence)
        rows.append({"outcome": key, "count": k, "p_hat": k / n, "lower": lower, "upper": upper})
    return pd.DataFrame(rows)
