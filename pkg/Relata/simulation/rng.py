# Relata/simulation/rng.py

import numpy as np
from scipy.special import ndtri

from Relata.constants import DRAWS_PER_TRIAL

_HALF_ULP = 2.0 ** -54
_UPPER = 1.0 - 2.0 ** -53


class TrialStream:
    """
    以計數器為基礎的亂數來源：第 i 次試驗永遠得到同樣的四個均勻亂數。

    使用以 (seed, stream) 為金鑰的 numpy Philox 產生器。每次試驗消耗一個由四個 64 位元字組
    組成的 Philox 計數區塊；從 `start` 開始的試驗範圍會先將計數器前進 `start`，
    因此不論試驗如何分配給各執行緒，取得的亂數都相同。

    均勻亂數欄位：0 → 發射延遲抖動，1 → 光程抖動，2 → 偵測結果，3 保留。
    """

    generator_name = "numpy.random.Philox"

    def __init__(self, seed: int, stream: int = 0):
        """
        初始化隨機數串流。

        Args:
            seed (int): 64 位元種子，0 <= seed < 2**64
            stream (int): 子串流編號，0 <= stream < 2**64
        """
        if not 0 <= seed < 2 ** 64 or not 0 <= stream < 2 ** 64:
            raise ValueError(f"seed and stream must lie in [0, 2**64), got {seed!r}, {stream!r}")
        self.seed = int(seed)
        self.stream = int(stream)
        self.key = self.seed + (self.stream << 64)

    def __repr__(self):
        return f"<TrialStream(seed={self.seed}, stream={self.stream})>"

    def uniforms(self, start: int, stop: int) -> np.ndarray:
        """
        取得試驗 [start, stop) 的均勻亂數。

        Args:
            start (int): 第一個試驗編號
            stop (int): 最後一個試驗編號 + 1

        Returns:
            np.ndarray: 形狀 (stop - start, 4) 的 [0, 1) 均勻亂數
        """
        if start < 0 or stop < start:
            raise ValueError(f"Invalid trial range [{start}, {stop})")
        bit_generator = np.random.Philox(key=self.key)
        bit_generator.advance(start)
        return np.random.Generator(bit_generator).random((stop - start, DRAWS_PER_TRIAL))

    @staticmethod
    def normals(uniforms: np.ndarray) -> np.ndarray:
        """以反累積分布函數將每個均勻亂數轉為標準常態值，結果不會是無窮大。"""
        return ndtri(np.minimum(uniforms + _HALF_ULP, _UPPER))
