# Relata/simulation/trial_runner.py

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from Relata.constants import BLOCK_SIZE, C
from Relata.exceptions import DegenerateGeometryError, RelataError, UnsupportedConfigurationError
from Relata.experiment import CountsTable, Model, SimulationConfig
from Relata.physics.correlations import (
    JointDistribution,
    OUTCOMES,
    ad_joint_distribution,
    correlation,
    qm_model_distribution,
)
from Relata.physics.feasibility import class_probabilities
from Relata.physics.relativity import (
    ExperimentClass,
    ImpactClass,
    SpacetimeEvent,
    build_impact_contexts,
    classify_experiment,
    classify_experiment_arrays,
)
from Relata.physics.statistics import CorrelationEstimate, estimate_correlation
from Relata.simulation.rng import TrialStream

RECORD_COLUMNS = ["trial", "t1", "x1", "t2", "x2", "class1", "class2", "sigma", "omega"]
_ALL_CLASSES = [ExperimentClass.from_code(code) for code in range(9)]
_SIGMA = np.array([s for s, _ in OUTCOMES], dtype=np.int8)
_OMEGA = np.array([w for _, w in OUTCOMES], dtype=np.int8)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    event1: SpacetimeEvent
    event2: SpacetimeEvent
    experiment_class: ExperimentClass
    sigma: int
    omega: int


def select_distribution(config: SimulationConfig, experiment_class: ExperimentClass) -> JointDistribution:
    """選擇機率模型：QM 不看時序，AD 依實驗類別決定。"""
    if config.model is Model.QM:
        return qm_model_distribution(config.distinguishability, config.angles)
    return ad_joint_distribution(experiment_class, config.angles, config.nonbefore_policy)


def expected_correlation(config: SimulationConfig) -> float:
    """
    模擬應收斂到的封閉形式相關係數。

    有抖動時依各類別的解析機率加權；沒有抖動時只有單一類別。

    Raises:
        UnsupportedConfigurationError: AD 模型在 error 政策下遇到機率為正的 (NonBefore, NonBefore)
    """
    if config.model is Model.QM:
        return correlation(qm_model_distribution(config.distinguishability, config.angles))
    if config.geometry.has_jitter:
        probabilities = class_probabilities(config.geometry, config.distinguishability, config.tie_tolerance)
    else:
        contexts = build_impact_contexts(config.geometry, (0.0, 0.0), config.distinguishability)
        probabilities = {classify_experiment(*contexts, config.tie_tolerance): 1.0}
    return sum(p * correlation(select_distribution(config, cls)) for cls, p in probabilities.items())


@dataclass
class SimulationResult:
    config: SimulationConfig
    counts: CountsTable
    records: Optional[pd.DataFrame] = None

    @property
    def estimate(self) -> CorrelationEstimate:
        return estimate_correlation(self.counts)

    def iter_records(self) -> Iterator[TrialRecord]:
        """依試驗編號順序產生逐次紀錄。"""
        if self.records is None:
            return
        for row in self.records.itertuples(index=False):
            yield TrialRecord(
                trial=int(row.trial),
                event1=SpacetimeEvent(float(row.t1), float(row.x1)),
                event2=SpacetimeEvent(float(row.t2), float(row.x2)),
                experiment_class=ExperimentClass(ImpactClass.from_name(row.class1), ImpactClass.from_name(row.class2)),
                sigma=int(row.sigma),
                omega=int(row.omega),
            )


@dataclass
class _BlockResult:
    outcome_counts: np.ndarray
    class_counts: np.ndarray
    records: Optional[pd.DataFrame]


class TrialRunner:
    """
    蒙地卡羅試驗執行器：產生撞擊事件、分類、選擇模型分布並抽樣偵測結果。

    試驗以固定大小的區塊處理，區塊可分配給多個執行緒；每個試驗的亂數只取決於
    (seed, stream, 試驗編號)，因此計數與執行緒數量無關。
    """

    def __init__(self, config: SimulationConfig, workers: int = 1, block_size: int = BLOCK_SIZE,
                 progress: bool = False):
        """
        初始化試驗執行器。

        Args:
            config (SimulationConfig): 完整的模擬設定
            workers (int): 最大執行緒數
            block_size (int): 每個區塊的試驗數
            progress (bool): 是否顯示進度條

        Raises:
            ValueError: workers 或 block_size 小於 1
        """
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers!r}")
        if block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {block_size!r}")
        self.config = config
        self.workers = workers
        self.block_size = block_size
        self.progress = progress
        self.stream = TrialStream(config.seed, config.stream)
        self._cumulative_tables = self._build_tables()

    def __repr__(self):
        return f"<TrialRunner({self.config!r}, workers={self.workers})>"

    def _build_tables(self) -> np.ndarray:
        """
        每個類別代碼一列累積機率；無法預測的類別以 NaN 標記，抽到時才報錯。
        """
        tables = np.full((len(_ALL_CLASSES), 4), np.nan)
        for experiment_class in _ALL_CLASSES:
            try:
                distribution = select_distribution(self.config, experiment_class)
            except UnsupportedConfigurationError:
                continue
            tables[experiment_class.code] = distribution.cumulative()
        return tables

    def _generate_blocks(self) -> List[Tuple[int, int]]:
        trials = self.config.trials
        return [(start, min(start + self.block_size, trials)) for start in range(0, trials, self.block_size)]

    def _run_block(self, start: int, stop: int, collect_records: bool) -> _BlockResult:
        geometry = self.config.geometry
        flag1, flag2 = self.config.distinguishability
        uniforms = self.stream.uniforms(start, stop)
        normals = TrialStream.normals(uniforms[:, :2])

        tau = geometry.tau + geometry.tau_jitter_sd * normals[:, 0]
        path2 = geometry.L2 + geometry.path_jitter_sd * normals[:, 1]
        degenerate = np.flatnonzero(path2 <= 0)
        if degenerate.size:
            index = int(degenerate[0])
            raise DegenerateGeometryError(
                f"Jittered optical path L2' = {path2[index]!r} m is not positive.", trial_index=start + index
            )
        t1 = np.full(stop - start, geometry.L1 / C)
        t2 = tau + path2 / C
        x1, x2 = -geometry.L1, geometry.L2

        first, second = classify_experiment_arrays(
            t1, x1, 0.0, flag1, t2, x2, geometry.V, flag2, self.config.tie_tolerance
        )
        codes = 3 * first.astype(np.int64) + second
        cumulative = self._cumulative_tables[codes]
        unsupported = np.flatnonzero(np.isnan(cumulative[:, 0]))
        if unsupported.size:
            index = int(unsupported[0])
            raise UnsupportedConfigurationError(
                str(ExperimentClass.from_code(int(codes[index]))), trial_index=start + index
            )
        # 反函數抽樣：結果索引 = 累積機率 <= u 的項數
        outcome = np.minimum((uniforms[:, 2:3] >= cumulative).sum(axis=1), 3)

        records = None
        if collect_records:
            names = np.array([ImpactClass(c).display_name for c in range(3)])
            records = pd.DataFrame({
                "trial": np.arange(start, stop, dtype=np.int64),
                "t1": t1,
                "x1": np.full(stop - start, float(x1)),
                "t2": t2,
                "x2": np.full(stop - start, float(x2)),
                "class1": names[first],
                "class2": names[second],
                "sigma": _SIGMA[outcome],
                "omega": _OMEGA[outcome],
            }, columns=RECORD_COLUMNS)
        return _BlockResult(
            outcome_counts=np.bincount(outcome, minlength=4).astype(np.int64),
            class_counts=np.bincount(codes, minlength=9).astype(np.int64),
            records=records,
        )

    def run(self, collect_records: bool = False) -> SimulationResult:
        """
        執行所有試驗並彙總計數。

        Args:
            collect_records (bool): 是否保留逐次試驗紀錄

        Returns:
            SimulationResult: 計數表與（可選的）依試驗編號排序的紀錄

        Raises:
            UnsupportedConfigurationError: AD 模型遇到無預測的類別（附試驗編號）
            DegenerateGeometryError: 抖動後光程非正（附試驗編號）
        """
        blocks = self._generate_blocks()
        logger.debug("running {} trials in {} blocks on {} workers", self.config.trials, len(blocks), self.workers)
        results: Dict[int, _BlockResult] = {}
        failures: Dict[int, RelataError] = {}
        bar = tqdm(total=len(blocks), desc="trials", unit="block", disable=not self.progress, leave=False)

        if self.workers == 1:
            for index, (start, stop) in enumerate(blocks):
                results[index] = self._run_block(start, stop, collect_records)
                bar.update()
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                future_to_block = {
                    executor.submit(self._run_block, start, stop, collect_records): index
                    for index, (start, stop) in enumerate(blocks)
                }
                for future in as_completed(future_to_block):
                    index = future_to_block[future]
                    try:
                        results[index] = future.result()
                    except RelataError as e:
                        failures[index] = e
                    bar.update()
        bar.close()

        # 多個區塊失敗時回報編號最小的試驗，與執行緒數量無關
        if failures:
            raise failures[min(failures)]

        outcome_counts = sum((results[i].outcome_counts for i in range(len(blocks))), np.zeros(4, dtype=np.int64))
        class_totals = sum((results[i].class_counts for i in range(len(blocks))), np.zeros(9, dtype=np.int64))
        class_counts = {
            _ALL_CLASSES[code].key: int(count) for code, count in enumerate(class_totals.tolist()) if count
        }
        counts = CountsTable.from_array(outcome_counts, class_counts)
        records = None
        if collect_records:
            records = pd.concat([results[i].records for i in range(len(blocks))], ignore_index=True)
        logger.debug("finished: {}", counts)
        return SimulationResult(config=self.config, counts=counts, records=records)


def run_trials(config: SimulationConfig, workers: int = 1, collect_records: bool = False,
               progress: bool = False) -> SimulationResult:
    """TrialRunner 的便利包裝。"""
    return TrialRunner(config, workers=workers, progress=progress).run(collect_records=collect_records)
