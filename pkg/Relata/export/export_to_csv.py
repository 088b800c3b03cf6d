# Relata/export/export_to_csv.py

from pathlib import Path
from typing import TextIO, Union

import pandas as pd
from loguru import logger

from Relata.simulation.scan import SCAN_COLUMNS
from Relata.simulation.trial_runner import RECORD_COLUMNS

SWEEP_COLUMNS = ["input", "value", "feasible"]

Destination = Union[str, Path, TextIO]


def _write(df: pd.DataFrame, destination: Destination) -> None:
    # 固定欄位、一列一筆、以小數點表示浮點數，不依賴語系
    df.to_csv(destination, index=False, lineterminator="\n", na_rep="")
    if isinstance(destination, (str, Path)):
        logger.info("wrote {} rows to {}", len(df), destination)


def export_records(records: pd.DataFrame, destination: Destination) -> None:
    """
    匯出逐次試驗紀錄。

    Args:
        records (pd.DataFrame): TrialRunner 收集的紀錄（依試驗編號排序）
        destination (Destination): 檔案路徑或文字串流
    """
    _write(records[RECORD_COLUMNS], destination)


def export_sweep(table: pd.DataFrame, destination: Destination) -> None:
    """輸出可行性掃描，標題列為 input,value,feasible。"""
    df = table[SWEEP_COLUMNS].copy()
    df["feasible"] = df["feasible"].map({True: "true", False: "false"})
    _write(df, destination)


def export_scan(table: pd.DataFrame, destination: Destination) -> None:
    """輸出角度掃描，標題列為 alpha,beta,model,E_closed,E_hat,SE,N。"""
    _write(table[SCAN_COLUMNS], destination)
