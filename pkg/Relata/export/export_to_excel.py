import pandas as pd
from loguru import logger

from Relata.simulation.scan import SCAN_COLUMNS


class ExportToExcel:
    def __init__(self, scan_table: pd.DataFrame):
        """
        初始化 ExportToExcel 實例。

        Args:
            scan_table (pd.DataFrame): run_scan 的結果，欄位 alpha, beta, model, E_closed, E_hat, SE, N
        """
        missing = set(SCAN_COLUMNS) - set(scan_table.columns)
        if missing:
            raise ValueError(f"scan table is missing columns {sorted(missing)}")
        self.df = scan_table.copy()

    def calculate_deviations(self) -> pd.DataFrame:
        """計算每個網格點估計值與封閉形式的差距（以標準誤為單位）"""
        df = self.df.copy()
        df['Deviation'] = df['E_hat'] - df['E_closed']
        # SE 為 0 時只有完全相等才算吻合
        df['Z'] = df['Deviation'] / df['SE'].where(df['SE'] > 0)
        df.loc[(df['SE'] == 0) & (df['Deviation'] == 0), 'Z'] = 0.0
        return df

    def calculate_summary(self) -> pd.DataFrame:
        """每個模型的摘要：網格點數、最大 |Z|、平均 |Z|"""
        df = self.calculate_deviations()
        df['Abs_Z'] = df['Z'].abs()
        return df.groupby('model').agg(
            Points=('Z', 'size'),
            Max_Abs_Z=('Abs_Z', 'max'),
            Mean_Abs_Z=('Abs_Z', 'mean'),
            Trials=('N', 'sum'),
        ).reset_index()

    def export(self, file_path: str):
        """
        將掃描結果匯出至 Excel 檔案。

        Args:
            file_path (str): Excel 檔案的儲存路徑
        """
        deviations = self.calculate_deviations()
        with pd.ExcelWriter(file_path, engine='openpyxl') as writer:
            # 每個模型一個工作表
            for model, model_df in deviations.groupby('model', sort=True):
                model_df.to_excel(writer, sheet_name=str(model).upper()[:31], index=False)

            # 摘要
            self.calculate_summary().to_excel(writer, sheet_name='Summary', index=False)
        logger.info("wrote scan workbook to {}", file_path)
