"""
MRFM Report Generation Module

Text summaries of ROC and power-curve runs.
"""

from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from .exceptions import DataValidationError, ParseError
from .harness import CurveTable, auc, auc_standard_error
from .logging_config import get_logger

logger = get_logger(__name__)


class SummaryReportGenerator:
    """Builds AUC tables and plain-text summaries of detector comparisons."""

    def auc_table(self, curves: List[CurveTable]) -> pd.DataFrame:
        """
        Per-detector AUC with its Hanley-McNeil standard error, best first.

        Args:
            curves: ROC curves; metadata must carry n_trials

        Returns:
            DataFrame with columns detector, auc, auc_se
        """
        if not curves:
            raise DataValidationError("No curves to summarise")
        rows = []
        for curve in curves:
            area = auc(curve)
            n_trials = int(curve.metadata.get("n_trials", 0))
            se = auc_standard_error(area, n_trials) if n_trials > 0 else float("nan")
            rows.append({"detector": curve.detector_name, "auc": area, "auc_se": se})
        table = pd.DataFrame(rows).sort_values("auc", ascending=False, kind="mergesort")
        return table.reset_index(drop=True)

    def power_table(self, curves: List[CurveTable]) -> pd.DataFrame:
        """P_D by SNR, one column per detector."""
        if not curves:
            raise DataValidationError("No curves to summarise")
        frame = pd.concat([curve.to_frame() for curve in curves], ignore_index=True)
        return frame.pivot(index="snr_db", columns="detector", values="pd")[[c.detector_name for c in curves]]

    def create_summary_report(
        self,
        curves: List[CurveTable],
        metadata: Dict[str, object],
        output_path: Path,
        title: Optional[str] = None,
    ) -> None:
        """
        Write a summary of an ROC or power run.

        Raises:
            ParseError: If the report cannot be written
        """
        kind = curves[0].kind if curves else "ROC"
        logger.info(f"Creating {kind} summary report")
        try:
            with open(output_path, "w", encoding="utf-8") as f:
                heading = title or ("Detector ROC Summary" if kind == "ROC" else "Detector Power Summary")
                f.write(f"{heading}\n")
                f.write("=" * 50 + "\n\n")

                f.write("SETTINGS\n")
                f.write("-" * 20 + "\n")
                for key, value in metadata.items():
                    f.write(f"{key}: {value}\n")
                f.write("\n")

                if kind == "ROC":
                    table = self.auc_table(curves)
                    f.write("AREA UNDER ROC (best first)\n")
                    f.write("-" * 20 + "\n")
                    for rank, row in enumerate(table.itertuples(index=False), start=1):
                        f.write(f"{rank}. {row.detector:<20} {row.auc:.4f} +/- {row.auc_se:.4f}\n")
                else:
                    f.write("DETECTION PROBABILITY BY SNR (dB)\n")
                    f.write("-" * 20 + "\n")
                    f.write(self.power_table(curves).to_string(float_format=lambda v: f"{v:.3f}"))
                    f.write("\n")
        except OSError as e:
            raise ParseError(f"Failed to write report {output_path}: {e}") from e

        logger.info(f"Summary report saved to {output_path}")
