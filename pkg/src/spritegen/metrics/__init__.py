from .perceptual import (
    IdentityExtractor,
    PyramidExtractor,
    lpips,
    make_extractor,
    subject_consistency,
)
from .quality import PSNR_INF, psnr, ssim
from .report import (
    KeyMismatchError,
    MetricReport,
    MetricSummary,
    evaluate_run,
    format_table,
    report_from_json,
    report_to_json,
    save_report,
)

__all__ = [
    "IdentityExtractor", "PyramidExtractor", "lpips", "make_extractor", "subject_consistency",
    "PSNR_INF", "psnr", "ssim",
    "KeyMismatchError", "MetricReport", "MetricSummary",
    "evaluate_run", "format_table", "report_from_json", "report_to_json", "save_report",
]
