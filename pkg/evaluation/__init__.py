"""
Metrics, split evaluation and reporting.
"""

from .evaluator import SPLITS, SplitReport, evaluate, groundtruth_model_fn
from .metrics import MetricAccumulator, MetricSet, compute_metrics, spearman_uncertainty_error
from .report import CSV_COLUMNS, plot_error_map, plot_uncertainty_map, report, report_frame, write_reports

__all__ = [
    'CSV_COLUMNS', 'MetricAccumulator', 'MetricSet', 'SPLITS', 'SplitReport', 'compute_metrics',
    'evaluate', 'groundtruth_model_fn', 'plot_error_map', 'plot_uncertainty_map', 'report',
    'report_frame', 'spearman_uncertainty_error', 'write_reports',
]
