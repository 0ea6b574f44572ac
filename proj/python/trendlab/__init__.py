# SPDX-License-Identifier: Apache-2.0
"""Trend segmentation, trend prediction models and walk-forward evaluation."""

import json

from ._core import (
    Error,
    Instance,
    Prediction,
    Predictor,
    Trend,
    TrendSequence,
    aggregate,
    build_instances,
    compare_reports,
    fit_segment,
    load_predictor,
    make_partitions,
    make_predictor,
    normalize_config,
    percent_improvement,
    preset_config,
    preset_names,
    report_body,
    report_table,
    rmse,
    run_experiment,
    segment,
    warm_start_schedule,
)


def run(config, values=None):
    """Run an experiment and return the report as a dict."""
    return json.loads(run_experiment(config, values))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
