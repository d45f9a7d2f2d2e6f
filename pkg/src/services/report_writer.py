"""
Report tables, full-precision compare files and the run manifest.

Display tables round half-to-even to two decimals and render undefined values
as NaN. Compare files keep full precision so reports never recompute statistics.
"""
import logging
import math
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

import numpy as np
import pandas as pd

from src.services.extractor import FEATURE_GROUPS, FEATURE_SCHEMA
from src.services.statistics import (
    CorrelationMatrix, CorrelationResult, TTestResult, classify_gap_shift,
)
from src.utils.errors import InputError, ReportError
from src.utils.file_utils import atomic_write_json, atomic_write_text, sha256_file
from src.utils.time_utils import utc_timestamp

logger = logging.getLogger(__name__)

NAN_LITERAL = "NaN"
HUMAN_LABEL = "Human"
_CENT = Decimal("0.01")


def format_value(value):
    """Two decimals, half-to-even on the exact binary value; NaN literal for undefined."""
    if value is None or math.isnan(value):
        return NAN_LITERAL
    text = str(Decimal(float(value)).quantize(_CENT, rounding=ROUND_HALF_EVEN))
    return "0.00" if text == "-0.00" else text


def _frame_to_csv(frame):
    return frame.to_csv(index=False, lineterminator="\n", na_rep=NAN_LITERAL)


def _check_feature_order(name, features):
    if list(features) != list(FEATURE_SCHEMA):
        raise ReportError(f"'{name}' results are not in feature-schema order")


# ============================================================================
# DISPLAY TABLES
# ============================================================================

def emit_correlation_table(diagonals, path=None):
    """
    Diagonal human-vs-model correlations: one row per feature, one column per model.

    Args:
        diagonals: model name -> list of CorrelationResult in schema order

    Raises:
        ReportError: A model's cells do not follow the feature schema
    """
    if not diagonals:
        raise ReportError("no model columns to report")
    columns = {"LIWC": list(FEATURE_SCHEMA)}
    for model, cells in diagonals.items():
        _check_feature_order(model, [c.feature_a for c in cells])
        if any(c.feature_a != c.feature_b for c in cells):
            raise ReportError(f"'{model}' cells are not diagonal")
        columns[model] = [format_value(c.r) for c in cells]
    text = _frame_to_csv(pd.DataFrame(columns))
    if path is not None:
        atomic_write_text(path, text)
    return text


def emit_ttest_table(results, alpha, path=None):
    """
    t-statistics per feature and variant with a '*' column marking p < alpha.

    Args:
        results: variant -> list of TTestResult in schema order (Human first)
    """
    columns = {"LIWC": list(FEATURE_SCHEMA)}
    for variant, variant_results in results.items():
        _check_feature_order(variant, [r.feature for r in variant_results])
        columns[variant] = [format_value(r.t) for r in variant_results]
        columns[f"{variant}_sig"] = [
            "*" if not math.isnan(r.p) and r.p < alpha else "" for r in variant_results
        ]
    text = _frame_to_csv(pd.DataFrame(columns))
    if path is not None:
        atomic_write_text(path, text)
    return text


def emit_gap_shift_table(results, human_variant=HUMAN_LABEL, path=None):
    """Per model and feature: human t, model t, their difference and the shift class."""
    human = {r.feature: r for r in results[human_variant]}
    rows = []
    for variant, variant_results in results.items():
        if variant == human_variant:
            continue
        for result in variant_results:
            base = human[result.feature]
            delta = result.t - base.t if not (math.isnan(result.t) or math.isnan(base.t)) else math.nan
            rows.append({
                "model": variant,
                "LIWC": result.feature,
                "human_t": format_value(base.t),
                "model_t": format_value(result.t),
                "delta_t": format_value(delta),
                "shift": classify_gap_shift(base, result),
            })
    frame = pd.DataFrame(rows, columns=["model", "LIWC", "human_t", "model_t", "delta_t", "shift"])
    text = _frame_to_csv(frame)
    if path is not None:
        atomic_write_text(path, text)
    return text


def emit_group_summary(diagonals, alpha, path=None):
    """Per feature group and model: mean defined diagonal r and count of cells with p < alpha."""
    rows = []
    for group, members in FEATURE_GROUPS.items():
        for model, cells in diagonals.items():
            selected = [c for c in cells if c.feature_a in members]
            defined = [c.r for c in selected if not math.isnan(c.r)]
            rows.append({
                "group": group,
                "model": model,
                "features": len(selected),
                "defined": len(defined),
                "mean_r": format_value(float(np.mean(defined)) if defined else math.nan),
                "significant": sum(1 for c in selected if not math.isnan(c.p) and c.p < alpha),
            })
    frame = pd.DataFrame(rows, columns=["group", "model", "features", "defined", "mean_r", "significant"])
    text = _frame_to_csv(frame)
    if path is not None:
        atomic_write_text(path, text)
    return text


# ============================================================================
# FULL-PRECISION COMPARE FILES
# ============================================================================

def write_correlations(path, matrix):
    rows = [
        {"feature_a": c.feature_a, "feature_b": c.feature_b, "r": c.r, "p": c.p, "n": c.n}
        for row in matrix.cells for c in row
    ]
    frame = pd.DataFrame(rows, columns=["feature_a", "feature_b", "r", "p", "n"])
    return atomic_write_text(path, _frame_to_csv(frame))


def _read_frame(path):
    try:
        return pd.read_csv(path, keep_default_na=False, na_values=[NAN_LITERAL],
                           float_precision="round_trip")
    except (OSError, ValueError) as e:
        raise InputError(f"Cannot read {path}: {e}") from e


def read_correlations(path):
    frame = _read_frame(path)
    cells = {}
    for row in frame.to_dict("records"):
        cells[(row["feature_a"], row["feature_b"])] = CorrelationResult(
            row["feature_a"], row["feature_b"], float(row["r"]), float(row["p"]), int(row["n"])
        )
    features = list(dict.fromkeys(frame["feature_a"]))
    grid = [[cells[(a, b)] for b in features] for a in features]
    return CorrelationMatrix(grid, features)


def write_ttests(path, results):
    rows = []
    for variant, variant_results in results.items():
        for r in variant_results:
            rows.append({
                "variant": variant, "feature": r.feature, "t": r.t, "df": r.df, "p": r.p,
                "mean_female": r.mean_female, "mean_male": r.mean_male,
                "n_female": r.n_female, "n_male": r.n_male,
                "alpha": r.alpha, "significant": int(r.significant),
            })
    columns = ["variant", "feature", "t", "df", "p", "mean_female", "mean_male",
               "n_female", "n_male", "alpha", "significant"]
    return atomic_write_text(path, _frame_to_csv(pd.DataFrame(rows, columns=columns)))


def read_ttests(path):
    frame = _read_frame(path)
    results = {}
    for row in frame.to_dict("records"):
        results.setdefault(str(row["variant"]), []).append(TTestResult(
            feature=row["feature"], t=float(row["t"]), df=float(row["df"]), p=float(row["p"]),
            mean_female=float(row["mean_female"]), mean_male=float(row["mean_male"]),
            n_female=int(row["n_female"]), n_male=int(row["n_male"]), alpha=float(row["alpha"]),
        ))
    return results


# ============================================================================
# MANIFEST
# ============================================================================

def write_manifest(path, output_dir, files, inputs, counts):
    """
    Write the run manifest listing every emitted file with its sha256.

    Args:
        files: paths of emitted artifacts
        inputs: input hashes (config, dictionary, corpus, ...)
        counts: per-stage counts and per-cell sample sizes
    """
    output_dir = Path(output_dir)
    listed = {}
    for file_path in sorted(Path(f) for f in files):
        listed[file_path.relative_to(output_dir).as_posix()] = sha256_file(file_path)
    manifest = {
        "generated_at": utc_timestamp(),
        "inputs": inputs,
        "counts": counts,
        "files": listed,
    }
    atomic_write_json(path, manifest)
    logger.info(f"🧾 Manifest written with {len(listed)} files")
    return manifest


__all__ = [
    'NAN_LITERAL', 'HUMAN_LABEL', 'format_value', 'emit_correlation_table', 'emit_ttest_table',
    'emit_gap_shift_table', 'emit_group_summary', 'write_correlations', 'read_correlations',
    'write_ttests', 'read_ttests', 'write_manifest'
]
