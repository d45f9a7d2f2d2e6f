"""
Statistics for the audit: Pearson correlation with two-sided p-values, Welch /
Student two-sample t-tests, and the cross-variant correlation matrix.

Undefined statistics are math.nan everywhere; they are never coerced to 0 or 1.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from src.services.extractor import FEATURE_SCHEMA
from src.services.gender_detector import GenderLabel

logger = logging.getLogger(__name__)

NAN = math.nan


def is_undefined(value):
    return value is None or (isinstance(value, float) and math.isnan(value))


def _as_array(values):
    return np.asarray([NAN if v is None else float(v) for v in values], dtype=float)


def _constant(values):
    return bool(np.all(values == values[0]))


# ============================================================================
# DISTRIBUTIONS
# ============================================================================

def student_t_sf(t, df):
    """
    Upper-tail probability P(T > t) of Student's t with df degrees of freedom.

    Uses the regularized incomplete beta function:
    P(T > |t|) = 0.5 * I_{df/(df+t^2)}(df/2, 1/2).
    """
    if df is None or math.isnan(df) or df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    if math.isnan(t):
        return NAN
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    tail = 0.5 * float(betainc(df / 2.0, 0.5, x))
    return tail if t >= 0 else 1.0 - tail


# ============================================================================
# CORRELATION
# ============================================================================

@dataclass(frozen=True)
class CorrelationResult:
    feature_a: str
    feature_b: str
    r: float
    p: float
    n: int

    @property
    def defined(self):
        return not math.isnan(self.r)


def _paired(x, y):
    x, y = _as_array(x), _as_array(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    keep = np.isfinite(x) & np.isfinite(y)
    return x[keep], y[keep]


def pearson_r(x, y):
    """
    Sample Pearson coefficient after pairwise removal of missing values.

    Returns:
        float: r clamped to [-1, 1]; NaN when n < 3 or either sample is constant

    Raises:
        ValueError: x and y differ in length
    """
    x, y = _paired(x, y)
    return _pearson_clean(x, y)


def _pearson_clean(x, y):
    n = len(x)
    if n < 3 or _constant(x) or _constant(y):
        return NAN
    dx = x - x.mean()
    dy = y - y.mean()
    denominator = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    if denominator == 0.0:
        return NAN
    r = float(np.dot(dx, dy)) / denominator
    return min(1.0, max(-1.0, r))


def pearson_p(r, n):
    """Two-sided p-value of r with n observations; 0 when |r| = 1, NaN when undefined."""
    if is_undefined(r) or n is None or n < 3:
        return NAN
    if abs(r) > 1.0:
        raise ValueError(f"|r| must be at most 1, got {r}")
    if abs(r) == 1.0:
        return 0.0
    df = n - 2
    t = r * math.sqrt(df / (1.0 - r * r))
    return min(1.0, max(0.0, 2.0 * student_t_sf(abs(t), df)))


def correlate(x, y, feature_a="", feature_b=""):
    x, y = _paired(x, y)
    r = _pearson_clean(x, y)
    return CorrelationResult(feature_a, feature_b, r, pearson_p(r, len(x)), len(x))


class CorrelationMatrix:
    """Grid of CorrelationResult over (features_a[i], features_b[j])."""

    def __init__(self, cells, features=FEATURE_SCHEMA, record_ids=()):
        self.cells = cells
        self.features = tuple(features)
        self.record_ids = tuple(record_ids)

    def __getitem__(self, index):
        i, j = index
        return self.cells[i][j]

    @property
    def shape(self):
        return (len(self.cells), len(self.cells[0]) if self.cells else 0)

    def diagonal(self):
        """The (A_i, B_i) cells: human-vs-model alignment per feature."""
        return [self.cells[i][i] for i in range(min(self.shape))]

    def r_grid(self):
        return [[c.r for c in row] for row in self.cells]

    def p_grid(self):
        return [[c.p for c in row] for row in self.cells]

    def cell_sizes(self):
        return [[c.n for c in row] for row in self.cells]


def _aligned_columns(table_a, table_b, features):
    ids_a = {v.record_id: v for v in table_a if not v.degenerate}
    ids_b = {v.record_id: v for v in table_b if not v.degenerate}
    shared = sorted(set(ids_a) & set(ids_b))
    if not shared:
        raise ValueError("feature tables share no record ids")
    columns_a = {f: _as_array([ids_a[r][f] for r in shared]) for f in features}
    columns_b = {f: _as_array([ids_b[r][f] for r in shared]) for f in features}
    return shared, columns_a, columns_b


def correlation_matrix(table_a, table_b, features=FEATURE_SCHEMA):
    """
    Pearson r and p for every feature pair (A_i, B_j) over shared record ids.

    Degenerate rows are excluded; missing values are deleted pairwise per cell.

    Raises:
        ValueError: The tables share no non-degenerate record ids
    """
    shared, columns_a, columns_b = _aligned_columns(table_a, table_b, features)
    cells = []
    for feature_a in features:
        row = []
        for feature_b in features:
            row.append(correlate(columns_a[feature_a], columns_b[feature_b], feature_a, feature_b))
        cells.append(row)
    logger.debug(f"🔗 Correlation matrix over {len(shared)} shared records")
    return CorrelationMatrix(cells, features, shared)


def diagonal_alignment(matrix):
    """
    Mean |r| on the diagonal and off it, over defined cells.

    Returns:
        dict: diagonal_mean_abs_r, off_diagonal_mean_abs_r, defined_diagonal
    """
    diagonal, off_diagonal = [], []
    rows, cols = matrix.shape
    for i in range(rows):
        for j in range(cols):
            r = matrix[i, j].r
            if math.isnan(r):
                continue
            (diagonal if i == j else off_diagonal).append(abs(r))
    return {
        "diagonal_mean_abs_r": float(np.mean(diagonal)) if diagonal else NAN,
        "off_diagonal_mean_abs_r": float(np.mean(off_diagonal)) if off_diagonal else NAN,
        "defined_diagonal": len(diagonal),
    }


# ============================================================================
# T-TESTS
# ============================================================================

@dataclass(frozen=True)
class TTestResult:
    feature: str
    t: float
    df: float
    p: float
    mean_female: float
    mean_male: float
    n_female: int
    n_male: int
    alpha: float = 0.05

    @property
    def significant(self):
        return not math.isnan(self.p) and self.p < self.alpha

    @property
    def defined(self):
        return not math.isnan(self.t)


def welch_t(xs, ys, alpha=0.05, equal_var=False, feature=""):
    """
    Two-sample t-test of mean(xs) - mean(ys), males first.

    Welch's unequal-variance test with Welch-Satterthwaite df by default;
    equal_var=True gives the pooled Student test. Missing values are dropped.
    xs is the male group and ys the female group, so t < 0 means the female
    mean is higher.

    Returns:
        TTestResult: t, df and p are NaN when either group has fewer than two
        values or both groups have zero variance
    """
    x = _as_array(xs)
    y = _as_array(ys)
    x = x[np.isfinite(x)]
    y = y[np.isfinite(y)]
    nx, ny = len(x), len(y)
    mean_x = float(x.mean()) if nx else NAN
    mean_y = float(y.mean()) if ny else NAN

    def _result(t, df, p):
        return TTestResult(feature, t, df, p, mean_female=mean_y, mean_male=mean_x,
                           n_female=ny, n_male=nx, alpha=alpha)

    if nx < 2 or ny < 2:
        return _result(NAN, NAN, NAN)

    var_x = 0.0 if _constant(x) else float(x.var(ddof=1))
    var_y = 0.0 if _constant(y) else float(y.var(ddof=1))
    if var_x == 0.0 and var_y == 0.0:
        return _result(NAN, NAN, NAN)

    if equal_var:
        df = float(nx + ny - 2)
        pooled = ((nx - 1) * var_x + (ny - 1) * var_y) / df
        se = math.sqrt(pooled * (1.0 / nx + 1.0 / ny))
    else:
        a, b = var_x / nx, var_y / ny
        se = math.sqrt(a + b)
        df = (a + b) ** 2 / (a * a / (nx - 1) + b * b / (ny - 1))

    t = (mean_x - mean_y) / se
    p = min(1.0, max(0.0, 2.0 * student_t_sf(abs(t), df)))
    return _result(t, df, p)


def effective_alpha(alpha, bonferroni=False, n_tests=len(FEATURE_SCHEMA)):
    return alpha / n_tests if bonferroni else alpha


def gender_gap_tests(tables, genders, alpha=0.05, equal_var=False, bonferroni=False,
                     features=FEATURE_SCHEMA):
    """
    Males-vs-females t-tests per variant and feature; t < 0 when the female mean is higher.

    Args:
        tables: variant name -> FeatureTable (Human first, then models)
        genders: record id -> GenderLabel; only Female and Male records are tested

    Returns:
        dict: variant -> list of TTestResult in feature order
    """
    level = effective_alpha(alpha, bonferroni, len(features))
    results = {}
    for variant, table in tables.items():
        female = [v for v in table if not v.degenerate and genders.get(v.record_id) == GenderLabel.FEMALE]
        male = [v for v in table if not v.degenerate and genders.get(v.record_id) == GenderLabel.MALE]
        if len(female) < 2 or len(male) < 2:
            logger.warning(
                f"⚠️ Variant '{variant}' has {len(female)} female / {len(male)} male records; "
                f"t-tests undefined"
            )
        results[variant] = [
            welch_t([v[f] for v in male], [v[f] for v in female], level, equal_var, feature=f)
            for f in features
        ]
    return results


# ============================================================================
# GAP SHIFT
# ============================================================================

GAP_SHIFT_CLASSES = ("introduced", "lost", "amplified", "attenuated", "reversed")


def classify_gap_shift(human, model):
    """
    How a model's gender gap on one feature differs from the human one.

    Returns:
        str: one of GAP_SHIFT_CLASSES, or "" when neither or both-equal
    """
    human_sig, model_sig = human.significant, model.significant
    if model_sig and not human_sig:
        return "introduced"
    if human_sig and not model_sig:
        return "lost"
    if not (human_sig and model_sig):
        return ""
    if (human.t < 0) != (model.t < 0):
        return "reversed"
    if abs(model.t) > abs(human.t):
        return "amplified"
    if abs(model.t) < abs(human.t):
        return "attenuated"
    return ""


__all__ = [
    'NAN', 'is_undefined', 'student_t_sf', 'CorrelationResult', 'pearson_r', 'pearson_p',
    'correlate', 'CorrelationMatrix', 'correlation_matrix', 'diagonal_alignment',
    'TTestResult', 'welch_t', 'effective_alpha', 'gender_gap_tests',
    'GAP_SHIFT_CLASSES', 'classify_gap_shift'
]
