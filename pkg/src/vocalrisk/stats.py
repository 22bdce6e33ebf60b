"""Screening statistics: covariate-adjusted group tests, discriminant
analysis with leave-one-out validation, stepwise variable selection, and
a plain linear SVM for cross-corpus experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, gammaincc

from .errors import DegenerateDataError, ValidationError


# ---------------------------------------------------------------------------
# design matrices and least squares

@dataclass(frozen=True)
class DesignMatrix:
    matrix: np.ndarray
    columns: tuple

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def dummy_code(values, prefix: str):
    """Reference-level coding: sorted levels, first level dropped."""
    levels = sorted(set(values))
    columns = []
    names = []
    for level in levels[1:]:
        columns.append(np.array([1.0 if v == level else 0.0 for v in values]))
        names.append(f"{prefix}[{level}]")
    return columns, names


def build_design(group, categorical: dict, continuous: dict) -> DesignMatrix:
    """Intercept + binary group + dummy-coded categoricals + continuous
    covariates, in that order."""
    n = len(group)
    cols = [np.ones(n), np.asarray(group, dtype=np.float64)]
    names = ["intercept", "group"]
    for name, values in categorical.items():
        dummies, dummy_names = dummy_code(values, name)
        cols.extend(dummies)
        names.extend(dummy_names)
    for name, values in continuous.items():
        cols.append(np.asarray(values, dtype=np.float64))
        names.append(name)
    matrix = np.column_stack(cols)
    return DesignMatrix(matrix=matrix, columns=tuple(names))


def fit_ols(design: DesignMatrix, y) -> tuple:
    """Least squares via QR; returns (coefficients, residual sum of squares)."""
    X = design.matrix
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] <= X.shape[1]:
        raise DegenerateDataError("more columns than cases in the design")
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    tol = np.finfo(float).eps * max(X.shape) * (diag.max() if diag.size else 0.0)
    bad = diag <= tol
    if np.any(bad):
        names = [design.columns[i] for i in np.flatnonzero(bad)]
        raise DegenerateDataError(f"design matrix is rank deficient; collinear columns: {names}")
    coeffs = np.linalg.solve(r, q.T @ y)
    resid = y - X @ coeffs
    return coeffs, float(resid @ resid)


# ---------------------------------------------------------------------------
# distribution functions

def f_cdf(x: float, df1: float, df2: float) -> float:
    """CDF of the F distribution via the regularized incomplete beta."""
    if df1 <= 0 or df2 <= 0:
        raise ValidationError("degrees of freedom must be positive")
    if x <= 0:
        return 0.0
    z = df1 * x / (df1 * x + df2)
    return float(betainc(df1 / 2.0, df2 / 2.0, z))


def f_sf(x: float, df1: float, df2: float) -> float:
    """Upper tail of the F distribution (the p-value side)."""
    if df1 <= 0 or df2 <= 0:
        raise ValidationError("degrees of freedom must be positive")
    if x <= 0:
        return 1.0
    z = df2 / (df1 * x + df2)
    return float(betainc(df2 / 2.0, df1 / 2.0, z))


def chi2_sf(x: float, df: float) -> float:
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


# ---------------------------------------------------------------------------
# covariate-adjusted group comparison

@dataclass(frozen=True)
class AncovaRow:
    feature: str
    adjusted_mean_low: float
    adjusted_mean_high: float
    f_statistic: float
    df1: int
    df2: int
    p_value: float
    partial_eta_sq: float
    n: int


def ancova_feature(y, group, categorical: dict, continuous: dict, feature_name: str = "") -> AncovaRow:
    """Group effect on one feature, controlling for the covariates.

    F comes from comparing the full model against the model with the
    group column dropped; partial eta^2 = SS_group / (SS_group + SS_error).
    Adjusted means are model predictions at the covariate grand means.
    """
    y = np.asarray(y, dtype=np.float64)
    group = np.asarray(group, dtype=np.float64)
    n_low, n_high = int(np.sum(group == 0)), int(np.sum(group == 1))
    if n_low < 2 or n_high < 2:
        raise DegenerateDataError("each group needs at least 2 cases")
    if np.var(y) == 0:
        raise DegenerateDataError(f"feature {feature_name!r} is constant")
    full = build_design(group, categorical, continuous)
    coeffs, rss_full = fit_ols(full, y)
    reduced_matrix = np.delete(full.matrix, 1, axis=1)
    reduced = DesignMatrix(
        matrix=reduced_matrix, columns=tuple(c for c in full.columns if c != "group")
    )
    _, rss_reduced = fit_ols(reduced, y)
    df_full = full.n - full.matrix.shape[1]
    ss_group = max(rss_reduced - rss_full, 0.0)
    f_stat = (ss_group / 1.0) / (rss_full / df_full)
    p = f_sf(f_stat, 1, df_full)
    eta = ss_group / (ss_group + rss_full) if (ss_group + rss_full) > 0 else 0.0

    # predictions at covariate grand means, per group
    grand = full.matrix.mean(axis=0)
    at_low = grand.copy()
    at_low[0] = 1.0
    at_low[1] = 0.0
    at_high = grand.copy()
    at_high[0] = 1.0
    at_high[1] = 1.0
    return AncovaRow(
        feature=feature_name,
        adjusted_mean_low=float(at_low @ coeffs),
        adjusted_mean_high=float(at_high @ coeffs),
        f_statistic=float(f_stat),
        df1=1,
        df2=df_full,
        p_value=p,
        partial_eta_sq=float(eta),
        n=full.n,
    )


def benjamini_hochberg(p_values):
    """Step-up FDR-adjusted p-values (supplementary output only)."""
    p = np.asarray(p_values, dtype=np.float64)
    m = len(p)
    order = np.argsort(p)
    adjusted = np.empty(m)
    running = 1.0
    for rank in range(m, 0, -1):
        idx = order[rank - 1]
        running = min(running, p[idx] * m / rank)
        adjusted[idx] = running
    return adjusted


# ---------------------------------------------------------------------------
# two-group discriminant analysis

@dataclass(frozen=True)
class DiscriminantResult:
    variables: tuple
    weights: np.ndarray  # raw coefficients on the original variables
    intercept: float
    structure_matrix: dict  # variable -> pooled within-group correlation
    wilks_lambda: float
    lambda_p_value: float
    resubstitution_accuracy: float
    loo_accuracy: float
    centroids: tuple  # (low, high) mean discriminant scores
    ridge_used: float = 0.0


def _pooled_within(X, labels, ridge):
    n, p = X.shape
    sw = np.zeros((p, p))
    for g in (0, 1):
        xg = X[labels == g]
        centered = xg - xg.mean(axis=0)
        sw += centered.T @ centered
    sw /= n - 2
    ridge_used = 0.0
    if ridge is None:
        cond = np.linalg.cond(sw)
        if not np.isfinite(cond) or cond > 1e12:
            raise DegenerateDataError("singular within-group covariance; enable ridge")
    else:
        ridge_used = ridge * np.trace(sw) / p
        sw = sw + ridge_used * np.eye(p)
    return sw, ridge_used


def _lda_direction(X, labels, ridge):
    sw, ridge_used = _pooled_within(X, labels, ridge)
    mu0 = X[labels == 0].mean(axis=0)
    mu1 = X[labels == 1].mean(axis=0)
    w = np.linalg.solve(sw, mu1 - mu0)
    # unit pooled within-group variance for the scores
    scale = float(np.sqrt(w @ sw @ w))
    if scale == 0:
        raise DegenerateDataError("degenerate discriminant direction")
    w = w / scale
    return w, mu0, mu1, ridge_used


def _classify(scores, c0, c1):
    """Equal-priors rule: nearer centroid along the discriminant."""
    return (np.abs(scores - c1) < np.abs(scores - c0)).astype(int)


def fit_lda(X, labels, ridge: float | None = None, variables=None) -> DiscriminantResult:
    """Two-group linear discriminant with structure matrix, Wilks'
    lambda (Bartlett chi-square p), resubstitution and leave-one-out
    accuracy under equal priors."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    if X.ndim != 2:
        raise ValidationError("X must be 2-d (cases x variables)")
    n, p = X.shape
    if variables is None:
        variables = tuple(f"x{i}" for i in range(p))
    if len(np.unique(labels)) != 2 or np.sum(labels == 0) < 2 or np.sum(labels == 1) < 2:
        raise DegenerateDataError("need two groups with at least 2 cases each")

    w, mu0, mu1, ridge_used = _lda_direction(X, labels, ridge)
    grand = X.mean(axis=0)
    scores = (X - grand) @ w
    c0 = float(scores[labels == 0].mean())
    c1 = float(scores[labels == 1].mean())
    intercept = float(-grand @ w)

    # pooled within-group correlation of each variable with the scores
    structure = {}
    centered_x = np.empty_like(X)
    centered_s = np.empty_like(scores)
    for g in (0, 1):
        mask = labels == g
        centered_x[mask] = X[mask] - X[mask].mean(axis=0)
        centered_s[mask] = scores[mask] - scores[mask].mean()
    for j, name in enumerate(variables):
        sx = np.sqrt(np.sum(centered_x[:, j] ** 2))
        ss = np.sqrt(np.sum(centered_s**2))
        structure[name] = (
            float(np.sum(centered_x[:, j] * centered_s) / (sx * ss)) if sx > 0 and ss > 0 else 0.0
        )

    # canonical eigenvalue from the score decomposition
    n0, n1 = np.sum(labels == 0), np.sum(labels == 1)
    ss_between = n0 * c0**2 + n1 * c1**2
    ss_within = np.sum(centered_s**2)
    eigenvalue = ss_between / ss_within
    wilks = 1.0 / (1.0 + eigenvalue)
    bartlett = -(n - 1 - (p + 2) / 2.0) * np.log(wilks)
    lambda_p = chi2_sf(bartlett, p)

    predictions = _classify(scores, c0, c1)
    resub = float(np.mean(predictions == labels))

    correct = 0
    for i in range(n):
        keep = np.ones(n, dtype=bool)
        keep[i] = False
        try:
            wi, _, _, _ = _lda_direction(X[keep], labels[keep], ridge)
        except DegenerateDataError:
            continue
        grand_i = X[keep].mean(axis=0)
        scores_i = (X[keep] - grand_i) @ wi
        ci0 = scores_i[labels[keep] == 0].mean()
        ci1 = scores_i[labels[keep] == 1].mean()
        score_held = (X[i] - grand_i) @ wi
        pred = 1 if abs(score_held - ci1) < abs(score_held - ci0) else 0
        correct += int(pred == labels[i])

    return DiscriminantResult(
        variables=tuple(variables),
        weights=w,
        intercept=intercept,
        structure_matrix=structure,
        wilks_lambda=float(wilks),
        lambda_p_value=float(lambda_p),
        resubstitution_accuracy=resub,
        loo_accuracy=correct / n,
        centroids=(c0, c1),
        ridge_used=ridge_used,
    )


# ---------------------------------------------------------------------------
# stepwise discriminant selection

@dataclass(frozen=True)
class StepEvent:
    action: str  # "enter" | "remove"
    variable: str
    f_statistic: float
    p_value: float


@dataclass(frozen=True)
class StepwiseTrace:
    events: tuple
    selected: tuple
    removal_significance: dict  # retained variable -> sig. of F to remove


def _wilks_for(X, labels, idx):
    """Wilks' lambda of a variable subset: det(W) / det(T)."""
    if not idx:
        return 1.0
    sub = X[:, idx]
    grand = sub.mean(axis=0)
    total = sub - grand
    T = total.T @ total
    W = np.zeros_like(T)
    for g in (0, 1):
        xg = sub[labels == g]
        centered = xg - xg.mean(axis=0)
        W += centered.T @ centered
    det_t = np.linalg.det(T)
    det_w = np.linalg.det(W)
    if det_t <= 0:
        raise DegenerateDataError("total scatter is singular in stepwise selection")
    return max(det_w / det_t, 1e-300)


def stepwise_lda(X, labels, variables=None, p_enter: float = 0.05, p_remove: float = 0.10) -> StepwiseTrace:
    """Greedy forward entry by largest partial F (p <= p_enter), with a
    backward pass after each entry removing variables whose F-to-remove
    significance exceeds p_remove."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    n, p = X.shape
    if variables is None:
        variables = tuple(f"x{i}" for i in range(p))
    if p < 1:
        raise ValidationError("need at least one candidate variable")

    selected: list[int] = []
    events: list[StepEvent] = []

    def partial_f(base_idx, candidate):
        lam_base = _wilks_for(X, labels, base_idx)
        lam_full = _wilks_for(X, labels, base_idx + [candidate])
        df2 = n - 2 - len(base_idx)
        if df2 <= 0 or lam_full <= 0:
            return 0.0, 1.0
        f = df2 * (lam_base / lam_full - 1.0)
        return f, f_sf(f, 1, df2)

    while True:
        best = None
        for j in range(p):
            if j in selected:
                continue
            f, pv = partial_f(selected, j)
            if best is None or f > best[1]:
                best = (j, f, pv)
        if best is None or best[2] > p_enter:
            break
        j, f, pv = best
        selected.append(j)
        events.append(StepEvent("enter", variables[j], float(f), float(pv)))
        # backward pass
        changed = True
        while changed and len(selected) > 1:
            changed = False
            worst = None
            for j2 in selected:
                rest = [k for k in selected if k != j2]
                f2, pv2 = partial_f(rest, j2)
                if worst is None or pv2 > worst[2]:
                    worst = (j2, f2, pv2)
            if worst is not None and worst[2] > p_remove:
                selected.remove(worst[0])
                events.append(StepEvent("remove", variables[worst[0]], float(worst[1]), float(worst[2])))
                changed = True

    removal = {}
    for j in selected:
        rest = [k for k in selected if k != j]
        f, pv = partial_f(rest, j)
        removal[variables[j]] = float(pv)
    return StepwiseTrace(
        events=tuple(events),
        selected=tuple(variables[j] for j in selected),
        removal_significance=removal,
    )


# ---------------------------------------------------------------------------
# linear SVM (one-vs-rest, deterministic full-batch subgradient descent)

@dataclass
class LinearSvmModel:
    classes: tuple
    weights: np.ndarray  # (n_classes, n_features)
    biases: np.ndarray
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    cost: float


def train_linear_svm(X, labels, cost: float = 0.1, budget: int = 2000) -> LinearSvmModel:
    """L2-regularized hinge loss, minimized by a fixed deterministic
    full-batch subgradient schedule; features standardized by the
    training set."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    classes = tuple(sorted(set(labels.tolist())))
    if len(classes) < 2:
        raise DegenerateDataError("SVM training needs at least 2 classes")
    n, p = X.shape
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (X - mean) / scale

    lam = 1.0 / (cost * n)
    weights = np.zeros((len(classes), p))
    biases = np.zeros(len(classes))
    for ci, cls in enumerate(classes):
        y = np.where(labels == cls, 1.0, -1.0)
        w = np.zeros(p)
        b = 0.0
        for t in range(1, budget + 1):
            margins = y * (Z @ w + b)
            viol = margins < 1.0
            eta = 1.0 / (lam * (t + 1))
            grad_w = lam * w - (1.0 / n) * (y[viol] @ Z[viol])
            grad_b = -(1.0 / n) * np.sum(y[viol])
            w = w - eta * grad_w
            b = b - eta * grad_b
        weights[ci] = w
        biases[ci] = b
    return LinearSvmModel(
        classes=classes,
        weights=weights,
        biases=biases,
        feature_mean=mean,
        feature_scale=scale,
        cost=cost,
    )


def svm_predict(model: LinearSvmModel, X):
    X = np.asarray(X, dtype=np.float64)
    Z = (X - model.feature_mean) / model.feature_scale
    scores = Z @ model.weights.T + model.biases
    idx = np.argmax(scores, axis=1)
    return np.array([model.classes[i] for i in idx])
