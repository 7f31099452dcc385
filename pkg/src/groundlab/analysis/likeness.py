"""Per-pair human-likeness ranks and regressions against word features.

A pair is "human-like" for a model when the model ranks it close to where
humans rank it. Pairs are ordered from largest rank disagreement to
smallest, so the normalized position grows with human-likeness: 0 is the
least human-like pair, 1 the most.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import t as student_t

from ..errors import ContractError, NumericError
from ..probes.stats import rankdata

MIN_PAIRS = 3
MIN_REGRESSION_PAIRS = 10


@dataclass(frozen=True)
class PairLikeness:
    pair: tuple[str, str]
    model_rank: float
    human_rank: float
    normalized_rank: float  # in [0, 1], larger = more human-like


def _canonical(pair: tuple[str, str]) -> tuple[str, str]:
    w1, w2 = pair
    return (w1, w2) if w1 <= w2 else (w2, w1)


def _aligned_values(
    model_sims: dict, human_scores: dict
) -> tuple[list[tuple[str, str]], np.ndarray, np.ndarray]:
    model = {_canonical(p): v for p, v in model_sims.items()}
    human = {_canonical(p): v for p, v in human_scores.items()}
    if set(model) != set(human):
        diff = sorted(set(model) ^ set(human))
        raise ContractError(
            f"model and human pair sets differ on {len(diff)} pairs: {diff[:10]}"
        )
    pairs = sorted(model)
    return (
        pairs,
        np.asarray([model[p] for p in pairs], dtype=np.float64),
        np.asarray([human[p] for p in pairs], dtype=np.float64),
    )


def human_likeness(model_sims: dict, human_scores: dict) -> list[PairLikeness]:
    """Rank each pair by how closely the model's ordering matches humans'.

    Both value sets are ranked (average ties); pairs are then ordered by
    descending absolute rank difference and the position in that order,
    divided by n_pairs - 1, is the normalized human-likeness rank. Tied
    differences share their average position.
    """
    pairs, model, human = _aligned_values(model_sims, human_scores)
    n = len(pairs)
    if n < MIN_PAIRS:
        raise ContractError(f"need >= {MIN_PAIRS} pairs, got {n}")
    model_ranks = rankdata(model)
    human_ranks = rankdata(human)
    delta = np.abs(model_ranks - human_ranks)
    # rank 1 = largest disagreement; average ties; scale to [0, 1]
    normalized = (rankdata(-delta) - 1.0) / (n - 1)
    return [
        PairLikeness(
            pair=pairs[i],
            model_rank=float(model_ranks[i]),
            human_rank=float(human_ranks[i]),
            normalized_rank=float(normalized[i]),
        )
        for i in range(n)
    ]


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float
    slope_stderr: float
    residual_std: float
    n: int
    x_mean: float
    x_sxx: float

    def predict(self, x) -> np.ndarray:
        return self.intercept + self.slope * np.asarray(x, dtype=np.float64)

    def confidence_band(self, x, level: float = 0.95):
        """(lower, upper) bounds on the mean response at each x."""
        x = np.asarray(x, dtype=np.float64)
        crit = float(student_t.ppf(0.5 + level / 2.0, self.n - 2))
        half = (
            crit
            * self.residual_std
            * np.sqrt(1.0 / self.n + (x - self.x_mean) ** 2 / self.x_sxx)
        )
        center = self.predict(x)
        return center - half, center + half


def _ols(x: np.ndarray, y: np.ndarray) -> RegressionResult:
    n = x.shape[0]
    x_mean = float(x.mean())
    sxx = float(((x - x_mean) ** 2).sum())
    if sxx == 0.0:
        raise NumericError("predictor has zero variance")
    y_mean = float(y.mean())
    slope = float(((x - x_mean) * (y - y_mean)).sum() / sxx)
    intercept = y_mean - slope * x_mean
    resid = y - (intercept + slope * x)
    ss_res = float((resid**2).sum())
    ss_tot = float(((y - y_mean) ** 2).sum())
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = n - 2
    residual_var = ss_res / dof if dof > 0 else 0.0
    return RegressionResult(
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        slope_stderr=float(np.sqrt(residual_var / sxx)),
        residual_std=float(np.sqrt(residual_var)),
        n=n,
        x_mean=x_mean,
        x_sxx=sxx,
    )


def regress_likeness(
    pairs: list[PairLikeness],
    features: dict[str, dict[str, float]],
    feature_name: str,
) -> RegressionResult:
    """Least-squares fit of normalized human-likeness on a word feature.

    The pair-level predictor is the mean of the two words' feature values;
    pairs where either word lacks the feature are dropped.
    """
    xs, ys = [], []
    for p in pairs:
        f1 = features.get(p.pair[0], {}).get(feature_name)
        f2 = features.get(p.pair[1], {}).get(feature_name)
        if f1 is None or f2 is None:
            continue
        xs.append(0.5 * (f1 + f2))
        ys.append(p.normalized_rank)
    if len(xs) < MIN_REGRESSION_PAIRS:
        raise ContractError(
            f"only {len(xs)} pairs have {feature_name!r} for both words "
            f"(need >= {MIN_REGRESSION_PAIRS})"
        )
    return _ols(np.asarray(xs), np.asarray(ys))


def regress_word_values(
    values: dict[str, float],
    features: dict[str, dict[str, float]],
    feature_name: str,
) -> RegressionResult:
    """Least-squares fit of per-word values (e.g. score differences between
    two models) on a word feature."""
    xs, ys = [], []
    for word in sorted(values):
        f = features.get(word, {}).get(feature_name)
        if f is None:
            continue
        xs.append(f)
        ys.append(values[word])
    if len(xs) < MIN_REGRESSION_PAIRS:
        raise ContractError(
            f"only {len(xs)} words have {feature_name!r} "
            f"(need >= {MIN_REGRESSION_PAIRS})"
        )
    return _ols(np.asarray(xs), np.asarray(ys))
