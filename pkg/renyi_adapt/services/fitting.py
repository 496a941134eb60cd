"""Exponential-decay fits of initial pool gradients and failure-size prediction."""

import math
import numpy as np
from collections import defaultdict
from collections.abc import Iterable

from renyi_adapt.models.base import LossKind
from renyi_adapt.models.results import DecayFit
from renyi_adapt.utils.errors import ParameterError


MIN_FIT_POINTS = 3
DEFAULT_THRESHOLD = 1e-5


def predict_failure(a: float, b: float, threshold: float = DEFAULT_THRESHOLD) -> int | None:
    """Size at which a * b^(-n) reaches ``threshold``.

    The crossing point ln(a / threshold) / ln(b) is rounded to the nearest integer (at least 1).
    Returns None when the curve does not decay (b <= 1).
    """
    if a <= 0 or threshold <= 0:
        raise ParameterError(f"Prefactor and threshold must be positive, got a={a}, threshold={threshold}")
    if b <= 1.0:
        return None
    crossing = math.log(a / threshold) / math.log(b)
    return max(1, int(math.floor(crossing + 0.5)))


def fit_decay(
    medians: Iterable[tuple[int, float]], threshold: float = DEFAULT_THRESHOLD, loss_kind: LossKind | None = None
) -> DecayFit:
    """Least-squares line through (n, ln g): a = e^intercept, b = e^-slope.

    Args:
        medians: (n, g) points, at least three, every g > 0.
        threshold: Gradient resolution for the failure prediction.
        loss_kind: Loss the points belong to, carried into the result.

    Returns:
        DecayFit: Fitted coefficients, squared residual in ln g and predicted failure size.
    """
    points = sorted(medians)
    if len(points) < MIN_FIT_POINTS:
        raise ParameterError(f"Decay fit needs at least {MIN_FIT_POINTS} points, got {len(points)}")
    n = np.array([p[0] for p in points], dtype=float)
    g = np.array([p[1] for p in points], dtype=float)
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise ParameterError("Decay fit needs strictly positive, finite gradients")

    log_g = np.log(g)
    slope, intercept = np.polyfit(n, log_g, 1)
    residual = float(np.sum((log_g - (slope * n + intercept)) ** 2))
    a, b = float(np.exp(intercept)), float(np.exp(-slope))
    return DecayFit(
        loss_kind=loss_kind,
        a=a,
        b=b,
        residual=residual,
        n_points=len(points),
        threshold=threshold,
        predicted_failure_n=predict_failure(a, b, threshold),
    )


def medians_by_n(samples: Iterable[tuple[int, float]]) -> list[tuple[int, float, int, float, float]]:
    """Per n: (n, median, count, min, max) of the sampled gradients, ascending in n."""
    grouped: dict[int, list[float]] = defaultdict(list)
    for n, g in samples:
        grouped[n].append(g)
    return [
        (n, float(np.median(values)), len(values), float(np.min(values)), float(np.max(values)))
        for n, values in sorted(grouped.items())
    ]
