"""
Blahut-Arimoto solver for the point-to-point rate-distortion function of a
discrete memoryless source. Serves as the independent R(D) oracle for the
region search. Updates run in the log domain.
"""
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.special import logsumexp

from mtrd.core.exceptions import InfeasibleDistortion, InputError
from mtrd.core.logging import get_logger
from mtrd.models.distortion import DistortionMeasure
from mtrd.models.source import SourceModel

logger = get_logger(__name__)


@dataclass(frozen=True)
class RDPoint:
    slope: float
    distortion: float
    rate: float
    channel: np.ndarray


def blahut_arimoto(
    p_x: np.ndarray,
    rho: np.ndarray,
    slope: float,
    max_iter: int = 10_000,
    tol: float = 1e-12,
) -> RDPoint:
    """One point of R(D): minimize I(X;Y) + slope * E[rho] over P(y|x)."""
    p_x = np.asarray(p_x, dtype=np.float64)
    p_x = p_x / p_x.sum()
    support = p_x > 0
    p, rho_s = p_x[support], np.asarray(rho, dtype=np.float64)[support]
    log_p = np.log(p)
    log_q = np.full(rho_s.shape, -np.log(rho_s.shape[1]))
    scaled = -slope * rho_s

    previous = np.inf
    for _ in range(max_iter):
        log_q_y = logsumexp(log_p[:, None] + log_q, axis=0)
        log_q = scaled + log_q_y
        log_q -= logsumexp(log_q, axis=1, keepdims=True)
        q = np.exp(log_q)
        rate = float(np.sum(p[:, None] * q * (log_q - log_q_y)))
        distortion = float(np.sum(p[:, None] * q * rho_s))
        lagrangian = rate + slope * distortion
        if previous - lagrangian < tol:
            break
        previous = lagrangian

    channel = np.zeros((p_x.size, rho_s.shape[1]))
    channel[support] = q
    channel[~support] = np.exp(log_q_y)
    return RDPoint(float(slope), distortion, max(rate, 0.0), channel)


def distortion_range(p_x: np.ndarray, rho: np.ndarray) -> tuple[float, float]:
    """(D_min, D_max): below D_min nothing is achievable, from D_max on the rate is 0."""
    p_x = np.asarray(p_x, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    return float(p_x @ rho.min(axis=1)), float((p_x @ rho).min())


def rate_distortion(p_x: np.ndarray, rho: np.ndarray, D: float, slack: float = 1e-12) -> RDPoint:
    """R(D) by bisection on the slope until the achieved distortion meets D."""
    d_min, d_max = distortion_range(p_x, rho)
    if D < d_min - slack:
        raise InfeasibleDistortion(f"D={D} is below the minimum achievable distortion {d_min:.9f}")
    if D >= d_max:
        column = int(np.argmin(np.asarray(p_x) @ np.asarray(rho)))
        channel = np.zeros(np.shape(rho))
        channel[:, column] = 1.0
        return RDPoint(0.0, d_max, 0.0, channel)

    lo, hi = 0.0, 1.0
    while blahut_arimoto(p_x, rho, hi).distortion > D and hi < 1e4:
        lo, hi = hi, hi * 2.0
    best = blahut_arimoto(p_x, rho, hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        point = blahut_arimoto(p_x, rho, mid)
        if point.distortion > D:
            lo = mid
        else:
            hi, best = mid, point
        if hi - lo < 1e-9:
            break
    logger.debug("rate_distortion", D=D, slope=best.slope, rate=best.rate)
    return best


def rate_distortion_curve(p_x: np.ndarray, rho: np.ndarray, slopes: Sequence[float]) -> List[RDPoint]:
    return [blahut_arimoto(p_x, rho, s) for s in slopes]


def source_rate_distortion(model: SourceModel, measure: DistortionMeasure, D: float) -> RDPoint:
    """R(D) for a single-terminal memoryless model without side information."""
    if model.terminals != 1 or model.side_info is not None:
        raise InputError("Blahut-Arimoto applies to one terminal without side information")
    p_x = model.single_letter().probs
    return rate_distortion(p_x, measure.table, D)
