"""Neyman-Pearson authentication tests and hard-decision fusion.

The fusion center (and each node locally) compares the whitened squared
deviation of a measurement from the known legitimate fingerprint against
a threshold solved from a target false-alarm rate.  Under the null the
doubled quadratic form is exactly chi-squared with 2*(vector length)
degrees of freedom, which is what the calibration relies on.  Local
binary decisions are combined with OR / AND / majority / weighted
averaging.  Decisions are plain bools: ``H1`` (True) means "reject,
declare intruder"; ties always resolve to ``H0`` (accept).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .numerics import chi2_quantile

H0 = False
H1 = True


class StatisticScale(str, enum.Enum):
    """Scaling convention for the quadratic-form statistic.

    ``CHI2`` doubles the whitened quadratic form so that under the null
    it literally follows chi-squared(2*len), making thresholds plain
    chi-squared quantiles (26.2/32.9/39.1 at 12 dof and so on).
    ``RAW_QUADRATIC`` keeps the bare form (null mean = len), retained for
    sensitivity studies.
    """

    CHI2 = "chi2"
    RAW_QUADRATIC = "raw_quadratic"

    @property
    def multiplier(self) -> float:
        return 2.0 if self is StatisticScale.CHI2 else 1.0


class FusionKind(str, enum.Enum):
    OR = "or"
    AND = "and"
    MAJORITY = "majority"
    WEIGHTED_AVERAGE = "weighted_average"


@dataclass(frozen=True)
class FusionRule:
    """Hard-decision combining rule applied by the fusion center.

    ``weights`` (WEIGHTED_AVERAGE only) must sum to 1; they default to
    uniform.  The weighted average declares H1 iff sum(w*u) exceeds
    ``avg_threshold`` strictly, so with uniform weights and the default
    0.5 threshold it coincides with majority voting for odd N.
    """

    kind: FusionKind
    weights: tuple[float, ...] | None = None
    avg_threshold: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", FusionKind(self.kind))
        if not 0.0 < self.avg_threshold < 1.0:
            raise ValueError(f"avg_threshold must lie in (0, 1), got {self.avg_threshold}")
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if any(v < 0 for v in w):
                raise ValueError("weights must be nonnegative")
            if abs(sum(w) - 1.0) > 1e-9:
                raise ValueError(f"weights must sum to 1, got {sum(w)}")
            object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class DetectorConfig:
    """Thresholds (given directly or solved from false-alarm targets).

    ``delta`` drives the fusion-center raw-measurement test; ``delta_n``
    the per-node local tests (a scalar is shared by all nodes).  Exactly
    one of threshold / target may be set per test; `resolve` fills in the
    missing thresholds once the problem dimensions are known.
    """

    delta: float | None = None
    target_pfa: float | None = None
    delta_n: float | tuple[float, ...] | None = None
    target_pfa_n: float | tuple[float, ...] | None = None
    scale: StatisticScale = StatisticScale.CHI2

    def __post_init__(self):
        object.__setattr__(self, "scale", StatisticScale(self.scale))
        if self.delta is not None and self.target_pfa is not None:
            raise ValueError("give either delta or target_pfa, not both")
        if self.delta_n is not None and self.target_pfa_n is not None:
            raise ValueError("give either delta_n or target_pfa_n, not both")
        if self.delta is not None and self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    def resolve(self, n_nodes: int, n_taps: int) -> "DetectorConfig":
        """Solve any target false-alarm rates into concrete thresholds."""
        delta = self.delta
        if delta is None and self.target_pfa is not None:
            delta = solve_threshold(self.target_pfa, 2 * n_nodes * n_taps)
        delta_n = self.delta_n
        if delta_n is None and self.target_pfa_n is not None:
            targets = self.target_pfa_n
            if np.isscalar(targets):
                delta_n = solve_threshold(float(targets), 2 * n_taps)
            else:
                delta_n = tuple(solve_threshold(float(a), 2 * n_taps) for a in targets)
        return DetectorConfig(delta=delta, delta_n=delta_n, scale=self.scale)

    def delta_n_vector(self, n_nodes: int) -> np.ndarray:
        """Per-node thresholds broadcast to length ``n_nodes``."""
        if self.delta_n is None:
            raise ValueError("no local thresholds configured")
        if np.isscalar(self.delta_n):
            return np.full(n_nodes, float(self.delta_n))
        vec = np.asarray(self.delta_n, dtype=np.float64)
        if vec.shape != (n_nodes,):
            raise ValueError(f"delta_n must be scalar or length {n_nodes}, got {vec.shape}")
        return vec


def solve_threshold(alpha: float, dof: int) -> float:
    """Threshold whose chi-squared(dof) upper-tail mass equals ``alpha``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return chi2_quantile(1.0 - alpha, dof)


def _quadratic_statistic(
    z: np.ndarray,
    h_ref: np.ndarray,
    inv_applier: Callable[[np.ndarray], np.ndarray],
    scale: StatisticScale,
) -> np.ndarray | float:
    d = np.asarray(z) - np.asarray(h_ref)
    q = (d.conj() * inv_applier(d)).sum(axis=-1)
    q_im = np.abs(np.imag(q)) if np.iscomplexobj(q) else 0.0
    if np.any(q_im > 1e-10 * np.maximum(1.0, np.abs(q))):
        raise ValueError("quadratic form has a non-negligible imaginary part")
    stat = StatisticScale(scale).multiplier * np.maximum(np.real(q), 0.0)
    return stat[()] if np.ndim(stat) == 0 else stat


def fc_raw_statistic(
    z_star: np.ndarray,
    h_ab_star: np.ndarray,
    sigma_star_inv_applier: Callable[[np.ndarray], np.ndarray],
    scale: StatisticScale = StatisticScale.CHI2,
) -> float:
    """Fusion-center test statistic on the stacked raw measurement.

    Whitened squared deviation (z - h)^H Sigma^-1 (z - h), doubled under
    the ``CHI2`` scale.  ``sigma_star_inv_applier`` applies the
    inverse stacked noise covariance.  Leading axes of ``z_star`` are
    treated as a batch.
    """
    if np.asarray(z_star).shape[-1] != np.asarray(h_ab_star).shape[-1]:
        raise ValueError("z_star and h_ab_star lengths differ")
    return _quadratic_statistic(z_star, h_ab_star, sigma_star_inv_applier, scale)


def fc_raw_decide(statistic: float, delta: float) -> bool:
    """H1 iff the statistic strictly exceeds the threshold (tie -> H0)."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return np.asarray(statistic) > delta if np.ndim(statistic) else bool(statistic > delta)


def local_decide(
    z_n: np.ndarray,
    h_abn: np.ndarray,
    sigma_n_inv: Callable[[np.ndarray], np.ndarray],
    delta_n: float,
    scale: StatisticScale = StatisticScale.CHI2,
) -> int:
    """One node's hard decision on its own L-tap measurement.

    Same statistic and tie conventions as the fusion-center test; returns
    1 for "declare intruder".  ``sigma_n_inv`` applies the node's inverse
    noise covariance.
    """
    if np.asarray(z_n).shape[-1] != np.asarray(h_abn).shape[-1]:
        raise ValueError("z_n and h_abn lengths differ")
    stat = _quadratic_statistic(z_n, h_abn, sigma_n_inv, scale)
    if np.ndim(stat):
        return (stat > delta_n).astype(np.int64)
    return int(stat > delta_n)


def fuse(u_star: Sequence[int] | np.ndarray, rule: FusionRule) -> bool:
    """Combine per-node binary decisions into the fusion-center verdict.

    OR: H1 iff any node fired; AND: H1 iff all fired; MAJORITY: H1 iff
    strictly more than half fired; WEIGHTED_AVERAGE: H1 iff the weighted
    mean strictly exceeds ``avg_threshold``.  All ties resolve to H0.
    A trailing batch axis is supported: shape (..., N) returns (...).
    """
    u = np.asarray(u_star)
    if u.ndim == 0 or u.shape[-1] == 0:
        raise ValueError("u_star must be a nonempty decision vector")
    if not np.isin(u, (0, 1)).all():
        raise ValueError("u_star entries must be 0 or 1")
    n = u.shape[-1]
    if rule.kind is FusionKind.OR:
        out = u.any(axis=-1)
    elif rule.kind is FusionKind.AND:
        out = u.all(axis=-1)
    elif rule.kind is FusionKind.MAJORITY:
        out = u.sum(axis=-1) > n / 2.0
    else:
        w = np.full(n, 1.0 / n) if rule.weights is None else np.asarray(rule.weights)
        if w.shape != (n,):
            raise ValueError(f"weights length {w.shape} does not match N={n}")
        out = u @ w > rule.avg_threshold
    return bool(out) if np.ndim(out) == 0 else out


def fused_pfa_analytic(alpha_n: float, n: int, rule: FusionKind) -> float:
    """Closed-form fused false-alarm rate under iid per-node alarms.

    Used to validate the Monte Carlo engine: OR is 1-(1-a)^N, AND is a^N,
    MAJORITY is the binomial tail P(Bin(N, a) > N/2).
    """
    if not 0.0 <= alpha_n <= 1.0:
        raise ValueError(f"alpha_n must lie in [0, 1], got {alpha_n}")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    kind = FusionKind(rule)
    if kind is FusionKind.OR:
        return 1.0 - (1.0 - alpha_n) ** n
    if kind is FusionKind.AND:
        return alpha_n**n
    if kind is FusionKind.MAJORITY:
        return float(stats.binom.sf(n // 2, n, alpha_n))
    raise ValueError("no closed form for weighted averaging with general weights")


def solved_threshold_table(alphas: Sequence[float], dof: int) -> list[tuple[float, int, float]]:
    """(alpha, dof, threshold) rows for a list of false-alarm targets."""
    return [(float(a), dof, solve_threshold(float(a), dof)) for a in alphas]
