"""Dynamically weighted segmentation loss.

The training objective combines a feature-similarity term (cross entropy of
the response map against its own argmax pseudo-labels) and a spatial
continuity term (L1 norm of horizontal/vertical response differences):

    total = similarity + effective_weight * continuity

The effective weight is recomputed every iteration from the current number
of distinct clusters, so the balance between the two terms shifts as
clusters merge:

    fixed  ->  mu            (constant balance)
    fsf    ->  q' / mu       (feature similarity focus: continuity dominates
                              early while many clusters remain, fading later)
    scf    ->  mu / q'       (spatial continuity focus: continuity strengthens
                              as the cluster count drops)
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DegenerateInputError
from .kernels import softmax_cross_entropy

SCHEDULE_KINDS = ("fixed", "fsf", "scf")

# Recommended base weights per schedule kind.
DEFAULT_MU = {"fixed": 5.0, "fsf": 15.0, "scf": 50.0}


@dataclass
class WeightSchedule:
    """Schedule kind plus the base balancing weight mu (> 0)."""

    kind: str
    mu: float

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ContractViolationError(
                f"schedule kind must be one of {SCHEDULE_KINDS}, got {self.kind!r}")
        if not self.mu > 0:
            raise ContractViolationError("mu must be positive")

    @classmethod
    def of(cls, kind: str, mu=None):
        """Build a schedule, falling back to the kind's recommended mu."""
        if mu is None:
            if kind not in DEFAULT_MU:
                raise ContractViolationError(
                    f"schedule kind must be one of {SCHEDULE_KINDS}, got {kind!r}")
            mu = DEFAULT_MU[kind]
        return cls(kind=kind, mu=float(mu))


@dataclass
class LossBreakdown:
    """One iteration's loss components; total = similarity + effective_weight*continuity."""

    total: float
    similarity: float
    continuity: float
    effective_weight: float


def schedule_weight(schedule: WeightSchedule, num_clusters: int) -> float:
    """Effective weight for the current cluster count."""
    if num_clusters < 1:
        raise ContractViolationError(f"cluster count must be >= 1, got {num_clusters}")
    if schedule.kind == "fixed":
        return schedule.mu
    if schedule.kind == "fsf":
        return num_clusters / schedule.mu
    return schedule.mu / num_clusters


def continuity_loss(response: np.ndarray):
    """Mean absolute horizontal/vertical difference of the response map.

    Averages over all difference terms, N = q*((H-1)*W + H*(W-1)), keeping
    the value comparable across image sizes. Returns (loss, grad) with the
    L1 subgradient convention sign(0) = 0.
    """
    if response.ndim != 3:
        raise ContractViolationError("response map must be (q, H, W)")
    q, height, width = response.shape
    if height < 2 and width < 2:
        raise DegenerateInputError("continuity loss needs H >= 2 or W >= 2")

    d_vert = response[:, 1:, :] - response[:, :-1, :]
    d_horz = response[:, :, 1:] - response[:, :, :-1]
    n_terms = q * ((height - 1) * width + height * (width - 1))

    loss = (np.abs(d_vert).sum() + np.abs(d_horz).sum()) / n_terms

    grad = np.zeros_like(response)
    s_vert = np.sign(d_vert)
    grad[:, 1:, :] += s_vert
    grad[:, :-1, :] -= s_vert
    s_horz = np.sign(d_horz)
    grad[:, :, 1:] += s_horz
    grad[:, :, :-1] -= s_horz
    grad /= n_terms
    return loss, grad


def similarity_loss(response: np.ndarray, labels: np.ndarray):
    """Cross entropy of the response against fixed pseudo-labels.

    Labels are targets only; no gradient flows through the argmax that
    produced them. Returns (loss, grad).
    """
    return softmax_cross_entropy(response, labels)


def total_loss(response: np.ndarray, labels: np.ndarray,
               schedule: WeightSchedule, num_clusters: int):
    """Weighted sum of both terms at the schedule's current effective weight.

    The weight is a constant within the iteration (no gradient through the
    cluster count). Returns (LossBreakdown, grad_response).
    """
    effective = schedule_weight(schedule, num_clusters)
    sim, grad_sim = similarity_loss(response, labels)
    con, grad_con = continuity_loss(response)
    breakdown = LossBreakdown(
        total=sim + effective * con,
        similarity=sim,
        continuity=con,
        effective_weight=effective,
    )
    return breakdown, grad_sim + effective * grad_con
