"""Linear Kalman filter over the 4-d box state (px, py, l, h).

The motion model is constant position: the transition matrix is the
identity and all dynamics are absorbed into the process noise Q.  The
observation matrix is also the identity, since the fused measurement lives
in the same coordinates as the state; its covariance comes per-frame from
the proposal scatter.  The covariance update uses the Joseph form, which
stays positive semidefinite under floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import BoundingBox, ClasstrackError, check_symmetric, symmetrize
from .fusion import FusedMeasurement

__all__ = [
    "SingularInnovation",
    "BoxState",
    "MotionModel",
    "default_process_noise",
    "predict",
    "update",
]


class SingularInnovation(ClasstrackError):
    """Innovation covariance P + R is not invertible.

    With the covariance floor applied to measurements this only happens if
    both the state and the measurement covariance are degenerate.
    """


@dataclass(frozen=True)
class BoxState:
    """Gaussian belief over a box: mean and 4x4 covariance."""

    mean: BoundingBox
    cov: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "cov", check_symmetric(self.cov))


def default_process_noise(sigma_center: float = 10.0, sigma_size: float = 5.0) -> np.ndarray:
    """Diagonal Q with one std-dev for the center and one for the size, px."""
    return np.diag([sigma_center**2, sigma_center**2, sigma_size**2, sigma_size**2]).astype(np.float64)


@dataclass(frozen=True)
class MotionModel:
    """Constant-position motion model: identity transition plus process noise Q.

    ``per_class_q`` optionally overrides Q per object class label (classes
    that move differently), falling back to the shared Q.
    """

    q: np.ndarray = field(default_factory=default_process_noise)
    per_class_q: Mapping[int, np.ndarray] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", check_symmetric(self.q))
        if self.per_class_q is not None:
            object.__setattr__(
                self, "per_class_q", {int(k): check_symmetric(v) for k, v in self.per_class_q.items()}
            )

    def q_for(self, class_label: int | None = None) -> np.ndarray:
        if class_label is not None and self.per_class_q is not None:
            return self.per_class_q.get(class_label, self.q)
        return self.q


def predict(state: BoxState, model: MotionModel, class_label: int | None = None) -> BoxState:
    """Time update: mean unchanged, covariance grows by Q."""
    cov = symmetrize(state.cov + model.q_for(class_label))
    return BoxState(mean=state.mean, cov=cov)


def update(state: BoxState, measurement: FusedMeasurement) -> BoxState:
    """Measurement update with identity observation matrix, Joseph form."""
    p = state.cov
    r = check_symmetric(measurement.box_cov)
    s = symmetrize(p + r)
    try:
        # K = P S^-1; with symmetric S and P, K = solve(S, P).T
        k = np.linalg.solve(s, p).T
    except np.linalg.LinAlgError as exc:
        raise SingularInnovation(f"innovation covariance is singular: {exc}") from exc

    innovation = measurement.box.as_array() - state.mean.as_array()
    mean = state.mean.as_array() + k @ innovation

    i_k = np.eye(4) - k
    cov = symmetrize(i_k @ p @ i_k.T + k @ r @ k.T)
    return BoxState(mean=BoundingBox.from_array(mean), cov=cov)
