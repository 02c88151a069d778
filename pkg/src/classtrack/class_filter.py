"""Recursive class-PMF estimation per track.

Each track carries a probability vector over the object classes plus
background.  The class itself is assumed constant while the object is in
view, so there is no prediction step; each associated measurement blends
into the estimate as

    pmf <- (1 - K_t) * pmf + K_t * z

where the gain K_t controls how much one frame can move the estimate.
The default reciprocal gain K_t = 1/(t + 1) makes the estimate the exact
running average of the prior and all measurements so far: a single wrong
classification late in a sequence cannot flip a well-established class.
A constant gain turns the same recursion into an exponential forgetting
filter instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .core import ClassPmf, flat_pmf
from .fusion import max_object_conf, top_class

__all__ = [
    "GainPolicy",
    "ClassTrackState",
    "LostCheck",
    "gain",
    "update_class",
    "is_lost",
]


@dataclass(frozen=True)
class GainPolicy:
    """How strongly the t-th measurement moves the class estimate.

    kind="reciprocal": K_t = 1/(t + 1), the running-average gain.
    kind="constant":   K_t = lam in (0, 1], a fixed forgetting factor.
    """

    kind: str = "reciprocal"
    lam: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("reciprocal", "constant"):
            raise ValueError(f"unknown gain kind {self.kind!r}")
        if self.kind == "constant":
            if self.lam is None or not 0.0 < self.lam <= 1.0:
                raise ValueError(f"constant gain needs lam in (0, 1], got {self.lam}")
        elif self.lam is not None:
            raise ValueError("reciprocal gain takes no lam")

    @classmethod
    def reciprocal(cls) -> "GainPolicy":
        return cls(kind="reciprocal")

    @classmethod
    def constant(cls, lam: float) -> "GainPolicy":
        return cls(kind="constant", lam=lam)


@dataclass(frozen=True)
class ClassTrackState:
    """Class estimate of one track: the PMF and the number of updates applied."""

    pmf: ClassPmf
    t: int = 0

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ValueError(f"update count must be non-negative, got {self.t}")

    @classmethod
    def flat(cls, num_classes: int) -> "ClassTrackState":
        """Fresh track state: uniform over all classes and background, t = 0."""
        return cls(pmf=flat_pmf(num_classes), t=0)


def gain(t: int, policy: GainPolicy) -> float:
    """Gain for the t-th measurement update (t >= 1; the prior counts as update 0)."""
    if t < 1:
        raise ValueError(f"gain is defined for update index t >= 1, got {t}")
    if policy.kind == "constant":
        return float(policy.lam)  # type: ignore[arg-type]
    return 1.0 / (t + 1.0)


def update_class(state: ClassTrackState, z: ClassPmf, policy: GainPolicy) -> ClassTrackState:
    """Blend measurement ``z`` into the estimate with the policy's gain."""
    if len(z) != len(state.pmf):
        raise ValueError(f"measurement has {len(z)} entries, state has {len(state.pmf)}")
    k = gain(state.t + 1, policy)
    mixed = (1.0 - k) * state.pmf.probs + k * z.probs
    return ClassTrackState(pmf=ClassPmf.from_probs(mixed, tol=1e-12), t=state.t + 1)


class LostCheck(NamedTuple):
    """Outcome of the lost-track rule, with the condition(s) that fired."""

    lost: bool
    below_threshold: bool
    class_changed: bool

    @property
    def reason(self) -> str | None:
        parts = []
        if self.below_threshold:
            parts.append("below_threshold")
        if self.class_changed:
            parts.append("class_changed")
        return "+".join(parts) if parts else None


def is_lost(
    pmf: ClassPmf,
    prev_top: int,
    threshold: float,
    *,
    include_background: bool = False,
) -> LostCheck:
    """Classification-failure rule for a track's current class decision.

    A track counts as lost when its top confidence falls below ``threshold``
    or when the most likely non-background class is no longer ``prev_top``.
    The max is taken over non-background entries unless
    ``include_background`` is set.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    peak = float(max(pmf.probs)) if include_background else max_object_conf(pmf)
    below = peak < threshold
    changed = top_class(pmf) != prev_top
    return LostCheck(lost=below or changed, below_threshold=below, class_changed=changed)
