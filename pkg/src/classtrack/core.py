"""Shared domain types for box/class tracking.

Conventions used throughout the package:

* Bounding boxes are center-parameterized ``(px, py, l, h)`` in pixels.
  Corner formats are converted at the I/O boundary only.
* Class probability vectors have ``M + 1`` entries: object classes labeled
  ``1..M`` followed by the background class at the last position.  Class
  labels in the public API are therefore 1-based; the background label is
  ``M + 1`` and is never a valid "top class".
* Covariance matrices over box coordinates are plain ``(4, 4)`` float64
  arrays, kept symmetric by construction and checked where they enter
  the system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ClasstrackError",
    "LengthMismatch",
    "NegativeEntry",
    "NotASimplex",
    "NotSymmetric",
    "BoundingBox",
    "ClassPmf",
    "Proposal",
    "FrameDetections",
    "INGEST_SUM_TOL",
    "INTERNAL_SUM_TOL",
    "validate_pmf",
    "flat_pmf",
    "psd_project",
    "symmetrize",
    "check_symmetric",
]

# Detector exports are float32, internal math is float64.
INGEST_SUM_TOL = 1e-6
INTERNAL_SUM_TOL = 1e-9

SYMMETRY_TOL = 1e-9


class ClasstrackError(Exception):
    """Base class for all errors raised by this package."""


class NotASimplex(ClasstrackError):
    """Probability vector does not sum to 1 within tolerance."""


class NegativeEntry(ClasstrackError):
    """Probability vector contains a negative entry."""


class LengthMismatch(ClasstrackError):
    """Vector length does not match the expected number of classes."""


class NotSymmetric(ClasstrackError):
    """Matrix expected to be symmetric is not, within tolerance."""


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box given by center ``(px, py)`` and size ``(l, h)`` in pixels."""

    px: float
    py: float
    l: float
    h: float

    def __post_init__(self) -> None:
        for name in ("px", "py", "l", "h"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"box coordinate {name} must be finite, got {v!r}")
        if self.l <= 0 or self.h <= 0:
            raise ValueError(f"box size must be positive, got l={self.l}, h={self.h}")

    @classmethod
    def from_array(cls, a: Sequence[float]) -> "BoundingBox":
        px, py, l, h = (float(v) for v in a)
        return cls(px, py, l, h)

    def as_array(self) -> np.ndarray:
        return np.array([self.px, self.py, self.l, self.h], dtype=np.float64)

    def corners(self) -> tuple[float, float, float, float]:
        """(x1, y1, x2, y2) corner representation, for overlap math."""
        hx, hy = self.l / 2.0, self.h / 2.0
        return (self.px - hx, self.py - hy, self.px + hx, self.py + hy)

    def area(self) -> float:
        return self.l * self.h


class ClassPmf:
    """Immutable probability vector over ``M`` object classes plus background.

    Construct through :func:`validate_pmf` (or :meth:`from_probs` for values
    already known to be an exact simplex, e.g. convex combinations of
    existing PMFs).
    """

    __slots__ = ("_probs",)

    def __init__(self, probs: np.ndarray):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size < 2:
            raise LengthMismatch(f"PMF needs at least 2 entries, got shape {probs.shape}")
        probs = probs.copy()
        probs.setflags(write=False)
        self._probs = probs

    @classmethod
    def from_probs(cls, probs: np.ndarray, tol: float = INTERNAL_SUM_TOL) -> "ClassPmf":
        """Wrap an internally-produced vector, asserting it is a simplex within ``tol``."""
        p = np.asarray(probs, dtype=np.float64)
        if np.any(p < -tol) or np.any(p > 1.0 + tol):
            raise NegativeEntry(f"entries outside [0, 1]: {p}")
        s = math.fsum(p)
        if abs(s - 1.0) > tol:
            raise NotASimplex(f"sum {s!r} deviates from 1 by more than {tol}")
        return cls(np.clip(p, 0.0, 1.0))

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def num_classes(self) -> int:
        """Number of object classes M (background excluded)."""
        return self._probs.size - 1

    @property
    def background(self) -> float:
        """Probability of the background class (last entry)."""
        return float(self._probs[-1])

    def prob_of(self, label: int) -> float:
        """Probability of class ``label`` (1-based; ``M + 1`` is background)."""
        if not 1 <= label <= self._probs.size:
            raise LengthMismatch(f"label {label} outside 1..{self._probs.size}")
        return float(self._probs[label - 1])

    def object_probs(self) -> np.ndarray:
        """The M non-background entries."""
        return self._probs[:-1]

    def __len__(self) -> int:
        return self._probs.size

    def __repr__(self) -> str:
        return f"ClassPmf({np.array2string(self._probs, separator=', ')})"

    def allclose(self, other: "ClassPmf", atol: float = 0.0) -> bool:
        return bool(np.allclose(self._probs, other._probs, rtol=0.0, atol=atol))


@dataclass(frozen=True)
class Proposal:
    """One anchor-box output: a box plus its class confidence vector."""

    box: BoundingBox
    confidence: ClassPmf


@dataclass(frozen=True)
class FrameDetections:
    """All proposals emitted by the detector for one image / time step."""

    frame_index: int
    proposals: tuple[Proposal, ...]

    def __post_init__(self) -> None:
        if self.frame_index < 0:
            raise ValueError(f"frame_index must be non-negative, got {self.frame_index}")
        object.__setattr__(self, "proposals", tuple(self.proposals))


def _renormalize_exact(v: np.ndarray) -> np.ndarray:
    """Scale ``v`` so that ``math.fsum`` of the result is exactly 1.0.

    Division gets within a few ulps; the residual is folded into the largest
    entry until the exactly-rounded sum hits 1.0, which makes repeated
    normalization a bit-exact fixed point.
    """
    out = v / math.fsum(v)
    jmax = int(np.argmax(out))
    for _ in range(16):
        r = math.fsum(out) - 1.0
        if r == 0.0:
            break
        out = out.copy()
        out[jmax] -= r
    return out


def validate_pmf(
    v: Sequence[float] | np.ndarray,
    *,
    normalize: bool = False,
    expected_len: int | None = None,
) -> ClassPmf:
    """Check a raw confidence vector and return it as an exact simplex.

    Without ``normalize`` the entries must lie in [0, 1] and sum to 1 within
    ``INGEST_SUM_TOL``; the vector is then rescaled to an exact simplex.
    With ``normalize=True`` any nonnegative vector with positive sum is
    accepted and scaled to sum 1 (covers detectors whose per-anchor
    confidences are not softmax-normalized).

    Raises LengthMismatch, NegativeEntry or NotASimplex.
    """
    a = np.asarray(v, dtype=np.float64)
    if a.ndim != 1:
        raise LengthMismatch(f"PMF must be a 1-d vector, got shape {a.shape}")
    if expected_len is not None and a.size != expected_len:
        raise LengthMismatch(f"expected {expected_len} entries, got {a.size}")
    if a.size < 2:
        raise LengthMismatch(f"PMF needs at least 2 entries (one class plus background), got {a.size}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"PMF entries must be finite: {a}")
    if np.any(a < 0.0):
        raise NegativeEntry(f"negative entries in {a}")

    s = math.fsum(a)
    if normalize:
        if s <= 0.0:
            raise NotASimplex("cannot normalize a vector with non-positive sum")
    else:
        if abs(s - 1.0) > INGEST_SUM_TOL:
            raise NotASimplex(f"sum {s!r} outside [1 - {INGEST_SUM_TOL}, 1 + {INGEST_SUM_TOL}]")
    if s == 1.0:
        return ClassPmf(a)
    return ClassPmf(_renormalize_exact(a))


def flat_pmf(num_classes: int) -> ClassPmf:
    """Uniform PMF over ``num_classes`` object classes plus background."""
    if num_classes < 1:
        raise LengthMismatch(f"need at least one object class, got {num_classes}")
    n = num_classes + 1
    return ClassPmf(_renormalize_exact(np.full(n, 1.0 / n)))


def check_symmetric(m: np.ndarray, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Return ``m`` as float64, raising NotSymmetric if it is not square-symmetric."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=tol):
        raise NotSymmetric(f"asymmetry exceeds {tol}: max |m - m.T| = {np.abs(a - a.T).max()}")
    return a


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Average a nearly-symmetric matrix with its transpose."""
    a = np.asarray(m, dtype=np.float64)
    return (a + a.T) / 2.0


def psd_project(m: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Clamp every eigenvalue of a symmetric matrix to at least ``floor``.

    Eigendecompose, clamp, reconstruct.  Used as a numerical guard on
    measurement covariances; with ``floor > 0`` it also regularizes the
    degenerate single-proposal case (zero scatter).
    """
    if floor < 0:
        raise ValueError(f"floor must be >= 0, got {floor}")
    a = check_symmetric(m)
    w, q = np.linalg.eigh(symmetrize(a))
    if np.all(w >= floor):
        return symmetrize(a)
    w = np.maximum(w, floor)
    return symmetrize(q @ np.diag(w) @ q.T)
