"""Why one bad classification should not kill a track.

A track's class estimate is updated as a running average of the per-frame
detector output: pmf <- (1 - K_t) pmf + K_t z with K_t = 1/(t + 1).  After
a few consistent frames the gain is small, so a single misclassified frame
moves the estimate only slightly.  Deciding from each frame's raw output
instead (the "standard" approach) flips the class the moment the detector
does.

This walks the exact situation of the lost-track experiment: two clean
frames, then a frame whose class confidences were swapped.
"""

import numpy as np

from classtrack import GainPolicy, flat_pmf, is_lost, top_class, update_class, validate_pmf
from classtrack.class_filter import ClassTrackState

M = 2  # two object classes plus background
clean = validate_pmf([0.9, 0.05, 0.05])     # detector says class 1
swapped = validate_pmf([0.05, 0.9, 0.05])   # same frame, classes 1 and 2 swapped

measurements = [clean, clean, swapped]
policy = GainPolicy.reciprocal()

state = ClassTrackState(pmf=flat_pmf(M), t=0)
print("frame  gain   recursive estimate          raw measurement      recursive  raw")
for i, z in enumerate(measurements, start=1):
    k = 1.0 / (state.t + 2.0)
    state = update_class(state, z, policy)
    rec = is_lost(state.pmf, prev_top=1, threshold=0.4)
    raw = is_lost(z, prev_top=1, threshold=0.4)
    print(
        f"{i:4d}  {k:5.2f}   {np.round(state.pmf.probs, 4)}  {np.round(z.probs, 3)}"
        f"   {'LOST' if rec.lost else 'ok  '}     {'LOST' if raw.lost else 'ok'}"
    )

print(
    f"\nafter the swap the recursive estimate still has class"
    f" {top_class(state.pmf)} at {max(state.pmf.object_probs()):.4f} >= 0.4 -> the track survives;"
)
print("the raw per-frame decision changed its argmax -> that track is killed.")

# The same recursion with a constant gain forgets faster: useful when the
# object's class may genuinely change, fatal when the detector glitches.
print("\nconstant-gain comparison (final estimate after the swapped frame):")
for lam in (0.2, 0.5, 0.8):
    s = ClassTrackState(pmf=flat_pmf(M), t=0)
    for z in measurements:
        s = update_class(s, z, GainPolicy.constant(lam))
    flag = is_lost(s.pmf, prev_top=1, threshold=0.4)
    print(f"  lam={lam}: {np.round(s.pmf.probs, 4)}  {'LOST' if flag.lost else 'survives'}")
