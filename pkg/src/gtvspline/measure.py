"""Finite Dirac trains ``w = sum_k a_k delta(. - x_k)``."""

from __future__ import annotations

import numpy as np


class DiscreteMeasure:
    """Weighted atoms, canonicalized: sorted locations, coincident atoms summed.

    Locations are scalars in 1-D or rows of a ``(K, 2)`` array in 2-D.
    """

    def __init__(self, locations=(), weights=()):
        loc = np.asarray(locations, dtype=float)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if loc.ndim == 0:
            loc = loc.reshape(1)
        if loc.size == 0:
            loc = loc.reshape((0,) + loc.shape[1:]) if loc.ndim > 1 else np.zeros(0)
        if loc.shape[0] != w.size:
            raise ValueError("one weight per location expected")
        if w.size:
            axis = 0
            uniq, inv = np.unique(loc, axis=axis, return_inverse=True)
            summed = np.zeros(uniq.shape[0])
            np.add.at(summed, inv.reshape(-1), w)
            loc, w = uniq, summed
        self.locations = loc
        self.weights = w
        self.locations.flags.writeable = False
        self.weights.flags.writeable = False

    def __len__(self):
        return self.weights.size

    def __iter__(self):
        return iter(zip(self.locations, self.weights))

    def tv_norm(self) -> float:
        """Total-variation norm ``sum_k |a_k|``."""
        return float(np.sum(np.abs(self.weights)))

    def __repr__(self):
        pairs = ", ".join(f"({_fmt_loc(x)}, {a:.6g})" for x, a in self)
        return f"DiscreteMeasure([{pairs}])"


def _fmt_loc(x) -> str:
    if np.ndim(x) == 0:
        return f"{float(x):.6g}"
    return "(" + ", ".join(f"{float(v):.6g}" for v in x) + ")"
