"""One-shot magnitude pruning of weight tensors to a target sparsity.

Weights are ranked by absolute value; the floor(fraction * n) smallest are
masked to zero.  Ties between equal magnitudes are broken by flat (C-order)
index, lower index pruned first, so the mask is a deterministic function of
the tensor.  Pre-existing zeros rank smallest and are pruned first.
"""

from __future__ import annotations

import numpy as np


def level_prune(weights, fraction: float) -> np.ndarray:
    """Boolean keep-mask (same shape as weights) pruning the smallest magnitudes.

    Exactly floor(fraction * n) entries are marked pruned (False).
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise ValueError("cannot prune an empty tensor")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if not (0.0 <= fraction <= 1.0):
        raise ValueError(f"sparsity fraction {fraction!r} not in [0, 1]")
    n_prune = int(np.floor(fraction * w.size))
    keep = np.ones(w.size, dtype=bool)
    if n_prune > 0:
        order = np.argsort(np.abs(w.ravel()), kind="stable")
        keep[order[:n_prune]] = False
    return keep.reshape(w.shape)


def apply_mask(weights, keep_mask) -> np.ndarray:
    """Zero the pruned entries; kept entries pass through unchanged."""
    w = np.asarray(weights, dtype=np.float64)
    mask = np.asarray(keep_mask, dtype=bool)
    if mask.shape != w.shape:
        raise ValueError(f"mask shape {mask.shape} does not match weights {w.shape}")
    return np.where(mask, w, 0.0)


def sparsity_of(weights) -> float:
    """Fraction of exactly-zero entries."""
    w = np.asarray(weights)
    if w.size == 0:
        raise ValueError("sparsity of an empty tensor is undefined")
    return float(np.count_nonzero(w == 0.0) / w.size)
