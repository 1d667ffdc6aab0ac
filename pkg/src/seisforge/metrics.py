"""Image-quality metrics: windowed SSIM, pixel losses, layered feature loss.

SSIM follows the canonical windowed formulation (gaussian 11x11 sigma 1.5,
k1=0.01, k2=0.03) over valid window positions only.  The dynamic range L is
computed per call from the joint value range unless fixed in the config,
since these images are not 8-bit.

The feature loss replaces a pretrained perceptual network with a fixed,
published filter pyramid: each stage optionally blurs and decimates a
single-channel carrier, then emits filter-bank responses; the loss is the sum
over stages of the L2 norm of the stacked response differences.  The default
bank keeps an identity tap at full resolution, so the loss is zero only for
equal images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

IDENTITY_KERNEL = np.array([[1.0]])
GRAD_X_KERNEL = np.array([[-0.5, 0.0, 0.5]])
GRAD_Z_KERNEL = GRAD_X_KERNEL.T
# Binomial 5-tap blur, exact rationals: outer([1,4,6,4,1]) / 256.
BLUR5_KERNEL = np.outer([1.0, 4.0, 6.0, 4.0, 1.0], [1.0, 4.0, 6.0, 4.0, 1.0]) / 256.0


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Normalized 2D gaussian window (the SSIM reference window)."""
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    w = np.outer(g, g)
    return w / w.sum()


@dataclass(frozen=True)
class SsimConfig:
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float | None = None  # None: computed from the inputs per call
    window: str = "gaussian"  # "gaussian" (11x11 sigma 1.5) or "uniform"
    window_size: int = 11
    sigma: float = 1.5

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")
        if self.dynamic_range is not None and self.dynamic_range <= 0:
            raise ValueError("dynamic_range must be positive")
        if self.window not in ("gaussian", "uniform"):
            raise ValueError(f"unknown window kind {self.window!r}")
        if self.window_size < 3:
            raise ValueError("window must be at least 3 wide")
        if self.window == "gaussian" and self.window_size % 2 == 0:
            raise ValueError("gaussian window size must be odd")

    def weights(self) -> np.ndarray:
        if self.window == "gaussian":
            return gaussian_window(self.window_size, self.sigma)
        w = self.window_size
        return np.full((w, w), 1.0 / (w * w))


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("images must be finite")
    return a, b


def ssim(a, b, cfg: SsimConfig = SsimConfig()) -> float:
    """Mean structural similarity over all valid window positions, in [-1, 1]."""
    a, b = _check_pair(a, b)
    w = cfg.weights()
    wh, ww = w.shape
    if a.shape[0] < wh or a.shape[1] < ww:
        raise ValueError(f"image {a.shape} smaller than the {wh}x{ww} window")

    if cfg.dynamic_range is not None:
        dr = cfg.dynamic_range
    else:
        dr = float(max(a.max(), b.max()) - min(a.min(), b.min()))
        if dr == 0.0:
            return 1.0  # both images are one identical constant
    c1 = (cfg.k1 * dr) ** 2
    c2 = (cfg.k2 * dr) ** 2

    wa = np.lib.stride_tricks.sliding_window_view(a, (wh, ww))
    wb = np.lib.stride_tricks.sliding_window_view(b, (wh, ww))
    mu_a = np.einsum("ijkl,kl->ij", wa, w)
    mu_b = np.einsum("ijkl,kl->ij", wb, w)
    e_aa = np.einsum("ijkl,kl->ij", wa * wa, w)
    e_bb = np.einsum("ijkl,kl->ij", wb * wb, w)
    e_ab = np.einsum("ijkl,kl->ij", wa * wb, w)
    var_a = e_aa - mu_a * mu_a
    var_b = e_bb - mu_b * mu_b
    cov = e_ab - mu_a * mu_b

    score = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(score.mean())


def pixel_loss(a, b, norm: str = "L2") -> float:
    """Mean absolute difference ("L1") or root-mean-square difference ("L2")."""
    a, b = _check_pair(a, b)
    d = a - b
    if norm == "L1":
        return float(np.abs(d).mean())
    if norm == "L2":
        return float(math.sqrt((d * d).mean()))
    raise ValueError(f"unknown norm {norm!r}")


@dataclass(frozen=True)
class Stage:
    """One pyramid stage: optional carrier blur, decimation, then a filter bank.

    The incoming carrier is correlated with ``pre_kernel`` (if any), decimated
    by ``downsample`` (plain [::k, ::k]), and the ``bank`` kernels are applied
    to the result; those responses are the stage's feature maps and the
    decimated carrier feeds the next stage.  All correlations use replicate
    padding.
    """

    bank: tuple[np.ndarray, ...]
    pre_kernel: np.ndarray | None = None
    downsample: int = 1

    def __post_init__(self):
        if len(self.bank) == 0:
            raise ValueError("stage needs at least one bank kernel")
        if self.downsample < 1:
            raise ValueError("downsample factor must be >= 1")


@dataclass(frozen=True)
class FeatureExtractor:
    """Fixed multi-scale filter pyramid standing in for a pretrained network."""

    stages: tuple[Stage, ...] = field(default_factory=lambda: _DEFAULT_STAGES)

    def __post_init__(self):
        if len(self.stages) == 0:
            raise ValueError("extractor needs at least one stage")

    def features(self, image: np.ndarray) -> list[np.ndarray]:
        """Per-stage stacked feature maps (n_kernels, h_l, w_l)."""
        carrier = np.asarray(image, dtype=np.float64)
        out = []
        for idx, stage in enumerate(self.stages):
            if stage.pre_kernel is not None:
                carrier = _correlate(carrier, stage.pre_kernel)
            if stage.downsample > 1:
                carrier = carrier[::stage.downsample, ::stage.downsample]
            kmax = max(max(k.shape) for k in stage.bank)
            if min(carrier.shape) < kmax:
                raise ValueError(
                    f"image too small: carrier {carrier.shape} at stage {idx} "
                    f"is smaller than a {kmax}-tap kernel"
                )
            out.append(np.stack([_correlate(carrier, k) for k in stage.bank]))
        return out


_DEFAULT_STAGES = (
    Stage(bank=(IDENTITY_KERNEL, GRAD_X_KERNEL, GRAD_Z_KERNEL)),
    Stage(bank=(IDENTITY_KERNEL, GRAD_X_KERNEL, GRAD_Z_KERNEL),
          pre_kernel=BLUR5_KERNEL, downsample=2),
    Stage(bank=(IDENTITY_KERNEL, GRAD_X_KERNEL, GRAD_Z_KERNEL),
          pre_kernel=BLUR5_KERNEL, downsample=2),
)


def _correlate(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    return ndimage.correlate(image, kernel, mode="nearest")


def feature_loss(a, b, ext: FeatureExtractor = FeatureExtractor()) -> float:
    """Sum over stages of the (un-normalized) L2 norm of feature differences."""
    a, b = _check_pair(a, b)
    total = 0.0
    for fa, fb in zip(ext.features(a), ext.features(b)):
        total += float(np.sqrt(((fa - fb) ** 2).sum()))
    return total


def combined_loss(
    a,
    b,
    lam: float = 1.0,
    ext: FeatureExtractor = FeatureExtractor(),
    norm: str = "L2",
) -> float:
    """pixel_loss + lam * feature_loss."""
    return pixel_loss(a, b, norm) + lam * feature_loss(a, b, ext)
