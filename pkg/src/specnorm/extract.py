"""Isophote extraction: smoothing, brightest-point normalization and
sub-pixel marching-squares level-set tracing inside a region of interest.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .image import ScalarImage

log = logging.getLogger(__name__)

#: Default smoothing width (px) for images of unknown noise level. The
#: synthetic harness scales the blur with the known noise level instead.
DEFAULT_BLUR_SIGMA = 2.0

#: Fraction of the ROI at the max intensity that flags saturation.
SATURATION_FRACTION = 0.005


class ExtractionError(ValueError):
    pass


class NoSpecularityError(ExtractionError):
    """Region of interest has no usable intensity maximum."""


class SelectionFailedError(ExtractionError):
    """No closed isophote polyline available for reconstruction."""


class BpOnBoundaryWarning(UserWarning):
    """Intensity maximum sits on the ROI boundary: specularity likely clipped."""


class SaturationWarning(UserWarning):
    """A saturated plateau occupies a non-negligible part of the ROI."""


class OpenPolylineWarning(UserWarning):
    """Selected isophote is clipped by the ROI; fit quality may degrade."""


@dataclass(frozen=True)
class RegionOfInterest:
    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 16 or self.height < 16:
            raise ExtractionError("ROI must be at least 16x16 px")
        if self.x0 < 0 or self.y0 < 0:
            raise ExtractionError("ROI origin must be nonnegative")

    def clip_check(self, img: ScalarImage) -> None:
        if self.x0 + self.width > img.width or self.y0 + self.height > img.height:
            raise ExtractionError("ROI exceeds the image bounds")

    @classmethod
    def full(cls, img: ScalarImage) -> "RegionOfInterest":
        return cls(0, 0, img.width, img.height)


@dataclass
class IsophotePolyline:
    """Ordered sub-pixel points on one level-set component."""

    points: np.ndarray      # (N, 2) image coordinates (x, y)
    closed: bool
    level: float

    def enclosed_area(self) -> float:
        """Absolute shoelace area (open polylines are closed off)."""
        p = self.points
        x, y = p[:, 0], p[:, 1]
        return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    def contains(self, point) -> bool:
        """Even-odd ray-cast point-in-polygon test."""
        x, y = float(point[0]), float(point[1])
        p = self.points
        x1, y1 = p[:, 0], p[:, 1]
        x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
        cross = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y - y1) / (y2 - y1) * (x2 - x1)
        return bool(np.count_nonzero(cross & (x < xint)) % 2)

    def to_dict(self) -> dict:
        return {"points": self.points.tolist(), "closed": self.closed,
                "level": self.level}


def gaussian_smooth(img: ScalarImage, sigma_blur: float) -> ScalarImage:
    """Separable Gaussian blur, kernel truncated at 3 sigma, reflected edges."""
    if sigma_blur < 0:
        raise ExtractionError("blur sigma must be nonnegative")
    if sigma_blur == 0:
        return ScalarImage(data=img.data.copy(), m=img.m)
    data = gaussian_filter(img.data, sigma=sigma_blur, mode="reflect",
                           truncate=3.0)
    return ScalarImage(data=data, m=img.m)


def normalize_bp(img: ScalarImage,
                 roi: RegionOfInterest) -> tuple[ScalarImage, np.ndarray]:
    """Scale intensities so the ROI maximum (brightest point) becomes 1.

    Returns the normalized image (m = 1) and the maximizing pixel as the
    brightest-point estimate. Warns when the maximum touches the ROI boundary
    or a saturated plateau covers a non-negligible ROI fraction.
    """
    roi.clip_check(img)
    window = img.data[roi.y0:roi.y0 + roi.height, roi.x0:roi.x0 + roi.width]
    vmax = float(window.max())
    if vmax <= 0 or vmax - float(window.min()) < 1e-12 * max(1.0, vmax):
        raise NoSpecularityError("ROI is flat: no specularity found")
    r, c = np.unravel_index(int(np.argmax(window)), window.shape)
    if r in (0, roi.height - 1) or c in (0, roi.width - 1):
        warnings.warn("brightest point lies on the ROI boundary",
                      BpOnBoundaryWarning, stacklevel=2)
    saturated = np.count_nonzero(window >= img.m) / window.size
    if saturated >= SATURATION_FRACTION:
        warnings.warn(f"{saturated:.1%} of the ROI is saturated",
                      SaturationWarning, stacklevel=2)
    bp = np.array([roi.x0 + c, roi.y0 + r], dtype=float)
    return ScalarImage(data=img.data / vmax, m=1.0), bp


# --- marching squares --------------------------------------------------------

# Segment endpoints per cell configuration, as pairs of local edge ids
# (0 = top, 1 = right, 2 = bottom, 3 = left). Corners are indexed TL, TR,
# BR, BL; the configuration is the above-level bitmask TL*8+TR*4+BR*2+BL.
_CASES: dict[int, list[tuple[int, int]]] = {
    0: [], 15: [],
    1: [(3, 2)], 14: [(3, 2)],
    2: [(2, 1)], 13: [(2, 1)],
    3: [(3, 1)], 12: [(3, 1)],
    4: [(0, 1)], 11: [(0, 1)],
    6: [(0, 2)], 9: [(0, 2)],
    7: [(0, 3)], 8: [(0, 3)],
}
# Saddles (5: TR+BL above, 10: TL+BR above) are resolved with the cell mean.
_SADDLE_CENTER_ABOVE = [(0, 3), (1, 2)]   # below-level corners isolated
_SADDLE_CENTER_BELOW = [(0, 1), (3, 2)]   # above-level corners isolated


def _cell_edge_keys(r: int, c: int) -> tuple:
    """Global keys of the four edges of cell (r, c): top, right, bottom, left."""
    return (("h", r, c), ("v", r, c + 1), ("h", r + 1, c), ("v", r, c))


def extract_isophote(img: ScalarImage, roi: RegionOfInterest,
                     t: float, min_points: int = 12) -> list[IsophotePolyline]:
    """Trace all level-t polylines of the (normalized) image inside the ROI.

    Crossings are interpolated linearly along cell edges; saddle cells are
    resolved by comparing the cell mean to t. Polylines are returned ordered
    by descending enclosed area; components shorter than min_points are
    dropped.
    """
    if t <= 0:
        raise ExtractionError("isovalue must be positive")
    # t at or above the ROI maximum simply yields no crossings (empty result)
    roi.clip_check(img)
    s = img.data[roi.y0:roi.y0 + roi.height,
                 roi.x0:roi.x0 + roi.width].astype(float) - t
    above = s > 0

    tl = above[:-1, :-1]
    tr = above[:-1, 1:]
    br = above[1:, 1:]
    bl = above[1:, :-1]
    config = (tl.astype(np.uint8) * 8 + tr.astype(np.uint8) * 4
              + br.astype(np.uint8) * 2 + bl.astype(np.uint8))
    mixed = np.argwhere((config != 0) & (config != 15))

    segments: list[tuple[tuple, tuple]] = []
    incident: dict[tuple, list[int]] = {}
    for r, c in mixed:
        cfg = int(config[r, c])
        if cfg in (5, 10):
            mean = 0.25 * (s[r, c] + s[r, c + 1] + s[r + 1, c] + s[r + 1, c + 1])
            pairs = _SADDLE_CENTER_ABOVE if mean > 0 else _SADDLE_CENTER_BELOW
        else:
            pairs = _CASES[cfg]
        keys = _cell_edge_keys(int(r), int(c))
        for ea, eb in pairs:
            sid = len(segments)
            segments.append((keys[ea], keys[eb]))
            incident.setdefault(keys[ea], []).append(sid)
            incident.setdefault(keys[eb], []).append(sid)

    def crossing(key: tuple) -> np.ndarray:
        kind, r, c = key
        if kind == "h":
            s0, s1 = s[r, c], s[r, c + 1]
            f = s0 / (s0 - s1)
            return np.array([roi.x0 + c + f, roi.y0 + r], dtype=float)
        s0, s1 = s[r, c], s[r + 1, c]
        f = s0 / (s0 - s1)
        return np.array([roi.x0 + c, roi.y0 + r + f], dtype=float)

    visited = np.zeros(len(segments), dtype=bool)

    def walk(start_key: tuple) -> tuple[list[tuple], bool]:
        chain = [start_key]
        key = start_key
        while True:
            nxt = next((sid for sid in incident[key] if not visited[sid]), None)
            if nxt is None:
                return chain, False
            visited[nxt] = True
            a, b = segments[nxt]
            key = b if a == key else a
            if key == start_key:
                return chain, True
            chain.append(key)

    polylines: list[IsophotePolyline] = []
    # open chains first (isophotes clipped by the ROI), then closed loops
    for key, sids in incident.items():
        if len(sids) == 1 and not visited[sids[0]]:
            chain, closed = walk(key)
            polylines.append(_build_polyline(chain, closed, t, crossing))
    for sid in range(len(segments)):
        if not visited[sid]:
            chain, closed = walk(segments[sid][0])
            polylines.append(_build_polyline(chain, closed, t, crossing))

    kept = []
    for poly in polylines:
        if len(poly.points) < min_points:
            log.debug("dropping short isophote component (%d points)",
                      len(poly.points))
            continue
        kept.append(poly)
    kept.sort(key=lambda p: -p.enclosed_area())
    return kept


def _build_polyline(chain: list[tuple], closed: bool, t: float,
                    crossing) -> IsophotePolyline:
    pts = np.array([crossing(k) for k in chain])
    return IsophotePolyline(points=pts, closed=closed, level=t)


def select_primary_isophote(polylines: list[IsophotePolyline],
                            bp) -> IsophotePolyline:
    """Pick the isophote to reconstruct from: the largest closed polyline
    enclosing the brightest point, falling back to the largest closed one.
    """
    if not polylines:
        raise SelectionFailedError("no isophote polylines to select from")
    closed = [p for p in polylines if p.closed]
    if not closed:
        raise SelectionFailedError("no closed isophote polyline found")
    enclosing = [p for p in closed if p.contains(bp)]
    pool = enclosing if enclosing else closed
    return max(pool, key=lambda p: p.enclosed_area())
