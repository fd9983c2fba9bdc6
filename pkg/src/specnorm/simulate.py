"""Synthetic image generation: plane texture rendering, perspective warp,
light-offset perturbation and Gaussian noise.

World units are mm; the scene plane is z = 0 and the camera sits at
(0, 0, camera_height) so the brightest point of the co-located specularity
falls at the texture center.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .geometry import Intrinsics, check_homography
from .image import ScalarImage, bilinear_sample
from .specular import IsoLevel, SceneConfig, circle_radii, phong_intensity

#: Reference isovalue fixing the physical extent of the texture window.
WINDOW_REFERENCE_ISOVALUE = 0.1
#: Texture window side length, in units of the reference isophote radius.
WINDOW_RADII = 4.0


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class SimParams:
    """Parameters of one synthetic trial (defaults reproduce the benchmark)."""

    size: int = 406                      # texture / image side, pixels
    camera_height: float = 1000.0        # camera-to-plane distance, mm
    roughness: float = 50.0              # specular exponent
    slant: float = math.radians(58.0)    # plane-normal-to-axis angle, radians
    noise_sigma: float = 0.05            # noise std as a fraction of m
    light_offset: float = 0.0            # light/camera co-location error, mm
    isovalue: float = 0.1                # extraction level on [0,1] intensities
    seed: int = 0

    def __post_init__(self) -> None:
        if self.size < 32:
            raise SimulationError("image size must be at least 32 px")
        if self.camera_height <= 0:
            raise SimulationError("camera height must be positive")
        if not 0 <= self.slant < math.pi / 2:
            raise SimulationError("slant must lie in [0, pi/2)")
        if self.noise_sigma < 0 or self.light_offset < 0:
            raise SimulationError("noise and light offset must be nonnegative")
        # isovalue >= 1 is accepted here so the harness can report an empty
        # isophote as a failed trial rather than a constructor error
        if self.isovalue <= 0:
            raise SimulationError("isovalue must be positive")

    @property
    def view(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.camera_height])

    def intrinsics(self) -> Intrinsics:
        return Intrinsics(fx=float(self.size), fy=float(self.size),
                          cx=self.size / 2.0, cy=self.size / 2.0)

    def replace(self, **kwargs) -> "SimParams":
        d = asdict(self)
        d.update(kwargs)
        return SimParams(**d)


@dataclass(frozen=True)
class GroundTruth:
    """Reference quantities recorded for error computation."""

    normal: np.ndarray          # plane normal in the camera frame, unit, z > 0
    homography: np.ndarray      # texture pixels -> image pixels
    intrinsics: Intrinsics
    bp_image: np.ndarray        # brightest point in image pixels


def perturb_light(view: np.ndarray, epsilon: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Offset light: L = V + eps * (cos a, sin a, b), a ~ U[0,2pi), b ~ U[-.5,.5]."""
    view = np.asarray(view, dtype=float)
    if epsilon < 0:
        raise SimulationError("light offset must be nonnegative")
    if epsilon == 0:
        return view.copy()
    alpha = rng.uniform(0.0, 2.0 * math.pi)
    beta = rng.uniform(-0.5, 0.5)
    return view + epsilon * np.array([math.cos(alpha), math.sin(alpha), beta])


def brightest_point(view: np.ndarray, light: np.ndarray) -> np.ndarray:
    """Scene-plane point of perfect reflection (intensity maximum).

    Intersection of the line joining V and the mirrored light with z = 0.
    """
    view = np.asarray(view, dtype=float)
    light = np.asarray(light, dtype=float)
    denom = view[2] + light[2]
    if denom <= 0:
        raise SimulationError("light must stay above the mirrored camera plane")
    s = view[2] / denom
    return view[:2] + s * (light[:2] - view[:2])


def texture_window(params: SimParams) -> float:
    """Physical side length (mm) of the square texture window.

    Sized to a fixed multiple of the reference isophote radius so the default
    isophote always fits with margin.
    """
    level = IsoLevel.from_intensity(WINDOW_REFERENCE_ISOVALUE, 1.0, params.roughness)
    pair = circle_radii(level.kappa, params.camera_height)
    return WINDOW_RADII * pair.r_minus


def texture_to_scene_matrix(params: SimParams, bp_scene=(0.0, 0.0)) -> np.ndarray:
    """Affine map from texture pixel (u, v) to scene-plane mm, window at bp."""
    s = texture_window(params) / params.size
    half = params.size / 2.0
    return np.array([[s, 0.0, bp_scene[0] - s * half],
                     [0.0, s, bp_scene[1] - s * half],
                     [0.0, 0.0, 1.0]])


def render_texture(params: SimParams, light: np.ndarray | None = None,
                   bp_scene=(0.0, 0.0)) -> ScalarImage:
    """Render the scene-plane specular texture as a size x size image.

    Pixel (u, v) holds the specular intensity at the corresponding scene point,
    scaled so the analytic maximum maps to m = 255. The window is centered at
    bp_scene (the brightest point, origin for a co-located light).
    """
    light = params.view if light is None else np.asarray(light, dtype=float)
    cfg = SceneConfig(view=params.view, light=light, roughness=params.roughness)
    A = texture_to_scene_matrix(params, bp_scene)
    u = np.arange(params.size)
    xx = A[0, 0] * u + A[0, 2]
    yy = A[1, 1] * u + A[1, 2]
    X, Y = np.meshgrid(xx, yy)            # row v -> y, column u -> x
    pts = np.stack([X, Y], axis=-1)
    img = 255.0 * phong_intensity(pts, cfg) / cfg.scale
    return ScalarImage(data=img, m=255.0)


def build_view_homography(params: SimParams,
                          bp_scene=(0.0, 0.0)) -> tuple[np.ndarray, GroundTruth]:
    """Homography from texture pixels to image pixels for a slanted view.

    The plane is rotated about the camera-frame x-axis by the slant angle and
    placed so the scene origin sits at the camera height along the optical
    axis. Returns the homography and the ground truth it implies.
    """
    th = params.slant
    # plane-to-camera pose: P_cam = R (x, y, 0)^T + t
    r1 = np.array([1.0, 0.0, 0.0])
    r2 = np.array([0.0, math.cos(th), math.sin(th)])
    r3 = np.array([0.0, -math.sin(th), math.cos(th)])
    t = np.array([0.0, 0.0, params.camera_height])
    K = params.intrinsics()
    P = K.matrix() @ np.column_stack([r1, r2, t])
    H = P @ texture_to_scene_matrix(params, bp_scene)
    bp_cam = (np.column_stack([r1, r2, r3])
              @ np.array([bp_scene[0], bp_scene[1], 0.0]) + t)
    bp_h = K.matrix() @ bp_cam
    gt = GroundTruth(normal=r3, homography=H, intrinsics=K,
                     bp_image=bp_h[:2] / bp_h[2])
    return H, gt


def warp_image(src: ScalarImage, H: np.ndarray,
               out_size: tuple[int, int]) -> ScalarImage:
    """Inverse-warp src through H (src pixels -> dst pixels), bilinear, 0-fill."""
    H = check_homography(H)
    Hinv = np.linalg.inv(H)
    w, h = out_size
    xs, ys = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
    denom = Hinv[2, 0] * xs + Hinv[2, 1] * ys + Hinv[2, 2]
    sx = (Hinv[0, 0] * xs + Hinv[0, 1] * ys + Hinv[0, 2]) / denom
    sy = (Hinv[1, 0] * xs + Hinv[1, 1] * ys + Hinv[1, 2]) / denom
    data = bilinear_sample(src.data, sx, sy, fill=0.0)
    return ScalarImage(data=data, m=src.m)


def add_noise(img: ScalarImage, sigma: float,
              rng: np.random.Generator) -> ScalarImage:
    """Add i.i.d. Gaussian noise with std sigma * m, clamped to [0, m]."""
    if sigma < 0:
        raise SimulationError("noise sigma must be nonnegative")
    if sigma == 0:
        return ScalarImage(data=img.data.copy(), m=img.m)
    noisy = img.data + rng.normal(0.0, sigma * img.m, size=img.data.shape)
    return ScalarImage(data=np.clip(noisy, 0.0, img.m), m=img.m)


# --- JSON sidecars -----------------------------------------------------------

def params_to_dict(params: SimParams) -> dict:
    return asdict(params)


def params_from_dict(d: dict) -> SimParams:
    return SimParams(**d)


def ground_truth_to_dict(gt: GroundTruth) -> dict:
    return {
        "normal": list(gt.normal),
        "homography": [list(row) for row in gt.homography],
        "intrinsics": {"fx": gt.intrinsics.fx, "fy": gt.intrinsics.fy,
                       "cx": gt.intrinsics.cx, "cy": gt.intrinsics.cy},
        "bp_image": list(gt.bp_image),
    }


def ground_truth_from_dict(d: dict) -> GroundTruth:
    return GroundTruth(normal=np.array(d["normal"], dtype=float),
                       homography=np.array(d["homography"], dtype=float),
                       intrinsics=Intrinsics(**d["intrinsics"]),
                       bp_image=np.array(d["bp_image"], dtype=float))


def write_sidecars(directory, stem: str, params: SimParams, gt: GroundTruth) -> None:
    directory = Path(directory)
    (directory / f"{stem}.params.json").write_text(
        json.dumps(params_to_dict(params), indent=2) + "\n")
    (directory / f"{stem}.gt.json").write_text(
        json.dumps(ground_truth_to_dict(gt), indent=2) + "\n")
