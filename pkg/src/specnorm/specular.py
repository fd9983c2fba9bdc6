"""Analytic forward model of specular reflection on a plane.

Cosine-power (Phong) specular intensity, the quartic iso-intensity curves it
induces on the scene plane, and their specialization to the co-located
light/camera ("endoscopic") setup where they factor into concentric circles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class SpecularModelError(ValueError):
    pass


class DegenerateGeometryError(SpecularModelError):
    """Evaluation point coincides with the viewpoint or its mirror image."""


class EmptyIsophoteError(SpecularModelError):
    """Requested intensity level above the attainable maximum."""


@dataclass(frozen=True)
class SceneConfig:
    """Viewpoint, light position and material parameters of the forward model.

    view: camera center V, with V_z > 0 (scene plane is z = 0).
    light: point light position L; the endoscopic setup has L = V.
    roughness: specular exponent n > 0.
    scale: combined albedo / light intensity / camera response factor c > 0.
    """

    view: np.ndarray
    light: np.ndarray
    roughness: float
    scale: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "view", np.asarray(self.view, dtype=float))
        object.__setattr__(self, "light", np.asarray(self.light, dtype=float))
        if not np.all(np.isfinite(self.view)) or not np.all(np.isfinite(self.light)):
            raise SpecularModelError("non-finite viewpoint or light position")
        if self.view[2] <= 0:
            raise SpecularModelError("viewpoint must be above the scene plane (V_z > 0)")
        if self.roughness <= 0:
            raise SpecularModelError("roughness exponent must be positive")
        if self.scale <= 0:
            raise SpecularModelError("intensity scale must be positive")

    @property
    def mirror_light(self) -> np.ndarray:
        """Light position reflected in the scene plane: (L_x, L_y, -L_z)."""
        L = self.light
        return np.array([L[0], L[1], -L[2]])

    @property
    def is_colocated(self) -> bool:
        return bool(np.array_equal(self.view, self.light))


@dataclass(frozen=True)
class IsoLevel:
    """An intensity level t with its equivalent parameterizations.

    tau = (t/c)^(1/n) and kappa = 1 - tau^2 are kept consistent with t on
    construction; the model formulas switch freely between the three.
    """

    t: float
    tau: float
    kappa: float

    @classmethod
    def from_intensity(cls, t: float, scale: float, roughness: float) -> "IsoLevel":
        if t <= 0:
            raise SpecularModelError("intensity level must be positive")
        if t > scale:
            raise EmptyIsophoteError("intensity level exceeds the maximum c")
        tau = (t / scale) ** (1.0 / roughness)
        return cls(t=float(t), tau=float(tau), kappa=float(1.0 - tau * tau))

    @classmethod
    def from_kappa(cls, kappa: float, scale: float, roughness: float) -> "IsoLevel":
        if not 0.0 <= kappa < 1.0:
            raise SpecularModelError("kappa must lie in [0, 1)")
        tau = math.sqrt(1.0 - kappa)
        return cls(t=float(scale * tau ** roughness), tau=float(tau), kappa=float(kappa))


@dataclass(frozen=True)
class CirclePair:
    """The two concentric scene-plane circles of the co-located isocurve."""

    center: np.ndarray
    r_minus: float
    r_plus: float
    #: True on the kappa = 1 boundary where the two circles coincide.
    degenerate: bool = False


def phong_intensity(p, cfg: SceneConfig):
    """Specular intensity c * max(0, cos(beta))^n at scene-plane point(s) p.

    beta is the angle between the viewing direction and the perfect-reflection
    direction at P = (p_x, p_y, 0). Accepts a single (2,) point or an (...,2)
    array; returns a scalar or an array accordingly.
    """
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    pts = np.atleast_2d(p)
    P = np.concatenate([pts, np.zeros(pts.shape[:-1] + (1,))], axis=-1)
    VP = cfg.view - P
    RP = cfg.mirror_light - P
    nv = np.linalg.norm(VP, axis=-1)
    nr = np.linalg.norm(RP, axis=-1)
    if np.any(nv == 0) or np.any(nr == 0):
        raise DegenerateGeometryError("evaluation point coincides with V or its mirror")
    # viewing direction mu(V-P) against perfect-reflection direction -mu(R-P)
    cos_beta = -np.sum(VP * RP, axis=-1) / (nv * nr)
    val = cfg.scale * np.clip(cos_beta, 0.0, None) ** cfg.roughness
    return float(val[0]) if single else val.reshape(p.shape[:-1])


def general_isocurve_eval(p, cfg: SceneConfig, level: IsoLevel):
    """Quartic isocurve residual ((R-P)^T(V-P))^2 - tau^2 ||R-P||^2 ||V-P||^2.

    Zero on the iso-intensity curve of level t for arbitrary light position.
    """
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    pts = np.atleast_2d(p)
    P = np.concatenate([pts, np.zeros(pts.shape[:-1] + (1,))], axis=-1)
    VP = cfg.view - P
    RP = cfg.mirror_light - P
    dot = np.sum(RP * VP, axis=-1)
    val = dot ** 2 - level.tau ** 2 * np.sum(RP * RP, axis=-1) * np.sum(VP * VP, axis=-1)
    return float(val[0]) if single else val.reshape(p.shape[:-1])


def endoscopic_isocurve_eval(p, view: np.ndarray, kappa: float):
    """Quartic isocurve residual for the co-located (L = V) setup.

    kappa * d^4 + 2 V_z^2 (kappa - 2) d^2 + kappa V_z^4  with
    d^2 = (x - V_x)^2 + (y - V_y)^2.
    """
    view = np.asarray(view, dtype=float)
    p = np.asarray(p, dtype=float)
    vz2 = view[2] ** 2
    d2 = (p[..., 0] - view[0]) ** 2 + (p[..., 1] - view[1]) ** 2
    val = kappa * d2 ** 2 + 2.0 * vz2 * (kappa - 2.0) * d2 + kappa * vz2 ** 2
    return float(val) if np.isscalar(d2) or d2.ndim == 0 else val


def circle_radii(kappa: float, v_z: float, center=(0.0, 0.0)) -> CirclePair:
    """Radii of the two concentric circles the co-located isocurve factors into.

    r_pm = |V_z| * sqrt(g +- sqrt(g^2 - 1)) with g = (2 - kappa) / kappa.
    Requires 0 < kappa < 1; kappa = 1 is the boundary where both circles
    collapse onto the ring of radius |V_z| and is returned tagged degenerate.
    """
    if v_z == 0:
        raise SpecularModelError("V_z must be nonzero")
    if kappa <= 0 or kappa > 1:
        raise SpecularModelError("kappa must lie in (0, 1]")
    az = abs(v_z)
    ctr = np.asarray(center, dtype=float)
    if kappa == 1.0:
        return CirclePair(center=ctr, r_minus=az, r_plus=az, degenerate=True)
    g = (2.0 - kappa) / kappa
    s = math.sqrt(g * g - 1.0)
    return CirclePair(center=ctr,
                      r_minus=az * math.sqrt(g - s),
                      r_plus=az * math.sqrt(g + s))


def isophote_circle(level: IsoLevel, view: np.ndarray) -> tuple[np.ndarray, float]:
    """Scene-plane circle traced by the observable isophote at the given level.

    Of the two isocurve circles only the inner one (radius r_minus) carries
    image intensity t; returns (center, radius).
    """
    view = np.asarray(view, dtype=float)
    if level.t <= 0:
        raise SpecularModelError("intensity level must be positive")
    if level.kappa <= 0:
        raise EmptyIsophoteError("level at or above the maximum: isophote is empty")
    pair = circle_radii(level.kappa, view[2], center=view[:2])
    return pair.center, pair.r_minus
