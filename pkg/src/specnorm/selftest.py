"""Quick analytic invariant suite runnable from the CLI.

Checks the algebraic identities of the forward model and the backprojection
round trip without any image processing; a fast sanity check for installs.
"""
from __future__ import annotations

import math

import numpy as np

from .geometry import Intrinsics
from .reconstruct import angle_between, backproject_circle, fit_ellipse, \
    normalize_to_camera
from .specular import IsoLevel, SceneConfig, circle_radii, \
    endoscopic_isocurve_eval, general_isocurve_eval


def _check(name: str, ok: bool) -> bool:
    print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return ok


def run_selftest(fast: bool = False) -> int:
    rng = np.random.default_rng(12345)
    n_cfg = 100 if fast else 1000
    ok = True

    # concentric-circle identity: isocurve vanishes at both radii and the
    # radii product equals the squared camera height
    worst_root, worst_prod = 0.0, 0.0
    for _ in range(n_cfg):
        kappa = rng.uniform(0.01, 0.99)
        vz = rng.uniform(10.0, 5000.0)
        pair = circle_radii(kappa, vz)
        view = np.array([0.0, 0.0, vz])
        for r in (pair.r_minus, pair.r_plus):
            phi = rng.uniform(0, 2 * math.pi)
            p = r * np.array([math.cos(phi), math.sin(phi)])
            worst_root = max(worst_root,
                             abs(endoscopic_isocurve_eval(p, view, kappa))
                             / (kappa * vz ** 4))
        worst_prod = max(worst_prod,
                         abs(pair.r_minus * pair.r_plus - vz ** 2) / vz ** 2)
    ok &= _check(f"circle identity (worst root residual {worst_root:.2e})",
                 worst_root < 1e-9)
    ok &= _check(f"radii product (worst rel err {worst_prod:.2e})",
                 worst_prod < 1e-9)

    # co-located specialization of the general quartic
    worst = 0.0
    for _ in range(20):
        vz = rng.uniform(100.0, 2000.0)
        view = np.array([rng.normal(0, 100), rng.normal(0, 100), vz])
        n = rng.uniform(10, 120)
        cfg = SceneConfig(view=view, light=view, roughness=n)
        level = IsoLevel.from_kappa(rng.uniform(0.05, 0.95), 1.0, n)
        pts = rng.normal(0, 2 * vz, size=(n_cfg, 2))
        q = general_isocurve_eval(pts, cfg, level)
        e = endoscopic_isocurve_eval(pts, view, level.kappa)
        worst = max(worst, float(np.max(np.abs(q - e) / np.maximum(np.abs(e), 1.0))))
    ok &= _check(f"quartic specialization (worst rel err {worst:.2e})",
                 worst < 1e-9)

    # backprojection round trip on exact projected circles
    K = Intrinsics(fx=406, fy=406, cx=203, cy=203)
    worst_angle = 0.0
    for _ in range(100 if fast else 1000):
        slant = rng.uniform(0, math.radians(80))
        azimuth = rng.uniform(0, 2 * math.pi)
        normal = np.array([math.sin(slant) * math.cos(azimuth),
                           math.sin(slant) * math.sin(azimuth),
                           math.cos(slant)])
        u = np.cross(normal, [0.0, 0.0, 1.0])
        u = u / np.linalg.norm(u) if np.linalg.norm(u) > 1e-12 else np.array([1.0, 0.0, 0.0])
        w = np.cross(normal, u)
        center = np.array([rng.normal(0, 50), rng.normal(0, 50),
                           rng.uniform(500, 2000)])
        radius = rng.uniform(20, 200)
        phi = np.linspace(0, 2 * math.pi, 40, endpoint=False)
        circle = center + radius * (np.outer(np.cos(phi), u) + np.outer(np.sin(phi), w))
        pix = (circle[:, :2] / circle[:, 2:]) * [K.fx, K.fy] + [K.cx, K.cy]
        conic, _ = fit_ellipse(pix)
        pair = backproject_circle(normalize_to_camera(conic, K))
        err = min(angle_between(pair.n_plus, normal),
                  angle_between(pair.n_minus, normal))
        worst_angle = max(worst_angle, err)
    ok &= _check(f"backprojection round trip (worst {worst_angle:.2e} rad)",
                 worst_angle < 1e-6)

    print("selftest:", "PASS" if ok else "FAIL")
    return 0 if ok else 1
