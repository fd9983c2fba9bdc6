"""Annotated overlay rendering for reconstruction results."""
from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw

from .geometry import Conic
from .image import ScalarImage


def conic_outline(conic: Conic, n: int = 128) -> np.ndarray:
    """Sample n points along an ellipse conic."""
    ctr, semi, angle = conic.ellipse_axes()
    phi = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    ca, sa = np.cos(angle), np.sin(angle)
    x = semi[0] * np.cos(phi)
    y = semi[1] * np.sin(phi)
    return np.column_stack([ctr[0] + ca * x - sa * y,
                            ctr[1] + sa * x + ca * y])


def draw_overlay(img: ScalarImage, results: list[dict], path) -> None:
    """Write a PNG with fitted ellipses and both normal arrows per result."""
    base = Image.fromarray(img.quantized(8), mode="L").convert("RGB")
    draw = ImageDraw.Draw(base)
    for res in results:
        x0, y0, w, h = res["roi"]
        draw.rectangle([x0, y0, x0 + w - 1, y0 + h - 1], outline=(80, 80, 255))
        if not res.get("success"):
            continue
        conic = Conic.from_coeffs(*res["conic"])
        pts = conic_outline(conic)
        draw.polygon([tuple(p) for p in pts], outline=(0, 255, 0))
        ctr, semi, _ = conic.ellipse_axes()
        arrow = 2.0 * semi[0]
        for normal, color in zip(res["normals"], [(255, 60, 60), (255, 200, 0)]):
            n = np.asarray(normal)
            tip = ctr + arrow * n[:2]
            draw.line([tuple(ctr), tuple(tip)], fill=color, width=2)
            draw.ellipse([tip[0] - 2, tip[1] - 2, tip[0] + 2, tip[1] + 2],
                         fill=color)
    base.save(path)
