import numpy as np
import pytest

from specnorm.extract import RegionOfInterest, extract_isophote, \
    normalize_bp, select_primary_isophote
from specnorm.simulate import SimParams, build_view_homography, \
    render_texture, warp_image


@pytest.fixture(scope="session")
def noiseless_params():
    return SimParams(noise_sigma=0.0)


@pytest.fixture(scope="session")
def noiseless_pipeline(noiseless_params):
    """Shared noiseless default scene: warped image, ground truth and the
    extracted primary isophote."""
    p = noiseless_params
    texture = render_texture(p)
    H, gt = build_view_homography(p)
    img = warp_image(texture, H, (p.size, p.size))
    roi = RegionOfInterest.full(img)
    normalized, bp = normalize_bp(img, roi)
    polylines = extract_isophote(normalized, roi, p.isovalue)
    primary = select_primary_isophote(polylines, bp)
    return {"params": p, "texture": texture, "H": H, "gt": gt, "image": img,
            "normalized": normalized, "bp": bp, "polylines": polylines,
            "primary": primary}


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
