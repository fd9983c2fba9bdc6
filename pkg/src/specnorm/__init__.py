"""Surface-normal reconstruction from specular isophotes under a co-located
point light and camera, with a synthetic rendering and evaluation harness."""

__version__ = "0.1.0"

from .geometry import (Conic, GeometryError, Intrinsics,
                       apply_homography_point, transform_conic)
from .specular import (CirclePair, IsoLevel, SceneConfig, circle_radii,
                       endoscopic_isocurve_eval, general_isocurve_eval,
                       isophote_circle, phong_intensity)
from .image import ScalarImage, read_image, read_pgm, write_pgm, write_png
from .simulate import (GroundTruth, SimParams, add_noise, brightest_point,
                       build_view_homography, perturb_light, render_texture,
                       warp_image)
from .extract import (IsophotePolyline, RegionOfInterest, extract_isophote,
                      gaussian_smooth, normalize_bp, select_primary_isophote)
from .reconstruct import (FitDiagnostics, NormalPair, angular_error,
                          backproject_circle, fit_ellipse, normalize_to_camera)
from .harness import (SweepSpec, TrialRecord, emit_sweep_csv,
                      reconstruct_image, run_sweep, run_trial)

__all__ = [
    "Conic", "GeometryError", "Intrinsics", "apply_homography_point",
    "transform_conic", "CirclePair", "IsoLevel", "SceneConfig",
    "circle_radii", "endoscopic_isocurve_eval", "general_isocurve_eval",
    "isophote_circle", "phong_intensity", "ScalarImage", "read_image",
    "read_pgm", "write_pgm", "write_png", "GroundTruth", "SimParams",
    "add_noise", "brightest_point", "build_view_homography", "perturb_light",
    "render_texture", "warp_image", "IsophotePolyline", "RegionOfInterest",
    "extract_isophote", "gaussian_smooth", "normalize_bp",
    "select_primary_isophote", "FitDiagnostics", "NormalPair",
    "angular_error", "backproject_circle", "fit_ellipse",
    "normalize_to_camera", "SweepSpec", "TrialRecord", "emit_sweep_csv",
    "reconstruct_image", "run_sweep", "run_trial",
]
