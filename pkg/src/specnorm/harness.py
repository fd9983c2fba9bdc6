"""End-to-end trials, Monte-Carlo parameter sweeps and result persistence."""
from __future__ import annotations

import csv
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .extract import (DEFAULT_BLUR_SIGMA, ExtractionError, RegionOfInterest,
                      extract_isophote, gaussian_smooth, normalize_bp,
                      select_primary_isophote)
from .geometry import GeometryError, Intrinsics
from .image import ImageIOError, ScalarImage, read_image
from .reconstruct import (FitDiagnostics, ReconstructionError, angular_error,
                          backproject_circle, fit_ellipse, normalize_to_camera,
                          sampson_distance)
from .simulate import (SimParams, SimulationError, add_noise,
                       brightest_point, build_view_homography, perturb_light,
                       render_texture, warp_image)
from .specular import SpecularModelError

#: Swept-parameter names accepted by SweepSpec.
SWEEP_PARAMS = ("sigma", "theta", "roughness", "isovalue", "epsilon")

#: Default sweep grids; endpoints and defaults of each parameter's range of
#: interest. theta values are in degrees, sigma as a fraction of the
#: intensity range, epsilon in mm.
DEFAULT_GRIDS: dict[str, list[float]] = {
    "sigma": [0.0, 0.025, 0.05, 0.075, 0.10],
    "theta": [0.0, 15.0, 30.0, 45.0, 58.0, 70.0, 80.0],
    "roughness": [30.0, 60.0, 90.0, 120.0],
    "isovalue": [0.02, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8],
    "epsilon": [0.0, 100.0, 200.0, 400.0, 800.0],
}

_PIPELINE_ERRORS = (ExtractionError, ReconstructionError, SimulationError,
                    SpecularModelError, GeometryError)

#: Noise-adaptive smoothing for synthetic trials: blur grows with the known
#: noise level, capped where smoothing bias starts to dominate. A constant
#: blur cannot both keep the noiseless error at machine-geometry level and
#: suppress 10% noise.
BLUR_PER_NOISE = 60.0
MAX_BLUR = 3.0


def adaptive_blur(noise_sigma: float) -> float:
    return min(BLUR_PER_NOISE * noise_sigma, MAX_BLUR)


class HarnessError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple[float, ...]
    trials: int
    base: SimParams = field(default_factory=SimParams)
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.param not in SWEEP_PARAMS:
            raise HarnessError(f"unknown sweep parameter {self.param!r}")
        if self.trials < 1:
            raise HarnessError("trials must be >= 1")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass
class TrialRecord:
    param: str
    value: float
    trial: int
    success: bool
    error_deg: float | None = None
    reason: str | None = None
    diagnostics: FitDiagnostics | None = None
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class SweepSummary:
    value: float
    mean: float
    std: float
    min: float
    max: float
    n_fail: int


def apply_sweep_value(base: SimParams, param: str, value: float) -> SimParams:
    """Set one swept parameter on the base configuration.

    theta is given in degrees; the co-location sweep additionally pins the
    roughness to 100 so model-imperfection errors dominate.
    """
    if param == "sigma":
        return base.replace(noise_sigma=value)
    if param == "theta":
        return base.replace(slant=np.radians(value))
    if param == "roughness":
        return base.replace(roughness=value)
    if param == "isovalue":
        return base.replace(isovalue=value)
    if param == "epsilon":
        return base.replace(light_offset=value, roughness=100.0)
    raise HarnessError(f"unknown sweep parameter {param!r}")


def trial_seed(master_seed: int, value: float, trial: int) -> np.random.SeedSequence:
    """Substream seed keyed on the swept value itself (not its grid index),
    so permuting the value list permutes rows without changing them."""
    bits = int(np.float64(value).view(np.uint64))
    return np.random.SeedSequence([int(master_seed), bits, int(trial)])


def run_trial(params: SimParams, seed, score_mode: str = "min",
              blur_sigma: float | None = None,
              param: str = "", value: float = float("nan"),
              trial: int = 0) -> TrialRecord:
    """One end-to-end trial: simulate, extract, reconstruct, score.

    blur_sigma defaults to the noise-adaptive schedule. Any stage failure is
    captured in the returned record, never raised.
    """
    if blur_sigma is None:
        blur_sigma = adaptive_blur(params.noise_sigma)
    rng = np.random.default_rng(seed)
    record = TrialRecord(param=param, value=value, trial=trial, success=False)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            light = perturb_light(params.view, params.light_offset, rng)
            bp_scene = brightest_point(params.view, light)
            texture = render_texture(params, light, bp_scene)
            H, gt = build_view_homography(params, bp_scene)
            img = warp_image(texture, H, (params.size, params.size))
            img = add_noise(img, params.noise_sigma, rng)
            img = gaussian_smooth(img, blur_sigma)
            roi = RegionOfInterest.full(img)
            normalized, bp = normalize_bp(img, roi)
            polylines = extract_isophote(normalized, roi, params.isovalue)
            if not polylines:
                raise ExtractionError("empty isophote")
            primary = select_primary_isophote(polylines, bp)
            conic, diagnostics = fit_ellipse(primary.points)
            cam_conic = normalize_to_camera(conic, gt.intrinsics)
            pair = backproject_circle(cam_conic)
            record.error_deg = angular_error(pair, gt.normal, mode=score_mode)
            record.diagnostics = diagnostics
            record.success = True
        except _PIPELINE_ERRORS as exc:
            msg = str(exc)
            record.reason = msg if msg == "empty isophote" else \
                f"{type(exc).__name__}: {msg}"
    record.warnings = tuple(str(w.message) for w in caught)
    return record


def _sweep_trial(args) -> TrialRecord:
    params, entropy, score_mode, blur_sigma, param, value, trial = args
    seed = np.random.SeedSequence(entropy)
    return run_trial(params, seed, score_mode=score_mode,
                     blur_sigma=blur_sigma, param=param, value=value,
                     trial=trial)


def run_sweep(spec: SweepSpec, score_mode: str = "min",
              blur_sigma: float | None = None,
              workers: int = 1) -> tuple[list[TrialRecord], list[SweepSummary]]:
    """Run `trials` independent trials per swept value.

    Each trial uses its own reproducible substream; trials are independent
    and can run in a worker pool.
    """
    jobs = []
    for value in spec.values:
        params = apply_sweep_value(spec.base, spec.param, value)
        for trial in range(spec.trials):
            entropy = trial_seed(spec.master_seed, value, trial).entropy
            jobs.append((params, entropy, score_mode, blur_sigma,
                         spec.param, value, trial))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_sweep_trial, jobs, chunksize=8))
    else:
        records = [_sweep_trial(job) for job in jobs]
    return records, summarize(records, spec.values)


def summarize(records: list[TrialRecord],
              values: tuple[float, ...] | None = None) -> list[SweepSummary]:
    """Per-value mean/std/min/max of the angular error plus failure count."""
    if values is None:
        seen: list[float] = []
        for r in records:
            if r.value not in seen:
                seen.append(r.value)
        values = tuple(seen)
    out = []
    for value in values:
        errs = [r.error_deg for r in records if r.value == value and r.success]
        n_fail = sum(1 for r in records if r.value == value and not r.success)
        if errs:
            arr = np.array(errs)
            out.append(SweepSummary(value=value, mean=float(arr.mean()),
                                    std=float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
                                    min=float(arr.min()), max=float(arr.max()),
                                    n_fail=n_fail))
        else:
            out.append(SweepSummary(value=value, mean=float("nan"),
                                    std=float("nan"), min=float("nan"),
                                    max=float("nan"), n_fail=n_fail))
    return out


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def emit_sweep_csv(records: list[TrialRecord], path) -> Path:
    """Write per-trial rows plus a companion per-value summary CSV.

    Returns the summary path. Output is deterministic: fixed column order,
    LF line endings, '.' decimal separator, 9 significant digits.
    """
    if not records:
        raise HarnessError("no records to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["swept_param", "value", "trial", "error_deg",
                        "success", "reason"])
        for r in records:
            writer.writerow([r.param, _fmt(r.value), r.trial,
                             _fmt(r.error_deg) if r.success else "",
                             "true" if r.success else "false",
                             r.reason or ""])
    summary_path = path.with_name(path.stem + ".summary.csv")
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["value", "mean", "std", "min", "max", "n_fail"])
        for s in summarize(records):
            writer.writerow([_fmt(s.value), _fmt(s.mean), _fmt(s.std),
                             _fmt(s.min), _fmt(s.max), s.n_fail])
    return summary_path


# --- reconstruction of on-disk images ---------------------------------------

def load_intrinsics(path) -> Intrinsics:
    """Read intrinsics from JSON: either {fx,fy,cx,cy} or {"intrinsics": ...}."""
    d = json.loads(Path(path).read_text())
    if "intrinsics" in d:
        d = d["intrinsics"]
    try:
        return Intrinsics(fx=d["fx"], fy=d["fy"], cx=d["cx"], cy=d["cy"])
    except KeyError as exc:
        raise ImageIOError(f"{path}: missing intrinsics field {exc}") from exc


def reconstruct_in_image(img: ScalarImage, K: Intrinsics,
                         roi: RegionOfInterest, t: float,
                         blur_sigma: float = DEFAULT_BLUR_SIGMA) -> dict:
    """Reconstruct the normal pair for one specularity ROI of an image.

    Returns a JSON-ready result record; failures are reported in the record
    rather than raised.
    """
    result: dict = {"roi": [roi.x0, roi.y0, roi.width, roi.height],
                    "level": t, "success": False}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            smoothed = gaussian_smooth(img, blur_sigma)
            normalized, bp = normalize_bp(smoothed, roi)
            polylines = extract_isophote(normalized, roi, t)
            if not polylines:
                result["error"] = "no-specularity: empty isophote"
                return result
            primary = select_primary_isophote(polylines, bp)
            conic, diagnostics = fit_ellipse(primary.points)
            cam_conic = normalize_to_camera(conic, K)
            pair = backproject_circle(cam_conic)
            result.update({
                "success": True,
                "bp": bp.tolist(),
                "conic": list(conic.coeffs),
                "normals": [pair.n_plus.tolist(), pair.n_minus.tolist()],
                "intrinsics": {"fx": K.fx, "fy": K.fy, "cx": K.cx, "cy": K.cy},
                "diagnostics": {
                    "rms_residual": diagnostics.rms_residual,
                    "rms_point_distance": float(np.sqrt(np.mean(
                        sampson_distance(conic, primary.points) ** 2))),
                    "n_points": diagnostics.n_points,
                    "eccentricity": diagnostics.eccentricity,
                    "condition": diagnostics.condition,
                },
            })
        except _PIPELINE_ERRORS as exc:
            result["error"] = f"{type(exc).__name__}: {exc}"
    result["warnings"] = [str(w.message) for w in caught]
    return result


def reconstruct_image(image_path, intrinsics_path,
                      rois: list[RegionOfInterest], t: float,
                      blur_sigma: float = DEFAULT_BLUR_SIGMA) -> list[dict]:
    """Run reconstruction on each ROI of an on-disk image independently."""
    img = read_image(image_path)
    K = load_intrinsics(intrinsics_path)
    results = []
    for roi in rois:
        try:
            roi.clip_check(img)
        except ExtractionError as exc:
            results.append({"roi": [roi.x0, roi.y0, roi.width, roi.height],
                            "level": t, "success": False,
                            "error": f"ExtractionError: {exc}",
                            "warnings": []})
            continue
        results.append(reconstruct_in_image(img, K, roi, t, blur_sigma))
    return results
