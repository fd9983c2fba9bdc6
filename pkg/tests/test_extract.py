import numpy as np
import pytest

from specnorm.extract import (BpOnBoundaryWarning, ExtractionError,
                              IsophotePolyline, NoSpecularityError,
                              RegionOfInterest, SaturationWarning,
                              SelectionFailedError, extract_isophote,
                              gaussian_smooth, normalize_bp,
                              select_primary_isophote)
from specnorm.image import ScalarImage


def radial_bump(size=64, sigma=12.0, peak=200.0, center=None):
    """Gaussian intensity bump; its level sets are exact circles."""
    cx, cy = center if center else (size / 2, size / 2)
    ys, xs = np.mgrid[0:size, 0:size]
    r2 = (xs - cx) ** 2 + (ys - cy) ** 2
    return ScalarImage(peak * np.exp(-r2 / (2 * sigma ** 2)))


class TestRegionOfInterest:
    def test_minimum_size(self):
        with pytest.raises(ExtractionError):
            RegionOfInterest(0, 0, 15, 20)
        with pytest.raises(ExtractionError):
            RegionOfInterest(-1, 0, 20, 20)

    def test_clip_check(self):
        img = ScalarImage(np.zeros((32, 32)))
        RegionOfInterest(0, 0, 32, 32).clip_check(img)
        with pytest.raises(ExtractionError):
            RegionOfInterest(10, 10, 32, 32).clip_check(img)

    def test_full(self):
        img = ScalarImage(np.zeros((20, 30)))
        roi = RegionOfInterest.full(img)
        assert (roi.x0, roi.y0, roi.width, roi.height) == (0, 0, 30, 20)


class TestGaussianSmooth:
    def test_zero_sigma_is_copy(self):
        img = radial_bump()
        out = gaussian_smooth(img, 0.0)
        assert np.array_equal(out.data, img.data)
        assert out.data is not img.data

    def test_preserves_constant(self):
        img = ScalarImage(np.full((40, 40), 37.0))
        out = gaussian_smooth(img, 2.5)
        assert np.allclose(out.data, 37.0)

    def test_reduces_noise_variance(self):
        rng = np.random.default_rng(0)
        img = ScalarImage(np.clip(128 + rng.normal(0, 12, (200, 200)), 0, 255))
        out = gaussian_smooth(img, 2.0)
        assert out.data.std() < 0.5 * img.data.std()

    def test_negative_sigma_rejected(self):
        with pytest.raises(ExtractionError):
            gaussian_smooth(radial_bump(), -1.0)


class TestNormalizeBp:
    def test_peak_found_and_scaled(self):
        img = radial_bump(center=(30.0, 20.0))
        normalized, bp = normalize_bp(img, RegionOfInterest.full(img))
        assert normalized.data.max() == pytest.approx(1.0)
        assert normalized.m == 1.0
        assert np.allclose(bp, [30.0, 20.0])

    def test_roi_offset_coordinates(self):
        img = radial_bump(size=96, center=(70.0, 60.0))
        roi = RegionOfInterest(48, 40, 48, 48)
        _, bp = normalize_bp(img, roi)
        assert np.allclose(bp, [70.0, 60.0])

    def test_flat_roi_rejected(self):
        img = ScalarImage(np.full((32, 32), 5.0))
        with pytest.raises(NoSpecularityError):
            normalize_bp(img, RegionOfInterest.full(img))

    def test_boundary_warning(self):
        img = radial_bump(size=64, center=(63.0, 30.0))
        with pytest.warns(BpOnBoundaryWarning):
            normalize_bp(img, RegionOfInterest.full(img))

    def test_saturation_warning(self):
        img = radial_bump(peak=200.0)
        img.data[20:28, 20:28] = 255.0
        with pytest.warns(SaturationWarning):
            normalize_bp(img, RegionOfInterest.full(img))


class TestExtractIsophote:
    def test_circle_level_set_radius(self):
        # oracle: Gaussian bump level set at t is a circle with radius
        # sigma * sqrt(-2 ln t)
        sigma = 12.0
        img = radial_bump(size=96, sigma=sigma, peak=1.0, center=(48.0, 48.0))
        img = ScalarImage(img.data, m=1.0)
        t = 0.3
        polys = extract_isophote(img, RegionOfInterest.full(img), t)
        assert len(polys) == 1
        poly = polys[0]
        assert poly.closed
        r = np.hypot(poly.points[:, 0] - 48.0, poly.points[:, 1] - 48.0)
        expected = sigma * np.sqrt(-2 * np.log(t))
        assert np.abs(r - expected).max() < 0.05

    def test_points_interpolate_to_level(self):
        # every traced vertex lies on a cell edge where the linear
        # interpolation hits t exactly; re-check via bilinear sampling
        from specnorm.image import bilinear_sample
        img = radial_bump(size=64, peak=1.0)
        img = ScalarImage(img.data, m=1.0)
        polys = extract_isophote(img, RegionOfInterest.full(img), 0.4)
        p = polys[0].points
        vals = bilinear_sample(img.data, p[:, 0], p[:, 1])
        assert np.abs(vals - 0.4).max() < 1e-9

    def test_level_above_max_empty(self):
        img = ScalarImage(radial_bump(peak=0.9).data, m=1.0)
        assert extract_isophote(img, RegionOfInterest.full(img), 0.95) == []

    def test_nonpositive_level_rejected(self):
        img = radial_bump()
        with pytest.raises(ExtractionError):
            extract_isophote(img, RegionOfInterest.full(img), 0.0)

    def test_open_polyline_when_clipped(self):
        # peak near the ROI edge: the level set leaves the ROI and comes back
        img = radial_bump(size=64, sigma=16.0, peak=1.0, center=(2.0, 32.0))
        img = ScalarImage(img.data, m=1.0)
        polys = extract_isophote(img, RegionOfInterest.full(img), 0.5)
        assert any(not p.closed for p in polys)

    def test_two_components_sorted_by_area(self):
        data = np.zeros((64, 128))
        big = radial_bump(size=64, sigma=10.0, peak=1.0, center=(32.0, 32.0))
        small = radial_bump(size=64, sigma=5.0, peak=1.0, center=(32.0, 32.0))
        data[:, :64] = small.data
        data[:, 64:] = big.data
        img = ScalarImage(data, m=1.0)
        polys = extract_isophote(img, RegionOfInterest.full(img), 0.5)
        closed = [p for p in polys if p.closed]
        assert len(closed) == 2
        assert closed[0].enclosed_area() > closed[1].enclosed_area()
        assert closed[0].points[:, 0].mean() > 64  # big bump is on the right

    def test_short_components_dropped(self):
        img = ScalarImage(radial_bump(size=64, sigma=1.0, peak=1.0).data, m=1.0)
        polys = extract_isophote(img, RegionOfInterest.full(img), 0.5,
                                 min_points=200)
        assert polys == []

    def test_saddle_cells_consistent(self):
        # checkerboard-like saddle: tracing must not crash and each traced
        # vertex still interpolates to the level
        data = np.array([[0.0, 1.0, 0.0],
                         [1.0, 0.2, 1.0],
                         [0.0, 1.0, 0.0]])
        data = np.kron(data, np.ones((8, 8)))
        img = ScalarImage(data, m=1.0)
        polys = extract_isophote(img, RegionOfInterest.full(img), 0.5,
                                 min_points=2)
        assert polys  # produced something sensible


class TestPolylineGeometry:
    def square(self):
        pts = np.array([[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]])
        return IsophotePolyline(points=pts, closed=True, level=0.5)

    def test_enclosed_area(self):
        assert self.square().enclosed_area() == pytest.approx(16.0)

    def test_contains(self):
        sq = self.square()
        assert sq.contains((2.0, 2.0))
        assert not sq.contains((5.0, 2.0))
        assert not sq.contains((-1.0, -1.0))

    def test_to_dict(self):
        d = self.square().to_dict()
        assert d["closed"] is True
        assert d["level"] == 0.5
        assert len(d["points"]) == 4


class TestSelectPrimaryIsophote:
    def closed_circle(self, cx, cy, r, n=24):
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        pts = np.column_stack([cx + r * np.cos(th), cy + r * np.sin(th)])
        return IsophotePolyline(points=pts, closed=True, level=0.1)

    def test_prefers_enclosing(self):
        small_around_bp = self.closed_circle(10, 10, 3)
        big_elsewhere = self.closed_circle(50, 50, 10)
        chosen = select_primary_isophote([big_elsewhere, small_around_bp],
                                         (10.0, 10.0))
        assert chosen is small_around_bp

    def test_fallback_to_largest_closed(self):
        a = self.closed_circle(50, 50, 10)
        b = self.closed_circle(80, 80, 4)
        chosen = select_primary_isophote([a, b], (0.0, 0.0))
        assert chosen is a

    def test_open_only_fails(self):
        open_poly = IsophotePolyline(
            points=np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]),
            closed=False, level=0.1)
        with pytest.raises(SelectionFailedError):
            select_primary_isophote([open_poly], (0.0, 0.0))

    def test_empty_fails(self):
        with pytest.raises(SelectionFailedError):
            select_primary_isophote([], (0.0, 0.0))


class TestPipelineIntegration:
    def test_primary_isophote_on_benchmark_scene(self, noiseless_pipeline):
        primary = noiseless_pipeline["primary"]
        bp = noiseless_pipeline["bp"]
        assert primary.closed
        assert primary.contains(bp)
        # the slanted circle projects to a conic that still spans a large
        # fraction of the image
        assert primary.enclosed_area() > 1000.0
