import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specnorm.geometry import (Conic, InvalidConicError, Intrinsics,
                               PointAtInfinityError, SingularTransformError,
                               apply_homography_point, apply_homography_points,
                               transform_conic)


def unit_circle():
    return Conic.from_coeffs(1, 0, 1, 0, 0, -1)


class TestConic:
    def test_unit_circle_is_ellipse(self):
        c = unit_circle()
        assert c.is_ellipse
        ctr, semi, _ = c.ellipse_axes()
        assert np.allclose(ctr, 0)
        assert np.allclose(semi, [1, 1])

    def test_line_pair_not_ellipse(self):
        assert not Conic.from_coeffs(1, 0, -1, 0, 0, 0).is_ellipse

    def test_axis_aligned_ellipse(self):
        c = Conic.from_coeffs(1, 0, 4, 0, 0, -4)
        ctr, semi, _ = c.ellipse_axes()
        assert np.allclose(ctr, 0)
        assert np.allclose(semi, [2, 1])

    def test_all_zero_rejected(self):
        with pytest.raises(InvalidConicError):
            Conic.from_coeffs(0, 0, 0, 0, 0, 0)

    def test_canonical_normalization(self):
        c1 = Conic.from_coeffs(1, 0, 1, 0, 0, -1)
        c2 = Conic.from_coeffs(-3, 0, -3, 0, 0, 3)
        assert np.allclose(c1.matrix, c2.matrix)
        assert np.isclose(np.linalg.norm(c1.matrix), 1.0)

    def test_classification_scale_invariant(self):
        for s in (1e-6, 1.0, 1e6, -2.5):
            assert Conic.from_coeffs(s, 0, s, 0, 0, -s).is_ellipse

    def test_evaluate_on_circle(self):
        c = unit_circle()
        th = np.linspace(0, 2 * np.pi, 17)
        pts = np.column_stack([np.cos(th), np.sin(th)])
        assert np.allclose(c.evaluate(pts), 0, atol=1e-12)


class TestTransformConic:
    def test_identity(self):
        c = unit_circle()
        assert np.allclose(transform_conic(c, np.eye(3)).matrix, c.matrix)

    def test_uniform_scale(self):
        # point map p -> M^-1 p with M = diag(2,2,1) halves the circle
        c2 = transform_conic(unit_circle(), np.diag([2.0, 2.0, 1.0]))
        _, semi, _ = c2.ellipse_axes()
        assert np.allclose(semi, [0.5, 0.5])

    def test_translation_point_sampling(self):
        # oracle: sample points on the source conic, push them through the
        # point map, check they satisfy the transformed conic
        M = np.array([[1.0, 0, 1.0], [0, 1.0, 0], [0, 0, 1.0]])
        c = unit_circle()
        c2 = transform_conic(c, M)
        th = np.linspace(0, 2 * np.pi, 8, endpoint=False)
        pts = np.column_stack([np.cos(th), np.sin(th)])
        mapped = apply_homography_points(np.linalg.inv(M), pts)
        assert np.allclose(c2.evaluate(mapped), 0, atol=1e-12)

    def test_singular_rejected(self):
        with pytest.raises(SingularTransformError):
            transform_conic(unit_circle(), np.diag([1.0, 1.0, 0.0]))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=9, max_size=9))
    def test_round_trip(self, entries):
        M = np.array(entries).reshape(3, 3)
        if abs(np.linalg.det(M)) < 1e-3:
            return
        c = Conic.from_coeffs(2, 1, 3, -1, 0.5, -4)
        back = transform_conic(transform_conic(c, M), np.linalg.inv(M))
        assert np.linalg.norm(back.matrix - c.matrix) < 1e-9

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 2 * np.pi), st.floats(-2, 2), st.floats(-2, 2),
           st.floats(0.2, 3))
    def test_point_incidence_preserved(self, th, tx, ty, s):
        M = np.array([[s * np.cos(th), -s * np.sin(th), tx],
                      [s * np.sin(th), s * np.cos(th), ty],
                      [0, 0, 1.0]])
        c = Conic.from_coeffs(1, 0.2, 2, 0.3, -0.1, -1)
        c2 = transform_conic(c, M)
        phi = np.linspace(0, 2 * np.pi, 5)
        # points on c via its parametric form
        ctr, semi, ang = c.ellipse_axes()
        R = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        pts = ctr + (R @ (semi[:, None] * np.stack([np.cos(phi), np.sin(phi)]))).T
        mapped = apply_homography_points(np.linalg.inv(M), pts)
        assert np.allclose(c2.evaluate(mapped), 0, atol=1e-9)


class TestIntrinsics:
    def test_default_benchmark_matrix(self):
        K = Intrinsics(fx=406, fy=406, cx=203, cy=203)
        assert np.array_equal(
            K.matrix(),
            [[406, 0, 203], [0, 406, 203], [0, 0, 1]])

    def test_identity(self):
        assert np.array_equal(Intrinsics(1, 1, 0, 0).matrix(), np.eye(3))

    def test_round_trip_exact(self):
        K = Intrinsics(fx=321.5, fy=298.25, cx=160.0, cy=121.5)
        assert Intrinsics.from_matrix(K.matrix()) == K

    def test_positive_focal_required(self):
        with pytest.raises(Exception):
            Intrinsics(fx=-1, fy=1, cx=0, cy=0)


class TestHomographyPoints:
    def test_identity(self):
        assert np.allclose(apply_homography_point(np.eye(3), (5, 7)), (5, 7))

    def test_scale(self):
        H = np.diag([2.0, 2.0, 1.0])
        assert np.allclose(apply_homography_point(H, (1, 1)), (2, 2))

    def test_translation(self):
        H = np.array([[1, 0, 3.0], [0, 1, -2.0], [0, 0, 1]])
        assert np.allclose(apply_homography_point(H, (0, 0)), (3, -2))

    def test_point_at_infinity(self):
        H = np.array([[1, 0, 0], [0, 1, 0], [1, 0, 0.0]])
        with pytest.raises(PointAtInfinityError):
            apply_homography_point(H, (0, 5))
