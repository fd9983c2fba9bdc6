"""Core 2D/3D geometric types: point-conics, camera intrinsics, homographies.

Conics are kept in a canonical scale-normalized matrix form so that equality
tests and regression snapshots are deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GeometryError(ValueError):
    """Base class for geometric input errors."""


class InvalidConicError(GeometryError):
    pass


class SingularTransformError(GeometryError):
    pass


class PointAtInfinityError(GeometryError):
    pass


#: Dehomogenization threshold for the third homogeneous coordinate.
INFINITY_TOL = 1e-12


def unit(v: np.ndarray) -> np.ndarray:
    """Return v / ||v||."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise GeometryError("cannot normalize the zero vector")
    return v / norm


def _canonicalize(M: np.ndarray) -> np.ndarray:
    """Symmetrize, scale to unit Frobenius norm and fix the overall sign.

    The sign is fixed so that the largest-magnitude diagonal entry is
    positive (falling back to the largest-magnitude entry overall when the
    diagonal vanishes).
    """
    M = np.asarray(M, dtype=float)
    M = 0.5 * (M + M.T)
    norm = np.linalg.norm(M)
    if norm < 1e-300 or not np.all(np.isfinite(M)):
        raise InvalidConicError("conic matrix is zero or non-finite")
    M = M / norm
    diag = np.diag(M)
    k = int(np.argmax(np.abs(diag)))
    pivot = diag[k]
    if abs(pivot) < 1e-14:
        flat = M.ravel()
        pivot = flat[int(np.argmax(np.abs(flat)))]
    if pivot < 0:
        M = -M
    return M


@dataclass(frozen=True)
class Conic:
    """Point-conic: symmetric 3x3 matrix C with points p satisfying p^T C p = 0.

    The stored matrix is canonical (unit Frobenius norm, fixed sign); the
    object therefore represents the projective equivalence class.
    """

    matrix: np.ndarray

    @classmethod
    def from_matrix(cls, M: np.ndarray) -> "Conic":
        return cls(_canonicalize(M))

    @classmethod
    def from_coeffs(cls, a: float, b: float, c: float, d: float, e: float,
                    f: float) -> "Conic":
        """Build from ax^2 + bxy + cy^2 + dx + ey + f = 0."""
        M = np.array([[a, b / 2.0, d / 2.0],
                      [b / 2.0, c, e / 2.0],
                      [d / 2.0, e / 2.0, f]])
        if not np.any(M):
            raise InvalidConicError("all conic coefficients are zero")
        return cls.from_matrix(M)

    @property
    def coeffs(self) -> tuple[float, float, float, float, float, float]:
        C = self.matrix
        return (C[0, 0], 2.0 * C[0, 1], C[1, 1],
                2.0 * C[0, 2], 2.0 * C[1, 2], C[2, 2])

    @property
    def is_ellipse(self) -> bool:
        a, b, c, *_ = self.coeffs
        return b * b - 4.0 * a * c < 0.0

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Algebraic residual p^T C p for an (N,2) array of points."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        ph = np.column_stack([p, np.ones(len(p))])
        return np.einsum("ni,ij,nj->n", ph, self.matrix, ph)

    def center(self) -> np.ndarray:
        """Center of a central conic (ellipse/hyperbola)."""
        a, b, c, d, e, _ = self.coeffs
        A = np.array([[2 * a, b], [b, 2 * c]])
        try:
            return np.linalg.solve(A, np.array([-d, -e]))
        except np.linalg.LinAlgError as exc:
            raise InvalidConicError("conic has no finite center") from exc

    def ellipse_axes(self) -> tuple[np.ndarray, np.ndarray, float]:
        """Return (center, semi-axes [major, minor], major-axis angle).

        Only valid for an ellipse with real points.
        """
        if not self.is_ellipse:
            raise InvalidConicError("not an ellipse")
        ctr = self.center()
        a, b, c, *_ = self.coeffs
        Q = np.array([[a, b / 2.0], [b / 2.0, c]])
        ch = np.append(ctr, 1.0)
        k = -ch @ self.matrix @ ch
        w, V = np.linalg.eigh(Q)
        ratios = k / w
        if np.any(ratios <= 0):
            raise InvalidConicError("ellipse has no real points")
        semi = np.sqrt(ratios)
        order = np.argsort(-semi)
        semi = semi[order]
        major = V[:, order[0]]
        return ctr, semi, float(np.arctan2(major[1], major[0]))

    def eccentricity(self) -> float:
        _, semi, _ = self.ellipse_axes()
        return float(np.sqrt(max(0.0, 1.0 - (semi[1] / semi[0]) ** 2)))


def transform_conic(conic: Conic, M: np.ndarray) -> Conic:
    """Transfer a conic under the point map p -> M^-1 p.

    Points p on the input conic map to points M^-1 p on the result, which is
    the canonical form of M^T C M.
    """
    M = np.asarray(M, dtype=float)
    if abs(np.linalg.det(M)) < 1e-300:
        raise SingularTransformError("transform matrix is singular")
    return Conic.from_matrix(M.T @ conic.matrix @ M)


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics with zero skew."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise GeometryError("focal lengths must be positive")

    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])

    @classmethod
    def from_matrix(cls, K: np.ndarray) -> "Intrinsics":
        K = np.asarray(K, dtype=float)
        return cls(fx=K[0, 0], fy=K[1, 1], cx=K[0, 2], cy=K[1, 2])


def check_homography(H: np.ndarray) -> np.ndarray:
    """Validate a 3x3 projective map (must be invertible)."""
    H = np.asarray(H, dtype=float)
    if H.shape != (3, 3):
        raise GeometryError("homography must be 3x3")
    if abs(np.linalg.det(H)) < 1e-300:
        raise SingularTransformError("homography is singular")
    return H


def apply_homography_point(H: np.ndarray, p) -> np.ndarray:
    """Map a 2D point through a homography and dehomogenize."""
    H = np.asarray(H, dtype=float)
    q = H @ np.array([p[0], p[1], 1.0])
    if abs(q[2]) < INFINITY_TOL:
        raise PointAtInfinityError("point maps to the line at infinity")
    return q[:2] / q[2]


def apply_homography_points(H: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Vectorized point transfer for an (N,2) array."""
    pts = np.asarray(pts, dtype=float)
    ph = np.column_stack([pts, np.ones(len(pts))])
    q = ph @ np.asarray(H, dtype=float).T
    w = q[:, 2]
    if np.any(np.abs(w) < INFINITY_TOL):
        raise PointAtInfinityError("a point maps to the line at infinity")
    return q[:, :2] / w[:, None]
