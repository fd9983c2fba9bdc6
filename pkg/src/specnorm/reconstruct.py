"""Normal reconstruction from an image ellipse.

Direct least-squares ellipse fitting (stabilized block formulation), transfer
of the fitted conic to the normalized camera plane, and single-conic circle
backprojection giving the two candidate plane normals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Conic, Intrinsics, transform_conic


class ReconstructionError(ValueError):
    pass


class InsufficientPointsError(ReconstructionError):
    pass


class DegenerateConfigurationError(ReconstructionError):
    pass


class NotAnEllipseError(ReconstructionError):
    pass


#: Relative eigenvalue gap below which the view is treated as fronto-parallel.
FRONTO_PARALLEL_GAP = 1e-7


@dataclass(frozen=True)
class NormalPair:
    """The two camera-facing unit normals consistent with one ellipse.

    The pair encodes the concave/convex ambiguity; both have z > 0 in the
    camera frame. They coincide only in the fronto-parallel case.
    """

    n_plus: np.ndarray
    n_minus: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.stack([self.n_plus, self.n_minus])


@dataclass(frozen=True)
class FitDiagnostics:
    rms_residual: float       # RMS algebraic residual of the canonical conic
    n_points: int
    eccentricity: float
    condition: float          # conditioning indicator of the fit system


def fit_ellipse(points: np.ndarray) -> tuple[Conic, FitDiagnostics]:
    """Direct least-squares ellipse fit with the 4ac - b^2 > 0 constraint.

    Uses the numerically stable block decomposition of the scatter matrix
    (Halir & Flusser) on mean-centered, RMS-sqrt(2)-scaled points, then
    de-normalizes the conic. The result is an ellipse by construction.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ReconstructionError("points must be an (N, 2) array")
    if len(pts) < 6:
        raise InsufficientPointsError(f"need at least 6 points, got {len(pts)}")

    mean = pts.mean(axis=0)
    centered = pts - mean
    rms = math.sqrt(np.mean(np.sum(centered ** 2, axis=1)))
    if rms < 1e-12:
        raise DegenerateConfigurationError("points are coincident")
    scale = math.sqrt(2.0) / rms
    x = centered[:, 0] * scale
    y = centered[:, 1] * scale

    D1 = np.column_stack([x * x, x * y, y * y])
    D2 = np.column_stack([x, y, np.ones_like(x)])
    S1 = D1.T @ D1
    S2 = D1.T @ D2
    S3 = D2.T @ D2
    if np.linalg.matrix_rank(np.column_stack([D1, D2]), tol=1e-10) < 5:
        raise DegenerateConfigurationError("degenerate point configuration")
    try:
        T = -np.linalg.solve(S3, S2.T)
    except np.linalg.LinAlgError as exc:
        raise DegenerateConfigurationError("singular scatter block") from exc
    M = S1 + S2 @ T
    # premultiply by the inverse of the constraint matrix [[0,0,2],[0,-1,0],[2,0,0]]
    M = np.vstack([M[2] / 2.0, -M[1], M[0] / 2.0])
    evals, evecs = np.linalg.eig(M)
    cond = np.real(4.0 * evecs[0] * evecs[2] - evecs[1] ** 2)
    good = np.where(cond > 0)[0]
    if len(good) == 0:
        raise DegenerateConfigurationError("no ellipse solution found")
    a1 = np.real(evecs[:, good[0]])
    a2 = T @ a1
    a, b, c, d, e, f = (*a1, *a2)

    # undo the normalization: conic in normalized frame pulled back through
    # p_norm = N p_img
    Cn = np.array([[a, b / 2, d / 2], [b / 2, c, e / 2], [d / 2, e / 2, f]])
    N = np.array([[scale, 0.0, -scale * mean[0]],
                  [0.0, scale, -scale * mean[1]],
                  [0.0, 0.0, 1.0]])
    conic = Conic.from_matrix(N.T @ Cn @ N)

    residual = conic.evaluate(pts)
    diagnostics = FitDiagnostics(
        rms_residual=float(np.sqrt(np.mean(residual ** 2))),
        n_points=len(pts),
        eccentricity=conic.eccentricity(),
        condition=float(np.linalg.cond(S3)),
    )
    return conic, diagnostics


def sampson_distance(conic: Conic, points: np.ndarray) -> np.ndarray:
    """First-order geometric (Sampson) point-to-conic distance."""
    pts = np.asarray(points, dtype=float)
    a, b, c, d, e, _ = conic.coeffs
    val = conic.evaluate(pts)
    gx = 2 * a * pts[:, 0] + b * pts[:, 1] + d
    gy = b * pts[:, 0] + 2 * c * pts[:, 1] + e
    grad = np.hypot(gx, gy)
    return np.abs(val) / np.maximum(grad, 1e-300)


def normalize_to_camera(conic: Conic, K: Intrinsics) -> Conic:
    """Transfer an image conic to the normalized camera plane: K^T C K."""
    return transform_conic(conic, K.matrix())


def _fix_eigvec_signs(E: np.ndarray) -> np.ndarray:
    """Make each eigenvector's largest-magnitude component positive."""
    out = E.copy()
    for j in range(E.shape[1]):
        k = int(np.argmax(np.abs(E[:, j])))
        if E[k, j] < 0:
            out[:, j] = -E[:, j]
    return out


def backproject_circle(conic: Conic) -> NormalPair:
    """Plane normals of a 3D circle observed as the given normalized conic.

    With eigenvalues l1 >= l2 > 0 > l3 of the (sign-fixed) conic matrix, the
    candidate normals are sqrt((l1-l2)/(l1-l3)) e1 +- sqrt((l2-l3)/(l1-l3)) e3,
    reported camera-facing (z > 0). Depth and circle radius are unrecoverable
    and deliberately not exposed.
    """
    A = conic.matrix
    w, E = np.linalg.eigh(A)
    if int(np.sum(w > 0)) == 1:
        w, E = np.linalg.eigh(-A)
    order = np.argsort(w)[::-1]          # descending: l1 >= l2 >= l3
    w = w[order]
    E = _fix_eigvec_signs(E[:, order])
    l1, l2, l3 = w
    if not (l2 > 0 > l3):
        raise NotAnEllipseError("conic eigenvalue signature is not (+, +, -)")
    span = l1 - l3
    if span < 1e-12:
        raise ReconstructionError("numerically degenerate conic spectrum")
    e1, e3 = E[:, 0], E[:, 2]
    if (l1 - l2) / max(abs(l1), abs(l3)) < FRONTO_PARALLEL_GAP:
        n = e3 if e3[2] > 0 else -e3
        return NormalPair(n_plus=n, n_minus=n.copy())
    a = math.sqrt((l1 - l2) / span)
    b = math.sqrt((l2 - l3) / span)
    cands = [a * e1 + b * e3, a * e1 - b * e3]
    cands = [c if c[2] > 0 else -c for c in cands]
    return NormalPair(n_plus=cands[0], n_minus=cands[1])


def angle_between(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between two unit vectors, radians."""
    return float(np.arccos(np.clip(np.dot(u, v), -1.0, 1.0)))


def angular_error(pair: NormalPair, truth: np.ndarray,
                  mode: str = "min") -> float:
    """Angular error of a normal pair against a reference normal, degrees.

    mode "min" scores the better of the two candidates (optimistic
    disambiguation). mode "oracle-sign" first picks the candidate whose image
    tilt direction agrees with the reference, then scores it, which can be
    worse than "min".
    """
    truth = np.asarray(truth, dtype=float)
    angles = [angle_between(pair.n_plus, truth),
              angle_between(pair.n_minus, truth)]
    if mode == "min":
        return math.degrees(min(angles))
    if mode == "oracle-sign":
        txy = truth[:2]
        if np.linalg.norm(txy) < 1e-9:
            return math.degrees(min(angles))
        dots = [float(pair.n_plus[:2] @ txy), float(pair.n_minus[:2] @ txy)]
        return math.degrees(angles[int(np.argmax(dots))])
    raise ValueError(f"unknown score mode: {mode!r}")
