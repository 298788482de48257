"""Marker pose from a planar homography, with iterative refinement.

Marker frame: origin at the marker center, x right and y down on the
printed face, z pointing into the wall the marker hangs on. A camera
looking straight at the marker therefore sees identity rotation and a
purely forward translation.

`yaw_of_rotation` reduces a rotation to the in-plane spin the session
layer feeds into the model transform. It is exact under composition
with in-plane rotations: yaw(R @ Rz(a)) == yaw(R) + a up to wrapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from ..errors import MeshLensError
from .camera import CameraIntrinsics
from .homography import Homography

ORTHONORMALITY_TOL = 1e-9


class BehindCamera(MeshLensError):
    """The homography does not correspond to a marker facing the camera."""


class Diverged(MeshLensError):
    """Refinement failed to reduce the reprojection error repeatedly."""


@dataclass
class Pose:
    rotation: np.ndarray  # (3, 3)
    translation: np.ndarray  # (3,) mm, camera frame

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        gram = self.rotation.T @ self.rotation - np.eye(3)
        if np.linalg.norm(gram) > ORTHONORMALITY_TOL:
            raise ValueError("rotation is not orthonormal")
        if np.linalg.det(self.rotation) < 0:
            raise ValueError("rotation is a reflection")
        if not self.translation[2] > 0:
            raise ValueError("marker must sit in front of the camera")

    @property
    def distance(self) -> float:
        return float(np.linalg.norm(self.translation))

    @property
    def yaw(self) -> float:
        return yaw_of_rotation(self.rotation)


def yaw_of_rotation(rotation: np.ndarray) -> float:
    """In-plane marker spin in radians, counterclockwise as seen on screen."""
    r = np.asarray(rotation)
    return -math.atan2(r[1, 0] - r[0, 1], r[0, 0] + r[1, 1])


def marker_corners_mm(side: float) -> np.ndarray:
    """TL, TR, BR, BL corners of the marker square in its own frame."""
    h = side / 2.0
    return np.array(
        [[-h, -h, 0.0], [h, -h, 0.0], [h, h, 0.0], [-h, h, 0.0]]
    )


def project_points_cam(points_cam: np.ndarray, intrinsics: CameraIntrinsics) -> np.ndarray:
    p = np.atleast_2d(points_cam)
    z = p[:, 2]
    return np.column_stack(
        [
            intrinsics.fx * p[:, 0] / z + intrinsics.cx,
            intrinsics.fy * p[:, 1] / z + intrinsics.cy,
        ]
    )


def project_marker_corners(pose: Pose, intrinsics: CameraIntrinsics, side: float) -> np.ndarray:
    cam = marker_corners_mm(side) @ pose.rotation.T + pose.translation
    return project_points_cam(cam, intrinsics)


def _nearest_rotation(m: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(m)
    return u @ np.diag([1.0, 1.0, float(np.linalg.det(u @ vt))]) @ vt


def pose_from_homography(
    h: Homography, intrinsics: CameraIntrinsics, marker_side: float
) -> Pose:
    """Closed-form pose from the plane-to-image homography.

    `h` maps marker plane millimeters (corner layout as in
    `marker_corners_mm`) to pixel coordinates. The two leading columns of
    K^-1 H are scaled copies of the first two rotation columns; the scale
    is fixed from their norms, the third column completed by the cross
    product, and the result snapped to the nearest proper rotation.
    """
    if marker_side <= 0:
        raise ValueError("marker side must be positive")
    b = np.linalg.inv(intrinsics.matrix) @ h.matrix
    n1 = np.linalg.norm(b[:, 0])
    n2 = np.linalg.norm(b[:, 1])
    if n1 < 1e-12 or n2 < 1e-12:
        raise BehindCamera("homography collapses a rotation column")
    lam = 2.0 / (n1 + n2)
    r1 = lam * b[:, 0]
    r2 = lam * b[:, 1]
    rotation = _nearest_rotation(np.column_stack([r1, r2, np.cross(r1, r2)]))
    translation = lam * b[:, 2]
    if translation[2] < 0:
        rotation = rotation @ np.diag([-1.0, -1.0, 1.0])
        rotation = _nearest_rotation(rotation)
        translation = -translation
    if not translation[2] > 0:
        raise BehindCamera("marker plane has no positive depth")
    if float(rotation[:, 2] @ translation) <= 0:
        raise BehindCamera("recovered plane faces away from the camera")
    return Pose(rotation, translation)


def refine_pose(
    initial: Pose,
    corners_px: np.ndarray,
    intrinsics: CameraIntrinsics,
    marker_side: float,
    max_iters: int = 20,
    tol: float = 1e-10,
) -> tuple[Pose, float]:
    """Gauss-Newton polish of a corner-based pose.

    Minimizes the summed squared reprojection error of the four marker
    corners over rotation (left-multiplied axis-angle step) and
    translation. Steps that increase the error are backtracked by
    halving; three failed steps in a row raise Diverged. Returns the best
    pose seen and its error, which never exceeds the initial error.
    """
    observed = np.asarray(corners_px, dtype=np.float64).reshape(4, 2)
    corners = marker_corners_mm(marker_side)
    fx, fy = intrinsics.fx, intrinsics.fy

    def cost_of(rot, trans):
        cam = corners @ rot.T + trans
        if np.any(cam[:, 2] <= 1e-9):
            return np.inf, None
        resid = project_points_cam(cam, intrinsics) - observed
        return float(np.sum(resid * resid)), resid

    rot = initial.rotation.copy()
    trans = initial.translation.copy()
    cost, _ = cost_of(rot, trans)
    best = (rot.copy(), trans.copy(), cost)
    failed_in_a_row = 0
    damping = 1e-12

    for _ in range(max_iters):
        cam = corners @ rot.T + trans
        resid = project_points_cam(cam, intrinsics) - observed
        jac = np.zeros((8, 6))
        for i, p in enumerate(cam):
            x, y, z = p
            duv = np.array(
                [[fx / z, 0.0, -fx * x / (z * z)], [0.0, fy / z, -fy * y / (z * z)]]
            )
            # left-multiplicative step: d(exp(w) R X)/dw = -[R X]x, and the
            # translation does not move with the rotation
            qx, qy, qz = p - trans
            skew = np.array([[0.0, -qz, qy], [qz, 0.0, -qx], [-qy, qx, 0.0]])
            jac[2 * i : 2 * i + 2, :3] = duv @ (-skew)
            jac[2 * i : 2 * i + 2, 3:] = duv
        g = jac.T @ resid.ravel()
        hess = jac.T @ jac + damping * np.eye(6)
        try:
            step = np.linalg.solve(hess, -g)
        except np.linalg.LinAlgError:
            raise Diverged("normal equations are singular") from None
        # predicted decrease of the quadratic model; when it is below the
        # tolerance the remaining improvement is numerical noise
        if -float(g @ step) < tol:
            break

        alpha = 1.0
        accepted = False
        for _ in range(10):
            w = alpha * step[:3]
            rot_try = Rotation.from_rotvec(w).as_matrix() @ rot
            trans_try = trans + alpha * step[3:]
            cost_try, _ = cost_of(rot_try, trans_try)
            if cost_try <= cost:
                improvement = cost - cost_try
                rot, trans, cost = rot_try, trans_try, cost_try
                accepted = True
                break
            alpha *= 0.5
        if accepted:
            failed_in_a_row = 0
            if cost < best[2]:
                best = (rot.copy(), trans.copy(), cost)
            if improvement < tol:
                break
        else:
            failed_in_a_row += 1
            damping = max(damping * 1e4, 1e-6)
            if failed_in_a_row >= 3:
                raise Diverged("three consecutive iterations failed to descend")

    rot_b, trans_b, cost_b = best
    return Pose(_nearest_rotation(rot_b), trans_b), cost_b
