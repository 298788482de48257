/** Model-to-screen math for the canvas overlay.
 *
 * Mirrors the service's conventions exactly: the model transform is
 * scale, then fixed X->Y->Z rotation about the mesh bbox center, then
 * translation; the pose maps model mm to camera mm; the pinhole
 * projection is u = fx*x/z + cx, v = fy*y/z + cy with a 1 mm near
 * plane. Anything the wireframe draws, the reference renderer would
 * draw in the same place.
 */

import type { DetectionDto, MeshDto, TransformDto } from "./types.js";

export type Vec3 = [number, number, number];
export type Mat3 = [Vec3, Vec3, Vec3];

export interface Intrinsics {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
}

export const NEAR_PLANE_MM = 1.0;

export function rotationXYZ(rx: number, ry: number, rz: number): Mat3 {
  const [cx, sx] = [Math.cos(rx), Math.sin(rx)];
  const [cy, sy] = [Math.cos(ry), Math.sin(ry)];
  const [cz, sz] = [Math.cos(rz), Math.sin(rz)];
  // Rz * Ry * Rx, row major.
  const r00 = cz * cy;
  const r01 = cz * sy * sx - sz * cx;
  const r02 = cz * sy * cx + sz * sx;
  const r10 = sz * cy;
  const r11 = sz * sy * sx + cz * cx;
  const r12 = sz * sy * cx - cz * sx;
  const r20 = -sy;
  const r21 = cy * sx;
  const r22 = cy * cx;
  return [
    [r00, r01, r02],
    [r10, r11, r12],
    [r20, r21, r22],
  ];
}

export function matVec(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
    m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
    m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
  ];
}

export function bboxCenter(vertices: number[][]): Vec3 {
  if (!vertices.length) return [0, 0, 0];
  const lo: Vec3 = [Infinity, Infinity, Infinity];
  const hi: Vec3 = [-Infinity, -Infinity, -Infinity];
  for (const v of vertices) {
    for (let k = 0; k < 3; k++) {
      lo[k] = Math.min(lo[k], v[k]);
      hi[k] = Math.max(hi[k], v[k]);
    }
  }
  return [(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2];
}

/** p -> R*(s*(p - center)) + center + translation, in model mm. */
export function applyModelTransform(
  points: number[][],
  t: TransformDto,
  center: Vec3,
): Vec3[] {
  const rot = rotationXYZ(t.rot_x_rad, t.rot_y_rad, t.rot_z_rad);
  const [tx, ty, tz] = t.translation_mm;
  return points.map((p) => {
    const local: Vec3 = [
      (p[0] - center[0]) * t.scale,
      (p[1] - center[1]) * t.scale,
      (p[2] - center[2]) * t.scale,
    ];
    const r = matVec(rot, local);
    return [r[0] + center[0] + tx, r[1] + center[1] + ty, r[2] + center[2] + tz];
  });
}

export function toCamera(points: Vec3[], rotation: number[][], translation: number[]): Vec3[] {
  return points.map((p) => [
    rotation[0][0] * p[0] + rotation[0][1] * p[1] + rotation[0][2] * p[2] + translation[0],
    rotation[1][0] * p[0] + rotation[1][1] * p[1] + rotation[1][2] * p[2] + translation[1],
    rotation[2][0] * p[0] + rotation[2][1] * p[1] + rotation[2][2] * p[2] + translation[2],
  ]);
}

export interface Projected {
  /** (u, v, z_mm); u/v are NaN for clipped points. */
  uvz: Vec3[];
  clipped: boolean[];
}

export function projectPoints(pointsCam: Vec3[], k: Intrinsics): Projected {
  const uvz: Vec3[] = [];
  const clipped: boolean[] = [];
  for (const [x, y, z] of pointsCam) {
    const out = z < NEAR_PLANE_MM;
    clipped.push(out);
    uvz.push(out
      ? [NaN, NaN, z]
      : [(k.fx * x) / z + k.cx, (k.fy * y) / z + k.cy, z]);
  }
  return { uvz, clipped };
}

export function uniqueEdges(faces: number[][]): Array<[number, number]> {
  const seen = new Set<string>();
  const edges: Array<[number, number]> = [];
  for (const [a, b, c] of faces) {
    for (const [u, v] of [[a, b], [b, c], [c, a]] as Array<[number, number]>) {
      const lo = Math.min(u, v);
      const hi = Math.max(u, v);
      const key = `${lo}:${hi}`;
      if (!seen.has(key)) {
        seen.add(key);
        edges.push([lo, hi]);
      }
    }
  }
  return edges;
}

export interface Scene {
  /** Screen-space vertices (u, v, z_mm), NaN when clipped. */
  uvz: Vec3[];
  /** Unique edges with both ends in front of the near plane. */
  edges: Array<[number, number]>;
  /** Faces fully in front of the near plane, back to front. */
  faceOrder: number[];
  /** Per-face diffuse shade in 0..1 (camera-facing headlight). */
  faceShade: number[];
}

/** Everything the canvas needs to draw one posed model. */
export function buildScene(
  mesh: MeshDto,
  transform: TransformDto,
  detection: DetectionDto,
  k: Intrinsics,
): Scene {
  const center = bboxCenter(mesh.vertices);
  const world = applyModelTransform(mesh.vertices, transform, center);
  const cam = toCamera(world, detection.rotation, detection.translation_mm);
  const { uvz, clipped } = projectPoints(cam, k);

  const edges = uniqueEdges(mesh.faces).filter(
    ([a, b]) => !clipped[a] && !clipped[b],
  );

  const keep: number[] = [];
  const depth: number[] = [];
  const shade: number[] = [];
  mesh.faces.forEach((face, idx) => {
    const [a, b, c] = face;
    if (clipped[a] || clipped[b] || clipped[c]) return;
    keep.push(idx);
    depth.push((cam[a][2] + cam[b][2] + cam[c][2]) / 3);

    const e1: Vec3 = [
      cam[b][0] - cam[a][0], cam[b][1] - cam[a][1], cam[b][2] - cam[a][2],
    ];
    const e2: Vec3 = [
      cam[c][0] - cam[a][0], cam[c][1] - cam[a][1], cam[c][2] - cam[a][2],
    ];
    const n: Vec3 = [
      e1[1] * e2[2] - e1[2] * e2[1],
      e1[2] * e2[0] - e1[0] * e2[2],
      e1[0] * e2[1] - e1[1] * e2[0],
    ];
    const len = Math.hypot(n[0], n[1], n[2]);
    // Headlight along +z; flat ambient floor so silhouettes stay visible.
    const facing = len > 0 ? Math.abs(n[2]) / len : 0;
    shade.push(0.35 + 0.65 * facing);
  });

  const order = keep
    .map((faceIdx, i) => ({ faceIdx, depth: depth[i], shade: shade[i] }))
    .sort((p, q) => q.depth - p.depth);

  return {
    uvz,
    edges,
    faceOrder: order.map((o) => o.faceIdx),
    faceShade: order.map((o) => o.shade),
  };
}
