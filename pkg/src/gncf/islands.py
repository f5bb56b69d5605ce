"""Geometry of the two-dimensional integration islands.

For a channel triplet (m, n, k) and an output frequency f, the integration
domain in the (f1, f2) plane is the rectangle spanned by channels m and n
cut by the diagonal band fs_k + f <= f1 + f2 <= fe_k + f. This module
computes, in closed form, the area of that region, its centroid, and the
equal-area square centered on the centroid that stands in for the region
downstream. An exact polygon-clipping routine is included as an
independent check of the closed-form composition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectrum import Channel

EMPTY_AREA_REL_TOL = 1e-15


def _step(x: float) -> float:
    """Unit step with the half-value convention at the jump."""
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return 0.0
    return 0.5


class DegenerateCentroidError(ValueError):
    """Signed parts cancel to zero total area but are individually nonzero."""


@dataclass(frozen=True)
class Island:
    """Equal-area square summary of one integration region.

    area: region area in Hz^2 (0 for an empty island).
    f1_star, f2_star: centroid coordinates in Hz.
    L1, L2: side lengths of the equal-area square (both sqrt(area)).
    """

    area: float
    f1_star: float
    f2_star: float

    @property
    def L1(self) -> float:
        return self.area ** 0.5

    @property
    def L2(self) -> float:
        return self.area ** 0.5

    @property
    def empty(self) -> bool:
        return self.area <= 0.0


EMPTY_ISLAND = Island(0.0, 0.0, 0.0)


def centroid_combine(parts) -> tuple[float, float, float]:
    """Combine (signed_area, f1, f2) parts into a total area and centroid.

    Signed areas let a shape be described as sums and differences of
    simpler pieces; the centroid is the area-weighted mean. A zero total
    with nonzero parts has no centroid and raises.
    """
    total = 0.0
    m1 = 0.0
    m2 = 0.0
    scale = 0.0
    for s, f1, f2 in parts:
        total += s
        m1 += s * f1
        m2 += s * f2
        scale += abs(s)
    if scale == 0.0:
        return 0.0, 0.0, 0.0
    if abs(total) <= EMPTY_AREA_REL_TOL * scale:
        raise DegenerateCentroidError("signed parts cancel to zero area")
    return total, m1 / total, m2 / total


def island_geometry(ch_m: Channel, ch_n: Channel, ch_k: Channel,
                    f: float) -> Island:
    """Area, centroid and square side of the (m, n, k) island at f.

    The rectangle corners project onto the f1 + f2 axis at F1 < F2 <= F3 <
    F4; the band edges fp_s, fp_e select slices of the lower corner
    triangle, the middle strip and the upper corner triangle, each with a
    known area and centroid. Signed combinations of those slices give the
    clipped region exactly.
    """
    fsm, fem = ch_m.f_start, ch_m.f_end
    fsn, fen = ch_n.f_start, ch_n.f_end
    fp_s = ch_k.f_start + f
    fp_e = ch_k.f_end + f

    f1_corner = fsm + fsn
    f2_corner = min(fsm + fen, fem + fsn)
    f3_corner = max(fsm + fen, fem + fsn)
    f4_corner = fem + fen

    if fp_s > f4_corner or fp_e < f1_corner:
        return EMPTY_ISLAND

    bw_m = ch_m.width
    bw_n = ch_n.width

    def tri_lo(tau: float) -> tuple[float, float, float]:
        return ((tau - f1_corner) ** 2 / 2.0,
                (2.0 * fsm + tau - fsn) / 3.0,
                (2.0 * fsn + tau - fsm) / 3.0)

    def tri_hi(tau: float) -> tuple[float, float, float]:
        return ((tau - f4_corner) ** 2 / 2.0,
                (2.0 * fem + tau - fen) / 3.0,
                (2.0 * fen + tau - fem) / 3.0)

    parts = []

    # Lower-triangle slice between tau1m and tau1p.
    g1 = _step(f2_corner - fp_s) * _step(fp_e - f1_corner)
    if g1 > 0.0:
        tau1p = min(fp_e, f2_corner)
        tau1m = max(fp_s, f1_corner)
        sp, c1, c2 = tri_lo(tau1p)
        parts.append((g1 * sp, c1, c2))
        sm, c1, c2 = tri_lo(tau1m)
        parts.append((-g1 * sm, c1, c2))

    # Middle strip between tau1 and tau2; its diagonal cross-section has
    # constant width min(bw_m, bw_n).
    g2 = _step(f3_corner - fp_s) * _step(fp_e - f2_corner)
    if g2 > 0.0:
        tau1 = max(fp_s, f2_corner)
        tau2 = min(fp_e, f3_corner)
        s2 = (tau2 - tau1) * min(bw_m, bw_n)
        tau_mid = (tau1 + tau2) / 2.0
        um = _step(bw_n - bw_m)
        un = _step(bw_m - bw_n)
        c1 = um * (fsm + fem) / 2.0 + un * (tau_mid - (fsn + fen) / 2.0)
        parts.append((g2 * s2, c1, tau_mid - c1))

    # Upper-triangle slice: areas are measured above the cut line, so the
    # slice is the difference taken at the lower and upper band edges.
    g3 = _step(f4_corner - fp_s) * _step(fp_e - f3_corner)
    if g3 > 0.0:
        tau3p = max(fp_s, f3_corner)
        tau3m = min(fp_e, f4_corner)
        sp, c1, c2 = tri_hi(tau3p)
        parts.append((g3 * sp, c1, c2))
        sm, c1, c2 = tri_hi(tau3m)
        parts.append((-g3 * sm, c1, c2))

    try:
        area, f1c, f2c = centroid_combine(parts)
    except DegenerateCentroidError:
        return EMPTY_ISLAND
    if area <= EMPTY_AREA_REL_TOL * bw_m * bw_n:
        return EMPTY_ISLAND
    return Island(area, f1c, f2c)


def _clip_halfplane(poly, a: float, b: float, c: float):
    """Keep the part of a convex polygon with a*x + b*y <= c."""
    out = []
    n = len(poly)
    for i in range(n):
        px, py = poly[i]
        qx, qy = poly[(i + 1) % n]
        p_in = a * px + b * py <= c
        q_in = a * qx + b * qy <= c
        if p_in:
            out.append((px, py))
        if p_in != q_in:
            t = (c - a * px - b * py) / (a * (qx - px) + b * (qy - py))
            out.append((px + t * (qx - px), py + t * (qy - py)))
    return out


def island_polygon_oracle(ch_m: Channel, ch_n: Channel, ch_k: Channel,
                          f: float):
    """Exact island polygon with shoelace area and first-moment centroid.

    Independent of the closed-form scenario composition: the rectangle is
    clipped against each band half-plane directly. Returns
    (vertices, area, f1_centroid, f2_centroid); empty islands give an
    empty vertex list and zeros.
    """
    poly = [
        (ch_m.f_start, ch_n.f_start),
        (ch_m.f_end, ch_n.f_start),
        (ch_m.f_end, ch_n.f_end),
        (ch_m.f_start, ch_n.f_end),
    ]
    poly = _clip_halfplane(poly, 1.0, 1.0, ch_k.f_end + f)
    poly = _clip_halfplane(poly, -1.0, -1.0, -(ch_k.f_start + f))
    if len(poly) < 3:
        return [], 0.0, 0.0, 0.0
    verts = np.asarray(poly)
    # Shoelace sums cancel catastrophically at optical-frequency offsets;
    # work relative to the first vertex and shift back afterwards.
    x0, y0 = verts[0]
    verts = verts - (x0, y0)
    x1 = verts[:, 0]
    y1 = verts[:, 1]
    x2 = np.roll(x1, -1)
    y2 = np.roll(y1, -1)
    cross = x1 * y2 - x2 * y1
    area2 = np.sum(cross)
    if area2 == 0.0:
        return [], 0.0, 0.0, 0.0
    cx = x0 + np.sum((x1 + x2) * cross) / (3.0 * area2)
    cy = y0 + np.sum((y1 + y2) * cross) / (3.0 * area2)
    return poly, abs(area2) / 2.0, float(cx), float(cy)
