"""Grid traversal kernels shared by the lidar, the camera, and map carving.

All kernels walk cells with the Amanatides-Woo DDA. Conventions, shared with
the world model: a point on a cell boundary belongs to the upper cell, and on
a tie (the ray leaves through a cell corner) the x step happens first. The
starting cell is never tested; callers guarantee the sensor origin sits in
free space.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# Known-map cell states (semknow builds on these).
K_UNKNOWN = 0
K_FREE = 1
K_OCCUPIED = 2

_SNAP = 1e-9


@njit(cache=True)
def _wrap(a):
    # normalize to (-pi, pi]
    return a - 2.0 * math.pi * math.ceil((a - math.pi) / (2.0 * math.pi))


@njit(cache=True)
def ray_range(occ, res, x0, y0, angle, max_range):
    """Distance to the entry of the first blocked cell, or max_range."""
    h, w = occ.shape
    dx = math.cos(angle)
    dy = math.sin(angle)
    cx = int(math.floor(x0 / res + _SNAP))
    cy = int(math.floor(y0 / res + _SNAP))
    if dx > 0.0:
        step_x = 1
        t_max_x = ((cx + 1) * res - x0) / dx
        t_dx = res / dx
    elif dx < 0.0:
        step_x = -1
        t_max_x = (cx * res - x0) / dx
        t_dx = -res / dx
    else:
        step_x = 0
        t_max_x = np.inf
        t_dx = np.inf
    if dy > 0.0:
        step_y = 1
        t_max_y = ((cy + 1) * res - y0) / dy
        t_dy = res / dy
    elif dy < 0.0:
        step_y = -1
        t_max_y = (cy * res - y0) / dy
        t_dy = -res / dy
    else:
        step_y = 0
        t_max_y = np.inf
        t_dy = np.inf
    while True:
        if t_max_x <= t_max_y:
            t = t_max_x
            cx += step_x
            t_max_x += t_dx
        else:
            t = t_max_y
            cy += step_y
            t_max_y += t_dy
        if t >= max_range:
            return max_range
        if cx < 0 or cx >= w or cy < 0 or cy >= h:
            return t
        if occ[cy, cx] != 0:
            return t


@njit(cache=True)
def scan_ranges(occ, res, x0, y0, theta, fov, max_range, out):
    """True ranges for beams evenly spaced across fov, heading-centered.

    Beam k points at theta + fov*(k/(n-1) - 1/2); both end bearings are
    included (a 2*pi fan therefore spends one beam on the seam twice).
    """
    n = out.shape[0]
    for i in range(n):
        if n == 1:
            angle = theta
        else:
            angle = theta - fov / 2.0 + fov * i / (n - 1)
        out[i] = ray_range(occ, res, x0, y0, angle, max_range)


@njit(cache=True)
def known_clear(known, res, x0, y0, x1, y1):
    """Does the segment cross only known-free cells of a ternary map?

    The start cell is not tested and cells merely touched at the far end
    never block; the target point's own cell must be free.
    """
    h, w = known.shape
    tx = int(math.floor(x1 / res + _SNAP))
    ty = int(math.floor(y1 / res + _SNAP))
    cx = int(math.floor(x0 / res + _SNAP))
    cy = int(math.floor(y0 / res + _SNAP))
    if 0 <= tx < w and 0 <= ty < h:
        if known[ty, tx] != K_FREE:
            return False
    else:
        return False
    if cx == tx and cy == ty:
        return True
    dx = x1 - x0
    dy = y1 - y0
    dist = math.sqrt(dx * dx + dy * dy)
    if dist == 0.0:
        return True
    dx /= dist
    dy /= dist
    if dx > 0.0:
        step_x = 1
        t_max_x = ((cx + 1) * res - x0) / dx
        t_dx = res / dx
    elif dx < 0.0:
        step_x = -1
        t_max_x = (cx * res - x0) / dx
        t_dx = -res / dx
    else:
        step_x = 0
        t_max_x = np.inf
        t_dx = np.inf
    if dy > 0.0:
        step_y = 1
        t_max_y = ((cy + 1) * res - y0) / dy
        t_dy = res / dy
    elif dy < 0.0:
        step_y = -1
        t_max_y = (cy * res - y0) / dy
        t_dy = -res / dy
    else:
        step_y = 0
        t_max_y = np.inf
        t_dy = np.inf
    while True:
        if t_max_x <= t_max_y:
            t = t_max_x
            cx += step_x
            t_max_x += t_dx
        else:
            t = t_max_y
            cy += step_y
            t_max_y += t_dy
        if cx == tx and cy == ty:
            return True
        if t >= dist - 1e-9:
            return True
        if cx < 0 or cx >= w or cy < 0 or cy >= h:
            return False
        if known[cy, cx] != K_FREE:
            return False


@njit(cache=True)
def segment_clear(occ, res, x0, y0, x1, y1, own_code, self_only):
    """Is the open segment from (x0,y0) to the cell of (x1,y1) unobstructed?

    Cells carrying own_code block everywhere except the target cell itself.
    With self_only, only own_code blocks (walls and other objects are
    ignored); that is the self-occlusion-only visibility used as the
    denominator of the detector's visible fraction.

    The target cell itself is excused only when it is free or the object's
    own body: a surface point whose floor-rounded cell lands in a flush
    wall or a touching neighbor is buried, not visible through the seam.
    """
    h, w = occ.shape
    tx = int(math.floor(x1 / res + _SNAP))
    ty = int(math.floor(y1 / res + _SNAP))
    if tx < 0 or tx >= w or ty < 0 or ty >= h:
        return False
    tcode = occ[ty, tx]
    if tcode != 0 and tcode != own_code:
        return False
    cx = int(math.floor(x0 / res + _SNAP))
    cy = int(math.floor(y0 / res + _SNAP))
    if cx == tx and cy == ty:
        return True
    dx = x1 - x0
    dy = y1 - y0
    dist = math.sqrt(dx * dx + dy * dy)
    if dist == 0.0:
        return True
    dx /= dist
    dy /= dist
    if dx > 0.0:
        step_x = 1
        t_max_x = ((cx + 1) * res - x0) / dx
        t_dx = res / dx
    elif dx < 0.0:
        step_x = -1
        t_max_x = (cx * res - x0) / dx
        t_dx = -res / dx
    else:
        step_x = 0
        t_max_x = np.inf
        t_dx = np.inf
    if dy > 0.0:
        step_y = 1
        t_max_y = ((cy + 1) * res - y0) / dy
        t_dy = res / dy
    else:
        if dy < 0.0:
            step_y = -1
            t_max_y = (cy * res - y0) / dy
            t_dy = -res / dy
        else:
            step_y = 0
            t_max_y = np.inf
            t_dy = np.inf
    while True:
        if t_max_x <= t_max_y:
            t = t_max_x
            cx += step_x
            t_max_x += t_dx
        else:
            t = t_max_y
            cy += step_y
            t_max_y += t_dy
        if cx == tx and cy == ty:
            return True
        # endpoint slack: cells merely touched at the far end never block,
        # which keeps lattice-corner surface points out of float tie-breaks
        if t >= dist - 1e-9:
            return True
        if cx < 0 or cx >= w or cy < 0 or cy >= h:
            return False
        code = occ[cy, cx]
        if code == 0:
            continue
        if self_only:
            if code == own_code:
                return False
        else:
            return False


@njit(cache=True)
def visibility_mask(
    occ, res, rx, ry, rtheta, pts, own_code, cam_fov, cam_range, self_only, out
):
    """Per-point visibility of one object's surface points from the camera."""
    n = pts.shape[0]
    for i in range(n):
        px = pts[i, 0]
        py = pts[i, 1]
        if not self_only:
            ddx = px - rx
            ddy = py - ry
            d = math.sqrt(ddx * ddx + ddy * ddy)
            if d > cam_range:
                out[i] = 0
                continue
            rel = _wrap(math.atan2(ddy, ddx) - rtheta)
            if abs(rel) > cam_fov / 2.0 + 1e-12:
                out[i] = 0
                continue
        out[i] = 1 if segment_clear(occ, res, rx, ry, px, py, own_code, self_only) else 0


@njit(cache=True)
def carve_scan(known, res, x0, y0, angles, ranges, hits):
    """Update the ternary known map from one scan.

    Cells fully traversed by a beam become free; the cell containing a hit
    beam's endpoint becomes occupied. Occupied never downgrades to free, so
    conflicting beams within one scan resolve in favor of occupied.
    """
    h, w = known.shape
    for b in range(angles.shape[0]):
        r = ranges[b]
        dx = math.cos(angles[b])
        dy = math.sin(angles[b])
        cx = int(math.floor(x0 / res + _SNAP))
        cy = int(math.floor(y0 / res + _SNAP))
        if dx > 0.0:
            step_x = 1
            t_max_x = ((cx + 1) * res - x0) / dx
            t_dx = res / dx
        elif dx < 0.0:
            step_x = -1
            t_max_x = (cx * res - x0) / dx
            t_dx = -res / dx
        else:
            step_x = 0
            t_max_x = np.inf
            t_dx = np.inf
        if dy > 0.0:
            step_y = 1
            t_max_y = ((cy + 1) * res - y0) / dy
            t_dy = res / dy
        elif dy < 0.0:
            step_y = -1
            t_max_y = (cy * res - y0) / dy
            t_dy = -res / dy
        else:
            step_y = 0
            t_max_y = np.inf
            t_dy = np.inf
        while True:
            t_exit = min(t_max_x, t_max_y)
            if t_exit > r:
                if hits[b] and 0 <= cx < w and 0 <= cy < h:
                    known[cy, cx] = K_OCCUPIED
                break
            if 0 <= cx < w and 0 <= cy < h and known[cy, cx] == K_UNKNOWN:
                known[cy, cx] = K_FREE
            if t_max_x <= t_max_y:
                cx += step_x
                t_max_x += t_dx
            else:
                cy += step_y
                t_max_y += t_dy
            if cx < 0 or cx >= w or cy < 0 or cy >= h:
                break
