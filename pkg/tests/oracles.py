"""Brute-force reference implementations.

Deliberately naive and independent of the package code paths they check:
plain loops, exhaustive scans, fixpoint iteration.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

N4 = [(-1, 0), (0, -1), (0, 1), (1, 0)]
N8 = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]


def neighbors(y, x, h, w, conn):
    for dy, dx in (N4 if conn == 4 else N8):
        yy, xx = y + dy, x + dx
        if 0 <= yy < h and 0 <= xx < w:
            yield yy, xx


def lab_reference(r, g, b):
    """CIE 1976 L*a*b* of one 8-bit sRGB color, D65 white (0.95047, 1, 1.08883)."""
    def lin(c):
        c = c / 255.0
        return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4

    rl, gl, bl = lin(r), lin(g), lin(b)
    x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl
    y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl
    z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl

    def f(t):
        d = 6.0 / 29.0
        return t ** (1.0 / 3.0) if t > d ** 3 else t / (3 * d * d) + 4.0 / 29.0

    fx, fy, fz = f(x / 0.95047), f(y / 1.0), f(z / 1.08883)
    return 116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)


def convolve_reference(img, kernel):
    """Nested-loop 3x3 convolution with clamp-to-edge sampling."""
    h, w = img.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(3):
                for j in range(3):
                    yy = min(max(y - (i - 1), 0), h - 1)
                    xx = min(max(x - (j - 1), 0), w - 1)
                    acc += kernel[i][j] * img[yy, xx]
            out[y, x] = acc
    return out


def _geodesic_step(j, mask, conn, pick, bound):
    h, w = j.shape
    out = j.copy()
    for y in range(h):
        for x in range(w):
            v = j[y, x]
            for yy, xx in neighbors(y, x, h, w, conn):
                v = pick(v, j[yy, xx])
            out[y, x] = bound(v, mask[y, x])
    return out


def reconstruct_dilation_reference(marker, mask, conn):
    """Iterate (dilate, then min with mask) until nothing changes."""
    j = np.asarray(marker, dtype=float).copy()
    while True:
        nxt = _geodesic_step(j, mask, conn, max, min)
        if np.array_equal(nxt, j):
            return j
        j = nxt


def reconstruct_erosion_reference(marker, mask, conn):
    j = np.asarray(marker, dtype=float).copy()
    while True:
        nxt = _geodesic_step(j, mask, conn, min, max)
        if np.array_equal(nxt, j):
            return j
        j = nxt


def plateau(img, y0, x0, conn):
    h, w = img.shape
    v = img[y0, x0]
    seen = {(y0, x0)}
    stack = [(y0, x0)]
    while stack:
        y, x = stack.pop()
        for q in neighbors(y, x, h, w, conn):
            if q not in seen and img[q] == v:
                seen.add(q)
                stack.append(q)
    return seen


def regional_minima_reference(img, conn):
    """Flood every plateau and compare it with its outer border."""
    img = np.asarray(img, dtype=float)
    h, w = img.shape
    out = np.zeros((h, w), dtype=bool)
    done = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w):
            if done[y, x]:
                continue
            plat = plateau(img, y, x, conn)
            border = {q for p in plat for q in neighbors(*p, h, w, conn)} - plat
            is_min = all(img[q] > img[y, x] for q in border)
            for p in plat:
                done[p] = True
                out[p] = is_min
    return out


def components_reference(mask, conn):
    """Set of frozensets of pixel coordinates, one per connected component."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    seen = set()
    comps = set()
    for y in range(h):
        for x in range(w):
            if mask[y, x] and (y, x) not in seen:
                comp = {(y, x)}
                stack = [(y, x)]
                while stack:
                    p = stack.pop()
                    for q in neighbors(*p, h, w, conn):
                        if mask[q] and q not in comp:
                            comp.add(q)
                            stack.append(q)
                seen |= comp
                comps.add(frozenset(comp))
    return comps


def edt_sq_reference(mask):
    """Squared distance from every True pixel to the nearest False pixel, exhaustively."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    feats = [(y, x) for y in range(h) for x in range(w) if not mask[y, x]]
    out = np.zeros((h, w), dtype=np.int64)
    for y in range(h):
        for x in range(w):
            if mask[y, x]:
                out[y, x] = min((y - fy) ** 2 + (x - fx) ** 2 for fy, fx in feats)
    return out


def otsu_reference(hist):
    """Scan every split t (lower class = bins 0..t) recomputing class statistics directly.

    Returns the smallest t whose between-class variance is within a relative
    1e-9 of the best one.
    """
    hist = [float(v) for v in hist]
    total = sum(hist)
    scores = []
    for t in range(len(hist) - 1):
        n0 = sum(hist[:t + 1])
        n1 = sum(hist[t + 1:])
        if n0 == 0 or n1 == 0:
            scores.append(-1.0)
            continue
        m0 = sum(i * hist[i] for i in range(t + 1)) / n0
        m1 = sum(i * hist[i] for i in range(t + 1, len(hist))) / n1
        scores.append((n0 / total) * (n1 / total) * (m0 - m1) ** 2)
    best = max(scores)
    return next(t for t, s in enumerate(scores) if s >= best - 1e-9 * abs(best))


def immersion_watershed_reference(relief, markers, conn):
    """Level-by-level simultaneous immersion from markers.

    At each gray level, unflooded pixels at or below the level are flooded in
    synchronous rounds: a pixel touching exactly one flooded region joins it,
    a pixel touching two or more becomes a ridge (0). Ridges never spread.
    Pixels never reached end as ridges.
    """
    relief = np.asarray(relief, dtype=float)
    h, w = relief.shape
    lab = np.where(np.asarray(markers) > 0, markers, -1).astype(np.int64)
    for level in sorted(set(relief.ravel().tolist())):
        while True:
            changes = {}
            for y in range(h):
                for x in range(w):
                    if lab[y, x] != -1 or relief[y, x] > level:
                        continue
                    found = {int(lab[q]) for q in neighbors(y, x, h, w, conn) if lab[q] > 0}
                    if len(found) == 1:
                        changes[(y, x)] = found.pop()
                    elif len(found) > 1:
                        changes[(y, x)] = 0
            if not changes:
                break
            for p, v in changes.items():
                lab[p] = v
    lab[lab < 0] = 0
    return lab


def best_two_partition(points):
    """Exhaustive search over all 2-partitions of 1-D points; returns (J, sorted means)."""
    points = list(points)
    n = len(points)
    best = None
    for mask in itertools.product((0, 1), repeat=n):
        if 0 not in mask or 1 not in mask:
            continue
        groups = [[p for p, m in zip(points, mask) if m == g] for g in (0, 1)]
        means = [sum(g) / len(g) for g in groups]
        j = sum((p - means[g]) ** 2 for g in (0, 1) for p in groups[g])
        if best is None or j < best[0] - 1e-12:
            best = (j, sorted(means))
    return best


def psnr_reference(mse, max_i):
    return 10.0 * math.log10(max_i ** 2 / mse)
