"""Gray-level and binary morphology used to build watershed markers.

Flat structuring elements only. Images are 2-D numpy arrays; masks are
boolean arrays of the same shape. Borders are handled by replication for
erosion/dilation and by ignoring out-of-image neighbors everywhere else.
"""

from __future__ import annotations

from collections import deque

import numpy as np

CONNECTIVITIES = (4, 8)


def check_connectivity(conn: int) -> int:
    if conn not in CONNECTIVITIES:
        raise ValueError(f"connectivity must be 4 or 8, got {conn!r}")
    return conn


def neighbor_offsets(conn: int) -> list[tuple[int, int]]:
    """(dy, dx) offsets of the pixel neighborhood, raster order."""
    check_connectivity(conn)
    if conn == 4:
        return [(-1, 0), (0, -1), (0, 1), (1, 0)]
    return [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def _flat_offsets(conn: int, stride: int):
    """Raster-preceding and full neighbor offsets in a flat array of row stride ``stride``."""
    full = [dy * stride + dx for dy, dx in neighbor_offsets(conn)]
    before = [o for o in full if o < 0]
    after = [o for o in full if o > 0]
    return before, after, full


def disk(radius: int) -> np.ndarray:
    """Flat disk footprint: offsets with ``dy**2 + dx**2 <= radius**2``."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    r = np.arange(-radius, radius + 1)
    return (r[:, None] ** 2 + r[None, :] ** 2) <= radius * radius


def square(size: int) -> np.ndarray:
    if size < 1 or size % 2 == 0:
        raise ValueError("square footprint needs an odd side length")
    return np.ones((size, size), dtype=bool)


def _check_footprint(se) -> np.ndarray:
    if np.isscalar(se):
        return disk(int(se))
    fp = np.asarray(se, dtype=bool)
    if fp.ndim != 2 or fp.shape[0] % 2 == 0 or fp.shape[1] % 2 == 0:
        raise ValueError("footprint must be 2-D with odd side lengths")
    if not fp[fp.shape[0] // 2, fp.shape[1] // 2]:
        raise ValueError("footprint must contain its center")
    return fp


def _rank_filter(img, se, reduce, reflect: bool) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    fp = _check_footprint(se)
    ry, rx = fp.shape[0] // 2, fp.shape[1] // 2
    h, w = img.shape
    padded = np.pad(img, ((ry, ry), (rx, rx)), mode="edge")
    out = None
    for i, j in zip(*np.nonzero(fp)):
        dy, dx = i - ry, j - rx
        if reflect:
            dy, dx = -dy, -dx
        view = padded[ry + dy:ry + dy + h, rx + dx:rx + dx + w]
        out = view.copy() if out is None else reduce(out, view)
    return out


def erode(img, se=1) -> np.ndarray:
    """Minimum over the footprint. ``se`` is a disk radius or a boolean footprint."""
    return _rank_filter(img, se, np.minimum, reflect=False)


def dilate(img, se=1) -> np.ndarray:
    """Maximum over the reflected footprint."""
    return _rank_filter(img, se, np.maximum, reflect=True)


def _padded_lists(marker, mask, fill):
    h, w = marker.shape
    stride = w + 2
    jm = np.full((h + 2, stride), fill)
    im = np.full((h + 2, stride), fill)
    jm[1:-1, 1:-1] = marker
    im[1:-1, 1:-1] = mask
    interior = [(y + 1) * stride + x + 1 for y in range(h) for x in range(w)]
    return jm.ravel().tolist(), im.ravel().tolist(), interior, stride


def _unpad(values, shape):
    h, w = shape
    return np.asarray(values, dtype=np.float64).reshape(h + 2, w + 2)[1:-1, 1:-1].copy()


def _pair(marker, mask):
    marker = np.asarray(marker, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if marker.shape != mask.shape or marker.ndim != 2:
        raise ValueError(f"marker {marker.shape} and mask {mask.shape} must be equal 2-D shapes")
    return marker, mask


def reconstruct_by_dilation(marker, mask, conn: int = 8) -> np.ndarray:
    """Gray-level reconstruction of ``mask`` from ``marker`` by geodesic dilation.

    Hybrid algorithm: one raster and one anti-raster sweep, then a FIFO
    propagation pass for whatever the sweeps could not settle.
    """
    marker, mask = _pair(marker, mask)
    if np.any(marker > mask):
        raise ValueError("marker must be <= mask everywhere for reconstruction by dilation")
    check_connectivity(conn)
    J, I, pixels, stride = _padded_lists(marker, mask, -np.inf)
    before, after, full = _flat_offsets(conn, stride)

    for p in pixels:
        v = J[p]
        for o in before:
            if J[p + o] > v:
                v = J[p + o]
        J[p] = v if v < I[p] else I[p]

    fifo = deque()
    for p in reversed(pixels):
        v = J[p]
        for o in after:
            if J[p + o] > v:
                v = J[p + o]
        v = v if v < I[p] else I[p]
        J[p] = v
        for o in after:
            q = p + o
            if J[q] < v and J[q] < I[q]:
                fifo.append(p)
                break

    while fifo:
        p = fifo.popleft()
        v = J[p]
        for o in full:
            q = p + o
            if J[q] < v and I[q] != J[q]:
                J[q] = v if v < I[q] else I[q]
                fifo.append(q)
    return _unpad(J, marker.shape)


def reconstruct_by_erosion(marker, mask, conn: int = 8) -> np.ndarray:
    """Dual of :func:`reconstruct_by_dilation`: geodesic erosion of ``marker`` above ``mask``."""
    marker, mask = _pair(marker, mask)
    if np.any(marker < mask):
        raise ValueError("marker must be >= mask everywhere for reconstruction by erosion")
    check_connectivity(conn)
    J, I, pixels, stride = _padded_lists(marker, mask, np.inf)
    before, after, full = _flat_offsets(conn, stride)

    for p in pixels:
        v = J[p]
        for o in before:
            if J[p + o] < v:
                v = J[p + o]
        J[p] = v if v > I[p] else I[p]

    fifo = deque()
    for p in reversed(pixels):
        v = J[p]
        for o in after:
            if J[p + o] < v:
                v = J[p + o]
        v = v if v > I[p] else I[p]
        J[p] = v
        for o in after:
            q = p + o
            if J[q] > v and J[q] > I[q]:
                fifo.append(p)
                break

    while fifo:
        p = fifo.popleft()
        v = J[p]
        for o in full:
            q = p + o
            if J[q] > v and I[q] != J[q]:
                J[q] = v if v > I[q] else I[q]
                fifo.append(q)
    return _unpad(J, marker.shape)


def open_by_reconstruction(img, se, conn: int = 8) -> np.ndarray:
    return reconstruct_by_dilation(erode(img, se), img, conn)


def close_by_reconstruction(img, se, conn: int = 8) -> np.ndarray:
    return reconstruct_by_erosion(dilate(img, se), img, conn)


def label_components(mask, conn: int = 8):
    """Label connected components of a boolean mask.

    Returns
    -------
    labels : np.ndarray
        int32 array, 0 outside the mask, 1..count in raster order of each
        component's first pixel.
    count : int
    """
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    offsets = neighbor_offsets(conn)
    count = 0
    for y0, x0 in zip(*np.nonzero(mask)):
        if labels[y0, x0]:
            continue
        count += 1
        labels[y0, x0] = count
        stack = [(y0, x0)]
        while stack:
            y, x = stack.pop()
            for dy, dx in offsets:
                yy, xx = y + dy, x + dx
                if 0 <= yy < h and 0 <= xx < w and mask[yy, xx] and not labels[yy, xx]:
                    labels[yy, xx] = count
                    stack.append((yy, xx))
    return labels, count


def remove_small_components(mask, min_area: int, conn: int = 8) -> np.ndarray:
    """Drop connected components with fewer than ``min_area`` pixels."""
    labels, count = label_components(mask, conn)
    if count == 0:
        return np.zeros_like(labels, dtype=bool)
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    keep = sizes >= min_area
    keep[0] = False
    return keep[labels]


def regional_extrema(img, kind: str = "minima", conn: int = 8) -> np.ndarray:
    """Mark the regional minima or maxima of a gray map.

    A regional minimum is a connected plateau of equal value none of whose
    pixels has a strictly lower neighbor (strictly higher for maxima).
    """
    img = np.asarray(img, dtype=np.float64)
    if kind == "maxima":
        img = -img
    elif kind != "minima":
        raise ValueError(f"kind must be 'minima' or 'maxima', got {kind!r}")
    h, w = img.shape
    offsets = neighbor_offsets(conn)
    padded = np.pad(img, 1, mode="constant", constant_values=np.inf)
    lower = np.zeros((h, w), dtype=bool)
    for dy, dx in offsets:
        lower |= padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w] < img

    # a pixel that can step down disqualifies its whole plateau
    stack = list(zip(*np.nonzero(lower)))
    while stack:
        y, x = stack.pop()
        v = img[y, x]
        for dy, dx in offsets:
            yy, xx = y + dy, x + dx
            if 0 <= yy < h and 0 <= xx < w and not lower[yy, xx] and img[yy, xx] == v:
                lower[yy, xx] = True
                stack.append((yy, xx))
    return ~lower


def regional_minima(img, conn: int = 8) -> np.ndarray:
    return regional_extrema(img, "minima", conn)


def regional_maxima(img, conn: int = 8) -> np.ndarray:
    return regional_extrema(img, "maxima", conn)


def level_offset(img) -> float:
    """Offset that lifts non-marker pixels strictly above any imposed minimum."""
    img = np.asarray(img)
    if np.issubdtype(img.dtype, np.integer):
        return 1.0
    lo, hi = float(img.min()), float(img.max())
    delta = (hi - lo) * 1e-6
    if delta == 0.0:
        delta = 1e-6
    # stay clear of float spacing for large magnitudes
    return max(delta, 4.0 * float(np.spacing(max(abs(lo), abs(hi), 1.0))))


def impose_minima(img, markers, conn: int = 8) -> np.ndarray:
    """Modify ``img`` so its regional minima are exactly the components of ``markers``.

    Marker pixels are pushed to ``min(img) - delta`` and every basin not
    holding a marker is filled up to its spill level by reconstruction by
    erosion of ``min(img + delta, fm)``.
    """
    img_in = np.asarray(img)
    markers = np.asarray(markers, dtype=bool)
    if markers.shape != img_in.shape:
        raise ValueError(f"markers {markers.shape} and image {img_in.shape} differ in shape")
    if not markers.any():
        raise ValueError("marker set is empty")
    delta = level_offset(img_in)
    img = img_in.astype(np.float64)
    low = float(img.min()) - delta
    high = float(img.max()) + delta
    fm = np.where(markers, low, high)
    g = np.minimum(img + delta, fm)
    return reconstruct_by_erosion(fm, g, conn)


def otsu_threshold(img) -> float:
    """Otsu threshold over a 256-bin histogram of the min-max normalized image.

    Returns the threshold in the image's own units: the upper edge of the
    last bin of the lower class. Pixels ``> threshold`` form the upper class.
    Among equally good splits the lowest one wins.
    """
    values = np.asarray(img, dtype=np.float64).ravel()
    lo, hi = float(values.min()), float(values.max())
    if not hi > lo:
        raise ValueError("degenerate histogram: image is constant")
    bins = histogram_bins(values, lo, hi)
    hist = np.bincount(bins, minlength=256).astype(np.float64)
    t = otsu_bin(hist)
    return lo + (t + 1) * (hi - lo) / 256.0


def histogram_bins(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """256-bin index of each value in ``[lo, hi]``."""
    scaled = (values - lo) / (hi - lo)
    return np.minimum((scaled * 256.0).astype(np.int64), 255)


def otsu_bin(hist) -> int:
    """Index t of the last bin of the lower class maximizing between-class variance."""
    hist = np.asarray(hist, dtype=np.float64)
    total = hist.sum()
    centers = np.arange(hist.size, dtype=np.float64)
    w0 = np.cumsum(hist)[:-1]
    s0 = np.cumsum(hist * centers)[:-1]
    w1 = total - w0
    s1 = float(np.dot(hist, centers)) - s0
    valid = (w0 > 0) & (w1 > 0)
    score = np.full(w0.shape, -1.0)
    m0 = s0[valid] / w0[valid]
    m1 = s1[valid] / w1[valid]
    score[valid] = (w0[valid] / total) * (w1[valid] / total) * (m0 - m1) ** 2
    return int(np.argmax(score))


def binarize_otsu(img) -> np.ndarray:
    """Upper Otsu class as a mask, decided on histogram bins."""
    img = np.asarray(img, dtype=np.float64)
    lo, hi = float(img.min()), float(img.max())
    if not hi > lo:
        raise ValueError("degenerate histogram: image is constant")
    bins = histogram_bins(img, lo, hi)
    t = otsu_bin(np.bincount(bins.ravel(), minlength=256))
    return bins > t


def distance_transform_sq(mask) -> np.ndarray:
    """Exact squared Euclidean distance from each True pixel to the nearest False pixel.

    Two separable passes (Meijster et al.): a column scan for 1-D distances,
    then a lower-envelope scan along each row. Integer arithmetic throughout.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    if mask.all():
        raise ValueError("distance transform needs at least one False pixel")
    h, w = mask.shape
    inf = h + w

    g = np.empty((h, w), dtype=np.int64)
    g[0] = np.where(mask[0], inf, 0)
    for y in range(1, h):
        g[y] = np.where(mask[y], g[y - 1] + 1, 0)
    for y in range(h - 2, -1, -1):
        g[y] = np.minimum(g[y], g[y + 1] + 1)

    out = np.empty((h, w), dtype=np.int64)
    s = [0] * w
    t = [0] * w
    for y in range(h):
        gy = [v * v for v in g[y].tolist()]
        q = 0
        s[0] = t[0] = 0
        for u in range(1, w):
            while q >= 0 and (t[q] - s[q]) ** 2 + gy[s[q]] > (t[q] - u) ** 2 + gy[u]:
                q -= 1
            if q < 0:
                q = 0
                s[0] = u
            else:
                i = s[q]
                sep = 1 + (u * u - i * i + gy[u] - gy[i]) // (2 * (u - i))
                if sep < w:
                    q += 1
                    s[q] = u
                    t[q] = sep
        row = out[y]
        for u in range(w - 1, -1, -1):
            row[u] = (u - s[q]) ** 2 + gy[s[q]]
            if u == t[q]:
                q -= 1
    return out


def distance_transform(mask) -> np.ndarray:
    """Euclidean distance from each True pixel to the nearest False pixel."""
    return np.sqrt(distance_transform_sq(mask).astype(np.float64))
