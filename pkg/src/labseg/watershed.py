"""Marker-controlled watershed.

Label maps are ``uint32`` arrays: 0 marks watershed ridge pixels, 1..R the
regions grown from the R marker components.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from labseg import morphology as morph

RIDGE = 0

_UNLABELED = -1
_OUTSIDE = -2


@dataclass
class MarkerSet:
    foreground: np.ndarray
    background: np.ndarray
    # every connected component of foreground | background, numbered from 1
    labels: np.ndarray

    @property
    def count(self) -> int:
        return int(self.labels.max())


def watershed_flood(relief, markers, conn: int = 8) -> np.ndarray:
    """Priority-flood watershed from labeled markers.

    Pixels leave a min-heap ordered by (relief value, insertion number). A
    popped pixel looks at its already-flooded neighbors: if they carry two
    different region labels it becomes a ridge pixel (0) and stops there,
    otherwise it joins their region and queues its unvisited neighbors.
    Marker pixels keep their labels. Pixels the flood never reaches (walled
    in by ridges) end as ridge pixels too.

    Parameters
    ----------
    relief : array_like
        2-D gray map to flood.
    markers : array_like
        Integer map of the same shape; positive values are seed labels.
    conn : {4, 8}
        Pixel adjacency.
    """
    relief = np.asarray(relief, dtype=np.float64)
    markers = np.asarray(markers)
    if relief.ndim != 2 or markers.shape != relief.shape:
        raise ValueError(f"relief {relief.shape} and markers {markers.shape} must be equal 2-D shapes")
    if not np.issubdtype(markers.dtype, np.integer) and markers.dtype != bool:
        raise TypeError("markers must hold integer labels")
    if not (markers > 0).any():
        raise ValueError("marker set is empty")
    if (markers < 0).any():
        raise ValueError("marker labels must be non-negative")

    h, w = relief.shape
    stride = w + 2
    lab = np.full((h + 2, stride), _OUTSIDE, dtype=np.int64)
    lab[1:-1, 1:-1] = np.where(markers > 0, markers.astype(np.int64), _UNLABELED)
    lab = lab.ravel().tolist()
    level = np.zeros((h + 2, stride))
    level[1:-1, 1:-1] = relief
    level = level.ravel().tolist()
    queued = [False] * len(lab)
    offsets = [dy * stride + dx for dy, dx in morph.neighbor_offsets(conn)]

    heap = []
    seq = 0
    for y, x in zip(*np.nonzero(markers > 0)):
        p = (y + 1) * stride + x + 1
        for o in offsets:
            q = p + o
            if lab[q] == _UNLABELED and not queued[q]:
                queued[q] = True
                heap.append((level[q], seq, q))
                seq += 1
    heapq.heapify(heap)

    while heap:
        _, _, p = heapq.heappop(heap)
        found = 0
        ridge = False
        for o in offsets:
            l = lab[p + o]
            if l > 0:
                if found == 0:
                    found = l
                elif l != found:
                    ridge = True
                    break
        if ridge:
            lab[p] = RIDGE
            continue
        lab[p] = found
        for o in offsets:
            q = p + o
            if lab[q] == _UNLABELED and not queued[q]:
                queued[q] = True
                heapq.heappush(heap, (level[q], seq, q))
                seq += 1

    out = np.asarray(lab, dtype=np.int64).reshape(h + 2, stride)[1:-1, 1:-1]
    out = np.where(out < 0, RIDGE, out)
    return out.astype(np.uint32)


def generate_markers(gray, conn: int = 8, fg_se_radius: int = 5, min_marker_area: int = 20) -> MarkerSet:
    """Foreground and background markers for a segmentation image.

    Foreground markers are the regional maxima of the image after opening
    and then closing by reconstruction with a disk of ``fg_se_radius``;
    components under ``min_marker_area`` pixels are dropped. Background
    markers are the lines that split the Otsu background evenly between
    the Otsu objects (watershed of the distance to the nearest object pixel).
    With a single object there is no such line and the background pixels
    farthest from the object are used instead. Background pixels touching
    a foreground marker are removed so the two never merge.
    """
    gray = np.asarray(gray, dtype=np.float64)
    morph.check_connectivity(conn)
    objects = morph.binarize_otsu(gray)

    se = morph.disk(fg_se_radius)
    smoothed = morph.close_by_reconstruction(morph.open_by_reconstruction(gray, se, conn), se, conn)
    fg = morph.regional_maxima(smoothed, conn)
    fg = morph.remove_small_components(fg, min_marker_area, conn)
    if not fg.any():
        raise ValueError("no foreground markers")

    dist = morph.distance_transform(~objects)
    seeds, _ = morph.label_components(objects, conn)
    bg = watershed_flood(dist, seeds, conn) == RIDGE
    if not bg.any():
        bg = morph.regional_maxima(dist, conn) & ~objects
    bg &= ~morph.dilate(fg.astype(np.float64), morph.square(3)).astype(bool)

    labels, _ = morph.label_components(fg | bg, conn)
    return MarkerSet(foreground=fg, background=bg, labels=labels.astype(np.uint32))


def flood_with_markers(relief, markers: MarkerSet, conn: int = 8) -> np.ndarray:
    """Impose the markers as the only minima of ``relief`` and flood it."""
    imposed = morph.impose_minima(relief, markers.labels > 0, conn)
    return watershed_flood(imposed, markers.labels, conn)


def marker_watershed(relief, gray, conn: int = 8, fg_se_radius: int = 5,
                     min_marker_area: int = 20) -> np.ndarray:
    """Full marker-controlled watershed.

    ``gray`` is the image the markers are derived from (bright objects on a
    darker background); ``relief`` is the segmentation function that gets
    flooded, usually the gradient magnitude of ``gray``.
    """
    markers = generate_markers(gray, conn, fg_se_radius, min_marker_area)
    return flood_with_markers(relief, markers, conn)
