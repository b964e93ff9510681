# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled resampling kernels. Mirrors ``_fallback`` exactly; see there for
the contract of each function."""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, isfinite

cnp.import_array()


cdef inline double _fetch_zero(const double[:, :, ::1] img, Py_ssize_t h,
                               Py_ssize_t w, Py_ssize_t y, Py_ssize_t x,
                               Py_ssize_t c) noexcept nogil:
    if x < 0 or x >= w or y < 0 or y >= h:
        return 0.0
    return img[y, x, c]


cdef inline Py_ssize_t _wrap(Py_ssize_t i, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t r = i % n
    if r < 0:
        r += n
    return r


def warp_bilinear(const double[:, :, ::1] img, const double[:, ::1] hom,
                  Py_ssize_t out_h, Py_ssize_t out_w, bint periodic=False):
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t nc = img.shape[2]
    out_arr = np.zeros((out_h, out_w, nc), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef double h00 = hom[0, 0], h01 = hom[0, 1], h02 = hom[0, 2]
    cdef double h10 = hom[1, 0], h11 = hom[1, 1], h12 = hom[1, 2]
    cdef double h20 = hom[2, 0], h21 = hom[2, 1], h22 = hom[2, 2]
    cdef Py_ssize_t x, y, c, x0, y0, x1, y1
    cdef double denom, sx, sy, tx, ty, v00, v01, v10, v11
    with nogil:
        for y in range(out_h):
            for x in range(out_w):
                denom = h20 * x + h21 * y + h22
                if denom <= 0.0:
                    continue
                sx = (h00 * x + h01 * y + h02) / denom
                sy = (h10 * x + h11 * y + h12) / denom
                if not (isfinite(sx) and isfinite(sy)):
                    continue
                x0 = <Py_ssize_t>floor(sx)
                y0 = <Py_ssize_t>floor(sy)
                tx = sx - x0
                ty = sy - y0
                x1 = x0 + 1
                y1 = y0 + 1
                if periodic:
                    for c in range(nc):
                        v00 = img[_wrap(y0, h), _wrap(x0, w), c]
                        v01 = img[_wrap(y0, h), _wrap(x1, w), c]
                        v10 = img[_wrap(y1, h), _wrap(x0, w), c]
                        v11 = img[_wrap(y1, h), _wrap(x1, w), c]
                        out[y, x, c] = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) \
                            + ty * ((1.0 - tx) * v10 + tx * v11)
                else:
                    if x1 < 0 or x0 >= w or y1 < 0 or y0 >= h:
                        continue
                    for c in range(nc):
                        v00 = _fetch_zero(img, h, w, y0, x0, c)
                        v01 = _fetch_zero(img, h, w, y0, x1, c)
                        v10 = _fetch_zero(img, h, w, y1, x0, c)
                        v11 = _fetch_zero(img, h, w, y1, x1, c)
                        out[y, x, c] = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) \
                            + ty * ((1.0 - tx) * v10 + tx * v11)
    return out_arr


def gather_bilinear(const double[:, :, ::1] img, const double[:, ::1] xs,
                    const double[:, ::1] ys):
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t nc = img.shape[2]
    cdef Py_ssize_t out_h = xs.shape[0]
    cdef Py_ssize_t out_w = xs.shape[1]
    out_arr = np.empty((out_h, out_w, nc), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t x, y, c, x0, y0, x1, y1
    cdef double sx, sy, tx, ty
    with nogil:
        for y in range(out_h):
            for x in range(out_w):
                sx = xs[y, x]
                sy = ys[y, x]
                if sx < 0.0:
                    sx = 0.0
                elif sx > w - 1.0:
                    sx = w - 1.0
                if sy < 0.0:
                    sy = 0.0
                elif sy > h - 1.0:
                    sy = h - 1.0
                x0 = <Py_ssize_t>floor(sx)
                y0 = <Py_ssize_t>floor(sy)
                tx = sx - x0
                ty = sy - y0
                x1 = x0 + 1
                if x1 > w - 1:
                    x1 = w - 1
                y1 = y0 + 1
                if y1 > h - 1:
                    y1 = h - 1
                for c in range(nc):
                    out[y, x, c] = (1.0 - ty) * ((1.0 - tx) * img[y0, x0, c]
                                                 + tx * img[y0, x1, c]) \
                        + ty * ((1.0 - tx) * img[y1, x0, c]
                                + tx * img[y1, x1, c])
    return out_arr


def donor_search(const cnp.uint8_t[:, ::1] eligible,
                 const cnp.uint8_t[:, ::1] needs, int radius):
    cdef Py_ssize_t h = eligible.shape[0]
    cdef Py_ssize_t w = eligible.shape[1]
    flow_arr = np.zeros((h, w, 2), dtype=np.float64)
    cdef double[:, :, ::1] flow = flow_arr
    cdef Py_ssize_t x, y
    cdef int r, dx, dy, sx, sy
    cdef bint found
    with nogil:
        for y in range(h):
            for x in range(w):
                if not needs[y, x]:
                    continue
                found = False
                for r in range(1, radius + 1):
                    for dy in range(-r, r + 1):
                        for dx in range(-r, r + 1):
                            if max(abs(dx), abs(dy)) != r:
                                continue
                            sx = <int>x + dx
                            sy = <int>y + dy
                            if sx < 0 or sx >= w or sy < 0 or sy >= h:
                                continue
                            if eligible[sy, sx]:
                                flow[y, x, 0] = dx
                                flow[y, x, 1] = dy
                                found = True
                                break
                        if found:
                            break
                    if found:
                        break
    return flow_arr
