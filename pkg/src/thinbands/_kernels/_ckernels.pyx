# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled versions of the hot loops in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs, INFINITY
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector
from libcpp.pair cimport pair
from libcpp.set cimport set as cset
from cython.operator cimport dereference as deref

cnp.import_array()

cdef long long PACK_OFF = 1 << 20
cdef long long PACK_BITS = 21


cdef inline long long _pack(long long x, long long y, long long z) nogil:
    return ((x + PACK_OFF) << (2 * PACK_BITS)) | ((y + PACK_OFF) << PACK_BITS) | (z + PACK_OFF)


def iet_orbit(lens, rows, top_s, bot_t, bot_s, long t0, double o0, long n):
    cdef double[::1] L = np.ascontiguousarray(lens, dtype=np.float64)
    cdef long long[:, ::1] R = np.ascontiguousarray(rows, dtype=np.int64)
    cdef double[::1] TS = np.ascontiguousarray(top_s, dtype=np.float64)
    cdef long long[::1] BT = np.ascontiguousarray(bot_t, dtype=np.int64)
    cdef double[::1] BS = np.ascontiguousarray(bot_s, dtype=np.float64)
    cdef Py_ssize_t nt = R.shape[0], width = R.shape[1]
    ends_np = np.zeros(nt)
    cdef double[::1] ends = ends_np
    cdef Py_ssize_t b, j, i
    cdef long long last
    for b in range(nt):
        last = -1
        for j in range(width):
            if R[b, j] >= 0:
                last = R[b, j]
        ends[b] = TS[last] + L[last]
    ts_np = np.empty(n, dtype=np.int64)
    offs_np = np.empty(n, dtype=np.float64)
    lab_np = np.empty(n, dtype=np.int64)
    cdef long long[::1] ts = ts_np
    cdef double[::1] offs = offs_np
    cdef long long[::1] labs = lab_np
    cdef long t = t0
    cdef double o = o0
    cdef long long lab, l
    for i in range(n):
        if not (0.0 < o < ends[t]):
            return ts_np[:i], offs_np[:i], lab_np[:i], False
        lab = -1
        for j in range(width):
            l = R[t, j]
            if l < 0:
                break
            if o < TS[l] + L[l]:
                lab = l
                break
        if lab < 0 or o == TS[lab]:
            return ts_np[:i], offs_np[:i], lab_np[:i], False
        ts[i] = t
        offs[i] = o
        labs[i] = lab
        o = o - TS[lab] + BS[lab]
        t = BT[lab]
    return ts_np, offs_np, lab_np, True


def gamma_bfs(n0, double a, H, w, double sigma, long radius, double guard):
    cdef double H0 = H[0], H1 = H[1], H2 = H[2]
    cdef double w_[3]
    cdef double thr[3]
    cdef int i, sgn
    for i in range(3):
        w_[i] = w[i]
        thr[i] = sigma - w_[i]
    cdef unordered_map[long long, long] index
    cdef vector[long long] vx, vy, vz
    cdef vector[long] dist, parent
    cdef cset[pair[long, long]] extra
    cdef long long x = n0[0], y = n0[1], z = n0[2]
    cdef double s = a - 2.0 * (H0 * x + H1 * y + H2 * z)
    cdef int status = 0
    if fabs(s) < guard or fabs(s - sigma) < guard:
        status = 1
    else:
        index[_pack(x, y, z)] = 0
        vx.push_back(x); vy.push_back(y); vz.push_back(z)
        dist.push_back(0); parent.push_back(-1)
    cdef long head = 0, u, j
    cdef long long m[3]
    cdef double gap
    cdef long long key
    cdef unordered_map[long long, long].iterator it
    while status == 0 and head < <long>vx.size():
        u = head
        head += 1
        if dist[u] >= radius:
            continue
        s = a - 2.0 * (H0 * vx[u] + H1 * vy[u] + H2 * vz[u])
        for i in range(3):
            for sgn in (1, -1):
                if sgn > 0:
                    gap = s - thr[i]
                else:
                    gap = w_[i] - s
                if fabs(gap) < guard:
                    status = 1
                    break
                if gap <= 0:
                    continue
                m[0] = vx[u]; m[1] = vy[u]; m[2] = vz[u]
                m[i] += sgn
                key = _pack(m[0], m[1], m[2])
                it = index.find(key)
                if it == index.end():
                    j = <long>vx.size()
                    index[key] = j
                    vx.push_back(m[0]); vy.push_back(m[1]); vz.push_back(m[2])
                    dist.push_back(dist[u] + 1)
                    parent.push_back(u)
                else:
                    j = deref(it).second
                    if j != parent[u]:
                        if u < j:
                            extra.insert(pair[long, long](u, j))
                        else:
                            extra.insert(pair[long, long](j, u))
            if status:
                break
    cdef Py_ssize_t nv = vx.size(), k
    verts = np.empty((nv, 3), dtype=np.int64)
    dist_np = np.empty(nv, dtype=np.int64)
    par_np = np.empty(nv, dtype=np.int64)
    cdef long long[:, ::1] V = verts
    cdef long long[::1] D = dist_np
    cdef long long[::1] P = par_np
    for k in range(nv):
        V[k, 0] = vx[k]; V[k, 1] = vy[k]; V[k, 2] = vz[k]
        D[k] = dist[k]; P[k] = parent[k]
    ext = np.array([(e.first, e.second) for e in extra], dtype=np.int64).reshape(-1, 2)
    return verts, dist_np, par_np, ext, status


cdef inline bint _in_surface(int c, long long* idx) nogil:
    cdef int u = (c + 1) % 3, v = (c + 2) % 3
    return ((idx[u] + idx[v]) % 2 + 2) % 2 == 1


def trace_curve(int c, idx_in, p_in, H_in, double a, long steps, double tol):
    cdef double H[3]
    cdef double p[3]
    cdef double q[3]
    cdef double d[3]
    cdef long long idx[3]
    cdef long long f[3]
    cdef long long nidx[3]
    cdef int k
    for k in range(3):
        H[k] = H_in[k]
        p[k] = p_in[k]
        idx[k] = idx_in[k]
    pts_np = np.empty((steps + 1, 3), dtype=np.float64)
    faces_np = np.empty((steps + 1, 4), dtype=np.int64)
    cdef double[:, ::1] pts = pts_np
    cdef long long[:, ::1] faces = faces_np
    for k in range(3):
        pts[0, k] = p[k]
    faces[0, 0] = c; faces[0, 1] = idx[0]; faces[0, 2] = idx[1]; faces[0, 3] = idx[2]
    cdef bint have_first = False
    cdef long long first_key[4]
    cdef double first_p[3]
    cdef long st
    cdef int c1, c2, ax, side, o, hit_ax, hit_side, nc, lc
    cdef double nsign, t, tbest, frac
    cdef long long eax
    for st in range(1, steps + 1):
        nsign = 1.0 if ((idx[c] % 2) + 2) % 2 == 1 else -1.0
        c1 = (c + 1) % 3
        c2 = (c + 2) % 3
        d[c] = 0.0
        d[c1] = -nsign * H[c2]
        d[c2] = nsign * H[c1]
        tbest = INFINITY
        hit_ax = -1
        hit_side = 0
        for ax in (c1, c2):
            if d[ax] > 0:
                t = (idx[ax] + 1 - p[ax]) / d[ax]
                side = 1
            elif d[ax] < 0:
                t = (idx[ax] - p[ax]) / d[ax]
                side = -1
            else:
                continue
            if t < tbest:
                tbest = t
                hit_ax = ax
                hit_side = side
        ax = hit_ax
        side = hit_side
        o = c1 if ax == c2 else c2
        eax = idx[ax] + (1 if side > 0 else 0)
        q[c] = <double>idx[c]
        q[ax] = <double>eax
        q[o] = (a - H[c] * q[c] - H[ax] * q[ax]) / H[o]
        frac = q[o] - floor(q[o])
        if frac < tol or 1.0 - frac < tol:
            return pts_np[:st], faces_np[:st], 2
        for k in range(3):
            p[k] = q[k]
        nc = -1
        for lc in range(2):
            f[ax] = eax
            f[c] = idx[c] - 1 + lc
            f[o] = idx[o]
            if _in_surface(ax, f):
                nc = ax
                nidx[0] = f[0]; nidx[1] = f[1]; nidx[2] = f[2]
        f[c] = idx[c]
        f[o] = idx[o]
        f[ax] = eax if side > 0 else eax - 1
        if _in_surface(c, f):
            nc = c
            nidx[0] = f[0]; nidx[1] = f[1]; nidx[2] = f[2]
        c = nc
        idx[0] = nidx[0]; idx[1] = nidx[1]; idx[2] = nidx[2]
        for k in range(3):
            pts[st, k] = p[k]
        faces[st, 0] = c; faces[st, 1] = idx[0]; faces[st, 2] = idx[1]; faces[st, 3] = idx[2]
        if not have_first:
            have_first = True
            first_key[0] = c; first_key[1] = idx[0]; first_key[2] = idx[1]; first_key[3] = idx[2]
            for k in range(3):
                first_p[k] = p[k]
        elif (first_key[0] == c and first_key[1] == idx[0] and first_key[2] == idx[1]
              and first_key[3] == idx[2] and fabs(p[0] - first_p[0]) < tol
              and fabs(p[1] - first_p[1]) < tol and fabs(p[2] - first_p[2]) < tol):
            return pts_np[:st + 1], faces_np[:st + 1], 1
    return pts_np, faces_np, 0
