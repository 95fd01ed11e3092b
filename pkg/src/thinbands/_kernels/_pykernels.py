"""Pure-Python hot loops.  The compiled module mirrors these signatures."""

from __future__ import annotations

import math
from collections import deque

import numpy as np

# tracer status codes
TRACE_OK = 0
TRACE_CLOSED = 1
TRACE_VERTEX = 2

# BFS status codes
BFS_OK = 0
BFS_CRITICAL = 1


def iet_orbit(lens, rows, top_s, bot_t, bot_s, t0, o0, n):
    """Follow an exchange orbit for ``n`` points.

    Returns transversal indices, offsets and top labels (0-based) of the
    points ``p_0 .. p_{n-1}`` and a flag that is False when the orbit left
    its transversal through rounding or landed on a breakpoint.
    """
    lens = [float(x) for x in lens]
    top_s = [float(x) for x in top_s]
    bot_t = [int(x) for x in bot_t]
    bot_s = [float(x) for x in bot_s]
    rows_l = [[int(x) for x in r if x >= 0] for r in np.asarray(rows)]
    ends = [top_s[r[-1]] + lens[r[-1]] for r in rows_l]
    ts = np.empty(n, dtype=np.int64)
    offs = np.empty(n, dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    t, o = int(t0), float(o0)
    for i in range(n):
        if not (0.0 < o < ends[t]):
            return ts[:i], offs[:i], labels[:i], False
        lab = -1
        for l in rows_l[t]:
            if o < top_s[l] + lens[l]:
                lab = l
                break
        if lab < 0 or o == top_s[lab]:
            return ts[:i], offs[:i], labels[:i], False
        ts[i], offs[i], labels[i] = t, o, lab
        o = o - top_s[lab] + bot_s[lab]
        t = bot_t[lab]
    return ts, offs, labels, True


def gamma_bfs(n0, a, H, w, sigma, radius, guard):
    """Breadth-first search of the component of ``n0`` in the section graph.

    A vertex ``n`` has height ``s = a - 2<H, n>``; the edge ``(n, i)`` to
    ``n + e_i`` is present when ``s > sigma - w_i``, and the edge from
    ``n - e_i`` when ``s < w_i``.  Heights within ``guard`` of a threshold
    abort the search with ``BFS_CRITICAL``.

    Returns ``(vertices (m,3), dist (m,), parent (m,), extra_edges (e,2),
    status)`` where ``extra_edges`` are non-tree edges met during the search.
    """
    H0, H1, H2 = (float(x) for x in H)
    w = [float(x) for x in w]
    sigma = float(sigma)
    a = float(a)
    thr = [sigma - wi for wi in w]

    def height(n):
        return a - 2.0 * (H0 * n[0] + H1 * n[1] + H2 * n[2])

    start = (int(n0[0]), int(n0[1]), int(n0[2]))
    s0 = height(start)
    if abs(s0) < guard or abs(s0 - sigma) < guard:
        return np.zeros((0, 3), np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros((0, 2), np.int64), BFS_CRITICAL
    index = {start: 0}
    verts = [start]
    dist = [0]
    parent = [-1]
    extra = set()
    q = deque([0])
    while q:
        u = q.popleft()
        if dist[u] >= radius:
            continue
        n = verts[u]
        s = height(n)
        for i in range(3):
            for sgn in (1, -1):
                if sgn > 0:
                    gap = s - thr[i]
                else:
                    gap = w[i] - s
                if abs(gap) < guard:
                    return (np.array(verts, np.int64).reshape(-1, 3), np.array(dist, np.int64),
                            np.array(parent, np.int64), np.array(sorted(extra), np.int64).reshape(-1, 2), BFS_CRITICAL)
                if gap <= 0:
                    continue
                m = list(n)
                m[i] += sgn
                m = tuple(m)
                j = index.get(m)
                if j is None:
                    index[m] = len(verts)
                    verts.append(m)
                    dist.append(dist[u] + 1)
                    parent.append(u)
                    q.append(len(verts) - 1)
                elif j != parent[u]:
                    extra.add((min(u, j), max(u, j)))
    return (np.array(verts, np.int64).reshape(-1, 3), np.array(dist, np.int64),
            np.array(parent, np.int64), np.array(sorted(extra), np.int64).reshape(-1, 2), BFS_OK)


def _in_surface(c, idx):
    u, v = [q for q in range(3) if q != c]
    return (idx[u] + idx[v]) % 2 == 1


def trace_curve(c, idx, p, H, a, steps, tol):
    """Follow the plane section ``<H, x> = a`` across the square faces.

    ``c`` is the axis normal to the starting face and ``idx`` its integer
    corner (``idx[c]`` is the face's fixed coordinate).  The direction of
    travel on a face with unit normal ``n`` (pointing from the even-corner
    side to the odd-corner side) is ``n x H``.  Each crossing point is
    re-projected onto the plane along the crossed edge.

    Returns ``(points (m,3), faces (m,4), status)``; ``faces[j]`` is the
    face ``(axis, i, j, k)`` entered at ``points[j]``.
    """
    H = [float(x) for x in H]
    a = float(a)
    idx = [int(x) for x in idx]
    c = int(c)
    p = [float(x) for x in p]
    pts = np.empty((steps + 1, 3))
    faces = np.empty((steps + 1, 4), dtype=np.int64)
    pts[0] = p
    faces[0] = (c, idx[0], idx[1], idx[2])
    first = None
    for st in range(1, steps + 1):
        nsign = 1.0 if idx[c] % 2 else -1.0
        # d = n x H with n = nsign * e_c
        d = [0.0, 0.0, 0.0]
        c1, c2 = (c + 1) % 3, (c + 2) % 3
        d[c1] = -nsign * H[c2]
        d[c2] = nsign * H[c1]
        tbest = math.inf
        hit = None
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
                tbest, hit = t, (ax, side)
        ax, side = hit
        o = c1 if ax == c2 else c2
        eax = idx[ax] + (1 if side > 0 else 0)
        q = [0.0, 0.0, 0.0]
        q[c] = float(idx[c])
        q[ax] = float(eax)
        q[o] = (a - H[c] * q[c] - H[ax] * q[ax]) / H[o]
        frac = q[o] - math.floor(q[o])
        if min(frac, 1.0 - frac) < tol:
            return pts[:st], faces[:st], TRACE_VERTEX
        p = q
        # the three squares sharing the crossed edge, other than the current one
        nxt = None
        for lc in (idx[c] - 1, idx[c]):
            f = [0, 0, 0]
            f[ax], f[c], f[o] = eax, lc, idx[o]
            if _in_surface(ax, f):
                nxt = (ax, f)
        f = [0, 0, 0]
        f[c], f[o] = idx[c], idx[o]
        f[ax] = eax if side > 0 else eax - 1
        if _in_surface(c, f):
            nxt = (c, f)
        c, idx = nxt
        pts[st] = p
        faces[st] = (c, idx[0], idx[1], idx[2])
        key = (c, idx[0], idx[1], idx[2])
        if first is None:
            first = (key, tuple(p))
        elif key == first[0] and max(abs(p[j] - first[1][j]) for j in range(3)) < tol:
            return pts[: st + 1], faces[: st + 1], TRACE_CLOSED
    return pts, faces, TRACE_OK
