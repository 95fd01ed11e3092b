"""Plane sections of the periodic surface {4,6|4} and the section graph.

The surface is the union of unit squares ``{i} x [j, j+1] x [k, k+1]``
(and cyclic variants) with ``j + k`` odd.  It bounds the region ``N-``
made of the cubes at ``2n`` and ``2n + e_i``.  A plane ``<H, x> = a``
meets the diagonal from ``2n`` to ``2n + (1,1,1)`` when the height
``s = a - <H, 2n>`` lies in ``(0, sigma)``; these points are the vertices
of the graph ``Gamma_a``, joined through the cubes ``2n + e_i``.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from gmpy2 import mpq

from . import _kernels
from .cone_solver import H_from_w, KSequence, WidthSolution, solve_widths
from .errors import ConfigurationError, CriticalLevelError, DomainError
from .numerics import Scalar, as_scalar

__all__ = [
    "SurfaceModel",
    "FaceID",
    "ComponentSummary",
    "Polyline",
    "DirectionFit",
    "ClusterReport",
    "face_membership",
    "genus_check",
    "vertex_height",
    "vertex_active",
    "edge_active",
    "strip_vertices",
    "plane_meets_strip",
    "plane_meets_diagonal",
    "explore_component",
    "bridge_faces",
    "trace_section_curve",
    "fit_direction",
    "cluster_directions",
    "sample_components",
    "components_csv",
    "polyline_csv",
    "gamma_svg",
]


def _q(x) -> mpq:
    # gmpy2 rationals: the exact predicates run several times faster than with Fraction
    if isinstance(x, mpq):
        return x
    if isinstance(x, Scalar):
        m = x.mid if not x.is_exact else Fraction(*map(int, x.lo.as_integer_ratio()))
        return mpq(int(m.numerator), int(m.denominator))
    if isinstance(x, Fraction):
        return mpq(int(x.numerator), int(x.denominator))
    return mpq(x)


@dataclass(frozen=True)
class SurfaceModel:
    """Surface data for the direction ``H = M w / 2``.

    ``w`` is kept as exact rationals; ``chaotic`` is true when every ``w_i``
    is positive, i.e. ``H`` satisfies the triangle inequalities.
    """

    w: Tuple[mpq, mpq, mpq]

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(_q(x) for x in self.w))
        if len(self.w) != 3:
            raise DomainError("w must have 3 entries")
        if self.sigma <= 0:
            raise DomainError("w1 + w2 + w3 must be positive")

    @classmethod
    def from_w(cls, w: Sequence) -> "SurfaceModel":
        return cls(tuple(w))

    @classmethod
    def from_H(cls, H: Sequence) -> "SurfaceModel":
        H = [_q(x) for x in H]
        s = sum(H)
        return cls(tuple(s - 2 * h for h in H))

    @classmethod
    def from_solution(cls, sol: WidthSolution) -> "SurfaceModel":
        return cls(sol.exact[0])

    @cached_property
    def sigma(self) -> mpq:
        return sum(self.w)

    @cached_property
    def H(self) -> Tuple[mpq, mpq, mpq]:
        return H_from_w(self.w)

    @property
    def chaotic(self) -> bool:
        return all(x > 0 for x in self.w)

    @property
    def w_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.w])

    @property
    def H_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.H])

    def embed(self, n, s) -> np.ndarray:
        """Point of the diagonal at ``2n`` with height ``s``."""
        return 2 * np.asarray(n, float) + float(s) / float(self.sigma) * np.ones(3)

    def plane_basis(self) -> Tuple[np.ndarray, np.ndarray]:
        """Orthonormal basis of the plane ``<H, x> = 0``."""
        h = self.H_float / np.linalg.norm(self.H_float)
        t = np.array([1.0, -1.0, 0.0]) if abs(h[2]) > 0.5 else np.array([0.0, 0.0, 1.0])
        e1 = t - (t @ h) * h
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(h, e1)
        return e1, e2


# -- the surface ---------------------------------------------------------

@dataclass(frozen=True, order=True)
class FaceID:
    """Unit square normal to ``axis`` (0, 1, 2) with lowest corner ``(i, j, k)``."""

    axis: int
    i: int
    j: int
    k: int

    @property
    def corner(self) -> Tuple[int, int, int]:
        return (self.i, self.j, self.k)

    def spans(self) -> Tuple[int, int]:
        return tuple(q for q in range(3) if q != self.axis)


def face_membership(f: FaceID) -> bool:
    """True when the two interval coordinates of the square have odd sum."""
    u, v = f.spans()
    c = f.corner
    return (c[u] + c[v]) % 2 == 1


def _face_edges(f: FaceID):
    """Edges of a square as ``(direction, base point)``."""
    u, v = f.spans()
    c = list(f.corner)
    out = []
    for along, other in ((u, v), (v, u)):
        for off in (0, 1):
            p = list(c)
            p[other] += off
            out.append((along, tuple(p)))
    return out


def _face_vertices(f: FaceID):
    u, v = f.spans()
    out = []
    for du in (0, 1):
        for dv in (0, 1):
            p = list(f.corner)
            p[u] += du
            p[v] += dv
            out.append(tuple(p))
    return out


@dataclass(frozen=True)
class GenusReport:
    V: int
    E: int
    F: int
    genus: int
    faces_per_edge: Tuple[int, ...]
    faces_per_vertex: Tuple[int, ...]

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.V, self.E, self.F, self.genus)


def genus_check() -> GenusReport:
    """Cell counts of the surface in the quotient by ``2Z^3``."""
    faces = []
    for axis in range(3):
        for corner in np.ndindex(2, 2, 2):
            f = FaceID(axis, *corner)
            if face_membership(f):
                faces.append(f)
    mod = lambda p: tuple(x % 2 for x in p)  # noqa: E731
    edge_faces: Dict[tuple, int] = defaultdict(int)
    vert_faces: Dict[tuple, int] = defaultdict(int)
    for f in faces:
        for d, p in _face_edges(f):
            edge_faces[(d, mod(p))] += 1
        for p in _face_vertices(f):
            vert_faces[mod(p)] += 1
    V, E, F = len(vert_faces), len(edge_faces), len(faces)
    chi = V - E + F
    return GenusReport(
        V=V, E=E, F=F, genus=(2 - chi) // 2,
        faces_per_edge=tuple(sorted(set(edge_faces.values()))),
        faces_per_vertex=tuple(sorted(set(vert_faces.values()))),
    )


# -- the section graph ---------------------------------------------------

def vertex_height(model: SurfaceModel, n: Sequence[int], a):
    """``a - <H, 2n>``, exact for rational ``a`` and an enclosure for Scalars."""
    H = model.H
    dot = 2 * sum(h * int(x) for h, x in zip(H, n))
    if isinstance(a, Scalar) and not a.is_exact:
        return a - as_scalar(dot)
    return _q(a) - dot


def _side(x, threshold, what):
    """Sign of ``x - threshold`` or a critical-level error when undecided."""
    if isinstance(x, Scalar):
        t = as_scalar(threshold)
        if x.certainly_gt(t):
            return 1
        if x.certainly_lt(t):
            return -1
        raise CriticalLevelError(f"height enclosure straddles {what}")
    if x == threshold:
        raise CriticalLevelError(f"height equals {what}")
    return 1 if x > threshold else -1


def vertex_active(model: SurfaceModel, n: Sequence[int], a) -> bool:
    s = vertex_height(model, n, a)
    return _side(s, 0, "0") > 0 and _side(s, model.sigma, "sigma") < 0


def edge_active(model: SurfaceModel, n: Sequence[int], i: int, a) -> bool:
    """Edge from ``n`` to ``n + e_i`` (``i`` in 1..3)."""
    if i not in (1, 2, 3):
        raise DomainError("direction index must be 1, 2 or 3")
    s = vertex_height(model, n, a)
    lo = model.sigma - model.w[i - 1]
    return _side(s, lo, "sigma - w_i") > 0 and _side(s, model.sigma, "sigma") < 0


def strip_vertices(model: SurfaceModel, n: Sequence[int], i: int):
    """Corners of the strip joining the diagonals at ``2n`` and ``2n + 2e_i``."""
    n = np.array([int(x) for x in n], dtype=object)
    one = np.array([1, 1, 1], dtype=object)
    e = np.zeros(3, dtype=object)
    e[i - 1] = 1
    r = model.w[i - 1] / model.sigma
    return (
        2 * n + (1 - r) * one,
        2 * n + one,
        2 * n + 2 * e + r * one,
        2 * n + 2 * e,
    )


def plane_meets_strip(model: SurfaceModel, n: Sequence[int], i: int, a) -> bool:
    """Exact test that ``<H, x> = a`` cuts the open strip (both sides strictly)."""
    H = np.array(model.H, dtype=object)
    vals = [sum(H * v) for v in strip_vertices(model, n, i)]
    a = _q(a)
    return min(vals) < a < max(vals)


def plane_meets_diagonal(model: SurfaceModel, n: Sequence[int], a) -> bool:
    H = np.array(model.H, dtype=object)
    p0 = 2 * np.array([int(x) for x in n], dtype=object)
    v0, v1 = sum(H * p0), sum(H * (p0 + 1))
    a = _q(a)
    return min(v0, v1) < a < max(v0, v1)


# -- component exploration ----------------------------------------------

@dataclass(frozen=True)
class ComponentSummary:
    """Breadth-first exploration of one component of ``Gamma_a``.

    ``direction`` is the principal axis of the embedded vertices and
    ``residual`` the RMS distance of the vertices from that axis.
    ``qi_bounds`` are the extreme ratios of Euclidean to graph distance from
    the seed over vertices at graph distance at least ``radius / 4``.
    """

    seed: Tuple[int, int, int]
    a: float
    radius: int
    size: int
    is_tree: bool
    cycles: int
    finite: bool
    end_estimate: int
    direction: Tuple[float, float, float]
    residual: float
    qi_bounds: Tuple[float, float]


def _guard(model: SurfaceModel) -> float:
    return 1e-9 * max(1.0, float(model.sigma))


def explore_component(model: SurfaceModel, n0: Sequence[int], a, radius: int) -> ComponentSummary:
    """Explore the component of ``n0`` out to graph distance ``radius``.

    ``end_estimate`` counts the connected pieces of the shell
    ``radius/2 < d <= radius`` that reach distance ``radius``; a component
    exhausted before ``radius`` is finite and has estimate 0.
    """
    if radius < 1:
        raise DomainError("radius must be >= 1")
    if not vertex_active(model, n0, a):
        raise DomainError(f"vertex {tuple(n0)} is not active at level {a}")
    af = float(_q(a)) if not isinstance(a, Scalar) else float(a)
    verts, dist, parent, extra, status = _kernels.gamma_bfs(
        tuple(int(x) for x in n0), af, model.H_float, model.w_float,
        float(model.sigma), int(radius), _guard(model))
    if status != _kernels.BFS_OK:
        raise CriticalLevelError(f"level {af} passes within the guard band of a singular level")
    m = len(verts)
    finite = int(dist.max()) < radius

    # pieces of the shell, through tree edges and extra edges inside it
    in_shell = (dist > radius / 2) & (dist <= radius)
    root = np.arange(m)

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    edges = [(v, parent[v]) for v in range(1, m)] + [tuple(e) for e in extra]
    for u, v in edges:
        if in_shell[u] and in_shell[v]:
            ru, rv = find(u), find(v)
            if ru != rv:
                root[ru] = rv
    reach = {find(v) for v in np.nonzero(dist == radius)[0]}
    ends = 0 if finite else len(reach)

    # embedded positions lie in the plane by construction
    H = model.H_float
    s = af - 2.0 * (verts @ H)
    pos = 2.0 * verts + (s / float(model.sigma))[:, None]
    direction, residual = _principal_axis(pos)
    d0 = np.linalg.norm(pos - pos[0], axis=1)
    sel = dist >= max(1, radius // 4)
    if sel.any():
        ratios = d0[sel] / dist[sel]
        qi = (float(ratios.min()), float(ratios.max()))
    else:
        qi = (math.nan, math.nan)
    return ComponentSummary(
        seed=tuple(int(x) for x in n0), a=af, radius=int(radius), size=m,
        is_tree=len(extra) == 0, cycles=len(extra), finite=finite,
        end_estimate=ends, direction=tuple(float(x) for x in direction), residual=residual, qi_bounds=qi,
    )


def _principal_axis(pos: np.ndarray) -> Tuple[np.ndarray, float]:
    if len(pos) < 2:
        return np.array([math.nan] * 3), 0.0
    c = pos - pos.mean(axis=0)
    _, sv, vt = np.linalg.svd(c, full_matrices=False)
    d = vt[0]
    # sign convention: first nonzero coordinate positive
    nz = np.nonzero(np.abs(d) > 1e-12)[0]
    if len(nz) and d[nz[0]] < 0:
        d = -d
    perp = c - np.outer(c @ d, d)
    return d, float(np.sqrt((perp ** 2).sum(axis=1).mean()))


def seed_vertex(model: SurfaceModel, a, n1: int, n2: int) -> Tuple[int, int, int]:
    """Smallest ``n3`` making ``(n1, n2, n3)`` an active vertex at level ``a``."""
    H = model.H
    a = _q(a)
    # need 0 < a - 2(H1 n1 + H2 n2 + H3 n3) < sigma
    rest = a - 2 * (H[0] * n1 + H[1] * n2)
    n3 = math.floor((rest - model.sigma) / (2 * H[2])) + 1
    while not (0 < rest - 2 * H[2] * n3 < model.sigma):
        n3 += 1
    return (n1, n2, n3)


# -- tracing -------------------------------------------------------------

@dataclass(frozen=True)
class Polyline:
    points: np.ndarray
    faces: np.ndarray
    a: float
    closed: bool
    status: str

    def __len__(self):
        return len(self.points)

    def plane_residual(self, model: SurfaceModel) -> float:
        return float(np.abs(self.points @ model.H_float - self.a).max())


def _face_values(model, f: FaceID):
    H = model.H
    return [sum(h * x for h, x in zip(H, p)) for p in _face_vertices(f)]


def bridge_faces(model: SurfaceModel, n: Sequence[int], i: int) -> List[FaceID]:
    """Surface squares on the boundary of the bridge cube ``2n + e_i``."""
    base = [2 * int(x) for x in n]
    base[i - 1] += 1
    out = []
    for j in range(3):
        if j == i - 1:
            continue
        for off in (0, 1):
            c = list(base)
            c[j] += off
            f = FaceID(j, *c)
            if face_membership(f):
                out.append(f)
    return out


def start_point(model: SurfaceModel, f: FaceID, a) -> Optional[np.ndarray]:
    """Midpoint of the chord the plane cuts from face ``f``, or None when it misses."""
    a = _q(a)
    vals = _face_values(model, f)
    if not (min(vals) < a < max(vals)):
        return None
    u, v = f.spans()
    H = model.H
    corner = [Fraction(x) for x in f.corner]
    pts = []
    # chord endpoints on the four edges
    for along, other in ((u, v), (v, u)):
        for off in (0, 1):
            p = list(corner)
            p[other] += off
            rest = a - sum(H[q] * p[q] for q in range(3) if q != along)
            t = rest / H[along] - p[along] if H[along] != 0 else None
            if t is not None and 0 <= t <= 1:
                p[along] += t
                pts.append(p)
    if len(pts) < 2:
        return None
    mid = [(x + y) / 2 for x, y in zip(pts[0], pts[-1])]
    return np.array([float(x) for x in mid])


def trace_section_curve(model: SurfaceModel, f0: FaceID, p0, steps: int, a=None) -> Polyline:
    """Follow the section through ``p0`` on face ``f0`` for ``steps`` face crossings.

    Raises :class:`CriticalLevelError` when the curve runs into a lattice
    vertex.  A return to the first crossing point ends the curve early and
    marks it closed.
    """
    if not face_membership(f0):
        raise DomainError(f"{f0} is not a face of the surface")
    p0 = np.asarray(p0, float)
    Hf = model.H_float
    if a is None:
        a = float(p0 @ Hf)
    a = float(a)
    pts, faces, status = _kernels.trace_curve(
        f0.axis, f0.corner, p0, Hf, a, int(steps), 1e-12)
    if status == _kernels.TRACE_VERTEX:
        raise CriticalLevelError("section curve runs into a singular vertex")
    return Polyline(points=pts, faces=faces, a=a, closed=status == _kernels.TRACE_CLOSED,
                    status="closed" if status == _kernels.TRACE_CLOSED else "open")


@dataclass(frozen=True)
class DirectionFit:
    direction: Tuple[float, float, float]
    residual: float
    score: float
    displacement: float


def fit_direction(poly) -> DirectionFit:
    """Direction of the total displacement and the largest deviation from it.

    ``score`` is the displacement divided by the largest distance reached
    from the start (1 for a straight segment).
    """
    pts = np.asarray(poly.points if isinstance(poly, Polyline) else poly, float)
    if len(pts) < 10:
        raise DomainError("need at least 10 points")
    D = pts[-1] - pts[0]
    L = float(np.linalg.norm(D))
    if L == 0.0:
        raise DomainError("zero displacement: direction undefined")
    d = D / L
    rel = pts - pts[0]
    perp = rel - np.outer(rel @ d, d)
    resid = float(np.linalg.norm(perp, axis=1).max())
    far = float(np.linalg.norm(rel, axis=1).max())
    return DirectionFit(tuple(d), resid, L / far, L)


# -- sampling ------------------------------------------------------------

@dataclass(frozen=True)
class ClusterReport:
    """Clusters of fitted directions on the unit circle of the plane ``<H, x> = 0``."""

    directions: Tuple[Tuple[float, float, float], ...]
    angles: Tuple[float, ...]
    clusters: Tuple[Tuple[int, ...], ...]
    centers: Tuple[float, ...]
    spreads: Tuple[float, ...]
    antipodal: bool
    max_h_component: float
    components: Tuple[ComponentSummary, ...] = ()
    levels: Tuple[float, ...] = ()
    fits: Tuple[DirectionFit, ...] = ()

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)


def _angle_diff(x: float, y: float) -> float:
    d = (x - y) % 360.0
    return min(d, 360.0 - d)


def cluster_directions(model: SurfaceModel, directions: Sequence[Sequence[float]],
                       gap_deg: float = 10.0) -> ClusterReport:
    """Single-linkage clusters of direction angles split at gaps above ``gap_deg``."""
    e1, e2 = model.plane_basis()
    dirs = [np.asarray(d, float) / np.linalg.norm(d) for d in directions]
    h = model.H_float / np.linalg.norm(model.H_float)
    hmax = max((abs(float(d @ h)) for d in dirs), default=0.0)
    ang = [math.degrees(math.atan2(float(d @ e2), float(d @ e1))) % 360.0 for d in dirs]
    if not ang:
        return ClusterReport((), (), (), (), (), False, 0.0)
    order = sorted(range(len(ang)), key=lambda j: ang[j])
    groups: List[List[int]] = [[order[0]]]
    for prev, cur in zip(order, order[1:]):
        if ang[cur] - ang[prev] > gap_deg:
            groups.append([cur])
        else:
            groups[-1].append(cur)
    if len(groups) > 1 and (ang[order[0]] + 360.0 - ang[order[-1]]) <= gap_deg:
        groups[0] = groups.pop() + groups[0]
    centers, spreads = [], []
    for g in groups:
        vec = sum(np.array([math.cos(math.radians(ang[j])), math.sin(math.radians(ang[j]))]) for j in g)
        c = math.degrees(math.atan2(vec[1], vec[0])) % 360.0
        centers.append(c)
        spreads.append(max(_angle_diff(ang[j], c) for j in g))
    antipodal = len(groups) == 2 and abs(_angle_diff(centers[0], centers[1]) - 180.0) < 5.0
    return ClusterReport(
        directions=tuple(tuple(float(x) for x in d) for d in dirs),
        angles=tuple(ang),
        clusters=tuple(tuple(sorted(g)) for g in groups),
        centers=tuple(centers),
        spreads=tuple(spreads),
        antipodal=antipodal,
        max_h_component=hmax,
    )


def _component_job(model, a, n, radius, steps):
    summary = explore_component(model, n, a, radius)
    fit = None
    if steps:
        # first active edge at the seed, then a bridge face the plane crosses
        for i in (1, 2, 3):
            for m, j in ((n, i), (tuple(x - (q == i - 1) for q, x in enumerate(n)), i)):
                try:
                    if not edge_active(model, m, j, a):
                        continue
                except CriticalLevelError:
                    continue
                for f in bridge_faces(model, m, j):
                    p0 = start_point(model, f, a)
                    if p0 is not None:
                        poly = trace_section_curve(model, f, p0, steps, a=float(a))
                        if not poly.closed and len(poly) >= 10:
                            fit = fit_direction(poly)
                            return summary, fit
    return summary, fit


def sample_components(ks: KSequence, depth: int, a_count: int, radius: int,
                      per_level: int = 3, steps: int = 0, seed: int = 0,
                      threads: int = 1, model: Optional[SurfaceModel] = None,
                      jitter: bool = False, levels: Optional[Sequence] = None) -> ClusterReport:
    """Explore ``per_level`` random components on each of ``a_count`` random levels.

    With ``steps > 0`` each component also gets a traced boundary curve and
    the clusters are formed from the curves' displacement directions;
    otherwise from the principal axes of the explored vertex sets.  Levels
    hitting the guard band of a singular value raise unless ``jitter`` is
    set, in which case the level is nudged.  Explicit ``levels`` replace
    the ``a_count`` random ones.
    """
    if model is None:
        if not ks.summable:
            raise ConfigurationError("sampling needs a summable k-sequence")
        model = SurfaceModel.from_solution(solve_widths(ks, depth, tol=1e300))
    rng = np.random.default_rng(seed)
    sigma = float(model.sigma)
    if levels is None:
        levels = [Fraction(float(rng.uniform(0.0, sigma))) for _ in range(a_count)]
    else:
        levels = [_q(a) for a in levels]
    if not levels:
        return cluster_directions(model, [])
    jobs = []
    for a in levels:
        for _ in range(per_level):
            n1, n2 = (int(x) for x in rng.integers(-1000, 1000, size=2))
            jobs.append((a, seed_vertex(model, a, n1, n2)))

    def run(job):
        a, n = job
        attempts = 0
        while True:
            try:
                return _component_job(model, a, n, radius, steps)
            except CriticalLevelError:
                if not jitter or attempts > 5:
                    raise
                attempts += 1
                a = a + Fraction(1, 10**7)
                n = seed_vertex(model, a, n[0], n[1])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    summaries = tuple(r[0] for r in results)
    fits = tuple(r[1] for r in results if r[1] is not None)
    if steps:
        dirs = [f.direction for f in fits]
    else:
        dirs = [s.direction for s in summaries if not s.finite]
    rep = cluster_directions(model, dirs)
    return ClusterReport(**{**rep.__dict__, "components": summaries,
                            "levels": tuple(float(a) for a in levels), "fits": fits})


# -- output --------------------------------------------------------------

def _header(buf, header):
    for h in header:
        buf.write(f"# {h}\n")


def components_csv(summaries: Sequence[ComponentSummary], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    _header(buf, header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "seed_n1", "seed_n2", "seed_n3", "size", "is_tree", "end_estimate",
                "dir_x", "dir_y", "dir_z", "residual"])
    for s in summaries:
        w.writerow([repr(s.a), *s.seed, s.size, int(s.is_tree), s.end_estimate,
                    *(f"{x:.12g}" for x in s.direction), f"{s.residual:.12g}"])
    return buf.getvalue()


def polyline_csv(poly: Polyline, header: Sequence[str] = (), stride: int = 1) -> str:
    buf = io.StringIO()
    _header(buf, header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "x", "y", "z"])
    for i in range(0, len(poly.points), stride):
        x, y, z = poly.points[i]
        w.writerow([i, repr(float(x)), repr(float(y)), repr(float(z))])
    return buf.getvalue()


def gamma_svg(model: SurfaceModel, n0: Sequence[int], a, radius: int, size: int = 600) -> str:
    """Static SVG of a patch of ``Gamma_a`` projected orthogonally onto the plane."""
    af = float(_q(a))
    verts, dist, parent, extra, status = _kernels.gamma_bfs(
        tuple(int(x) for x in n0), af, model.H_float, model.w_float,
        float(model.sigma), int(radius), _guard(model))
    if status != _kernels.BFS_OK:
        raise CriticalLevelError("level too close to a singular value")
    s = af - 2.0 * (verts @ model.H_float)
    pos = 2.0 * verts + (s / float(model.sigma))[:, None]
    e1, e2 = model.plane_basis()
    xy = np.stack([pos @ e1, pos @ e2], axis=1)
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    scale = (size - 20) / max(float((hi - lo).max()), 1e-9)
    pix = (xy - lo) * scale + 10
    pix[:, 1] = size - pix[:, 1]
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    edges = [(v, int(parent[v])) for v in range(1, len(verts))] + [tuple(e) for e in extra]
    for u, v in edges:
        lines.append(f'<line x1="{pix[u, 0]:.2f}" y1="{pix[u, 1]:.2f}" x2="{pix[v, 0]:.2f}" '
                     f'y2="{pix[v, 1]:.2f}" stroke="black" stroke-width="1"/>')
    for x, y in pix:
        lines.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.5" fill="steelblue"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
