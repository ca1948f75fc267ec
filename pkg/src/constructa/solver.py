"""Numerical machinery for placement recovery from ranges.

Unknown is the rigid transform (dx, dy, phi) placing the vehicle-frame
trajectory in the world. Residual k is the predicted minus measured range of
sample k. The module offers Levenberg-Marquardt polishing, quasi-random
multistart, and a dense grid oracle over the full transform space that
clusters the near-zero residual region, polishes representatives per cluster
and decides between isolated solutions and continuous families.

The oracle trades speed for trustworthiness: it never reasons about geometry,
only about where the residual vanishes, so analytic results can be checked
against it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.stats import qmc

from .errors import NonPositiveInput, SchemaError
from .geom import RigidTransform2, angle_diff, wrap_angle
from .scenario import Scenario

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class IndClass:
    """Cardinality of the indistinguishable placement set.

    `count` is the number of isolated solutions, or of disjoint family
    branches when `family_dim` > 0. `family_dim` is the manifold dimension of
    each branch (0 isolated, 1 curve, 2 surface).
    """

    count: int
    family_dim: int = 0

    def __post_init__(self):
        if self.count < 0 or self.family_dim not in (0, 1, 2):
            raise NonPositiveInput(f"invalid class ({self.count}, {self.family_dim})")

    @staticmethod
    def finite(n: int) -> "IndClass":
        return IndClass(n, 0)

    @staticmethod
    def family(dim: int, branches: int = 1) -> "IndClass":
        return IndClass(branches, dim)

    @property
    def is_unique(self) -> bool:
        return self.count == 1 and self.family_dim == 0

    @property
    def is_finite(self) -> bool:
        return self.family_dim == 0

    def render(self) -> str:
        parts = []
        if self.family_dim == 0 or self.count != 1:
            parts.append(str(self.count))
        parts.extend(["∞"] * self.family_dim)
        return "Ind(" + "×".join(parts) + ")"

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class SolverConfig:
    n_starts: int = 64
    max_iter: int = 80
    accept_tol: float = 1e-7
    dedup_xy: float = 1e-5
    dedup_phi: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1 or self.max_iter < 1:
            raise NonPositiveInput("n_starts and max_iter must be positive")
        if min(self.accept_tol, self.dedup_xy, self.dedup_phi) <= 0.0:
            raise NonPositiveInput("tolerances must be positive")


@dataclass(frozen=True)
class GridSpec:
    """Oracle grid: xy half-width (None = derived bound) and cell counts."""

    extent: float | None = None
    nxy: int = 201
    phi_cells: int = 360

    def __post_init__(self):
        if self.nxy < 9 or self.phi_cells < 8:
            raise NonPositiveInput("grid too small to be meaningful")
        if self.extent is not None and self.extent <= 0.0:
            raise NonPositiveInput("extent must be positive")


@dataclass(frozen=True)
class Solution:
    transform: RigidTransform2
    residual: float
    rank: int

    def key(self) -> tuple[float, float, float]:
        t = self.transform
        return (t.phi, t.dx, t.dy)


@dataclass(frozen=True)
class FamilyInfo:
    """One connected continuous branch of indistinguishable placements."""

    dim: int
    representatives: tuple[Solution, ...]
    spread: tuple[float, float, float]


@dataclass(frozen=True)
class SolutionSet:
    solutions: tuple[Solution, ...]
    families: tuple[FamilyInfo, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def n_solutions(self) -> int:
        return len(self.solutions)

    @property
    def ind_class(self) -> IndClass:
        if self.families:
            return IndClass(len(self.families), max(f.dim for f in self.families))
        return IndClass(len(self.solutions), 0)

    def best(self) -> Solution | None:
        pool = list(self.solutions)
        for f in self.families:
            pool.extend(f.representatives)
        if not pool:
            return None
        return min(pool, key=lambda s: s.residual)


def _problem_arrays(s: Scenario):
    return s.points_array(), s.anchor_positions(), s.rho_array()


def _residual_vec(pts, anchors, rhos, p) -> np.ndarray:
    dx, dy, phi = p
    c, sn = math.cos(phi), math.sin(phi)
    wx = c * pts[:, 0] - sn * pts[:, 1] + dx
    wy = sn * pts[:, 0] + c * pts[:, 1] + dy
    return np.hypot(wx - anchors[:, 0], wy - anchors[:, 1]) - rhos


def _jacobian_mat(pts, anchors, rhos, p) -> np.ndarray:
    dx, dy, phi = p
    c, sn = math.cos(phi), math.sin(phi)
    rx = c * pts[:, 0] - sn * pts[:, 1]
    ry = sn * pts[:, 0] + c * pts[:, 1]
    ex = rx + dx - anchors[:, 0]
    ey = ry + dy - anchors[:, 1]
    dist = np.hypot(ex, ey)
    # a world point sitting on its anchor has no defined direction; the clamp
    # keeps the iteration finite there
    dist = np.maximum(dist, 1e-12)
    return np.column_stack((ex / dist, ey / dist, (ex * (-ry) + ey * rx) / dist))


def residuals(s: Scenario, t: RigidTransform2) -> np.ndarray:
    """Predicted minus measured range per sample."""
    pts, anchors, rhos = _problem_arrays(s)
    return _residual_vec(pts, anchors, rhos, (t.dx, t.dy, t.phi))


def residual_jacobian(s: Scenario, t: RigidTransform2) -> np.ndarray:
    """(N, 3) derivative of the residuals in (dx, dy, phi)."""
    pts, anchors, rhos = _problem_arrays(s)
    return _jacobian_mat(pts, anchors, rhos, (t.dx, t.dy, t.phi))


def _rank(J: np.ndarray, rel_tol: float) -> int:
    sv = np.linalg.svd(J, compute_uv=False)
    if sv.size == 0 or sv[0] <= 0.0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


def _lm(pts, anchors, rhos, p0, max_iter: int) -> tuple[np.ndarray, float]:
    """Levenberg-Marquardt from p0; damping scales by 10 either way."""
    p = np.asarray(p0, dtype=float).copy()
    r = _residual_vec(pts, anchors, rhos, p)
    cost = float(r @ r)
    lam = 1e-3
    eye = np.eye(3)
    for _ in range(max_iter):
        J = _jacobian_mat(pts, anchors, rhos, p)
        g = J.T @ r
        if np.linalg.norm(g, np.inf) < 1e-15:
            break
        H = J.T @ J
        moved = False
        for _ in range(50):
            try:
                step = np.linalg.solve(H + lam * eye, -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            r_new = _residual_vec(pts, anchors, rhos, p + step)
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                p = p + step
                r, cost = r_new, cost_new
                lam = max(lam / 10.0, 1e-14)
                moved = True
                break
            lam *= 10.0
            if lam > 1e12:
                break
        if not moved or float(np.linalg.norm(step)) < 1e-14:
            break
    return p, float(np.max(np.abs(r)))


def polish_solution(s: Scenario, start: RigidTransform2, config: SolverConfig = SolverConfig()) -> Solution | None:
    """Refine a candidate transform; None when it fails the residual gate."""
    pts, anchors, rhos = _problem_arrays(s)
    p, res = _lm(pts, anchors, rhos, (start.dx, start.dy, start.phi), config.max_iter)
    if res > config.accept_tol:
        return None
    J = _jacobian_mat(pts, anchors, rhos, p)
    return Solution(RigidTransform2(p[0], p[1], wrap_angle(p[2])), res, _rank(J, s.tolerances.rank))


def _same_transform(a: RigidTransform2, b: RigidTransform2, tol_xy: float, tol_phi: float) -> bool:
    return (
        abs(a.dx - b.dx) <= tol_xy
        and abs(a.dy - b.dy) <= tol_xy
        and abs(angle_diff(a.phi, b.phi)) <= tol_phi
    )


def _dedup(sols: list[Solution], tol_xy: float, tol_phi: float) -> list[Solution]:
    kept: list[Solution] = []
    for s in sorted(sols, key=lambda s: s.residual):
        if not any(_same_transform(s.transform, k.transform, tol_xy, tol_phi) for k in kept):
            kept.append(s)
    return sorted(kept, key=Solution.key)


def dedup_solutions(sols, tol_xy: float, tol_phi: float) -> list[Solution]:
    """Drop near-duplicate solutions, keeping the lowest residual of each."""
    return _dedup(list(sols), tol_xy, tol_phi)


def translation_bound(s: Scenario) -> float:
    """Upper bound on |(dx, dy)| of any placement consistent with the ranges.

    Each sample k forces the transformed point within rho_k of its anchor,
    so |d| <= |B_k| + rho_k + |P_k|; the minimum over k is the tightest.
    """
    pts, anchors, rhos = _problem_arrays(s)
    bounds = np.linalg.norm(anchors, axis=1) + rhos + np.linalg.norm(pts, axis=1)
    return float(np.min(bounds))


def _auto_extent(s: Scenario) -> float:
    return 1.05 * translation_bound(s) + 0.25


def solve_multistart(s: Scenario, config: SolverConfig = SolverConfig()) -> SolutionSet:
    """Quasi-random multistart search over the feasible transform box.

    Start points are a scrambled Halton sequence, so runs with the same seed
    are reproducible. Finds isolated solutions; continuous families show up
    as many accepted points and are flagged, not resolved, here.
    """
    pts, anchors, rhos = _problem_arrays(s)
    extent = _auto_extent(s)
    sampler = qmc.Halton(d=3, scramble=True, seed=config.seed)
    u = sampler.random(config.n_starts)
    starts = np.column_stack(
        (
            (2.0 * u[:, 0] - 1.0) * extent,
            (2.0 * u[:, 1] - 1.0) * extent,
            (2.0 * u[:, 2] - 1.0) * math.pi,
        )
    )
    accepted: list[Solution] = []
    for p0 in starts:
        p, res = _lm(pts, anchors, rhos, p0, config.max_iter)
        if res <= config.accept_tol:
            J = _jacobian_mat(pts, anchors, rhos, p)
            accepted.append(
                Solution(RigidTransform2(p[0], p[1], wrap_angle(p[2])), res, _rank(J, s.tolerances.rank))
            )
    unique = _dedup(accepted, config.dedup_xy, config.dedup_phi)
    warnings: list[str] = []
    if not unique:
        warnings.append("no start converged below accept_tol")
    if len(unique) > config.n_starts // 4 and any(sol.rank < 3 for sol in unique):
        warnings.append("rank-deficient solutions scattered across the box suggest a continuous family")
    return SolutionSet(tuple(unique), (), tuple(warnings))


def _n_threads() -> int:
    raw = os.environ.get("CONSTRUCTA_THREADS", "0")
    try:
        n = int(raw)
    except ValueError as e:
        raise SchemaError(f"CONSTRUCTA_THREADS must be an integer, got {raw!r}") from e
    if n < 0:
        raise SchemaError("CONSTRUCTA_THREADS must be >= 0")
    if n == 0:
        return min(os.cpu_count() or 1, 8)
    return n


def _residual_field(pts, anchors, rhos, xs, ys, phis, chunk) -> np.ndarray:
    """Max absolute range error over samples, for phi indices in `chunk`.

    Output shape (len(chunk), len(xs), len(ys)), float32.
    """
    out = np.empty((len(chunk), xs.size, ys.size), dtype=np.float32)
    gx = xs[:, None]
    gy = ys[None, :]
    for row, ip in enumerate(chunk):
        c, sn = math.cos(phis[ip]), math.sin(phis[ip])
        rx = c * pts[:, 0] - sn * pts[:, 1]
        ry = sn * pts[:, 0] + c * pts[:, 1]
        acc = None
        for k in range(pts.shape[0]):
            err = np.abs(np.hypot(gx + (rx[k] - anchors[k, 0]), gy + (ry[k] - anchors[k, 1])) - rhos[k])
            acc = err if acc is None else np.maximum(acc, err)
        out[row] = acc
    return out


def _circular_std(angles: np.ndarray) -> float:
    """Dispersion of angles that respects the wrap; 0 when all equal."""
    r = float(np.abs(np.mean(np.exp(1j * angles))))
    if r >= 1.0:
        return 0.0
    if r <= 1e-12:
        return math.pi
    return math.sqrt(-2.0 * math.log(r))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _merge_phi_wrap(labels: np.ndarray, n_labels: int) -> np.ndarray:
    """Join clusters adjacent across the phi wrap seam, relabelling in place."""
    uf = _UnionFind(n_labels + 1)
    last = labels[-1]
    first = labels[0]
    nx, ny = first.shape
    for ax in (-1, 0, 1):
        for ay in (-1, 0, 1):
            a = last[max(0, ax) : nx + min(0, ax), max(0, ay) : ny + min(0, ay)]
            b = first[max(0, -ax) : nx + min(0, -ax), max(0, -ay) : ny + min(0, -ay)]
            both = (a > 0) & (b > 0)
            if np.any(both):
                for la, lb in set(zip(a[both].tolist(), b[both].tolist())):
                    uf.union(la, lb)
    remap = np.arange(n_labels + 1)
    for i in range(1, n_labels + 1):
        remap[i] = uf.find(i)
    return remap[labels]


def _cluster_seeds(coords: np.ndarray, vals: np.ndarray, scale: np.ndarray, max_seeds: int, min_sep: float):
    """Greedy farthest-point seed picks, starting at the best residual cell.

    coords columns are (dx, dy, phi); the scale vector makes the phi axis
    commensurate with meters. Phi distance respects the wrap.
    """

    def dist2(a, b):
        d0 = (a[:, 0] - b[0]) * scale[0]
        d1 = (a[:, 1] - b[1]) * scale[1]
        d2 = (np.mod(a[:, 2] - b[2] + math.pi, _TWO_PI) - math.pi) * scale[2]
        return d0 * d0 + d1 * d1 + d2 * d2

    order = [int(np.argmin(vals))]
    mind = dist2(coords, coords[order[0]])
    while len(order) < max_seeds:
        nxt = int(np.argmax(mind))
        if mind[nxt] < min_sep * min_sep:
            break
        order.append(nxt)
        mind = np.minimum(mind, dist2(coords, coords[nxt]))
    return coords[order]


def brute_force_oracle(
    s: Scenario, grid: GridSpec = GridSpec(), config: SolverConfig = SolverConfig()
) -> SolutionSet:
    """Exhaustive scan of transform space for indistinguishable placements.

    The (dx, dy, phi) box is rasterized, cells whose center residual is small
    enough that a zero could hide inside are kept, kept cells are grouped by
    26-connectivity with phi treated as cyclic, and each group is polished
    from several spread-out seeds. A group is a continuous family when it
    yields well-separated exact solutions whose residual Jacobian is rank
    deficient; the family dimension is read off the rank drop.
    """
    pts, anchors, rhos = _problem_arrays(s)
    rank_tol = s.tolerances.rank

    extent = grid.extent if grid.extent is not None else _auto_extent(s)
    cell = 2.0 * extent / grid.nxy
    xs = np.linspace(-extent + 0.5 * cell, extent - 0.5 * cell, grid.nxy)
    ys = xs.copy()
    dphi = _TWO_PI / grid.phi_cells
    phis = -math.pi + (np.arange(grid.phi_cells) + 0.5) * dphi

    lever = float(np.max(np.linalg.norm(pts, axis=1)))
    threshold = 1.25 * (0.5 * cell * math.sqrt(2.0) + 0.5 * dphi * lever)
    threshold = max(threshold, 2.0 * config.accept_tol)

    n_threads = _n_threads()
    vals = np.empty((grid.phi_cells, grid.nxy, grid.nxy), dtype=np.float32)
    chunks = np.array_split(np.arange(grid.phi_cells), max(1, min(n_threads * 4, grid.phi_cells)))
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            futures = [pool.submit(_residual_field, pts, anchors, rhos, xs, ys, phis, ch) for ch in chunks]
            # gather in submission order so the result is independent of scheduling
            for ch, fut in zip(chunks, futures):
                vals[ch[0] : ch[-1] + 1] = fut.result()
    else:
        for ch in chunks:
            vals[ch[0] : ch[-1] + 1] = _residual_field(pts, anchors, rhos, xs, ys, phis, ch)

    mask = vals <= threshold
    warnings: list[str] = []
    if not np.any(mask):
        return SolutionSet((), (), ("no grid cell carries residual below the admission threshold",))

    labels, n_labels = ndimage.label(mask, structure=np.ones((3, 3, 3), dtype=bool))
    if grid.phi_cells > 1:
        labels = _merge_phi_wrap(labels, n_labels)

    # group masked cells by label once instead of rescanning per cluster
    pos_p, pos_x, pos_y = np.nonzero(labels > 0)
    labs = labels[pos_p, pos_x, pos_y]
    order = np.argsort(labs, kind="stable")
    labs_sorted = labs[order]
    uniq, starts_idx = np.unique(labs_sorted, return_index=True)
    slices = list(zip(starts_idx, np.append(starts_idx[1:], labs_sorted.size)))

    scale = np.array([1.0, 1.0, max(lever, cell)])
    cell_diag = math.sqrt(2.0 * cell * cell + (dphi * scale[2]) ** 2)

    isolated: list[Solution] = []
    families: list[FamilyInfo] = []
    for (lo, hi) in slices:
        sel = order[lo:hi]
        ip, ix, iy = pos_p[sel], pos_x[sel], pos_y[sel]
        coords = np.column_stack((xs[ix], ys[iy], phis[ip]))
        cvals = vals[ip, ix, iy]
        seeds = _cluster_seeds(coords, cvals, scale, max_seeds=6, min_sep=2.0 * cell_diag)

        reps: list[Solution] = []
        for sd in seeds:
            p, res = _lm(pts, anchors, rhos, (sd[0], sd[1], sd[2]), config.max_iter)
            if res <= config.accept_tol:
                J = _jacobian_mat(pts, anchors, rhos, p)
                reps.append(
                    Solution(RigidTransform2(p[0], p[1], wrap_angle(p[2])), res, _rank(J, rank_tol))
                )
        reps = _dedup(reps, config.dedup_xy, config.dedup_phi)
        if not reps:
            warnings.append(f"cluster of {coords.shape[0]} cells produced no solution below accept_tol")
            continue

        # polished points escaping their cluster by more than a cell mean the
        # raster missed structure
        span_phi = len(set(ip.tolist())) == grid.phi_cells
        for r in reps:
            out_xy = (
                r.transform.dx < coords[:, 0].min() - cell
                or r.transform.dx > coords[:, 0].max() + cell
                or r.transform.dy < coords[:, 1].min() - cell
                or r.transform.dy > coords[:, 1].max() + cell
            )
            out_phi = not span_phi and all(
                abs(angle_diff(r.transform.phi, ph)) > dphi for ph in coords[:, 2]
            )
            if out_xy or out_phi:
                warnings.append("grid too coarse: a polished solution left its cluster")
                break

        distinct = _dedup(reps, 10.0 * config.dedup_xy, 10.0 * config.dedup_phi)
        min_rank = min(r.rank for r in reps)
        if len(distinct) >= 2 and min_rank < 3:
            spread = (
                float(np.std(coords[:, 0])),
                float(np.std(coords[:, 1])),
                _circular_std(coords[:, 2]),
            )
            families.append(FamilyInfo(3 - min_rank, tuple(reps), spread))
        else:
            isolated.extend(reps)

    isolated = _dedup(isolated, config.dedup_xy, config.dedup_phi)
    families.sort(key=lambda f: f.representatives[0].key())
    return SolutionSet(tuple(isolated), tuple(families), tuple(warnings))


def count_indistinguishable(
    s: Scenario, grid: GridSpec = GridSpec(), config: SolverConfig = SolverConfig()
) -> SolutionSet:
    """Grid oracle entry point; the set's ind_class carries the verdict."""
    return brute_force_oracle(s, grid, config)
