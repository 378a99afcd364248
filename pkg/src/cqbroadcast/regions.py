"""Superposition-coding and Marton inner-bound rate regions.

Each auxiliary distribution yields a polytope

    {R1 <= a, R2 <= b, R1 + R2 <= c, R1, R2 >= 0}

whose corners are emitted analytically.  Regions are the union over a
simplex grid (small alphabets) plus seeded Dirichlet restarts, reduced to
the Pareto frontier.  Rates are in bits per channel use.
"""

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channel import marginal_channel
from .exceptions import ShapeError
from .info import (CQEnsemble, build_marton_state, build_superposition_state,
                   classical_mutual_information, entropies,
                   holevo_information, mutual_information)

CORNER_TOL = 1e-12


class RatePoint(NamedTuple):
    r1: float
    r2: float


@dataclass(frozen=True)
class SearchConfig:
    """Search settings for region computation.

    ``aux_alphabet_sizes`` is ``(|W|,)`` for superposition coding and
    ``(|U1|, |U2|)`` for Marton coding; ``None`` means ``|X|`` for each.
    """

    grid_resolution: int = 17
    random_restarts: int = 0
    aux_alphabet_sizes: tuple = None
    seed: int = 0
    time_sharing: bool = True
    convex_hull: bool = False

    def __post_init__(self):
        if self.grid_resolution < 2:
            raise ValueError("grid_resolution must be at least 2")
        if self.random_restarts < 0:
            raise ValueError("random_restarts must be nonnegative")
        if self.aux_alphabet_sizes is not None and any(int(s) < 1 for s in self.aux_alphabet_sizes):
            raise ValueError("auxiliary alphabet sizes must be positive")


@dataclass
class RateRegion:
    """Union of achievable corner points with its Pareto frontier.

    ``provenance[i]`` describes how ``frontier[i]`` was obtained: the
    auxiliary distributions for a genuine corner, or the two parent
    records for a time-sharing midpoint.
    """

    scheme: str
    points: list
    frontier: list
    provenance: list = field(default_factory=list)

    def contains(self, point, tol=1e-9, time_sharing=False):
        """Whether ``point`` lies in the downward closure of the region.

        With ``time_sharing`` the test is against the convex hull.
        """
        r1, r2 = point
        if r1 < -tol or r2 < -tol:
            return False
        if any(q.r1 >= r1 - tol and q.r2 >= r2 - tol for q in self.frontier):
            return True
        if not time_sharing:
            return False
        hull = upper_hull(self.frontier)
        for a, b in zip(hull, hull[1:]):
            if b.r1 - tol <= r1 <= a.r1 + tol:
                if a.r1 == b.r1:
                    return r2 <= max(a.r2, b.r2) + tol
                t = (a.r1 - r1) / (a.r1 - b.r1)
                return r2 <= a.r2 + t * (b.r2 - a.r2) + tol
        return False

    def max_sum_rate(self):
        return max((p.r1 + p.r2 for p in self.frontier), default=0.0)


def _snap(v):
    # Round-off below CORNER_TOL is treated as an exact zero.
    v = float(v)
    return v if v > CORNER_TOL else 0.0


def polytope_corners(a, b, c):
    """Corner points of ``{R1 <= a, R2 <= b, R1 + R2 <= c, R >= 0}``."""
    a, b, c = (_snap(v) for v in (a, b, c))
    A = min(a, c)
    B = min(b, c)
    pts = [(0.0, 0.0), (A, 0.0), (0.0, B),
           (A, _snap(min(b, c - A))), (_snap(min(a, c - B)), B)]
    out = []
    for p in pts:
        p = RatePoint(*p)
        if p not in out:
            out.append(p)
    return out


def pareto_reduce(points):
    """Maximal points under componentwise dominance.

    Result is ordered by descending ``r1`` (ties by descending ``r2``);
    exact duplicates are kept once.
    """
    pts = sorted({RatePoint(float(p[0]), float(p[1])) for p in points},
                 key=lambda p: (-p.r1, -p.r2))
    frontier = []
    best_r2 = -np.inf
    for p in pts:
        if p.r2 > best_r2:
            frontier.append(p)
            best_r2 = p.r2
    return frontier


def upper_hull(frontier):
    """Vertices of the concave majorant of a frontier (descending ``r1``)."""
    hull = []
    for p in pareto_reduce(frontier):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (a.r1 - o.r1) * (p.r2 - o.r2) - (a.r2 - o.r2) * (p.r1 - o.r1)
            # Drop vertices on or below the chord.
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def superposition_rate_triple(p_w, p_x_given_w, ch):
    """``(I(X;B1|W), I(W;B2), I(X;B1))`` for the superposition code state."""
    theta = build_superposition_state(p_w, p_x_given_w, ch)
    ixb1_w = mutual_information(theta, "X", "B1", given="W")
    iwb2 = mutual_information(theta, "W", "B2")
    ixb1 = mutual_information(theta, "X", "B1")
    return ixb1_w, iwb2, ixb1


def marton_rate_triple(p_u1u2, f, ch):
    """``(I(U1;B1), I(U2;B2), I(U1;U2))`` for the Marton code state."""
    theta = build_marton_state(p_u1u2, f, ch)
    iu1b1 = mutual_information(theta, "U1", "B1")
    iu2b2 = mutual_information(theta, "U2", "B2")
    iu1u2 = classical_mutual_information(theta.joint_probability)
    return iu1b1, iu2b2, iu1u2


def superposition_bounds(triple):
    a, b, c = triple
    return a, b, c


def marton_bounds(triple):
    a, b, i12 = triple
    return a, b, a + b - i12


def simplex_grid(k, resolution):
    """All points of the ``k``-simplex with coordinates in ``{0, 1/(g-1), ..., 1}``."""
    g = resolution - 1
    pts = []
    for c in itertools.product(range(g + 1), repeat=k - 1):
        if sum(c) <= g:
            pts.append(list(c) + [g - sum(c)])
    return np.asarray(pts, dtype=float) / g


# Batched evaluation: entropies of mixtures for many distributions at once.

def _mix(weights, states):
    return np.tensordot(weights, states, axes=([weights.ndim - 1], [0]))


def _superposition_triples_batch(p_w, p_x_given_w, rho1, rho2):
    """Vectorised triples; ``p_w`` is (N, |W|), ``p_x_given_w`` is (N, |W|, |X|)."""
    p_x = np.einsum("nw,nwx->nx", p_w, p_x_given_w)
    h1_x = entropies(rho1)
    h_b1 = entropies(_mix(p_x, rho1))
    h_b1_given_x = p_x @ h1_x
    sigma1 = _mix(p_x_given_w, rho1)
    sigma2 = _mix(p_x_given_w, rho2)
    h_b1_given_w = np.sum(p_w * entropies(sigma1), axis=1)
    h_b2_given_w = np.sum(p_w * entropies(sigma2), axis=1)
    h_b2 = entropies(_mix(p_x, rho2))
    ixb1_w = np.maximum(0.0, h_b1_given_w - h_b1_given_x)
    iwb2 = np.maximum(0.0, h_b2 - h_b2_given_w)
    ixb1 = np.maximum(0.0, h_b1 - h_b1_given_x)
    return np.stack([ixb1_w, iwb2, ixb1], axis=1)


def _marton_triples_batch(p, f, rho1, rho2):
    """Vectorised triples; ``p`` is (N, |U1|, |U2|), ``f`` an integer table."""
    s1 = rho1[f]
    s2 = rho2[f]
    p1 = p.sum(2)
    p2 = p.sum(1)
    avg1 = np.einsum("nab,abij->nij", p, s1)
    avg2 = np.einsum("nab,abij->nij", p, s2)
    safe1 = np.where(p1 > 0, p1, 1.0)
    safe2 = np.where(p2 > 0, p2, 1.0)
    omega1 = np.einsum("nab,abij->naij", p, s1) / safe1[..., None, None]
    omega2 = np.einsum("nab,abij->nbij", p, s2) / safe2[..., None, None]
    iu1b1 = entropies(avg1) - np.sum(p1 * entropies(omega1), axis=1)
    iu2b2 = entropies(avg2) - np.sum(p2 * entropies(omega2), axis=1)

    def h(q):
        q = q.reshape(q.shape[0], -1)
        safe = np.where(q > 0, q, 1.0)
        return -np.sum(np.where(q > 0, q * np.log2(safe), 0.0), axis=1)

    i12 = np.maximum(0.0, h(p1) + h(p2) - h(p))
    return np.stack([np.maximum(0.0, iu1b1), np.maximum(0.0, iu2b2), i12], axis=1)


def _aux_sizes(cfg, ch, count):
    k = ch.input_alphabet_size
    if cfg.aux_alphabet_sizes is None:
        return (k,) * count
    sizes = tuple(int(s) for s in cfg.aux_alphabet_sizes)
    if len(sizes) != count:
        raise ShapeError(f"expected {count} auxiliary alphabet size(s), got {sizes}")
    return sizes


def _dirichlet(rng, k, size):
    return rng.dirichlet(np.ones(k), size=size)


def _collect(scheme, triples, bounds, records, cfg):
    """Union of corners over all candidates, reduced and annotated."""
    best = {}
    for i, t in enumerate(triples):
        for corner in polytope_corners(*bounds(t)):
            # Keep the first candidate that produced a given corner.
            best.setdefault(corner, i)
    points = sorted(best, key=lambda p: (-p.r1, -p.r2))
    frontier = pareto_reduce(points)
    provenance = [dict(records[best[p]]) for p in frontier]
    for rec, t in zip(provenance, (triples[best[p]] for p in frontier)):
        rec["triple"] = [float(v) for v in t]
    if cfg.time_sharing and len(frontier) > 1:
        mids = {}
        for i, (a, b) in enumerate(zip(frontier, frontier[1:])):
            m = RatePoint((a.r1 + b.r1) / 2, (a.r2 + b.r2) / 2)
            mids.setdefault(m, (i, i + 1))
        parent = {p: rec for p, rec in zip(frontier, provenance)}
        all_pts = set(points) | set(mids)
        frontier = pareto_reduce(all_pts)
        provenance = []
        old = list(parent)
        for p in frontier:
            if p in parent:
                provenance.append(parent[p])
            else:
                i, j = mids[p]
                provenance.append({"time_sharing": [old[i], old[j]],
                                   "parents": [parent[old[i]], parent[old[j]]]})
        points = sorted(all_pts, key=lambda p: (-p.r1, -p.r2))
    if cfg.convex_hull:
        lookup = dict(zip(frontier, provenance))
        frontier = upper_hull(frontier)
        # Hull vertices are frontier points or their axis projections.
        provenance = [lookup.get(p, {"hull_vertex": True}) for p in frontier]
    region = RateRegion(scheme, points, frontier, provenance)
    for rec in region.provenance:
        rec.setdefault("scheme", scheme)
    return region


def _superposition_candidates(ch, cfg):
    kw, = _aux_sizes(cfg, ch, 1)
    kx = ch.input_alphabet_size
    rng = np.random.default_rng(cfg.seed)
    p_ws, conds = [], []
    if kw <= 2 and kx <= 2:
        gw = simplex_grid(kw, cfg.grid_resolution)
        gx = simplex_grid(kx, cfg.grid_resolution)
        for pw in gw:
            for rows in itertools.product(range(len(gx)), repeat=kw):
                p_ws.append(pw)
                conds.append(gx[list(rows)])
    if cfg.random_restarts or not p_ws:
        count = cfg.random_restarts or cfg.grid_resolution ** 2
        for _ in range(count):
            p_ws.append(_dirichlet(rng, kw, 1)[0])
            conds.append(_dirichlet(rng, kx, kw))
        # Anchors: W independent of a uniform X, and W copied into X.
        p_ws.append(np.full(kw, 1.0 / kw))
        conds.append(np.full((kw, kx), 1.0 / kx))
        if kw == kx:
            p_ws.append(np.full(kw, 1.0 / kw))
            conds.append(np.eye(kx))
    return np.asarray(p_ws), np.asarray(conds)


def superposition_region(ch, cfg=None):
    """Superposition-coding inner bound of ``ch``."""
    cfg = cfg or SearchConfig()
    p_w, cond = _superposition_candidates(ch, cfg)
    rho1 = marginal_channel(ch, 1)
    rho2 = marginal_channel(ch, 2)
    triples = []
    for start in range(0, len(p_w), 4096):
        sl = slice(start, start + 4096)
        triples.append(_superposition_triples_batch(p_w[sl], cond[sl], rho1, rho2))
    triples = np.concatenate(triples)
    records = [{"p_w": pw.tolist(), "p_x_given_w": c.tolist()} for pw, c in zip(p_w, cond)]
    return _collect("superposition", triples, superposition_bounds, records, cfg)


def all_functions(k1, k2, kx):
    """Every deterministic map ``U1 x U2 -> X`` as a ``(k1, k2)`` table."""
    for values in itertools.product(range(kx), repeat=k1 * k2):
        yield np.asarray(values, dtype=int).reshape(k1, k2)


def _marton_candidates(ch, cfg):
    k1, k2 = _aux_sizes(cfg, ch, 2)
    kx = ch.input_alphabet_size
    rng = np.random.default_rng(cfg.seed)
    if k1 * k2 <= 4:
        grid = simplex_grid(k1 * k2, cfg.grid_resolution).reshape(-1, k1, k2)
    else:
        grid = np.empty((0, k1, k2))
    extra = cfg.random_restarts or (0 if len(grid) else cfg.grid_resolution ** 2)
    if extra:
        grid = np.concatenate([grid, _dirichlet(rng, k1 * k2, extra).reshape(-1, k1, k2),
                               np.full((1, k1, k2), 1.0 / (k1 * k2))])
    if kx ** (k1 * k2) <= 4096:
        funcs = list(all_functions(k1, k2, kx))
    else:
        funcs = [rng.integers(0, kx, size=(k1, k2)) for _ in range(256)]
        # Anchors: X follows one auxiliary, or a mixed-radix code of both.
        u1, u2 = np.meshgrid(np.arange(k1), np.arange(k2), indexing="ij")
        funcs.extend([u1 % kx, u2 % kx, (u2 * k1 + u1) % kx])
    return grid, funcs


def marton_region(ch, cfg=None):
    """Marton inner bound (no common message) of ``ch``."""
    cfg = cfg or SearchConfig()
    grid, funcs = _marton_candidates(ch, cfg)
    rho1 = marginal_channel(ch, 1)
    rho2 = marginal_channel(ch, 2)
    triples, records = [], []
    for f in funcs:
        triples.append(_marton_triples_batch(grid, f, rho1, rho2))
        records.extend({"p_u1u2": p.tolist(), "f": f.tolist()} for p in grid)
    triples = np.concatenate(triples)
    return _collect("marton", triples, marton_bounds, records, cfg)


def single_user_holevo(ch, receiver, cfg=None):
    """Best ``I(X;B_i)`` over the same grid/restart search, with its ``p_X``."""
    cfg = cfg or SearchConfig()
    k = ch.input_alphabet_size
    rng = np.random.default_rng(cfg.seed)
    cands = list(simplex_grid(k, cfg.grid_resolution)) if k <= 3 else []
    extra = cfg.random_restarts or (0 if cands else cfg.grid_resolution ** 2)
    cands.extend(_dirichlet(rng, k, extra)) if extra else None
    cands.extend(np.eye(k))
    cands.append(np.full(k, 1.0 / k))
    rho = marginal_channel(ch, receiver)
    best, best_p = -1.0, None
    for p in cands:
        v = holevo_information(CQEnsemble(p, rho))
        if v > best:
            best, best_p = v, np.asarray(p)
    return best, best_p


def check_point(record, point, ch, tol=1e-9):
    """Recompute a frontier point's inequalities from its provenance record."""
    if "time_sharing" in record:
        return all(check_point(parent, pt, ch, tol)
                   for parent, pt in zip(record["parents"], record["time_sharing"]))
    r1, r2 = point
    if "p_w" in record:
        a, b, c = superposition_rate_triple(record["p_w"], record["p_x_given_w"], ch)
    else:
        a, b, c = marton_bounds(marton_rate_triple(record["p_u1u2"], record["f"], ch))
    return (r1 >= -tol and r2 >= -tol and r1 <= a + tol and r2 <= b + tol
            and r1 + r2 <= c + tol)


def _fmt(x):
    return format(float(x) + 0.0, ".12g")


def region_to_csv(region):
    """CSV text ``r1,r2,frontier`` listing every region point."""
    front = set(region.frontier)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r1", "r2", "frontier"])
    for p in region.points:
        w.writerow([_fmt(p.r1), _fmt(p.r2), int(p in front)])
    for p in region.frontier:
        if p not in set(region.points):
            w.writerow([_fmt(p.r1), _fmt(p.r2), 1])
    return buf.getvalue()


def region_provenance_json(region):
    """Sidecar JSON mapping each frontier point to its distributions."""
    rows = []
    for i, (p, rec) in enumerate(zip(region.frontier, region.provenance)):
        rows.append({"frontier_index": i, "r1": float(p.r1), "r2": float(p.r2),
                     "record": _jsonable(rec)})
    return json.dumps({"scheme": region.scheme, "frontier": rows}, indent=1, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj
