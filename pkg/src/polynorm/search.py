"""Constructive search for interior points with many normals.

Strategies, tried in order:

1. the Chebyshev centre (at least 8 normals, 4 of them to faces),
2. for every nice vertex, a walk along the ray towards its certificate,
3. for every vertex-edge binormal, a walk along the binormal,
4. stratified random sampling with local hill climbing.

Walks are traced through the bifurcation sheets; when two crossings nearly
coincide the segment is replaced by a two-leg detour through a random nearby
waypoint. The first witness reaching the target is polished away from the
sheets and recounted.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .bifurcation import CrossingEvent, Sheet, build_sheets, trace_segment
from .binormal import VE, Binormal, enumerate_binormals
from .errors import (GenericityError, NumericalAnomaly, OnSheetError, PointOutsideError,
                     PreconditionError, RerouteError)
from .geom import Tolerance, unit
from .normals import (CircuitExtrema, NormalCount, NormalRecord, circuit_extrema, count_normals,
                      normals_from, sheet_clearance)
from .polytope import Polytope, acute_circuit, is_generic, perturb_generic
from .spherical import SkewBudget, classify_skew, vertex_figure

log = logging.getLogger(__name__)

BASELINE = 8
EPS_REL = 1e-4
EPS_HALVINGS = 10
STRATEGIES = ("chebyshev", "nice-ray", "binormal-walk", "cell-sampling")


def chebyshev_center(P: Polytope, tol: Tolerance | None = None) -> tuple[np.ndarray, float]:
    """Centre and radius of the largest ball inside ``P`` (linear program)."""
    n = P.face_normals
    A = np.c_[n, np.ones(len(n))]
    res = linprog(c=[0, 0, 0, -1], A_ub=A, b_ub=P.face_offsets,
                  bounds=[(None, None)] * 3 + [(0, None)], method="highs")
    if res.status != 0:
        raise NumericalAnomaly(f"Chebyshev LP failed: {res.message}")
    return np.array(res.x[:3]), float(res.x[3])


# ---------------------------------------------------------------------------
# walks

@dataclass
class _Path:
    """Concatenation of traced legs, parametrised by ``t`` in [0, 1]."""

    knots: list[np.ndarray]
    events: list[CrossingEvent] = field(default_factory=list)
    cells: list[tuple[float, float, NormalCount]] = field(default_factory=list)
    rerouted: int = 0

    def point(self, t: float) -> np.ndarray:
        k = len(self.knots) - 1
        s = min(max(t, 0.0), 1.0) * k
        i = min(int(s), k - 1)
        return self.knots[i] + (s - i) * (self.knots[i + 1] - self.knots[i])


def _walk(P: Polytope, sheets: list[Sheet], a, b, tol: Tolerance, rng: np.random.Generator,
          depth: int = 4) -> _Path:
    try:
        tr = trace_segment(P, sheets, a, b, tol)
        return _Path([tr.start, tr.end], list(tr.events), list(tr.cells))
    except RerouteError:
        if depth == 0:
            raise
    # detour through a random waypoint near the midpoint
    m = 0.5 * (np.asarray(a) + np.asarray(b))
    span = float(np.linalg.norm(np.asarray(b) - np.asarray(a)))
    for _ in range(8):
        w = m + 1e-3 * span * rng.normal(size=3)
        if not P.contains(w) or sheet_clearance(P, w) < 10 * tol.eps_len:
            continue
        try:
            p1 = _walk(P, sheets, a, w, tol, rng, depth - 1)
            p2 = _walk(P, sheets, w, b, tol, rng, depth - 1)
        except RerouteError:
            continue
        return _join(p1, p2)
    raise RerouteError("detour search failed")


def _join(p1: _Path, p2: _Path) -> _Path:
    k1, k2 = len(p1.knots) - 1, len(p2.knots) - 1
    f1, f2 = k1 / (k1 + k2), k2 / (k1 + k2)
    ev = [_retime(e, e.t * f1) for e in p1.events] + [_retime(e, f1 + e.t * f2) for e in p2.events]
    cells = [(lo * f1, hi * f1, c) for lo, hi, c in p1.cells]
    cells += [(f1 + lo * f2, f1 + hi * f2, c) for lo, hi, c in p2.cells]
    # the waypoint is off-sheet, so the cells on either side share one count
    if cells[len(p1.cells) - 1][2] != cells[len(p1.cells)][2]:
        raise NumericalAnomaly("counts disagree at a detour waypoint")
    lo, _, c = cells[len(p1.cells) - 1]
    _, hi, _ = cells[len(p1.cells)]
    cells[len(p1.cells) - 1:len(p1.cells) + 1] = [(lo, hi, c)]
    return _Path(p1.knots + p2.knots[1:], ev, cells, p1.rerouted + p2.rerouted + 1)


def _retime(e: CrossingEvent, t: float) -> CrossingEvent:
    return CrossingEvent(t, e.sheet, e.color, e.kind, e.pair, e.count_before, e.count_after)


@dataclass
class TrajectoryReport:
    start: np.ndarray
    end: np.ndarray
    events: list[CrossingEvent]
    cells: list[tuple[float, float, NormalCount]]
    best_point: np.ndarray
    best_count: NormalCount
    outcome: str  # ten-by-birth, ten-at-start, ten-at-exit, ten-at-W or baseline-only
    rerouted: int = 0
    eps: float = 0.0
    case: int | None = None
    circuit: CircuitExtrema | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def initial_count(self) -> NormalCount:
        return self.cells[0][2]


def _summarise(path: _Path, target: int, end_label: str) -> tuple[np.ndarray, NormalCount, str]:
    best = max(range(len(path.cells)), key=lambda k: (path.cells[k][2].total, -k))
    lo, hi, c = path.cells[best]
    point = path.point(0.5 * (lo + hi))
    if c.total < target:
        return point, c, "baseline-only"
    first = next(k for k, cell in enumerate(path.cells) if cell[2].total >= target)
    lo, hi, c = path.cells[first]
    point = path.point(0.5 * (lo + hi))
    if first == 0:
        return point, c, "ten-at-start"
    if path.events[first - 1].kind == "birth" and first < len(path.cells) - 1:
        return point, c, "ten-by-birth"
    if first == len(path.cells) - 1 and path.events[first - 1].kind != "birth":
        return point, c, end_label
    return point, c, "ten-by-birth"


def _check_first_event(path: _Path, what: str) -> None:
    if path.events and path.events[0].kind == "death" and path.events[0].count_after.total < BASELINE:
        e = path.events[0]
        raise NumericalAnomaly(f"{what}: first event is a {e.pair} death leaving {e.count_after.total} normals")


def _with_shrinking_eps(P: Polytope, tol: Tolerance, attempt, eps: float | None):
    eps = EPS_REL * P.diameter if eps is None else eps
    last: Exception | None = None
    for _ in range(EPS_HALVINGS + 1):
        try:
            return attempt(eps)
        except (OnSheetError, RerouteError, PointOutsideError) as exc:
            last = exc
            eps *= 0.5
    raise RerouteError(f"walk failed for every offset: {last}")


def _ray_exit(P: Polytope, origin: np.ndarray, direction: np.ndarray) -> float:
    rate = P.face_normals @ direction
    gap = P.face_offsets - P.face_normals @ origin
    ok = rate > 1e-15
    return float(np.min(gap[ok] / rate[ok]))


def trace_nice_ray(P: Polytope, v: int, tol: Tolerance | None = None, *, sheets=None,
                   target: int = 10, eps: float | None = None, seed: int = 0,
                   budget: SkewBudget = SkewBudget()) -> TrajectoryReport:
    """Walk from a nice vertex along its certificate direction until leaving ``P``."""
    tol = tol or P.tol
    rep = classify_skew(vertex_figure(P, v), tol, budget)
    if not rep.is_nice or rep.certificate is None:
        raise PreconditionError(f"vertex {v} is skew")
    sheets = build_sheets(P, tol) if sheets is None else sheets
    V = P.vertices[v]
    Y = unit(rep.certificate)
    s_exit = _ray_exit(P, V, Y)
    rng = np.random.default_rng(seed)

    def attempt(e):
        path = _walk(P, sheets, V + e * Y, V + (s_exit - e) * Y, tol, rng)
        return path, e

    path, e = _with_shrinking_eps(P, tol, attempt, eps)
    init = path.cells[0][2]
    if init.total < BASELINE or init.n_min < 3 or init.n_saddle < 3 or init.n_max < 2:
        raise NumericalAnomaly(f"nice ray from vertex {v} starts with only {init}")
    _check_first_event(path, f"nice ray from vertex {v}")
    point, count, outcome = _summarise(path, target, "ten-at-exit")
    return TrajectoryReport(path.knots[0], path.knots[-1], path.events, path.cells, point, count,
                            outcome, path.rerouted, e)


def binormal_case(P: Polytope, b: Binormal) -> int:
    """1 if the binormal runs through the interior, 2 if it lies in a face."""
    v = b.start[0][1]
    e = b.end[0][1]
    faces = set(P.edges[e].faces)
    return 2 if faces & set(P.vertex_faces[v]) else 1


def trace_binormal(P: Polytope, b: Binormal, tol: Tolerance | None = None, *, sheets=None,
                   target: int = 10, eps: float | None = None, seed: int = 0,
                   budget: SkewBudget = SkewBudget()) -> TrajectoryReport:
    """Walk from the vertex end of a vertex-edge binormal to its edge end."""
    tol = tol or P.tol
    if b.kind != VE:
        raise PreconditionError("binormal walk needs a vertex-edge binormal")
    sheets = build_sheets(P, tol) if sheets is None else sheets
    V, W = b.start[1], b.end[1]
    v = b.start[0][1]
    u = unit(W - V)
    case = binormal_case(P, b)
    c0, _ = chebyshev_center(P, tol)
    rng = np.random.default_rng(seed)
    warnings = []

    def attempt(e):
        if case == 1:
            a, z = V + e * u, W - e * u
        else:
            # shift inwards, towards the Chebyshev centre, at both ends
            a = V + e * (u + unit(c0 - V))
            z = W + e * (unit(c0 - W) - u)
        return _walk(P, sheets, a, z, tol, rng), e

    path, e = _with_shrinking_eps(P, tol, attempt, eps)
    skew_v = not classify_skew(vertex_figure(P, v), tol, budget).is_nice
    init = path.cells[0][2]
    if init.total < BASELINE:
        msg = f"binormal walk from vertex {v} starts with only {init}"
        if skew_v and case == 1:
            raise NumericalAnomaly(msg)
        warnings.append(msg)
    if skew_v:
        _check_first_event(path, f"binormal walk from vertex {v}")
    point, count, outcome = _summarise(path, target, "ten-at-W")
    circ = None
    if case == 2:
        ac = acute_circuit(P, tol)
        if ac.components:
            try:
                circ = circuit_extrema(P, ac, point, tol)
            except PreconditionError as exc:
                warnings.append(f"circuit extrema unavailable: {exc}")
    return TrajectoryReport(path.knots[0], path.knots[-1], path.events, path.cells, point, count,
                            outcome, path.rerouted, e, case, circ, warnings)


# ---------------------------------------------------------------------------
# witness search

@dataclass
class SearchResult:
    witness: np.ndarray
    count: NormalCount
    normals: list[NormalRecord]
    strategy: str  # chebyshev, nice-ray, binormal-walk or cell-sampling
    success: bool
    target: int
    clearance: float
    polytope: Polytope
    perturbed: bool = False
    trajectory: TrajectoryReport | None = None
    attempts: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def polish_witness(P: Polytope, y, tol: Tolerance | None = None, *, need: int | None = None,
                   seed: int = 0, rounds: int = 80, batch: int = 48) -> tuple[np.ndarray, NormalCount]:
    """Move ``y`` away from the sheets while keeping at least ``need`` normals.

    Each round draws a batch of candidates at several scales around the
    current point and moves to the one with the largest sheet clearance.
    """
    tol = tol or P.tol
    rng = np.random.default_rng(seed)
    y = np.asarray(y, dtype=float)
    count = count_normals(P, y, tol)
    need = count.total if need is None else need
    best = sheet_clearance(P, y)
    stalls = 0
    for _ in range(rounds):
        scale = max(best, 1e-6 * P.diameter)
        radii = scale * np.exp(rng.uniform(np.log(0.1), np.log(4.0), size=batch))
        cands = y + radii[:, None] * rng.normal(size=(batch, 3)) / np.sqrt(3)
        inside = np.all(cands @ P.face_normals.T < P.face_offsets - tol.eps_len, axis=1)
        clr = np.array([sheet_clearance(P, c) if ok else -1.0 for c, ok in zip(cands, inside)])
        moved = False
        for k in np.argsort(-clr):
            if clr[k] <= best:
                break
            try:
                c = count_normals(P, cands[k], tol)
            except PreconditionError:
                continue
            if c.total >= need:
                y, best, count, moved = cands[k], float(clr[k]), c, True
                break
        stalls = 0 if moved else stalls + 1
        if stalls >= 8:
            break
    return y, count


def _sample_interior(P: Polytope, rng: np.random.Generator, n: int) -> np.ndarray:
    w = rng.dirichlet(np.full(P.n_vertices, 0.5), size=n)
    return w @ P.vertices


def _cell_sampling(P: Polytope, tol: Tolerance, rng: np.random.Generator, target: int,
                   n_samples: int, climb_steps: int):
    best_y, best_c = None, None

    def safe_count(y):
        try:
            return count_normals(P, y, tol)
        except PreconditionError:
            return None

    for y in _sample_interior(P, rng, n_samples):
        c = safe_count(y)
        if c is not None and (best_c is None or c.total > best_c.total):
            best_y, best_c = y, c
            if c.total >= target:
                return best_y, best_c
    r = 0.05 * P.diameter
    for _ in range(climb_steps):
        cand = best_y + r * rng.normal(size=3)
        c = safe_count(cand) if P.contains(cand) else None
        if c is not None and c.total > best_c.total:
            best_y, best_c = cand, c
            if c.total >= target:
                break
        else:
            r = max(0.97 * r, 1e-4 * P.diameter)
    return best_y, best_c


def find_high_normal_point(P: Polytope, target: int = 10, tol: Tolerance | None = None, *,
                           seed: int = 0, auto_perturb: bool = True, perturb_magnitude: float = 1e-3,
                           threads: int = 1, n_samples: int = 4000, climb_steps: int = 2000,
                           polish: bool = True, budget: SkewBudget = SkewBudget(),
                           strategies=STRATEGIES) -> SearchResult:
    """Find an interior point with at least ``target`` normals.

    Returns the best point found; ``success`` is False when the target was
    not reached. ``strategies`` selects a subsequence of the cascade; the
    Chebyshev centre is always evaluated as the baseline.
    """
    unknown = set(strategies) - set(STRATEGIES)
    if unknown:
        raise ValueError(f"unknown strategies {sorted(unknown)}")
    warnings: list[str] = []
    perturbed = False
    if not is_generic(P, tol):
        if not auto_perturb:
            raise GenericityError("polytope fails the genericity validator")
        P = perturb_generic(P, seed, perturb_magnitude)
        perturbed = True
        warnings.append(f"input perturbed to a generic polytope (seed {seed}, magnitude {perturb_magnitude})")
    tol = tol or P.tol
    rng = np.random.default_rng(seed)
    attempts: list[dict] = []
    best: tuple | None = None  # (count, point, strategy, trajectory)

    def note(strategy, point, count, traj=None, **info):
        nonlocal best
        attempts.append({"strategy": strategy, "total": count.total, **info})
        if best is None or count.total > best[0].total:
            best = (count, point, strategy, traj)
        return count.total >= target

    def finish(success):
        count, point, strategy, traj = best
        if polish:
            need = target if count.total >= target else count.total
            point, count = polish_witness(P, point, tol, need=need, seed=seed)
        records, recount = normals_from(P, point, tol)
        if recount != count:
            raise NumericalAnomaly("witness recount disagrees")
        return SearchResult(point, recount, records, strategy, success and recount.total >= target,
                            target, sheet_clearance(P, point), P, perturbed, traj, attempts, warnings)

    c0, _ = chebyshev_center(P, tol)
    y0 = c0
    for k in range(20):
        try:
            cnt = count_normals(P, y0, tol)
            break
        except OnSheetError:
            y0 = c0 + 1e-6 * P.diameter * (k + 1) * rng.normal(size=3)
    else:
        raise NumericalAnomaly("Chebyshev centre stays on a sheet under jitter")
    if note("chebyshev", y0, cnt) and "chebyshev" in strategies:
        return finish(True)

    sheets = build_sheets(P, tol)

    def run_parallel(jobs):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                futures = [ex.submit(job) for job in jobs]
                return [f.result() for f in futures]
        out = []
        for job in jobs:
            res = job()
            out.append(res)
            if res[0] is not None and res[0].best_count.total >= target:
                break
        return out

    def guarded(fn, *args, **kw):
        def job():
            try:
                return fn(*args, **kw), None
            except (PreconditionError, RerouteError) as exc:
                return None, exc
        return job

    nice = [] if "nice-ray" not in strategies else [v for v in range(P.n_vertices) if classify_skew(vertex_figure(P, v), tol, budget).is_nice]
    jobs = [guarded(trace_nice_ray, P, v, tol, sheets=sheets, target=target, seed=seed, budget=budget)
            for v in nice]
    for v, (rep, exc) in zip(nice, run_parallel(jobs)):
        if rep is None:
            warnings.append(f"nice ray from vertex {v} failed: {exc}")
            continue
        if note("nice-ray", rep.best_point, rep.best_count, rep, vertex=v, outcome=rep.outcome):
            return finish(True)

    bins = enumerate_binormals(P, tol).of_kind(VE) if "binormal-walk" in strategies else []
    jobs = [guarded(trace_binormal, P, b, tol, sheets=sheets, target=target, seed=seed, budget=budget)
            for b in bins]
    for b, (rep, exc) in zip(bins, run_parallel(jobs)):
        if rep is None:
            warnings.append(f"binormal walk failed: {exc}")
            continue
        if note("binormal-walk", rep.best_point, rep.best_count, rep,
                vertex=b.start[0][1], edge=b.end[0][1], outcome=rep.outcome, case=rep.case):
            return finish(True)

    y, c = (_cell_sampling(P, tol, rng, target, n_samples, climb_steps)
            if "cell-sampling" in strategies else (None, None))
    if c is not None and note("cell-sampling", y, c):
        return finish(True)
    log.info("target %d not reached; best %d", target, best[0].total)
    return finish(False)
