"""Ball-scale hyperbolic geometry.

Thin-triangle certification of delta, quasi-geodesic predicates, Morse and
local-to-global constants discovered by exhaustive path enumeration, ray
closeness and divergence checks, and gluing of geodesic segments.

Every constant that the theory only asserts to exist is computed here by a
finite search, so each result records the radius it was certified on.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .errors import (
    BudgetExceeded,
    HypothesisViolated,
    InsufficientRadius,
    InvalidInput,
    NoValidWindow,
    PropositionViolated,
    TheoremViolation,
)
from .group import GroupContext, GroupElement, IDENTITY, Segment, format_word

DEFAULT_NODE_CAP = 2_000_000


# -- certificates -------------------------------------------------------------


@dataclass(frozen=True)
class HyperbolicityCertificate:
    delta: int
    radius_certified: int
    method: str = "exhaustive-thin-triangles"
    history: tuple = ()  # (radius, delta) per radius scanned
    stabilized: bool = True
    truncated: bool = False
    triangles: int = 0

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "radius": self.radius_certified,
            "method": self.method,
            "history": [list(p) for p in self.history],
            "stabilized": self.stabilized,
            "truncated": self.truncated,
            "triangles": self.triangles,
        }

    @classmethod
    def from_json(cls, data: dict) -> "HyperbolicityCertificate":
        return cls(
            delta=int(data["delta"]),
            radius_certified=int(data["radius"]),
            method=data.get("method", "exhaustive-thin-triangles"),
            history=tuple(tuple(p) for p in data.get("history", ())),
            stabilized=bool(data.get("stabilized", True)),
            truncated=bool(data.get("truncated", False)),
            triangles=int(data.get("triangles", 0)),
        )


@dataclass(frozen=True)
class QuasiGeodesicParams:
    """(lambda, epsilon) with an optional locality window k."""

    lam: Fraction = Fraction(1)
    eps: int = 0
    k: int | None = None

    def __post_init__(self):
        lam = Fraction(self.lam)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "_unit", lam == 1)
        if not (0 < lam <= 1):
            raise InvalidInput(f"lambda must lie in (0, 1], got {lam}")
        if self.eps < 0:
            raise InvalidInput("epsilon must be non-negative")
        if self.k is not None and self.k < 1:
            raise InvalidInput("k must be positive")

    def bound_ok(self, span: int, d: int) -> bool:
        if d > span:
            return False
        if self._unit:
            return span - self.eps <= d
        return self.lam * span - self.eps <= d

    def to_json(self) -> dict:
        return {"lambda": str(self.lam), "epsilon": self.eps, "k": self.k}

    @classmethod
    def from_json(cls, data: dict) -> "QuasiGeodesicParams":
        return cls(Fraction(data.get("lambda", 1)), int(data.get("epsilon", 0)), data.get("k"))


@dataclass(frozen=True)
class MorseConstant:
    K: int
    params: QuasiGeodesicParams
    radius_certified: int
    K_all: int = 0  # max over every same-endpoint geodesic, not just the best one
    paths: int = 0
    truncated: bool = False

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "K_all_geodesics": self.K_all,
            "params": self.params.to_json(),
            "radius": self.radius_certified,
            "paths": self.paths,
            "truncated": self.truncated,
        }


@dataclass(frozen=True)
class DivergenceConstants:
    delta1: int
    delta2: int
    D: int
    C: int
    radius_certified: int
    K: int = 0
    pairs: int = 0
    exceeding: int = 0
    sampled: bool = False
    vacuous: bool = False
    profile: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "delta1": self.delta1,
            "delta2": self.delta2,
            "D": self.D,
            "C": self.C,
            "K": self.K,
            "radius": self.radius_certified,
            "pairs": self.pairs,
            "exceeding_pairs": self.exceeding,
            "sampled": self.sampled,
            "vacuous": self.vacuous,
        }


# -- delta ----------------------------------------------------------------------


def _bottleneck(ctx: GroupContext, layers: list[dict], p: GroupElement) -> int:
    """max over geodesics in the interval of the distance from p to that geodesic."""
    val: dict[GroupElement, int] = {}
    for layer in layers:
        for v, preds in layer.items():
            d = ctx.distance(p, v)
            if preds:
                d = min(d, max(val[u] for u in preds))
            val[v] = d
    (end,) = layers[-1]
    return val[end]


def triangle_thinness(ctx: GroupContext, x, y, z, floor: int = -1) -> int:
    """Smallest delta making every geodesic triangle on x, y, z delta-thin.

    Values at or below ``floor`` are not resolved exactly (pruning); the
    return value is then ``max(floor, true value)``.
    """
    x, y, z = ctx.mul(x), ctx.mul(y), ctx.mul(z)
    sides = {
        (x, y): ctx.interval(x, y),
        (y, z): ctx.interval(y, z),
        (z, x): ctx.interval(z, x),
    }
    best = max(floor, 0)
    order = [((x, y), (y, z), (z, x)), ((y, z), (z, x), (x, y)), ((z, x), (x, y), (y, z))]
    for side, o1, o2 in order:
        for layer in sides[side]:
            for p in layer:
                # cheap upper bound: distance to the endpoints of the other sides
                ub = min(
                    min(ctx.distance(p, o1[0]), ctx.distance(p, o1[1])),
                    min(ctx.distance(p, o2[0]), ctx.distance(p, o2[1])),
                )
                if ub <= best:
                    continue
                b1 = _bottleneck(ctx, sides[o1], p)
                if b1 <= best:
                    continue
                b2 = _bottleneck(ctx, sides[o2], p)
                best = max(best, min(b1, b2))
    return best


def certify_delta(
    ctx: GroupContext,
    radius: int,
    method: str = "auto",
    budget: int | None = None,
) -> HyperbolicityCertificate:
    """Minimal thinness constant over triangles (1, y, z) with y, z in ball(radius).

    Triangles are taken with one vertex at the identity; every triangle is a
    translate of one of these.  ``method="tree"`` (the default for free
    groups) returns 0 without scanning.  ``budget`` caps the number of
    triangles; exceeding it yields a lower bound with ``truncated=True``.
    """
    if radius < 0:
        raise InvalidInput("negative radius")
    if method == "auto":
        method = "tree" if ctx.is_free else "exhaustive-thin-triangles"
    if method == "tree":
        if not ctx.is_free:
            raise InvalidInput("tree method needs a free presentation")
        hist = tuple((r, 0) for r in range(radius + 1))
        return HyperbolicityCertificate(0, radius, "tree", hist, True, False, 0)
    if method != "exhaustive-thin-triangles":
        raise InvalidInput(f"unknown method {method!r}")

    ctx.ball(radius)
    delta = 0
    hist = []
    seen = 0
    truncated = False
    for r in range(radius + 1):
        if not truncated:
            new = ctx.sphere(r)
            older = ctx.ball(r)
            for y in new:
                for z in older:
                    if len(z) == r and ctx.shortlex_key(z) < ctx.shortlex_key(y):
                        continue  # unordered pair already seen
                    if budget is not None and seen >= budget:
                        truncated = True
                        break
                    seen += 1
                    delta = triangle_thinness(ctx, IDENTITY, y, z, floor=delta)
                if truncated:
                    break
        hist.append((r, delta))
    half = [d for r, d in hist if r >= radius // 2]
    stabilized = len(set(half)) == 1 and radius >= 2
    return HyperbolicityCertificate(
        delta, radius, "exhaustive-thin-triangles", tuple(hist), stabilized, truncated, seen
    )


# -- quasi-geodesics ----------------------------------------------------------


def is_quasi_geodesic(
    path: Segment, params: QuasiGeodesicParams, ctx: GroupContext
) -> tuple[bool, tuple[int, int] | None]:
    """Check lam|s-t| - eps <= d(c(s), c(t)) <= |s-t| on all pairs (|s-t| <= k if local).

    Returns (ok, first violating (s, t) in lexicographic order).
    """
    vals = path.values
    n = len(vals)
    k = params.k
    for i in range(n):
        hi = n if k is None else min(n, i + k + 1)
        for j in range(i + 1, hi):
            if not params.bound_ok(j - i, ctx.distance(vals[i], vals[j])):
                return False, (path.start_index + i, path.start_index + j)
    return True, None


def _extension_ok(ctx: GroupContext, vals: list, params: QuasiGeodesicParams) -> bool:
    t = len(vals) - 1
    p = vals[t]
    lo = 0 if params.k is None else max(0, t - params.k)
    for s in range(lo, t):
        if not params.bound_ok(t - s, ctx.distance(vals[s], p)):
            return False
    return True


def enumerate_paths(
    ctx: GroupContext,
    length: int,
    accept: Callable[[list], bool],
    node_cap: int = DEFAULT_NODE_CAP,
    start: GroupElement = IDENTITY,
) -> Iterator[list]:
    """DFS over edge paths from ``start`` in generator order.

    Yields every accepted path (as a list of elements) with at most
    ``length`` steps, prefixes first.  ``accept`` sees the path with its new
    last vertex and decides whether to keep extending it.  Raises
    BudgetExceeded after ``node_cap`` accepted nodes.
    """
    count = 0
    vals = [ctx.reduce(start)]
    symbols = ctx.symbols

    def rec():
        nonlocal count
        count += 1
        if count > node_cap:
            raise BudgetExceeded(f"path enumeration exceeded {node_cap} nodes")
        yield vals
        if len(vals) - 1 >= length:
            return
        last = vals[-1]
        for s in symbols:
            vals.append(ctx.reduce(last + (s,)))
            if accept(vals):
                yield from rec()
            vals.pop()

    yield from rec()


def local_to_global(
    params_local: QuasiGeodesicParams,
    ctx: GroupContext,
    radius: int,
    certificate: HyperbolicityCertificate,
    node_cap: int = DEFAULT_NODE_CAP,
    with_report: bool = False,
):
    """Global (lam', eps') witnessed by all k-local (lam, eps) paths of length <= radius.

    lam' is kept equal to lam and eps' is the smallest integer making every
    enumerated path satisfy the global inequality.
    """
    k = params_local.k
    if k is None:
        raise InvalidInput("local_to_global needs a locality window k")
    if k <= 8 * certificate.delta:
        raise NoValidWindow(f"k={k} must exceed 8*delta={8 * certificate.delta}")
    lam = params_local.lam
    need = params_local.eps
    nodes = 0
    for vals in enumerate_paths(ctx, radius, lambda v: _extension_ok(ctx, v, params_local), node_cap):
        nodes += 1
        t = len(vals) - 1
        p = vals[t]
        for s in range(t):
            gap = lam * (t - s) - ctx.distance(vals[s], p)
            if gap > need:
                need = math.ceil(gap)
    out = QuasiGeodesicParams(lam, need, None)
    if with_report:
        return out, {"paths": nodes, "radius": radius, "k": k}
    return out


def hausdorff_distance(p: Segment | Sequence, q: Segment | Sequence, ctx: GroupContext) -> int:
    """Symmetrized Hausdorff distance between the vertex sets of two paths."""
    pv = set(p.values if isinstance(p, Segment) else p)
    qv = set(q.values if isinstance(q, Segment) else q)
    if not pv or not qv:
        raise InvalidInput("empty path")

    def one_way(a, b):
        return max(min(ctx.distance(x, y) for y in b) for x in a)

    return max(one_way(pv, qv), one_way(qv, pv))


def _geodesic_vertex_sets(ctx: GroupContext, end: GroupElement) -> list[set]:
    words, _ = ctx.geodesic_words(end)
    out = []
    for w in words:
        cur = IDENTITY
        vs = {cur}
        for s in w:
            cur = ctx.reduce(cur + (s,))
            vs.add(cur)
        out.append(vs)
    return out


def certify_morse(
    params: QuasiGeodesicParams,
    ctx: GroupContext,
    radius: int,
    node_cap: int = DEFAULT_NODE_CAP,
) -> MorseConstant:
    """Morse constant over every (lam, eps)-quasi-geodesic from 1 of length <= radius.

    K is the largest distance from such a path to its closest same-endpoint
    geodesic; K_all uses the farthest geodesic instead.
    """
    K = 0
    K_all = 0
    nodes = 0
    truncated = False
    try:
        for vals in enumerate_paths(ctx, radius, lambda v: _extension_ok(ctx, v, params), node_cap):
            nodes += 1
            pv = set(vals)
            best = None
            worst = 0
            for gv in _geodesic_vertex_sets(ctx, vals[-1]):
                h = hausdorff_distance(list(pv), list(gv), ctx) if pv != gv else 0
                best = h if best is None else min(best, h)
                worst = max(worst, h)
            K = max(K, best)
            K_all = max(K_all, worst)
    except BudgetExceeded:
        truncated = True
    return MorseConstant(K, params, radius, K_all, nodes, truncated)


# -- closeness and fellow travelling -------------------------------------------


def check_closeness(c: Segment, c2: Segment, ctx: GroupContext, certificate: HyperbolicityCertificate) -> dict:
    """Pointwise closeness of two geodesics on a common index interval.

    With D = d(c(start), c2(start)) and T = d(c(end), c2(end)), positions t
    (counted from 1) with t <= R - T - 2*delta must satisfy
    d(c(t), c2(t)) <= D + 4*delta.  Raises PropositionViolated otherwise.
    """
    if c.start_index != c2.start_index or len(c) != len(c2):
        raise InvalidInput("geodesics must share their index interval")
    if not (c.is_geodesic(ctx) and c2.is_geodesic(ctx)):
        raise InvalidInput("check_closeness needs geodesics")
    delta = certificate.delta
    R = len(c)
    D = ctx.distance(c.values[0], c2.values[0])
    T = ctx.distance(c.values[-1], c2.values[-1])
    bound = D + 4 * delta
    last = R - T - 2 * delta
    worst = 0
    compared = 0
    for t in range(1, last + 1):
        d = ctx.distance(c.values[t - 1], c2.values[t - 1])
        compared += 1
        worst = max(worst, d)
        if d > bound:
            raise PropositionViolated(
                f"d(c({t}), c'({t})) = {d} > {bound}",
                {"c": [format_word(v) for v in c.values], "c_prime": [format_word(v) for v in c2.values], "t": t},
            )
    return {"ok": True, "max_distance": worst, "bound": bound, "compared": compared, "D": D, "T": T}


def fellow_travel_upgrade(l_target: int, D: int, certificate: HyperbolicityCertificate) -> int:
    """Window l such that (l, D)-fellow travellers from one point (l_target, 2 delta)-fellow travel."""
    delta = certificate.delta
    if D < 2 * delta:
        raise InvalidInput(f"D={D} must be at least 2*delta={2 * delta}")
    if l_target < 1:
        raise InvalidInput("l_target must be positive")
    return l_target + D + delta


def _geodesic_steps(ctx: GroupContext, g: GroupElement) -> list[GroupElement]:
    """Neighbours of g one step farther from the identity."""
    n = len(g)
    out = []
    for s in ctx.symbols:
        h = ctx.reduce(g + (s,))
        if len(h) == n + 1:
            out.append(h)
    return out


def validate_fellow_travel(
    l_target: int,
    D: int,
    certificate: HyperbolicityCertificate,
    ctx: GroupContext,
    samples: int | None = None,
    seed: int = 0,
    node_cap: int = DEFAULT_NODE_CAP,
) -> dict:
    """Test the upgrade on pairs of geodesics from 1 with l vertices.

    Exhaustive joint search when ``samples`` is None, else random pairs.
    Returns counts and the list of violating pairs.
    """
    l = fellow_travel_upgrade(l_target, D, certificate)
    tight = 2 * certificate.delta
    violations = []
    pairs = 0

    def check(p, q):
        for i in range(min(l_target, l)):
            if ctx.distance(p[i], q[i]) > tight:
                return i + 1
        return None

    if samples is None:
        nodes = 0
        p = [IDENTITY]
        q = [IDENTITY]

        def rec():
            nonlocal pairs, nodes
            nodes += 1
            if nodes > node_cap:
                raise BudgetExceeded("fellow-travel validation exceeded node cap")
            if len(p) == l:
                pairs += 1
                bad = check(p, q)
                if bad is not None:
                    violations.append({"c1": [format_word(v) for v in p], "c2": [format_word(v) for v in q], "i": bad})
                return
            for u in _geodesic_steps(ctx, p[-1]):
                for v in _geodesic_steps(ctx, q[-1]):
                    if ctx.distance(u, v) <= D:
                        p.append(u)
                        q.append(v)
                        rec()
                        p.pop()
                        q.pop()

        rec()
        return {"l": l, "pairs": pairs, "violations": violations, "sampled": False}

    rng = random.Random(seed)

    def options(u0, v0):
        opts = [(u, v) for u in _geodesic_steps(ctx, u0) for v in _geodesic_steps(ctx, v0)
                if ctx.distance(u, v) <= D]
        rng.shuffle(opts)
        if rng.random() < 0.5:
            # try pairs that separate first, where violations would show
            opts.sort(key=lambda o: -ctx.distance(*o))
        return opts

    def sample_pair():
        # randomized depth-first search that backtracks out of dead ends
        p, q = [IDENTITY], [IDENTITY]
        stack = [options(IDENTITY, IDENTITY)]
        steps = 0
        while stack:
            steps += 1
            if steps > node_cap:
                return None
            if len(p) == l:
                return p, q
            if not stack[-1]:
                stack.pop()
                p.pop()
                q.pop()
                continue
            u, v = stack[-1].pop()
            p.append(u)
            q.append(v)
            stack.append(options(u, v) if len(p) < l else [])
        return None

    for _ in range(samples):
        found = sample_pair()
        if found is None:
            continue
        pairs += 1
        bad = check(*found)
        if bad is not None:
            violations.append({"c1": [format_word(v) for v in found[0]],
                               "c2": [format_word(v) for v in found[1]], "i": bad})
    return {"l": l, "pairs": pairs, "violations": violations, "sampled": True}


# -- divergence -----------------------------------------------------------------


def distance_to_image(ctx: GroupContext, x: GroupElement, image: Sequence[GroupElement]) -> int:
    return min(ctx.distance(x, y) for y in image)


def divergence_profile(c: Segment, c2: Segment, ctx: GroupContext) -> list[int]:
    """d(c(t), Img c2) for every t of c, in order."""
    image = list(dict.fromkeys(c2.values))
    return [distance_to_image(ctx, x, image) for x in c.values]


def _valid_prefix(profile: list[int], window: int, params: QuasiGeodesicParams, D: int) -> int:
    """How many leading positions of the profile are unaffected by truncating c2.

    Points of the quasi-geodesic c2 beyond its window lie at distance at least
    lam*window - eps - D - (t - 1) from c(t), so d(c(t), Img c2) is exact while
    that lower bound is not below the truncated value.
    """
    lam, eps = params.lam, params.eps
    n = 0
    for t, d in enumerate(profile, start=1):
        if lam * window - eps - D - (t - 1) < d:
            break
        n += 1
    return n


def classify_pair(
    profile: list[int], valid: int, delta1: int, delta2: int, threshold: int
) -> dict:
    """Trichotomy status of one pair from its divergence profile."""
    t0 = None
    for t in range(1, valid + 1):
        if profile[t - 1] > delta1:
            t0 = t
            break
    if t0 is None:
        return {"branch": "asymptotic", "t0": None, "ok": True}
    t1 = t0 + delta2
    if t1 > valid:
        return {"branch": "undetermined", "t0": t0, "ok": True}
    ok = profile[t1 - 1] > threshold
    return {"branch": "diverging", "t0": t0, "ok": ok, "value": profile[t1 - 1]}


def _random_quasi_path(
    ctx: GroupContext, start: GroupElement, steps: int, params: QuasiGeodesicParams,
    rng: random.Random, target: GroupElement | None = None, steer: int = 0,
) -> list | None:
    vals = [start]
    while len(vals) - 1 < steps:
        last = vals[-1]
        cands = []
        for s in ctx.symbols:
            vals.append(ctx.reduce(last + (s,)))
            if _extension_ok(ctx, vals, params):
                cands.append(vals[-1])
            vals.pop()
        if not cands:
            return None
        if target is not None and len(vals) <= steer:
            dists = [ctx.distance(x, target) for x in cands]
            m = min(dists)
            cands = [x for x, d in zip(cands, dists) if d == m]
        vals.append(rng.choice(cands))
    return vals


def divergence_constants(
    D: int,
    C: int,
    params: QuasiGeodesicParams,
    ctx: GroupContext,
    radius: int,
    certificate: HyperbolicityCertificate,
    morse: MorseConstant,
    budget: int = 200_000,
    samples: int = 500,
    seed: int = 0,
    keep_profiles: int = 8,
) -> DivergenceConstants:
    """Delta_1 = 2K + D + 4 delta and the smallest certified jump Delta_2.

    Pairs are (c, c') of (lam, eps)-quasi-geodesics with ``radius`` steps,
    c from 1 and c' from a point of ball(D).  All pairs are scanned when
    there are at most ``budget`` of them, else ``samples`` seeded random
    pairs steered to fellow travel for a random while.  Delta_2 is the
    smallest s such that every pair whose first exceedance t0 of Delta_1 has
    t0 + s inside the exact window is beyond Delta_1 + C + 10 delta there.
    """
    delta = certificate.delta
    delta1 = 2 * morse.K + D + 4 * delta
    threshold = delta1 + C + 10 * delta
    starts = [y for y in ctx.ball(D)]

    def pair_iter():
        paths = []
        try:
            for vals in enumerate_paths(ctx, radius, lambda v: _extension_ok(ctx, v, params), budget):
                if len(vals) - 1 == radius:
                    paths.append(tuple(vals))
                if len(paths) ** 2 * len(starts) > budget:
                    raise BudgetExceeded("too many pairs")
        except BudgetExceeded:
            return None
        def gen():
            for p in paths:
                for y in starts:
                    for q in paths:
                        yield p, tuple(ctx.reduce(y + v) for v in q)
        return gen()

    exhaustive = pair_iter()
    sampled = exhaustive is None
    if sampled:
        rng = random.Random(seed)

        def gen_sampled():
            made = 0
            tries = 0
            while made < samples and tries < 20 * samples:
                tries += 1
                p = _random_quasi_path(ctx, IDENTITY, radius, params, rng)
                if p is None:
                    continue
                y = rng.choice(starts)
                j = rng.randrange(1, radius + 1)
                q = _random_quasi_path(ctx, ctx.reduce(y), radius, params, rng, target=p[j], steer=j + 1)
                if q is None:
                    continue
                made += 1
                yield tuple(p), tuple(q)

        pairs_source = gen_sampled()
    else:
        pairs_source = exhaustive

    records = []  # (profile, valid, t0)
    npairs = 0
    for p, q in pairs_source:
        npairs += 1
        prof = divergence_profile(Segment(1, p), Segment(1, q), ctx)
        valid = _valid_prefix(prof, radius, params, D)
        t0 = next((t for t in range(1, valid + 1) if prof[t - 1] > delta1), None)
        if t0 is not None:
            records.append((prof, valid, t0, p, q))

    profiles = tuple(tuple(r[0]) for r in records[:keep_profiles])
    if not records:
        return DivergenceConstants(delta1, 0, D, C, radius, morse.K, npairs, 0, sampled, True, profiles)

    for s in range(0, radius + 1):
        fit = [r for r in records if r[2] + s <= r[1]]
        if fit and all(r[0][r[2] + s - 1] > threshold for r in fit):
            return DivergenceConstants(delta1, s, D, C, radius, morse.K, npairs, len(records), sampled, False, profiles)
    prof, valid, t0, p, q = records[0]
    raise InsufficientRadius(
        f"no jump length certifies within radius {radius}",
        {"c": [format_word(v) for v in p], "c_prime": [format_word(v) for v in q], "t0": t0, "valid": valid},
    )


# -- gluing ---------------------------------------------------------------------


def glue(c1: Segment, c2: Segment, n: int, ctx: GroupContext, certificate: HyperbolicityCertificate) -> Segment:
    """Follow c1 up to index n, then continue along c2 from its first point.

    The result is checked to be an n'-local (1, 2 delta)-quasi-geodesic for
    every n' <= n.
    """
    delta = certificate.delta
    n1, n2 = c1.start_index, c1.end_index
    m1, m2 = c2.start_index, c2.end_index
    failed = []
    if not c1.is_geodesic(ctx):
        failed.append("c1 is not a geodesic")
    if not c2.is_geodesic(ctx):
        failed.append("c2 is not a geodesic")
    if not (n1 < n < n2):
        failed.append(f"need n1 < n < n2, got {n1} < {n} < {n2}")
    if not (n2 - n > n):
        failed.append(f"need n2 - n > n, got {n2 - n} <= {n}")
    if not (n > 8 * delta):
        failed.append(f"need n > 8*delta = {8 * delta}")
    if m2 - m1 < n:
        failed.append(f"c2 too short: m2 - m1 = {m2 - m1} < n = {n}")
    if not failed and c1(n) != c2(m1):
        failed.append("c1(n) != c2(m1)")
    if not failed:
        for i in range(1, n + 1):
            d = ctx.distance(c1(n + i), c2(m1 + i))
            if d > 2 * delta:
                failed.append(f"d(c1(n+{i}), c2(m1+{i})) = {d} > 2*delta")
                break
    if failed:
        raise HypothesisViolated(failed)
    values = c1.values[: n - n1 + 1] + c2.values[1:]
    out = Segment(n1, values)
    ok, where = is_quasi_geodesic(out, QuasiGeodesicParams(1, 2 * delta, n), ctx)
    if not ok:
        raise TheoremViolation(f"glued path fails the {n}-local check at {where}", {"pair": where})
    return out
