"""Boundary points, directed systems of geodesics, neighbourhoods and covers.

Rays are indexed from 1: ``ray(1)`` is the basepoint and ``ray(t)`` lies
t - 1 steps further along.  A neighbourhood at level l therefore compares l
points, the first of which is the shared basepoint.

Free groups get exact boundary points (eventually periodic reduced words).
Other presentations store a finite geodesic ray together with its depth.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    DepthExceedsSupport,
    InsufficientDepth,
    InsufficientSupport,
    InvalidInput,
    NotFoundWithinDepth,
    NotStabilized,
    TheoremViolation,
)
from .geometry import HyperbolicityCertificate, fellow_travel_upgrade
from .group import GroupContext, GroupElement, IDENTITY, Segment, format_word


# -- boundary points ------------------------------------------------------------


def _primitive_root(word: tuple) -> tuple:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


def _free_reduce(ctx: GroupContext, word: Iterable[str]) -> tuple:
    out: list[str] = []
    inv = ctx.alphabet.involution
    for s in word:
        if out and out[-1] == inv[s]:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the boundary.

    Exact form: the infinite reduced word ``prefix + period + period + ...``
    stored canonically (shortest prefix, primitive cyclically reduced
    period).  Truncated form: ``ray`` holds ray(1..depth) from the identity.
    """

    prefix: tuple = ()
    period: tuple = ()
    ray: tuple | None = None
    depth: int | None = None

    @property
    def is_exact(self) -> bool:
        return self.ray is None

    # exact points ------------------------------------------------------------

    @classmethod
    def periodic(cls, ctx: GroupContext, prefix: Sequence[str], period: Sequence[str]) -> "BoundaryPoint":
        """Canonical exact point for prefix.period^inf (free groups only)."""
        if ctx.relators:
            raise InvalidInput("exact boundary points need a free group")
        prefix = _free_reduce(ctx, ctx.alphabet.parse(prefix) if isinstance(prefix, str) else prefix)
        period = _free_reduce(ctx, ctx.alphabet.parse(period) if isinstance(period, str) else period)
        return cls._canonical(ctx, prefix, period)

    @classmethod
    def _canonical(cls, ctx: GroupContext, prefix: tuple, period: tuple) -> "BoundaryPoint":
        """Canonical form of prefix.period^inf for freely reduced prefix and period."""
        inv = ctx.alphabet.involution
        moved = False
        # cyclic reduction: x q x^-1 repeated is x q q q ...
        while len(period) >= 2 and period[0] == inv[period[-1]]:
            prefix = prefix + period[:1]
            period = period[1:-1]
            moved = True
        if not period:
            raise InvalidInput("period must not be trivial in the group")
        if moved:
            prefix = _free_reduce(ctx, prefix)
        # cancel the prefix against the periodic tail
        while prefix and prefix[-1] == inv[period[0]]:
            prefix = prefix[:-1]
            period = period[1:] + period[:1]
        period = _primitive_root(period)
        # start the periodic part as early as possible
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = period[-1:] + period[:-1]
        return cls(tuple(prefix), tuple(period))

    @classmethod
    def from_ray(cls, ctx: GroupContext, values: Sequence[Sequence[str]]) -> "BoundaryPoint":
        vals = tuple(ctx.mul(v) for v in values)
        if not vals or vals[0] != IDENTITY:
            raise InvalidInput("a stored ray must start at the identity")
        if not Segment(1, vals).is_geodesic(ctx):
            raise InvalidInput("a stored ray must be geodesic")
        return cls(ray=vals, depth=len(vals))

    def letter(self, ctx: GroupContext, i: int) -> str:
        """The i-th letter (0-based) of the word spelling the ray."""
        if self.is_exact:
            if i < len(self.prefix):
                return self.prefix[i]
            return self.period[(i - len(self.prefix)) % len(self.period)]
        if i + 1 >= len(self.ray):
            raise InsufficientDepth(f"letter {i} beyond stored depth {self.depth}")
        return ctx.step_letter(self.ray[i], self.ray[i + 1])

    def word(self, ctx: GroupContext, n: int) -> tuple:
        """First n letters."""
        if self.is_exact:
            reps = (max(0, n - len(self.prefix)) // len(self.period)) + 1
            return (self.prefix + self.period * reps)[:n]
        return tuple(self.letter(ctx, i) for i in range(n))

    def ray_values(self, ctx: GroupContext, depth: int) -> tuple:
        """ray(1..depth) from the identity."""
        if not self.is_exact:
            if depth > len(self.ray):
                raise InsufficientDepth(f"depth {depth} beyond stored depth {self.depth}")
            return self.ray[:depth]
        w = self.word(ctx, depth - 1)
        return tuple(GroupElement(w[:i]) for i in range(depth))

    def text(self) -> str:
        if not self.is_exact:
            return "ray:" + " ".join(format_word(v) or "1" for v in self.ray)
        per = format_word(self.period)
        tail = per + "^∞" if len(self.period) == 1 else f"({per})^∞"
        return format_word(self.prefix) + tail

    def to_json(self) -> dict:
        if self.is_exact:
            return {"prefix": format_word(self.prefix), "period": format_word(self.period)}
        return {"ray": [format_word(v) for v in self.ray], "depth": self.depth}

    @classmethod
    def from_json(cls, ctx: GroupContext, data: dict) -> "BoundaryPoint":
        if "period" in data:
            return cls.periodic(ctx, data.get("prefix", ""), data["period"])
        if "ray" in data:
            pt = cls.from_ray(ctx, data["ray"])
            if "depth" in data and int(data["depth"]) != pt.depth:
                raise InvalidInput("depth does not match the stored ray")
            return pt
        raise InvalidInput("boundary point needs 'period' or 'ray'")


def act(g: Sequence[str], x: BoundaryPoint, ctx: GroupContext) -> BoundaryPoint:
    """Image of x under left multiplication by g."""
    g = ctx.mul(g)
    if x.is_exact:
        inv = ctx.alphabet.involution
        p = x.prefix
        k = 0
        while k < len(g) and k < len(p) and g[-1 - k] == inv[p[k]]:
            k += 1
        return BoundaryPoint._canonical(ctx, tuple(g[:len(g) - k]) + p[k:], x.period)
    out_depth = x.depth - len(g)
    if out_depth < 1:
        raise InsufficientDepth(f"stored depth {x.depth} too small to translate by |g|={len(g)}")
    end = ctx.mul(g, x.ray[-1])
    vals = tuple(GroupElement(end[:i]) for i in range(min(out_depth, len(end) + 1)))
    return BoundaryPoint(ray=vals, depth=len(vals))


# -- directed systems of geodesics ----------------------------------------------


class DSG:
    """A map from group elements to generators whose iterates trace geodesic rays."""

    ctx: GroupContext

    def __call__(self, g: GroupElement) -> str:
        raise NotImplementedError

    def ray(self, g: Sequence[str], depth: int) -> Segment:
        """c_m^g(1..depth)."""
        ctx = self.ctx
        cur = ctx.mul(g)
        vals = [cur]
        for _ in range(depth - 1):
            cur = ctx.reduce(cur + (self(cur),))
            vals.append(cur)
        return Segment(1, tuple(vals))


@dataclass(frozen=True, eq=False)
class CanonicalDSG(DSG):
    """Free groups: step along the unique geodesic from g towards the point."""

    ctx: GroupContext
    point: BoundaryPoint

    def __call__(self, g: GroupElement) -> str:
        x = self.point
        n = len(g)
        for i in range(n):
            if g[i] != x.letter(self.ctx, i):
                return self.ctx.alphabet.inverse(g[-1])
        return x.letter(self.ctx, n)


@dataclass(frozen=True, eq=False)
class TableDSG(DSG):
    """Explicit assignment on ball(radius)."""

    ctx: GroupContext
    assignment: dict
    radius: int
    stabilized: bool = True
    stable_from: int | None = None

    def __call__(self, g: GroupElement) -> str:
        try:
            return self.assignment[g]
        except KeyError:
            raise DepthExceedsSupport(f"{format_word(g) or '1'} outside DSG support radius {self.radius}") from None

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "assignment": {format_word(g): s for g, s in sorted(
                self.assignment.items(), key=lambda kv: self.ctx.shortlex_key(kv[0]))},
        }


@dataclass(frozen=True, eq=False)
class ShiftedDSG(DSG):
    """The shift g.m : h -> m(g^-1 h)."""

    g: GroupElement
    base: DSG

    @property
    def ctx(self) -> GroupContext:  # type: ignore[override]
        return self.base.ctx

    def __call__(self, h: GroupElement) -> str:
        ctx = self.base.ctx
        return self.base(ctx.mul(ctx.alphabet.invert(self.g), h))


def shift(g: Sequence[str], m: DSG) -> ShiftedDSG:
    return ShiftedDSG(m.ctx.mul(g), m)


def ray_from_dsg(m: DSG, g: Sequence[str], depth: int) -> Segment:
    """The ray g, g m(g), ... with ``depth`` points; checked to be geodesic."""
    if depth < 1:
        raise InvalidInput("depth must be at least 1")
    seg = m.ray(g, depth)
    if not seg.is_geodesic(m.ctx):
        raise TheoremViolation("DSG iterate is not geodesic", {"g": format_word(seg.values[0])})
    return seg


def dsg_from_ray(
    c: BoundaryPoint | Segment,
    ctx: GroupContext,
    depth_budget: int | None = None,
    radius: int | None = None,
    window: int | None = None,
    strict: bool = False,
) -> DSG:
    """A DSG whose ray from 1 is asymptotic to c.

    Exact points give the canonical DSG.  Otherwise, for each sample point
    c(n) the last-letter field re-rooted at c(n), g -> l(c(n)^-1 g), is
    computed on ball(radius) and the last iterate is returned; it is flagged
    stabilized when it has been constant for ``window`` consecutive samples.
    """
    if isinstance(c, BoundaryPoint) and c.is_exact:
        return CanonicalDSG(ctx, c)
    values = c.ray if isinstance(c, BoundaryPoint) else c.values
    if values[0] != IDENTITY:
        raise InvalidInput("ray must start at the identity")
    depth = len(values) if depth_budget is None else min(depth_budget, len(values))
    if radius is None:
        radius = max(0, (depth - 1) // 3)
    if window is None:
        window = max(1, radius)
    ball = ctx.ball(radius)
    inv = ctx.alphabet.inverse

    def field_at(h: GroupElement) -> dict:
        out = {}
        for g in ball:
            w = ctx.mul(ctx.alphabet.invert(h), g)
            out[g] = inv(w[-1])
        return out

    current = None
    stable_from = None
    for n in range(1, depth + 1):
        h = values[n - 1]
        if len(h) <= radius:
            continue  # the field is undefined at h itself
        f = field_at(h)
        if f != current:
            current = f
            stable_from = n
    if current is None:
        raise InsufficientDepth(f"ray of depth {depth} never leaves ball({radius})")
    stabilized = depth - stable_from + 1 >= window
    if strict and not stabilized:
        raise NotStabilized(f"field still changing at sample {stable_from} of {depth}")
    return TableDSG(ctx, current, radius, stabilized, stable_from)


def verify_dsg(m: DSG, ctx: GroupContext, radius: int, depth: int, certificate: HyperbolicityCertificate) -> list[str]:
    """Both DSG axioms on ball(radius) with rays of ``depth`` points."""
    bad = []
    rays = {}
    for g in ctx.ball(radius):
        try:
            seg = m.ray(g, depth)
        except InsufficientSupport:
            bad.append(f"{format_word(g) or '1'}: ray leaves the support")
            continue
        if not seg.is_geodesic(ctx):
            bad.append(f"{format_word(g) or '1'}: ray is not geodesic")
        rays[g] = seg
    for g, h in itertools.combinations(rays, 2):
        bound = ctx.distance(g, h) + 4 * certificate.delta
        for t in range(1, depth + 1):
            if ctx.distance(rays[g](t), rays[h](t)) > bound:
                bad.append(f"{format_word(g) or '1'},{format_word(h) or '1'}: rays separate at t={t}")
                break
    return bad


# -- neighbourhoods -----------------------------------------------------------


def _check_levels(l: int, D: int, certificate: HyperbolicityCertificate) -> None:
    if l <= 8 * certificate.delta:
        raise InvalidInput(f"level l={l} must exceed 8*delta={8 * certificate.delta}")
    if D < 2 * certificate.delta:
        raise InvalidInput(f"D={D} must be at least 2*delta={2 * certificate.delta}")


def neighborhood_contains(
    m2: DSG, m: DSG, l: int, D: int, certificate: HyperbolicityCertificate
) -> bool:
    """m2 in N_m^{l,D}: the rays from 1 stay within D for the first l points."""
    _check_levels(l, D, certificate)
    ctx = m.ctx
    try:
        a = m.ray(IDENTITY, l)
        b = m2.ray(IDENTITY, l)
    except DepthExceedsSupport as exc:
        raise InsufficientSupport(str(exc)) from None
    return all(ctx.distance(a(i), b(i)) <= D for i in range(1, l + 1))


def translated_membership(
    g: Sequence[str], m: DSG, m2: DSG, l: int, D: int, certificate: HyperbolicityCertificate
) -> bool:
    """d(g c_m^{g^-1}(i), c_{m2}^1(i)) <= D for every i <= l."""
    _check_levels(l, D, certificate)
    ctx = m.ctx
    g = ctx.mul(g)
    try:
        a = m.ray(ctx.inv(g), l)
        b = m2.ray(IDENTITY, l)
    except DepthExceedsSupport as exc:
        raise InsufficientSupport(str(exc)) from None
    return all(ctx.distance(ctx.mul(g, a(i)), b(i)) <= D for i in range(1, l + 1))


def point_neighborhood_contains(
    y: BoundaryPoint, x: BoundaryPoint, l: int, ctx: GroupContext, certificate: HyperbolicityCertificate
) -> bool:
    """y in N_x^l, judged on the representatives that can be built.

    Exact points have a single canonical representative each, so this is
    exact.  Stored rays are compared directly together with the DSG built
    from each of them, which only certifies the predicate at stored depth.
    """
    D = 2 * certificate.delta
    if l <= 8 * certificate.delta:
        raise InvalidInput(f"level l={l} must exceed 8*delta={8 * certificate.delta}")
    if x.is_exact and y.is_exact:
        return y.word(ctx, l - 1) == x.word(ctx, l - 1) if D == 0 else neighborhood_contains(
            CanonicalDSG(ctx, y), CanonicalDSG(ctx, x), l, D, certificate)
    xs = [x.ray_values(ctx, l)]
    ys = [y.ray_values(ctx, l)]
    return all(
        ctx.distance(a[i], b[i]) <= D for a in xs for b in ys for i in range(l)
    )


# -- covers -----------------------------------------------------------------------


def cylinder_center(ctx: GroupContext, word: Sequence[str]) -> BoundaryPoint:
    """A fixed exact point whose ray begins with ``word``."""
    word = tuple(word)
    if not word:
        return BoundaryPoint.periodic(ctx, (), ctx.symbols[:1])
    return BoundaryPoint.periodic(ctx, word[:-1], word[-1:])


@dataclass(frozen=True)
class Cover:
    """Finite family of neighbourhoods N_center^l.

    ``elements`` lists (center, l).  For a free group the family of all
    cylinders of one level can be kept implicit (``cylinder_level``) when it
    is too large to list.
    """

    elements: tuple = ()
    kind: str = "U-cover"
    cylinder_level: int | None = None
    certified_depth: int | None = None
    notes: tuple = field(default=(), compare=False)

    def size(self, ctx: GroupContext) -> int:
        if self.cylinder_level is None:
            return len(self.elements)
        n = self.cylinder_level - 1
        r = len(ctx.symbols)
        return 1 if n == 0 else r * (r - 1) ** (n - 1)

    def containing(self, y: BoundaryPoint, ctx: GroupContext, certificate: HyperbolicityCertificate) -> list:
        """Elements (center, l) that contain y."""
        if self.cylinder_level is not None:
            l = self.cylinder_level
            return [(cylinder_center(ctx, y.word(ctx, l - 1)), l)]
        if certificate.delta == 0 and y.is_exact and self._all_exact():
            # with delta = 0 membership is agreement of the first l - 1 letters
            index = self._prefix_index(ctx)
            out = []
            for l, table in index.items():
                out.extend(table.get(y.word(ctx, l - 1), ()))
            return [e for _, e in sorted(out, key=lambda pe: pe[0])]
        return [(c, l) for c, l in self.elements if point_neighborhood_contains(y, c, l, ctx, certificate)]

    def _all_exact(self) -> bool:
        cached = self.__dict__.get("_exact")
        if cached is None:
            cached = all(c.is_exact for c, _ in self.elements)
            object.__setattr__(self, "_exact", cached)
        return cached

    def _prefix_index(self, ctx: GroupContext) -> dict:
        cached = self.__dict__.get("_index")
        if cached is None:
            cached = {}
            for pos, (c, l) in enumerate(self.elements):
                cached.setdefault(l, {}).setdefault(c.word(ctx, l - 1), []).append((pos, (c, l)))
            object.__setattr__(self, "_index", cached)
        return cached

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.cylinder_level is not None:
            out["cylinder_level"] = self.cylinder_level
        else:
            out["elements"] = [{"center": c.to_json(), "l": l} for c, l in self.elements]
        if self.certified_depth is not None:
            out["certified_depth"] = self.certified_depth
        return out

    @classmethod
    def from_json(cls, ctx: GroupContext, data) -> "Cover":
        if isinstance(data, list):
            data = {"elements": data}
        if "cylinder_level" in data:
            return cls((), data.get("kind", "U-cover"), int(data["cylinder_level"]))
        elems = tuple((BoundaryPoint.from_json(ctx, e["center"]), int(e["l"])) for e in data["elements"])
        return cls(elems, data.get("kind", "U-cover"), None, data.get("certified_depth"))


def sample_points(ctx: GroupContext, depth: int) -> list[BoundaryPoint]:
    """One boundary point per geodesic word of length depth - 1."""
    n = depth - 1
    if ctx.is_free and ctx.r_max is None:
        return [cylinder_center(ctx, w) for w in ctx.sphere(n)]
    return [BoundaryPoint(ray=tuple(GroupElement(w[:i]) for i in range(len(w) + 1)), depth=len(w) + 1)
            for w in ctx.sphere(n)]


def cover_for_l(
    l: int,
    certificate: HyperbolicityCertificate,
    ctx: GroupContext,
    kind: str = "U-cover",
    explicit_limit: int = 5000,
) -> Cover:
    """A cover whose elements are pairwise within N^l of each other.

    Uses neighbourhoods N_x^{l'} with l' the fellow-travel upgrade of l for
    D = 4 delta, centred at greedily chosen sample points of depth l'.
    """
    if l <= 8 * certificate.delta:
        raise InvalidInput(f"level l={l} must exceed 8*delta={8 * certificate.delta}")
    lp = fellow_travel_upgrade(l, 4 * certificate.delta, certificate)
    if ctx.is_free and ctx.r_max is None:
        n = lp - 1
        r = len(ctx.symbols)
        count = 1 if n == 0 else r * (r - 1) ** (n - 1)
        if count > explicit_limit:
            return Cover((), kind, lp, None, (f"implicit cylinders of level {lp}",))
        return Cover(tuple((cylinder_center(ctx, w), lp) for w in ctx.sphere(n)), kind, None, None)
    chosen: list = []
    for y in sample_points(ctx, lp):
        if not any(point_neighborhood_contains(y, c, lp, ctx, certificate) for c, _ in chosen):
            chosen.append((y, lp))
    return Cover(tuple(chosen), kind, None, lp, ("greedy over sampled rays; depth-certified only",))


def lebesgue_l(
    cover: Cover,
    certificate: HyperbolicityCertificate,
    ctx: GroupContext,
    sample_depth: int,
) -> int:
    """Smallest l such that sampled pairs in each other's N^{l,2 delta} share an element."""
    pts = sample_points(ctx, sample_depth)
    homes = [set(map(_key, cover.containing(p, ctx, certificate))) for p in pts]
    if any(not h for h in homes):
        raise InvalidInput("cover does not cover the sampled points")
    D = 2 * certificate.delta
    rays = [p.ray_values(ctx, sample_depth) for p in pts]
    for l in range(8 * certificate.delta + 1, sample_depth + 1):
        ok = True
        for i, j in itertools.combinations(range(len(pts)), 2):
            if homes[i] & homes[j]:
                continue
            if all(ctx.distance(rays[i][t], rays[j][t]) <= D for t in range(l)):
                ok = False
                break
        if ok:
            return l
    raise NotFoundWithinDepth(f"no level up to {sample_depth} works for this cover")


def _key(elem) -> tuple:
    c, l = elem
    return (c.prefix, c.period, c.ray, l)
