"""From a pseudo-orbit on the boundary to a point whose orbit shadows it.

Pipeline: derive the constants, build or load a pseudo-orbit, glue blocks of
the chosen DSG rays into a local quasi-geodesic c(g), straighten it to a
geodesic, read off the boundary point and check it against the pseudo-orbit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .boundary import (
    BoundaryPoint,
    CanonicalDSG,
    Cover,
    DSG,
    TableDSG,
    act,
    cover_for_l,
    dsg_from_ray,
    translated_membership,
)
from .errors import (
    ClaimViolated,
    ConsistencyViolated,
    InsufficientDepth,
    InsufficientSupport,
    InvalidInput,
    NoRayWithinK,
    PerturbationTooLarge,
    SeamMismatch,
    SupportExhausted,
)
from .geometry import (
    HyperbolicityCertificate,
    MorseConstant,
    QuasiGeodesicParams,
    _valid_prefix,
    certify_morse,
    distance_to_image,
    divergence_constants,
    is_quasi_geodesic,
    local_to_global,
)
from .group import GroupContext, GroupElement, IDENTITY, Segment, format_word


def _w(g) -> str:
    return format_word(g) or "1"


# -- constants ------------------------------------------------------------------


@dataclass(frozen=True)
class ShadowingConstants:
    delta: int
    l: int
    k: int
    lam: Fraction
    eps: int
    K: int
    J: int
    delta1: int
    delta2: int
    C: int
    L: int
    F_radius: int
    radii: dict = field(default_factory=dict, compare=False)
    flags: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.J != max(self.k + 1, self.K + 2 * self.delta + self.l + 1):
            raise InvalidInput("J does not match max{k+1, K+2delta+l+1}")
        if self.C != 2 * self.J + 1:
            raise InvalidInput("C must be 2J+1")
        if self.L != max(self.delta1 + 2 + 2 * self.J, self.J + 1 + self.delta2):
            raise InvalidInput("L does not match max{delta1+2+2J, J+1+delta2}")
        if self.F_radius != self.L:
            raise InvalidInput("F_radius must equal L")

    @property
    def params(self) -> QuasiGeodesicParams:
        return QuasiGeodesicParams(self.lam, self.eps)

    @classmethod
    def assemble(cls, delta, l, k, lam, eps, K, delta1, delta2, radii=None, flags=None) -> "ShadowingConstants":
        J = max(k + 1, K + 2 * delta + l + 1)
        L = max(delta1 + 2 + 2 * J, J + 1 + delta2)
        return cls(delta, l, k, Fraction(lam), eps, K, J, delta1, delta2, 2 * J + 1, L, L,
                   dict(radii or {}), dict(flags or {}))

    def to_json(self) -> dict:
        return {
            "delta": self.delta, "l": self.l, "k": self.k, "lambda": str(self.lam),
            "epsilon": self.eps, "K": self.K, "J": self.J, "delta1": self.delta1,
            "delta2": self.delta2, "C": self.C, "L": self.L, "F_radius": self.F_radius,
            "radii": self.radii, "flags": self.flags,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ShadowingConstants":
        return cls(
            data["delta"], data["l"], data["k"], Fraction(data["lambda"]), data["epsilon"],
            data["K"], data["J"], data["delta1"], data["delta2"], data["C"], data["L"],
            data["F_radius"], data.get("radii", {}), data.get("flags", {}),
        )


def choose_k(ctx: GroupContext, certificate: HyperbolicityCertificate, radius: int, k_max: int | None = None):
    """Smallest k > 8 delta whose global constants agree at radius - 1 and radius."""
    delta = certificate.delta
    k_max = k_max if k_max is not None else 8 * delta + 1 + radius
    for k in range(8 * delta + 1, k_max + 1):
        local = QuasiGeodesicParams(1, 2 * delta, k)
        small = local_to_global(local, ctx, radius - 1, certificate)
        big = local_to_global(local, ctx, radius, certificate)
        if small == big:
            return k, big
    raise InsufficientDepth(f"no k up to {k_max} gives stable constants at radius {radius}")


def derive_constants(
    cover_l: int,
    certificate: HyperbolicityCertificate,
    ctx: GroupContext,
    l2g_radius: int = 8,
    morse_radius: int = 8,
    divergence_radius: int = 40,
    divergence_samples: int = 500,
    seed: int = 0,
    k: int | None = None,
) -> ShadowingConstants:
    """Run the constants chain l -> (k, lam, eps) -> K -> J -> (Delta1, Delta2) -> L."""
    delta = certificate.delta
    if cover_l <= 8 * delta:
        raise InvalidInput(f"cover level l={cover_l} must exceed 8 delta = {8 * delta}")
    if k is None:
        k, glob = choose_k(ctx, certificate, l2g_radius)
    else:
        glob = local_to_global(QuasiGeodesicParams(1, 2 * delta, k), ctx, l2g_radius, certificate)
    morse: MorseConstant = certify_morse(glob, ctx, morse_radius)
    J = max(k + 1, morse.K + 2 * delta + cover_l + 1)
    div = divergence_constants(1, 2 * J + 1, glob, ctx, divergence_radius, certificate, morse,
                               samples=divergence_samples, seed=seed)
    radii = {
        "delta": certificate.radius_certified,
        "local_to_global": l2g_radius,
        "morse": morse_radius,
        "divergence": divergence_radius,
    }
    flags = {
        "morse_truncated": morse.truncated,
        "divergence_sampled": div.sampled,
        "divergence_vacuous": div.vacuous,
        "delta_method": certificate.method,
    }
    return ShadowingConstants.assemble(delta, cover_l, k, glob.lam, glob.eps, morse.K,
                                       div.delta1, div.delta2, radii, flags)


# -- pseudo-orbits ----------------------------------------------------------------


def _random_tail(ctx: GroupContext, head: tuple, rng: random.Random) -> BoundaryPoint:
    """An exact point starting with ``head`` and continuing with a random periodic word."""
    inv = ctx.alphabet.inverse
    syms = ctx.symbols
    while True:
        n = rng.randint(1, 3)
        per: list[str] = []
        prev = head[-1] if head else None
        for _ in range(n):
            s = rng.choice([t for t in syms if prev is None or t != inv(prev)])
            per.append(s)
            prev = s
        if len(per) > 1 and per[0] == inv(per[-1]):
            continue
        pt = BoundaryPoint._canonical(ctx, tuple(head), tuple(per))
        if pt.word(ctx, len(head)) == head:
            return pt


@dataclass
class PseudoOrbit:
    """Boundary points x_g for g in ball(support_radius), generated on demand.

    Generated points copy the first ``noise_depth`` letters of g.x0 and
    continue with a random periodic tail seeded by (seed, g); with
    ``noise_depth`` None the true orbit is used.  ``overrides`` replaces
    individual points, which is how corrupted inputs are made.
    """

    ctx: GroupContext
    support_radius: int
    x0: BoundaryPoint | None = None
    noise_depth: int | None = None
    seed: int = 0
    overrides: dict = field(default_factory=dict)
    reps_override: dict = field(default_factory=dict)
    v_cover: Cover | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def in_support(self, g: GroupElement) -> bool:
        return len(g) <= self.support_radius

    def point(self, g: Sequence[str]) -> BoundaryPoint:
        g = self.ctx.mul(g)
        if not self.in_support(g):
            raise InsufficientSupport(f"{_w(g)} outside support radius {self.support_radius}")
        if g in self.overrides:
            return self.overrides[g]
        hit = self._cache.get(g)
        if hit is not None:
            return hit
        if self.x0 is None:
            raise InsufficientSupport(f"no point stored for {_w(g)}")
        true = act(g, self.x0, self.ctx)
        if self.noise_depth is None:
            pt = true
        else:
            rng = random.Random(f"{self.seed}:{format_word(g)}")
            pt = _random_tail(self.ctx, true.word(self.ctx, self.noise_depth), rng)
        self._cache[g] = pt
        return pt

    def rep(self, g: Sequence[str]) -> DSG:
        """The chosen DSG m_g representing x_g."""
        g = self.ctx.mul(g)
        if g in self.reps_override:
            return self.reps_override[g]
        pt = self.point(g)
        if pt.is_exact:
            return CanonicalDSG(self.ctx, pt)
        return dsg_from_ray(pt, self.ctx)

    def to_json(self) -> dict:
        out: dict = {"support_radius": self.support_radius}
        if self.x0 is not None:
            out["generator"] = {
                "x0": self.x0.to_json(),
                "noise_depth": self.noise_depth,
                "seed": self.seed,
            }
        key = self.ctx.shortlex_key
        out["points"] = {format_word(g): p.to_json() for g, p in sorted(self.overrides.items(), key=lambda kv: key(kv[0]))}
        out["reps"] = {format_word(g): m.to_json() for g, m in sorted(self.reps_override.items(), key=lambda kv: key(kv[0]))
                       if isinstance(m, TableDSG)}
        return out

    @classmethod
    def from_json(cls, ctx: GroupContext, data: dict, v_cover: Cover | None = None) -> "PseudoOrbit":
        gen = data.get("generator") or {}
        x0 = BoundaryPoint.from_json(ctx, gen["x0"]) if "x0" in gen else None
        overrides = {ctx.element(w): BoundaryPoint.from_json(ctx, p) for w, p in data.get("points", {}).items()}
        reps = {}
        for w, r in data.get("reps", {}).items():
            assign = {ctx.element(k): v for k, v in r["assignment"].items()}
            reps[ctx.element(w)] = TableDSG(ctx, assign, int(r["radius"]))
        return cls(ctx, int(data["support_radius"]), x0, gen.get("noise_depth"), int(gen.get("seed", 0)),
                   overrides, reps, v_cover)


def _adversarial_f(po: PseudoOrbit, g: GroupElement, L: int, rng: random.Random) -> list[GroupElement]:
    """Elements of ball(L) that cancel against the start of x_g, plus a random tail."""
    ctx = po.ctx
    x = po.point(g)
    out = []
    for n in range(1, L + 1):
        word = x.word(ctx, n) if x.is_exact else ctx.mul(x.ray[min(n, len(x.ray) - 1)])
        f = ctx.inv(word)
        if len(f) > L:
            break
        out.append(f)
        extra = L - len(f)
        if extra > 0:
            tail = []
            for _ in range(rng.randint(0, extra)):
                tail.append(rng.choice(ctx.symbols))
            h = ctx.reduce(tuple(tail) + tuple(f))
            if len(h) <= L:
                out.append(h)
    return out


def check_pseudo_orbit(
    po: PseudoOrbit,
    constants: ShadowingConstants,
    certificate: HyperbolicityCertificate,
    g_radius: int = 2,
    f_radius: int = 2,
    samples: int = 200,
    seed: int = 0,
    g_list: Sequence | None = None,
    max_violations: int = 20,
) -> tuple[bool, list]:
    """Check f.m_g in N_{m_fg}^{L, 2 delta} on a deterministic family of (f, g).

    g ranges over ball(g_radius) (or ``g_list``); f over ball(f_radius), the
    inverses of initial pieces of x_g (the cancelling ones) and ``samples``
    random elements of ball(L).  The cover form "s x_g and x_sg share an
    element of V" is checked for every generator s when a V-cover is set.
    """
    ctx = po.ctx
    if po.support_radius < 0:
        return True, []
    L = constants.L
    D = 2 * certificate.delta
    rng = random.Random(f"check:{seed}")
    gs = [ctx.mul(g) for g in g_list] if g_list is not None else [
        g for g in ctx.ball(min(g_radius, po.support_radius))]
    small_f = ctx.ball(min(f_radius, L))
    violations = []
    checked = 0
    for g in gs:
        fs = list(small_f) + _adversarial_f(po, g, L, rng)
        for _ in range(samples // max(1, len(gs))):
            n = rng.randint(0, L)
            fs.append(ctx.reduce(tuple(rng.choice(ctx.symbols) for _ in range(n))))
        seen = set()
        mg = po.rep(g)
        for f in fs:
            if f in seen or len(f) > L:
                continue
            seen.add(f)
            fg = ctx.mul(f, g)
            if not po.in_support(fg):
                continue
            checked += 1
            if not translated_membership(f, mg, po.rep(fg), L, D, certificate):
                violations.append({"kind": "membership", "f": _w(f), "g": _w(g), "fg": _w(fg)})
                if len(violations) >= max_violations:
                    return False, violations
        if po.v_cover is not None:
            for s in ctx.symbols:
                sg = ctx.mul((s,), g)
                if not po.in_support(sg):
                    continue
                a = po.v_cover.containing(act((s,), po.point(g), ctx), ctx, certificate)
                b = po.v_cover.containing(po.point(sg), ctx, certificate)
                if not set(map(_ekey, a)) & set(map(_ekey, b)):
                    violations.append({"kind": "v-cover", "f": s, "g": _w(g), "fg": _w(sg)})
    return not violations, violations


def _ekey(e):
    c, l = e
    return (c.prefix, c.period, c.ray, l)


def make_pseudo_orbit(
    x0: BoundaryPoint,
    noise: int | None,
    constants: ShadowingConstants,
    support_radius: int,
    seed: int,
    ctx: GroupContext,
    certificate: HyperbolicityCertificate,
    v_cover: Cover | None = None,
    check: bool = True,
) -> PseudoOrbit:
    """Pseudo-orbit around the orbit of x0, each point kept for ``noise`` letters.

    ``noise`` None or 0 gives the true orbit.  Otherwise x_g agrees with
    g.x0 on its first ``noise`` letters and has a random tail after that.
    Raises PerturbationTooLarge if the result fails check_pseudo_orbit.
    """
    if support_radius < 0:
        raise InvalidInput("support radius must be non-negative")
    depth = None if not noise else int(noise)
    if v_cover is None:
        v_cover = cover_for_l(constants.L, certificate, ctx, kind="V-cover")
    po = PseudoOrbit(ctx, support_radius, x0, depth, seed, v_cover=v_cover)
    if check:
        ok, bad = check_pseudo_orbit(po, constants, certificate, seed=seed)
        if not ok:
            raise PerturbationTooLarge(f"perturbed points leave the V-constraint, e.g. {bad[0]}")
    return po


# -- construction ---------------------------------------------------------------


@dataclass(frozen=True)
class ConstructedPath:
    g: GroupElement
    values: Segment
    breakpoints: tuple  # (r, h_r): block r starts at index (r-1)J at h_r
    J: int
    exhausted: bool = False
    ctx: GroupContext | None = field(default=None, compare=False, repr=False)

    @property
    def depth(self) -> int:
        return len(self.values)

    def to_json(self) -> dict:
        return {
            "g": _w(self.g),
            "depth": self.depth,
            "breakpoints": [[r, _w(h)] for r, h in self.breakpoints],
            "exhausted": self.exhausted,
        }


def construct_path(
    g: Sequence[str],
    po: PseudoOrbit,
    constants: ShadowingConstants,
    depth: int | None = None,
    strict: bool = False,
) -> ConstructedPath:
    """c(g) on [1, depth], glued from blocks of length J of the chosen DSG rays.

    Block 1 is c_{m_g}^1 on [1, J].  Block r >= 2 starts at h_r = c(g)((r-1)J)
    and follows h_r c_{m_{h_r^-1 g}}^1 on [(r-1)J, rJ].  Construction stops
    at ``depth`` or when h_r^-1 g leaves the support (then ``exhausted`` is
    set, or SupportExhausted is raised when ``strict``).
    """
    ctx = po.ctx
    g = ctx.mul(g)
    J = constants.J
    target = depth if depth is not None else 10 ** 9
    first = po.rep(g).ray(IDENTITY, min(J, target))
    vals = list(first.values)
    breaks = [(1, IDENTITY)]
    exhausted = False
    r = 2
    while len(vals) < target and len(vals) >= J:
        start = (r - 1) * J
        h = vals[start - 1]
        x = ctx.mul(ctx.alphabet.invert(h), g)
        if not po.in_support(x):
            exhausted = True
            break
        block = po.rep(x).ray(IDENTITY, J + 1)
        moved = [ctx.mul(h, v) for v in block.values]
        if moved[0] != vals[start - 1]:
            raise SeamMismatch(f"block {r} does not start at c(g)({start})",
                               {"g": _w(g), "r": r, "expected": _w(vals[start - 1]), "got": _w(moved[0])})
        vals.extend(moved[1:])
        breaks.append((r, h))
        r += 1
    if depth is not None and len(vals) > depth:
        vals = vals[:depth]
    path = ConstructedPath(g, Segment(1, tuple(vals)), tuple(breaks), J, exhausted, ctx)
    if exhausted and strict and depth is not None and len(vals) < depth:
        exc = SupportExhausted(f"support radius {po.support_radius} reached at depth {len(vals)}")
        exc.path = path  # type: ignore[attr-defined]
        raise exc
    return path


def check_claim(
    path: ConstructedPath,
    constants: ShadowingConstants,
    certificate: HyperbolicityCertificate,
    raise_on_fail: bool = True,
) -> dict:
    """Local quasi-geodesic check of the glued path.

    Windows [1, 2J] and [rJ, (r+2)J] must be J-local (1, 2 delta)
    quasi-geodesics (this covers every J' between k and J), and the whole
    path k-local (1, 2 delta).
    """
    ctx = path.ctx
    J, k = constants.J, constants.k
    seg = path.values
    eps = 2 * certificate.delta
    windows = [(1, 2 * J)] + [(r * J, (r + 2) * J) for r in range(1, seg.end_index // J + 1)]
    checked = 0
    for lo, hi in windows:
        if lo >= seg.end_index:
            break
        part = seg.restrict(lo, hi)
        checked += 1
        ok, pair = is_quasi_geodesic(part, QuasiGeodesicParams(1, eps, J), ctx)
        if not ok:
            report = {"ok": False, "window": [lo, min(hi, seg.end_index)], "pair": list(pair), "windows": checked}
            if raise_on_fail:
                raise ClaimViolated(f"window [{lo}, {hi}] fails at {pair}", report)
            return report
    ok, pair = is_quasi_geodesic(seg, QuasiGeodesicParams(1, eps, k), ctx)
    if not ok:
        report = {"ok": False, "window": [1, seg.end_index], "pair": list(pair), "windows": checked}
        if raise_on_fail:
            raise ClaimViolated(f"path is not {k}-local at {pair}", report)
        return report
    return {"ok": True, "windows": checked, "depth": path.depth}


def mutate_path(path: ConstructedPath, index: int, symbol: str | None = None) -> ConstructedPath:
    """Negative control: insert a there-and-back step at ``index``."""
    ctx = path.ctx
    seg = path.values
    v = seg(index)
    nxt = seg(index + 1) if index < seg.end_index else None
    s = symbol
    if s is None:
        s = next(t for t in ctx.symbols if ctx.reduce(v + (t,)) != nxt)
    spike = ctx.reduce(v + (s,))
    i = index - seg.start_index
    vals = seg.values[: i + 1] + (spike, v) + seg.values[i + 1:]
    return ConstructedPath(path.g, Segment(seg.start_index, vals), path.breakpoints, path.J, path.exhausted, ctx)


def straighten(path: ConstructedPath, constants: ShadowingConstants, ctx: GroupContext | None = None) -> Segment:
    """ShortLex-least geodesic from 1 to the end of the path within Hausdorff distance K of it."""
    ctx = ctx or path.ctx
    K = constants.K
    vals = list(dict.fromkeys(path.values.values))
    end = path.values.values[-1]
    n = len(end)
    if path.values.is_geodesic(ctx) and path.values.values[0] == IDENTITY:
        return Segment(1, path.values.values)
    dead: set = set()
    word = [IDENTITY]

    def near(v):
        return distance_to_image(ctx, v, vals) <= K

    def covers(geo):
        return all(distance_to_image(ctx, p, geo) <= K for p in vals)

    def rec():
        u = word[-1]
        if len(word) - 1 == n:
            return u == end and covers(word)
        for s in ctx.symbols:
            v = ctx.reduce(u + (s,))
            if v in dead or len(v) != len(word) or ctx.distance(v, end) != n - len(word):
                continue
            if not near(v):
                dead.add(v)
                continue
            word.append(v)
            if rec():
                return True
            word.pop()
        return False

    if not near(IDENTITY) or not rec():
        raise NoRayWithinK(f"no geodesic within K={K} of c({_w(path.g)})",
                           {"g": _w(path.g), "path": [_w(v) for v in path.values.values]})
    return Segment(1, tuple(word))


def completion_point(path: ConstructedPath, po: PseudoOrbit) -> BoundaryPoint:
    """The point reached by continuing the last block's DSG ray forever."""
    ctx = po.ctx
    _, h = path.breakpoints[-1]
    return act(h, po.point(ctx.mul(ctx.alphabet.invert(h), path.g)), ctx)


def _agreement(ctx: GroupContext, x: BoundaryPoint, ray: Segment) -> int:
    pts = x.ray_values(ctx, len(ray)) if x.is_exact else x.ray[: len(ray)]
    n = 0
    for a, b in zip(pts, ray.values):
        if a != b:
            break
        n += 1
    return n


@dataclass
class ShadowResult:
    point: BoundaryPoint
    certified_depth: int
    path: ConstructedPath
    ray: Segment
    report: dict


def _point_for(path: ConstructedPath, po: PseudoOrbit, ray: Segment) -> tuple[BoundaryPoint, int]:
    ctx = po.ctx
    if po.x0 is not None and po.x0.is_exact:
        x = completion_point(path, po)
        return x, _agreement(ctx, x, ray)
    return BoundaryPoint(ray=ray.values, depth=len(ray)), len(ray)


def proximity_chain(
    po: PseudoOrbit,
    constants: ShadowingConstants,
    certificate: HyperbolicityCertificate,
    gs: Sequence,
    depth: int | None = None,
) -> list[dict]:
    """For each g: d(c_{m_g}^1(t), c_{m(g)}^1(t)) <= 2 delta for t <= J - K - 2 delta."""
    ctx = po.ctx
    span = constants.J - constants.K - 2 * certificate.delta
    out = []
    for g in gs:
        g = ctx.mul(g)
        path = construct_path(g, po, constants, depth)
        ray = straighten(path, constants, ctx)
        xg, cert = _point_for(path, po, ray)
        a = po.rep(g).ray(IDENTITY, span)
        b = dsg_from_ray(xg, ctx).ray(IDENTITY, span) if xg.is_exact else ray.restrict(1, span)
        worst = max(ctx.distance(a(t), b(t)) for t in range(1, span + 1))
        ok = worst <= 2 * certificate.delta
        entry = {"g": _w(g), "window": span, "max_distance": worst, "ok": ok,
                 "in_level_l": span >= constants.l and ok}
        if not ok:
            raise ConsistencyViolated(f"m({_w(g)}) drifts from m_g within the first {span} points", entry)
        out.append(entry)
    return out


def shadow(
    po: PseudoOrbit,
    constants: ShadowingConstants,
    ctx: GroupContext,
    certificate: HyperbolicityCertificate,
    depth: int | None = None,
    chain_radius: int = 1,
) -> ShadowResult:
    """Shadow point x = Q(m(1)) of the pseudo-orbit, with its certificate chain."""
    path = construct_path(IDENTITY, po, constants, depth)
    claim = check_claim(path, constants, certificate)
    ray = straighten(path, constants, ctx)
    x, cert = _point_for(path, po, ray)
    chain = proximity_chain(po, constants, certificate, ctx.ball(chain_radius), depth)
    report = {
        "shadow": x.text(),
        "shadow_point": x.to_json(),
        "certified_depth": cert,
        "path": path.to_json(),
        "claim": claim,
        "straightened_length": len(ray),
        "chain": chain,
    }
    return ShadowResult(x, cert, path, ray, report)


def verify_shadowing(
    po: PseudoOrbit,
    x: BoundaryPoint,
    u_cover: Cover,
    check_radius: int,
    ctx: GroupContext,
    certificate: HyperbolicityCertificate,
    certified_depth: int | None = None,
) -> tuple[bool, dict]:
    """For every g in ball(check_radius), find a U-cover element holding g.x and x_g."""
    if check_radius > po.support_radius:
        raise InvalidInput("check radius exceeds the pseudo-orbit support")
    if certified_depth is not None:
        levels = [l for _, l in u_cover.elements] or [u_cover.cylinder_level or 1]
        need = check_radius + max(levels) + 1
        if certified_depth < need:
            raise InsufficientDepth(f"shadow certified to depth {certified_depth}, need {need}")
    witness = {}
    failures = []
    for g in ctx.ball(check_radius):
        a = u_cover.containing(act(g, x, ctx), ctx, certificate)
        b = set(map(_ekey, u_cover.containing(po.point(g), ctx, certificate)))
        hit = next((e for e in a if _ekey(e) in b), None)
        if hit is None:
            failures.append(_w(g))
        else:
            witness[g] = hit
    return not failures, {"checked": len(witness) + len(failures), "failures": failures, "witness": witness}


# -- consistency of neighbouring constructions ---------------------------------


def _frames(path: ConstructedPath, ctx: GroupContext) -> list[GroupElement]:
    ginv = ctx.alphabet.invert(path.g)
    return [ctx.mul(ginv, h) for _, h in path.breakpoints]


def lemma_distance_bound(po: PseudoOrbit, a, b, constants, certificate) -> tuple[int, int]:
    """max_t d(b c_{m_{b^-1}}(t), a c_{m_{a^-1}}(t)) - d(a, b) over t <= L, and its allowance 6 delta."""
    ctx = po.ctx
    L = constants.L
    ra = po.rep(ctx.inv(a)).ray(IDENTITY, L)
    rb = po.rep(ctx.inv(b)).ray(IDENTITY, L)
    d0 = ctx.distance(a, b)
    worst = max(ctx.distance(ctx.mul(b, rb(t)), ctx.mul(a, ra(t))) for t in range(1, L + 1)) - d0
    return worst, 6 * certificate.delta


def lemma_restart_bound(po: PseudoOrbit, x, constants, certificate) -> tuple[int, int]:
    """max over t <= J + Delta2, i <= Delta2 of d(x c(t+i-1), f c_{m_{f^-1}}(i)) with f = x c(t).

    Both points sit i - 1 steps past f, since f is point 1 of its own ray.
    """
    ctx = po.ctx
    J, D2 = constants.J, constants.delta2
    ray = po.rep(ctx.inv(x)).ray(IDENTITY, J + 2 * D2)
    worst = 0
    for t in range(1, J + D2 + 1):
        f = ctx.mul(x, ray(t))
        if not po.in_support(ctx.inv(f)):
            continue
        rf = po.rep(ctx.inv(f)).ray(IDENTITY, D2 + 1)
        for i in range(1, D2 + 1):
            worst = max(worst, ctx.distance(ctx.mul(x, ray(t + i - 1)), ctx.mul(f, rf(i))))
    return worst, 2 * certificate.delta


def check_consistency(
    po: PseudoOrbit,
    constants: ShadowingConstants,
    ctx: GroupContext,
    certificate: HyperbolicityCertificate,
    pairs: Sequence,
    depth: int | None = None,
    raise_on_fail: bool = True,
) -> dict:
    """Neighbouring constructions describe the same point up to translation.

    For each adjacent pair (g, h), with D = |g h^-1| and bound
    2K + D + 4 delta (which is Delta1 when D = 1): c(g) stays within the
    bound of the image of g h^-1 c(h) on the window where truncation cannot
    matter, the rays of m(g) and g h^-1 m(h) from 1 stay within the bound,
    and the two pseudo-orbit lemmas hold on the breakpoint frames of both
    paths.
    """
    params = constants.params
    out = []
    ok_all = True
    for g, h in pairs:
        g, h = ctx.mul(g), ctx.mul(h)
        entry: dict = {"g": _w(g), "h": _w(h)}
        if g == h:
            entry.update(ok=True, trivial=True)
            out.append(entry)
            continue
        if ctx.distance(g, h) != 1:
            raise InvalidInput(f"pair ({_w(g)}, {_w(h)}) is not adjacent")
        pg = construct_path(g, po, constants, depth)
        ph = construct_path(h, po, constants, depth)
        n = min(pg.depth, ph.depth)
        shift = ctx.mul(g, ctx.alphabet.invert(h))
        moved = [ctx.mul(shift, v) for v in ph.values.values[:n]]
        prof = [distance_to_image(ctx, v, moved) for v in pg.values.values[:n]]
        D = len(shift)
        bound = 2 * constants.K + D + 4 * certificate.delta
        valid = _valid_prefix(prof, n - 1, params, D)
        path_max = max(prof[:valid]) if valid else 0
        problems = []
        if path_max > bound:
            problems.append(f"c(g) leaves the bound around g h^-1 c(h): {path_max}")

        rg, rh = straighten(pg, constants, ctx), straighten(ph, constants, ctx)
        xg, cg = _point_for(pg, po, rg)
        xh, ch = _point_for(ph, po, rh)
        yh = act(shift, xh, ctx) if xh.is_exact else None
        ray_max = None
        if yh is not None:
            win = max(1, min(cg, ch - 1))
            a, b = xg.ray_values(ctx, win), yh.ray_values(ctx, win)
            ray_max = max(ctx.distance(u, v) for u, v in zip(a, b))
            if ray_max > bound:
                problems.append(f"rays of m(g) and g h^-1 m(h) separate: {ray_max}")

        l41 = 0
        l41_n = 0
        fa, fb = _frames(pg, ctx), _frames(ph, ctx)
        for a in fa:
            for b in fb:
                if ctx.distance(a, b) > constants.L:
                    continue
                if not (po.in_support(ctx.inv(a)) and po.in_support(ctx.inv(b))):
                    continue
                excess, allow = lemma_distance_bound(po, a, b, constants, certificate)
                l41 = max(l41, excess)
                l41_n += 1
                if excess > allow:
                    problems.append(f"distance lemma fails for ({_w(a)}, {_w(b)}): +{excess} > {allow}")
        l42 = 0
        l42_n = 0
        for x in dict.fromkeys(fa + fb):
            if not po.in_support(ctx.inv(x)):
                continue
            worst, allow = lemma_restart_bound(po, x, constants, certificate)
            l42 = max(l42, worst)
            l42_n += 1
            if worst > allow:
                problems.append(f"restart lemma fails at {_w(x)}: {worst} > {allow}")
        entry.update(
            ok=not problems, window=valid, bound=bound, path_max=path_max, ray_max=ray_max,
            lemma_distance={"checked": l41_n, "max_excess": l41, "allowed": 6 * certificate.delta},
            lemma_restart={"checked": l42_n, "max": l42, "allowed": 2 * certificate.delta},
            problems=problems,
        )
        out.append(entry)
        if problems:
            ok_all = False
            if raise_on_fail:
                raise ConsistencyViolated("; ".join(problems), entry)
    return {"ok": ok_all, "pairs": out}
