"""Finitely presented groups as computational objects.

Elements are stored as ShortLex normal forms (tuples of generator symbols).
Free groups use plain free reduction; other presentations are completed to a
confluent ShortLex rewriting system by Knuth-Bendix before use, and the
resulting normal forms are only handed out up to the radius cap ``r_max``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import BudgetExceeded, InvalidInput, OutOfCertifiedBall, RewritingIncomplete

Word = tuple  # tuple[str, ...]

DEFAULT_GEODESIC_LIMIT = 10_000


class GroupElement(tuple):
    """A group element, stored as its ShortLex normal form."""

    __slots__ = ()

    def __repr__(self) -> str:
        return f"GroupElement({format_word(self)!r})"

    @property
    def word(self) -> tuple:
        return tuple(self)


IDENTITY = GroupElement(())


def format_word(word: Sequence[str]) -> str:
    if all(len(s) == 1 for s in word):
        return "".join(word)
    return " ".join(word)


@dataclass(frozen=True)
class GeneratorAlphabet:
    """Symmetric generating set with its ShortLex order.

    ``symbols`` is the full symmetric alphabet in ShortLex order.
    """

    symbols: tuple[str, ...]
    involution: dict = field(hash=False, compare=False)

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise InvalidInput("duplicate generator symbols")
        for s in self.symbols:
            t = self.involution.get(s)
            if t is None or t not in self.symbols:
                raise InvalidInput(f"generator {s!r} has no inverse in the alphabet")
            if self.involution[t] != s:
                raise InvalidInput(f"inverse map is not an involution at {s!r}")

    @property
    def rank(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def inverse(self, s: str) -> str:
        return self.involution[s]

    def invert(self, word: Sequence[str]) -> tuple:
        inv = self.involution
        return tuple(inv[s] for s in reversed(word))

    def parse(self, text: str | Sequence[str]) -> tuple:
        """Tokenise a word.

        Strings may separate symbols by whitespace or not; a token may be
        followed by ``⁻¹`` or ``^-1`` to invert it.  Sequences are taken as
        symbol lists verbatim.
        """
        if not isinstance(text, str):
            word = tuple(text)
            for s in word:
                if s not in self.involution:
                    raise InvalidInput(f"unknown generator {s!r}")
            return word
        by_len = sorted(self.symbols, key=len, reverse=True)
        out: list[str] = []
        i = 0
        while i < len(text):
            ch = text[i]
            if ch.isspace() or ch in "·*":
                i += 1
                continue
            if text.startswith("⁻¹", i) or text.startswith("^-1", i):
                if not out:
                    raise InvalidInput(f"dangling inverse marker in {text!r}")
                out[-1] = self.involution[out[-1]]
                i += 2 if text.startswith("⁻¹", i) else 3
                continue
            for s in by_len:
                if text.startswith(s, i):
                    out.append(s)
                    i += len(s)
                    break
            else:
                raise InvalidInput(f"cannot parse {text[i:]!r} in word {text!r}")
        return tuple(out)


def _shortlex_key(word: Sequence[str], rank: dict[str, int]) -> tuple:
    return (len(word), tuple(rank[s] for s in word))


class RewritingSystem:
    """Length-reducing-or-equal ShortLex rewriting system."""

    complete = True
    max_overlap: int | None = None

    def __init__(self, rules: dict[tuple, tuple]):
        self.rules = dict(rules)
        self.reindex()

    def reindex(self) -> None:
        self._lengths = sorted({len(k) for k in self.rules})
        # left-hand-side lengths keyed by their final letter
        by_last: dict[str, set] = {}
        for k in self.rules:
            by_last.setdefault(k[-1], set()).add(len(k))
        self._by_last = {s: sorted(v) for s, v in by_last.items()}

    def reduce(self, word: Iterable[str]) -> tuple:
        rules = self.rules
        by_last = self._by_last
        none: list[int] = []
        out: list[str] = []
        stack = list(word)
        stack.reverse()
        while stack:
            s = stack.pop()
            out.append(s)
            n = len(out)
            for ln in by_last.get(s, none):
                if ln > n:
                    break
                rhs = rules.get(tuple(out[n - ln:]))
                if rhs is not None:
                    del out[n - ln:]
                    stack.extend(reversed(rhs))
                    break
        return tuple(out)

    def is_reduced_extension(self, word: tuple, s: str) -> bool:
        """Whether ``word + (s,)`` is irreducible, given ``word`` is."""
        w = word + (s,)
        n = len(w)
        for ln in self._by_last.get(s, ()):
            if ln > n:
                break
            if w[n - ln:] in self.rules:
                return False
        return True


def knuth_bendix(
    alphabet: GeneratorAlphabet,
    relators: Sequence[tuple],
    max_overlap: int | None = None,
    max_rules: int = 5000,
) -> RewritingSystem:
    """ShortLex Knuth-Bendix completion.

    With ``max_overlap`` set, critical pairs whose overlap word is longer are
    skipped; the result is then sound and locally confluent on words up to
    that length.  ``system.complete`` records whether nothing was skipped.
    """
    rank = alphabet.rank
    key = lambda w: _shortlex_key(w, rank)
    rules: dict[tuple, tuple] = {}
    order: list[tuple] = []
    system = RewritingSystem({})

    def add(u: tuple, v: tuple) -> None:
        pending = [(u, v)]
        while pending:
            a, b = pending.pop()
            a, b = system.reduce(a), system.reduce(b)
            if a == b:
                continue
            if key(a) < key(b):
                a, b = b, a
            for old in [l for l in rules if len(l) > len(a) and _contains(l, a)]:
                pending.append((old, rules.pop(old)))
            rules[a] = b
            order.append(a)
            system.rules = rules
            system.reindex()
            for l, r in list(rules.items()):
                if len(r) >= len(a) and _contains(r, a):
                    rules[l] = system.reduce(r)
            if len(rules) > max_rules:
                raise RewritingIncomplete(f"more than {max_rules} rules")

    system.rules = rules
    for s in alphabet.symbols:
        add((s, alphabet.inverse(s)), ())
    for r in relators:
        add(tuple(r), ())

    skipped = False
    i = 0
    while i < len(order):
        l1 = order[i]
        if l1 in rules:
            for j in range(i + 1):
                l2 = order[j]
                for x, y in ((l1, l2), (l2, l1)):
                    for k in range(1, min(len(x), len(y))):
                        if x not in rules or y not in rules:
                            break
                        if x[-k:] != y[:k]:
                            continue
                        if max_overlap is not None and len(x) + len(y) - k > max_overlap:
                            skipped = True
                            continue
                        add(rules[x] + y[k:], x[:-k] + rules[y])
        i += 1
    out = RewritingSystem(rules)
    out.complete = not skipped
    out.max_overlap = max_overlap
    return out


def _contains(hay: tuple, needle: tuple) -> bool:
    n = len(needle)
    return any(hay[i:i + n] == needle for i in range(len(hay) - n + 1))


class _FreeReduction:
    complete = True
    max_overlap = None

    def __init__(self, alphabet: GeneratorAlphabet):
        self.inv = alphabet.involution
        self.rules = {(s, t): () for s, t in alphabet.involution.items()}

    def reduce(self, word: Iterable[str]) -> tuple:
        inv = self.inv
        out: list[str] = []
        for s in word:
            if out and inv[out[-1]] == s:
                out.pop()
            else:
                out.append(s)
        return tuple(out)

    def is_reduced_extension(self, word: tuple, s: str) -> bool:
        return not word or self.inv[word[-1]] != s


class GroupContext:
    """A presentation together with its word metric and ball cache.

    ``mode`` is ``"free"`` (exact, unbounded) or ``"ball"`` (normal forms are
    only certified up to length ``r_max``).
    """

    def __init__(
        self,
        alphabet: GeneratorAlphabet,
        relators: Sequence[Sequence[str]] = (),
        mode: str = "free",
        r_max: int | None = None,
        geodesic_limit: int = DEFAULT_GEODESIC_LIMIT,
    ):
        if mode not in ("free", "ball"):
            raise InvalidInput(f"unknown mode {mode!r}")
        self.alphabet = alphabet
        self.relators = tuple(tuple(alphabet.parse(r)) for r in relators)
        self.mode = mode
        self.geodesic_limit = geodesic_limit
        if mode == "free":
            if self.relators:
                raise InvalidInput("free mode does not accept relators")
            self.r_max = None
            self._rewriter = _FreeReduction(alphabet)
        else:
            if r_max is None or r_max < 0:
                raise InvalidInput("ball mode needs a non-negative r_max")
            self.r_max = int(r_max)
            if self.relators:
                self._rewriter = knuth_bendix(
                    alphabet, self.relators, max_overlap=2 * self.r_max + 2
                )
            else:
                self._rewriter = _FreeReduction(alphabet)
        self._rank = alphabet.rank
        self._layers: list[list[GroupElement]] = [[IDENTITY]]
        self._reduce_cached = lru_cache(maxsize=1 << 18)(self._rewriter.reduce)
        self._distance_cached = lru_cache(maxsize=1 << 20)(self._distance)
        self._geodesic_words: dict[GroupElement, tuple[list[tuple], bool]] = {}

    # -- construction helpers -------------------------------------------------

    @classmethod
    def free(cls, rank: int = 2, names: str = "abcdefgh") -> "GroupContext":
        gens = names[:rank]
        symbols: list[str] = []
        inv: dict[str, str] = {}
        for g in gens:
            G = g.upper()
            symbols += [g, G]
            inv[g], inv[G] = G, g
        return cls(GeneratorAlphabet(tuple(symbols), inv), mode="free")

    @classmethod
    def from_spec(cls, data: dict) -> "GroupContext":
        """Build from the group-file dictionary."""
        try:
            gens = list(data["generators"])
        except (KeyError, TypeError):
            raise InvalidInput("group file needs a 'generators' list") from None
        inv = dict(data.get("inverses") or {})
        for g in gens:
            if g not in inv:
                if g.upper() != g:
                    inv[g] = g.upper()
                else:
                    raise InvalidInput(f"no inverse given for generator {g!r}")
        for k, v in list(inv.items()):
            inv.setdefault(v, k)
        order = data.get("shortlex_order")
        if order is None:
            order = []
            for g in gens:
                for s in (g, inv[g]):
                    if s not in order:
                        order.append(s)
        order = list(order)
        missing = set(inv) - set(order)
        if missing:
            raise InvalidInput(f"shortlex_order misses symbols {sorted(missing)}")
        alphabet = GeneratorAlphabet(tuple(order), inv)
        mode = data.get("mode", "free")
        return cls(
            alphabet,
            relators=[alphabet.parse(r) for r in data.get("relators", [])],
            mode=mode,
            r_max=data.get("r_max"),
            geodesic_limit=int(data.get("geodesic_limit", DEFAULT_GEODESIC_LIMIT)),
        )

    def to_spec(self) -> dict:
        gens = []
        for s in self.alphabet.symbols:
            if self.alphabet.inverse(s) not in gens:
                gens.append(s)
        return {
            "generators": gens,
            "inverses": {g: self.alphabet.inverse(g) for g in gens},
            "relators": [format_word(r) for r in self.relators],
            "shortlex_order": list(self.alphabet.symbols),
            "mode": self.mode,
            "r_max": self.r_max,
        }

    # -- basic arithmetic -----------------------------------------------------

    @property
    def is_free(self) -> bool:
        return not self.relators

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.alphabet.symbols

    def shortlex_key(self, word: Sequence[str]) -> tuple:
        return _shortlex_key(word, self._rank)

    def reduce(self, word: Iterable[str]) -> GroupElement:
        """Normal form without the radius check (internal use)."""
        return GroupElement(self._reduce_cached(tuple(word)))

    def _certify(self, g: GroupElement) -> GroupElement:
        if self.r_max is not None and len(g) > self.r_max:
            raise OutOfCertifiedBall(
                f"normal form of length {len(g)} exceeds r_max={self.r_max}"
            )
        return g

    def element(self, word: str | Sequence[str]) -> GroupElement:
        return self._certify(self.reduce(self.alphabet.parse(word)))

    def mul(self, *elements: Sequence[str]) -> GroupElement:
        return self._certify(self.reduce(itertools.chain.from_iterable(elements)))

    def inv(self, g: Sequence[str]) -> GroupElement:
        return self.reduce(self.alphabet.invert(g))

    def length(self, g: Sequence[str]) -> int:
        return len(self.mul(g))

    def distance(self, g: Sequence[str], h: Sequence[str]) -> int:
        """d(g, h) for normal forms g, h."""
        if not self.relators and self.r_max is None:
            # reduced words in a free group: cancel the common prefix
            n = min(len(g), len(h))
            i = 0
            while i < n and g[i] == h[i]:
                i += 1
            return len(g) + len(h) - 2 * i
        return self._distance_cached(tuple(g), tuple(h))

    def _distance(self, g: tuple, h: tuple) -> int:
        return len(self.mul(self.alphabet.invert(g), h))

    def format(self, g: Sequence[str]) -> str:
        return format_word(g)

    def step_letter(self, g: Sequence[str], h: Sequence[str]) -> str | None:
        """The generator s with g·s = h, if any."""
        d = self.mul(self.alphabet.invert(g), h)
        return d[0] if len(d) == 1 else None

    # -- balls ----------------------------------------------------------------

    def sphere(self, r: int) -> list[GroupElement]:
        if r < 0:
            raise InvalidInput("negative radius")
        if self.r_max is not None and r > self.r_max:
            raise OutOfCertifiedBall(f"radius {r} exceeds r_max={self.r_max}")
        rw = self._rewriter
        while len(self._layers) <= r:
            nxt = []
            for w in self._layers[-1]:
                for s in self.symbols:
                    if rw.is_reduced_extension(w, s):
                        nxt.append(GroupElement(w + (s,)))
            self._layers.append(nxt)
        return self._layers[r]

    def ball(self, r: int) -> list[GroupElement]:
        return [g for i in range(r + 1) for g in self.sphere(i)]

    def ball_size(self, r: int) -> int:
        return sum(len(self.sphere(i)) for i in range(r + 1))

    # -- geodesics ------------------------------------------------------------

    def geodesic_words(self, x: GroupElement, limit: int | None = None) -> tuple[list[tuple], bool]:
        """Geodesic words spelling ``x``, ShortLex-first, and a truncation flag."""
        limit = self.geodesic_limit if limit is None else limit
        cached = self._geodesic_words.get(x)
        if cached is not None and (cached[1] is False or len(cached[0]) >= limit):
            words, trunc = cached
            return (words[:limit], trunc or len(words) > limit)
        n = len(x)
        out: list[tuple] = []
        truncated = False

        def remaining(u: tuple) -> int:
            return len(self.reduce(self.alphabet.invert(u) + tuple(x)))

        def dfs(u: tuple, left: int):
            nonlocal truncated
            if truncated:
                return
            if left == 0:
                if len(out) >= limit:
                    truncated = True
                    return
                out.append(u)
                return
            for s in self.symbols:
                v = u + (s,)
                if remaining(v) == left - 1:
                    dfs(v, left - 1)
                    if truncated:
                        return

        dfs((), n)
        self._geodesic_words[x] = (out, truncated)
        return out, truncated

    def interval(self, g: Sequence[str], h: Sequence[str]) -> list[dict[GroupElement, list[GroupElement]]]:
        """Vertices on geodesics from g to h, by layer, with predecessor lists."""
        g = self.mul(g)
        h = self.mul(h)
        n = self.distance(g, h)
        layers: list[dict[GroupElement, list[GroupElement]]] = [{g: []}]
        for i in range(n):
            nxt: dict[GroupElement, list[GroupElement]] = {}
            for u in layers[-1]:
                for s in self.symbols:
                    v = self.reduce(u + (s,))
                    if self.distance(v, h) == n - i - 1:
                        nxt.setdefault(v, []).append(u)
            layers.append(nxt)
        return layers


@dataclass(frozen=True)
class Segment:
    """A finite edge path c: [start_index, start_index+len-1] -> G."""

    start_index: int
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(GroupElement(v) for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    def __call__(self, i: int) -> GroupElement:
        j = i - self.start_index
        if j < 0 or j >= len(self.values):
            raise IndexError(f"index {i} outside [{self.start_index}, {self.end_index}]")
        return self.values[j]

    @property
    def end_index(self) -> int:
        return self.start_index + len(self.values) - 1

    @property
    def indices(self) -> range:
        return range(self.start_index, self.end_index + 1)

    def restrict(self, lo: int, hi: int) -> "Segment":
        lo = max(lo, self.start_index)
        hi = min(hi, self.end_index)
        return Segment(lo, self.values[lo - self.start_index: hi - self.start_index + 1])

    def translate(self, ctx: GroupContext, g: Sequence[str]) -> "Segment":
        return Segment(self.start_index, tuple(ctx.mul(g, v) for v in self.values))

    def is_path(self, ctx: GroupContext) -> bool:
        return all(ctx.distance(u, v) == 1 for u, v in zip(self.values, self.values[1:]))

    def is_geodesic(self, ctx: GroupContext) -> bool:
        if not self.values:
            return True
        return ctx.distance(self.values[0], self.values[-1]) == len(self.values) - 1 and self.is_path(ctx)


def segment_from_word(ctx: GroupContext, start: Sequence[str], word: Sequence[str], start_index: int = 0) -> Segment:
    vals = [ctx.mul(start)]
    for s in word:
        vals.append(ctx.reduce(vals[-1] + (s,)))
    return Segment(start_index, tuple(vals))


class GeodesicList(list):
    """List of Segments with a ``truncated`` flag."""

    truncated: bool = False


@dataclass(frozen=True)
class DistinguishedGeodesicStructure:
    """last_letter(g) = inverse of the final letter of the ShortLex form of g."""

    ctx: GroupContext
    source: str = "shortlex-tower"

    def word(self, g: Sequence[str]) -> GroupElement:
        return self.ctx.mul(g)

    def last_letter(self, g: Sequence[str]) -> str | None:
        w = self.ctx.mul(g)
        if not w:
            return None
        return self.ctx.alphabet.inverse(w[-1])

    def verify(self, radius: int) -> list[str]:
        """Exhaustive check of both axioms on ball(radius); returns failures."""
        ctx = self.ctx
        bad = []
        for g in ctx.ball(radius):
            lam = self.word(g)
            if len(lam) != ctx.length(g):
                bad.append(f"{format_word(g)}: |lambda(g)| != d(g,1)")
            if lam and self.word(lam[:-1]) != lam[:-1]:
                bad.append(f"{format_word(g)}: prefix not closed")
            cur, steps = g, 0
            while cur:
                cur = ctx.reduce(cur + (self.last_letter(cur),))
                steps += 1
                if steps > len(g):
                    break
            if cur or steps != len(g):
                bad.append(f"{format_word(g)}: last_letter walk does not reach 1 in |g| steps")
        return bad


# -- module-level operations ----------------------------------------------------


def normal_form(word: str | Sequence[str], ctx: GroupContext) -> GroupElement:
    return ctx.element(word)


def word_metric(g: Sequence[str], h: Sequence[str], ctx: GroupContext) -> int:
    return ctx.distance(ctx.mul(g), ctx.mul(h))


def enumerate_geodesics(
    g: Sequence[str],
    h: Sequence[str],
    ctx: GroupContext,
    limit: int | None = None,
    strict: bool = False,
) -> GeodesicList:
    """All geodesic edge paths from g to h (ShortLex-first sample if capped)."""
    g = ctx.mul(g)
    h = ctx.mul(h)
    x = ctx.mul(ctx.alphabet.invert(g), h)
    words, truncated = ctx.geodesic_words(x, limit)
    if truncated and strict:
        raise BudgetExceeded(f"more than {len(words)} geodesics from {format_word(g)} to {format_word(h)}")
    out = GeodesicList(segment_from_word(ctx, g, w) for w in words)
    out.truncated = truncated
    return out


def ball(radius: int, ctx: GroupContext) -> list[GroupElement]:
    return ctx.ball(radius)


def distinguished_structure(ctx: GroupContext) -> DistinguishedGeodesicStructure:
    return DistinguishedGeodesicStructure(ctx)
