"""Free and surface group presentations, reduced words, sphere enumeration and
eventually periodic boundary rays.

Letters are nonzero integers: ``+i`` is generator ``i`` (1-based) and ``-i`` its
inverse. As strings, generators are lowercase names and inverses the
corresponding uppercase names, so ``"abAB"`` is a commutator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

DEFAULT_SPHERE_CAP = 10**6


class GuardExceeded(RuntimeError):
    """Raised when an enumeration would exceed its configured size cap."""


@dataclass(frozen=True)
class Word:
    letters: tuple = ()

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        # plain concatenation; reduce through the presentation
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        return Word(self.letters * n)


def _free_reduce(letters: Iterable[int]) -> list[int]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


def cyclic_reduce(letters: Sequence[int]) -> list[int]:
    w = _free_reduce(letters)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[i:j + 1]


def is_proper_power(letters: Sequence[int]) -> bool:
    n = len(letters)
    for p in range(1, n // 2 + 1):
        if n % p == 0 and list(letters[:p]) * (n // p) == list(letters):
            return True
    return False


def cyclic_class(letters: Sequence[int]) -> tuple:
    """Canonical representative of a cyclically reduced word up to rotation and inversion."""
    w = list(letters)
    inv = [-x for x in reversed(w)]
    rots = [tuple(v[i:] + v[:i]) for v in (w, inv) for i in range(max(1, len(v)))]
    return min(rots)


@dataclass(frozen=True)
class GroupPresentation:
    kind: str  # "free" or "surface"
    rank: int  # number of generators
    names: tuple
    relators: tuple = ()
    genus: Optional[int] = None
    _pieces: frozenset = field(default=frozenset(), repr=False, compare=False)
    _rotations: tuple = field(default=(), repr=False, compare=False)

    @property
    def n_generators(self) -> int:
        return self.rank

    def check_letters(self, letters: Iterable[int]) -> tuple:
        out = tuple(int(x) for x in letters)
        for x in out:
            if x == 0 or abs(x) > self.rank:
                raise ValueError(f"letter {x} is not a generator index of a rank-{self.rank} group")
        return out

    def parse(self, text: str) -> Word:
        lookup = {}
        for i, name in enumerate(self.names, start=1):
            lookup[name] = i
            lookup[name.upper()] = -i
        tokens = text.split() if " " in text.strip() else list(text.strip())
        try:
            letters = [lookup[t] for t in tokens if t not in ("", "1", "e")]
        except KeyError as exc:
            raise ValueError(f"unknown generator {exc.args[0]!r}") from None
        return Word(tuple(letters))

    def format(self, w) -> str:
        letters = w.letters if isinstance(w, Word) else tuple(w)
        if not letters:
            return "e"
        sep = "" if all(len(n) == 1 for n in self.names) else " "
        return sep.join(self.names[x - 1] if x > 0 else self.names[-x - 1].upper() for x in letters)

    # -- Dehn's algorithm (surface groups) ---------------------------------

    @property
    def half_relator(self) -> int:
        return len(self.relators[0]) // 2 if self.relators else 0

    def _dehn_step(self, w: list[int]) -> Optional[list[int]]:
        r = len(self.relators[0])
        h = r // 2
        n = len(w)
        for i in range(n):
            # longest match first: a piece of a rotation longer than half the relator
            for length in range(min(r, n - i), h, -1):
                sub = tuple(w[i:i + length])
                for rot in self._rotations:
                    if rot[:length] == sub:
                        complement = rot[length:]
                        repl = [-x for x in reversed(complement)]
                        return w[:i] + repl + w[i + length:]
        return None

    def reduce(self, letters) -> Word:
        """Free reduction, then Dehn's algorithm for surface groups, to a fixed point."""
        letters = letters.letters if isinstance(letters, Word) else letters
        w = _free_reduce(self.check_letters(letters))
        if self.kind == "surface":
            while True:
                nxt = self._dehn_step(w)
                if nxt is None:
                    break
                w = _free_reduce(nxt)
        return Word(tuple(w))

    def is_reduced(self, letters) -> bool:
        letters = letters.letters if isinstance(letters, Word) else tuple(letters)
        return self.reduce(letters).letters == tuple(letters)

    def _extension_ok(self, w: list[int], x: int) -> bool:
        if w and w[-1] == -x:
            return False
        if self.kind == "surface":
            h = self.half_relator
            if len(w) >= h:
                tail = tuple(w[len(w) - h:]) + (x,)
                if tail in self._pieces:
                    return False
        return True

    # -- enumeration -------------------------------------------------------

    def letters_in_order(self) -> list[int]:
        out = []
        for i in range(1, self.rank + 1):
            out += [i, -i]
        return out

    def sphere_count(self, r: int) -> Optional[int]:
        """Exact size of the sphere of radius r for free groups, None for surface groups."""
        if self.kind != "free":
            return None
        if r == 0:
            return 1
        n = self.rank
        return 2 * n * (2 * n - 1) ** (r - 1)

    def enumerate_sphere(self, r: int, cap: int = DEFAULT_SPHERE_CAP,
                         first_letter: Optional[int] = None) -> Iterator[Word]:
        """Reduced words of length exactly r, depth-first in generator order.

        For surface groups these are the Dehn-reduced words, which include every
        geodesic representative; one group element may appear several times.
        ``first_letter`` restricts the stream to one partition.
        """
        if r < 0:
            raise ValueError("radius must be nonnegative")
        expected = self.sphere_count(r)
        if expected is not None and expected > cap:
            raise GuardExceeded(f"sphere of radius {r} has {expected} words, cap is {cap}")
        if r == 0:
            if first_letter is None:
                yield Word(())
            return
        order = self.letters_in_order()
        starts = order if first_letter is None else [first_letter]
        emitted = 0
        w: list[int] = []

        def rec():
            nonlocal emitted
            if len(w) == r:
                emitted += 1
                if emitted > cap:
                    raise GuardExceeded(f"sphere of radius {r} exceeds cap {cap}")
                yield Word(tuple(w))
                return
            for x in order:
                if self._extension_ok(w, x):
                    w.append(x)
                    yield from rec()
                    w.pop()

        for x in starts:
            w.append(x)
            yield from rec()
            w.pop()

    def enumerate_ball(self, R: int, cap: int = DEFAULT_SPHERE_CAP) -> Iterator[Word]:
        for r in range(R + 1):
            yield from self.enumerate_sphere(r, cap)


def free_group(rank: int, names: Optional[Sequence[str]] = None) -> GroupPresentation:
    if rank < 2:
        raise ValueError("free groups of rank >= 2 only")
    names = tuple(names) if names else tuple("abcdefghijklmnopqrstuvwxyz"[:rank]) if rank <= 26 \
        else tuple(f"x{i}" for i in range(1, rank + 1))
    if len(names) != rank:
        raise ValueError("wrong number of generator names")
    return GroupPresentation("free", rank, names)


def surface_group(genus: int) -> GroupPresentation:
    """Closed orientable surface group <a1, b1, ..., ag, bg | [a1,b1]...[ag,bg]>."""
    if genus < 2:
        raise ValueError("surface groups of genus >= 2 only")
    names = []
    for i in range(1, genus + 1):
        names += [f"a{i}", f"b{i}"]
    relator = []
    for i in range(genus):
        a, b = 2 * i + 1, 2 * i + 2
        relator += [a, b, -a, -b]
    rel = tuple(relator)
    inv = tuple(-x for x in reversed(rel))
    rotations = tuple(v[i:] + v[:i] for v in (rel, inv) for i in range(len(v)))
    h = len(rel) // 2
    pieces = frozenset(rot[:h + 1] for rot in rotations)
    return GroupPresentation("surface", 2 * genus, tuple(names), (rel,), genus, pieces, rotations)


def presentation_from_dict(data: dict) -> GroupPresentation:
    kind = data["kind"]
    if kind == "free":
        return free_group(int(data["rank"]), data.get("generators"))
    if kind == "surface":
        P = surface_group(int(data["genus"]))
        if "generators" in data and tuple(data["generators"]) != P.names:
            raise ValueError("surface group generator names are fixed as a1, b1, ...")
        return P
    raise ValueError(f"unknown presentation kind {kind!r}")


def presentation_to_dict(P: GroupPresentation) -> dict:
    out = {"kind": P.kind}
    if P.kind == "free":
        out["rank"] = P.rank
    else:
        out["genus"] = P.genus
    out["generators"] = list(P.names)
    return out


# --------------------------------------------------------------------------
# boundary rays


@dataclass(frozen=True)
class BoundaryRay:
    """The boundary point prefix * period^infinity, approximated at finite depth."""

    prefix: Word
    period: Word
    depth: int = 1

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be a nontrivial word")
        if self.depth < 1:
            raise ValueError("depth must be positive")

    def normalized(self) -> "BoundaryRay":
        """Absorb the tail of the prefix into a rotated period and make the period primitive."""
        prefix = _free_reduce(self.prefix.letters)
        period = _free_reduce(self.period.letters)
        # period = u c u^-1 with c cyclically reduced: move u into the prefix
        core = cyclic_reduce(period)
        if not core:
            raise ValueError("period is trivial in the group")
        u = period[:(len(period) - len(core)) // 2]
        prefix = _free_reduce(prefix + u)
        period = core
        for p in range(1, len(period) + 1):
            if len(period) % p == 0 and period[:p] * (len(period) // p) == period:
                period = period[:p]
                break
        while prefix:
            if prefix[-1] == period[-1]:
                prefix.pop()
                period = period[-1:] + period[:-1]
            elif prefix[-1] == -period[0]:
                prefix.pop()
                period = period[1:] + period[:1]
            else:
                break
        return BoundaryRay(Word(tuple(prefix)), Word(tuple(period)), self.depth)

    def label(self, P: Optional[GroupPresentation] = None) -> str:
        fmt = P.format if P is not None else (lambda w: ",".join(map(str, w.letters)) or "e")
        pre = "" if not self.prefix else fmt(self.prefix)
        return f"{pre}({fmt(self.period)})^inf"


def boundary_ray_word(P: GroupPresentation, ray: BoundaryRay, n: Optional[int] = None) -> Word:
    """reduce(prefix * period^n)."""
    n = ray.depth if n is None else n
    if n < 1:
        raise ValueError("depth must be positive")
    if not ray.period:
        raise ValueError("trivial period")
    return P.reduce(ray.prefix.letters + ray.period.letters * n)


def _random_reduced(P: GroupPresentation, length: int, rng: np.random.Generator) -> list[int]:
    order = P.letters_in_order()
    w: list[int] = []
    tries = 0
    while len(w) < length:
        x = order[rng.integers(len(order))]
        if P._extension_ok(w, x):
            w.append(x)
        else:
            tries += 1
            if tries > 100 * length + 100:
                w = []
                tries = 0
    return w


def _valid_period(P: GroupPresentation, period: list[int]) -> bool:
    if cyclic_reduce(period) != period or is_proper_power(period):
        return False
    # every power must stay reduced, i.e. the period is cyclically (Dehn) reduced
    return len(P.reduce(period * 3)) == 3 * len(period)


def sample_boundary(P: GroupPresentation, count: int, max_len: int, seed=0,
                    max_overlap: Optional[int] = None, max_tries: int = 100_000) -> list[BoundaryRay]:
    """Deterministic sample of ``count`` distinct boundary rays with empty prefixes.

    Generator rays a^inf, b^inf, ... come first; the rest have random
    periods of length <= max_len. Periods are primitive, cyclically reduced and
    pairwise non-conjugate even after inversion, which keeps the attracting
    fixed points pairwise distinct. In addition no two infinite words may
    agree on more than ``max_overlap`` leading letters (default ``max_len``),
    which keeps the points apart and not merely distinct.
    """
    if count < 1:
        raise ValueError("count must be positive")
    overlap = max_len if max_overlap is None else max_overlap
    rng = np.random.default_rng(seed)
    seen: set = set()
    heads: set = set()
    rays: list[BoundaryRay] = []

    def offer(period: list[int]) -> None:
        if not _valid_period(P, period):
            return
        key = cyclic_class(period)
        if key in seen:
            return
        reps = overlap // len(period) + 1
        head = tuple((period * reps)[:overlap + 1])
        if head in heads:
            return
        seen.add(key)
        heads.add(head)
        rays.append(BoundaryRay(Word(()), Word(tuple(period))))

    for i in range(1, P.rank + 1):
        if len(rays) == count:
            break
        offer([i])
    tries = 0
    while len(rays) < count:
        tries += 1
        if tries > max_tries:
            raise ValueError(f"could not find {count} distinct rays with period length <= {max_len}")
        length = int(rng.integers(1, max_len + 1))
        offer(_random_reduced(P, length, rng))
    return rays
