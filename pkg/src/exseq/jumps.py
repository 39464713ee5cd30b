"""Jump-sequence families and the dragnet/interval geometry they induce.

A jump rule is a strictly increasing sequence f(1) < f(2) < ... of forbidden
distances: a sequence x is legal when x[i] != x[i + f(n)] for every site i and
every n.  The *dragnet* of a site j is the set of earlier sites at jump
distance from j; its size c(j) is a non-decreasing step function of j.  Runs
of sites with constant c(j) = d + i - 1 form the i-th *interval* (i >= 1) for
an alphabet of size d; the site where c steps past d + i - 1 is a *jump site*.

For f(n) = n*n this geometry is closed form: the i-th interval is
{(d+i-1)^2 + 1, ..., (d+i)^2} with length 2(d+i) - 1 and the first site that
can carry a full dragnet is d^2 + 1.  For other rules the same quantities are
computed directly from the increments of c(j); that generalisation is this
package's convention, not an external given.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterator

__all__ = [
    "HorizonError",
    "JumpFamily",
    "JumpRule",
    "DragnetProfile",
    "Interval",
    "monomial",
    "linear",
    "affine_odd",
    "factorial",
    "geometric",
    "explicit",
    "make_rule",
    "parse_rule",
    "enumerate_jumps",
    "dragnet",
    "interval_geometry",
]


class HorizonError(ValueError):
    """A query reached past the enumerated horizon of a jump rule."""


@dataclass(frozen=True)
class JumpFamily:
    """One parametric family of jump sequences.

    kind is one of 'monomial', 'linear', 'affine_odd', 'factorial',
    'geometric', 'explicit'; param carries k for monomial/linear and the base
    for geometric; values holds the list of an explicit family.
    """

    kind: str
    param: int = 0
    values: tuple[int, ...] = ()

    def label(self) -> str:
        """Canonical CLI name of this family."""
        if self.kind == "monomial":
            if self.param == 2:
                return "square"
            if self.param == 3:
                return "cube"
            return f"pow:{self.param}"
        if self.kind == "linear":
            return f"linear:{self.param}"
        if self.kind == "affine_odd":
            return "odd"
        if self.kind == "factorial":
            return "factorial"
        if self.kind == "geometric":
            return f"geom:{self.param}"
        return "explicit:[" + ",".join(str(v) for v in self.values) + "]"

    def iter_values(self) -> Iterator[int]:
        """Yield f(1), f(2), ... (finite only for explicit families)."""
        if self.kind == "monomial":
            k = self.param
            n = 1
            while True:
                yield n**k
                n += 1
        elif self.kind == "linear":
            k = self.param
            n = 1
            while True:
                yield k * n
                n += 1
        elif self.kind == "affine_odd":
            n = 1
            while True:
                yield 2 * n - 1
                n += 1
        elif self.kind == "factorial":
            v = 1
            n = 1
            while True:
                v *= n
                yield v
                n += 1
        elif self.kind == "geometric":
            v = 1
            while True:
                v *= self.param
                yield v
        else:
            yield from self.values

    def iter_values_mod(self, m: int) -> Iterator[int]:
        """Yield f(n) mod m without forming the (possibly huge) values.

        Divisibility scans over factorial or geometric families would
        otherwise build integers with millions of digits.
        """
        if m < 1:
            raise ValueError(f"modulus must be >= 1, got {m}")
        if self.kind == "monomial":
            n = 1
            while True:
                yield pow(n, self.param, m)
                n += 1
        elif self.kind == "linear":
            n = 1
            while True:
                yield (self.param * n) % m
                n += 1
        elif self.kind == "affine_odd":
            n = 1
            while True:
                yield (2 * n - 1) % m
                n += 1
        elif self.kind == "factorial":
            v = 1
            n = 1
            while True:
                v = (v * n) % m
                yield v
                n += 1
        elif self.kind == "geometric":
            v = 1
            while True:
                v = (v * self.param) % m
                yield v
        else:
            for val in self.values:
                yield val % m


def monomial(k: int) -> JumpFamily:
    """f(n) = n**k, k >= 1.  monomial(2) enumerates the perfect squares."""
    if k < 1:
        raise ValueError(f"monomial exponent must be >= 1, got {k}")
    return JumpFamily("monomial", k)


def linear(k: int) -> JumpFamily:
    """f(n) = k*n, k >= 1."""
    if k < 1:
        raise ValueError(f"linear factor must be >= 1, got {k}")
    return JumpFamily("linear", k)


def affine_odd() -> JumpFamily:
    """f(n) = 2n - 1, the odd distances."""
    return JumpFamily("affine_odd")


def factorial() -> JumpFamily:
    """f(n) = n!."""
    return JumpFamily("factorial")


def geometric(base: int) -> JumpFamily:
    """f(n) = base**n, base >= 2."""
    if base < 2:
        raise ValueError(f"geometric base must be >= 2, got {base}")
    return JumpFamily("geometric", base)


def explicit(values) -> JumpFamily:
    """A literal list of jump distances; must be strictly increasing and positive."""
    vals = tuple(int(v) for v in values)
    if not vals:
        raise ValueError("explicit jump list must be non-empty")
    if vals[0] < 1:
        raise ValueError(f"jump distances must be positive, got {vals[0]}")
    for a, b in zip(vals, vals[1:]):
        if b <= a:
            raise ValueError(f"explicit jump list must be strictly increasing, got {a} then {b}")
    return JumpFamily("explicit", values=vals)


@dataclass(frozen=True)
class JumpRule:
    """A jump family enumerated up to a hard working horizon.

    All distances f(n) <= horizon are cached in ascending order; any query
    past the horizon raises HorizonError rather than silently truncating.
    Immutable, so a single rule can be shared by any number of concurrent
    samplers.
    """

    family: JumpFamily
    horizon: int
    distances: tuple[int, ...]
    _members: frozenset[int] = field(repr=False, hash=False, compare=False, default=frozenset())

    @property
    def name(self) -> str:
        return self.family.label()

    def _check(self, bound: int) -> None:
        if bound > self.horizon:
            raise HorizonError(
                f"query up to {bound} exceeds the enumerated horizon {self.horizon} "
                f"of rule {self.name}"
            )

    def is_jump(self, distance: int) -> bool:
        """True iff distance is one of the enumerated f(n)."""
        self._check(distance)
        return distance in self._members

    def count_leq(self, bound: int) -> int:
        """Number of enumerated jumps <= bound."""
        if bound < 0:
            return 0
        self._check(bound)
        return bisect_right(self.distances, bound)

    def dragnet_size(self, j: int) -> int:
        """c(j): how many earlier sites are at jump distance from site j."""
        if j < 1:
            raise ValueError(f"site index must be >= 1, got {j}")
        return self.count_leq(j - 1)

    def dragnet(self, j: int) -> tuple[int, ...]:
        """The sites {j - f(n) : f(n) <= j - 1}, in increasing order; empty for j = 1."""
        if j < 1:
            raise ValueError(f"site index must be >= 1, got {j}")
        self._check(j - 1)
        sites = [j - g for g in self.distances if g <= j - 1]
        sites.reverse()
        return tuple(sites)

    def with_horizon(self, horizon: int) -> "JumpRule":
        """The same family enumerated to a different horizon."""
        if horizon == self.horizon:
            return self
        return make_rule(self.family, horizon)


def make_rule(family: JumpFamily, horizon: int) -> JumpRule:
    """Enumerate a family up to horizon and freeze it as a JumpRule."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    dists: list[int] = []
    for v in family.iter_values():
        if v > horizon:
            break
        dists.append(v)
    return JumpRule(family, horizon, tuple(dists), frozenset(dists))


def enumerate_jumps(rule: JumpRule, limit: int) -> list[int]:
    """All jump distances f(n) <= limit, ascending.  limit must be within the horizon."""
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    rule._check(limit)
    return list(rule.distances[: bisect_right(rule.distances, limit)])


def dragnet(rule: JumpRule, j: int) -> set[int]:
    """Set view of the dragnet of site j."""
    return set(rule.dragnet(j))


@dataclass(frozen=True)
class Interval:
    """The i-th maximal run of sites sharing dragnet size d + i - 1."""

    index: int
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1


class DragnetProfile:
    """Dragnet geometry of one rule for a fixed alphabet size d.

    Exposes c(j), the interval index of a site, and the interval records
    (jump site, span, length) read off the increments of c(j).
    """

    def __init__(self, rule: JumpRule, d: int):
        if d < 2:
            raise ValueError(f"alphabet size must be >= 2, got {d}")
        self.rule = rule
        self.d = d

    def cardinality(self, j: int) -> int:
        return self.rule.dragnet_size(j)

    @property
    def first_block_site(self) -> int:
        """Smallest site whose dragnet can carry all d symbols: f(d) + 1."""
        if len(self.rule.distances) < self.d:
            raise HorizonError(
                f"horizon {self.rule.horizon} enumerates only {len(self.rule.distances)} "
                f"jumps; need {self.d} for the first full-block site"
            )
        return self.rule.distances[self.d - 1] + 1

    def interval_index(self, j: int) -> int:
        """i >= 1 when site j lies in the i-th interval, else 0 (dragnet still < d)."""
        c = self.cardinality(j)
        return c - self.d + 1 if c >= self.d else 0

    def interval(self, i: int) -> Interval:
        """The i-th interval: sites j with c(j) = d + i - 1."""
        if i < 1:
            raise ValueError(f"interval index must be >= 1, got {i}")
        dists = self.rule.distances
        m = self.d + i - 1
        if len(dists) < m + 1:
            raise HorizonError(
                f"horizon {self.rule.horizon} enumerates only {len(dists)} jumps; "
                f"interval {i} at d={self.d} needs {m + 1}"
            )
        return Interval(i, dists[m - 1] + 1, dists[m])

    def intervals(self, count: int) -> list[Interval]:
        return [self.interval(i) for i in range(1, count + 1)]


def interval_geometry(rule: JumpRule, d: int, count: int) -> list[tuple[int, tuple[int, int], int]]:
    """(jump site, span, length) for the first `count` intervals at alphabet size d."""
    prof = DragnetProfile(rule, d)
    return [(iv.start, (iv.start, iv.end), iv.length) for iv in prof.intervals(count)]


_SIMPLE_NAMES = {
    "square": lambda: monomial(2),
    "cube": lambda: monomial(3),
    "odd": affine_odd,
    "factorial": factorial,
}


def parse_family(name: str) -> JumpFamily:
    """Parse a CLI rule name: square, cube, pow:k, linear:k, odd, factorial, geom:p, explicit:[...]."""
    name = name.strip()
    if name in _SIMPLE_NAMES:
        return _SIMPLE_NAMES[name]()
    if ":" in name:
        head, _, arg = name.partition(":")
        try:
            if head == "pow":
                return monomial(int(arg))
            if head == "linear":
                return linear(int(arg))
            if head == "geom":
                return geometric(int(arg))
            if head == "explicit":
                arg = arg.strip()
                if not (arg.startswith("[") and arg.endswith("]")):
                    raise ValueError(f"explicit rule needs a bracketed list, got {arg!r}")
                return explicit(int(p) for p in arg[1:-1].split(","))
        except ValueError as exc:
            raise ValueError(f"bad rule name {name!r}: {exc}") from None
    raise ValueError(f"unknown rule name {name!r}")


def parse_rule(name: str, horizon: int) -> JumpRule:
    return make_rule(parse_family(name), horizon)
