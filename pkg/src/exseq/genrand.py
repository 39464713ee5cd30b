"""Random and deterministic generation of exclusion-compatible sequences.

Two randomized variants are implemented.  v2.0 walks sites 1..M keeping a
candidate set per site; it halts at the first site whose candidate set is
empty, otherwise draws a uniform symbol from the remaining candidates and
removes it from every future site at jump distance.  v2.1 draws the same way
but halts at the first assignment whose update empties some *future* site,
recording (i, n): the assignment site and the jump index of the emptied site.
The lexicographic variant deterministically takes the smallest allowed symbol.

Randomness contract (fixed so runs are reproducible bit for bit, on any
worker count):

* generator: SplitMix64 (Steele-Lea-Vigna); stream k of a run with base seed
  s is seeded with s XOR k, one stream per sample;
* exactly one 64-bit word is consumed per assigned site, also when only one
  candidate remains;
* a draw from a k-candidate mask takes r = word mod k and picks the r-th set
  bit in ascending bit order (bit 0 = symbol 1).

The scalar functions here are the reference implementation; the batch kernels
in stats reproduce them exactly and are tested against them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .jumps import JumpRule

__all__ = [
    "DEFAULT_SEED",
    "MASK64",
    "SplitMix64",
    "Variant",
    "Status",
    "GenConfig",
    "GenOutcome",
    "generate",
    "generate_v20",
    "generate_v21",
    "generate_lex",
    "validate",
    "sample_seed",
    "format_symbols",
    "parse_symbols",
]

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

DEFAULT_SEED = 123456789


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & MASK64
    return z ^ (z >> 31)


def sample_seed(base_seed: int, index: int) -> int:
    """Stream seed of sample `index`: base XOR index, so samples are scheduling-independent."""
    return (base_seed ^ index) & MASK64


class SplitMix64:
    """64-bit splittable stream: state += golden gamma, output = mix(state)."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_word(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        return _mix64(self._state)


class Variant(Enum):
    V20 = "v20"
    V21 = "v21"
    LEX = "lex"


class Status(Enum):
    HALTED = "halted"
    FULL_LENGTH = "full_length"


@dataclass(frozen=True)
class GenConfig:
    """Parameters of one generation run."""

    d: int
    rule: JumpRule
    max_len: int
    seed: int = DEFAULT_SEED
    variant: Variant = Variant.V20

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"alphabet size must be >= 2, got {self.d}")
        if self.max_len < 1:
            raise ValueError(f"max_len must be >= 1, got {self.max_len}")
        if self.rule.horizon < self.max_len - 1 and self.max_len > 1:
            raise ValueError(
                f"rule horizon {self.rule.horizon} does not cover distances up to "
                f"max_len - 1 = {self.max_len - 1}"
            )


@dataclass(frozen=True)
class GenOutcome:
    """Result of one run: where it halted, or that it reached full length.

    halt_site is the site whose candidate set emptied (for v2.1 that is
    i + f(n), also recorded as terminal = (i, n)).  sequence holds the symbols
    1..d actually assigned, when retained.
    """

    status: Status
    halt_site: int | None = None
    terminal: tuple[int, int] | None = None
    sequence: tuple[int, ...] | None = None


def _draw(rng: SplitMix64, mask: int) -> int:
    """The fixed word-to-symbol mapping: r-th set bit of mask, r = word mod popcount."""
    k = bin(mask).count("1")
    r = rng.next_word() % k
    m = mask
    while True:
        b = (m & -m).bit_length() - 1
        if r == 0:
            return b
        r -= 1
        m &= m - 1


def generate_v20(cfg: GenConfig, keep_sequence: bool = True) -> GenOutcome:
    """Halt at the first site with an empty candidate set."""
    d, M = cfg.d, cfg.max_len
    full = (1 << d) - 1
    masks = [full] * (M + 1)
    dists = cfg.rule.distances
    rng = SplitMix64(cfg.seed)
    seq: list[int] = []
    for i in range(1, M + 1):
        if masks[i] == 0:
            return GenOutcome(
                Status.HALTED,
                halt_site=i,
                sequence=tuple(s + 1 for s in seq) if keep_sequence else None,
            )
        s = _draw(rng, masks[i])
        seq.append(s)
        bit = 1 << s
        for g in dists:
            j = i + g
            if j > M:
                break
            masks[j] &= ~bit
    return GenOutcome(
        Status.FULL_LENGTH,
        sequence=tuple(s + 1 for s in seq) if keep_sequence else None,
    )


def generate_v21(cfg: GenConfig, keep_sequence: bool = True) -> GenOutcome:
    """Halt at the first assignment whose update empties a future site.

    When one assignment empties several sites at once the smallest jump index
    n is recorded (the nearest emptied site); the tie-break is a convention of
    this implementation.
    """
    d, M = cfg.d, cfg.max_len
    full = (1 << d) - 1
    masks = [full] * (M + 1)
    dists = cfg.rule.distances
    rng = SplitMix64(cfg.seed)
    seq: list[int] = []
    for i in range(1, M + 1):
        # an empty masks[i] is impossible here: the update that emptied it
        # would have halted the run already
        s = _draw(rng, masks[i])
        seq.append(s)
        bit = 1 << s
        emptied_n = 0
        for n0 in range(len(dists)):
            j = i + dists[n0]
            if j > M:
                break
            old = masks[j]
            if old != 0:
                new = old & ~bit
                masks[j] = new
                if new == 0 and emptied_n == 0:
                    emptied_n = n0 + 1
        if emptied_n:
            return GenOutcome(
                Status.HALTED,
                halt_site=i + dists[emptied_n - 1],
                terminal=(i, emptied_n),
                sequence=tuple(x + 1 for x in seq) if keep_sequence else None,
            )
    return GenOutcome(
        Status.FULL_LENGTH,
        sequence=tuple(x + 1 for x in seq) if keep_sequence else None,
    )


def generate_lex(cfg: GenConfig) -> GenOutcome:
    """Deterministic greedy generation: always the smallest allowed symbol."""
    d, M = cfg.d, cfg.max_len
    full = (1 << d) - 1
    masks = [full] * (M + 1)
    dists = cfg.rule.distances
    seq: list[int] = []
    for i in range(1, M + 1):
        if masks[i] == 0:
            return GenOutcome(Status.HALTED, halt_site=i, sequence=tuple(s + 1 for s in seq))
        s = (masks[i] & -masks[i]).bit_length() - 1
        seq.append(s)
        bit = 1 << s
        for g in dists:
            j = i + g
            if j > M:
                break
            masks[j] &= ~bit
    return GenOutcome(Status.FULL_LENGTH, sequence=tuple(s + 1 for s in seq))


def generate(cfg: GenConfig, keep_sequence: bool = True) -> GenOutcome:
    if cfg.variant is Variant.V20:
        return generate_v20(cfg, keep_sequence)
    if cfg.variant is Variant.V21:
        return generate_v21(cfg, keep_sequence)
    return generate_lex(cfg)


def validate(sequence, rule: JumpRule) -> bool:
    """True iff x[i] != x[j] whenever j - i is an enumerated jump distance.

    This is the independent oracle that every generator output is tested
    against; it re-checks all pairs and shares no state with the generators.
    """
    seq = list(sequence)
    L = len(seq)
    if L - 1 > rule.horizon:
        raise ValueError(
            f"sequence of length {L} needs jump enumeration to {L - 1}, "
            f"rule horizon is {rule.horizon}"
        )
    for g in rule.distances:
        if g >= L:
            break
        for i in range(L - g):
            if seq[i] == seq[i + g]:
                return False
    return True


def format_symbols(seq, d: int) -> str:
    """Digit string for d <= 9, comma-separated integers above."""
    if d <= 9:
        return "".join(str(s) for s in seq)
    return ",".join(str(s) for s in seq)


def parse_symbols(text: str) -> tuple[int, ...]:
    text = text.strip()
    if "," in text:
        return tuple(int(p) for p in text.split(","))
    return tuple(int(ch) for ch in text)
