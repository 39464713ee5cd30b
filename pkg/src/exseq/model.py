"""Exact compound-geometric model of the halting site distribution.

Under the simplifying assumption that earlier symbols are i.i.d. uniform on
the alphabet, a site in the i-th interval (dragnet size c = d + i - 1) sees a
full block exactly when its dragnet is onto the alphabet, so

    p_i = Surj(d + i - 1, d) / d^(d + i - 1)

with Surj(c, d) the number of onto assignments of c labelled sites to d
symbols.  Surj is computed by inclusion-exclusion over missing symbols, an
O(d) big-integer sum per value; the equivalent sum of multinomial
coefficients over positive compositions is kept as a test oracle.  Halting is
then geometric within each interval with the parameter stepping from p_i to
p_(i+1) at the jump sites, and the pmf is the running product

    pmf(j) = prod_(j' < j) (1 - p(c(j'))) * p(c(j)).

p values stay exact rationals until the product stage; the site-by-site
product runs in floats (every factor is exact to rounding, and the exact
product over thousands of sites buys nothing).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .jumps import DragnetProfile, HorizonError, JumpRule

__all__ = [
    "multinomial",
    "surjection_count",
    "full_block_prob",
    "interval_full_block_prob",
    "tail_bound",
    "interval_ratio",
    "HaltingModel",
    "ModelMoments",
    "halting_pmf",
    "square_closed_form_pmf",
    "model_moments",
    "write_model_csv",
    "model_json_dict",
]

DEFAULT_TAIL_TOL = 1e-12


def multinomial(ks: Iterable[int]) -> int:
    """(sum ks)! / prod(ks!) exactly; all parts must be >= 0."""
    total = 0
    out = 1
    for k in ks:
        if k < 0:
            raise ValueError(f"multinomial parts must be >= 0, got {k}")
        total += k
        out *= math.comb(total, k)
    return out


def surjection_count(c: int, d: int) -> int:
    """Onto assignments of c labelled sites to d symbols (0 when c < d)."""
    if c < 0:
        raise ValueError(f"site count must be >= 0, got {c}")
    if d < 1:
        raise ValueError(f"alphabet size must be >= 1, got {d}")
    return sum((-1) ** m * math.comb(d, m) * (d - m) ** c for m in range(d + 1))


def full_block_prob(d: int, c: int) -> Fraction:
    """Probability that c i.i.d.-uniform symbols cover all d values: Surj(c, d)/d^c."""
    if c < d:
        return Fraction(0)
    return Fraction(surjection_count(c, d), d**c)


def interval_full_block_prob(d: int, i: int) -> Fraction:
    """p_i: full-block probability at a site of the i-th interval (c = d + i - 1)."""
    if i < 1:
        raise ValueError(f"interval index must be >= 1, got {i}")
    return full_block_prob(d, d + i - 1)


def tail_bound(d: int, i: int) -> float:
    """Geometric bound d(1 - 1/d)^(d - 1 + i) on 1 - p_i.

    Strict for d >= 3; for d = 2 it is attained with equality at every i
    (the two corners of the Pascal-simplex level each lie on a single face,
    so the face-count argument over-counts nothing).
    """
    if d < 2:
        raise ValueError(f"alphabet size must be >= 2, got {d}")
    if i < 1:
        raise ValueError(f"interval index must be >= 1, got {i}")
    q = 1.0 - 1.0 / d
    return d * q ** (d - 1) * q**i


def interval_ratio(d: int, i: int) -> float:
    """r_i = (1 - p_i) p_(i+1) / p_i, the pmf step across the i-th jump site.

    May exceed 1 for small i (the pmf can jump up at a jump site); since
    p_i -> 1, eventually max(r_i, 1 - p_i) stays below 1 and the tail decays
    geometrically.
    """
    p_i = interval_full_block_prob(d, i)
    if p_i == 0:
        raise ValueError(f"p_{i} = 0 at d={d}; ratio undefined")
    p_next = interval_full_block_prob(d, i + 1)
    return float((1 - p_i) * p_next / p_i)


@dataclass(frozen=True)
class ModelMoments:
    mean: float
    std: float
    argmax: int
    peak: float


@dataclass(frozen=True)
class HaltingModel:
    """Truncated halting pmf with its exact p table.

    pmf[j] indexes sites 1..last_site (pmf[0] = 0); survival[j] is the
    probability of halting after j.  tail_mass = survival[last_site] is below
    the requested tolerance, and the reported moments carry truncation error
    at most tail_mean_bound / tail_sqmean_bound (from the geometric tail).
    """

    d: int
    rule_name: str
    p_values: tuple[Fraction, ...]
    pmf: np.ndarray
    survival: np.ndarray
    first_site: int
    last_site: int
    tail_mass: float
    mean: float
    std: float
    tail_mean_bound: float

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.pmf))

    @property
    def peak(self) -> float:
        return float(self.pmf[self.argmax])

    def total_mass(self) -> float:
        return float(self.pmf.sum())


def halting_pmf(
    d: int,
    rule: JumpRule,
    tail_tol: float = DEFAULT_TAIL_TOL,
    max_sites: int | None = None,
) -> HaltingModel:
    """Build the halting model, truncating once survival drops below tail_tol.

    Raises HorizonError when the rule's enumeration runs out before the
    tolerance is met (the horizon is a hard bound, never silently truncated).
    """
    prof = DragnetProfile(rule, d)
    first_site = prof.first_block_site
    limit = max_sites if max_sites is not None else rule.horizon + 1
    p_values: list[Fraction] = []
    p_floats: list[float] = []
    pmf = [0.0] * first_site  # sites 0 .. first_site-1 carry no mass
    survival = [1.0] * first_site
    surv = 1.0
    j = first_site
    while surv >= tail_tol:
        if j > limit:
            raise HorizonError(
                f"tail tolerance {tail_tol} not reached within {limit} sites "
                f"(survival still {surv:.3e} at d={d}, rule {rule.name})"
            )
        try:
            i = prof.interval_index(j)
        except HorizonError:
            raise HorizonError(
                f"rule horizon {rule.horizon} exhausted at site {j} before tail "
                f"tolerance {tail_tol} was reached (survival {surv:.3e})"
            ) from None
        while len(p_values) < i:
            p_values.append(interval_full_block_prob(d, len(p_values) + 1))
            p_floats.append(float(p_values[-1]))
        p = p_floats[i - 1]
        pmf.append(surv * p)
        surv *= 1.0 - p
        survival.append(surv)
        j += 1
    last_site = j - 1
    pmf_arr = np.array(pmf)
    sites = np.arange(len(pmf))
    mean = float(np.dot(sites, pmf_arr))
    sq = float(np.dot(sites * sites, pmf_arr))
    std = math.sqrt(max(sq - mean * mean, 0.0))
    # past last_site halting is at least as fast as Geometric(p_last):
    # the truncated tail shifts the mean by < surv * (last_site + 1/p_last)
    p_last = p_floats[-1]
    tail_mean_bound = surv * (last_site + 1.0 / p_last)
    return HaltingModel(
        d=d,
        rule_name=rule.name,
        p_values=tuple(p_values),
        pmf=pmf_arr,
        survival=np.array(survival),
        first_site=first_site,
        last_site=last_site,
        tail_mass=surv,
        mean=mean,
        std=std,
        tail_mean_bound=tail_mean_bound,
    )


def square_closed_form_pmf(d: int, j: int, p_values: Sequence[float]) -> float:
    """Three-branch closed form of the pmf for the square rule.

    Zero through site d^2; geometric with parameter p_1 on the first interval;
    on the i-th interval the product of the earlier intervals' survival blocks
    (1 - p_k)^(l_k) times the within-interval geometric term.  Equals the
    generic running-product pmf site for site; kept as an independent cross-
    check of that path.
    """
    if j <= d * d:
        return 0.0
    i = math.isqrt(j - 1) - d + 1
    if i > len(p_values):
        raise ValueError(f"need p_1..p_{i} for site {j}, got {len(p_values)}")
    if i == 1:
        p1 = p_values[0]
        return (1.0 - p1) ** (j - d * d - 1) * p1
    acc = 1.0
    for k in range(1, i):
        l_k = 2 * (d + k) - 1
        acc *= (1.0 - p_values[k - 1]) ** l_k
    run = j - (d + i - 1) ** 2 - 1  # sites of interval i strictly before j
    return acc * (1.0 - p_values[i - 1]) ** run * p_values[i - 1]


def model_moments(model: HaltingModel) -> ModelMoments:
    return ModelMoments(model.mean, model.std, model.argmax, model.peak)


def write_model_csv(model: HaltingModel, stream) -> None:
    """CSV columns j, pmf, survival over the truncated support."""
    stream.write("j,pmf,survival\n")
    for j in range(1, model.last_site + 1):
        stream.write(f"{j},{float(model.pmf[j])!r},{float(model.survival[j])!r}\n")


def model_json_dict(model: HaltingModel) -> dict:
    """JSON form: exact p table (numerator/denominator strings) plus floats."""
    return {
        "d": model.d,
        "rule": model.rule_name,
        "first_site": model.first_site,
        "last_site": model.last_site,
        "tail_mass": model.tail_mass,
        "mean": model.mean,
        "std": model.std,
        "tail_mean_bound": model.tail_mean_bound,
        "argmax": model.argmax,
        "peak": model.peak,
        "p_table": [
            {
                "i": i + 1,
                "numerator": str(p.numerator),
                "denominator": str(p.denominator),
                "value": float(p),
            }
            for i, p in enumerate(model.p_values)
        ],
        "pmf": [float(v) for v in model.pmf[1:]],
        "survival": [float(v) for v in model.survival[1:]],
    }


def dump_model_json(model: HaltingModel, stream) -> None:
    json.dump(model_json_dict(model), stream, indent=2, sort_keys=True)
    stream.write("\n")
