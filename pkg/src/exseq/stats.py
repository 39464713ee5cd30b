"""Monte Carlo harness and analysis of halting statistics.

Sampling is embarrassingly parallel: sample k of a run always uses the
SplitMix64 stream seeded with base_seed XOR k, worker threads fill disjoint
slices of one outcome array, and histograms are built from the completed
array, so results are identical for any worker count.  The batch kernels
reproduce the scalar reference generators in genrand bit for bit (tested).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .genrand import GenConfig, Variant
from .model import HaltingModel

__all__ = [
    "Histogram",
    "TerminalMap",
    "ComparisonReport",
    "ScalingFit",
    "run_sampling",
    "run_terminal_map",
    "compare",
    "scaling_fit",
    "model_moment_rows",
    "default_max_len",
    "staircase_floor",
    "write_histogram_csv",
    "write_terminal_csv",
    "write_compare_csv",
    "write_scaling_csv",
]

FULL_LENGTH_WARN_FRACTION = 1e-6

_GOLDEN_U = np.uint64(0x9E3779B97F4A7C15)
_MIXA_U = np.uint64(0xBF58476D1CE4E5B9)
_MIXB_U = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _MIXA_U
    z = (z ^ (z >> _S27)) * _MIXB_U
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def _v20_batch(d, jumps, max_len, base_seed, idx_start, out):
    """Halt sites for samples idx_start..idx_start+len(out); 0 = full length.

    The candidate set of site j is read off the symbols in its dragnet, which
    is the transpose of the update loop in the scalar reference: identical
    sets, identical draws, and one RNG word per assigned site.
    """
    full = (1 << d) - 1
    M = max_len
    x = np.zeros(M + 1, np.int64)
    nj = jumps.shape[0]
    for t in range(out.shape[0]):
        state = np.uint64(base_seed) ^ np.uint64(idx_start + t)
        halt = 0
        for j in range(1, M + 1):
            forb = 0
            for u in range(nj):
                g = jumps[u]
                if g >= j:
                    break
                forb |= np.int64(1) << x[j - g]
            if forb == full:
                halt = j
                break
            avail = full & ~forb
            k = 0
            a = avail
            while a:
                a &= a - 1
                k += 1
            state = state + _GOLDEN_U
            w = _mix64(state)
            r = np.int64(w % np.uint64(k))
            a = avail
            s = 0
            while True:
                if a & 1:
                    if r == 0:
                        break
                    r -= 1
                a >>= 1
                s += 1
            x[j] = s
        out[t] = halt
    return


@njit(cache=True, nogil=True)
def _v21_batch(d, jumps, max_len, base_seed, idx_start, out_i, out_n):
    """(i, n) terminal records; (0, 0) = full length."""
    full = (1 << d) - 1
    M = max_len
    forb = np.zeros(M + 2, np.int64)
    nj = jumps.shape[0]
    for t in range(out_i.shape[0]):
        for z in range(M + 2):
            forb[z] = 0
        state = np.uint64(base_seed) ^ np.uint64(idx_start + t)
        oi = 0
        on = 0
        for i in range(1, M + 1):
            avail = full & ~forb[i]
            k = 0
            a = avail
            while a:
                a &= a - 1
                k += 1
            state = state + _GOLDEN_U
            w = _mix64(state)
            r = np.int64(w % np.uint64(k))
            a = avail
            s = 0
            while True:
                if a & 1:
                    if r == 0:
                        break
                    r -= 1
                a >>= 1
                s += 1
            bit = np.int64(1) << s
            emptied = 0
            for u in range(nj):
                j = i + jumps[u]
                if j > M:
                    break
                old = forb[j]
                if old != full:
                    new = old | bit
                    forb[j] = new
                    if new == full and emptied == 0:
                        emptied = u + 1
            if emptied > 0:
                oi = i
                on = emptied
                break
        out_i[t] = oi
        out_n[t] = on
    return


def _jump_array(cfg: GenConfig) -> np.ndarray:
    return np.array(
        [g for g in cfg.rule.distances if g <= cfg.max_len - 1], dtype=np.int64
    )


def _run_slices(kernel_fill, samples: int, workers: int) -> None:
    """Fill per-sample outputs over [0, samples) in contiguous blocks."""
    if workers <= 1 or samples < 4 * workers:
        kernel_fill(0, samples)
        return
    bounds = np.linspace(0, samples, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda ab: kernel_fill(ab[0], ab[1]), zip(bounds, bounds[1:])))


def default_max_len(d: int) -> int:
    """Length cap that makes censoring negligible: max(2000, 4 d^(5/2))."""
    return max(2000, 4 * round(d**2.5))


@dataclass
class Histogram:
    """Halt-site counts of a v2.0 sampling run.

    counts[j] is the number of samples halting at site j; full-length runs
    are kept in a separate overflow counter so length-cap censoring stays
    visible, and they are excluded from the moment estimates.
    """

    d: int
    rule_name: str
    max_len: int
    seed: int
    samples: int
    counts: np.ndarray
    full_length: int

    @property
    def halted(self) -> int:
        return self.samples - self.full_length

    @property
    def mean(self) -> float:
        if self.halted == 0:
            return math.nan
        sites = np.arange(len(self.counts))
        return float(np.dot(sites, self.counts) / self.halted)

    @property
    def std(self) -> float:
        if self.halted == 0:
            return math.nan
        sites = np.arange(len(self.counts))
        m = self.mean
        sq = float(np.dot(sites * sites, self.counts) / self.halted)
        return math.sqrt(max(sq - m * m, 0.0))

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.counts))

    def freq(self) -> np.ndarray:
        """Empirical pmf over halt sites (relative to all samples)."""
        return self.counts / self.samples

    def log_counts(self) -> np.ndarray:
        """ln(count + 1), the log view used for slope plots."""
        return np.log(self.counts + 1.0)


def run_sampling(cfg: GenConfig, samples: int, workers: int = 1) -> Histogram:
    """Run `samples` independent v2.0 generations and histogram the halt sites."""
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if cfg.variant is not Variant.V20:
        raise ValueError(f"run_sampling needs a V20 config, got {cfg.variant}")
    jumps = _jump_array(cfg)
    out = np.zeros(samples, np.int32)
    seed = np.uint64(cfg.seed & (2**64 - 1))

    def fill(lo: int, hi: int) -> None:
        _v20_batch(cfg.d, jumps, cfg.max_len, seed, lo, out[lo:hi])

    _run_slices(fill, samples, workers)
    counts = np.bincount(out, minlength=cfg.max_len + 1).astype(np.int64)
    full_length = int(counts[0])
    counts[0] = 0
    hist = Histogram(
        d=cfg.d,
        rule_name=cfg.rule.name,
        max_len=cfg.max_len,
        seed=cfg.seed,
        samples=samples,
        counts=counts,
        full_length=full_length,
    )
    if full_length > FULL_LENGTH_WARN_FRACTION * samples:
        warnings.warn(
            f"{full_length} of {samples} runs were censored at max_len={cfg.max_len}; "
            f"increase max_len for unbiased statistics",
            stacklevel=2,
        )
    return hist


def staircase_floor(d: int, n: int) -> int:
    """Hard lower bound d^2 + 2(n-1)(d-1) on the assignment site i of a
    terminal record at jump index n (the staircase front)."""
    return d * d + 2 * (n - 1) * (d - 1)


@dataclass
class TerminalMap:
    """Sparse (i, n) counts of v2.1 terminal records."""

    d: int
    rule_name: str
    max_len: int
    seed: int
    samples: int
    counts: dict[tuple[int, int], int]
    full_length: int

    def levels(self) -> list[int]:
        return sorted({n for (_, n) in self.counts})

    def level_counts(self, n: int) -> dict[int, int]:
        return {i: c for (i, lev), c in self.counts.items() if lev == n}

    def i_min(self, n: int) -> int:
        sel = [i for (i, lev) in self.counts if lev == n]
        if not sel:
            raise ValueError(f"no terminal records at level n={n}")
        return min(sel)

    def max_i(self) -> int:
        return max((i for (i, _) in self.counts), default=0)

    def level_decay_slope(self, n: int) -> float | None:
        """OLS slope of ln(count) over the populated sites of one level.

        A negative value is the expected approximately-geometric decay; None
        when the level has fewer than two populated sites.
        """
        pts = sorted(self.level_counts(n).items())
        if len(pts) < 2:
            return None
        xs = np.array([p[0] for p in pts], float)
        ys = np.log(np.array([p[1] for p in pts], float))
        return float(np.polyfit(xs, ys, 1)[0])


def run_terminal_map(cfg: GenConfig, samples: int, workers: int = 1) -> TerminalMap:
    """Aggregate v2.1 terminal records over `samples` independent runs."""
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if cfg.variant is not Variant.V21:
        raise ValueError(f"run_terminal_map needs a V21 config, got {cfg.variant}")
    jumps = _jump_array(cfg)
    out_i = np.zeros(samples, np.int32)
    out_n = np.zeros(samples, np.int32)
    seed = np.uint64(cfg.seed & (2**64 - 1))

    def fill(lo: int, hi: int) -> None:
        _v21_batch(cfg.d, jumps, cfg.max_len, seed, lo, out_i[lo:hi], out_n[lo:hi])

    _run_slices(fill, samples, workers)
    full_length = int(np.sum(out_i == 0))
    counts: dict[tuple[int, int], int] = {}
    halted = out_i > 0
    pair = out_i[halted].astype(np.int64) * (len(jumps) + 1) + out_n[halted]
    uniq, cnt = np.unique(pair, return_counts=True)
    for code, c in zip(uniq, cnt):
        i, n = divmod(int(code), len(jumps) + 1)
        counts[(i, n)] = int(c)
    tm = TerminalMap(
        d=cfg.d,
        rule_name=cfg.rule.name,
        max_len=cfg.max_len,
        seed=cfg.seed,
        samples=samples,
        counts=counts,
        full_length=full_length,
    )
    if full_length > FULL_LENGTH_WARN_FRACTION * samples:
        warnings.warn(
            f"{full_length} of {samples} runs were censored at max_len={cfg.max_len}",
            stacklevel=2,
        )
    return tm


@dataclass
class ComparisonReport:
    """Side-by-side of an empirical histogram and the exact model."""

    d: int
    rule_name: str
    sites: np.ndarray
    empirical: np.ndarray
    model: np.ndarray
    empirical_mean: float
    empirical_std: float
    model_mean: float
    model_std: float
    empirical_argmax: int
    model_argmax: int
    interval_slopes: list[tuple[int, float | None, float]] = field(default_factory=list)
    model_cdf_dominates_to_peak: bool = False

    @property
    def argmax_match(self) -> bool:
        return self.empirical_argmax == self.model_argmax

    @property
    def mean_delta(self) -> float:
        return self.empirical_mean - self.model_mean

    @property
    def std_delta(self) -> float:
        return self.empirical_std - self.model_std


def compare(model: HaltingModel, hist: Histogram, max_intervals: int = 12) -> ComparisonReport:
    """Pair empirical frequencies with model pmf values site by site.

    Per-interval slopes compare the empirical ln-frequency decay against the
    model's exact within-interval rate ln(1 - p_i); the CDF-dominance flag
    records whether the model puts its mass earlier all the way up to the
    model peak (a qualitative shape diagnostic).
    """
    if model.d != hist.d or model.rule_name != hist.rule_name:
        raise ValueError(
            f"model ({model.d}, {model.rule_name}) and histogram "
            f"({hist.d}, {hist.rule_name}) disagree"
        )
    last = min(model.last_site, hist.max_len)
    sites = np.arange(1, last + 1)
    emp = hist.freq()[1 : last + 1]
    mod = model.pmf[1 : last + 1]
    # per-interval slope comparison on the log scale
    from .jumps import DragnetProfile, HorizonError, parse_rule

    rule = parse_rule(model.rule_name, last + 1)
    prof = DragnetProfile(rule, model.d)
    slopes: list[tuple[int, float | None, float]] = []
    for i in range(1, max_intervals + 1):
        try:
            iv = prof.interval(i)
        except HorizonError:
            break
        if iv.end > last or i > len(model.p_values):
            break
        seg = hist.counts[iv.start : iv.end + 1]
        model_slope = math.log(1.0 - float(model.p_values[i - 1]))
        pop = seg > 0
        if pop.sum() >= 2:
            xs = np.arange(iv.start, iv.end + 1)[pop].astype(float)
            ys = np.log(seg[pop].astype(float))
            emp_slope = float(np.polyfit(xs, ys, 1)[0])
        else:
            emp_slope = None
        slopes.append((i, emp_slope, model_slope))
    peak = int(np.argmax(mod)) + 1
    dominates = bool(np.all(np.cumsum(mod[:peak]) >= np.cumsum(emp[:peak]) - 1e-12))
    return ComparisonReport(
        d=model.d,
        rule_name=model.rule_name,
        sites=sites,
        empirical=emp,
        model=mod,
        empirical_mean=hist.mean,
        empirical_std=hist.std,
        model_mean=model.mean,
        model_std=model.std,
        empirical_argmax=hist.argmax,
        model_argmax=model.argmax,
        interval_slopes=slopes,
        model_cdf_dominates_to_peak=dominates,
    )


@dataclass
class ScalingFit:
    """Log-log OLS of mean and std against alphabet size."""

    ds: tuple[int, ...]
    mean_exponent: float
    mean_intercept: float
    std_exponent: float
    std_intercept: float
    mean_residuals: tuple[float, ...]
    std_residuals: tuple[float, ...]


def scaling_fit(rows) -> ScalingFit:
    """OLS on log-log pairs; rows are (d, mean, std).  Residuals are reported,
    never folded away."""
    rows = sorted((int(d), float(m), float(s)) for d, m, s in rows)
    if len(rows) < 4:
        raise ValueError(f"need >= 4 alphabet sizes for a fit, got {len(rows)}")
    ds = np.array([r[0] for r in rows], float)
    x = np.log(ds)
    ym = np.log(np.array([r[1] for r in rows]))
    ys = np.log(np.array([r[2] for r in rows]))
    bm, am = np.polyfit(x, ym, 1)
    bs, as_ = np.polyfit(x, ys, 1)
    return ScalingFit(
        ds=tuple(int(d) for d in ds),
        mean_exponent=float(bm),
        mean_intercept=float(am),
        std_exponent=float(bs),
        std_intercept=float(as_),
        mean_residuals=tuple(float(v) for v in ym - (am + bm * x)),
        std_residuals=tuple(float(v) for v in ys - (as_ + bs * x)),
    )


def model_moment_rows(ds, rule_factory) -> list[tuple[int, float, float]]:
    """(d, mean, std) rows from freshly computed halting models."""
    from .model import halting_pmf

    rows = []
    for d in ds:
        m = halting_pmf(d, rule_factory(d))
        rows.append((d, m.mean, m.std))
    return rows


def write_histogram_csv(hist: Histogram, stream) -> None:
    stream.write("j,count,freq,ln_count_plus_1\n")
    freq = hist.freq()
    logc = hist.log_counts()
    for j in range(1, hist.max_len + 1):
        stream.write(f"{j},{int(hist.counts[j])},{float(freq[j])!r},{float(logc[j])!r}\n")


def write_terminal_csv(tm: TerminalMap, stream) -> None:
    stream.write("i,n,count\n")
    for (i, n), c in sorted(tm.counts.items()):
        stream.write(f"{i},{n},{c}\n")


def write_compare_csv(report: ComparisonReport, stream) -> None:
    stream.write("j,empirical,model\n")
    for j, e, m in zip(report.sites, report.empirical, report.model):
        stream.write(f"{int(j)},{float(e)!r},{float(m)!r}\n")


def write_scaling_csv(rows, stream) -> None:
    stream.write("d,mean,std\n")
    for d, m, s in rows:
        stream.write(f"{int(d)},{float(m)!r},{float(s)!r}\n")
