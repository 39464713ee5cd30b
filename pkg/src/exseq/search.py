"""Exhaustive and structural search: maximal lengths, window emptiness,
periodicity checks.

The one-sided search is a depth-first walk over legal prefixes with the same
candidate-set propagation the generators use.  Symbol-permutation symmetry is
quotiented away by exploring canonical colorings only (first occurrences of
symbols appear in increasing order; the root is pinned to symbol 1), which
does not change any max-length verdict.  An AllFinite verdict is only ever
reported by the systematic pass actually exhausting the tree; when the node
budget runs out first, a reserved slice of the budget is spent on seeded
randomized-order restart probes, which can only deepen the reported
ReachedBudget depth, never produce a wrong AllFinite.

The two-sided window search assigns sites outward from 0 (pinned to symbol 1)
with propagation in both directions; an exhausted tree proves the window
unsatisfiable, which rules out every two-sided sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .genrand import format_symbols, validate
from .jumps import JumpRule

__all__ = [
    "SearchBudget",
    "SearchReport",
    "exhaustive_one_sided",
    "two_sided_window",
    "divisibility_check",
    "period_detect",
]

_PROBE_RESTART_NODES = 384
_PROBE_RESERVE_CAP = 8_000_000

_GOLDEN_U = np.uint64(0x9E3779B97F4A7C15)
_MIXA_U = np.uint64(0xBF58476D1CE4E5B9)
_MIXB_U = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@dataclass(frozen=True)
class SearchBudget:
    max_nodes: int = 10**9
    max_depth: int = 4096

    def __post_init__(self):
        if self.max_nodes < 1 or self.max_depth < 1:
            raise ValueError("search budget must be positive")


@dataclass(frozen=True)
class SearchReport:
    """Outcome of one search run.

    verdict is one of all_finite, reached_budget, satisfiable, period_found,
    no_period, periodicity_excluded, periodicity_possible.  An unsatisfiable
    window is encoded as all_finite with max_length 0.
    """

    mode: str
    verdict: str
    nodes_explored: int = 0
    max_length: int | None = None
    depth_reached: int | None = None
    witness: str | None = None
    period: str | None = None
    period_length: int | None = None
    divisor_index: int | None = None
    horizon: int | None = None

    @property
    def inconclusive(self) -> bool:
        return self.verdict in ("reached_budget", "periodicity_possible")

    def summary(self) -> str:
        v = self.verdict
        if v == "all_finite":
            if self.mode == "two_sided_window":
                return "unsatisfiable"
            return f"AllFinite max_length={self.max_length}"
        if v == "reached_budget":
            return f"ReachedBudget depth={self.depth_reached}"
        if v == "satisfiable":
            return f"satisfiable witness={self.witness}"
        if v == "period_found":
            return f"PeriodFound length={self.period_length} period={self.period}"
        if v == "no_period":
            return "no period found"
        if v == "periodicity_excluded":
            return f"PeriodicityExcluded n={self.divisor_index}"
        return f"PeriodicityPossible horizon={self.horizon}"


@njit(cache=True, nogil=True)
def _dfs_kernel(d, jumps, prefix, depth_cap, node_limit, canonical):
    """Systematic DFS from a forced prefix.

    Returns (best depth, nodes, exhausted, depth_capped, witness array).
    Smallest-symbol-first order; nodes counts assignments tried.
    """
    full = (1 << d) - 1
    L = depth_cap
    masks = np.full(L + 2, np.int64(full), np.int64)
    tried = np.zeros(L + 2, np.int64)
    symb = np.zeros(L + 2, np.int64)
    used = np.zeros(L + 2, np.int64)
    nundo = np.zeros(L + 2, np.int64)
    undo_sites = np.zeros((L + 2, jumps.shape[0]), np.int64)
    witness = np.zeros(L + 2, np.int64)
    plen = prefix.shape[0]
    # lay down the prefix; it is trusted to be legal and canonical
    for i in range(1, plen + 1):
        s = prefix[i - 1]
        bit = np.int64(1) << s
        symb[i] = s
        used[i] = used[i - 1] + (1 if s == used[i - 1] else 0)
        for t in range(jumps.shape[0]):
            j = i + jumps[t]
            if j > L:
                break
            masks[j] &= ~bit
    best = plen
    for t in range(1, plen + 1):
        witness[t] = symb[t]
    nodes = 0
    capped = plen >= L  # nothing left to explore below the cap
    budget_hit = False
    i = plen + 1
    tried[i] = 0
    while i > plen and not capped:
        allowed = masks[i] & ~tried[i]
        if canonical:
            lim = used[i - 1] + 1
            if lim < d:
                allowed &= (np.int64(1) << lim) - 1
        if allowed == 0:
            i -= 1
            if i > plen:
                bit = np.int64(1) << symb[i]
                for t in range(nundo[i]):
                    masks[undo_sites[i, t]] |= bit
            continue
        s = 0
        a = allowed
        while a & 1 == 0:
            a >>= 1
            s += 1
        tried[i] |= np.int64(1) << s
        nodes += 1
        if nodes > node_limit:
            budget_hit = True
            break
        bit = np.int64(1) << s
        cnt = 0
        for t in range(jumps.shape[0]):
            j = i + jumps[t]
            if j > L:
                break
            if masks[j] & bit:
                masks[j] &= ~bit
                undo_sites[i, cnt] = j
                cnt += 1
        nundo[i] = cnt
        symb[i] = s
        used[i] = used[i - 1] + (1 if s == used[i - 1] else 0)
        if i > best:
            best = i
            for t in range(1, i + 1):
                witness[t] = symb[t]
        if i == L:
            capped = True
            for t in range(nundo[i]):
                masks[undo_sites[i, t]] |= bit
            continue
        i += 1
        tried[i] = 0
    exhausted = (not budget_hit) and (not capped)
    return best, nodes, exhausted, capped, witness[1 : best + 1].copy()


@njit(cache=True, nogil=True)
def _probe_kernel(d, jumps, depth_cap, node_budget, restart_nodes, seed_lo, seed_hi):
    """Randomized-value-order DFS restarts; reports the deepest prefix found.

    Each restart is an independent bounded DFS whose sibling order is drawn
    from SplitMix64 seeded with the restart index, so the result is a pure
    function of (seed range, budget) and independent of scheduling.
    """
    full = (1 << d) - 1
    L = depth_cap
    masks = np.full(L + 2, np.int64(full), np.int64)
    tried = np.zeros(L + 2, np.int64)
    symb = np.zeros(L + 2, np.int64)
    nundo = np.zeros(L + 2, np.int64)
    undo_sites = np.zeros((L + 2, jumps.shape[0]), np.int64)
    witness = np.zeros(L + 2, np.int64)
    best_all = 0
    nodes_total = 0
    for sd in range(seed_lo, seed_hi):
        if nodes_total >= node_budget:
            break
        state = np.uint64(sd)
        for z in range(L + 2):
            masks[z] = full
        i = 1
        tried[1] = 0
        nodes = 0
        while i >= 1 and nodes < restart_nodes and nodes_total < node_budget:
            allowed = masks[i] & ~tried[i]
            if allowed == 0:
                i -= 1
                if i >= 1:
                    bit = np.int64(1) << symb[i]
                    for t in range(nundo[i]):
                        masks[undo_sites[i, t]] |= bit
                continue
            k = 0
            a = allowed
            while a:
                a &= a - 1
                k += 1
            state = state + _GOLDEN_U
            w = state
            w = (w ^ (w >> _S30)) * _MIXA_U
            w = (w ^ (w >> _S27)) * _MIXB_U
            w = w ^ (w >> _S31)
            r = np.int64(w % np.uint64(k))
            a = allowed
            s = 0
            while True:
                if a & 1:
                    if r == 0:
                        break
                    r -= 1
                a >>= 1
                s += 1
            tried[i] |= np.int64(1) << s
            nodes += 1
            nodes_total += 1
            bit = np.int64(1) << s
            cnt = 0
            for t in range(jumps.shape[0]):
                j = i + jumps[t]
                if j > L:
                    break
                if masks[j] & bit:
                    masks[j] &= ~bit
                    undo_sites[i, cnt] = j
                    cnt += 1
            nundo[i] = cnt
            symb[i] = s
            if i > best_all:
                best_all = i
                for t in range(1, i + 1):
                    witness[t] = symb[t]
            if i == L:
                break
            i += 1
            tried[i] = 0
    return best_all, nodes_total, witness[1 : best_all + 1].copy()


def _enumerate_prefixes(d: int, rule: JumpRule, depth: int, cap: int) -> tuple[list[list[int]], int]:
    """All legal canonical prefixes of the given depth (symbols 0-based).

    Also returns the count of tree nodes at depths <= depth, so a split
    search books shared ancestors exactly once and total node counts match
    the unsplit search.
    """
    dists = rule.distances
    full = (1 << d) - 1
    out: list[list[int]] = []
    masks = [full] * (cap + 2)
    nodes = 0

    def rec(i: int, used: int, acc: list[int]) -> None:
        nonlocal nodes
        if i > depth:
            out.append(acc.copy())
            return
        allowed = masks[i] & ((1 << min(used + 1, d)) - 1)
        m = allowed
        while m:
            s = (m & -m).bit_length() - 1
            m &= m - 1
            nodes += 1
            bit = 1 << s
            undo = []
            for g in dists:
                j = i + g
                if j > cap:
                    break
                if masks[j] & bit:
                    masks[j] &= ~bit
                    undo.append(j)
            acc.append(s)
            rec(i + 1, used + (1 if s == used else 0), acc)
            acc.pop()
            for j in undo:
                masks[j] |= bit

    rec(1, 0, [])
    return out, nodes


def _jump_array(rule: JumpRule, bound: int) -> np.ndarray:
    return np.array([g for g in rule.distances if g <= bound], dtype=np.int64)


def exhaustive_one_sided(
    d: int,
    rule: JumpRule,
    budget: SearchBudget = SearchBudget(),
    canonical: bool = True,
    workers: int = 1,
    probe: bool = True,
) -> SearchReport:
    """Maximal length of a legal one-sided string, or the deepest one found.

    With workers > 1 the canonical prefixes at a small split depth are searched
    as independent subtrees; the verdict is the max/sum/AND reduction over
    subtree results, so it does not depend on the worker count.
    """
    if d < 2:
        raise ValueError(f"alphabet size must be >= 2, got {d}")
    cap = budget.max_depth
    if rule.horizon < cap:
        rule = rule.with_horizon(cap)
    jumps = _jump_array(rule, cap)
    mode = "one_sided_exhaustive"

    probe_reserve = 0
    if probe and budget.max_nodes > 4_000_000:
        probe_reserve = min(budget.max_nodes // 2, _PROBE_RESERVE_CAP)
    systematic_nodes = budget.max_nodes - probe_reserve

    if workers <= 1:
        best, nodes, exhausted, capped, wit = _dfs_kernel(
            d, jumps, np.empty(0, np.int64), cap, systematic_nodes, canonical
        )
        results = [(int(best), int(nodes), bool(exhausted), bool(capped), wit)]
        prefix_nodes = 0
    else:
        split_depth = 1
        prefixes, prefix_nodes = _enumerate_prefixes(d, rule, split_depth, cap)
        while len(prefixes) < 4 * workers and split_depth < 12:
            split_depth += 1
            nxt, nxt_nodes = _enumerate_prefixes(d, rule, split_depth, cap)
            if not nxt:
                break
            prefixes, prefix_nodes = nxt, nxt_nodes
        share = max(1, (systematic_nodes - prefix_nodes) // max(len(prefixes), 1))
        from concurrent.futures import ThreadPoolExecutor

        def job(p):
            arr = np.array(p, dtype=np.int64)
            return _dfs_kernel(d, jumps, arr, cap, share, canonical)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = [
                (int(b), int(n), bool(e), bool(c), w)
                for b, n, e, c, w in pool.map(job, prefixes)
            ]

    best = max((r[0] for r in results), default=0)
    nodes = sum(r[1] for r in results) + prefix_nodes
    exhausted = all(r[2] for r in results)
    capped = any(r[3] for r in results)
    wit = next(r[4] for r in results if r[0] == best)

    if exhausted and not capped:
        return SearchReport(
            mode,
            "all_finite",
            nodes_explored=nodes,
            max_length=best,
            depth_reached=best,
            witness=format_symbols([int(s) + 1 for s in wit], d),
        )

    if probe_reserve > 0:
        n_restarts = probe_reserve // _PROBE_RESTART_NODES
        lo = 1
        hi = lo + n_restarts
        if workers <= 1:
            pb, pn, pw = _probe_kernel(d, jumps, cap, probe_reserve, _PROBE_RESTART_NODES, lo, hi)
            probe_results = [(int(pb), int(pn), pw)]
        else:
            from concurrent.futures import ThreadPoolExecutor

            bounds = np.linspace(lo, hi, workers + 1).astype(np.int64)
            shares = [probe_reserve // workers] * workers

            def pjob(args):
                a, b, share = args
                return _probe_kernel(d, jumps, cap, share, _PROBE_RESTART_NODES, a, b)

            with ThreadPoolExecutor(max_workers=workers) as pool:
                probe_results = [
                    (int(b), int(n), w)
                    for b, n, w in pool.map(
                        pjob, [(int(a), int(b), s) for a, b, s in zip(bounds, bounds[1:], shares)]
                    )
                ]
        for pb, pn, pw in probe_results:
            nodes += pn
            if pb > best:
                best, wit = pb, pw

    return SearchReport(
        mode,
        "reached_budget",
        nodes_explored=nodes,
        depth_reached=best,
        witness=format_symbols([int(s) + 1 for s in wit], d),
    )


@njit(cache=True, nogil=True)
def _window_kernel(d, jumps, radius, node_limit):
    """Exhaust the window {-radius..radius} outward from 0 with x_0 = symbol 1.

    Returns (found, nodes, exhausted, assignment array indexed pos+radius).
    Canonical colorings only (sound for satisfiability: symbol permutations
    act freely on assignments).
    """
    size = 2 * radius + 1
    full = (1 << d) - 1
    # outward order 0, +1, -1, +2, -2, ...
    order = np.zeros(size, np.int64)
    t = 0
    order[t] = radius
    for r in range(1, radius + 1):
        t += 1
        order[t] = radius + r
        t += 1
        order[t] = radius - r
    rank = np.zeros(size, np.int64)
    for t in range(size):
        rank[order[t]] = t
    masks = np.full(size, np.int64(full), np.int64)
    tried = np.zeros(size + 1, np.int64)
    symb = np.zeros(size + 1, np.int64)
    used = np.zeros(size + 1, np.int64)
    nundo = np.zeros(size + 1, np.int64)
    undo_sites = np.zeros((size + 1, 2 * jumps.shape[0]), np.int64)
    assign = np.zeros(size, np.int64)
    nodes = 0
    exhausted = False
    found = False
    t = 0
    tried[0] = 0
    while t >= 0:
        pos = order[t]
        allowed = masks[pos] & ~tried[t]
        lim = used[t] + 1 if t > 0 else 1  # x_0 pinned to symbol 1
        if lim < d:
            allowed &= (np.int64(1) << lim) - 1
        if allowed == 0:
            t -= 1
            if t >= 0:
                bit = np.int64(1) << symb[t]
                for u in range(nundo[t]):
                    masks[undo_sites[t, u]] |= bit
            continue
        s = 0
        a = allowed
        while a & 1 == 0:
            a >>= 1
            s += 1
        tried[t] |= np.int64(1) << s
        nodes += 1
        if nodes > node_limit:
            break
        bit = np.int64(1) << s
        cnt = 0
        dead = False
        for u in range(jumps.shape[0]):
            g = jumps[u]
            for direction in range(2):
                q = pos + g if direction == 0 else pos - g
                if q < 0 or q >= size:
                    continue
                if rank[q] < t:
                    continue  # already assigned; propagation kept us consistent
                if masks[q] & bit:
                    masks[q] &= ~bit
                    undo_sites[t, cnt] = q
                    cnt += 1
                    if masks[q] == 0:
                        dead = True
        nundo[t] = cnt
        symb[t] = s
        if dead:
            for u in range(cnt):
                masks[undo_sites[t, u]] |= bit
            continue
        used[t + 1] = used[t] + (1 if s == used[t] else 0)
        if t == size - 1:
            found = True
            for u in range(size):
                assign[u] = 0
            for u in range(size):
                # reconstruct: symb[rank] holds the symbol chosen at each rank
                assign[order[u]] = symb[u]
            break
        t += 1
        tried[t] = 0
    if not found and nodes <= node_limit:
        exhausted = True
    return found, nodes, exhausted, assign


def two_sided_window(
    d: int,
    rule: JumpRule,
    radius: int,
    budget: SearchBudget = SearchBudget(),
) -> SearchReport:
    """Exhaust all legal assignments of {-radius..radius}; unsatisfiable means
    the two-sided space is empty."""
    if d < 2:
        raise ValueError(f"alphabet size must be >= 2, got {d}")
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    if rule.horizon < 2 * radius:
        rule = rule.with_horizon(2 * radius)
    jumps = _jump_array(rule, 2 * radius)
    if len(jumps) == 0:
        raise ValueError(f"radius {radius} is below the smallest jump of rule {rule.name}")
    found, nodes, exhausted, assign = _window_kernel(d, jumps, radius, budget.max_nodes)
    mode = "two_sided_window"
    if found:
        wit = format_symbols([int(s) + 1 for s in assign], d)
        return SearchReport(mode, "satisfiable", nodes_explored=int(nodes), witness=wit)
    if exhausted:
        return SearchReport(mode, "all_finite", nodes_explored=int(nodes), max_length=0)
    return SearchReport(mode, "reached_budget", nodes_explored=int(nodes), depth_reached=0)


def divisibility_check(rule_or_family, m: int, horizon: int) -> SearchReport:
    """Least n with m | f(n), scanning indices n = 1..horizon modularly.

    A hit rules out any periodic point of period m (tiling a period-m string
    collides with itself across the distance f(n)); no hit up to the horizon
    is inconclusive beyond it.  Accepts a JumpRule or a bare JumpFamily; the
    scan runs mod m, so fast-growing families never materialize huge values.
    """
    if m < 1:
        raise ValueError(f"candidate period must be >= 1, got {m}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    family = getattr(rule_or_family, "family", rule_or_family)
    mode = "divisibility_check"
    for n, residue in enumerate(family.iter_values_mod(m), start=1):
        if n > horizon:
            break
        if residue == 0:
            return SearchReport(mode, "periodicity_excluded", divisor_index=n)
    return SearchReport(mode, "periodicity_possible", horizon=horizon)


def period_detect(sequence, max_period: int) -> SearchReport:
    """Smallest eventual period of the tail, by suffix self-matching.

    The second half of the string is scanned for the least p with
    tail[i] == tail[i+p]; the reported unit starts at the earliest site from
    which the whole remainder is p-periodic, so a transient prefix is ignored.
    """
    seq = list(sequence)
    L = len(seq)
    if max_period < 1:
        raise ValueError(f"max period must be >= 1, got {max_period}")
    if L < 2 * max_period:
        raise ValueError(f"sequence of length {L} is too short to detect period {max_period}")
    mode = "period_detect"
    half = L // 2
    tail = seq[half:]
    for p in range(1, max_period + 1):
        if all(tail[i] == tail[i + p] for i in range(len(tail) - p)):
            start = half
            while start > 0 and seq[start - 1] == seq[start - 1 + p]:
                start -= 1
            unit = seq[start : start + p]
            d = max(seq)
            return SearchReport(
                mode,
                "period_found",
                period=format_symbols(unit, d),
                period_length=p,
                depth_reached=start + 1,
            )
    return SearchReport(mode, "no_period")


def window_witness_is_valid(report: SearchReport, rule: JumpRule) -> bool:
    """Check a satisfiable-window witness against the validator (test hook)."""
    if report.witness is None:
        return False
    from .genrand import parse_symbols

    return validate(parse_symbols(report.witness), rule)
