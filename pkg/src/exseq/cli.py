"""Command-line entry point.

Every run resolves a RunSpec (flags > config file > environment > defaults),
logs it as machine-parsable key=value lines on stderr, and, when writing an
output file, drops a `<out>.runspec` sidecar in the same key=value format.
Re-running a sidecar through --config reproduces the output byte for byte.

Exit codes: 0 success, 1 configuration error, 2 budget-exhausted or otherwise
inconclusive verdicts (so scripted proofs can branch on them).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from io import StringIO

from . import genrand, jumps, model, search, stats
from .genrand import DEFAULT_SEED, GenConfig, Variant

__all__ = ["RunSpec", "main"]

WORKERS_ENV = "EXSEQ_WORKERS"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INCONCLUSIVE = 2


@dataclass
class RunSpec:
    """Fully resolved parameters of one CLI invocation."""

    subcommand: str
    d: int | None = None
    rule: str | None = None
    max_len: int | None = None
    samples: int | None = None
    seed: int | None = None
    workers: int = 1
    out: str | None = None
    format: str = "csv"
    radius: int | None = None
    max_nodes: int | None = None
    max_depth: int | None = None
    divisor: int | None = None
    horizon: int | None = None
    max_period: int | None = None
    detect_period: bool = False
    sequence: str | None = None
    d_list: str | None = None
    source: str | None = None
    tail_tol: float | None = None

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunSpec":
        kv = parse_config_text(text)
        sub = kv.pop("subcommand", None)
        if sub is None:
            raise ValueError("run spec text lacks a subcommand")
        spec = cls(subcommand=sub)
        _apply_kv(spec, kv)
        return spec

    def log_line(self) -> str:
        parts = [f"subcommand={self.subcommand}"]
        for f in fields(self):
            if f.name == "subcommand":
                continue
            v = getattr(self, f.name)
            if v is not None:
                parts.append(f"{f.name}={v}")
        return " ".join(parts)


_BOOL_FIELDS = {"detect_period"}
_INT_FIELDS = {
    "d", "max_len", "samples", "seed", "workers", "radius",
    "max_nodes", "max_depth", "divisor", "horizon", "max_period",
}
_FLOAT_FIELDS = {"tail_tol"}


def parse_config_text(text: str) -> dict[str, str]:
    """key = value lines; blank lines and #-comments ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno} is not 'key = value': {raw!r}")
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


_KEY_ALIASES = {"M": "max_len", "m": "divisor"}


def _apply_kv(spec: RunSpec, kv: dict[str, str]) -> None:
    names = {f.name for f in fields(RunSpec)}
    for key, val in kv.items():
        key = _KEY_ALIASES.get(key, key)
        if key not in names:
            raise ValueError(f"unknown config key {key!r}")
        if key in _BOOL_FIELDS:
            setattr(spec, key, val.lower() in ("1", "true", "yes"))
        elif key in _INT_FIELDS:
            setattr(spec, key, int(val))
        elif key in _FLOAT_FIELDS:
            setattr(spec, key, float(val))
        else:
            setattr(spec, key, val)


def _log(stream, **kv) -> None:
    stream.write(" ".join(f"{k}={v}" for k, v in kv.items()) + "\n")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="exseq",
        description="Simulation and exact statistics of sequences with long-range exclusions.",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(p, with_workers=True):
        p.add_argument("--config", help="key = value file; flags take precedence")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        if with_workers:
            p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("sample", help="halt-site histogram from v2.0 runs")
    p.add_argument("--d", type=int)
    p.add_argument("--rule", default=None)
    p.add_argument("--M", type=int, default=None, dest="max_len")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", default=None)
    common(p)

    p = sub.add_parser("terminal-map", help="(i, n) terminal records from v2.1 runs")
    p.add_argument("--d", type=int)
    p.add_argument("--rule", default=None)
    p.add_argument("--M", type=int, default=None, dest="max_len")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", default=None)
    common(p)

    p = sub.add_parser("model", help="exact halting pmf and moments")
    p.add_argument("--d", type=int)
    p.add_argument("--rule", default=None)
    p.add_argument("--tail-tol", type=float, default=None, dest="tail_tol")
    common(p, with_workers=False)

    p = sub.add_parser("search", help="exhaustive one-sided maximal length")
    p.add_argument("--d", type=int)
    p.add_argument("--rule", default=None)
    p.add_argument("--max-nodes", type=int, default=None, dest="max_nodes")
    p.add_argument("--max-depth", type=int, default=None, dest="max_depth")
    common(p)

    p = sub.add_parser("window", help="two-sided window satisfiability")
    p.add_argument("--d", type=int)
    p.add_argument("--rule", default=None)
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--max-nodes", type=int, default=None, dest="max_nodes")
    common(p, with_workers=False)

    p = sub.add_parser("lex", help="deterministic smallest-symbol generation")
    p.add_argument("--d", type=int)
    p.add_argument("--rule", default=None)
    p.add_argument("--M", type=int, default=None, dest="max_len")
    p.add_argument("--detect-period", action="store_true", dest="detect_period")
    p.add_argument("--max-period", type=int, default=None, dest="max_period")
    common(p, with_workers=False)

    p = sub.add_parser("divisibility", help="least n with m | f(n)")
    p.add_argument("--rule", default=None)
    p.add_argument("--m", type=int, default=None, dest="divisor")
    p.add_argument("--horizon", type=int, default=None)
    common(p, with_workers=False)

    p = sub.add_parser("compare", help="empirical histogram vs exact model")
    p.add_argument("--d", type=int)
    p.add_argument("--rule", default=None)
    p.add_argument("--M", type=int, default=None, dest="max_len")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", default=None)
    common(p)

    p = sub.add_parser("scaling", help="log-log exponent fit of moments vs d")
    p.add_argument("--d-list", default=None, dest="d_list", help="e.g. 4,5,6,7 or 4..15")
    p.add_argument("--rule", default=None)
    p.add_argument("--source", choices=("model", "sample"), default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", default=None)
    common(p)

    p = sub.add_parser("validate", help="check a sequence against a rule")
    p.add_argument("--rule", default=None)
    p.add_argument("--seq", default=None, dest="sequence")
    common(p, with_workers=False)

    return ap


def _resolve(args: argparse.Namespace) -> RunSpec:
    spec = RunSpec(subcommand=args.subcommand)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            kv = parse_config_text(fh.read())
        kv.pop("subcommand", None)
        _apply_kv(spec, kv)
    env_workers = os.environ.get(WORKERS_ENV)
    if env_workers and spec.workers == 1:
        spec.workers = int(env_workers)
    for f in fields(RunSpec):
        if not hasattr(args, f.name):
            continue
        v = getattr(args, f.name)
        if f.name == "seed" and isinstance(v, str):
            v = _parse_seed(v)
        if v is None or (f.name == "detect_period" and v is False and spec.detect_period):
            continue
        if f.name == "subcommand":
            continue
        setattr(spec, f.name, v)
    _fill_defaults(spec)
    _check(spec)
    return spec


def _parse_seed(text: str) -> int:
    if text == "random":
        return int.from_bytes(os.urandom(8), "little")
    return int(text, 0)


def _fill_defaults(spec: RunSpec) -> None:
    sc = spec.subcommand
    if sc in ("sample", "terminal-map", "compare"):
        if spec.rule is None:
            spec.rule = "square"
        if spec.seed is None:
            spec.seed = DEFAULT_SEED
        if spec.samples is None:
            spec.samples = 100_000
        if spec.max_len is None and spec.d is not None:
            spec.max_len = stats.default_max_len(spec.d)
    elif sc == "model":
        if spec.rule is None:
            spec.rule = "square"
        if spec.tail_tol is None:
            spec.tail_tol = model.DEFAULT_TAIL_TOL
    elif sc == "search":
        if spec.rule is None:
            spec.rule = "square"
        if spec.max_nodes is None:
            spec.max_nodes = 10**9
        if spec.max_depth is None:
            spec.max_depth = 4096
    elif sc == "window":
        if spec.rule is None:
            spec.rule = "square"
        if spec.max_nodes is None:
            spec.max_nodes = 10**9
        if spec.radius is None:
            spec.radius = 25
    elif sc == "lex":
        if spec.rule is None:
            spec.rule = "square"
        if spec.max_len is None:
            spec.max_len = 1000
        if spec.max_period is None:
            spec.max_period = spec.max_len // 4
    elif sc == "divisibility":
        if spec.horizon is None:
            spec.horizon = 10**6
    elif sc == "scaling":
        if spec.rule is None:
            spec.rule = "square"
        if spec.source is None:
            spec.source = "model"
        if spec.samples is None:
            spec.samples = 100_000
        if spec.seed is None:
            spec.seed = DEFAULT_SEED
        if spec.d_list is None:
            spec.d_list = "4..15"
    if spec.format not in ("csv", "json"):
        raise ValueError(f"unknown output format {spec.format!r}")


def _check(spec: RunSpec) -> None:
    sc = spec.subcommand
    needs_d = sc in ("sample", "terminal-map", "model", "search", "window", "lex", "compare")
    if needs_d:
        if spec.d is None:
            raise ValueError(f"{sc} needs --d")
        if spec.d < 2:
            raise ValueError(f"alphabet size must be >= 2, got {spec.d}")
    if spec.rule is not None:
        jumps.parse_family(spec.rule)  # reject bad names before any work
    if spec.max_len is not None and spec.max_len < 1:
        raise ValueError(f"M must be >= 1, got {spec.max_len}")
    if sc == "divisibility" and (spec.divisor is None or spec.rule is None):
        raise ValueError("divisibility needs --rule and --m")
    if sc == "validate" and (spec.sequence is None or spec.rule is None):
        raise ValueError("validate needs --rule and --seq")


def _parse_d_list(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, _, hi = text.partition("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(p) for p in text.split(",")]


def _emit(spec: RunSpec, body: str, log) -> None:
    """Write the output body and its sidecar; stdout when no --out."""
    if spec.out is None:
        sys.stdout.write(body)
        return
    with open(spec.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(body)
    sidecar = spec.out + ".runspec"
    with open(sidecar, "w", encoding="utf-8", newline="") as fh:
        fh.write(spec.to_text())
    _log(log, wrote=spec.out, sidecar=sidecar)


def _rule_for(spec: RunSpec, horizon: int) -> jumps.JumpRule:
    return jumps.parse_rule(spec.rule, horizon)


def _cmd_sample(spec: RunSpec, log) -> int:
    cfg = GenConfig(
        d=spec.d,
        rule=_rule_for(spec, spec.max_len),
        max_len=spec.max_len,
        seed=spec.seed,
        variant=Variant.V20,
    )
    hist = stats.run_sampling(cfg, spec.samples, spec.workers)
    _log(
        log,
        halted=hist.halted,
        full_length=hist.full_length,
        mean=hist.mean,
        std=hist.std,
        argmax=hist.argmax,
    )
    if spec.format == "csv":
        buf = StringIO()
        stats.write_histogram_csv(hist, buf)
        _emit(spec, buf.getvalue(), log)
    else:
        payload = {
            "runspec": parse_config_text(spec.to_text()),
            "samples": hist.samples,
            "full_length": hist.full_length,
            "mean": hist.mean,
            "std": hist.std,
            "argmax": hist.argmax,
            "counts": {str(j): int(c) for j, c in enumerate(hist.counts) if c},
        }
        _emit(spec, json.dumps(payload, indent=2, sort_keys=True) + "\n", log)
    return EXIT_OK


def _cmd_terminal_map(spec: RunSpec, log) -> int:
    cfg = GenConfig(
        d=spec.d,
        rule=_rule_for(spec, spec.max_len),
        max_len=spec.max_len,
        seed=spec.seed,
        variant=Variant.V21,
    )
    tm = stats.run_terminal_map(cfg, spec.samples, spec.workers)
    fronts = {n: tm.i_min(n) for n in tm.levels()[:8]}
    _log(log, full_length=tm.full_length, max_i=tm.max_i(), staircase=fronts)
    if spec.format == "csv":
        buf = StringIO()
        stats.write_terminal_csv(tm, buf)
        _emit(spec, buf.getvalue(), log)
    else:
        payload = {
            "runspec": parse_config_text(spec.to_text()),
            "samples": tm.samples,
            "full_length": tm.full_length,
            "counts": [
                {"i": i, "n": n, "count": c} for (i, n), c in sorted(tm.counts.items())
            ],
        }
        _emit(spec, json.dumps(payload, indent=2, sort_keys=True) + "\n", log)
    return EXIT_OK


def _cmd_model(spec: RunSpec, log) -> int:
    horizon = 64 * spec.d * spec.d + 4096
    m = model.halting_pmf(spec.d, _rule_for(spec, horizon), tail_tol=spec.tail_tol)
    _log(
        log,
        mean=m.mean,
        std=m.std,
        argmax=m.argmax,
        peak=m.peak,
        last_site=m.last_site,
        tail_mass=m.tail_mass,
    )
    if spec.format == "csv":
        buf = StringIO()
        model.write_model_csv(m, buf)
        _emit(spec, buf.getvalue(), log)
    else:
        buf = StringIO()
        model.dump_model_json(m, buf)
        _emit(spec, buf.getvalue(), log)
    return EXIT_OK


def _cmd_search(spec: RunSpec, log) -> int:
    rule = _rule_for(spec, spec.max_depth)
    report = search.exhaustive_one_sided(
        spec.d,
        rule,
        budget=search.SearchBudget(spec.max_nodes, spec.max_depth),
        workers=spec.workers,
    )
    _log(log, verdict=report.verdict, nodes=report.nodes_explored)
    body = report.summary() + "\n"
    if report.witness:
        body += f"witness={report.witness}\n"
    _emit(spec, body, log)
    return EXIT_INCONCLUSIVE if report.inconclusive else EXIT_OK


def _cmd_window(spec: RunSpec, log) -> int:
    rule = _rule_for(spec, 2 * spec.radius)
    report = search.two_sided_window(
        spec.d, rule, spec.radius, budget=search.SearchBudget(spec.max_nodes, 4096)
    )
    _log(log, verdict=report.verdict, nodes=report.nodes_explored)
    body = report.summary() + "\n"
    _emit(spec, body, log)
    return EXIT_INCONCLUSIVE if report.inconclusive else EXIT_OK


def _cmd_lex(spec: RunSpec, log) -> int:
    cfg = GenConfig(
        d=spec.d,
        rule=_rule_for(spec, spec.max_len),
        max_len=spec.max_len,
        variant=Variant.LEX,
    )
    outcome = genrand.generate_lex(cfg)
    seq_text = genrand.format_symbols(outcome.sequence, spec.d)
    _log(log, status=outcome.status.value, halt_site=outcome.halt_site, length=len(outcome.sequence))
    body = f"status={outcome.status.value}\n"
    if outcome.halt_site is not None:
        body += f"halt_site={outcome.halt_site}\n"
    body += f"sequence={seq_text}\n"
    rc = EXIT_OK
    if spec.detect_period:
        if len(outcome.sequence) < 2 * spec.max_period:
            raise ValueError(
                f"sequence too short ({len(outcome.sequence)}) for --max-period {spec.max_period}"
            )
        rep = search.period_detect(outcome.sequence, spec.max_period)
        _log(log, period_verdict=rep.verdict, period_length=rep.period_length)
        body += rep.summary() + "\n"
    _emit(spec, body, log)
    return rc


def _cmd_divisibility(spec: RunSpec, log) -> int:
    family = jumps.parse_family(spec.rule)
    report = search.divisibility_check(family, spec.divisor, spec.horizon)
    _log(log, verdict=report.verdict)
    _emit(spec, report.summary() + "\n", log)
    return EXIT_INCONCLUSIVE if report.inconclusive else EXIT_OK


def _cmd_compare(spec: RunSpec, log) -> int:
    rule = _rule_for(spec, spec.max_len)
    cfg = GenConfig(
        d=spec.d, rule=rule, max_len=spec.max_len, seed=spec.seed, variant=Variant.V20
    )
    hist = stats.run_sampling(cfg, spec.samples, spec.workers)
    horizon = max(spec.max_len, 64 * spec.d * spec.d + 4096)
    m = model.halting_pmf(spec.d, rule.with_horizon(horizon))
    report = stats.compare(m, hist)
    _log(
        log,
        empirical_mean=report.empirical_mean,
        model_mean=report.model_mean,
        empirical_argmax=report.empirical_argmax,
        model_argmax=report.model_argmax,
        argmax_match=report.argmax_match,
        cdf_dominates=report.model_cdf_dominates_to_peak,
    )
    for i, emp_slope, model_slope in report.interval_slopes:
        _log(log, interval=i, empirical_slope=emp_slope, model_slope=model_slope)
    if spec.format == "csv":
        buf = StringIO()
        stats.write_compare_csv(report, buf)
        _emit(spec, buf.getvalue(), log)
    else:
        payload = {
            "runspec": parse_config_text(spec.to_text()),
            "empirical_mean": report.empirical_mean,
            "empirical_std": report.empirical_std,
            "model_mean": report.model_mean,
            "model_std": report.model_std,
            "argmax_match": report.argmax_match,
            "rows": [
                {"j": int(j), "empirical": float(e), "model": float(mm)}
                for j, e, mm in zip(report.sites, report.empirical, report.model)
            ],
        }
        _emit(spec, json.dumps(payload, indent=2, sort_keys=True) + "\n", log)
    return EXIT_OK


def _cmd_scaling(spec: RunSpec, log) -> int:
    ds = _parse_d_list(spec.d_list)
    family = jumps.parse_family(spec.rule)
    if spec.source == "model":
        rows = stats.model_moment_rows(
            ds, lambda d: jumps.make_rule(family, 64 * d * d + 4096)
        )
    else:
        rows = []
        for d in ds:
            M = stats.default_max_len(d)
            cfg = GenConfig(
                d=d,
                rule=jumps.make_rule(family, M),
                max_len=M,
                seed=spec.seed,
                variant=Variant.V20,
            )
            hist = stats.run_sampling(cfg, spec.samples, spec.workers)
            rows.append((d, hist.mean, hist.std))
    fit = stats.scaling_fit(rows)
    _log(
        log,
        mean_exponent=fit.mean_exponent,
        std_exponent=fit.std_exponent,
        mean_intercept=fit.mean_intercept,
        std_intercept=fit.std_intercept,
    )
    if spec.format == "csv":
        buf = StringIO()
        stats.write_scaling_csv(rows, buf)
        _emit(spec, buf.getvalue(), log)
    else:
        payload = {
            "runspec": parse_config_text(spec.to_text()),
            "rows": [{"d": d, "mean": m, "std": s} for d, m, s in rows],
            "mean_exponent": fit.mean_exponent,
            "std_exponent": fit.std_exponent,
            "mean_residuals": list(fit.mean_residuals),
            "std_residuals": list(fit.std_residuals),
        }
        _emit(spec, json.dumps(payload, indent=2, sort_keys=True) + "\n", log)
    return EXIT_OK


def _cmd_validate(spec: RunSpec, log) -> int:
    seq = genrand.parse_symbols(spec.sequence)
    rule = _rule_for(spec, max(len(seq) - 1, 1))
    ok = genrand.validate(seq, rule)
    _log(log, valid=ok, length=len(seq))
    _emit(spec, ("valid" if ok else "invalid") + "\n", log)
    return EXIT_OK


_DISPATCH = {
    "sample": _cmd_sample,
    "terminal-map": _cmd_terminal_map,
    "model": _cmd_model,
    "search": _cmd_search,
    "window": _cmd_window,
    "lex": _cmd_lex,
    "divisibility": _cmd_divisibility,
    "compare": _cmd_compare,
    "scaling": _cmd_scaling,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    log = sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        spec = _resolve(args)
    except (ValueError, OSError) as exc:
        _log(log, error=str(exc))
        return EXIT_CONFIG
    _log(log, run=spec.log_line())
    try:
        return _DISPATCH[spec.subcommand](spec, log)
    except (ValueError, OSError) as exc:
        _log(log, error=str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
