"""Command-line interface: ``leechannel <command> [flags]``.

Exit codes: 0 success, 1 invalid input, 2 internal invariant failure,
3 verification-suite failure. ``LEECHANNEL_CACHE_DIR`` overrides where
partition distributions are cached.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .channel import CLOSED_FORM, CONVENTIONS, ELEMENTWISE, boltzmann_marginal, solve_beta
from .counting import PartitionDistribution, build_partition_distribution, count_sphere
from .errors import DomainError, InvariantError
from .lee_core import Modulus
from .sampler import GENERATOR_NAME, SamplerState, choose_method, make_sampler
from .scalar_mult import delta_star, monte_carlo_reduction_probability, reduction_bound_decomposition

EXIT_OK, EXIT_DOMAIN, EXIT_INVARIANT, EXIT_VERIFY = 0, 1, 2, 3
CACHE_ENV = "LEECHANNEL_CACHE_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


def manifest(command: str, params: dict, seed=None) -> dict:
    return {
        "command": command,
        "parameters": params,
        "seed": seed,
        "generator": GENERATOR_NAME if seed is not None else None,
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _manifest_comment(man: dict) -> str:
    # timestamp goes on its own line so outputs can be compared byte-for-byte
    body = {k: v for k, v in man.items() if k != "timestamp"}
    return f"# manifest: {json.dumps(body, sort_keys=True)}\n# timestamp: {man['timestamp']}\n"


def _resolve_t(args) -> int:
    if args.delta is not None:
        if not math.isfinite(args.delta) or args.delta < 0:
            raise DomainError(f"delta must be a nonnegative number, got {args.delta}")
        return int(math.floor(args.delta * args.n + 0.5))
    return args.t


def _sphere_params(args, allow_zero=False) -> tuple[int, Modulus, int]:
    if args.n < 1:
        raise DomainError(f"n must be >= 1, got {args.n}")
    mod = Modulus(args.m)
    t = _resolve_t(args)
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t > args.n * mod.r:
        raise DomainError(f"t > n*r: t={t} exceeds n*r = {args.n}*{mod.r} = {args.n * mod.r}")
    if t == 0 and not allow_zero:
        raise DomainError("t must be positive: the weight-0 sphere is just the zero vector")
    return args.n, mod, t


def cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "leechannel")


def cached_distribution(n: int, mod: Modulus, t: int, use_cache: bool = True) -> PartitionDistribution:
    """Partition distribution for ``(n, m, t)``, reusing the on-disk copy if current."""
    path = cache_dir() / f"partdist-v{__version__}-n{n}-m{mod.m}-t{t}.json"
    if use_cache and path.exists():
        try:
            record = json.loads(path.read_text())
            if record.get("tool_version") == __version__:
                dist = PartitionDistribution.from_record(record)
                if (dist.n, dist.m, dist.t) == (n, mod.m, t):
                    return dist
        except (ValueError, KeyError, OSError):
            pass
    dist = build_partition_distribution(n, mod, t)
    if use_cache:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(dist.dumps())
            tmp.replace(path)
        except OSError:
            pass
    return dist


def _open_out(path):
    return open(path, "w", newline="") if path else None


def cmd_sample(args) -> int:
    n, mod, t = _sphere_params(args)
    if args.count < 0:
        raise DomainError("count must be >= 0")
    method = choose_method(n, mod, t) if args.method == "auto" else args.method
    if method == "table":
        state = SamplerState(cached_distribution(n, mod, t, not args.no_cache), args.seed)
    else:
        state = make_sampler(n, mod, t, args.seed, method=method)
    wt = mod.weight_table()
    rows = []
    for _ in range(args.count):
        e = state.sample_entries()
        if int(wt[e].sum()) != t or e.size != n:
            raise InvariantError("sampled vector violates the weight/length postcondition")
        rows.append([int(v) for v in e])
    man = manifest("sample", {"n": n, "m": mod.m, "t": t, "count": args.count, "method": method}, args.seed)
    buf = io.StringIO()
    if args.format == "json":
        json.dump({"manifest": man, "vectors": rows}, buf)
        buf.write("\n")
    else:
        buf.write(f"# n={n} m={mod.m} t={t} seed={args.seed} generator={GENERATOR_NAME}\n")
        buf.write(_manifest_comment(man))
        for row in rows:
            buf.write(",".join(map(str, row)) + "\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_count(args) -> int:
    n, mod, t = _sphere_params(args, allow_zero=True)
    if not args.per_partition:
        print(count_sphere(n, mod, t))
        return EXIT_OK
    print(f"# n={n} m={mod.m} t={t}")
    print("partition,count,probability")
    if t == 0:
        print("(),1,1")
        return EXIT_OK
    dist = cached_distribution(n, mod, t, not args.no_cache)
    for (lam, prob), count in zip(dist.entries, dist.counts):
        label = "(" + ",".join(map(str, lam.parts)) + ")"
        print(f"\"{label}\",{count},{prob}")
    print(f"# total={dist.total_count}")
    return EXIT_OK


def cmd_marginal(args) -> int:
    mod = Modulus(args.m)
    beta = solve_beta(mod, args.delta, args.convention)
    marg = boltzmann_marginal(mod, beta)
    wt = mod.weight_table()
    print(f"# m={mod.m} delta={args.delta!r} beta={beta!r} convention={args.convention} mean_lee_weight={marg.delta!r}")
    print("element,lee_weight,probability")
    for e, p in enumerate(marg.probabilities):
        print(f"{e},{wt[e]},{p!r}")
    return EXIT_OK


def cmd_threshold(args) -> int:
    ms = args.m or []
    for m in ms:
        if m <= 3:
            raise DomainError(f"m={m}: thresholds are defined for m > 3 only (Lee and Hamming weights coincide for m <= 3)")
    results = [delta_star(m, args.tol, args.convention) for m in ms]
    header = ("m", "r", "delta_star", "critical_a", "beta_at_threshold")
    rows = [
        (str(res.modulus.m), str(res.modulus.r), f"{res.delta_star:.10g}", str(res.critical_a), f"{res.beta_at_threshold:.10g}")
        for res in results
    ]
    if args.format == "csv":
        print(f"# convention={args.convention} tol={args.tol!r}")
        print(",".join(header))
        for row in rows:
            print(",".join(row))
    else:
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
        print(f"# convention={args.convention} tol={args.tol!r}")
        print("  ".join(h.rjust(w) for h, w in zip(header, widths)))
        for row in rows:
            print("  ".join(c.rjust(w) for c, w in zip(row, widths)))
    return EXIT_OK


def cmd_scalar_sim(args) -> int:
    n, mod, t = _sphere_params(args)
    if mod.m <= 3:
        raise DomainError("scalar-multiplication analysis needs m > 3")
    if args.trials < 1:
        raise DomainError("trials must be >= 1")
    params = {"n": n, "m": mod.m, "t": t, "trials": args.trials, "epsilon": args.epsilon}
    if args.epsilon is not None:
        dec = reduction_bound_decomposition(n, mod, t, args.epsilon, args.trials, args.seed, args.jobs)
        est = dec.unconditional
        decomposition = {
            "epsilon": dec.epsilon,
            "term1_conditional": dec.term1,
            "term1_defined": dec.term1 is not None,
            "term2_divergence_tail": dec.term2,
            "close_trials": dec.close_trials,
        }
    else:
        est = monte_carlo_reduction_probability(n, mod, t, args.trials, args.seed, args.jobs)
        decomposition = None
    report = {
        "estimate": est.estimate,
        "successes": est.successes,
        "trials": est.trials,
        "confidence_interval": list(est.confidence_interval),
        "confidence_level": 0.95,
        "per_scalar": {str(a): {"trials": k, "reductions": s} for a, (k, s) in est.per_scalar.items()},
        "decomposition": decomposition,
        "manifest": manifest("scalar-sim", params, args.seed),
    }
    print(json.dumps(report, indent=1))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_all

    results = run_all(budget=args.budget, seed=args.seed)
    failed = False
    for res in results:
        print(res.line())
        failed |= res.status == "FAIL"
    print("verification " + ("FAILED" if failed else "passed"))
    return EXIT_VERIFY if failed else EXIT_OK


def _add_sphere_flags(p, t_required=True):
    p.add_argument("--m", type=int, required=True, help="ring order m >= 2")
    p.add_argument("--n", type=int, required=True, help="vector length")
    g = p.add_mutually_exclusive_group(required=t_required)
    g.add_argument("--t", type=int, help="Lee weight")
    g.add_argument("--delta", type=float, help="normalised weight; t = round(delta * n)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="leechannel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"leechannel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw vectors uniformly from the Lee sphere")
    _add_sphere_flags(p)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--method", choices=("auto", "table", "tree"), default="auto")
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("count", help="sphere size, optionally per weight decomposition")
    _add_sphere_flags(p)
    p.add_argument("--per-partition", action="store_true")
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("marginal", help="maximum-entropy marginal for a normalised weight")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--convention", choices=CONVENTIONS, default=ELEMENTWISE)
    p.set_defaults(func=cmd_marginal)

    p = sub.add_parser("threshold", help="delta* table (largest delta with no weight-reducing scalar)")
    p.add_argument("--m", type=int, action="append", required=True)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--convention", choices=CONVENTIONS, default=CLOSED_FORM)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("scalar-sim", help="Monte Carlo estimate of P(w_L(a x) < t)")
    _add_sphere_flags(p)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_scalar_sim)

    p = sub.add_parser("verify", help="run the oracle-equivalence and uniformity suites")
    p.add_argument("--budget", type=int, default=10**6, help="largest m**n to enumerate")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_DOMAIN
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"leechannel {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except InvariantError as exc:
        print(f"leechannel {args.command}: internal invariant failed: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
