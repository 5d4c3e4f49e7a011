"""Command-line interface: ``ewens-moments <subcommand> [options]``.

Tabular output is CSV whose first line is ``# config: {...}`` holding the
fully resolved configuration; ``--format json`` emits one JSON document with
a ``config`` key instead.  Floats are written with 17 significant digits.

Exit status: 0 success, 2 usage, 3 validation failure, 4 domain error,
5 resource limit.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import backend
from .core import AdditiveSpec, EwensParams
from .errors import DomainError, EwensError, ValidationError
from .instances import INSTANCE_KINDS, describe_instance
from .moments import (
    exact_factorial_moments,
    upsilon_vector,
    watterson_moment,
)
from .oracle import (
    BRUTE_FORCE_MAX_N,
    brute_force_permutations,
    exact_law,
    exact_tv_short_cycles,
    law_factorial_moment,
    watterson_composed_moment,
)
from .sampler import Method, empirical_factorial_moments, empirical_law, sample
from .spectral import AngleWindow, angle_counts, angle_spec, char_poly_log_abs

EXIT_OK = 0
EXIT_USAGE = 2
# p(30) = 5604 partitions keeps verify interactive
VERIFY_PARTITION_MAX_N = 30


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        x = float(x)
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return "" if x is None else str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (Fraction, np.floating)):
        return float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _dumps(obj) -> str:
    # repr of a Python float is the shortest round-tripping form
    return json.dumps(_jsonable(obj), sort_keys=True)


def parse_theta(text: str):
    text = text.strip()
    try:
        if "/" in text:
            return Fraction(text)
        if text.lstrip("+-").isdigit():
            return int(text)
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid theta {text!r}") from None


def _load_spec(raw: str | None, n: int, default: dict | None = None) -> AdditiveSpec:
    if raw is None:
        if default is None:
            raise ValidationError("spec: --spec is required")
        return AdditiveSpec.from_json(default, n)
    text = raw
    if raw.startswith("@") or (not raw.lstrip().startswith("{") and Path(raw).exists()):
        path = Path(raw[1:] if raw.startswith("@") else raw)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ValidationError(f"spec: cannot read {path}: {exc.strerror}") from exc
    return AdditiveSpec.from_json(text, n)


class Output:
    """Collects one artifact and writes it to --out or stdout."""

    def __init__(self, args, config: dict):
        self.fmt = args.format
        self.path = args.out
        self.config = config
        self.lines: list[str] = []
        self.doc: dict = {"config": config}

    def table(self, name: str, header: list[str], rows: list[list]):
        if self.fmt == "json":
            self.doc[name] = [dict(zip(header, r)) for r in rows]
        else:
            self.lines.append(",".join(header))
            self.lines.extend(",".join(fmt(v) for v in r) for r in rows)

    def summary(self, name: str, obj):
        if self.fmt == "json":
            self.doc[name] = obj
        else:
            self.lines.append(f"# {name}: {_dumps(obj)}")

    def write(self):
        if self.fmt == "json":
            text = json.dumps(_jsonable(self.doc), sort_keys=True, indent=2) + "\n"
        else:
            text = "\n".join([f"# config: {_dumps(self.config)}", *self.lines]) + "\n"
        if self.path:
            Path(self.path).write_text(text)
        else:
            sys.stdout.write(text)


def _base_config(args, params: EwensParams) -> dict:
    return {"command": args.command, "n": params.n, "theta": str(params.theta),
            "seed": args.seed, "backend": backend.BACKEND}


def _params(args) -> EwensParams:
    if args.n is None:
        raise DomainError("--n is required")
    return EwensParams(args.n, args.theta)


# -- subcommands -------------------------------------------------------------

def cmd_sample(args) -> int:
    params = _params(args)
    spec = _load_spec(args.spec, params.n, {"constant": 1})
    cfg = _base_config(args, params) | {"count": args.count, "method": args.method,
                                        "spec": spec.to_json(), "orders": args.orders}
    batch = sample(params, args.count, args.seed, args.method)
    law = empirical_law(batch, spec)
    fm = empirical_factorial_moments(law, args.orders)
    out = Output(args, cfg)
    out.table("histogram", ["value", "count"], sorted(law.counts.items()))
    out.summary("summary", {"total": law.total, "mean": law.mean(),
                            "factorial_moments": list(fm.values),
                            "standard_errors": list(fm.errors)})
    out.write()
    return EXIT_OK


def _single_length(spec: AdditiveSpec):
    if len(spec.weights) == 1:
        (j, a), = spec.weights.items()
        if a == 1:
            return j
    return None


def cmd_moments(args) -> int:
    params = _params(args)
    spec = _load_spec(args.spec, params.n, {"constant": 1})
    m = args.m if args.m is not None else max(1, spec.max_weight)
    cfg = _base_config(args, params) | {"spec": spec.to_json(), "orders": args.orders, "m": m}
    gam = exact_factorial_moments(params, spec, args.orders)
    ups = upsilon_vector(params, spec, args.orders, m) if spec.is_nonnegative else None
    j = _single_length(spec)
    rows = []
    for l in range(1, args.orders + 1):
        w = watterson_moment(params, [(j, l)]) if j is not None else None
        rows.append([l, gam[l], ups[l] if ups is not None else None, w])
    out = Output(args, cfg)
    out.table("moments", ["l", "exact_gamma", f"upsilon_truncated_{m}", "watterson_if_applicable"],
              rows)
    out.write()
    return EXIT_OK


def _rel_close(a, b, rtol=1e-9, atol=1e-12) -> bool:
    return abs(float(a) - float(b)) <= atol + rtol * max(abs(float(a)), abs(float(b)))


def cmd_verify(args) -> int:
    params = _params(args)
    spec = _load_spec(args.spec, params.n, {"constant": 1})
    K = args.orders
    cfg = _base_config(args, params) | {"spec": spec.to_json(), "orders": K,
                                        "count": args.count}
    rows = []

    def check(name, a, b, ok):
        rows.append([name, a, b, abs(float(a) - float(b)), ok])

    exact_ok = params.n <= 12
    gam = exact_factorial_moments(params, spec, K, exact=exact_ok and isinstance(
        params.theta, (int, Fraction)))
    gam_f = exact_factorial_moments(params, spec, K)
    law = exact_law(params, spec) if params.n <= VERIFY_PARTITION_MAX_N else None
    brute = brute_force_permutations(params, spec) if params.n <= BRUTE_FORCE_MAX_N else None
    for k in range(1, K + 1):
        check(f"recurrence_float_vs_rational_k{k}", gam_f[k], gam[k], _rel_close(gam_f[k], gam[k]))
        if law is not None:
            v = law_factorial_moment(law, k)
            check(f"recurrence_vs_partition_oracle_k{k}", gam[k], v,
                  gam[k] == v if not isinstance(v, float) else _rel_close(gam[k], v))
        if brute is not None:
            v = law_factorial_moment(brute, k)
            check(f"recurrence_vs_permutation_oracle_k{k}", gam[k], v,
                  gam[k] == v if not isinstance(v, float) else _rel_close(gam[k], v))
        if len(spec.weights) <= 8 and params.n <= 60:
            v = watterson_composed_moment(params, spec, k)
            check(f"recurrence_vs_watterson_k{k}", gam[k], v, _rel_close(gam[k], v))
    if law is not None and brute is not None:
        check("partition_vs_permutation_law_tv", 0.0, sum(
            abs(float(law.prob(v)) - float(brute.prob(v)))
            for v in set(law.mass_dict()) | set(brute.mass_dict())) / 2,
            law.mass_dict() == brute.mass_dict() or all(
                _rel_close(law.prob(v), brute.prob(v)) for v in law.mass_dict()))
    if args.count:
        batch = sample(params, args.count, args.seed, "crp")
        fm = empirical_factorial_moments(empirical_law(batch, spec), 1)
        se = fm.errors[0]
        check("crp_mean_vs_recurrence_4se", fm[1], gam_f[1],
              abs(fm[1] - gam_f[1]) <= 4 * se + 1e-12)
    out = Output(args, cfg)
    out.table("checks", ["check", "value", "reference", "abs_diff", "pass"], rows)
    failed = [r[0] for r in rows if not r[-1]]
    out.summary("result", {"passed": not failed, "failed": failed})
    out.write()
    if failed:
        print(f"verify: {len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return ValidationError.exit_code
    return EXIT_OK


def cmd_instance(args) -> int:
    params = _params(args)
    rep = describe_instance(args.kind, params, mu=args.mu, p=args.p,
                            gamma=args.gamma, delta=args.delta)
    cfg = _base_config(args, params) | {"kind": args.kind, "mu": args.mu, "p": args.p,
                                        "gamma": args.gamma, "delta": args.delta}
    doc = {"config": cfg, "spec": rep.spec.to_json(), "report": rep.to_json()}
    spec = rep.spec
    if args.kind == "lugo":
        u = upsilon_vector(params, spec, 2, 1)
        doc["finite_n"] = {"upsilon_1": u[1], "upsilon_2": u[2], "gap": u[1] ** 2 - u[2],
                           "predicted_upsilon_1": rep.predicted_moments[0],
                           "predicted_upsilon_2": rep.predicted_moments[1],
                           "predicted_gap": rep.checks["gap"]}
    elif args.kind == "poisson-longcycles":
        u = upsilon_vector(params, spec, 3, 8)
        doc["finite_n"] = {"upsilon_l_8": list(u.values)}
    else:
        g = exact_factorial_moments(params, spec, 3)
        doc["finite_n"] = {"gamma": list(g.values)}
    text = json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_tv(args) -> int:
    params = _params(args)
    cfg = _base_config(args, params) | {"r": args.r, "method": args.method}
    rows = [[r, exact_tv_short_cycles(params, r, method=args.method)] for r in args.r]
    out = Output(args, cfg)
    out.table("tv", ["r", "tv"], rows)
    out.write()
    return EXIT_OK


def cmd_spectral(args) -> int:
    params = _params(args)
    if (args.window is None) == (args.x is None):
        raise DomainError("give exactly one of --window lo:hi or --x")
    cfg = _base_config(args, params) | {"count": args.count, "window": args.window, "x": args.x}
    batch = sample(params, args.count, args.seed, "crp")
    out = Output(args, cfg)
    if args.window is not None:
        win = AngleWindow.parse(args.window)
        counts = angle_counts(batch.lengths, batch.offsets, win, params.n)
        out.table("draws", ["draw", "angle_count"], [[d, c] for d, c in enumerate(counts)])
        g = exact_factorial_moments(params, angle_spec(params.n, win), 1)
        out.summary("summary", {"mean": float(np.mean(counts)), "exact_mean": g[1]})
    else:
        rows = []
        for d in range(batch.count):
            la, sg = char_poly_log_abs(batch.draw(d), args.x)
            rows.append([d, la, sg])
        out.table("draws", ["draw", "log_abs_Z", "sign"], rows)
    out.write()
    return EXIT_OK


def _r_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid r list {text!r}") from None


def _global_options(default) -> argparse.ArgumentParser:
    # separate instances for the main parser and the subcommands: argparse
    # shares action objects with child parsers, so defaults would leak
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--theta", type=parse_theta, default=default(1),
                   help="Ewens parameter (int, float or p/q)")
    g.add_argument("--n", type=int, default=default(None), help="permutation degree")
    g.add_argument("--seed", type=int, default=default(0))
    g.add_argument("--format", choices=("csv", "json"), default=default("csv"))
    g.add_argument("--out", default=default(None), help="output path (default stdout)")
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_options(lambda v: argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="ewens-moments", parents=[_global_options(lambda v: v)],
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("sample", parents=[common], help="Monte Carlo law of h(sigma)")
    p.add_argument("--count", type=int, default=10000)
    p.add_argument("--method", choices=[m.value for m in Method], default="crp")
    p.add_argument("--spec", help="additive spec JSON, @file or path (default: a_j = 1)")
    p.add_argument("--orders", type=int, default=4)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("moments", parents=[common], help="exact and approximate factorial moments")
    p.add_argument("--spec")
    p.add_argument("--orders", type=int, default=4)
    p.add_argument("--m", type=int, help="truncation level (default: max weight)")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("verify", parents=[common], help="oracle vs recurrence vs sampler")
    p.add_argument("--spec")
    p.add_argument("--orders", type=int, default=4)
    p.add_argument("--count", type=int, default=20000, help="CRP draws (0 to skip)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("instance", parents=[common], help="limit-law instance constructions")
    p.add_argument("--kind", choices=INSTANCE_KINDS, required=True)
    p.add_argument("--mu", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--gamma", type=str)
    p.add_argument("--delta", type=str)
    p.set_defaults(func=cmd_instance)

    p = sub.add_parser("tv", parents=[common], help="TV of short cycle counts vs Poisson")
    p.add_argument("--r", type=_r_list, required=True, help="comma-separated r values")
    p.add_argument("--method", choices=("aggregate", "enumerate"), default="aggregate")
    p.set_defaults(func=cmd_tv)

    p = sub.add_parser("spectral", parents=[common], help="permutation-matrix statistics")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--window", help="angle window lo:hi in turns, e.g. 0:1/10")
    p.add_argument("--x", type=float, help="evaluate log|Z_n(x)| per draw")
    p.set_defaults(func=cmd_spectral)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EwensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
