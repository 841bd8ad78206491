"""Command line entry point.

Exit codes: 0 success, 2 invalid input (error JSON on stderr), 1 internal error.
``QP_SEED`` in the environment overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .brownian import BrownianSpec, expected_tau_positive, quantile_law
from .errors import ValidationError
from .experiments import RUNS, SCHEMA_VERSION, ExperimentConfig, run
from .generators import CompoundPoissonSpec, IncrementLaw, RngConfig, WalkSpec, gen_bm_grid, gen_compound_poisson, gen_walk
from .hitting import hitting_time
from .paths import load_path, running_inf, running_sup
from .quantile import quantile
from .skorokhod import SearchParams, j1_distance


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps({"schema_version": SCHEMA_VERSION, **obj}, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _seed(args) -> int:
    env = os.environ.get("QP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError("QP_SEED must be an integer") from None
    return args.seed


def _cmd_gen(args) -> dict:
    rng = RngConfig(_seed(args), args.stream)
    if args.kind == "walk":
        p = gen_walk(WalkSpec(args.n, T=args.t, increment_law=IncrementLaw(args.law)), rng)
    elif args.kind == "bm":
        p = gen_bm_grid(WalkSpec(args.n, T=args.t, increment_law=IncrementLaw.GAUSSIAN), rng)
    else:
        p = gen_compound_poisson(CompoundPoissonSpec(args.rate, args.t), rng)
    return p.to_dict()


def _cmd_quantile(args) -> dict:
    p = load_path(args.path_file)
    r = quantile(p, args.t, args.alpha)
    return {
        "alpha": r.alpha,
        "value": r.value,
        "flat": r.flat,
        "bounds": [running_inf(p, args.t), running_sup(p, args.t)],
    }


def _cmd_tau(args) -> dict:
    h = hitting_time(load_path(args.path_file), args.t, args.alpha)
    return h.to_dict()


def _cmd_j1(args) -> dict:
    a, b = load_path(args.a), load_path(args.b)
    d = j1_distance(a, b, args.n_max, SearchParams(beam=args.beam))
    return {"delta": d.delta, "per_N": d.per_N.tolist(), "uniform_per_N": d.uniform_per_N.tolist()}


def _cmd_law(args) -> dict:
    if args.tau_mean is not None:
        return {"beta": args.tau_mean, "tau_mean_positive": expected_tau_positive(args.tau_mean)}
    law = quantile_law(BrownianSpec.scalar(args.sigma, args.t), args.alpha)
    out = {"alpha": law.alpha, "sigma": law.sigma_eff, "t": law.T, "mean": law.mean}
    if args.cdf_at is not None:
        out["cdf"] = law.cdf(args.cdf_at)
        out["pdf"] = law.pdf(args.cdf_at)
        out["m"] = args.cdf_at
    return out


def _cmd_experiment(args) -> dict | None:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if os.environ.get("QP_SEED") is not None or args.seed_given:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "seed": _seed(args)})
    report = run(args.kind, cfg, workers=args.threads)
    text = report.to_json(timestamp=not args.no_timestamp)
    out = args.out or cfg.output
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    return None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", default=None)
    common.add_argument("--no-timestamp", action="store_true")

    p = _Parser(prog="hyperquantile", description="Hyperplane quantiles of cadlag paths.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="simulate a path to JSON")
    g.add_argument("--kind", choices=["walk", "bm", "cpp"], required=True)
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--t", type=float, default=1.0)
    g.add_argument("--law", choices=[x.value for x in IncrementLaw], default="rademacher")
    g.add_argument("--rate", type=float, default=1.0)
    g.add_argument("--stream", type=int, default=0)
    g.set_defaults(fn=_cmd_gen)

    for name, fn in (("quantile", _cmd_quantile), ("tau", _cmd_tau)):
        q = sub.add_parser(name, parents=[common])
        q.add_argument("--path-file", required=True)
        q.add_argument("--t", type=float, required=True)
        q.add_argument("--alpha", type=float, required=True)
        q.set_defaults(fn=fn)

    j = sub.add_parser("j1", parents=[common], help="J1 distance upper bound")
    j.add_argument("--a", required=True)
    j.add_argument("--b", required=True)
    j.add_argument("--n-max", type=int, default=2)
    j.add_argument("--beam", type=int, default=64)
    j.set_defaults(fn=_cmd_j1)

    law = sub.add_parser("law", parents=[common], help="Brownian reference law")
    law.add_argument("--alpha", type=float, default=0.5)
    law.add_argument("--sigma", type=float, default=1.0)
    law.add_argument("--t", type=float, default=1.0)
    mode = law.add_mutually_exclusive_group()
    mode.add_argument("--cdf-at", type=float, default=None)
    mode.add_argument("--mean", action="store_true")
    mode.add_argument("--tau-mean", type=float, default=None, metavar="BETA")
    law.set_defaults(fn=_cmd_law)

    e = sub.add_parser("experiment", parents=[common], help="run a Monte Carlo experiment")
    e.add_argument("--kind", choices=sorted(RUNS), required=True)
    e.add_argument("--config", default=None)
    e.add_argument("--csv", default=None)
    e.set_defaults(fn=_cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("HYPERQUANTILE_LOG", "WARNING"))
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ValidationError("--threads must be >= 1")
        args.seed_given = args.seed is not None
        if args.seed is None:
            args.seed = 0
        out = args.fn(args)
        if out is not None:
            _emit(out, args.out)
        return 0
    except ValidationError as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "type": "validation"}) + "\n")
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(json.dumps({"error": f"{type(exc).__name__}: {exc}", "type": "internal"}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
