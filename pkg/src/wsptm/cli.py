"""
Command-line interface.

Every command reads a :class:`~wsptm.config.RunConfig` from an optional
``--config`` file of ``key = value`` lines; any config key can also be given
as a flag (``--max-iter 50``), and flags win.

Exit codes: 0 success, 1 internal error, 2 input error, 3 checkpoint error.
"""
import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from wsptm.checkpoint import check_vocabulary, load_checkpoint, save_checkpoint
from wsptm.config import RunConfig
from wsptm.evaluation import coverage_stats
from wsptm.exceptions import CheckpointError, InputError
from wsptm.pipeline import AXES, ablate, default_grid, evaluate, load_inputs, sweep_csv, train
from wsptm.priors import build_supervision

logger = logging.getLogger("wsptm")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_CHECKPOINT = 0, 1, 2, 3


def _add_config_flags(parser):
    parser.add_argument("--config", help="key = value config file")
    group = parser.add_argument_group("config overrides")
    for f in fields(RunConfig):
        group.add_argument("--" + f.name.replace("_", "-"), dest="cfg_" + f.name, metavar="VALUE")


def _run_config(args, **extra):
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None}
    overrides.update({k: v for k, v in extra.items() if v is not None})
    if args.config:
        return RunConfig.from_file(args.config, overrides)
    return RunConfig.from_dict(overrides)


def _output_dir(config):
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_train(args):
    config = _run_config(args)
    corpus, seeds = load_inputs(config)
    logger.info("corpus: D=%d V=%d K=%d", corpus.D, corpus.V, corpus.K)
    model = train(corpus, seeds, config)
    out = _output_dir(config)
    save_checkpoint(out / "checkpoint.npz", model.state, config.to_dict(), corpus.vocabulary.digest(),
                    model.supervision.prior.alpha_prime)
    (out / "trace.csv").write_text(model.result.trace_csv())
    (out / "config.txt").write_text(config.dumps())
    print(f"wrote {out / 'checkpoint.npz'} ({len(model.result.trace) - 1} iterations)")
    return EXIT_OK


def cmd_eval(args):
    meta, state, _ = load_checkpoint(args.checkpoint)
    saved = dict(meta["config"])
    flags = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None}
    config = RunConfig.from_dict({**saved, **flags})
    corpus, seeds = load_inputs(config)
    check_vocabulary(meta, corpus.vocabulary)
    if state.theta.shape[0] != corpus.D:
        raise CheckpointError("checkpoint covers a different number of documents")
    sup = build_supervision(corpus, seeds, config.prior_config(), baseline=config.baseline)
    report = evaluate(state, corpus, sup.prior.alpha_prime, config)
    text = report.to_json()
    (_output_dir(config) / "report.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def parse_grid(text, axis):
    """``a..b`` (inclusive integer range), ``start:stop:step`` or a comma list."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            grid = list(range(lo, hi + 1))
        elif ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            grid = [round(start + i * step, 10) for i in range(n)]
        else:
            items = [x.strip() for x in text.split(",") if x.strip()]
            grid = items if axis == "components" else [float(x) if axis != "P" else int(x) for x in items]
    except ValueError:
        raise InputError(f"bad grid {text!r}") from None
    if not grid:
        raise InputError("empty grid")
    return grid


def cmd_ablate(args):
    config = _run_config(args)
    grid = default_grid(args.axis) if args.grid is None else parse_grid(args.grid, args.axis)
    corpus, seeds = load_inputs(config)
    rows = ablate(corpus, seeds, config, args.axis, grid)
    text = sweep_csv(args.axis, rows)
    (_output_dir(config) / f"sweep_{args.axis}.csv").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_stats(args):
    config = _run_config(args)
    corpus, seeds = load_inputs(config)
    out = {}
    for P in sorted({0, config.P}):
        cfg = config.replace(P=P, tau=config.tau if P else 0.0)
        sup = build_supervision(corpus, seeds, cfg.prior_config())
        stats = coverage_stats(sup.DF, sup.prior.omega, corpus.gold())
        out[f"P={P}"] = stats
    sys.stdout.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_dump_priors(args):
    config = _run_config(args)
    corpus, seeds = load_inputs(config)
    sup = build_supervision(corpus, seeds, config.prior_config(), baseline=config.baseline)
    prior = sup.prior
    path = _output_dir(config) / "priors.jsonl"
    with open(path, "w", encoding="utf-8") as f:
        for d in range(corpus.D):
            row = {"doc": d, "alpha_prime": prior.alpha_prime[d].tolist()}
            if prior.M is not None:
                row["M"] = prior.M[d].tolist()
                row["F"] = prior.F.tolist()
                row["omega"] = prior.omega[d].tolist()
            f.write(json.dumps(row) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="wsptm", description="Seed-word supervised topic model classifier.")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model and write checkpoint, trace and config")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint on the labeled test documents")
    p.add_argument("checkpoint")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="sweep one parameter or prior component")
    p.add_argument("--axis", required=True, choices=AXES)
    p.add_argument("--grid", help="a..b, start:stop:step or comma list")
    _add_config_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("stats", help="seed coverage with and without pseudo-neighbors")
    _add_config_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("dump-priors", help="write per-document priors as JSON lines")
    _add_config_flags(p)
    p.set_defaults(func=cmd_dump_priors)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CheckpointError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHECKPOINT
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:  # noqa: BLE001
        logger.exception("internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
