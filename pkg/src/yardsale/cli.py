"""Command-line entry points.

Exit codes: 0 success, 1 runtime failure, 2 configuration error or an
unsupported request, 3 a statistical check failed.  Diagnostics go to stderr;
data goes to files (and to stdout only with ``--stdout``).
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments as ex
from . import output
from .config import load_run
from .errors import ConfigError, UnsupportedClaimError, YardSaleError

log = logging.getLogger("yardsale")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_CHECK = 0, 1, 2, 3


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="yardsale", description="Yard-sale wealth exchange simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, trajectories=100):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.add_argument("--out", help="override the output path prefix")
        sp.add_argument("--stdout", action="store_true", help="also print the data to stdout")
        sp.add_argument("-v", "--verbose", action="store_true")
        if trajectories:
            sp.add_argument("--trajectories", type=int, default=trajectories)
            sp.add_argument("--threads", type=int, help="worker threads (default $YARDSALE_THREADS or all cores)")
        return sp

    add("simulate", "run one trajectory and write its CSV", trajectories=0)
    add("ensemble", "run an ensemble and write a summary")
    sp = add("verify-increment", "check the one-step growth bound of E||X||^2", trajectories=10000)
    sp.add_argument("--steps", type=int, default=1000)
    sp = add("verify-summability", "check E sum w_n^2 <= (1 - ||X_0||^2)/2", trajectories=10000)
    sp.add_argument("--horizon", type=int, help="number of steps (default: max_steps)")
    add("win-prob", "estimate win probabilities and compare with initial shares", trajectories=10000)
    sp = add("condense-times", "condensation time study over a parameter grid")
    sp.add_argument("--n-agents", type=_ints, help="comma-separated N values")
    sp.add_argument("--p", type=_floats, help="comma-separated p values")
    sp.add_argument("--beta", type=_floats, help="comma-separated constant fractions")
    sp.add_argument("--epsilon", type=_floats, help="comma-separated condensation epsilons")
    return parser


def _emit(args, path, text):
    output.write_text(path, text)
    log.info("wrote %s", path)
    if args.stdout:
        sys.stdout.write(text)


def _run(args) -> int:
    spec = load_run(args.config)
    config = spec.config
    if args.seed is not None:
        config = config.with_key(args.seed, 0)
    seed = config.key.master_seed
    out = args.out or spec.out
    threads = getattr(args, "threads", None)

    if args.command == "simulate":
        rec = ex.run_trajectory(config)
        log.info("stopped after %d steps (%s)", rec.steps_run, rec.stop_reason)
        _emit(args, f"{out}.trajectory.csv", output.trajectory_csv(rec.snapshots))
        return EXIT_OK

    if args.command == "ensemble":
        summary = ex.run_ensemble(config, args.trajectories, seed, threads)
        _emit(args, f"{out}.summary.json", output.json_text(output.summary_document(summary)))
        return EXIT_OK

    if args.command == "win-prob":
        if config.params.delta != 0.0:
            raise UnsupportedClaimError(
                f"win probabilities are only predicted for p = 0.5 (got p = {config.params.p})")
        summary = ex.run_ensemble(config, args.trajectories, seed, threads)
        estimates = ex.estimate_win_probabilities(summary)
        doc = output.win_document(summary, estimates)
        _emit(args, f"{out}.winprob.json", output.json_text(doc))
        for e in estimates:
            log.info("agent %d: %.4f in [%.4f, %.4f], initial share %.4f", e.agent, e.estimate, e.lo, e.hi, e.initial_share)
        return EXIT_OK if doc["passed"] else EXIT_CHECK

    if args.command == "verify-increment":
        rep = ex.verify_increment_bound(config, args.steps, args.trajectories, seed, threads)
        _emit(args, f"{out}.increment.json", output.json_text(output.increment_document(rep, config, seed)))
        log.info("pooled residual z = %.3f, pooled gap z = %.3f", rep.pooled_resid_z, rep.pooled_gap_z)
        return EXIT_OK if rep.passed else EXIT_CHECK

    if args.command == "verify-summability":
        horizon = args.horizon or config.max_steps
        rep = ex.verify_stake_summability(config, horizon, args.trajectories, seed, threads)
        _emit(args, f"{out}.summability.json", output.json_text(output.summability_document(rep, config, seed)))
        log.info("mean sum w^2 = %.6g (bound %.6g + %.3g)", rep.stake_sq.mean, rep.bound, rep.margin)
        return EXIT_OK if rep.passed else EXIT_CHECK

    if args.command == "condense-times":
        p = config.params
        eps = config.condensation_epsilon or ex.DEFAULT_EPSILON
        beta = getattr(p.fraction_dist, "beta", None)
        if args.beta is None and beta is None:
            raise ConfigError("condense-times needs a constant fraction or --beta")
        grid = [ex.GridPoint(n, pv - 0.5, b, e)
                for n in (args.n_agents or [p.n_agents])
                for pv in (args.p or [p.p])
                for b in (args.beta or [beta])
                for e in (args.epsilon or [eps])]
        for pt in grid:
            if not 0.5 <= pt.delta + 0.5 < 1.0 or not 0.0 < pt.beta < 1.0 or not 0.0 < pt.epsilon < 1.0 or pt.n_agents < 2:
                raise ConfigError(f"invalid grid point {pt}")
        rows = ex.condensation_time_study(config, grid, args.trajectories, seed, threads)
        for note in ex.monotonicity_notes(rows):
            log.warning(note)
        _emit(args, f"{out}.condense.csv", output.condensation_csv(rows))
        return EXIT_OK

    raise AssertionError(args.command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except (ConfigError, UnsupportedClaimError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (YardSaleError, OSError, MemoryError) as exc:
        log.error("%s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
