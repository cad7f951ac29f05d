"""Command-line front end tying the closed forms, asymptotics and Monte Carlo together.

Exit codes: 0 success, 2 usage or parameter error, 3 numerical failure,
4 partial result (a replication cap was hit before the target).
Outputs are deterministic: identical configuration and seed give
byte-identical files. The PARISIAN_SEED environment variable supplies the
seed when --seed is absent (falling back to 0).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import config as config_io
from .asymptotics import (
    classical_ruin_asymptotic,
    fbm_linear_trend_d0,
    parisian_time_normalizer,
    time_gap_normalizer,
)
from .closed_form import bm_parisian_exact, bm_parisian_prefactor, g1_closed_form
from .constants_mc import estimate_generalized_pickands, sweep_generalized_pickands
from .errors import (
    CovarianceError,
    DependencyError,
    OrderingError,
    ParameterError,
)
from .process_sim import path_values_batch
from .risk_model import RiskParams, derived_constants, fbm_local_stationarity
from .ruin_mc import (
    WindowSpec,
    default_horizon,
    estimate_ruin_prob,
    sample_conditional_ruin_times,
)
from .seeds import SeedSpec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4

_RARE_EVENT_RSE = 0.2


def _fmt(x) -> str:
    """17 significant digits, '.' decimal separator, locale-free."""
    return format(float(x), ".17g")


def _json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("PARISIAN_SEED")
    return int(env) if env else 0


def _parse_window(text: str) -> WindowSpec:
    if text.startswith("exp:"):
        return WindowSpec.exponential(float(text[4:]))
    return WindowSpec.deterministic(float(text))


def _merge_config(args, schema):
    """Fill unset CLI options from a --config file validated against `schema`."""
    if not getattr(args, "config", None):
        return
    raw = config_io.load(args.config)
    values = config_io.coerce(raw, schema, where=args.config)
    for key, value in values.items():
        attr = key.replace("-", "_")
        if getattr(args, attr, None) is None:
            setattr(args, attr, value)


def _require(args, names):
    missing = [name for name in names if getattr(args, name.replace("-", "_"), None) is None]
    if missing:
        raise ParameterError(f"missing required options: {', '.join('--' + m for m in missing)}")


def _fbm_setup(args):
    params = RiskParams.fbm(u=args.u, c=args.c, beta=args.beta, hurst=args.H)
    ls = fbm_local_stationarity(params)
    return params, ls, derived_constants(params, ls)


def _injected_constants(args, constants):
    """Resolve (h_alpha, g_alpha) for the asymptotic formulas.

    Exact at alpha = 1; any other alpha needs --halpha/--galpha values,
    normally Monte Carlo estimates from the pickands subcommand.
    """
    alpha = constants.alpha
    if args.alpha is not None and abs(args.alpha - alpha) > 1e-12:
        raise ParameterError(f"the fbm preset implies alpha = 2H = {alpha:g}")
    h_alpha = args.halpha
    g_alpha = args.galpha
    if h_alpha is None:
        if abs(alpha - 1.0) < 1e-12:
            h_alpha = 1.0
        else:
            raise DependencyError("--halpha is required when alpha != 1")
    if g_alpha is None:
        if abs(alpha - 1.0) < 1e-12:
            g_alpha = g1_closed_form(constants.D0 * args.T)
        else:
            raise DependencyError("--galpha is required when alpha != 1")
    return h_alpha, g_alpha


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

_CONSTANTS_SCHEMA = {"H": float, "beta": float, "c": float, "u": float}


def cmd_constants(args):
    _merge_config(args, _CONSTANTS_SCHEMA)
    _require(args, ["H", "beta", "c", "u"])
    params, ls, dc = _fbm_setup(args)
    v = dc.v(params.u) if params.u > 0 else None
    payload = {
        "H": params.hurst,
        "beta": params.beta,
        "c": params.c,
        "u": params.u,
        "t0": dc.t0,
        "A": dc.A,
        "B": dc.B,
        "alpha": dc.alpha,
        "Q": dc.Q,
        "D0": dc.D0,
        "v": v,
        "q": dc.q(v) if v else None,
        "critical_time": dc.critical_time(params.u) if params.u > 0 else None,
        "time_scale": dc.time_scale(params.u) if params.u > 0 else None,
        "provenance": "closed_form",
    }
    return _json(payload), EXIT_OK


_EXACT_SCHEMA = {"u": float, "c": float, "T": float}


def cmd_exact_bm(args):
    _merge_config(args, _EXACT_SCHEMA)
    _require(args, ["u", "c", "T"])
    probability = bm_parisian_exact(args.u, args.c, args.T)
    payload = {
        "u": args.u,
        "c": args.c,
        "T": args.T,
        "probability": probability,
        "prefactor": bm_parisian_prefactor(args.c, args.T),
        "provenance": "closed_form",
    }
    return _json(payload), EXIT_OK


_ASYMPTOTIC_SCHEMA = {
    "H": float, "beta": float, "c": float, "u": float, "T": float,
    "alpha": float, "halpha": float, "galpha": float,
}


def cmd_asymptotic(args):
    _merge_config(args, _ASYMPTOTIC_SCHEMA)
    _require(args, ["H", "beta", "c", "u", "T"])
    params, ls, dc = _fbm_setup(args)
    h_alpha, g_alpha = _injected_constants(args, dc)
    classical = classical_ruin_asymptotic(params, ls, dc, args.u, h_alpha)
    parisian = (g_alpha / h_alpha) * classical
    payload = {
        "H": params.hurst,
        "beta": params.beta,
        "c": params.c,
        "u": params.u,
        "T": args.T,
        "alpha": dc.alpha,
        "h_alpha": h_alpha,
        "g_alpha": g_alpha,
        "classical": classical,
        "parisian": parisian,
        "ratio": g_alpha / h_alpha,
        "provenance": "asymptotic",
    }
    return _json(payload), EXIT_OK


_PICKANDS_SCHEMA = {
    "alpha": float, "T": float, "S": float, "delta": float, "n": int, "seed": int,
}


def cmd_pickands(args):
    _merge_config(args, _PICKANDS_SCHEMA)
    _require(args, ["alpha", "S", "delta", "n"])
    seed = _resolve_seed(args.seed)
    if args.sweep:
        big_ts = [float(part) for part in args.sweep.split(",") if part.strip()]
        estimates = sweep_generalized_pickands(
            args.alpha, big_ts, args.S, args.delta, args.n, seed, jobs=args.jobs
        )
    else:
        big_t = args.T if args.T is not None else 0.0
        estimates = [
            estimate_generalized_pickands(
                args.alpha, big_t, args.S, args.delta, args.n, seed, jobs=args.jobs
            )
        ]
    rows = [
        [
            _fmt(est.alpha), _fmt(est.T), _fmt(est.S), _fmt(est.delta),
            str(est.n), _fmt(est.value), _fmt(est.stderr),
            "true" if est.converged else "false",
        ]
        for est in estimates
    ]
    return _csv(["alpha", "T", "S", "delta", "n", "estimate", "stderr", "converged"], rows), EXIT_OK


_RUIN_SCHEMA = {
    "model": str, "H": float, "beta": float, "c": float, "u": float,
    "window": str, "G": float, "dt": float, "n": int, "seed": int, "which": str,
}


def _check_rare_event(estimate):
    if estimate.p_hat > 0 and estimate.stderr / estimate.p_hat > _RARE_EVENT_RSE:
        print(
            "warning: relative standard error above 20%; this regime is too rare "
            "for plain Monte Carlo at this replication count",
            file=sys.stderr,
        )


def _estimate_payload(estimate):
    return {"p_hat": estimate.p_hat, "stderr": estimate.stderr, "n": estimate.n,
            "config": estimate.config}


def cmd_ruin(args):
    _merge_config(args, _RUIN_SCHEMA)
    _require(args, ["H", "beta", "c", "u", "window", "dt", "n"])
    if args.model not in (None, "fbm"):
        raise ParameterError("only the fbm model is available from the command line")
    params = RiskParams.fbm(u=args.u, c=args.c, beta=args.beta, hurst=args.H)
    window = _parse_window(args.window)
    seed = _resolve_seed(args.seed)
    which = args.which or "parisian"

    if args.dump_path:
        horizon = args.G if args.G is not None else default_horizon(params)
        n_steps = int(round(horizon / args.dt))
        values = path_values_batch(params.model, n_steps, args.dt, SeedSpec(seed), [0])[0]
        times = np.arange(n_steps + 1) * args.dt
        rows = [[_fmt(t), _fmt(x)] for t, x in zip(times, values)]
        with open(args.dump_path, "w", encoding="utf-8") as handle:
            handle.write(_csv(["t", "x"], rows))

    if which == "both" and not args.common_rng:
        # Independent replication blocks: [0, n) for classical, [n, 2n) shifted
        # through a second master stream derived from the seed.
        classical = estimate_ruin_prob(
            params, window, args.G, args.dt, args.n, seed, which="classical", jobs=args.jobs
        )
        parisian = estimate_ruin_prob(
            params, window, args.G, args.dt, args.n, (seed + 1) % 2**64,
            which="parisian", jobs=args.jobs,
        )
        pair = (classical, parisian)
    elif which == "both":
        pair = estimate_ruin_prob(
            params, window, args.G, args.dt, args.n, seed, which="both", jobs=args.jobs
        )
    else:
        estimate = estimate_ruin_prob(
            params, window, args.G, args.dt, args.n, seed, which=which, jobs=args.jobs
        )
        _check_rare_event(estimate)
        return _json(_estimate_payload(estimate)), EXIT_OK

    for estimate in pair:
        _check_rare_event(estimate)
    payload = {
        "classical": _estimate_payload(pair[0]),
        "parisian": _estimate_payload(pair[1]),
        "common_rng": bool(args.common_rng) or which != "both",
    }
    return _json(payload), EXIT_OK


_RUIN_TIMES_SCHEMA = {
    "H": float, "beta": float, "c": float, "u": float, "window": str,
    "G": float, "dt": float, "n-ruined": int, "cap": int, "seed": int,
}


def cmd_ruin_times(args):
    _merge_config(args, _RUIN_TIMES_SCHEMA)
    _require(args, ["H", "beta", "c", "u", "window", "dt", "n_ruined"])
    params = RiskParams.fbm(u=args.u, c=args.c, beta=args.beta, hurst=args.H)
    ls = fbm_local_stationarity(params)
    dc = derived_constants(params, ls)
    window = _parse_window(args.window)
    seed = _resolve_seed(args.seed)
    cap = args.cap if args.cap is not None else 20_000_000
    result = sample_conditional_ruin_times(
        params, window, args.G, args.dt, args.n_ruined, seed,
        max_replications=cap, jobs=args.jobs,
    )
    rows = []
    for i, sample in enumerate(result.samples):
        z = parisian_time_normalizer(params, dc, params.u, sample.tau_star)
        gap = time_gap_normalizer(params, params.u, sample.tau, sample.tau_star)
        rows.append([str(i), _fmt(sample.tau), _fmt(sample.tau_star), _fmt(z), _fmt(gap)])
    text = _csv(["replication", "tau", "tau_star", "normalized_tau_star", "normalized_gap"], rows)
    return text, EXIT_OK if result.complete else EXIT_PARTIAL


_COMPARE_SCHEMA = {
    "H": float, "beta": float, "c": float, "u": float, "T": float,
    "G": float, "dt": float, "n": int, "seed": int,
    "alpha": float, "halpha": float, "galpha": float,
}


def cmd_compare(args):
    _merge_config(args, _COMPARE_SCHEMA)
    _require(args, ["H", "beta", "c", "u", "T", "dt", "n"])
    params, ls, dc = _fbm_setup(args)
    h_alpha, g_alpha = _injected_constants(args, dc)
    classical = classical_ruin_asymptotic(params, ls, dc, args.u, h_alpha)
    asymptotic = (g_alpha / h_alpha) * classical

    exact = None
    if abs(args.H - 0.5) < 1e-12 and abs(args.beta - 1.0) < 1e-12:
        exact = bm_parisian_exact(args.u, args.c, args.T)

    window = WindowSpec.deterministic(args.T)
    seed = _resolve_seed(args.seed)
    estimate = estimate_ruin_prob(
        params, window, args.G, args.dt, args.n, seed, which="parisian", jobs=args.jobs
    )
    _check_rare_event(estimate)

    def blank(x):
        return _fmt(x) if x is not None else ""

    mc = estimate.p_hat
    row = [
        _fmt(args.H), _fmt(args.beta), _fmt(args.c), _fmt(args.u), _fmt(args.T),
        blank(exact), _fmt(asymptotic), _fmt(mc), _fmt(estimate.stderr),
        blank(mc / exact if exact else None),
        blank(mc / asymptotic if asymptotic > 0 else None),
        "closed_form", "asymptotic", "monte_carlo",
    ]
    header = [
        "H", "beta", "c", "u", "T",
        "exact", "asymptotic", "mc", "mc_stderr",
        "mc_over_exact", "mc_over_asymptotic",
        "exact_provenance", "asymptotic_provenance", "mc_provenance",
    ]
    return _csv(header, [row]), EXIT_OK


# ---------------------------------------------------------------------------
# parser and dispatch
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parisruin",
        description="Classical and Parisian ruin for self-similar Gaussian risk processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeded=True):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--output", "-o", help="write the result to this file")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        if seeded:
            p.add_argument("--seed", type=int, help="master seed (default: PARISIAN_SEED or 0)")

    p = sub.add_parser("constants", help="closed-form constants of the variance peak")
    for flag in ("--H", "--beta", "--c", "--u"):
        p.add_argument(flag, type=float)
    common(p, seeded=False)
    p.set_defaults(handler=cmd_constants)

    p = sub.add_parser("exact-bm", help="exact Brownian Parisian ruin probability")
    for flag in ("--u", "--c", "--T"):
        p.add_argument(flag, type=float)
    common(p, seeded=False)
    p.set_defaults(handler=cmd_exact_bm)

    p = sub.add_parser("asymptotic", help="large-reserve ruin approximations")
    for flag in ("--H", "--beta", "--c", "--u", "--T", "--alpha", "--halpha", "--galpha"):
        p.add_argument(flag, type=float)
    common(p, seeded=False)
    p.set_defaults(handler=cmd_asymptotic)

    p = sub.add_parser("pickands", help="Monte Carlo Pickands-type constants")
    p.add_argument("--alpha", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--S", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--sweep", help="comma-separated window lengths sharing draws")
    common(p)
    p.set_defaults(handler=cmd_pickands)

    p = sub.add_parser("ruin", help="Monte Carlo ruin probabilities")
    p.add_argument("--model", choices=["fbm"])
    for flag in ("--H", "--beta", "--c", "--u", "--G", "--dt"):
        p.add_argument(flag, type=float)
    p.add_argument("--window", help="deterministic length, or exp:RATE")
    p.add_argument("--n", type=int)
    p.add_argument("--which", choices=["classical", "parisian", "both"])
    p.add_argument("--common-rng", action="store_true",
                   help="share paths between the classical and parisian scans")
    p.add_argument("--dump-path", help="write the first sampled path as CSV (t,x)")
    common(p)
    p.set_defaults(handler=cmd_ruin)

    p = sub.add_parser("ruin-times", help="conditional Parisian ruin-time samples")
    for flag in ("--H", "--beta", "--c", "--u", "--G", "--dt"):
        p.add_argument(flag, type=float)
    p.add_argument("--window", help="deterministic length, or exp:RATE")
    p.add_argument("--n-ruined", type=int, dest="n_ruined")
    p.add_argument("--cap", type=int, help="replication cap (default 2e7)")
    common(p)
    p.set_defaults(handler=cmd_ruin_times)

    p = sub.add_parser("compare", help="exact / asymptotic / Monte Carlo, one table row")
    for flag in ("--H", "--beta", "--c", "--u", "--T", "--G", "--dt",
                 "--alpha", "--halpha", "--galpha"):
        p.add_argument(flag, type=float)
    p.add_argument("--n", type=int)
    common(p)
    p.set_defaults(handler=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text, code = args.handler(args)
    except (ParameterError, DependencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CovarianceError, OrderingError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
