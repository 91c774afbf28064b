"""Command-line workbench.

Subcommands: encode, decode, requantize, region, invariance-check,
experiment. Bitstreams travel as JSON on stdout/stdin. Exit codes: 0 on
success, 1 when a checked property is violated, 2 on usage or domain
errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import baselines, decoders, gre, polynacci, workbench
from .framework import BitStream
from .quantizers import (
    AlwaysOne,
    AlwaysZero,
    QuantizerSpec,
    RandomUniformThreshold,
)

_RESOLVERS = {
    "zero": lambda seed: AlwaysZero(),
    "one": lambda seed: AlwaysOne(),
    "random": lambda seed: RandomUniformThreshold(seed=seed),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goldenadc",
        description="Golden-ratio and baseline A/D encoder workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode one input, emit bitstream JSON")
    enc.add_argument("--scheme", required=True, choices=["gre", "pcm", "beta", "sd1", "poly"])
    enc.add_argument("--x", type=float, required=True)
    enc.add_argument("--bits", type=int, required=True)
    enc.add_argument("--alpha", type=float, default=1.0)
    enc.add_argument("--nu1", type=float)
    enc.add_argument("--nu2", type=float)
    enc.add_argument("--beta", type=float)
    enc.add_argument("--tau", type=float)
    enc.add_argument("--L", type=int, default=3)
    enc.add_argument("--resolver", choices=sorted(_RESOLVERS), default="random")
    enc.add_argument("--seed", type=int, default=0)
    enc.add_argument("--noise-amp", type=float, default=0.0)

    dec = sub.add_parser("decode", help="decode bitstream JSON from stdin")
    dec.add_argument("--beta", type=float, required=True)
    dec.add_argument("--bias-correct", action="store_true")

    req = sub.add_parser("requantize", help="fixed-point binary output for a stream on stdin")
    req.add_argument("--B", type=int, default=64)

    reg = sub.add_parser("region", help="admissible gain/threshold region as JSON")
    reg.add_argument("--mu", type=float, required=True)
    reg.add_argument("--alpha", type=float)

    inv = sub.add_parser("invariance-check", help="grid check of the invariant rectangle")
    inv.add_argument("--mu", type=float, required=True)
    inv.add_argument("--alpha", type=float, required=True)
    inv.add_argument("--nu1", type=float, required=True)
    inv.add_argument("--nu2", type=float, required=True)
    inv.add_argument("--grid", type=int, default=1000)

    exp = sub.add_parser("experiment", help="run a Monte Carlo experiment, write a table")
    exp.add_argument("kind", choices=["escape", "rmse", "variance", "bias", "sweep"])
    exp.add_argument("--trials", type=int, default=10000)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--out", required=True, help="output path ending in .csv or .json")
    exp.add_argument("--delta", type=float, default=0.05)
    exp.add_argument("--n-max", type=int, default=60)
    exp.add_argument("--n", type=int, default=40)
    exp.add_argument("--alpha", type=float, default=1.5)
    exp.add_argument("--nu1", type=float, default=1.2)
    exp.add_argument("--nu2", type=float, default=1.3)
    exp.add_argument("--noise-amp", type=float, default=2.0**-6)
    exp.add_argument("--sigma", type=float, default=2.0**-6 / np.sqrt(3.0))
    exp.add_argument("--mu", type=float, default=0.01)
    exp.add_argument("--alpha-grid", default="1.0,1.5,2.0")
    exp.add_argument("--nu-grid", default="1.0,1.1,1.2,1.3")
    exp.add_argument("--bits", type=int, default=48)
    return parser


def _band(args, default):
    nu1 = args.nu1 if args.nu1 is not None else (args.tau if args.tau is not None else default)
    nu2 = args.nu2 if args.nu2 is not None else (args.tau if args.tau is not None else default)
    return nu1, nu2


def _cmd_encode(args) -> int:
    if args.scheme == "gre":
        nu1, nu2 = _band(args, 1.0)
        resolver = _RESOLVERS[args.resolver](args.seed) if nu1 < nu2 else None
        spec = QuantizerSpec(alpha=args.alpha, nu1=nu1, nu2=nu2, resolver=resolver)
        noise = gre.UniformAdditive(args.noise_amp, seed=args.seed) if args.noise_amp else None
        stream, _ = gre.gre_encode(args.x, args.bits, spec, noise=noise)
    elif args.scheme == "pcm":
        stream = baselines.pcm_encode(args.x, args.bits, args.tau if args.tau is not None else 1.0)
    elif args.scheme == "beta":
        if args.beta is None:
            raise ValueError("--beta is required for the beta scheme")
        nu1, nu2 = _band(args, 1.0)
        resolver = _RESOLVERS[args.resolver](args.seed) if nu1 < nu2 else None
        spec = baselines.BetaSpec(args.beta, nu1, nu2, resolver=resolver)
        stream = baselines.beta_encode(args.x, args.bits, spec)
    elif args.scheme == "sd1":
        stream = baselines.sd1_encode(args.x, args.bits)
    else:  # poly
        cfg = polynacci.PolynacciConfig(
            L=args.L, threshold=args.tau if args.tau is not None else 1.0
        )
        stream, _, report = polynacci.polynacci_encode(args.x, args.bits, cfg)
        stream.params["stable"] = not report.escaped
    print(stream.to_json())
    return 0


def _read_stream() -> BitStream:
    return BitStream.from_json(sys.stdin.read())


def _cmd_decode(args) -> int:
    stream = _read_stream()
    if args.bias_correct:
        if abs(args.beta - gre.PHI) > 1e-9:
            raise ValueError("bias correction is defined for the golden-ratio base")
        value = decoders.decode_bias_corrected(stream)
        exact = decoders.bias_correction_is_exact(stream)
    else:
        value = decoders.decode_partial_sum(stream, args.beta)
        exact = None
    obj = {
        "value": value,
        "beta": args.beta,
        "bias_corrected": bool(args.bias_correct),
        "scheme": stream._scheme_label(),
        "n_bits": stream.n_bits,
    }
    if exact is not None:
        obj["bias_correction_exact"] = exact
    print(json.dumps(obj))
    return 0


def _cmd_requantize(args) -> int:
    stream = _read_stream()
    fx = decoders.requantize(stream, args.B)
    print(fx.binary_string())
    return 0


def _cmd_region(args) -> int:
    region = gre.param_region(args.mu)
    obj = region.to_json_obj(alpha=args.alpha)
    obj["rect"] = gre.invariant_rect(args.mu).to_json_obj()
    print(json.dumps(obj, indent=2))
    return 0


def _cmd_invariance(args) -> int:
    rect = gre.invariant_rect(args.mu)
    resolver = AlwaysZero() if args.nu1 < args.nu2 else None
    spec = QuantizerSpec(alpha=args.alpha, nu1=args.nu1, nu2=args.nu2, resolver=resolver)
    report = gre.verify_invariance(rect, spec, args.mu, grid_density=args.grid)
    print(json.dumps(report.to_json_obj(), indent=2))
    return 0 if report.ok else 1


def _cmd_experiment(args) -> int:
    if args.kind == "escape":
        table = workbench.escape_fraction_experiment(
            args.delta, n_max=args.n_max, trials=args.trials, seed=args.seed
        )
    elif args.kind == "rmse":
        resolver = RandomUniformThreshold(seed=args.seed) if args.nu1 < args.nu2 else None
        spec = QuantizerSpec(alpha=args.alpha, nu1=args.nu1, nu2=args.nu2, resolver=resolver)
        table = workbench.rmse_vs_n_experiment(
            spec, args.noise_amp, trials=args.trials, seed=args.seed, n_max=args.n_max
        )
    elif args.kind == "variance":
        table = workbench.noise_variance_check(
            args.sigma, n_bits=args.n, trials=args.trials, seed=args.seed
        ).to_table()
    elif args.kind == "bias":
        table = workbench.bias_check(args.n, trials=args.trials, seed=args.seed).to_table()
    else:  # sweep
        alpha_grid = [float(a) for a in args.alpha_grid.split(",") if a]
        nu_grid = [float(v) for v in args.nu_grid.split(",") if v]
        table = workbench.robustness_sweep(
            args.mu, alpha_grid, nu_grid, trials=args.trials, seed=args.seed, n_bits=args.bits
        )
    table.write(args.out)
    print(f"wrote {args.out} ({len(table.rows)} rows)")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "encode": _cmd_encode,
        "decode": _cmd_decode,
        "requantize": _cmd_requantize,
        "region": _cmd_region,
        "invariance-check": _cmd_invariance,
        "experiment": _cmd_experiment,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, TypeError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
