"""Command-line front end.

Subcommands: rates (single-channel analysis), order (ordering method
comparison), sweep (Monte Carlo experiments from a spec file), fdmimo
(deterministic planar-array fixture generation) and fixture (read/write
utilities). Exit codes: 0 success, 2 validation error, 3 numeric/rank
error, 4 I/O error. Every run prints the resolved seed and a spec hash
to stderr.
"""

import argparse
import hashlib
import math
import os
import secrets
import sys

import numpy as np

from . import channels as ch
from .exceptions import (CapabilityError, FixtureFormatError, GzfdpError,
                         ParameterError, RankDeficiencyError,
                         SpecValidationError)
from .gram import build_gram
from .harness import db_to_linear, emit_report, load_spec, run_experiment
from .ordering import (apply_ordering, evaluate_ordering, identity_ordering,
                       order_alg1, order_alg2, order_bruteforce, order_random,
                       BRUTE_FORCE_MAX_USERS)
from .precoding import (OBJECTIVE_MIN, OBJECTIVE_SUM, build_gzfdp_minrate,
                        build_gzfdp_sumrate, build_ugdp, build_zfdp)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

SEED_ENV_VAR = "GZFDP_SEED"


def _resolve_seed(args):
    seed = getattr(args, "seed", None)
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return secrets.randbits(63)


def _announce(args, seed):
    canon = repr(sorted(vars(args).items(), key=lambda kv: kv[0]))
    digest = hashlib.sha256(canon.encode()).hexdigest()[:12]
    print("seed=%d spec_hash=%s" % (seed, digest), file=sys.stderr)


def _parse_power_db(text):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParameterError("--pt-db must be a number, got %r" % text) from None
    if not math.isfinite(value):
        raise ParameterError("--pt-db must be finite, got %r" % text)
    return value


def _build_solution(channel, args, power_linear, seed):
    ordering = _make_ordering(args, channel, power_linear, seed)
    permuted = apply_ordering(channel, ordering)
    family = args.family
    if family == "zf":
        sol = build_gzfdp_sumrate(permuted, None, 0, power_linear, args.n0)
    elif family == "gzfdp":
        builder = (build_gzfdp_minrate if args.objective == "min"
                   else build_gzfdp_sumrate)
        sol = builder(permuted, None, args.nu, power_linear, args.n0)
    elif family == "zfdp":
        sol = build_zfdp(permuted, power_linear, args.n0)
    elif family == "ugdp":
        sol = build_ugdp(permuted, args.group_size, power_linear, args.n0)
    else:
        raise ParameterError("unknown family %r" % family)
    return sol, ordering


def _make_ordering(args, channel, power_linear, seed):
    name = getattr(args, "ordering", "identity") or "identity"
    n_users = channel.n_users
    if name == "identity":
        return identity_ordering(n_users)
    gram = build_gram(channel, args.n0)
    nu = getattr(args, "nu", 1) or 1
    objective = "min" if getattr(args, "objective", "sum") == "min" else "sum"
    if name == "alg1":
        return order_alg1(gram, max(nu, 1))
    if name == "alg2":
        return order_alg2(gram)
    if name == "brute":
        return order_bruteforce(gram, nu, objective, power_linear, args.n0)
    if name.startswith("random"):
        _, _, k = name.partition(":")
        return order_random(n_users, np.random.SeedSequence([seed, int(k or 1)]))
    raise ParameterError("unknown ordering %r" % name)


def cmd_rates(args):
    seed = _resolve_seed(args)
    _announce(args, seed)
    channel = ch.load_channel_fixture(args.channel)
    power_linear = db_to_linear(_parse_power_db(args.pt_db))
    sol, ordering = _build_solution(channel, args, power_linear, seed)
    gram = build_gram(channel, args.n0)
    perm_rows = np.asarray(ordering.perm) - 1
    g_perm = gram.gram[np.ix_(perm_rows, perm_rows)]
    residual = abs(float(np.trace(sol.effective.conj().T @ g_perm
                                  @ sol.effective).real) - power_linear)

    print("family        : %s" % sol.label())
    print("ordering      : %s %s" % (ordering.method, ordering.perm))
    for idx, rate in enumerate(sol.user_rates, start=1):
        print("user %-2d rate  : %.6f" % (idx, rate))
    print("sum rate      : %.6f" % sol.sum_rate)
    print("min rate      : %.6f" % sol.min_rate)
    if np.ndim(sol.water_level) == 0:
        print("water level   : %.6f" % sol.water_level)
    else:
        print("water levels  : %s" % " ".join("%.6f" % w for w in sol.water_level))
    print("power residual: %.3e" % residual)
    if args.dump_f:
        ch.save_channel_fixture(sol.effective, args.dump_f)
    if args.dump_p:
        ch.save_channel_fixture(sol.precoder, args.dump_p)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write("user,rate_bits\n")
            for idx, rate in enumerate(sol.user_rates, start=1):
                fh.write("%d,%.17g\n" % (idx, rate))
    return EXIT_OK


def cmd_order(args):
    seed = _resolve_seed(args)
    _announce(args, seed)
    channel = ch.load_channel_fixture(args.channel)
    power_linear = db_to_linear(_parse_power_db(args.pt_db))
    gram = build_gram(channel, args.n0)
    objective = OBJECTIVE_MIN if args.objective == "min" else OBJECTIVE_SUM
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]

    print("method        permutation                objective(%s)" % objective)
    for method in methods:
        if method == "alg2" and objective == OBJECTIVE_SUM:
            print("warning: alg2 targets the min-rate objective; running anyway",
                  file=sys.stderr)
        if method == "brute" and channel.n_users > BRUTE_FORCE_MAX_USERS:
            print("skipping brute force: N=%d exceeds the N<=%d cap"
                  % (channel.n_users, BRUTE_FORCE_MAX_USERS), file=sys.stderr)
            continue
        if method == "identity":
            ordering = identity_ordering(channel.n_users)
        elif method == "alg1":
            depth = min(max(args.nu, 1), channel.n_users - 1)
            ordering = order_alg1(gram, depth)
        elif method == "alg2":
            ordering = order_alg2(gram)
        elif method == "brute":
            ordering = order_bruteforce(gram, args.nu, objective, power_linear,
                                        args.n0)
        elif method.startswith("random"):
            _, _, k = method.partition(":")
            ordering = order_random(channel.n_users,
                                    np.random.SeedSequence([seed, int(k or 1)]))
        else:
            raise ParameterError("unknown ordering method %r" % method)
        value = evaluate_ordering(gram, ordering, args.nu, objective,
                                  power_linear, args.n0)
        print("%-12s  %-25s  %.6f" % (method, ordering.perm, value))
    return EXIT_OK


def cmd_sweep(args):
    seed_arg = getattr(args, "seed", None)
    spec = load_spec(args.spec)
    if seed_arg is not None:
        spec.seed = int(seed_arg)
    print("seed=%d spec_hash=%s" % (spec.seed, spec.spec_hash()), file=sys.stderr)
    report = run_experiment(spec)
    emit_report(report, args.out)
    if report.failed_trials:
        print("excluded %d rank-deficient trial(s)" % report.failed_trials,
              file=sys.stderr)
    print("wrote %d rows to %s" % (len(report.rows), args.out))
    return EXIT_OK


def cmd_fdmimo(args):
    seed = _resolve_seed(args)
    _announce(args, seed)
    geom = ch.FdMimoGeometry(
        array_rows=args.array_rows, array_cols=args.array_cols,
        element_spacing=args.element_spacing, carrier_hz=args.carrier_hz,
        bs_height_m=args.bs_height, first_user_distance_m=args.first_distance,
        user_spacing_m=args.user_spacing, n_users=args.n_users)
    channel = ch.gen_fdmimo_los(geom)
    ch.save_channel_fixture(channel, args.out)
    print("wrote %dx%d fixture to %s"
          % (channel.n_users, channel.n_antennas, args.out))
    return EXIT_OK


def cmd_fixture(args):
    seed = _resolve_seed(args)
    _announce(args, seed)
    if args.fixture_action == "read":
        channel = ch.load_channel_fixture(args.channel)
        print("%d users, %d antennas, source=%s"
              % (channel.n_users, channel.n_antennas, channel.source))
        for row in channel.entries:
            print("  ".join("%.17g %.17g" % (z.real, z.imag) for z in row))
        return EXIT_OK
    # write
    if args.kind == "iid":
        channel = ch.gen_iid_gaussian(args.n_users, args.n_antennas, seed)
    elif args.kind == "kronecker":
        channel = ch.gen_kronecker_rayleigh(
            args.n_users, args.n_antennas,
            ch.CorrelationSpec(args.beta_t, args.beta_r), seed)
    else:
        raise ParameterError("unknown fixture kind %r" % args.kind)
    ch.save_channel_fixture(channel, args.out)
    print("wrote %dx%d fixture to %s"
          % (channel.n_users, channel.n_antennas, args.out))
    return EXIT_OK


def _add_common_rate_flags(parser):
    parser.add_argument("--pt-db", required=True, help="transmit power in dB")
    parser.add_argument("--n0", type=float, default=1.0, help="noise power")
    parser.add_argument("--seed", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gzfdp",
        description="Banded zero-forcing precoders for MISO broadcast channels")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rates = sub.add_parser("rates", help="per-user rates on one channel")
    p_rates.add_argument("--channel", required=True)
    p_rates.add_argument("--family", required=True,
                         choices=["zf", "gzfdp", "zfdp", "ugdp"])
    p_rates.add_argument("--nu", type=int, default=0)
    p_rates.add_argument("--group-size", type=int, default=2)
    p_rates.add_argument("--objective", choices=["sum", "min"], default="sum")
    p_rates.add_argument("--ordering", default="identity")
    p_rates.add_argument("--out", default=None, help="optional per-user CSV")
    p_rates.add_argument("--dump-f", default=None,
                         help="write the effective channel as a fixture")
    p_rates.add_argument("--dump-p", default=None,
                         help="write the precoder as a fixture")
    _add_common_rate_flags(p_rates)
    p_rates.set_defaults(func=cmd_rates)

    p_order = sub.add_parser("order", help="compare user-ordering methods")
    p_order.add_argument("--channel", required=True)
    p_order.add_argument("--nu", type=int, default=1)
    p_order.add_argument("--objective", choices=["sum", "min"], default="sum")
    p_order.add_argument("--methods", default="identity,alg1,alg2,brute")
    _add_common_rate_flags(p_order)
    p_order.set_defaults(func=cmd_order)

    p_sweep = sub.add_parser("sweep", help="run an experiment spec")
    p_sweep.add_argument("--spec", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--seed", type=int, default=None,
                         help="override the seed in the spec file")
    p_sweep.set_defaults(func=cmd_sweep)

    p_fdm = sub.add_parser("fdmimo", help="write a planar-array LOS fixture")
    p_fdm.add_argument("--out", required=True)
    p_fdm.add_argument("--array-rows", type=int, default=8)
    p_fdm.add_argument("--array-cols", type=int, default=8)
    p_fdm.add_argument("--element-spacing", type=float, default=0.5)
    p_fdm.add_argument("--carrier-hz", type=float, default=2.4e9)
    p_fdm.add_argument("--bs-height", type=float, default=20.0)
    p_fdm.add_argument("--first-distance", type=float, default=20.0)
    p_fdm.add_argument("--user-spacing", type=float, default=10.0)
    p_fdm.add_argument("--n-users", type=int, default=8)
    p_fdm.add_argument("--seed", type=int, default=None)
    p_fdm.set_defaults(func=cmd_fdmimo)

    p_fix = sub.add_parser("fixture", help="fixture read/write utilities")
    fix_sub = p_fix.add_subparsers(dest="fixture_action", required=True)
    p_read = fix_sub.add_parser("read", help="parse and echo a fixture")
    p_read.add_argument("--channel", required=True)
    p_read.add_argument("--seed", type=int, default=None)
    p_read.set_defaults(func=cmd_fixture, fixture_action="read")
    p_write = fix_sub.add_parser("write", help="generate a channel fixture")
    p_write.add_argument("--out", required=True)
    p_write.add_argument("--kind", choices=["iid", "kronecker"], default="iid")
    p_write.add_argument("--n-users", type=int, required=True)
    p_write.add_argument("--n-antennas", type=int, required=True)
    p_write.add_argument("--beta-t", type=float, default=0.0)
    p_write.add_argument("--beta-r", type=float, default=0.0)
    p_write.add_argument("--seed", type=int, default=None)
    p_write.set_defaults(func=cmd_fixture, fixture_action="write")

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_VALIDATION
    try:
        return args.func(args)
    except (ParameterError, SpecValidationError, FixtureFormatError,
            CapabilityError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    except RankDeficiencyError as exc:
        print("numeric error: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        print("i/o error: %s" % exc, file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print("i/o error: %s" % exc, file=sys.stderr)
        return EXIT_IO
    except GzfdpError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION


def entrypoint():  # console_scripts hook
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
