"""``lt-energy`` command line: one seeded, CSV-emitting command per reproduced artifact.

Every CSV written with ``--out`` gets a ``.manifest`` sidecar holding the
command line, the fully resolved parameters, the seed and timestamps.
Exit codes: 0 success, 2 flag or config error, 3 numerical failure.
"""

import argparse
import csv
import datetime as dt
import io
import logging
import os
import shlex
import sys
import tempfile

from . import __version__
from .energy_model import optimize_m, threshold_numeric
from .errors import LTEnergyError, NumericalError
from .rate_profile import (
    DEFAULT_RATE_GRID,
    RateProfile,
    build_profile,
    gamma_grid,
    lt_coding_gain,
    lt_operating_table,
    rate_pmf,
)
from .scheme_catalog import load_config, operating_tables_from_text, published_lt_tables, resolve_scheme

CONFIG_ENV = "LT_ENERGY_CONFIG"
ENERGY_HEADER = (
    "d_m",
    "scheme",
    "chosen_m",
    "rf_j",
    "circuit_j",
    "transient_j",
    "computation_j",
    "total_j",
    "operating_ebn0_db",
)

log = logging.getLogger("lt_energy")


class UsageError(LTEnergyError):
    pass


def fmt(value):
    if value is None:
        return "NONE"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def render_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, rows, config, seed=None):
    text = render_csv(rows)
    if not args.out:
        sys.stdout.write(text)
        return
    _atomic_write(args.out, text)
    manifest = [
        f"command={shlex.join(args.argv)}",
        f"tool_version={__version__}",
        f"seed={fmt(seed)}",
        f"started={args.started}",
        f"finished={dt.datetime.now(dt.timezone.utc).isoformat()}",
        f"config_source={config.source or 'defaults'}",
    ]
    _atomic_write(args.out + ".manifest", "\n".join(manifest) + "\n" + config.dump())


def parse_range(text, what):
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"{what} must look like lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise UsageError(f"{what} needs step > 0 and hi >= lo, got {text!r}")
    return gamma_grid(lo, hi, step)


def parse_float_list(text, what):
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{what}: not a comma-separated list of numbers: {text!r}") from None
    if not values:
        raise UsageError(f"{what} is empty")
    return values


def read_profile(path, M, target_ber, k):
    """Load a ``gamma_db,min_rate`` CSV written by ``characterize``."""
    try:
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read profile {path}: {exc.strerror}") from None
    try:
        entries = [(float(r["gamma_db"]), None if r["min_rate"] == "NONE" else float(r["min_rate"])) for r in rows]
    except (KeyError, ValueError):
        raise UsageError(f"{path} is not a gamma_db,min_rate profile") from None
    if not entries:
        raise UsageError(f"{path} has no rows")
    grid = sorted(set(DEFAULT_RATE_GRID) | {r for _, r in entries if r is not None}, reverse=True)
    return RateProfile(M, target_ber, k, tuple(grid), entries, entries)


def _config(args):
    return load_config(args.config or os.environ.get(CONFIG_ENV) or None)


def _lt_settings(args, config):
    k = args.k if args.k is not None else config.lt_k
    trials = args.trials if args.trials is not None else config.lt_trials
    seed = args.seed if args.seed is not None else config.lt_seed
    target = args.target_ber if args.target_ber is not None else config.params.target_ber
    return k, trials, seed, target


def _profile(args, config):
    k, trials, seed, target = _lt_settings(args, config)
    if getattr(args, "profile", None):
        return read_profile(args.profile, args.m, target, k), seed
    grid = parse_range(args.gamma_grid, "--gamma-grid")
    profile = build_profile(
        grid,
        args.m,
        target,
        k,
        trials,
        seed=seed,
        dist=config.distribution(),
        max_iterations=args.max_iterations,
        workers=args.workers,
    )
    return profile, seed


def cmd_characterize(args):
    config = _config(args)
    profile, seed = _profile(args, config)
    emit(args, profile.to_csv_rows(), config, seed)


def _table2_ebn0(M):
    rows = published_lt_tables().get(M)
    if not rows:
        raise UsageError(f"no default Eb/N0 list for M={M}; pass --ebn0-list")
    return [r.ebn0_db for r in rows]


def cmd_table2(args):
    config = _config(args)
    ebn0 = parse_float_list(args.ebn0_list, "--ebn0-list") if args.ebn0_list is not None else _table2_ebn0(args.m)
    profile, seed = _profile(args, config)
    rows = lt_operating_table(args.m, profile.target_ber, ebn0, profile)
    emit(args, [("ebn0_db", "avg_rate", "gain_db")] + [(r.ebn0_db, r.average_rate, r.gain_db) for r in rows], config, seed)


def cmd_gain(args):
    config = _config(args)
    target = args.target_ber if args.target_ber is not None else config.params.target_ber
    ebn0 = parse_float_list(args.ebn0_list, "--ebn0-list") if args.ebn0_list is not None else _table2_ebn0(args.m)
    rows = [(e, lt_coding_gain(e, args.m, target)) for e in ebn0]
    emit(args, [("ebn0_db", "gain_db")] + rows, config)


def _lt_tables(args):
    if not args.lt_table:
        return None
    tables = published_lt_tables()
    for spec in args.lt_table:
        m, sep, path = spec.partition("=")
        if not sep or not m.isdigit():
            raise UsageError(f"--lt-table expects M=PATH, got {spec!r}")
        try:
            with open(path, encoding="utf-8") as fh:
                tables[int(m)] = operating_tables_from_text(fh.read())[None]
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        except KeyError:
            raise UsageError(f"{path} is not an ebn0_db,avg_rate,gain_db table") from None
    return tables


def cmd_energy(args):
    config = _config(args)
    distances = parse_range(args.d_range, "--d-range")
    lt_tables = _lt_tables(args)
    schemes = [(token, resolve_scheme(token, config, lt_tables)) for token in args.scheme]
    rows = [ENERGY_HEADER]
    for d in distances:
        for token, scheme in schemes:
            _, e = optimize_m(scheme, d, config.params)
            op = e.chosen_operating_row.ebn0_db if e.chosen_operating_row is not None else None
            rows.append((d, token, e.chosen_m, e.rf, e.circuit, e.transient, e.computation, e.total, op))
    emit(args, rows, config)


def cmd_threshold(args):
    config = _config(args)
    lt_tables = _lt_tables(args)
    a = resolve_scheme(args.scheme_a, config, lt_tables)
    b = resolve_scheme(args.scheme_b, config, lt_tables)
    try:
        lo, hi = (float(x) for x in args.d_range.split(":"))
    except ValueError:
        raise UsageError(f"--d-range must look like lo:hi, got {args.d_range!r}") from None
    if not 0 < lo < hi:
        raise UsageError(f"--d-range needs 0 < lo < hi, got {args.d_range!r}")
    d_t = None if args.scheme_a == args.scheme_b else threshold_numeric(a, b, config.params, (lo, hi))
    print(f"d_T = {fmt(d_t)}" + ("" if d_t is None else " m"))
    if args.out:
        emit(args, [("scheme_a", "scheme_b", "d_t_m"), (args.scheme_a, args.scheme_b, d_t)], config)


def cmd_pmf(args):
    config = _config(args)
    profile, seed = _profile(args, config)
    pmf = rate_pmf(profile, args.avg_ebn0, args.m)
    emit(args, pmf.to_csv_rows(), config, seed)


def _add_common(p):
    p.add_argument("--config", help=f"key=value config file (fallback: ${CONFIG_ENV})")
    p.add_argument("--out", help="output CSV path (stdout when omitted; no manifest then)")


def _add_lt(p, profile=True):
    p.add_argument("--m", type=int, default=2, choices=(2, 4, 8, 16, 32, 64))
    p.add_argument("--target-ber", type=float)
    p.add_argument("--k", type=int, help="message bits per block (config lt.k, default 1024)")
    p.add_argument("--trials", type=int, help="trials per (SNR, rate) point (config lt.trials, default 200)")
    p.add_argument("--seed", type=int, help="master seed (config lt.seed, default 0)")
    p.add_argument("--gamma-grid", default="-10:50:0.5", help="instantaneous SNR grid lo:hi:step in dB (write --gamma-grid=-10:50:0.5 for a negative lo)")
    p.add_argument("--max-iterations", type=int, default=50)
    p.add_argument("--workers", type=int, default=1, help="processes; results do not depend on it")
    if profile:
        p.add_argument("--profile", help="reuse a characterize CSV instead of simulating")


def build_parser():
    parser = argparse.ArgumentParser(prog="lt-energy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("characterize", help="highest decodable rate per instantaneous SNR")
    _add_lt(p, profile=False)
    _add_common(p)
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("table2", help="average LT rate and coding gain per Eb/N0")
    _add_lt(p)
    p.add_argument("--ebn0-list", help="comma-separated Eb/N0 values in dB")
    _add_common(p)
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("gain", help="LT coding gain per Eb/N0 (analytic, no simulation)")
    p.add_argument("--m", type=int, default=2, choices=(2, 4, 8, 16, 32, 64))
    p.add_argument("--target-ber", type=float)
    p.add_argument("--ebn0-list")
    _add_common(p)
    p.set_defaults(func=cmd_gain)

    p = sub.add_parser("energy", help="M-optimized energy per scheme over a distance sweep")
    p.add_argument("--scheme", action="append", required=True, help="uncoded | lt | bch:NAME | conv:NAME | *:best")
    p.add_argument("--d-range", default="5:150:5", help="lo:hi:step in metres")
    p.add_argument("--lt-table", action="append", help="M=PATH: replace the built-in LT table for M by a table2 CSV")
    _add_common(p)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("threshold", help="crossover distance between two schemes")
    p.add_argument("--scheme-a", required=True)
    p.add_argument("--scheme-b", required=True)
    p.add_argument("--d-range", default="1:500", help="search interval lo:hi in metres")
    p.add_argument("--lt-table", action="append")
    _add_common(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("pmf", help="pmf of the LT rate at one average Eb/N0")
    _add_lt(p)
    p.add_argument("--avg-ebn0", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_pmf)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = ["lt-energy"] + argv
    args.started = dt.datetime.now(dt.timezone.utc).isoformat()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except NumericalError as exc:
        print(f"lt-energy: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (LTEnergyError, ValueError) as exc:
        print(f"lt-energy: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
