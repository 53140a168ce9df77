"""Command-line entry point: ``twistlab <subcommand> [flags]``.

Exit codes: 0 success, 1 runtime error, 2 invalid flags,
3 InconclusiveAtThisResolution.  Data goes to stdout or ``--out``;
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from fractions import Fraction

from . import fourier, lecalvez, rotation, sweeps
from .maps import MapInstance, TwistError
from .rotation import GridSpec, SearchBudget
from .svg import scatter_svg

log = logging.getLogger("twistlab")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

SUBCOMMANDS = ("orbit", "rho", "interval", "triplet", "periodic", "envelopes", "fourier",
               "sweep", "bullett", "nonmono", "continuity", "agscan")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _real(text: str) -> float:
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}")


def _reals(text: str) -> list[float]:
    return [_real(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}")


def _grid(text: str) -> tuple[int, int]:
    parts = text.lower().replace(" ", "").split("x")
    try:
        nx, ny = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 64x64, got {text!r}")
    return nx, ny


def _span(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(":")
        return _real(a), _real(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like a:b, got {text!r}")


def _lrange(text: str) -> tuple[float, float, float]:
    try:
        a, b, s = text.split(":")
        return _real(a), _real(b), _real(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like a:b:step, got {text!r}")


def _seed(text: str) -> tuple[float, float]:
    try:
        x, y = text.split(",")
        return _real(x), _real(y)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must look like x,y, got {text!r}")


def _coord(text: str):
    return "auto" if text == "auto" else _real(text)


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("--family", choices=["standard", "translated"], default="standard")
    shared.add_argument("--g", choices=["cos", "sawtooth", "gstar"], default="cos")
    shared.add_argument("--N", type=int, default=None, help="truncation order (gstar only)")
    shared.add_argument("--lambda", dest="lam", type=_reals, default=None,
                        help="parameter value, or a comma list where several are accepted; fractions like 4/3 allowed")
    shared.add_argument("--lambda-range", type=_lrange, default=None, metavar="A:B:STEP")
    shared.add_argument("--n", type=int, default=None, help="iterations")
    shared.add_argument("--grid", type=_grid, default=None, metavar="NXxNY")
    shared.add_argument("--y-range", type=_span, default=(-2.0, 2.0), metavar="A:B")
    shared.add_argument("--y-escape", type=_real, default=math.inf)
    shared.add_argument("--seed-extra", type=_seed, action="append", default=[], metavar="X,Y")
    shared.add_argument("--out", default=None)
    shared.add_argument("--format", choices=["csv", "json"], default="csv")
    shared.add_argument("--svg", default=None)
    shared.add_argument("--threads", type=int, default=None)
    shared.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="twistlab", description="Numerical experiments on standard families of twist maps.")
    p.add_argument("--replay", default=None, metavar="REPORT.json",
                   help="re-run the invocation recorded in a JSON report and compare")
    sub = p.add_subparsers(dest="cmd")

    def add(name, help):
        return sub.add_parser(name, parents=[shared], help=help)

    s = add("orbit", "trajectory of one point")
    s.add_argument("--x", type=_coord, default=0.0)
    s.add_argument("--y", type=_real, default=0.0)
    s.add_argument("--form", choices=["lift", "cylinder", "torus"], default="cylinder")

    s = add("rho", "finite-time rotation number of one orbit")
    s.add_argument("--x", type=_coord, default=0.0)
    s.add_argument("--y", type=_real, default=0.0)
    s.add_argument("--burn-in", type=int, default=0)

    s = add("interval", "rotation interval estimate over a grid")
    s.add_argument("--burn-in", type=int, default=0)
    s.add_argument("--no-auto-seed", action="store_true")

    for name, help in (("triplet", "classify a triplet (s,p,q)"), ("envelopes", "envelopes of K(s,q)")):
        s = add(name, help)
        s.add_argument("--s", type=int, default=0)
        s.add_argument("--q", type=int, default=1)
        s.add_argument("--nx", type=int, default=64)
        if name == "triplet":
            s.add_argument("--p", type=int, default=1)

    s = add("periodic", "vertical periodic orbits T^q(A) = A + (0,p)")
    s.add_argument("--p", type=int, default=1)
    s.add_argument("--q", type=int, default=1)
    s.add_argument("--nx", type=int, default=32)

    s = add("fourier", "sawtooth cosine coefficients")
    s.add_argument("--print-coeffs", action="store_true")

    add("sweep", "rotation estimates along a parameter range").add_argument("--timing", action="store_true")
    add("bullett", "evidence tiers for the sawtooth family")
    add("nonmono", "non-monotonicity check for the truncated series")
    add("continuity", "rotation estimate against truncation order").add_argument(
        "--N-list", type=_ints, default=[5, 11, 21, 41])
    s = add("agscan", "label parameters as RIC-consistent or not")
    s.add_argument("--lambda-max", type=_real, default=1.5)
    s.add_argument("--step", type=_real, default=0.1)
    return p


# --- output helpers -----------------------------------------------------------------------


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _invocation(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("out", "svg", "replay", "verbose", "threads")}
    return json.loads(json.dumps(d, default=list))


def _report(args, payload: dict) -> str:
    return sweeps.dumps({"invocation": _invocation(args), "result": payload})


# --- validation ---------------------------------------------------------------------------


def _need(cond, msg):
    if not cond:
        raise UsageError(msg)


def _lambdas(args, default=None, single=False) -> list[float]:
    if args.lam is not None and args.lambda_range is not None:
        raise UsageError("give --lambda or --lambda-range, not both")
    if args.lambda_range is not None:
        a, b, st = args.lambda_range
        _need(st > 0, "--lambda-range step must be > 0")
        lams = sweeps.lambda_range(a, b, st)
    elif args.lam is not None:
        lams = args.lam
    elif default is not None:
        lams = list(default)
    else:
        raise UsageError("--lambda is required")
    if single:
        _need(len(lams) == 1, "this subcommand takes a single --lambda")
    return lams


def _gridspec(args, default=(64, 64)) -> GridSpec:
    nx, ny = args.grid or default
    _need(nx >= 1 and ny >= 1, "--grid must be nonempty")
    lo, hi = args.y_range
    _need(math.isfinite(lo) and math.isfinite(hi) and lo <= hi, "--y-range must be a finite interval a:b with a <= b")
    return GridSpec(nx, ny, (lo, hi))


def _n(args, default: int) -> int:
    n = default if args.n is None else args.n
    _need(n >= 1, "--n must be >= 1")
    return n


def _forcing(args):
    if args.N is not None:
        _need(args.g == "gstar", "--N applies to --g gstar only")
        _need(args.N >= 1, "--N must be >= 1")
    return sweeps.make_g(args.g, args.N)


def _map(args) -> MapInstance:
    return MapInstance(args.family, _lambdas(args, single=True)[0], _forcing(args))


def _resolve_x(args, m: MapInstance) -> float:
    if args.x != "auto":
        return args.x
    seeds = [s for s in rotation.integer_step_seeds(m) if m.dy(s.x) > 0]
    if not seeds:
        raise UsageError("--x auto needs an exact upward integer-step point; none exists at this lambda")
    log.info("auto seed x=%r", seeds[0].x)
    return seeds[0].x


# --- subcommands --------------------------------------------------------------------------


def cmd_orbit(args):
    m = _map(args)
    x = _resolve_x(args, m)
    tr = m.iterate(x, args.y, _n(args, 100), args.form)
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(scatter_svg(tr.x, tr.y, title=f"{m.kind} lambda={m.lam} {args.form} orbit"))
    if args.format == "json":
        return _report(args, {"map": m.describe(), "x": tr.x.tolist(), "y": tr.y.tolist()})
    return _csv(["k", "x", "y"], [(k, float(a), float(b)) for k, (a, b) in enumerate(zip(tr.x, tr.y))])


def cmd_rho(args):
    m = _map(args)
    x = _resolve_x(args, m)
    _need(args.burn_in >= 0, "--burn-in must be >= 0")
    o = rotation.rho_v_estimate(m, (x, args.y), _n(args, 10_000), args.burn_in, args.y_escape)
    if args.format == "json":
        return _report(args, {"map": m.describe(), **o.to_dict()})
    return _csv(["x0", "y0", "n", "displacement_y", "rho_hat", "max_y_excursion", "escaped"],
                [(o.initial.x, o.initial.y, o.n, o.displacement_y, o.rho_hat, o.max_y_excursion, o.escaped)])


def cmd_interval(args):
    m = _map(args)
    _need(args.burn_in >= 0, "--burn-in must be >= 0")
    est = rotation.rho_interval_estimate(m, _gridspec(args), _n(args, 10_000), args.seed_extra,
                                         args.burn_in, args.y_escape, not args.no_auto_seed)
    if args.format == "json":
        return _report(args, {"map": m.describe(), **est.to_dict()})
    w1, w2 = est.witness_min, est.witness_max
    return _csv(["rho_min_hat", "rho_max_hat", "max_excursion", "min_x0", "min_y0", "max_x0", "max_y0"],
                [(est.rho_min_hat, est.rho_max_hat, est.max_excursion, w1.initial.x, w1.initial.y,
                  w2.initial.x, w2.initial.y)])


def cmd_triplet(args):
    m = _map(args)
    _need(args.q >= 1, "--q must be >= 1")
    _need(args.nx >= 16, "--nx must be >= 16")
    c = lecalvez.classify_triplet(m, lecalvez.Triplet(args.s, args.p, args.q), args.nx)
    if args.format == "json":
        return _report(args, {"map": m.describe(), "triplet": [args.s, args.p, args.q], **c.to_dict()})
    return _csv(["s", "p", "q", "class", "margin", "pos_margin", "neg_margin"],
                [(args.s, args.p, args.q, c.variant, "" if c.margin is None else c.margin,
                  c.pos_margin, c.neg_margin)])


def cmd_envelopes(args):
    m = _map(args)
    _need(args.q >= 1, "--q must be >= 1")
    _need(args.nx >= 16, "--nx must be >= 16")
    env = lecalvez.envelopes(m, args.s, args.q, args.nx)
    if args.svg:
        xs = list(env.grid) * 4
        ys = list(env.mu_minus) + list(env.mu_plus) + list(env.nu_minus) + list(env.nu_plus)
        with open(args.svg, "w") as fh:
            fh.write(scatter_svg(xs, ys, title=f"envelopes of K({args.s},{args.q})"))
    if args.format == "json":
        return _report(args, {"map": m.describe(), **env.to_dict()})
    rows = zip(env.grid, env.mu_minus, env.mu_plus, env.nu_minus, env.nu_plus, env.n_roots)
    return _csv(["x", "mu_minus", "mu_plus", "nu_minus", "nu_plus", "n_roots"],
                [tuple(float(v) for v in r[:5]) + (int(r[5]),) for r in rows])


def cmd_periodic(args):
    m = _map(args)
    _need(args.q >= 1, "--q must be >= 1")
    _need(args.nx >= 16, "--nx must be >= 16")
    seeds = None
    if args.seed_extra:
        seeds = lecalvez.default_seeds(m, args.p, args.q, args.nx) + list(args.seed_extra)
    orbits = lecalvez.find_vertical_periodic(m, args.p, args.q, seeds, args.nx)
    if args.format == "json":
        return _report(args, {"map": m.describe(), "orbits": [o.to_dict() for o in orbits]})
    return _csv(["x", "y", "p", "q", "s", "residual"],
                [(o.point.x, o.point.y, o.p, o.q, o.s, o.residual) for o in orbits])


def cmd_fourier(args):
    N = 41 if args.N is None else args.N
    _need(N >= 1, "--N must be >= 1")
    tr = fourier.sawtooth_coeffs(N)
    err = fourier.truncation_error(N)
    if args.format == "json":
        return _report(args, {**tr.to_dict(), "truncation_error": err})
    if args.print_coeffs:
        return _csv(["n", "a_n"], [(k + 1, a) for k, a in enumerate(tr.coeffs)])
    return _csv(["N", "truncation_error", "tail_bound"], [(N, err, tr.sup_error_bound)])


def cmd_sweep(args):
    lams = _lambdas(args)
    _need(lams == sorted(lams), "lambda values must be ascending")
    n = _n(args, 10_000)
    _need(n >= 1000, "--n must be >= 1000 for sweeps")
    _forcing(args)
    cfg = sweeps.SweepConfig(args.family, args.g, args.N, tuple(lams), _gridspec(args), n,
                             args.y_escape, record_time=args.timing)
    rows = sweeps.sweep(cfg, args.threads)
    for r in rows:
        if r.failed:
            log.warning("row lambda=%r failed: %s", r.lam, r.error)
    if args.format == "json":
        return _report(args, sweeps.sweep_report(cfg, rows))
    return sweeps.rows_to_csv(rows)


def cmd_bullett(args):
    lams = _lambdas(args, default=[0.95, 4 / 3, 2.0, 5.0])
    _need(all(0 < l <= 8 for l in lams), "bullett lambdas must lie in (0, 8]")
    rows = sweeps.bullett_check(lams, _n(args, 100_000), _gridspec(args))
    if args.format == "json":
        return _report(args, {"rows": [r.to_dict() for r in rows]})
    return _csv(["lambda", "tier", "expected", "matches", "rho_max_hat", "rho_min_hat", "max_excursion", "unit_orbits"],
                [(r.lam, r.tier, r.expected, "" if r.matches is None else r.matches, r.rho_max_hat,
                  r.rho_min_hat, r.max_excursion, ";".join(f"{o.point.x!r}" for o in r.unit_orbits)) for r in rows])


def cmd_nonmono(args):
    N = 41 if args.N is None else args.N
    _need(N >= 1, "--N must be >= 1")
    try:
        rep = sweeps.nonmonotonicity_check(N, _n(args, 100_000), _gridspec(args, (128, 128)))
        status = "demonstrated"
    except sweeps.InconclusiveAtThisResolution as exc:
        rep, status = exc.report, "InconclusiveAtThisResolution"
        log.warning("inconclusive: %s", exc.reason)
    payload = {**rep.to_dict(), "status": status}
    if args.format == "json":
        text = _report(args, payload)
    else:
        text = _csv(["N", "n", "rho_low", "rho_high", "gap", "margin", "status"],
                    [(rep.N, rep.n, rep.rho_low, rep.rho_high, rep.rho_low - rep.rho_high, rep.margin, status)])
    return text, (EXIT_OK if status == "demonstrated" else EXIT_INCONCLUSIVE)


def cmd_continuity(args):
    lam = _lambdas(args, default=[4 / 3], single=True)[0]
    Ns = args.N_list
    _need(Ns and Ns == sorted(Ns) and Ns[0] >= 1, "--N-list must be ascending positive integers")
    rep = sweeps.continuity_probe(lam, Ns, _n(args, 10_000), _gridspec(args))
    if args.format == "json":
        return _report(args, rep.to_dict())
    return _csv(["N", "sup_distance", "rho_max_hat", "rho_sawtooth"],
                [(r.N, r.sup_distance, r.rho_max_hat, rep.rho_sawtooth) for r in rep.rows])


def cmd_agscan(args):
    _need(args.step > 0, "--step must be > 0")
    _need(args.lambda_max >= 0, "--lambda-max must be >= 0")
    n = _n(args, 10_000)
    budget = SearchBudget(n=n, grid=_gridspec(args))
    rep = sweeps.a_g_scan(_forcing(args), args.lambda_max, args.step, budget, args.lam or ())
    if args.format == "json":
        return _report(args, rep.to_dict())
    return _csv(["lambda", "label", "tier"], list(zip(rep.lambdas, rep.labels, rep.tiers)))


COMMANDS = {name: globals()[f"cmd_{name}"] for name in SUBCOMMANDS}


def _dispatch(args) -> tuple[str, int]:
    res = COMMANDS[args.cmd](args)
    return res if isinstance(res, tuple) else (res, EXIT_OK)


def _replay(path: str) -> int:
    with open(path) as fh:
        old = json.load(fh)
    inv = dict(old["invocation"])
    ns = argparse.Namespace(**inv, out=None, svg=None, replay=None, verbose=False, threads=None)
    for key in ("grid", "y_range", "lambda_range"):
        if isinstance(getattr(ns, key, None), list):
            setattr(ns, key, tuple(getattr(ns, key)))
    ns.seed_extra = [tuple(s) for s in ns.seed_extra]
    ns.format = "json"
    text, _ = _dispatch(ns)
    new = json.loads(text)
    if new["result"] == old["result"]:
        sys.stdout.write("replay: identical\n")
        return EXIT_OK
    diff = sorted(k for k in set(new["result"]) | set(old["result"])
                  if new["result"].get(k) != old["result"].get(k))
    sys.stderr.write(f"replay: fields differ: {', '.join(diff)}\n")
    return EXIT_RUNTIME


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"twistlab: error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        if args.replay:
            return _replay(args.replay)
        if not args.cmd:
            sys.stderr.write("twistlab: error: a subcommand is required\n")
            return EXIT_USAGE
        text, code = _dispatch(args)
        _emit(text, args.out)
        return code
    except UsageError as exc:
        sys.stderr.write(f"twistlab: error: {exc}\n")
        return EXIT_USAGE
    except (TwistError, ValueError, OSError) as exc:
        sys.stderr.write(f"twistlab: {type(exc).__name__}: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
