"""Command-line interface: ``memsdelay <command> [--config FILE] [--out PATH]``.

Exit codes: 0 ok, 1 a requested check failed, 2 configuration or usage error,
3 pull-in / static error, 4 integrator error, 5 solver non-convergence,
6 check not applicable to the configuration.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile

import numpy as np

from . import config as cfg
from .ddesolve import integrate
from .errors import (
    HistoryTooShort,
    IntegratorError,
    NegativeGapOrbit,
    NoConvergence,
    NoLstarRoot,
    NotAnEquilibrium,
    NotConverged,
    OutsideTheorem,
    PullInExceeded,
    SignAssumptionViolated,
    VoltageRangeInvalid,
)
from .model import Linear, SqueezeFilm
from .orbits import continue_branch, find_periodic, floquet_dde, monodromy_ode
from .stability import (
    HillCoefficients,
    delay_bound_d0,
    delay_continuation_case,
    hill_nondegenerate,
    is_nondegenerate_delay,
    linearize_at_equilibrium,
    lyapunov_certificate,
    squeeze_conditions,
)
from .statics import (
    bracket_constants,
    classify_equilibrium,
    equilibria,
    nondimensionalize,
    pull_in_voltage,
)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_STATIC, EXIT_INTEGRATOR, EXIT_SOLVER, EXIT_INAPPLICABLE = range(7)

SWEEP_V0 = np.arange(10, 121)
FORCED_ICS = ((0.0625, 0.0092), (0.07, 0.0091))
AUTONOMOUS_ICS = ((0.0, 0.2), (0.0, -0.2))


class UsageError(ValueError):
    pass


def fmt(x):
    return "%.15g" % x


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file renamed on success."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def csv_text(header, rows, meta=()):
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    lines += ["# " + m for m in meta]
    return "\n".join(lines) + "\n"


def trajectory_csv(traj):
    meta = []
    if traj.pullin is not None:
        meta.append(f"pullin,t={fmt(traj.pullin.t)}")
    return csv_text(("t", "x", "v"), np.column_stack([traj.t, traj.y]), meta)


# ---------------------------------------------------------------------------
# statics and d0


def cmd_statics(conf, args):
    p = conf.params
    nd = nondimensionalize(conf.physical)
    eq = equilibria(p.e, p.voltage.v0)
    lines = [
        ("time_scale", nd.time_scale),
        ("c", conf.c),
        ("e", p.e),
        ("G1", p.g1),
        ("G2", p.g2),
        ("gamma", conf.gamma),
        ("v0", p.voltage.v0),
        ("delta", p.voltage.delta),
        ("pull_in_voltage", pull_in_voltage(p.e)),
        ("x1", eq.x1),
        ("x2", eq.x2),
    ]
    out = [f"{k} = {v:.6g}" for k, v in lines]
    for name, x in (("x1", eq.x1), ("x2", eq.x2)):
        out.append(f"class_{name} = {classify_equilibrium(p, x).kind.value}")
    br = bracket_constants(p.e, p.voltage)
    for k in ("xi1", "eta1", "xi2", "eta2"):
        out.append(f"{k} = {getattr(br, k):.10g}")
    if eq.degenerate:
        out.append("note = degenerate double root at pull-in")
    print("\n".join(out))
    return EXIT_OK


def d0_row(params, v0, squeeze_slope="gap"):
    """Delay bound at ``v0`` (``nan`` above pull-in or outside the sign assumption)."""
    q = params.with_(v0=float(v0), delta=0.0)
    try:
        eq = equilibria(q.e, q.voltage.v0)
        return delay_bound_d0(linearize_at_equilibrium(q, eq.x2, squeeze_slope))
    except (PullInExceeded, SignAssumptionViolated):
        return math.nan


def d0_sweep(conf, v0s=SWEEP_V0):
    p = conf.params
    lin = p.with_(damping=Linear(conf.c))
    sq = p.with_(damping=SqueezeFilm(conf.gamma))
    return [
        (float(v), d0_row(lin, v), d0_row(sq, v, "gap"), d0_row(sq, v, "displacement"))
        for v in v0s
    ]


SWEEP_HEADER = ("v0", "d0_linear", "d0_squeeze", "d0_squeeze_displacement")


def cmd_d0(conf, args):
    p = conf.params
    if p.voltage.delta != 0:
        raise UsageError("d0 needs an autonomous configuration (delta = 0)")
    eq = equilibria(p.e, p.voltage.v0)
    lin = linearize_at_equilibrium(p, eq.x2, conf.squeeze_slope)
    cert = lyapunov_certificate(lin)
    for k, v in (("x2", eq.x2), ("a", lin.a), ("b", lin.b), ("lambda", cert.lambda_ratio),
                 ("ghat1", lin.ghat1), ("ghat2", lin.ghat2), ("d0", delay_bound_d0(lin))):
        print(f"{k} = {v:.10g}")
    if args.out:
        emit(csv_text(SWEEP_HEADER, d0_sweep(conf)), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulation


def parse_history(spec, conf):
    """``equilibrium``/``x2``, ``x1`` or ``"x,v"`` (two finite numbers)."""
    p = conf.params
    if isinstance(spec, (list, tuple)):
        vals = spec
    elif spec in ("equilibrium", "x2", "x1"):
        eq = equilibria(p.e, p.voltage.v0)
        return (eq.x1 if spec == "x1" else eq.x2, 0.0), "gap"
    else:
        try:
            vals = [float(s) for s in str(spec).split(",")]
        except ValueError:
            raise UsageError(f"malformed history {spec!r}") from None
    if len(vals) != 2 or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"malformed history {spec!r}: expected 'x,v'")
    return (float(vals[0]), float(vals[1])), None


def cmd_simulate(conf, args):
    p = conf.params
    if args.d is not None:
        if args.d < 0:
            raise UsageError("delay must be >= 0")
        p = p.with_(d=args.d)
    t_end = args.t_end or conf.t_end or 50.0 * p.period
    step = args.step or conf.step
    history, forced = parse_history(args.history if args.history is not None else conf.history, conf)
    coords = forced or args.coords or conf.coords
    traj = integrate(p, history, t_end, step, coords=coords)
    emit(trajectory_csv(traj), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# orbits


def parse_guess(spec, conf):
    p = conf.params
    if spec in ("x1", "x2"):
        eq = equilibria(p.e, p.voltage.v0)
        return eq.x1 if spec == "x1" else eq.x2
    try:
        return float(spec)
    except ValueError:
        raise UsageError(f"malformed guess {spec!r}") from None


def format_multipliers(mu):
    return " ".join(f"{complex(z).real:.12g}{complex(z).imag:+.12g}j" for z in mu)


def orbit_multipliers(orbit, conf):
    if orbit.params.d == 0:
        return monodromy_ode(orbit.params, orbit).multipliers
    return floquet_dde(orbit.params, orbit, conf.floquet_m).multipliers[:4]


def orbit_csv(orbit, mu):
    N = orbit.N
    a, b = orbit.cos, orbit.sin
    keep = N
    while keep > 0 and a[keep - 1] == 0.0 and b[keep - 1] == 0.0:
        keep -= 1
    rows = [(0, orbit.mean, 0.0)] + [(k, a[k - 1], b[k - 1]) for k in range(1, keep + 1)]
    meta = [f"residual={orbit.residual:.6e}", f"N={N}", f"multipliers={format_multipliers(mu)}",
            f"max_modulus={float(np.max(np.abs(mu))):.12g}"]
    return csv_text(("k", "cos", "sin"), rows, meta)


def orbit_params(conf, mode):
    p = conf.params
    if mode == "ode":
        return p.with_(d=0.0)
    if p.d >= p.period:
        raise UsageError(f"orbit solver needs d < T (d={p.d!r}, T={p.period!r})")
    return p


def cmd_orbit(conf, args):
    p = orbit_params(conf, args.mode)
    orbit = find_periodic(p, parse_guess(args.guess, conf), N=conf.N, tol=conf.tol)
    emit(orbit_csv(orbit, orbit_multipliers(orbit, conf)), args.out)
    return EXIT_OK


def cmd_continue(conf, args):
    p = orbit_params(conf, "dde")
    start = find_periodic(p, parse_guess(args.guess, conf), N=conf.N, tol=conf.tol)
    branch = continue_branch(start, args.parameter, args.to, args.steps, stability=not args.no_floquet,
                             m=conf.floquet_m)
    rows = []
    for value, orbit, mu in zip(branch.values, branch.orbits, branch.multipliers):
        mod = float(np.max(np.abs(mu))) if mu is not None else math.nan
        rows.append((value, orbit.mean, orbit.residual, mod))
    meta = [f"parameter={args.parameter}", f"truncated={str(branch.truncated).lower()}"]
    if branch.diagnostic:
        meta.append(f"diagnostic={branch.diagnostic}")
    emit(csv_text(("value", "mean", "residual", "max_modulus"), rows, meta), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# checks


def _report(items):
    ok = True
    for ineq in items:
        tag = "PASS" if ineq.holds else "FAIL"
        ok &= ineq.holds
        print(f"{tag} {ineq.label}: lhs={ineq.lhs:.10g} rhs={ineq.rhs:.10g} margin={ineq.margin:.6g}")
    return ok


def check_hill(conf):
    p = conf.params
    if conf.hill_a is not None:
        h = HillCoefficients.constant(float(conf.hill_a), conf.hill_b, conf.c, p.period)
    else:
        if not isinstance(p.damping, Linear):
            raise OutsideTheorem("Hill check along an orbit needs linear damping")
        q = p.with_(d=0.0)
        orbit = find_periodic(q, equilibria(q.e, q.voltage.v0).x2, N=conf.N)
        h = HillCoefficients.from_orbit(q, orbit)
    return _report(hill_nondegenerate(h).checks)


def check_delay_continuation(conf):
    res = delay_continuation_case(conf.params)
    ok = True
    if res.gate:
        print("gate (either alternative):")
        gate_ok = any(g.holds for g in res.gate)
        _report(res.gate)
        ok &= gate_ok
    ok &= _report(res.inequalities)
    print(f"b_star = {res.b_star:.10g}")
    print(f"bdot_star = {res.bdot_star:.10g}")
    print(f"a_lower = {res.a_lower:.10g}")
    print(f"a_upper = {res.a_upper:.10g}")
    print(f"velocity_bound = {res.velocity_bound:.10g}")
    print(f"case = {res.case}")
    return ok and res.case != "none"


def check_squeeze(conf):
    p = conf.params
    if not isinstance(p.damping, SqueezeFilm):
        raise OutsideTheorem("squeeze check needs damping = squeeze")
    br = bracket_constants(p.e, p.voltage)
    try:
        flags = squeeze_conditions(p.damping.gamma, br, p.period)
    except NoLstarRoot as exc:
        flags = exc.partial
        print(f"note: {exc}")
    for k in ("N", "a_hat", "R", "M", "Lstar", "H"):
        v = getattr(flags, k)
        print(f"{k} = {'none' if v is None else format(v, '.10g')}")
    ok = _report([flags.m_condition])
    if flags.n_condition is None:
        print("FAIL N <= H(L*): L* undefined")
        return False
    return _report([flags.n_condition]) and ok


def check_hn_scan(conf, step=1e-2):
    p = conf.params
    eq = equilibria(p.e, p.voltage.v0)
    lin = linearize_at_equilibrium(p, eq.x2, conf.squeeze_slope)
    T = p.period
    worst, bad = math.inf, None
    for d in np.arange(0.0, T, step):
        r = is_nondegenerate_delay(lin.A, lin.B, T, float(d))
        worst = min(worst, r.min_scaled_modulus)
        if not r.ok and bad is None:
            bad = (float(d), r.witness)
    ok = bad is None
    tag = "PASS" if ok else "FAIL"
    extra = "" if ok else f" first failure d={bad[0]:.6g} n={bad[1]}"
    print(f"{tag} h_n(d) != 0 for d in [0, T) step {step:g}: min scaled |h_n|={worst:.6g}{extra}")
    return ok


CHECKS = {
    "hill": check_hill,
    "delay-continuation": check_delay_continuation,
    "squeeze": check_squeeze,
    "hn-scan": check_hn_scan,
}


def cmd_check(conf, args):
    ok = CHECKS[args.which](conf)
    print(f"RESULT {'pass' if ok else 'fail'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# reproduction of the simulation scenarios


def phase_portrait_scenarios(conf):
    """``(name, params, initial states)`` in displacement coordinates."""
    p = conf.params.with_(g1=0.0, g2=0.0, d=0.0)
    forced = p.with_(delta=0.1579)
    auto = p.with_(delta=0.0)
    return [
        ("forced_d0", forced, FORCED_ICS),
        ("forced_d1_g2m8", forced.with_(d=1.0, g2=-8.0), FORCED_ICS),
        ("forced_d80_g2p40", forced.with_(d=80.0, g2=40.0), FORCED_ICS),
        ("autonomous_d300_g2m100", auto.with_(d=300.0, g2=-100.0), AUTONOMOUS_ICS),
        ("autonomous_d300_g2m123", auto.with_(d=300.0, g2=-123.0), AUTONOMOUS_ICS),
    ]


def cmd_reproduce(conf, args):
    if args.what == "table2":
        nd = nondimensionalize(conf.physical)
        eq = equilibria(nd.e, conf.params.voltage.v0)
        emit(csv_text(("c", "e", "x1", "x2", "G1", "G2"), [(nd.c, nd.e, eq.x1, eq.x2, nd.G1, nd.G2)]),
             args.out)
        return EXIT_OK
    if args.what == "d0-sweep":
        emit(csv_text(SWEEP_HEADER, d0_sweep(conf)), args.out)
        return EXIT_OK
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    t_end = conf.t_end or 1000.0
    for name, params, ics in phase_portrait_scenarios(conf):
        step = conf.step or (min(params.period, params.d) if params.d > 0 else params.period) / 64.0
        for j, ic in enumerate(ics, 1):
            traj = integrate(params, ic, t_end, step, coords="displacement")
            write_atomic(os.path.join(outdir, f"{name}_ic{j}.csv"), trajectory_csv(traj))
            print(f"{name}_ic{j}.csv: {len(traj.t)} rows" + (" (pull-in)" if traj.pullin else ""))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="memsdelay", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_, out=True):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="flat JSON configuration file")
        if out:
            sp.add_argument("--out", help="output path (stdout when omitted)")
        return sp

    add("statics", "pull-in voltage, equilibria, classification and brackets", out=False)
    add("d0", "delay bound at the configured DC voltage; --out writes the v0 sweep")
    sp = add("simulate", "integrate the delayed system and write t,x,v")
    sp.add_argument("--d", type=float)
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--step", type=float)
    sp.add_argument("--history", help="'x,v', 'equilibrium', 'x1' or 'x2'")
    sp.add_argument("--coords", choices=("gap", "displacement"))
    sp = add("orbit", "periodic orbit coefficients and multipliers")
    sp.add_argument("--mode", choices=("ode", "dde"), default="dde")
    sp.add_argument("--guess", default="x2")
    sp = add("continue", "continue an orbit in g1, g2 or d")
    sp.add_argument("--parameter", choices=("g1", "g2", "d"), required=True)
    sp.add_argument("--to", type=float, required=True)
    sp.add_argument("--steps", type=int, default=20)
    sp.add_argument("--guess", default="x2")
    sp.add_argument("--no-floquet", action="store_true")
    sp = add("check", "nondegeneracy and gain-condition checks", out=False)
    sp.add_argument("which", choices=sorted(CHECKS))
    sp = add("reproduce", "regenerate the reference data series")
    sp.add_argument("--what", choices=("table2", "d0-sweep", "phase-portraits"), required=True)
    return ap


COMMANDS = {
    "statics": cmd_statics,
    "d0": cmd_d0,
    "simulate": cmd_simulate,
    "orbit": cmd_orbit,
    "continue": cmd_continue,
    "check": cmd_check,
    "reproduce": cmd_reproduce,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        conf = cfg.load(args.config)
        return COMMANDS[args.command](conf, args)
    except (cfg.ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PullInExceeded, VoltageRangeInvalid, NotAnEquilibrium) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATIC
    except (IntegratorError, HistoryTooShort) as exc:
        print(f"integrator error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    except (NoConvergence, NegativeGapOrbit, NotConverged) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OutsideTheorem as exc:
        print(f"not applicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE


if __name__ == "__main__":
    sys.exit(main())
