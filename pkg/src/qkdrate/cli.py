"""qkdrate command line.

Exit codes: 0 viable (or success), 2 nonviable, 1 usage or runtime error.
"""

import argparse
import configparser
from dataclasses import replace
import io
import math
import os
from pathlib import Path
import sys

import numpy as np

from qkdrate.auth_cost import AuthParams, auth_total
from qkdrate.channel_loss import FT, FiberParams, FreeSpaceGeometry, TurbulenceModel, total_free_space_alpha
from qkdrate.ec_sim import TRACE_COLUMNS, run_error_correction, simulate_transmission
from qkdrate.loads import CommParams, ComputeParams, ECParams, comm_load, comp_load, ec_parity_leakage
from qkdrate.scenario_engine import (
    GEO_ALT,
    LEO_ALT,
    PRESETS,
    SWEEP_COLUMNS,
    SWEEP_VARS,
    FiberLink,
    Scenario,
    SweepSpec,
    fmt,
    get_preset,
    report,
    rows_to_csv,
    run_scenario,
    sweep,
)
from qkdrate.sift_model import ChannelParams

EXIT_OK, EXIT_ERROR, EXIT_NONVIABLE = 0, 1, 2
CONFIG_ENV = "QKDRATE_CONFIG_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------- config

# config key -> (Scenario field, parser)
_BOOL = lambda v: v.strip().lower() in ("1", "true", "yes", "on")  # noqa: E731
_OPT_FLOAT = lambda v: None if v.strip().lower() in ("", "none") else float(v)  # noqa: E731

SCENARIO_KEYS = {
    "name": ("name", str),
    "eta": ("eta", float),
    "r_c": ("r_c", float),
    "r_d": ("r_d", float),
    "tau_s": ("tau", float),
    "m_pulses": ("m", float),
    "alpha_db": ("alpha_db", _OPT_FLOAT),
    "mcs": ("mcs", _BOOL),
    "direct_strength_factor": ("direct_strength_factor", float),
    "x": ("x", float),
    "g_bits": ("g", int),
    "epsilon": ("epsilon", float),
    "mu_fixed": ("mu_fixed", _OPT_FLOAT),
    "mu_lo": (None, float),
    "mu_hi": (None, float),
}
FIBER_KEYS = {
    "length_km": "L_fiber",
    "loss_db_per_km": "A",
    "kappa_db": "kappa",
    "cable": "cable",
}


def resolve_config_path(path):
    p = Path(path)
    if p.exists() or p.is_absolute():
        return p
    base = os.environ.get(CONFIG_ENV)
    if base and (Path(base) / p).exists():
        return Path(base) / p
    return p


def load_config(path) -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    p = resolve_config_path(path)
    if not cp.read(p):
        raise UsageError(f"cannot read config {path}")
    unknown_sections = set(cp.sections()) - {"scenario", "fiber"}
    if unknown_sections:
        raise UsageError(f"unknown config sections: {sorted(unknown_sections)}")
    if "scenario" not in cp:
        raise UsageError("config needs a [scenario] section")
    sec = cp["scenario"]
    extra = set(sec) - set(SCENARIO_KEYS) - {"preset"}
    if extra:
        raise UsageError(f"unknown keys in [scenario]: {sorted(extra)}")
    if "preset" in sec:
        s = get_preset(sec["preset"])
    else:
        if "alpha_db" not in sec:
            raise UsageError("config without a preset must set alpha_db")
        s = Scenario(sec.get("name", "custom"), alpha_db=float(sec["alpha_db"]))
    kw = {}
    for key, (fld, conv) in SCENARIO_KEYS.items():
        if key in sec and fld is not None:
            kw[fld] = conv(sec[key])
    if "mu_lo" in sec or "mu_hi" in sec:
        kw["bracket"] = (float(sec.get("mu_lo", s.bracket[0])), float(sec.get("mu_hi", s.bracket[1])))
    s = replace(s, **kw)
    if "fiber" in cp:
        fsec = cp["fiber"]
        extra = set(fsec) - set(FIBER_KEYS)
        if extra:
            raise UsageError(f"unknown keys in [fiber]: {sorted(extra)}")
        link = s.link if isinstance(s.link, FiberLink) else FiberLink(FiberParams(0.0))
        fkw = {FIBER_KEYS[k]: float(v) for k, v in fsec.items() if k != "cable"}
        link = replace(link, fiber=replace(link.fiber, **fkw))
        if "cable" in fsec:
            link = replace(link, cable=fsec["cable"].strip())
        s = replace(s, link=link, alpha_db=None if "alpha_db" not in sec else s.alpha_db)
    return s


def emit_config(s: Scenario, preset=None):
    cp = configparser.ConfigParser(interpolation=None)
    sec = {}
    if preset:
        sec["preset"] = preset
    for key, (fld, _) in SCENARIO_KEYS.items():
        if fld is None:
            continue
        v = getattr(s, fld)
        sec[key] = "none" if v is None else (repr(v) if isinstance(v, float) else str(v))
    sec["mu_lo"] = repr(float(s.bracket[0]))
    sec["mu_hi"] = repr(float(s.bracket[1]))
    cp["scenario"] = sec
    if isinstance(s.link, FiberLink):
        f = s.link.fiber
        cp["fiber"] = {"length_km": repr(f.L_fiber), "loss_db_per_km": repr(f.A), "kappa_db": repr(f.kappa), "cable": s.link.cable}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


# ---------------------------------------------------------------- helpers

def _add_scenario_args(sp):
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--scenario", help="preset name (see 'scenario list')")
    src.add_argument("--config", help="config file; relative paths also searched in $" + CONFIG_ENV)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--alpha-db", type=float)
    sp.add_argument("--rc", type=float)
    sp.add_argument("--rd", type=float)
    sp.add_argument("--tau", type=float, help="bit cell period, s")
    sp.add_argument("--m", type=float, help="pulses per block")
    sp.add_argument("--mcs", action="store_true", help="discard multi-click cells")
    sp.add_argument("--mu", type=float, help="evaluate at this photon number instead of optimizing")


def _scenario_from_args(a):
    if a.scenario:
        try:
            s, preset = get_preset(a.scenario), a.scenario
        except KeyError as e:
            raise UsageError(str(e.args[0])) from None
    elif a.config:
        s, preset = load_config(a.config), None
    else:
        raise UsageError("one of --scenario or --config is required")
    kw = {}
    for attr, fld in (("eta", "eta"), ("alpha_db", "alpha_db"), ("rc", "r_c"), ("rd", "r_d"), ("tau", "tau"), ("m", "m"), ("mu", "mu_fixed")):
        v = getattr(a, attr)
        if v is not None:
            kw[fld] = v
    if a.mcs:
        kw["mcs"] = True
    return replace(s, **kw), preset


def _count(text):
    v = float(text)
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"not a positive whole number: {text!r}")
    return int(v)


def _parse_range(text):
    """'lo:hi:step' (inclusive) or a comma list."""
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        if step <= 0 or hi < lo:
            raise UsageError(f"bad range {text!r}")
        k = int(math.floor((hi - lo) / step + 1e-9))
        return tuple(float(lo + i * step) for i in range(k + 1))
    return tuple(sorted(float(v) for v in text.split(",")))


def _write(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_rate(a):
    s, preset = _scenario_from_args(a)
    if a.emit_config:
        _write(emit_config(s, preset), a.out)
        return EXIT_OK
    res = run_scenario(s)
    _write(report(res), a.out)
    return EXIT_OK if res.viable else EXIT_NONVIABLE


def cmd_optimize_mu(a):
    s, _ = _scenario_from_args(a)
    res = run_scenario(s)
    o = res.optimum
    row = dict(mu_opt=o.mu, S_opt_bits_per_pulse=o.S, R_opt_bits_per_s=o.R, viable=int(o.viable))
    _write(rows_to_csv([row], tuple(row)), a.out)
    return EXIT_OK if o.viable else EXIT_NONVIABLE


GEOMETRIES = {
    "leo_zenith": lambda d: (FreeSpaceGeometry(1550e-9, 0.3, d, LEO_ALT), TurbulenceModel(), "ground_LEO"),
    "leo_45": lambda d: (FreeSpaceGeometry(1550e-9, 0.3, d, LEO_ALT, 0.0, math.pi / 4), TurbulenceModel(), "ground_LEO"),
    "aircraft_leo": lambda d: (FreeSpaceGeometry(1550e-9, 0.3, d, LEO_ALT, 35000 * FT), TurbulenceModel("none"), "35000ft_LEO"),
    "geo_13500ft": lambda d: (FreeSpaceGeometry(1550e-9, 0.3, d, GEO_ALT, 13500 * FT), TurbulenceModel("none"), "13500ft_GEO"),
    "geo_35000ft": lambda d: (FreeSpaceGeometry(1550e-9, 0.3, d, GEO_ALT, 35000 * FT), TurbulenceModel("none"), "35000ft_GEO"),
}
LOSS_COLUMNS = (
    "D_B_m", "static_db", "beam_spread_db", "beam_wander_db", "scintillation_db",
    "optics_package_db", "total_db", "alpha",
)


def cmd_loss(a):
    rows = []
    for d in _parse_range(a.db):
        g, turb, key = GEOMETRIES[a.geometry](d)
        if a.turbulence:
            turb = TurbulenceModel(a.turbulence)
        b = total_free_space_alpha(g, turb, key, a.weather, optics_package_db=a.optics_db)
        rows.append(dict(
            D_B_m=d, static_db=b.static, beam_spread_db=b.beam_spread, beam_wander_db=b.beam_wander,
            scintillation_db=b.scintillation, optics_package_db=b.optics_package,
            total_db=b.total_db, alpha=b.alpha_linear,
        ))
    _write(rows_to_csv(rows, LOSS_COLUMNS), a.out)
    return EXIT_OK


def cmd_loads(a):
    e0 = a.e_T0 if a.e_T0 is not None else 0.01 * a.n
    ec = ECParams(a.n, e0, a.rho, a.N2)
    tags = AuthParams(a.g, a.g, a.g)
    c = comm_load(a.n, a.m, ec, CommParams(a.m_p, a.f_o, a.chi), tags, a.tau)
    L = comp_load(a.n, a.m, ec, ComputeParams(a.w, a.L0), tags, a.tau, exact=a.exact)
    auth = auth_total(a.n, a.m, tags)
    rows = [
        dict(quantity="comm_rate_B_to_A", value=c.R_BA, unit="bits/s"),
        dict(quantity="comm_rate_A_to_B", value=c.R_AB, unit="bits/s"),
        dict(quantity="comm_bits_B_to_A", value=c.C_BA, unit="bits/block"),
        dict(quantity="comm_bits_A_to_B", value=c.C_AB, unit="bits/block"),
        dict(quantity="compute_ops", value=L.ops, unit="ops/block"),
        dict(quantity="compute_quadratic_ops", value=L.quadratic, unit="ops/block"),
        dict(quantity="compute_rate", value=L.rate, unit="ops/s"),
        dict(quantity="auth_cost", value=auth, unit="bits/block"),
        dict(quantity="auth_rate", value=auth / (a.m * a.tau), unit="bits/s"),
        dict(quantity="ec_parity_bits", value=ec_parity_leakage(ec), unit="bits/block"),
    ]
    _write(rows_to_csv(rows, ("quantity", "value", "unit")), a.out)
    return EXIT_OK


def cmd_sweep(a):
    s, _ = _scenario_from_args(a)
    rows = sweep(s, SweepSpec(a.var, _parse_range(a.grid)))
    _write(rows_to_csv(rows, SWEEP_COLUMNS), a.out)
    return EXIT_OK


def cmd_simulate(a):
    ch = ChannelParams(10 ** (a.alpha_db / 10), a.rc, a.rd, a.eta, a.mu, a.m)
    seeds = np.random.SeedSequence(a.seed).spawn(a.trials)
    rows = []
    for t, ss in enumerate(seeds):
        sim_seed, ec_seed = ss.spawn(2)
        tr = simulate_transmission(ch, sim_seed, mcs=a.mcs, keep_records=0)
        row = dict(trial=t, n_emp=tr.n_emp, e_emp=tr.e_emp, parity_bits=0, N1_obs=0, N2n_obs=0, N2f_obs=0, residual=0)
        if tr.n_emp >= 2 and tr.e_emp < tr.n_emp:
            r = run_error_correction(tr.alice_sift, tr.bob_sift, ECParams(tr.n_emp, tr.e_emp, a.rho, a.N2), ec_seed)
            row.update(parity_bits=r.parity_bits_exchanged, N1_obs=r.N1_obs, N2n_obs=r.N2n_obs,
                       N2f_obs=r.N2f_obs, residual=r.residual_errors)
        rows.append(row)
    _write(rows_to_csv(rows, TRACE_COLUMNS), a.out)
    return EXIT_OK


def cmd_scenario_list(a):
    rows = [dict(name=k, alpha_db=fmt(10 * math.log10(s.alpha())), m=fmt(s.m), tau_s=fmt(s.tau)) for k, s in sorted(PRESETS.items())]
    _write(rows_to_csv(rows, ("name", "alpha_db", "m", "tau_s")), a.out)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="qkdrate", description="BB84 secrecy-rate calculator")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("rate", help="full report for a scenario")
    _add_scenario_args(sp)
    sp.add_argument("--emit-config", action="store_true", help="print a config file reproducing this run")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_rate)

    sp = sub.add_parser("optimize-mu", help="optimal photon number as CSV")
    _add_scenario_args(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_optimize_mu)

    sp = sub.add_parser("loss", help="loss budget against receiver aperture")
    sp.add_argument("--geometry", choices=sorted(GEOMETRIES), default="leo_zenith")
    sp.add_argument("--db", default="0.3:1.6:0.05", help="receiver aperture range lo:hi:step, m")
    sp.add_argument("--weather", default="clear", choices=("clear", "light_rain", "moderate_rain"))
    sp.add_argument("--turbulence", choices=("HV57", "CLEAR1", "none"))
    sp.add_argument("--optics-db", type=float, default=-5.0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_loss)

    sp = sub.add_parser("loads", help="communication, computation and authentication loads")
    sp.add_argument("--n", type=float, required=True, help="sifted bits per block")
    sp.add_argument("--m", type=float, required=True, help="pulses per block")
    sp.add_argument("--tau", type=float, default=1e-10, help="bit cell period, s")
    sp.add_argument("--e-T0", type=float, help="errors per block (default 1%% of n)")
    sp.add_argument("--rho", type=float, default=0.5)
    sp.add_argument("--N2", type=int, default=30)
    sp.add_argument("--m-p", type=int, default=1000, help="packet payload, bits")
    sp.add_argument("--f-o", type=int, default=400, help="frame overhead, bits")
    sp.add_argument("--chi", type=float, default=2.0)
    sp.add_argument("--w", type=int, default=64)
    sp.add_argument("--L0", type=float, default=1e6)
    sp.add_argument("--g", type=int, default=30)
    sp.add_argument("--exact", action="store_true", help="itemized compute load")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_loads)

    sp = sub.add_parser("sweep", help="rate over a grid of one parameter")
    _add_scenario_args(sp)
    sp.add_argument("--var", required=True, choices=SWEEP_VARS)
    sp.add_argument("--grid", required=True, help="lo:hi:step or comma list")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("simulate", help="Monte Carlo transmission plus reconciliation")
    sp.add_argument("--m", type=_count, default=1_000_000, help="bit cells, e.g. 1e6")
    sp.add_argument("--mu", type=float, default=0.5)
    sp.add_argument("--eta", type=float, default=0.5)
    sp.add_argument("--alpha-db", type=float, default=-10.0)
    sp.add_argument("--rc", type=float, default=0.01)
    sp.add_argument("--rd", type=float, default=0.0)
    sp.add_argument("--mcs", action="store_true")
    sp.add_argument("--rho", type=float, default=0.5)
    sp.add_argument("--N2", type=int, default=30)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("scenario", help="scenario presets")
    ssub = sp.add_subparsers(dest="action", parser_class=_Parser)
    lp = ssub.add_parser("list")
    lp.add_argument("--out")
    lp.set_defaults(func=cmd_scenario_list)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        if not hasattr(a, "func"):
            parser.print_usage(sys.stderr)
            return EXIT_ERROR
        return a.func(a)
    except UsageError as e:
        print(f"qkdrate: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, KeyError, ArithmeticError, OSError) as e:
        print(f"qkdrate: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
