"""Command-line front end.

Every subcommand reads one INI config (see config.py and the README for
the grammar), writes CSV artifacts next to a JSON summary on stdout, and
exits 0 on success, 2 on validation errors, 3 on resource-budget errors,
4 on numeric non-convergence. The JSON embeds the config file's sha256 and
any flag overrides, so identical invocations produce byte-identical output.
"""

import argparse
import json
import math
import os
import sys
import warnings

import numpy as np

from .config import load_config
from .diagnostics import (amenability_report, divergence_probe, gibbs_verify,
                          half_bound_check, pressure_inequality_check,
                          symmetric_on_average_statistic)
from .errors import FreeshiftError, UndefinedRatioError, ValidationError
from .potentials import random_inverse_symmetric
from .pressure import fiber_partition, full_pressure, restricted_pressure
from .spectra import (bowen_dimension, cogrowth, delta, free_energy_curve,
                      legendre)
from .words import Alphabet


def _point(p):
    return {"value": p.t, "sigma": p.sigma, "method": p.method,
            "residual": p.residual}


def _pressure(pr):
    return {"value": pr.value, "sigma": pr.sigma, "method": pr.method,
            "residual": pr.residual}


def _need_quotient(cfg, command):
    if cfg.quotient is None:
        raise ValidationError(
            f"the {command} subcommand needs a [quotient] section")


def cmd_pressure(cfg, args):
    res = {"full": _pressure(full_pressure(cfg.psi, tol=cfg.tol_eigen))}
    if cfg.quotient is not None:
        res["restricted"] = _pressure(restricted_pressure(
            cfg.psi, cfg.quotient, n_max=cfg.n_max, tol=cfg.tol_eigen))
    return res, []


def cmd_delta(cfg, args):
    kw = dict(u_tol=cfg.tol_bisection, tol=cfg.tol_eigen)
    res = {"delta": _point(delta(cfg.zeta, **kw))}
    if cfg.quotient is not None:
        res["delta_N"] = _point(delta(cfg.zeta, quotient=cfg.quotient,
                                      n_max=cfg.n_max, **kw))
    return res, []


def cmd_cogrowth(cfg, args):
    _need_quotient(cfg, "cogrowth")
    c = cogrowth(cfg.quotient, n_max=cfg.n_max, tol=cfg.tol_eigen)
    return {"eta": c.eta, "sigma": c.sigma, "method": c.method,
            "fiber_rate": c.fiber_rate, "ambient_rate": c.ambient_rate}, []


def cmd_dimension(cfg, args):
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        p = bowen_dimension(cfg.zeta, tol=cfg.tol_eigen)
    msgs = [str(w.message) for w in rec]
    return {"dimension": _point(p),
            "ambient_warning": msgs[0] if msgs else None}, []


def _spectrum_one(cfg, args, quotient, tag):
    curve = free_energy_curve(
        cfg.psi, cfg.zeta, betas=cfg.betas, quotient=quotient,
        n_max=cfg.n_max, threads=args.threads, u_tol=cfg.tol_bisection,
        tol=cfg.tol_eigen)
    spec = legendre(curve, n_alphas=cfg.alpha_count)
    f1 = os.path.join(cfg.out_dir, f"free_energy_{tag}.csv")
    f2 = os.path.join(cfg.out_dir, f"spectrum_{tag}.csv")
    curve.write_csv(f1)
    spec.write_csv(f2)
    summary = {
        "t0": spec.t0,
        "alpha_minus": spec.alpha_minus,
        "alpha_plus": spec.alpha_plus,
        "degenerate": spec.flags == ["point"],
        "convexity_margin": curve.convexity_margin(),
        "files": [os.path.basename(f1), os.path.basename(f2)],
    }
    return summary, [f1, f2]


def cmd_spectrum(cfg, args):
    os.makedirs(cfg.out_dir, exist_ok=True)
    res, files = {}, []
    s, f = _spectrum_one(cfg, args, None, "full")
    res["full"] = s
    files += f
    if cfg.quotient is not None:
        s, f = _spectrum_one(cfg, args, cfg.quotient, "quotient")
        res["restricted"] = s
        files += f
    return res, files


def cmd_induced_edges(cfg, args):
    _need_quotient(cfg, "induced-edges")
    words = cfg.quotient.first_return_words(cfg.return_length)
    alphabet = Alphabet(cfg.d)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "induced_edges.csv")
    with open(path, "w", newline="") as fh:
        fh.write("length,word\n")
        for w in words:
            fh.write(f"{len(w)},{alphabet.word_name(w)}\n")
    counts = {}
    for w in words:
        counts[len(w)] = counts.get(len(w), 0) + 1
    return {"max_length": cfg.return_length, "count": len(words),
            "count_by_length": {str(k): v for k, v in sorted(counts.items())},
            "files": [os.path.basename(path)]}, [path]


def cmd_partition(cfg, args):
    _need_quotient(cfg, "partition")
    series = fiber_partition(cfg.psi, cfg.quotient, cfg.n_max,
                             max_states=cfg.max_states)
    p = series.period
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "partition.csv")
    rows = 0
    with open(path, "w", newline="") as fh:
        fh.write("n,a_n,log_a_n\n")
        for n, lv in zip(series.lengths, series.log_values):
            on_lattice = n % p == 0
            if not on_lattice and not math.isfinite(lv):
                continue        # empty fibers off the period lattice
            a = math.exp(lv) if math.isfinite(lv) else 0.0
            log_txt = f"{lv:.12g}" if math.isfinite(lv) else "-inf"
            fh.write(f"{n},{a:.12g},{log_txt}\n")
            rows += 1
    return {"period": p, "n_max": cfg.n_max, "rows": rows,
            "log_mode": series.meta.get("log_mode", False),
            "files": [os.path.basename(path)]}, [path]


def _diag_betas(cfg, cap=9):
    if len(cfg.betas) <= cap:
        return cfg.betas
    idx = np.unique(np.round(np.linspace(0, len(cfg.betas) - 1,
                                         cap)).astype(int))
    return cfg.betas[idx]


def cmd_diagnose(cfg, args):
    _need_quotient(cfg, "diagnose")
    q = cfg.quotient
    betas = _diag_betas(cfg)
    reports = {}
    notes = []
    reports["amenability"] = amenability_report(
        q, cfg.psi, cfg.zeta, betas, n_max=cfg.n_max,
        threads=args.threads).to_dict()
    reports["half_bound"] = half_bound_check(
        q, cfg.psi, cfg.zeta, betas=betas, n_max=cfg.n_max,
        threads=args.threads).to_dict()
    if cfg.psi.is_inverse_symmetric(tol=0.0):
        f_sym = cfg.psi
    else:
        from .potentials import Potential
        f_sym = Potential.constant(cfg.d, 0.0)
        notes.append("psi is not inverse-symmetric; the pressure "
                     "inequality was checked at f = 0 instead")
    reports["pressure_inequality"] = pressure_inequality_check(
        q, f_sym, n_max=cfg.n_max).to_dict()
    reports["divergence"] = divergence_probe(
        q, cfg.psi, n_max=max(cfg.n_max, 36)).to_dict()
    reps = []
    for k in range(cfg.d):
        g = q.letter_image(2 * k)
        if g != q.identity and g not in reps:
            reps.append(g)
    if not reps:
        reps = [q.identity]
    try:
        stat = symmetric_on_average_statistic(
            q, cfg.psi, reps, cfg.horizon,
            n_max=max(cfg.n_max, cfg.horizon))
        reports["symmetric_on_average"] = {
            "value": stat.value, "lam_hat": stat.lam_hat,
            "horizon": stat.horizon,
            "per_g": {str(g): r for g, r in stat.per_g.items()},
        }
    except UndefinedRatioError as exc:
        reports["symmetric_on_average"] = {"error": str(exc)}
        notes.append("symmetric-on-average ratio undefined at this horizon")
    if cfg.psi.depth == 1 and float(np.ptp(cfg.psi.values)) > 0:
        f_gibbs = cfg.psi
        gibbs_note = "gibbs check uses psi"
    else:
        f_gibbs = random_inverse_symmetric(cfg.d, seed=cfg.seed)
        gibbs_note = (f"gibbs check uses a seeded random inverse-symmetric "
                      f"depth-1 potential (seed {cfg.seed})")
    notes.append(gibbs_note)
    _, rep = gibbs_verify(f_gibbs, max_len=cfg.gibbs_len,
                          tol=cfg.tol_eigen)
    reports["gibbs"] = rep.to_dict()
    verified = all("verdict" not in r or _reverify(r)
                   for r in reports.values())
    return {"reports": reports, "notes": notes,
            "self_verified": verified}, []


def _reverify(report_dict):
    from .diagnostics import VerdictReport
    rep = VerdictReport(report_dict["rule"], report_dict["quantities"],
                        report_dict["slacks"], report_dict["verdict"],
                        report_dict["notes"])
    return rep.verify()


_COMMANDS = {
    "pressure": (cmd_pressure, "full and restricted pressure of psi"),
    "delta": (cmd_delta, "critical exponents delta and delta_N"),
    "cogrowth": (cmd_cogrowth, "cogrowth eta = delta_N/delta at zeta = -1"),
    "spectrum": (cmd_spectrum,
                 "free-energy and multifractal spectrum curves (CSV)"),
    "dimension": (cmd_dimension, "Bowen dimension of the zeta geometry"),
    "induced-edges": (cmd_induced_edges,
                      "first-return words of the quotient (CSV)"),
    "partition": (cmd_partition, "fiber partition sums a_n (CSV)"),
    "diagnose": (cmd_diagnose, "all verdict reports (amenability, bounds, "
                               "divergence, symmetry, Gibbs)"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="path to the INI run configuration")
    common.add_argument("--out", help="output directory (overrides config)")
    common.add_argument("--threads", type=int, default=os.cpu_count(),
                        help="worker pool size (default: machine cores)")
    common.add_argument("--n-max", type=int, dest="n_max",
                        help="override [budgets] n_max")
    common.add_argument("--beta-range", dest="beta_range",
                        help="override the beta grid as lo:hi:step")
    common.add_argument("--tolerance", type=float,
                        help="override the bisection tolerance")
    parser = argparse.ArgumentParser(
        prog="freeshift",
        description="thermodynamic formalism on free-group subshifts: "
                    "pressure, dimension, and amenability diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in _COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def _apply_overrides(cfg, args):
    if args.out is not None:
        cfg.out_dir = args.out
        cfg.overrides["out"] = args.out
    if args.n_max is not None:
        if args.n_max < 1:
            raise ValidationError(f"--n-max must be >= 1, got {args.n_max}")
        cfg.n_max = args.n_max
        cfg.overrides["n_max"] = args.n_max
    if args.beta_range is not None:
        parts = args.beta_range.split(":")
        if len(parts) != 3:
            raise ValidationError(
                f"--beta-range expects lo:hi:step, got {args.beta_range!r}")
        lo, hi, step = (float(x) for x in parts)
        if not (hi > lo and step > 0):
            raise ValidationError(f"bad beta range {args.beta_range!r}")
        count = int(round((hi - lo) / step))
        cfg.betas = np.linspace(lo, hi, count + 1)
        cfg.overrides["beta_range"] = args.beta_range
    if args.tolerance is not None:
        if args.tolerance <= 0:
            raise ValidationError("--tolerance must be positive")
        cfg.tol_bisection = args.tolerance
        cfg.overrides["tolerance"] = args.tolerance


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        handler, _ = _COMMANDS[args.command]
        result, files = handler(cfg, args)
        payload = {
            "command": args.command,
            "config_hash": cfg.config_hash,
            "overrides": cfg.overrides,
            "d": cfg.d,
            "quotient": cfg.describe_quotient(),
        }
        payload.update(result)
        print(json.dumps(payload, indent=2))
        return 0
    except FreeshiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps({"error": {
            "type": type(exc).__name__,
            "message": str(exc),
            "exit_code": exc.exit_code,
        }}, indent=2))
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
