"""``barrier-lab`` command line.

Exit codes: 0 success, 2 parameter error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import _backend, analytic1d, config as cfg, hitting, limits, membrane, pde2d, sdepath, spectral
from .coefficients import CutoffProfile, ModelParams, ParameterError
from .output import Manifest, dumps, write_csv, write_jsonl
from .rng import DEFAULT_SEED

EXIT_OK, EXIT_PARAM, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ParameterError(f"{self.prog}: {message}")


def _seed(args, conf=None):
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    if conf is not None and conf.settings.get("seed") is not None:
        return int(conf.settings["seed"])
    return DEFAULT_SEED


def _pick(args_val, conf, key, default=None):
    if args_val is not None:
        return args_val
    if conf is not None and conf.settings.get(key) is not None:
        return conf.settings[key]
    if default is None:
        raise ParameterError(f"--{key.replace('_', '-')} is required (flag or config key {key!r})")
    return default


def _meta(conf, **kw):
    m = {}
    if conf is not None:
        p = conf.params
        m.update(eps=p.eps, kappa_eps=p.kappa_eps, kappa_T=p.kappa_T, alpha=p.alpha, K=p.K,
                 T_plus=p.T_plus, profile=conf.profile.kind)
        if conf.profile.eps is not None:
            m["profile_eps"] = conf.profile.eps
    m.update(kw)
    return m


def _emit(obj):
    print(dumps(obj))


# ---------------------------------------------------------------------------
# subcommands

def cmd_profile(args, man):
    conf = cfg.load_config(args.config)
    man.config = conf.snapshot()
    n = int(_pick(args.grid_n, conf, "grid_n"))
    if n < 2:
        raise ParameterError("--grid-n must be >= 2")
    sp = analytic1d.stationary_profile(conf.params, conf.profile, np.linspace(-1.0, 1.0, n))
    write_csv(man.add(args.out), ["x", "T"], zip(sp.xs, sp.temps),
              _meta(conf, flux=sp.flux, theta=sp.theta, t_star=sp.t_star))
    _emit(dict(flux=sp.flux, theta=sp.theta, t_star=sp.t_star, t_star_formula=sp.t_star_formula,
               out=args.out))


def cmd_flux(args, man):
    conf = cfg.load_config(args.config)
    man.config = conf.snapshot()
    p = conf.params
    res = dict(flux=analytic1d.flux(p, conf.profile),
               resistance=analytic1d.resistance(p, conf.profile),
               c_eff=analytic1d.effective_conductivity(p))
    if args.out:
        write_jsonl(man.add(args.out), [res])
    _emit(res)


def cmd_hitprob(args, man):
    mp = hitting.MembraneParams(args.beta_plus, args.beta_minus)
    if args.walls:
        if (args.a, args.b) != (-1.0, 1.0):
            raise ParameterError("--walls fixes a = -1 and b = 1")
        p_left = hitting.hit_prob_reflected_system(mp, args.x)
        res = dict(p_left=p_left, p_right=1.0 - p_left, formula_path="reflected_system")
    else:
        q = hitting.HittingQuery(args.a, args.b, args.x, mp)
        res = dict(p_left=hitting.hit_prob_membrane(q), p_right=hitting.hit_prob_membrane_complement(q),
                   formula_path="closed_form")
    _emit(res)


def cmd_snob(args, man):
    seed = _seed(args)
    man.seed = seed
    mp = hitting.MembraneParams(args.beta_plus, args.beta_minus)
    spec = membrane.ProcessSpec("snob_walls" if args.walls else "snob", mp)
    a, b = (-1.0, 1.0) if args.walls else (args.a, args.b)
    batches = membrane.mc_exit_batches(spec, a, b, args.x0, args.paths, args.step, seed,
                                       args.t_max, args.batch_size)
    total = batches[0]
    for s in batches[1:]:
        total = total.merge(s)
    if args.walls:
        exact = hitting.hit_prob_reflected_system(mp, args.x0)
    else:
        exact = hitting.hit_prob_membrane(hitting.HittingQuery(a, b, args.x0, mp))
    objs = [dict(kind="batch", index=i, **s.to_dict()) for i, s in enumerate(batches)]
    summary = dict(kind="summary", exact=exact, z=(total.estimate - exact) / total.std_error
                   if total.std_error > 0 else 0.0, x0=args.x0, a=a, b=b, **total.to_dict())
    objs.append(summary)
    if args.out:
        write_jsonl(man.add(args.out), objs)
    _emit(summary)


def cmd_sde(args, man):
    conf = cfg.load_config(args.config)
    man.config = conf.snapshot()
    seed = _seed(args, conf)
    man.seed = seed
    p = conf.params
    n = int(_pick(args.paths, conf, "paths"))
    h = float(_pick(args.step, conf, "step"))
    t_max = float(_pick(None, conf, "t_max", 50.0))
    bs = int(args.batch_size or n)
    objs = []
    if args.fk:
        key, _, val = args.fk.partition("=")
        if key.strip() != "t":
            raise ParameterError("--fk expects t=<time>")
        t = float(val)
        th = cfg.theta0_function(conf.settings["theta0"], p.T_plus)
        total = None
        for off in range(0, n, bs):
            m = min(bs, n - off)
            res = sdepath._run(sdepath.MODE_XEPS, p, conf.profile, args.x0, args.y0, h, t,
                               not args.no_bridge, seed, off, m, False)
            vals = np.where(res["code"] == -1, p.T_plus, 0.0)
            inside = res["code"] == 0
            vals[inside] = th(res["x"][inside], res["y"][inside])
            s = membrane.MCSummary.from_values(vals, seed, h, dict(n_inside=int(inside.sum())))
            objs.append(dict(kind="batch", path_offset=off, **s.to_dict()))
            total = s if total is None else total.merge(s)
        summary = dict(kind="summary", quantity="feynman_kac", t=t, x0=args.x0, y0=args.y0,
                       theta0=conf.settings["theta0"], **total.to_dict())
    else:
        total = None
        for off in range(0, n, bs):
            m = min(bs, n - off)
            res = sdepath.sample_paths(p, conf.profile, args.x0, m, h, seed, args.y0, t_max,
                                       args.tilde, not args.no_bridge, off)
            s = membrane.MCSummary.from_values(res["code"] == -1, seed, h,
                                               dict(n_timeout=int((res["code"] == 0).sum())))
            objs.append(dict(kind="batch", path_offset=off, **s.to_dict()))
            total = s if total is None else total.merge(s)
        exact = sdepath.exit_prob_exact(p, conf.profile, args.x0)
        summary = dict(kind="summary", quantity="exit_left", tilde=bool(args.tilde), x0=args.x0,
                       exact=exact, z=(total.estimate - exact) / total.std_error if total.std_error > 0 else 0.0,
                       **total.to_dict())
    objs.append(summary)
    if args.out:
        write_jsonl(man.add(args.out), objs)
    _emit(summary)


def _parse_list(text):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ParameterError(f"cannot parse list {text!r}") from None


def cmd_limits(args, man):
    eps = _parse_list(args.eps_list) if args.eps_list else [1e-2, 1e-3, 1e-4]
    name = args.schedule or ("critical" if args.alpha >= 0.5 else "scaling")
    if name == "scaling":
        sch = limits.Schedule.power(args.K ** -2, -2.0)
    elif name == "critical":
        sch = limits.Schedule.log_critical(args.K) if args.alpha == 0.5 else limits.Schedule.critical(args.alpha, args.K)
    elif name == "inverse":
        sch = limits.Schedule.power(1.0, -1.0)
    else:
        raise ParameterError(f"unknown schedule {name!r}")
    rows = limits.key_identity_curve(alpha=args.alpha, K=args.K, eps_list=eps, schedule=sch)
    reg = limits.classify_regime(args.alpha, sch)
    summary = reg.to_dict()
    summary.update(alpha=args.alpha, K=args.K, schedule=sch.label,
                   beta_stated=limits.beta_limit(args.alpha, args.K) if args.alpha >= 0.5 else None)
    if args.alpha < 0.5:
        summary.update(p_limit_stated=limits.p_limit_stated(args.alpha))
    if args.out:
        write_csv(man.add(args.out), ["eps", "log_ratio", "p_bar", "p_over_eps"],
                  [(r.eps, r.log_ratio, r.p_bar, r.p_over_eps) for r in rows],
                  dict(alpha=args.alpha, K=args.K, schedule=sch.label))
        base, _ = os.path.splitext(args.out)
        write_jsonl(man.add(base + "_summary.jsonl"), [summary])
    _emit(summary)


def _spectral_setup(args):
    if args.config:
        conf = cfg.load_config(args.config)
        return conf, conf.params, conf.profile
    eps = args.eps
    P = ModelParams.scaling_law(eps, K=1.0, kappa_T=0.1)
    return None, P, CutoffProfile.arctan_example()


def cmd_spectral(args, man):
    conf, P, prof = _spectral_setup(args)
    if conf is not None:
        man.config = conf.snapshot()
    sset = spectral.build_index_set(args.N)
    rb = spectral.remainder_bound(sset, P, prof, probe=args.probe_grid)
    rows = []
    for i, x in enumerate(rb["xs"]):
        cd = spectral.covariance_diagonal(sset, P, prof, float(x), 0.0)
        q = cd.q_bar
        rows.append((x, q[0, 0], q[1, 1], q[0, 1], float(rb["norms"][i].max()), cd.chibar2))
    summary = dict(N=args.N, card_pp=sset.card_pp, card=sset.card,
                   card_pp_ratio=sset.card_pp / spectral.card_asymptotic(args.N),
                   anisotropy=spectral.lattice_anisotropy(sset), r_measured=rb["measured"],
                   r_bound=rb["bound"], M=rb["M"])
    if args.out:
        write_csv(man.add(args.out), ["x", "q_bar_11", "q_bar_22", "q_bar_12", "r_norm", "chibar2"],
                  rows, _meta(conf, **{f"summary.{k}": v for k, v in summary.items()}))
    _emit(summary)


def cmd_pde(args, man):
    conf = cfg.load_config(args.config)
    man.config = conf.snapshot()
    nx = int(_pick(args.nx, conf, "nx"))
    ny = int(_pick(args.ny, conf, "ny"))
    grid = pde2d.assemble(conf.params, conf.profile, nx, ny, conf.settings["graded"])
    if args.steady:
        field = pde2d.solve_steady(grid)
    else:
        if args.t_final is None or args.dt is None:
            raise ParameterError("give --steady or both --t-final and --dt")
        th = cfg.theta0_function(conf.settings["theta0"], conf.params.T_plus)
        field = pde2d.run_transient(grid, pde2d.initial_field(grid, th), args.t_final, args.dt)
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    info = dict(field.info)
    res = dict(nx=nx, ny=ny, t=None if args.steady else field.t, max_ratio=grid.max_ratio, **info)
    if args.out:
        write_csv(man.add(args.out), ["x", "y", "T"],
                  zip(X.ravel(), Y.ravel(), field.values.ravel()), _meta(conf, nx=nx, ny=ny, t=field.t))
    if args.steady:
        fl = field.column_fluxes()
        phi = analytic1d.flux(conf.params, conf.profile)
        res.update(flux_mean=float(fl.mean()), flux_spread=float(np.ptp(fl) / fl.mean()), phi=phi)
        if args.out:
            base, _ = os.path.splitext(args.out)
            write_csv(man.add(base + "_flux.csv"), ["x_face", "flux"], pde2d.flux_table(field),
                      _meta(conf, phi=phi))
    _emit(res)


FIG1_CASES = {
    # name: (ModelParams, profile)
    "magenta": (ModelParams(eps=0.1, kappa_eps=0.004, kappa_T=0.1), CutoffProfile.arctan_example(eps=0.2)),
    "blue": (ModelParams.scaling_law(0.01, K=1.0, kappa_T=0.1), CutoffProfile.arctan_example()),
    "grey": (ModelParams(eps=0.1, kappa_eps=0.004, kappa_T=0.1), CutoffProfile.constant(1.0)),
}


def reproduce_fig1(out_dir, n=801):
    """Compute the three stationary profiles; returns ``{name: (profile, path)}``."""
    out = {}
    # include the barrier edges so the blue jump is read off exactly
    xs = np.union1d(np.linspace(-1.0, 1.0, n), [-0.01, 0.01])
    for name, (P, prof) in FIG1_CASES.items():
        sp = analytic1d.stationary_profile(P, prof, xs)
        path = os.path.join(out_dir, f"fig1_{name}.csv")
        meta = dict(case=name, kappa_eps=P.kappa_eps, kappa_T=P.kappa_T, T_plus=P.T_plus,
                    profile=prof.kind, flux=sp.flux)
        if prof.eps is not None:
            meta["profile_eps"] = prof.eps
        else:
            meta["eps"] = P.eps if prof.kind != "Constant" else "n/a"
        write_csv(path, ["x", "T"], zip(sp.xs, sp.temps), meta)
        out[name] = (sp, path)
    return out


def cmd_fig1(args, man):
    res = reproduce_fig1(args.out_dir, args.grid_n)
    summary = {}
    for name, (sp, path) in res.items():
        man.add(path)
        summary[name] = dict(flux=sp.flux, out=path)
    blue = res["blue"][0]
    eps = FIG1_CASES["blue"][0].eps
    lo = float(np.interp(-eps, blue.xs, blue.temps))
    hi = float(np.interp(eps, blue.xs, blue.temps))
    summary["blue"].update(t_star=blue.t_star, jump=lo - hi,
                           t_star_limit=analytic1d.barrier_height_scaling(1.0, 2.0))
    grey = res["grey"][0]
    summary["grey"]["linear_dev"] = float(np.max(np.abs(grey.temps - (1.0 - grey.xs))))
    _emit(summary)


# ---------------------------------------------------------------------------
# parser

def _start(text):
    try:
        hitting.parse_start(text)
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def build_parser():
    p = _Parser(prog="barrier-lab", description="Transport-barrier numerics.")
    p.add_argument("--threads", type=int, default=None, help="cap worker threads (default: BARRIER_LAB_THREADS)")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("profile", help="stationary 1-D profile")
    s.add_argument("--config", required=True, help="key = value run configuration")
    s.add_argument("--grid-n", type=int, default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("flux", help="stationary flux")
    s.add_argument("--config", required=True, help="key = value run configuration")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_flux)

    s = sub.add_parser("hitprob", help="closed-form membrane exit probabilities")
    s.add_argument("--a", type=float, default=-1.0)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--x", type=_start, required=True, help="start: a float, +0 or -0")
    s.add_argument("--beta-plus", type=float, required=True)
    s.add_argument("--beta-minus", type=float, required=True)
    s.add_argument("--walls", action="store_true", help="elastic walls at -1 and 1")
    s.set_defaults(func=cmd_hitprob)

    s = sub.add_parser("snob", help="Monte Carlo of the membrane process")
    s.add_argument("--beta-plus", type=float, required=True)
    s.add_argument("--beta-minus", type=float, required=True)
    s.add_argument("--x0", type=_start, required=True, help="start: a float, +0 or -0")
    s.add_argument("--a", type=float, default=-1.0)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--paths", type=int, required=True)
    s.add_argument("--step", type=float, required=True, help="time step h")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--t-max", type=float, default=None)
    s.add_argument("--batch-size", type=int, default=None)
    s.add_argument("--walls", action="store_true", help="elastic walls at -1 and 1")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_snob)

    s = sub.add_parser("sde", help="pre-limit SDE Monte Carlo")
    s.add_argument("--config", required=True, help="key = value run configuration")
    s.add_argument("--x0", type=float, required=True)
    s.add_argument("--y0", type=float, default=0.0)
    s.add_argument("--paths", type=int, default=None)
    s.add_argument("--step", type=float, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--tilde", action="store_true", help="simulate the time-changed process")
    s.add_argument("--no-bridge", action="store_true", help="grid-point exit detection only")
    s.add_argument("--fk", default=None, metavar="t=<f>", help="Feynman-Kac estimate at time t")
    s.add_argument("--batch-size", type=int, default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sde)

    s = sub.add_parser("limits", help="crossing-probability limits")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--K", type=float, default=1.0)
    s.add_argument("--eps-list", default=None, help="comma-separated decreasing eps values")
    s.add_argument("--schedule", default=None, choices=["critical", "scaling", "inverse"],
                   help="critical rate (alpha >= 1/2 default), (K eps)^-2 (alpha < 1/2 default) or 1/eps")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_limits)

    s = sub.add_parser("spectral", help="covariance mode sums")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--config", default=None)
    s.add_argument("--probe-grid", type=int, default=17)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_spectral)

    s = sub.add_parser("pde", help="2-D finite-volume solve")
    s.add_argument("--config", required=True, help="key = value run configuration")
    s.add_argument("--nx", type=int, default=None)
    s.add_argument("--ny", type=int, default=None)
    s.add_argument("--steady", action="store_true", help="solve the steady problem")
    s.add_argument("--t-final", type=float, default=None)
    s.add_argument("--dt", type=float, default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_pde)

    s = sub.add_parser("reproduce-fig1", help="the three stationary profiles")
    s.add_argument("--out-dir", default="fig1")
    s.add_argument("--grid-n", type=int, default=801)
    s.set_defaults(func=cmd_fig1)
    return p


def run(argv=None) -> int:
    """Entry point; returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        _backend.set_threads(args.threads)
        man = Manifest(["barrier-lab", *argv])
        args.func(args, man)
        if man.outputs:
            man.write()
        return EXIT_OK
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():  # pragma: no cover
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
