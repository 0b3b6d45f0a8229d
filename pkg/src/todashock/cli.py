"""Command line entry point: ``todashock <stage> [--preset NAME | --config FILE] --out DIR``."""
from __future__ import annotations

import argparse
import logging
from pathlib import Path
import sys

from . import harness as H
from .phase import phase_report


def _config(args) -> H.RunConfig:
    if args.config:
        cfg = H.parse_config(Path(args.config).read_text())
    else:
        cfg = H.preset_config(args.preset or "fig1")
    if args.t_list is not None:
        t_end = max(args.t_list) if args.t_list else cfg.t_end
        cfg = H.RunConfig(**{**cfg.__dict__, "t_list": tuple(args.t_list), "t_end": t_end})
    return cfg


def cmd_evolve(cfg, out):
    traj = H.run_evolve(cfg)
    return [H.write_csv(out / "trajectory.csv", H.TRAJ_HEADER, H.trajectory_rows(traj))]


def cmd_scatter(cfg, out):
    sd = H.run_scatter(cfg)
    p = out / "scattering.json"
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(sd.to_json() + "\n")
    return [p]


def cmd_surface(cfg, out):
    return [H.write_json(out / "surface.json", H.run_surface(cfg).summary())]


def cmd_phase(cfg, out):
    setup = H.run_phase(cfg)
    rep = phase_report(setup.inputs)
    rep["xis"] = setup.xis
    rep["intervals"] = [list(iv) for iv in setup.intervals]
    return [H.write_json(out / "phase.json", rep)]


def cmd_asymptotics(cfg, out):
    setup = H.run_phase(cfg)
    rows = H.asymptotic_rows(setup, cfg.t_list)
    return [H.write_csv(out / "asymptotics.csv", H.ASYM_HEADER, rows)]


def cmd_compare(cfg, out, control: float = 0.0):
    lat = H.initial_lattice(cfg)
    setup = H.run_phase(cfg, lat)
    traj = H.run_evolve(cfg, lat)
    rep = H.run_compare(cfg, traj=traj, setup=setup)
    files = H.emit(rep, out)
    verdict = {"main": H.decay_verdict(rep)}
    if control:
        ctl = H.run_compare(cfg, delta_shift=control, traj=traj, setup=setup)
        files += H.emit(ctl, out / "control")
        verdict["control"] = H.decay_verdict(ctl)
    files.append(H.write_json(out / "verdict.json", verdict))
    for t in cfg.t_list:
        files.append(H.write_plot_csv(out / f"plot_t{t:g}.csv", H.plot_rows(traj, setup, t)))
    for j, v in verdict["main"].items():
        print(f"sector {j}: slope={v['slope']:.4g} final={v['final_error']:.3e} "
              f"{'PASS' if v['pass'] else 'FAIL'}")
    return files


COMMANDS = {"evolve": cmd_evolve, "scatter": cmd_scatter, "surface": cmd_surface,
            "phase": cmd_phase, "asymptotics": cmd_asymptotics, "compare": cmd_compare}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="todashock", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(H.PRESETS))
    src.add_argument("--config", help="plain-text run configuration")
    ap.add_argument("--out", default="runs/latest", help="run directory")
    ap.add_argument("--t-list", type=float, nargs="*", default=None)
    ap.add_argument("--control", type=float, default=0.0,
                    help="compare: also run with the phase shifted by this amount")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    cfg = _config(args)
    out = Path(args.out)
    fn = COMMANDS[args.command]
    files = fn(cfg, out, args.control) if args.command == "compare" else fn(cfg, out)
    H.write_manifest(out, cfg, args.command, files)
    return 0


if __name__ == "__main__":
    sys.exit(main())
