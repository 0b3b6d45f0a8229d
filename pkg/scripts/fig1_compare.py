"""Direct RK4 evolution of the fig1 datum against the two-band asymptotics.

Writes the comparison tables, the Delta + 1 control, plot data and a region
summary into --out, and prints one verdict line per sector.
"""
import argparse
import json
from pathlib import Path

from todashock import harness as H


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="fig1", choices=sorted(H.PRESETS))
    ap.add_argument("--out", default="runs/fig1_compare")
    ap.add_argument("--dt", type=float, default=None)
    args = ap.parse_args()

    cfg = H.preset_config(args.preset, **({"dt": args.dt} if args.dt else {}))
    out = Path(args.out)
    lat = H.initial_lattice(cfg)
    setup = H.run_phase(cfg, lat)
    traj = H.run_evolve(cfg, lat)
    print(f"window {lat.n_min}..{lat.n_max}, phases {[round(d, 6) for d in setup.deltas]}")

    for label, shift in (("main", 0.0), ("control", 1.0)):
        rep = H.run_compare(cfg, delta_shift=shift, traj=traj, setup=setup)
        H.emit(rep, out / label)
        for j, v in H.decay_verdict(rep).items():
            ts, errs = rep.errors(j)
            trail = " ".join(f"{e:.2e}" for e in errs)
            print(f"{label:7s} sector {j}: {trail}  slope {v['slope']:+.4f}  "
                  f"{'PASS' if v['pass'] else 'FAIL'}")

    t_last = cfg.t_list[-1]
    H.write_plot_csv(out / f"plot_t{t_last:g}.csv", H.plot_rows(traj, setup, t_last))
    regions = H.region_summary(traj.at_time(t_last), t_last, setup.ctx)
    H.write_json(out / "regions.json", regions)
    print(json.dumps(regions, indent=1))


if __name__ == "__main__":
    main()
