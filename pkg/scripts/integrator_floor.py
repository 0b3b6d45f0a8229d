"""Time-step floor of the direct solution at the sector midpoints.

Evolves the same datum with dt and dt/2 and prints, per sector and time, the
step-halving difference next to the asymptotic error.  Once the asymptotic error
reaches the step-halving difference, further decay is not observable at this dt.
"""
import argparse

import numpy as np

from todashock import harness as H


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="fig1", choices=sorted(H.PRESETS))
    ap.add_argument("--dt", type=float, default=0.005)
    args = ap.parse_args()
    cfg = H.preset_config(args.preset, dt=args.dt)
    lat = H.initial_lattice(cfg)
    setup = H.run_phase(cfg, lat)
    coarse = H.run_evolve(cfg, lat)
    fine = H.run_evolve(H.RunConfig(**{**cfg.__dict__, "dt": args.dt / 2}), lat)
    rep = H.run_compare(cfg, traj=coarse, setup=setup)
    print(f"{'sector':>6} {'t':>6} {'|b - b_hat|':>12} {'dt floor':>12}")
    for row in rep.rows:
        n, t = row["n"], row["t"]
        floor = abs(float(coarse.at_time(t).b_at(np.array([n]))[0])
                    - float(fine.at_time(t).b_at(np.array([n]))[0]))
        print(f"{row['sector']:>6} {t:>6g} {row['err_b']:>12.3e} {floor:>12.3e}")


if __name__ == "__main__":
    main()
