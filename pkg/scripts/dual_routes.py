"""Tables for the two dual-route checks: capacity and phase jumps.

Capacity: pole of G at z = 0 against dK/dxi = -log(2 cap), for a sweep of left
bands, including a shrinking band where the value tends to 1/2.
Jumps: Delta_j - Delta_{j+1} from the sector phases against the closed form, for
the synthetic multi-eigenvalue profiles.
"""
from todashock.lattice import step_profile
from todashock.phase import PhaseInputs, phase_report
from todashock.scattering import scattering_data
from todashock.surface import capacity, capacity_from_K, surface_context

PROFILES = {
    "A": ((0.5, -4.0), {0: -1.7, 6: -2.2}),
    "B": ((0.5, -4.0), {0: -1.7, 5: -2.4, 12: -1.9}),
    "E": ((0.6, -3.6), {0: -1.6, 4: -2.1, 9: -2.5}),
}


def main():
    print(f"{'a':>6} {'b':>6} {'cap (G pole)':>18} {'cap (dK/dxi)':>18} {'diff':>9}")
    for a, b in ((0.5, -4.0), (0.8, -3.5), (0.3, -2.0), (1.5, -6.0), (0.1, -3.0), (0.01, -3.0)):
        ctx = surface_context(a, b)
        g, k = capacity(ctx)[0], capacity_from_K(ctx)
        print(f"{a:>6g} {b:>6g} {g:>18.15f} {k:>18.15f} {abs(g - k):>9.1e}")
    print()
    for name, (bg, ov) in PROFILES.items():
        lat = step_profile(-120, 120, bg, (0.5, 0.0), ov)
        inp = PhaseInputs.from_scattering(surface_context(*bg), scattering_data(lat))
        for row in phase_report(inp)["sectors"]:
            if "jump_residual" in row:
                print(f"{name} z_j={row['z_j']:+.6f} sectors {row['jump_sectors']:.12f} "
                      f"closed form {row['jump_closed_form']:.12f} "
                      f"residual {row['jump_residual']:.1e}")


if __name__ == "__main__":
    main()
