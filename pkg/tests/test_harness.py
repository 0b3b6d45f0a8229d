import json

import numpy as np
import pytest

from todashock import harness as H
from todashock.cli import main

SMALL_CONFIG = """\
# fig1 data on a short window
backgrounds 0.5 -4.0 0.5 0.0
0 -1.7
window -80 80
t_end 20
t_list 10 20
"""


def test_parse_config():
    cfg = H.parse_config(SMALL_CONFIG)
    assert cfg.bg_left == (0.5, -4.0) and cfg.overrides == {0: -1.7}
    assert cfg.window == (-80, 80) and cfg.t_list == (10.0, 20.0)
    pair = H.parse_config("preset fig1\n3 0.6 -1.0\n")
    assert pair.overrides == {3: (0.6, -1.0)} and pair.t_end == 200.0


@pytest.mark.parametrize("text", ["bogus 1\n", "window 1\n", "5 1 2 3\n", "t_end x\n"])
def test_parse_config_errors(text):
    with pytest.raises(ValueError, match="config line 1"):
        H.parse_config(text)


def test_t_list_beyond_t_end_rejected():
    with pytest.raises(ValueError):
        H.RunConfig(t_end=10.0, t_list=(20.0,))


def test_digest_tracks_content():
    a, b = H.preset_config("fig1"), H.preset_config("fig1")
    assert a.digest() == b.digest()
    assert H.preset_config("fig1", eps=0.03).digest() != a.digest()


def test_vdo_preset_is_normalized_on_load():
    lat = H.initial_lattice(H.preset_config("vdo-pure-step", t_end=5.0, t_list=()))
    assert lat.bg_right == (0.5, 0.0) and lat.bg_left == (0.5, -3.0)


def test_eps_invariant_enforced():
    cfg = H.parse_config(SMALL_CONFIG + "eps 0.3\n")
    with pytest.raises(ValueError, match="eps"):
        H.run_phase(cfg)


def _run(tmp_path, name, *args):
    out = tmp_path / name
    assert main([*args, "--out", str(out)]) == 0
    return out


def test_cli_outputs_are_byte_stable(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(SMALL_CONFIG)
    for cmd, fname in (("asymptotics", "asymptotics.csv"), ("phase", "phase.json"),
                       ("evolve", "trajectory.csv")):
        one = _run(tmp_path, f"{cmd}1", cmd, "--config", str(cfg))
        two = _run(tmp_path, f"{cmd}2", cmd, "--config", str(cfg))
        assert (one / fname).read_bytes() == (two / fname).read_bytes()
        assert (one / "manifest.json").read_bytes() == (two / "manifest.json").read_bytes()
    man = json.loads((one / "manifest.json").read_text())
    assert man["command"] == "evolve" and man["files"] == ["trajectory.csv"]


def test_empty_t_list_gives_header_only_csv(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(SMALL_CONFIG)
    out = _run(tmp_path, "empty", "asymptotics", "--config", str(cfg), "--t-list")
    assert (out / "asymptotics.csv").read_text() == "t,n,a_hat,b_hat\n"


def test_asymptotic_rows_lie_in_their_sectors():
    setup = H.run_phase(H.parse_config(SMALL_CONFIG))
    assert len(setup.intervals) == 2
    rows = H.asymptotic_rows(setup, [10.0, 20.0])
    lo, hi = setup.intervals[-1][0], setup.intervals[0][1]
    assert rows and all(lo <= n / t <= hi for t, n, _, _ in rows)
    assert all(-3.0 <= b <= -1.0 for *_, b in rows)


def test_report_json_round_trip(tmp_path):
    cfg = H.parse_config(SMALL_CONFIG)
    rep = H.run_compare(cfg)
    back = H.ComparisonReport.from_json(rep.to_json())
    assert back.to_json() == rep.to_json()
    assert back.slopes.keys() == rep.slopes.keys()
    files = H.emit(rep, tmp_path / "cmp")
    assert [f.name for f in files] == ["compare.csv", "compare.json"]
    lines = files[0].read_text().splitlines()
    assert lines[0] == ",".join(H.COMPARE_HEADER) and len(lines) == 1 + len(rep.rows)
    for row in rep.rows:
        lo, hi = rep.intervals[row["sector"] - 1]
        assert lo <= row["xi"] <= hi


def test_log_slope():
    ts = np.array([1.0, 2.0, 3.0])
    assert H.log_slope(ts, np.exp(-0.5 * ts)) == pytest.approx(-0.5)
    assert np.isnan(H.log_slope([1.0], [0.1]))


def test_decay_verdict_rules():
    errs = ((1, 1e-2), (2, 1e-3), (3, 2e-3), (4, 1e-4))
    rows = [{"sector": 1, "t": t, "err_b": e} for t, e in errs]
    rep = H.ComparisonReport(rows, {1: H.log_slope(*zip(*errs))}, [], [])
    v = H.decay_verdict(rep)[1]
    # two of three steps decrease: a majority
    assert v["pass"] and (v["decreasing_steps"], v["steps"]) == (2, 3)
    rep.rows[-1]["err_b"] = 0.5
    rep.slopes[1] = H.log_slope(*zip(*errs[:3], (4, 0.5)))
    assert not H.decay_verdict(rep)[1]["pass"]


def test_no_eigenvalue_preset_single_sector_decays():
    rep = H.run_compare(H.preset_config("pure-step"))
    assert rep.sectors() == [1]
    v = H.decay_verdict(rep)[1]
    assert v["pass"] and v["slope"] < 0


def test_fig1_three_region_structure():
    cfg = H.RunConfig(**{**H.PRESETS["fig1"], "t_end": 50.0, "t_list": (50.0,)})
    state = H.run_evolve(cfg).at_time(50.0)
    reg = H.region_summary(state, 50.0, H.run_surface(cfg))
    left, mid, right = reg["left"], reg["middle"], reg["right"]
    assert left["b_min"] == -4.0 and right["b_max"] == 0.0
    # the middle region stays in the gap image [b + 1, -2a] = [-3, -1]
    assert -3.0 < mid["b_min"] < mid["b_max"] < -1.0
    # both outer regions carry larger modulated oscillations
    assert left["b_max"] > mid["b_max"] and right["b_min"] < mid["b_min"]


def test_plot_rows_cover_the_window(tmp_path):
    cfg = H.parse_config(SMALL_CONFIG)
    lat = H.initial_lattice(cfg)
    traj = H.run_evolve(cfg, lat)
    setup = H.run_phase(cfg, lat)
    p = H.write_plot_csv(tmp_path / "p.csv", H.plot_rows(traj, setup, 20.0))
    lines = p.read_text().splitlines()
    assert lines[0] == "n,b,b_hat" and len(lines) == 1 + len(lat.a)
    filled = [l for l in lines[1:] if not l.endswith(",")]
    assert 0 < len(filled) < len(lat.a)
