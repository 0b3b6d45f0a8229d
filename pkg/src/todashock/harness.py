"""Pipeline orchestration: config, presets, comparison of direct and asymptotic solutions.

All stages work in normalized units (right background a = 1/2, b = 0); times in
the config are normalized times.  For the bundled presets the normalization is
the identity.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
import hashlib
import json
import logging
import math
from pathlib import Path

import numpy as np

from . import __version__
from .finitegap import finite_gap_params, finite_gap_solution
from .lattice import (SteplikeLattice, Trajectory, evolve, normalize, step_profile,
                      window_for)
from .phase import PhaseInputs, delta_j, phase_report
from .scattering import ScatteringData, scattering_data
from .surface import SurfaceContext, sector_bounds, surface_context, xi_partition

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    bg_left: tuple = (0.5, -4.0)
    bg_right: tuple = (0.5, 0.0)
    overrides: dict = field(default_factory=dict)  # n -> b or (a, b)
    window: tuple | None = None  # (n_min, n_max); sized from t_end when None
    dt: float = 0.005
    t_end: float = 200.0
    snapshot_stride: int | None = None
    t_list: tuple = (50.0, 100.0, 150.0, 200.0)
    eps: float = 0.02
    n_chi: int = 256
    tol_res: float = 1e-6
    preset: str | None = None

    def __post_init__(self):
        self.bg_left = tuple(float(x) for x in self.bg_left)
        self.bg_right = tuple(float(x) for x in self.bg_right)
        self.overrides = {int(k): (float(v) if np.ndim(v) == 0 else tuple(map(float, v)))
                          for k, v in self.overrides.items()}
        if self.window is not None:
            self.window = (int(self.window[0]), int(self.window[1]))
        self.t_list = tuple(float(t) for t in self.t_list)
        if any(t > self.t_end for t in self.t_list):
            raise ValueError("every t in t_list must be <= t_end")

    def canonical(self) -> dict:
        d = asdict(self)
        d["overrides"] = {str(k): v for k, v in sorted(self.overrides.items())}
        return d

    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


PRESETS = {
    # single-site perturbation of the step 1/2,-4 | 1/2,0 with one gap eigenvalue
    "fig1": dict(bg_left=(0.5, -4.0), bg_right=(0.5, 0.0), overrides={0: -1.7}),
    # a = 1/2, b(n) = beta sgn(n), beta = 1.5 (normalized on load)
    "vdo-pure-step": dict(bg_left=(0.5, -1.5), bg_right=(0.5, 1.5), overrides={0: 0.0}),
    # bare step, no discrete spectrum in the gap
    # the error reaches the integrator floor early here, hence the short times
    "pure-step": dict(bg_left=(0.5, -4.0), bg_right=(0.5, 0.0), overrides={},
                      t_end=25.0, t_list=(5.0, 10.0, 15.0, 20.0, 25.0)),
}


def preset_config(name: str, **kw) -> RunConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return RunConfig(**{**PRESETS[name], "preset": name, **kw})


_SCALARS = {"dt": float, "t_end": float, "snapshot_stride": int, "eps": float,
            "n_chi": int, "tol_res": float}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Plain-text config: one ``key values...`` per line, ``#`` comments.

    Keys: preset, window, backgrounds (a- b- a+ b+), dt, t_end, snapshot_stride,
    t_list, eps, n_chi, tol_res.  A line starting with an integer is an override
    ``n value`` (sets b) or ``n a b``.
    """
    kw: dict = {}
    overrides: dict = {}
    preset = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *vals = line.split()
        try:
            if _is_int(key):
                if len(vals) == 1:
                    overrides[int(key)] = float(vals[0])
                elif len(vals) == 2:
                    overrides[int(key)] = (float(vals[0]), float(vals[1]))
                else:
                    raise ValueError("override needs 'n b' or 'n a b'")
            elif key == "preset":
                preset = vals[0]
            elif key == "window":
                kw["window"] = (int(vals[0]), int(vals[1]))
            elif key == "backgrounds":
                am, bm, ap, bp = map(float, vals)
                kw["bg_left"], kw["bg_right"] = (am, bm), (ap, bp)
            elif key == "t_list":
                kw["t_list"] = tuple(float(v) for v in vals)
            elif key in _SCALARS:
                kw[key] = _SCALARS[key](vals[0])
            else:
                raise ValueError(f"unknown key {key!r}")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"config line {lineno}: {exc}") from None
    start = asdict(base) if base else {}
    if preset:
        start = asdict(preset_config(preset))
    if overrides:
        kw["overrides"] = overrides
    return RunConfig(**{**start, **kw})


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False


# -- pipeline stages ---------------------------------------------------------------------


def initial_lattice(cfg: RunConfig) -> SteplikeLattice:
    """Initial profile in normalized units."""
    if cfg.window is None:
        s = 2.0 * cfg.bg_right[0]
        a_left = cfg.bg_left[0] / s
        half = window_for(cfg.t_end, a_left) // 2 + 1
        window = (-half, half)
    else:
        window = cfg.window
    raw = step_profile(window[0], window[1], cfg.bg_left, cfg.bg_right, cfg.overrides)
    lat, _, _ = normalize(raw)
    return lat


def run_evolve(cfg: RunConfig, lat: SteplikeLattice | None = None) -> Trajectory:
    lat = lat or initial_lattice(cfg)
    return evolve(lat, cfg.t_end, cfg.dt, snapshot_stride=cfg.snapshot_stride,
                  times=cfg.t_list)


def run_scatter(cfg: RunConfig, lat: SteplikeLattice | None = None) -> ScatteringData:
    return scattering_data(lat or initial_lattice(cfg), n_chi=cfg.n_chi, tol_res=cfg.tol_res)


def run_surface(cfg: RunConfig) -> SurfaceContext:
    lat = initial_lattice(cfg)
    return surface_context(*lat.bg_left)


@dataclass
class PhaseSetup:
    ctx: SurfaceContext
    sd: ScatteringData
    inputs: PhaseInputs
    xis: list
    intervals: list
    deltas: list

    def midpoints(self):
        return [0.5 * (lo + hi) for lo, hi in self.intervals]


def run_phase(cfg: RunConfig, lat: SteplikeLattice | None = None) -> PhaseSetup:
    lat = lat or initial_lattice(cfg)
    ctx = surface_context(*lat.bg_left)
    sd = scattering_data(lat, n_chi=cfg.n_chi, tol_res=cfg.tol_res)
    inputs = PhaseInputs.from_scattering(ctx, sd)
    lams = [e["lam"] for e in sd.eigen if e["kind"] == "gap"]
    xa, x0 = sector_bounds(ctx)
    n_ev = len(lams)
    if not cfg.eps < (x0 - xa) / (2 * (n_ev + 2)):
        raise ValueError(f"eps={cfg.eps} too large for {n_ev} gap eigenvalues")
    xis, intervals = xi_partition(ctx, lams, cfg.eps)
    deltas = [delta_j(j, inputs) for j in range(1, inputs.n_sectors + 1)]
    return PhaseSetup(ctx, sd, inputs, [float(x) for x in xis], intervals, deltas)


def asymptotic_rows(setup: PhaseSetup, t_list, delta_shift: float = 0.0):
    """Rows (t, n, a_hat, b_hat) over every sector of the region, sector by sector."""
    rows = []
    for t in t_list:
        for j, (lo, hi) in enumerate(setup.intervals, 1):
            ns = np.arange(math.ceil(lo * t), math.floor(hi * t) + 1)
            if len(ns) == 0:
                continue
            p = finite_gap_params(setup.ctx, setup.deltas[j - 1] + delta_shift)
            ah, bh = finite_gap_solution(ns, np.full(ns.shape, t), p)
            rows.extend((t, int(n), float(x), float(y)) for n, x, y in zip(ns, ah, bh))
    return rows


# -- comparison --------------------------------------------------------------------------


@dataclass
class ComparisonReport:
    rows: list  # dicts: sector, t, n, xi, b_direct, b_hat, a_direct, a_hat, err_b, err_a
    slopes: dict  # sector -> fitted slope of log err_b vs t
    deltas: list
    intervals: list
    config_hash: str = ""
    delta_shift: float = 0.0

    def errors(self, sector: int):
        r = sorted((row for row in self.rows if row["sector"] == sector), key=lambda r: r["t"])
        return np.array([row["t"] for row in r]), np.array([row["err_b"] for row in r])

    def sectors(self):
        return sorted({row["sector"] for row in self.rows})

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ComparisonReport":
        d = json.loads(text)
        d["slopes"] = {int(k): v for k, v in d["slopes"].items()}
        d["intervals"] = [tuple(x) for x in d["intervals"]]
        return cls(**d)


def log_slope(ts, errs) -> float:
    """Least-squares slope of log(err) against t."""
    ts = np.asarray(ts, float)
    e = np.log(np.maximum(np.asarray(errs, float), 1e-300))
    if len(ts) < 2:
        return float("nan")
    return float(np.polyfit(ts, e, 1)[0])


def run_compare(cfg: RunConfig, delta_shift: float = 0.0, traj: Trajectory | None = None,
                setup: PhaseSetup | None = None) -> ComparisonReport:
    """Direct evolution against the two-band asymptotics at the sector midpoints."""
    lat = initial_lattice(cfg)
    setup = setup or run_phase(cfg, lat)
    traj = traj or run_evolve(cfg, lat)
    rows = []
    for j, xi in enumerate(setup.midpoints(), 1):
        lo, hi = setup.intervals[j - 1]
        p = finite_gap_params(setup.ctx, setup.deltas[j - 1] + delta_shift)
        for t in cfg.t_list:
            n = int(round(xi * t))
            if not lo <= n / t <= hi:
                raise ValueError(f"sector {j}: n/t={n / t} outside [{lo}, {hi}] at t={t}")
            state = traj.at_time(t)
            ah, bh = finite_gap_solution(np.array([n]), np.array([t]), p)
            a_d, b_d = float(state.a_at(np.array([n]))[0]), float(state.b_at(np.array([n]))[0])
            rows.append({"sector": j, "t": t, "n": n, "xi": n / t,
                         "b_direct": b_d, "b_hat": float(bh[0]),
                         "a_direct": a_d, "a_hat": float(ah[0]),
                         "err_b": abs(b_d - float(bh[0])), "err_a": abs(a_d - float(ah[0]))})
    rep = ComparisonReport(rows, {}, [float(d) for d in setup.deltas],
                           [tuple(map(float, iv)) for iv in setup.intervals],
                           cfg.digest(), float(delta_shift))
    rep.slopes = {j: log_slope(*rep.errors(j)) for j in rep.sectors()}
    return rep


def decay_verdict(rep: ComparisonReport, final_tol: float = 1e-2) -> dict:
    """Per sector: negative slope, majority of decreasing steps, small final error."""
    out = {}
    for j in rep.sectors():
        ts, e = rep.errors(j)
        steps = np.diff(e)
        decreasing = int(np.sum(steps < 0))
        ok = (rep.slopes[j] < 0 and decreasing * 2 > len(steps) and e[-1] < final_tol)
        out[j] = {"slope": rep.slopes[j], "decreasing_steps": decreasing,
                  "steps": len(steps), "final_error": float(e[-1]), "pass": bool(ok)}
    return out


def region_summary(state: SteplikeLattice, t: float, ctx: SurfaceContext) -> dict:
    """Statistics of b in the three regions n/t < xi_left, inside, > xi_right."""
    xa, x0 = sector_bounds(ctx)
    n = state.sites
    xi = n / t
    out = {}
    for name, mask in (("left", xi < xa), ("middle", (xi > xa) & (xi < x0)), ("right", xi > x0)):
        b = state.b[mask]
        out[name] = {"sites": int(mask.sum()), "b_min": float(b.min()), "b_max": float(b.max()),
                     "b_mean": float(b.mean())}
    return out


# -- output ------------------------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def trajectory_rows(traj: Trajectory, times=None):
    idx = range(len(traj.times)) if times is None else [
        int(np.argmin(np.abs(traj.times - t))) for t in times]
    n = traj.sites
    for k in idx:
        t = float(traj.times[k])
        for i in range(len(n)):
            yield (t, int(n[i]), float(traj.a[k, i]), float(traj.b[k, i]))


TRAJ_HEADER = ("t", "n", "a", "b")
ASYM_HEADER = ("t", "n", "a_hat", "b_hat")
COMPARE_HEADER = ("sector", "t", "n", "xi", "b_direct", "b_hat", "a_direct", "a_hat",
                  "err_b", "err_a")


def emit(rep: ComparisonReport, out_dir, formats=("csv", "json")) -> list:
    out_dir = Path(out_dir)
    files = []
    if "csv" in formats:
        files.append(write_csv(out_dir / "compare.csv", COMPARE_HEADER,
                               ([r[k] for k in COMPARE_HEADER] for r in rep.rows)))
    if "json" in formats:
        p = out_dir / "compare.json"
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(rep.to_json() + "\n")
        files.append(p)
    return files


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


def write_manifest(out_dir, cfg: RunConfig, command: str, files) -> Path:
    return write_json(Path(out_dir) / "manifest.json", {
        "command": command, "config": cfg.canonical(), "config_hash": cfg.digest(),
        "version": __version__, "files": sorted(Path(f).name for f in files),
    })


def plot_rows(traj: Trajectory, setup: PhaseSetup, t: float):
    """(n, b, b_hat) on the whole window at time t; b_hat empty outside the sectors."""
    state = traj.at_time(t)
    hat = {n: bh for (_, n, _, bh) in asymptotic_rows(setup, [t])}
    for n, b in zip(state.sites, state.b):
        bh = hat.get(int(n))
        yield (int(n), float(b), "" if bh is None else float(bh))


def write_plot_csv(path, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("n,b,b_hat\n")
        for n, b, bh in rows:
            fh.write(f"{n},{fmt(b)},{'' if bh == '' else fmt(bh)}\n")
    return path


__all__ = [
    "ComparisonReport", "PRESETS", "PhaseSetup", "RunConfig", "asymptotic_rows",
    "decay_verdict", "emit", "initial_lattice", "log_slope", "parse_config", "phase_report",
    "plot_rows", "preset_config", "region_summary", "run_compare", "run_evolve", "run_phase",
    "run_scatter", "run_surface", "trajectory_rows", "write_csv", "write_json",
    "write_manifest", "write_plot_csv",
]
