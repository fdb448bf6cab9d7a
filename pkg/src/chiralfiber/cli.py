"""Scenario orchestration: config parsing, sweeps, CSV/JSON artifacts.

Config files are TOML; every physical quantity carries its unit in the key
name (``rabi_in_gamma``, ``spacing_in_lambda``, ...).  Identical configs
produce byte-identical CSV output.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .couplings import assemble
from .errors import ConfigError
from .fiber_modes import FiberSpec, dispersion_scan, single_atom_guided_rates, solve_he11
from .geometry import CIRCULAR_MINUS, AtomChain, DriveParams
from .lindblad import build_liouvillian, steady_state
from .spectral import decay_spectrum, effective_decay_rate, matching_lattice_constants, spin_wave
from .tomography import (
    TomographyGrids,
    invert_radon,
    right_jump_operator,
    sinogram,
)
from .weak_drive import emission_line

SCENARIOS = ("modes", "spectrum", "line", "steadystate", "wigner", "gaps", "all")

_FMT = "%.17g"


@dataclass
class ScenarioConfig:
    """Everything a scenario run needs, with paper-default values."""

    fiber_radius: float = 0.22
    fiber_index: float = 1.45
    n_atoms: int = 15
    spacing: float = 0.8
    surface_distance: float = 0.1
    occupied_sites: tuple[int, ...] | None = None
    rabi: float = 0.01
    detuning: float = 0.0
    laser_angle: float = 1.37
    calibration: str = "beta"
    beta_target: float = 0.15
    chi_target: float | None = None
    grids: TomographyGrids = field(default_factory=TomographyGrids)
    scenario_options: dict = field(default_factory=dict)
    name: str = "run"

    def chain(self, n_atoms: int | None = None, sites=None) -> AtomChain:
        if sites is None:
            n = n_atoms if n_atoms is not None else self.n_atoms
            sites = self.occupied_sites if (n_atoms is None and self.occupied_sites) else tuple(range(n))
        return AtomChain(
            spacing=self.spacing,
            occupied_sites=tuple(sites),
            surface_distance=self.surface_distance,
            dipole=CIRCULAR_MINUS,
        )

    def drive(self, rabi=None, detuning=None) -> DriveParams:
        return DriveParams(
            rabi=self.rabi if rabi is None else rabi,
            detuning=self.detuning if detuning is None else detuning,
            laser_angle=self.laser_angle,
        )


def _require(table: dict, key: str, kind, where: str):
    if key not in table:
        raise ConfigError(f"missing key {key!r} in [{where}]")
    val = table[key]
    if not isinstance(val, kind):
        raise ConfigError(f"[{where}] {key} should be {kind}, got {type(val).__name__}")
    return val


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse and validate a TOML scenario config."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    cfg = ScenarioConfig(name=Path(path).stem)
    fiber = raw.get("fiber", {})
    cfg.fiber_radius = float(fiber.get("radius_in_lambda", cfg.fiber_radius))
    cfg.fiber_index = float(fiber.get("refractive_index", cfg.fiber_index))
    chain = raw.get("chain", {})
    cfg.n_atoms = int(chain.get("n_atoms", cfg.n_atoms))
    cfg.spacing = float(chain.get("spacing_in_lambda", cfg.spacing))
    cfg.surface_distance = float(chain.get("surface_distance_in_lambda", cfg.surface_distance))
    if "occupied_sites" in chain and chain["occupied_sites"]:
        cfg.occupied_sites = tuple(int(s) for s in chain["occupied_sites"])
    drive = raw.get("drive", {})
    cfg.rabi = float(drive.get("rabi_in_gamma", cfg.rabi))
    cfg.detuning = float(drive.get("detuning_in_gamma", cfg.detuning))
    cfg.laser_angle = float(drive.get("laser_angle_rad", cfg.laser_angle))
    cal = raw.get("calibration", {})
    cfg.calibration = str(cal.get("mode", cfg.calibration))
    if cfg.calibration not in ("beta", "first_principles"):
        raise ConfigError(f"[calibration] unknown mode {cfg.calibration!r}")
    cfg.beta_target = float(cal.get("beta_target", cfg.beta_target))
    if not 0.0 < cfg.beta_target < 1.0:
        raise ConfigError("[calibration] beta_target must be in (0, 1)")
    if "chi_target" in cal:
        cfg.chi_target = float(cal["chi_target"])
        if abs(cfg.chi_target) > 1.0:
            raise ConfigError("[calibration] chi_target must be in [-1, 1]")
    tomo = raw.get("tomography", {})
    cfg.grids = TomographyGrids(
        n_angles=int(tomo.get("n_angles", 64)),
        s_max=float(tomo.get("s_max", 12.0)),
        s_points=int(tomo.get("s_points", 121)),
        x_points=int(tomo.get("x_points", 257)),
        wigner_points=int(tomo.get("wigner_points", 257)),
        hann_fraction=float(tomo.get("hann_fraction", 0.8)),
        integration_time=float(tomo.get("integration_time", 1.0)),
    )
    for key in ("spectrum", "line", "steadystate", "wigner", "gaps"):
        if key in raw:
            cfg.scenario_options[key] = raw[key]
    return cfg


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [_FMT % v if isinstance(v, (float, np.floating)) else v for v in row]
            )


def _solved_parts(cfg: ScenarioConfig, chain: AtomChain):
    mode = solve_he11(FiberSpec(cfg.fiber_radius, cfg.fiber_index))
    r_atom = cfg.fiber_radius + chain.surface_distance
    rates = single_atom_guided_rates(
        mode,
        chain.dipole_vector(),
        (r_atom, 0.0),
        calibration=cfg.calibration,
        beta_target=cfg.beta_target,
        chi_target=cfg.chi_target,
    )
    kernels = assemble(chain, mode, rates)
    return mode, rates, kernels


def enumerate_gap_configs(
    total_sites: int, atoms: int, single_gap: bool = False
) -> list[tuple[int, ...]]:
    """All occupations of ``atoms`` atoms in ``total_sites`` sites.

    With ``single_gap`` only configurations spanning the full chain whose
    missing sites form one contiguous interior block are kept (a config
    missing an endpoint is a relabeled shorter chain, not a gapped one).
    """
    if atoms > total_sites:
        raise ValueError("more atoms than sites")
    configs = [tuple(c) for c in itertools.combinations(range(total_sites), atoms)]
    if not single_gap:
        return configs
    out = []
    for c in configs:
        if c[0] != 0 or c[-1] != total_sites - 1:
            continue
        missing = sorted(set(range(total_sites)) - set(c))
        if missing and missing == list(range(missing[0], missing[0] + len(missing))):
            out.append(c)
    return out


# ----------------------------------------------------------------- scenarios


def _scenario_modes(cfg: ScenarioConfig, outdir: Path) -> list[str]:
    spec = FiberSpec(cfg.fiber_radius, cfg.fiber_index)
    mode = solve_he11(spec)
    b_over_k, vals = dispersion_scan(spec)
    _write_csv(outdir / "dispersion.csv", ["beta_over_k", "characteristic"],
               zip(b_over_k, vals))
    with open(outdir / "mode.json", "w") as fh:
        json.dump(
            {
                "beta_f": mode.beta_f,
                "lambda_f": mode.lambda_f,
                "n_eff": mode.n_eff,
                "beta_f_prime": mode.beta_f_prime,
            },
            fh,
            indent=2,
        )
    return ["dispersion.csv", "mode.json"]


def _scenario_spectrum(cfg: ScenarioConfig, outdir: Path) -> list[str]:
    opts = cfg.scenario_options.get("spectrum", {})
    a_grid = np.linspace(
        float(opts.get("a_min_in_lambda", 0.1)),
        float(opts.get("a_max_in_lambda", 2.0)),
        int(opts.get("a_points", 381)),
    )
    n = cfg.n_atoms
    rows = []
    mode = solve_he11(FiberSpec(cfg.fiber_radius, cfg.fiber_index))
    for a in a_grid:
        chain = AtomChain.regular(n, a, surface_distance=cfg.surface_distance)
        r_atom = cfg.fiber_radius + cfg.surface_distance
        rates = single_atom_guided_rates(
            mode, chain.dipole_vector(), (r_atom, 0.0),
            calibration=cfg.calibration, beta_target=cfg.beta_target,
            chi_target=cfg.chi_target,
        )
        kernels = assemble(chain, mode, rates)
        psi = spin_wave(chain, cfg.drive())
        spec = decay_spectrum(kernels, reference=psi)
        rows.append([a, *spec.gamma_n, effective_decay_rate(spec, psi)])
    header = ["a_over_lambda"] + [f"gamma_{i + 1}" for i in range(n)] + ["gamma_psi"]
    _write_csv(outdir / "spectrum.csv", header, rows)
    matches = matching_lattice_constants(mode, cfg.laser_angle)
    _write_csv(outdir / "matching.csv", ["a_over_lambda"], [[m] for m in matches])
    return ["spectrum.csv", "matching.csv"]


def _scenario_line(cfg: ScenarioConfig, outdir: Path) -> list[str]:
    opts = cfg.scenario_options.get("line", {})
    n_values = [int(v) for v in opts.get("n_values", [cfg.n_atoms])]
    files = []
    split_rows = []
    for n in n_values:
        chain = cfg.chain(n_atoms=n)
        _, _, kernels = _solved_parts(cfg, chain)
        scan = emission_line(kernels, chain, cfg.drive())
        name = f"line_N{n}.csv"
        _write_csv(
            outdir / name,
            ["detuning", "gamma_R_per_omega2", "gamma_R", "gamma_L", "gamma_u", "beta", "chi"],
            zip(scan.detunings, scan.rates, scan.rates_gamma, scan.rates_left,
                scan.rates_unguided, scan.beta, scan.chi),
        )
        files.append(name)
        split_rows.append([n, scan.splitting if scan.splitting is not None else float("nan")])
    _write_csv(outdir / "splitting.csv", ["n_atoms", "delta"], split_rows)
    files.append("splitting.csv")
    # Optional 2D scan over a/lambda for the heatmap analogue.
    if "a_points" in opts:
        a_grid = np.linspace(
            float(opts.get("a_min_in_lambda", 0.6)),
            float(opts.get("a_max_in_lambda", 1.0)),
            int(opts["a_points"]),
        )
        rows2d = []
        for a in a_grid:
            cfg_a = ScenarioConfig(**{**cfg.__dict__, "spacing": float(a)})
            chain = cfg_a.chain(n_atoms=cfg.n_atoms)
            _, _, kernels = _solved_parts(cfg_a, chain)
            scan = emission_line(kernels, chain, cfg.drive())
            for d, g in zip(scan.detunings, scan.rates):
                rows2d.append([a, d, g])
        _write_csv(outdir / "line2d.csv", ["a_over_lambda", "detuning", "gamma_R_per_omega2"], rows2d)
        files.append("line2d.csv")
    return files


def _scenario_steadystate(cfg: ScenarioConfig, outdir: Path) -> list[str]:
    opts = cfg.scenario_options.get("steadystate", {})
    n_values = [int(v) for v in opts.get("n_values", [1, 2, 3, 4, 5])]
    omegas = np.asarray(
        opts.get(
            "rabi_in_gamma",
            np.geomspace(0.01, 10.0, int(opts.get("rabi_points", 25))).tolist(),
        ),
        dtype=float,
    )
    rows = []
    ref_curve = {}
    for n in n_values:
        chain = cfg.chain(n_atoms=n)
        _, _, kernels = _solved_parts(cfg, chain)
        for omega in omegas:
            L = build_liouvillian(kernels, chain, cfg.drive(rabi=float(omega)))
            ss = steady_state(L)
            rows.append([float(omega), n, ss.gamma_r, ss.gamma_l, ss.gamma_u, ss.beta, ss.chi])
            if n == 1:
                ref_curve[float(omega)] = ss.gamma_r
    # N-normalized emission: Gamma_R / (N * Gamma_R|_{N=1}) when N=1 present.
    out_rows = []
    for omega, n, g_r, g_l, g_u, beta, chi in rows:
        ref = ref_curve.get(omega)
        norm = g_r / (n * ref) if ref else float("nan")
        out_rows.append([omega, n, g_r, g_l, g_u, beta, chi, norm])
    _write_csv(
        outdir / "steadystate.csv",
        ["rabi", "n_atoms", "gamma_R", "gamma_L", "gamma_u", "beta", "chi", "gamma_R_normalized"],
        out_rows,
    )
    return ["steadystate.csv"]


def _wigner_single(cfg: ScenarioConfig, chain: AtomChain, rabi: float, rng):
    mode, rates, kernels = _solved_parts(cfg, chain)
    L = build_liouvillian(kernels, chain, cfg.drive(rabi=rabi))
    jump = right_jump_operator(kernels, chain, mode)
    sino = sinogram(L, jump, cfg.grids, rng=rng)
    result = invert_radon(
        sino.marginals, wigner_points=cfg.grids.wigner_points,
        hann_fraction=cfg.grids.hann_fraction,
    )
    return sino, result


def _scenario_wigner(cfg: ScenarioConfig, outdir: Path, rng) -> list[str]:
    opts = cfg.scenario_options.get("wigner", {})
    n_values = [int(v) for v in opts.get("n_values", [1, 2, 3])]
    omegas = [float(v) for v in opts.get("rabi_in_gamma", [0.05, 1.5])]
    files = []
    summary = {}
    for n in n_values:
        chain = cfg.chain(n_atoms=n)
        for omega in omegas:
            tag = f"N{n}_omega{omega:g}"
            sino, result = _wigner_single(cfg, chain, omega, rng)
            rows = [
                (m.angle, xv, dv)
                for m in sino.marginals
                for xv, dv in zip(m.x, m.density)
            ]
            _write_csv(outdir / f"sinogram_{tag}.csv", ["alpha", "x", "density"], rows)
            wrows = [
                (result.x[i], result.p[j], result.W[i, j])
                for i in range(len(result.x))
                for j in range(len(result.p))
            ]
            _write_csv(outdir / f"wigner_{tag}.csv", ["x", "p", "W"], wrows)
            files += [f"sinogram_{tag}.csv", f"wigner_{tag}.csv"]
            summary[tag] = {
                "n_atoms": n,
                "rabi_in_gamma": omega,
                "negativity": result.negativity,
                "raw_integral": result.raw_integral,
                "mean_x": sino.mean_x,
                "mean_p": sino.mean_p,
                "mean_residual": sino.mean_residual,
                "grids": vars(cfg.grids),
            }
    with open(outdir / "wigner_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    files.append("wigner_summary.json")
    return files


def _scenario_gaps(cfg: ScenarioConfig, outdir: Path, rng) -> list[str]:
    opts = cfg.scenario_options.get("gaps", {})
    total = int(opts.get("total_sites", 7))
    atoms = int(opts.get("n_atoms", 5))
    single = bool(opts.get("single_gap", True))
    include_wigner = bool(opts.get("include_wigner", False))
    wigner_rabi = float(opts.get("wigner_rabi_in_gamma", 0.5))
    rows = []
    for sites in enumerate_gap_configs(total, atoms, single_gap=single):
        chain = cfg.chain(sites=sites)
        _, _, kernels = _solved_parts(cfg, chain)
        L = build_liouvillian(kernels, chain, cfg.drive())
        ss = steady_state(L)
        delta_w = float("nan")
        if include_wigner:
            _, result = _wigner_single(cfg, chain, wigner_rabi, rng)
            delta_w = result.negativity
        rows.append(["-".join(map(str, sites)), ss.beta, ss.chi, delta_w])
    _write_csv(outdir / "gaps.csv", ["occupied_sites", "beta", "chi", "delta_w"], rows)
    return ["gaps.csv"]


def run_scenario(
    cfg: ScenarioConfig,
    scenario: str,
    outdir: str | Path,
    threads: int = 1,
    seed: int = 0,
) -> list[str]:
    """Run one scenario; returns the list of files written (manifest last)."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    start = time.time()
    files: list[str] = []
    todo = [scenario] if scenario != "all" else ["modes", "spectrum", "line", "steadystate", "wigner", "gaps"]
    for step in todo:
        if step == "modes":
            files += _scenario_modes(cfg, outdir)
        elif step == "spectrum":
            files += _scenario_spectrum(cfg, outdir)
        elif step == "line":
            files += _scenario_line(cfg, outdir)
        elif step == "steadystate":
            files += _scenario_steadystate(cfg, outdir)
        elif step == "wigner":
            files += _scenario_wigner(cfg, outdir, rng)
        elif step == "gaps":
            files += _scenario_gaps(cfg, outdir, rng)
    manifest = {
        "scenario": scenario,
        "software_version": __version__,
        "units": {"length": "lambda", "rate": "gamma", "time": "1/gamma", "hbar": 1},
        "config": {
            "fiber_radius_in_lambda": cfg.fiber_radius,
            "fiber_refractive_index": cfg.fiber_index,
            "n_atoms": cfg.n_atoms,
            "spacing_in_lambda": cfg.spacing,
            "surface_distance_in_lambda": cfg.surface_distance,
            "occupied_sites": cfg.occupied_sites,
            "rabi_in_gamma": cfg.rabi,
            "detuning_in_gamma": cfg.detuning,
            "laser_angle_rad": cfg.laser_angle,
            "calibration": cfg.calibration,
            "beta_target": cfg.beta_target,
            "chi_target": cfg.chi_target,
            "tomography": vars(cfg.grids),
            "scenario_options": cfg.scenario_options,
        },
        "seed": seed,
        "threads": threads,
        "outputs": files,
        "wall_time_s": time.time() - start,
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return files + ["manifest.json"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chiralfiber",
        description="Collective emission of a laser-driven atom chain on a nanofiber",
    )
    parser.add_argument("--config", type=str, default=None, help="TOML config file")
    parser.add_argument("--scenario", type=str, required=True, choices=SCENARIOS)
    parser.add_argument("--out", type=str, required=True, help="output directory")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0,
                        help="seeds iterative-eigensolver start vectors only")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ScenarioConfig()
        files = run_scenario(cfg, args.scenario, args.out, threads=args.threads, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
