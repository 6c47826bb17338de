"""File-producing experiments behind the command-line interface.

Each ``run_*`` returns a :class:`RunResult`; ``ok`` is False when one of the
experiment's own checks fails. Outputs depend only on the config, so reruns
are byte-identical.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from hybridmimo import rng as rngmod
from hybridmimo.channel import (
    build_long_term_channel,
    compose_channel,
    sample_local_scatter,
    write_matrices_binary,
)
from hybridmimo.config import ExperimentConfig
from hybridmimo.eigenbeams import (
    cumulative_power,
    extract_eigenbeams,
    svd_decompose,
    truncate,
    truncation_residual,
    write_eigenbeams_csv,
    write_profile_csv,
)
from hybridmimo.geometry import build_array, build_layout, build_observation_grid, write_points_csv
from hybridmimo.netmap import SectorPattern, compute_sinr_map, hex_map_grid, write_sinr_csv
from hybridmimo.patterns import beam_pattern, element_power, write_element_power_csv, write_pattern_csv
from hybridmimo.simulate import (
    RESIDUAL_BOUND,
    digital_downlink,
    draw_noise,
    equivalence_residual,
    hybrid_baseband,
    hybrid_downlink,
    random_precoders,
    random_symbols,
    subframe_multiplex,
    write_residuals_csv,
    write_schedule_csv,
)

log = logging.getLogger(__name__)

PERTURBATION = 1e-3


@dataclass
class RunResult:
    name: str
    ok: bool = True
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    array: object
    layout: object
    grid: object
    longterm: object


def build_scenario(cfg: ExperimentConfig) -> Scenario:
    array = build_array(cfg.columns, cfg.rows, cfg.carrier_frequency)
    layout = build_layout(cfg.inter_site_distance, cfg.sites, cfg.sectors_per_site, cfg.tower_height, cfg.downtilt)
    grid = build_observation_grid(layout, cfg.sector_id, cfg.grid_spacing, cfg.grid_heights,
                                  cfg.min_horizontal_distance)
    longterm = build_long_term_channel(array, grid, cfg.tower_height, cfg.path_loss_exponent)
    return Scenario(array, layout, grid, longterm)


def _out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_summary(path: Path, summary: dict) -> None:
    with open(path, "w") as fh:
        for k, v in summary.items():
            fh.write(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n")


def run_svd_report(cfg: ExperimentConfig, scenario: Scenario | None = None) -> RunResult:
    sc = scenario or build_scenario(cfg)
    out = _out(cfg)
    res = RunResult("svd-report")
    svd = svd_decompose(sc.longterm)
    profile = cumulative_power(svd)

    write_points_csv(out / "array_elements.csv", sc.array.element_positions)
    write_points_csv(out / "observation_grid.csv", sc.grid.points)
    write_matrices_binary(out / "longterm_channel.bin", sc.longterm.matrix)
    with open(out / "singular_values.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "sigma"])
        for i, s in enumerate(svd.singular_values, start=1):
            w.writerow([i, repr(float(s))])
    write_profile_csv(out / "cumulative_power.csv", profile)

    L, N = svd.source_dims
    summary = {"L": L, "N": N, "numerical_rank": svd.numerical_rank()}
    for r in (4, 8):
        if r <= svd.rank_limit:
            summary[f"fraction_rank_{r}"] = profile.at(r)
    t = cfg.rank_budget
    summary["rank_budget"] = t
    summary[f"fraction_rank_{t}"] = profile.at(t)
    summary["truncation_residual_rel"] = truncation_residual(svd, t) / float(np.linalg.norm(svd.singular_values))

    marginal = svd.singular_values**2
    res.ok = bool(np.all(np.diff(profile.cumulative_power) >= 0) and np.all(np.diff(marginal) <= 0))
    summary["status"] = "PASS" if res.ok else "FAIL"
    _write_summary(out / "svd_summary.txt", summary)
    res.summary = summary
    res.files = [out / n for n in ("array_elements.csv", "observation_grid.csv", "longterm_channel.bin",
                                   "singular_values.csv", "cumulative_power.csv", "svd_summary.txt")]
    return res


def equivalence_trial(svd, t: int, cfg: ExperimentConfig, perturb: bool = False) -> np.ndarray:
    """Per-subband residual between digital and hybrid downlinks at rank ``t``."""
    L, N = svd.source_dims
    K = cfg.subbands
    trunc = truncate(svd, t)
    beams = extract_eigenbeams(svd, t)
    scatter = sample_local_scatter(L, K, cfg.scatter_model, cfg.seed, cfg.band_half_width)
    channel = compose_channel(scatter, trunc)
    D = random_precoders(K, N, t, cfg.seed)
    x = random_symbols(K, t, cfg.seed)
    z = draw_noise(K, L, cfg.noise_power, cfg.seed)
    F = hybrid_baseband(beams, D)

    W = beams.W
    if perturb:
        gen = rngmod.stream(cfg.seed, rngmod.PERTURB)
        W = W + PERTURBATION * rngmod.complex_normal(gen, W.shape)
    y_d = digital_downlink(channel, D, x, z)
    y_h = hybrid_downlink(channel, W, F, x, z)
    return equivalence_residual(y_d, y_h)


def run_equivalence(cfg: ExperimentConfig, scenario: Scenario | None = None) -> RunResult:
    sc = scenario or build_scenario(cfg)
    out = _out(cfg)
    res = RunResult("equivalence")
    svd = svd_decompose(sc.longterm)

    rows, summary_rows = [], []
    for t in cfg.ranks:
        r = equivalence_trial(svd, t, cfg, cfg.perturb_beams)
        rows += [(t, k + 1, v) for k, v in enumerate(r)]
        passed = bool(np.max(r) < RESIDUAL_BOUND)
        res.ok &= passed
        summary_rows.append((t, float(np.max(r)), float(np.mean(r)), "PASS" if passed else "FAIL"))
        log.info("rank %d: max residual %.3e", t, np.max(r))

    write_residuals_csv(out / "equivalence_residuals.csv", rows)
    with open(out / "equivalence_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "max_residual", "mean_residual", "status"])
        for t, mx, mn, st in summary_rows:
            w.writerow([t, repr(mx), repr(mn), st])
    schedule = subframe_multiplex(max(cfg.ranks), cfg.rf_chains)
    write_schedule_csv(out / "subframe_schedule.csv", schedule)

    all_res = np.array([v for _, _, v in rows])
    res.summary = {"max_residual": float(all_res.max()), "mean_residual": float(all_res.mean()),
                   "bound": RESIDUAL_BOUND, "status": "PASS" if res.ok else "FAIL"}
    _write_summary(out / "equivalence_summary.txt", res.summary)
    res.files = [out / n for n in ("equivalence_residuals.csv", "equivalence_summary.csv",
                                   "subframe_schedule.csv", "equivalence_summary.txt")]
    return res


def run_patterns(cfg: ExperimentConfig, scenario: Scenario | None = None) -> RunResult:
    sc = scenario or build_scenario(cfg)
    out = _out(cfg)
    res = RunResult("patterns")
    beams = extract_eigenbeams(svd_decompose(sc.longterm), cfg.rank_budget)
    az = np.arange(cfg.azimuth_min, cfg.azimuth_max + cfg.angle_step / 2, cfg.angle_step)
    el = np.arange(cfg.elevation_min, cfg.elevation_max + cfg.angle_step / 2, cfg.angle_step)

    write_eigenbeams_csv(out / "eigenbeams.csv", beams)
    res.files.append(out / "eigenbeams.csv")
    worst = 0.0
    for b in range(beams.rank_budget):
        w = beams.W[:, b]
        pat = beam_pattern(sc.array, w, az, el)
        emap = element_power(sc.array, w)
        worst = max(worst, abs(float(emap.raw.sum()) - float(np.vdot(w, w).real)))
        p1, p2 = out / f"pattern_beam{b + 1}.csv", out / f"element_power_beam{b + 1}.csv"
        write_pattern_csv(p1, pat)
        write_element_power_csv(p2, sc.array, emap)
        res.files += [p1, p2]
        res.summary[f"beam{b + 1}_peak"] = pat.peak()
    res.ok = worst <= 1e-12
    res.summary["power_sum_error"] = worst
    res.summary["status"] = "PASS" if res.ok else "FAIL"
    return res


def run_sinr_map(cfg: ExperimentConfig) -> RunResult:
    out = _out(cfg)
    res = RunResult("sinr-map")
    layout = build_layout(cfg.inter_site_distance, cfg.sites, cfg.sectors_per_site, cfg.tower_height, cfg.downtilt)
    pattern = SectorPattern(cfg.h_beamwidth, cfg.v_beamwidth, cfg.front_to_back, cfg.max_gain, cfg.downtilt)
    grid = hex_map_grid(cfg.map_radius, cfg.map_spacing)
    lam = build_array(1, 1, cfg.carrier_frequency).wavelength
    smap = compute_sinr_map(layout, pattern, cfg.tx_power, cfg.bandwidth, grid, wavelength=lam,
                            exponent=cfg.network_path_loss_exponent, noise_figure=cfg.noise_figure,
                            ue_height=cfg.ue_height)
    write_sinr_csv(out / "sinr_map.csv", smap)
    res.files.append(out / "sinr_map.csv")
    res.ok = bool(np.all(smap.sinr_db <= smap.snr_db))
    res.summary = {"points": int(smap.points.shape[0]), "sinr_median_db": float(np.median(smap.sinr_db)),
                   "status": "PASS" if res.ok else "FAIL"}
    return res


def run_all(cfg: ExperimentConfig) -> list[RunResult]:
    sc = build_scenario(cfg)
    return [run_svd_report(cfg, sc), run_equivalence(cfg, sc), run_patterns(cfg, sc), run_sinr_map(cfg)]
