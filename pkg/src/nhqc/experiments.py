"""Declarative experiment runner with deterministic CSV/JSON/SVG outputs.

Every run writes into its output directory:

* ``spectrum.csv``   index, Re_E, Im_E, IPR, label        (spectral runs)
* ``winding.csv``    Re_EB, Im_EB, W, quant_err           (winding runs)
* ``spreading.csv``  t_or_m, sigma, com, log_norm         (dynamics runs)
* ``meta.json``      full config echo + version + wall time + summary
* ``figure.svg``     scatter or heat map, when "svg" is among the formats

Floats are fixed to 12 significant digits with LF line endings, so identical
configs produce byte-identical CSV. The four canonical figure experiments run
the captioned parameter sets (golden-mean potential on 377 sites) and write
one subdirectory per panel variant and case.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .dynamics import WalkLoop, evolve_ct, evolve_qw, transport_classifier
from .errors import ConfigError, NumericalError
from .model import AlphaMode, LatticeParams, WalkParams, build_hamiltonian, build_walk_operator
from .spectral import classify_states, eigendecompose, quasienergies
from .svgfig import heatmap_svg, scatter_svg
from .topology import LoopParameter, WindingRequest, loop_centroids, winding_map, winding_number

FIG1_CASES = {
    "a": dict(V1=2.0, V2=1.5, hermitian=dict(h=0.0), nonhermitian=dict(h=0.5)),
    "c": dict(V1=0.2, V2=0.5, hermitian=dict(epsilon=0.0), nonhermitian=dict(epsilon=0.6)),
}
FIG3_CASES = {
    "a": dict(V1=0.2356, V2=0.1178, hermitian=dict(h=0.0), nonhermitian=dict(h=0.4)),
    "c": dict(V1=0.0157, V2=0.0393, hermitian=dict(epsilon=0.0), nonhermitian=dict(epsilon=0.6)),
}
FIG_VARIANTS = {"fig1": ("a", "c"), "fig2": ("a", "b"), "fig3": ("a", "c"), "fig4": ("a", "b")}


def thread_count() -> int:
    """Worker cap from NHQC_THREADS (0 or unset means auto)."""
    raw = os.environ.get("NHQC_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"NHQC_THREADS must be an integer, got {raw!r}") from None
    if cap < 0:
        raise ConfigError("NHQC_THREADS must be >= 0")
    return cap if cap > 0 else (os.cpu_count() or 1)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.11e}"


def _write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(cell) for cell in row) + "\n")
    return path


def _write_meta(out: Path, config: ExperimentConfig, summary: dict, wall_time: float) -> Path:
    payload = {
        "config": config.to_dict(),
        "version": __version__,
        "wall_time_s": wall_time,
        "summary": summary,
    }
    path = out / "meta.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _lattice_params(cfg: ExperimentConfig) -> LatticeParams:
    return LatticeParams(
        L=cfg.L,
        kappa=cfg.kappa,
        h=cfg.h,
        theta=cfg.theta,
        phi=cfg.phi,
        epsilon=cfg.epsilon,
        V1=cfg.V1,
        V2=cfg.V2,
        alpha_mode=AlphaMode(cfg.alpha_mode),
    )


def _walk_params(cfg: ExperimentConfig) -> WalkParams:
    return WalkParams(
        L=cfg.L,
        beta=cfg.beta,
        h=cfg.h,
        phi=cfg.phi,
        epsilon=cfg.epsilon,
        V1=cfg.V1,
        V2=cfg.V2,
        alpha_mode=AlphaMode(cfg.alpha_mode),
    )


def _auto(value: float):
    return None if value < 0 else value


def _run_spectrum(cfg: ExperimentConfig, out: Path) -> dict:
    if cfg.operator == "walk":
        spec = quasienergies(build_walk_operator(_walk_params(cfg)), tol=cfg.tol_eig)
    else:
        spec = eigendecompose(build_hamiltonian(_lattice_params(cfg)), tol=cfg.tol_eig)
    spec = classify_states(spec, im_tol=_auto(cfg.im_tol), ipr_threshold=_auto(cfg.ipr_threshold))
    order = np.lexsort((spec.eigenvalues.imag, spec.eigenvalues.real))
    rows = [
        (
            int(rank),
            spec.eigenvalues[j].real,
            spec.eigenvalues[j].imag,
            spec.ipr[j],
            spec.labels[j].value,
        )
        for rank, j in enumerate(order)
    ]
    files = [_write_csv(out / "spectrum.csv", ["index", "Re_E", "Im_E", "IPR", "label"], rows)]
    if "svg" in cfg.formats:
        svg = scatter_svg(
            spec.eigenvalues.real,
            spec.eigenvalues.imag,
            [label.value for label in spec.labels],
            title=f"{cfg.operator} spectrum, L={cfg.L}",
            xlabel="Re E",
            ylabel="Im E",
        )
        path = out / "figure.svg"
        path.write_text(svg)
        files.append(path)
    n_complex = int(spec.is_complex.sum())
    n_localized = int(sum(1 for lab in spec.labels if lab.value == "localized"))
    return {
        "files": files,
        "summary": {
            "dimension": spec.dimension,
            "complex_states": n_complex,
            "localized_states": n_localized,
        },
    }


def _base_energies(cfg: ExperimentConfig) -> list[complex]:
    if not cfg.eb_auto:
        return [complex(cfg.eb_re, cfg.eb_im)]
    spec = eigendecompose(build_hamiltonian(_lattice_params(cfg)), tol=cfg.tol_eig)
    im_tol = cfg.im_tol if cfg.im_tol >= 0 else 1e-6 * spec.source_norm
    probes = loop_centroids(spec.eigenvalues, im_tol)
    if not probes:
        raise NumericalError("eb_auto found no complex-energy loops to probe")
    return probes


def _run_winding(cfg: ExperimentConfig, out: Path) -> dict:
    params = _lattice_params(cfg)
    nu = LoopParameter(cfg.nu)
    rows = []
    for eb in _base_energies(cfg):
        res = winding_number(
            WindingRequest(
                params,
                nu,
                eb,
                initial_samples=cfg.initial_samples,
                max_refinements=cfg.max_refinements,
            )
        )
        rows.append((eb.real, eb.imag, res.winding, res.quantization_error))
    files = [_write_csv(out / "winding.csv", ["Re_EB", "Im_EB", "W", "quant_err"], rows)]
    return {"files": files, "summary": {"nu": cfg.nu, "windings": [int(r[2]) for r in rows]}}


def _run_winding_map(cfg: ExperimentConfig, out: Path) -> dict:
    params = _lattice_params(cfg)
    re = np.linspace(cfg.eb_re_min, cfg.eb_re_max, cfg.eb_re_n)
    im = np.linspace(cfg.eb_im_min, cfg.eb_im_max, cfg.eb_im_n)
    grid = re[None, :] + 1j * im[:, None]
    result = winding_map(
        params,
        LoopParameter(cfg.nu),
        grid,
        initial_samples=cfg.initial_samples,
        max_refinements=cfg.max_refinements,
        workers=thread_count(),
    )
    rows = []
    for idx in np.ndindex(grid.shape):
        w = int(result.winding[idx]) if result.ok[idx] else float("nan")
        rows.append((grid[idx].real, grid[idx].imag, w, result.quantization_error[idx]))
    files = [_write_csv(out / "winding.csv", ["Re_EB", "Im_EB", "W", "quant_err"], rows)]
    return {
        "files": files,
        "summary": {"nu": cfg.nu, "grid": [cfg.eb_im_n, cfg.eb_re_n], "failed": int((~result.ok).sum())},
    }


def _ct_times(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.t_log:
        if cfg.t_min <= 0:
            raise ConfigError("t_min must be positive for a log time grid")
        return np.concatenate([[0.0], np.geomspace(cfg.t_min, cfg.t_max, cfg.t_samples - 1)])
    return np.linspace(0.0, cfg.t_max, cfg.t_samples)


def _spreading_outputs(cfg: ExperimentConfig, out: Path, rec, time_label: str) -> dict:
    rows = list(zip(rec.times, rec.sigma, rec.center_of_mass, rec.log_norms))
    files = [_write_csv(out / "spreading.csv", ["t_or_m", "sigma", "com", "log_norm"], rows)]
    summary = {
        "wrapped_at": rec.wrapped_at,
        "fallback_used": rec.fallback_used,
        "final_log_norm": float(rec.log_norms[-1]),
    }
    if cfg.fit_lo >= 0 and cfg.fit_hi > cfg.fit_lo:
        fit = transport_classifier(rec, (cfg.fit_lo, cfg.fit_hi))
        summary["fit"] = {
            "window": [cfg.fit_lo, cfg.fit_hi],
            "exponent": fit.exponent,
            "speed": fit.speed,
            "verdict": fit.verdict.value,
        }
    if "svg" in cfg.formats and rec.profiles is not None:
        svg = heatmap_svg(
            np.sqrt(rec.profiles),
            rec.times,
            rec.sigma,
            title=f"spreading from site {rec.n0}, L={cfg.L}",
            xlabel="site n",
            ylabel=time_label,
            log_time=cfg.t_log,
        )
        path = out / "figure.svg"
        path.write_text(svg)
        files.append(path)
    return {"files": files, "summary": summary}


def _run_evolve_ct(cfg: ExperimentConfig, out: Path) -> dict:
    H = build_hamiltonian(_lattice_params(cfg))
    rec = evolve_ct(H, cfg.site(), _ct_times(cfg), wrap_tol=cfg.wrap_tol)
    return _spreading_outputs(cfg, out, rec, "time t")


def _run_evolve_qw(cfg: ExperimentConfig, out: Path) -> dict:
    rec = evolve_qw(
        _walk_params(cfg),
        cfg.site(),
        WalkLoop(cfg.loop),
        steps=cfg.steps,
        wrap_tol=cfg.wrap_tol,
    )
    return _spreading_outputs(cfg, out, rec, "step m")


def _variants(cfg: ExperimentConfig) -> tuple[str, ...]:
    allowed = FIG_VARIANTS[cfg.experiment]
    if cfg.variant == "all":
        return allowed
    if cfg.variant not in allowed:
        raise ConfigError(f"{cfg.experiment} supports variants {allowed + ('all',)}, got {cfg.variant!r}")
    return (cfg.variant,)


def _figure_base(cfg: ExperimentConfig, **kwargs) -> ExperimentConfig:
    # captioned setup: golden-mean potential, 377 sites, phases zero
    fixed = dict(
        L=377,
        kappa=1.0,
        theta=0.0,
        phi=0.0,
        h=0.0,
        epsilon=0.0,
        alpha_mode="irrational",
        n0=-1,
        variant="all",
    )
    fixed.update(kwargs)
    return replace(cfg, **fixed)


def _run_fig_spectra(cfg: ExperimentConfig, out: Path, cases: dict, operator: str) -> dict:
    files, summary = [], {}
    for var in _variants(cfg):
        case = cases[var]
        for name in ("hermitian", "nonhermitian"):
            sub = _figure_base(
                cfg,
                experiment="spectrum",
                operator=operator,
                V1=case["V1"],
                V2=case["V2"],
                beta=0.9 * math.pi / 2.0,
                out=str(out / var / name),
                **case[name],
            )
            result = run(sub)
            files.extend(result["files"])
            summary[f"{var}/{name}"] = result["summary"]
    return {"files": files, "summary": summary}


def _run_fig1(cfg: ExperimentConfig, out: Path) -> dict:
    return _run_fig_spectra(cfg, out, FIG1_CASES, "hamiltonian")


def _run_fig3(cfg: ExperimentConfig, out: Path) -> dict:
    return _run_fig_spectra(cfg, out, FIG3_CASES, "walk")


def _run_fig2(cfg: ExperimentConfig, out: Path) -> dict:
    files, summary = [], {}
    settings = {
        "a": dict(V1=2.0, V2=1.5, h=0.5, t_log=False, t_max=80.0, t_samples=161,
                  fit_lo=20.0, fit_hi=80.0),
        "b": dict(V1=0.2, V2=0.5, epsilon=0.6, t_log=True, t_min=0.1, t_max=1000.0,
                  t_samples=181, fit_lo=50.0, fit_hi=500.0),
    }
    for var in _variants(cfg):
        sub = _figure_base(cfg, experiment="evolve-ct", out=str(out / var), **settings[var])
        result = run(sub)
        files.extend(result["files"])
        summary[var] = result["summary"]
    return {"files": files, "summary": summary}


def _run_fig4(cfg: ExperimentConfig, out: Path) -> dict:
    files, summary = [], {}
    settings = {
        "a": dict(V1=0.2356, V2=0.1178, h=0.4, steps=150, fit_lo=20.0, fit_hi=80.0,
                  t_log=False),
        "b": dict(V1=0.0157, V2=0.0393, epsilon=0.6, steps=1000, fit_lo=100.0,
                  fit_hi=1000.0, t_log=True),
    }
    for var in _variants(cfg):
        sub = _figure_base(
            cfg,
            experiment="evolve-qw",
            beta=0.9 * math.pi / 2.0,
            loop="u",
            out=str(out / var),
            **settings[var],
        )
        result = run(sub)
        files.extend(result["files"])
        summary[var] = result["summary"]
    return {"files": files, "summary": summary}


_DISPATCH = {
    "spectrum": _run_spectrum,
    "winding": _run_winding,
    "winding-map": _run_winding_map,
    "evolve-ct": _run_evolve_ct,
    "evolve-qw": _run_evolve_qw,
    "fig1": _run_fig1,
    "fig2": _run_fig2,
    "fig3": _run_fig3,
    "fig4": _run_fig4,
}


def run(config: ExperimentConfig, out_dir: str | Path | None = None) -> dict:
    """Execute one experiment; returns {"out", "files", "summary"}."""
    out = Path(out_dir) if out_dir is not None else Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result = _DISPATCH[config.experiment](config, out)
    wall = time.perf_counter() - start
    files = list(result["files"])
    if "json" in config.formats:
        files.append(_write_meta(out, config, result["summary"], wall))
    return {"out": str(out), "files": [str(f) for f in files], "summary": result["summary"]}


def reproduce_all(out_dir: str | Path = "out", only: str | None = None) -> dict:
    """Run the four canonical figure experiments into out_dir/fig1..fig4.

    Figure jobs are independent and run concurrently up to the NHQC_THREADS
    cap; outputs land in disjoint directories, so the merge is trivially
    deterministic.
    """
    figures = [only] if only else list(FIG_VARIANTS)
    if any(f not in FIG_VARIANTS for f in figures):
        raise ConfigError(f"unknown figure {only!r}; choose from {sorted(FIG_VARIANTS)}")
    out = Path(out_dir)
    jobs = [
        replace(ExperimentConfig(), experiment=fig, out=str(out / fig)) for fig in figures
    ]
    workers = min(thread_count(), len(jobs))
    results = {}
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for fig, result in zip(figures, pool.map(run, jobs)):
                results[fig] = result
    else:
        for fig, job in zip(figures, jobs):
            results[fig] = run(job)
    return results
