"""Scenario pipeline: time sweeps, CSV emission, invariant checks."""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, constants
from .config import Output, ScenarioConfig
from .density import (
    Branch,
    CouplingState,
    auto_window,
    coupling_state,
    cycle_averaged_distribution,
    limiting_distribution,
    reduced_density_matrix,
)
from .dressed import exact_vs_quasiclassical
from .entropy import BITS, jacobi_eigenvalues, linear_entropy, linear_entropy_closed_form
from .entropy import schmidt_number, von_neumann_entropy
from .errors import DomainError
from .pulse import MODE_OMEGA, InteractionFunction, envelope_values
from .wavepacket import ModeCoupling, PacketParams, default_grid, packet_density

__all__ = [
    "TimePoint",
    "RunSummary",
    "Check",
    "ValidationReport",
    "time_points",
    "run_scenario",
    "validate",
    "compare_exact_quasiclassical",
    "write_convergence_csv",
    "fmt",
]

TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8
CLOSED_FORM_TOL = 1e-12
LIMIT_TOL = 1e-13
REMNANT_TOL = 1e-10
ORACLE_TOL = 1e-3
PROBE_COUNT = 9


def fmt(x: float) -> str:
    """17 significant digits: round-trips every double."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class TimePoint:
    t: float
    h: complex
    eta: float
    mu: float
    state: CouplingState


def _eta(h: complex) -> float:
    eta = math.atan2(h.imag, h.real) if h != 0 else 0.0
    return math.pi if eta == -math.pi else eta


def _state_at(config: ScenarioConfig, t: float, h: complex) -> TimePoint:
    eta = _eta(h)
    mu = config.mu0 * abs(h)
    state = coupling_state(mu, config.lambda_over_2pi_w, config.kappa_scale,
                           omega_t=MODE_OMEGA * t, eta=eta, chi0=config.chi0)
    return TimePoint(t, h, eta, mu, state)


def time_points(config: ScenarioConfig, times=None) -> list[TimePoint]:
    times = config.time_grid.points() if times is None else list(times)
    hs = InteractionFunction(config.pulse, MODE_OMEGA)(np.asarray(times, dtype=float))
    return [_state_at(config, t, complex(h)) for t, h in zip(times, np.atleast_1d(hs))]


def _diagonal_job(state: CouplingState):
    dist = cycle_averaged_distribution(state)
    H = linear_entropy(dist)
    return (dist.k_min, dist.probabilities, von_neumann_entropy(dist), H,
            schmidt_number(H), dist.truncation_mass)


def _parallel_map(fn, items, workers: int):
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order, so results do not depend on scheduling
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _write_csv(path: Path, header: str, rows) -> Path:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return path


def _density_name(t: float) -> str:
    return f"density_t{fmt(t)}.csv"


def _oracle(config: ScenarioConfig, tp: TimePoint):
    """Brute-force P_kl from the packet amplitudes against the analytic form."""
    o = config.oracle
    w = o.width_cm
    lam = 4.0 * math.pi * w * config.lambda_over_4pi_w
    omega = 2.0 * math.pi * constants.C_LIGHT / lam
    p0 = config.kappa_scale * constants.HBAR * omega / constants.C_LIGHT
    params = PacketParams(w=w, p0=p0, chi0=config.chi0)
    cp = ModeCoupling(mu=tp.mu, eta=tp.eta, omega=omega)
    t_packet = o.theta * params.tau
    state = cp.coupling_state(params, t_packet)
    window = auto_window(state)
    grid = default_grid(params, cp, t_packet, o.points_per_width)
    numeric = packet_density(params, cp, t_packet, window, grid, o.points_per_width)
    analytic = reduced_density_matrix(state, window)
    dev = float(np.max(np.abs(numeric.entries - analytic.entries)))
    audit = {
        "pulse_time_over_T": tp.t,
        "theta": o.theta,
        "q": state.q,
        "kappa": state.kappa,
        "window": list(window),
        "grid_points": grid.n,
        "grid_half_width_cm": grid.half_width,
        "normalization": numeric.trace,
        "max_abs_deviation": dev,
        "global_phase": "omitted",
    }
    return numeric, analytic, audit


@dataclass
class RunSummary:
    out_dir: Path
    files: list[Path]
    manifest: dict
    manifest_path: Path


def run_scenario(config: ScenarioConfig, out_dir, workers: int = 1) -> RunSummary:
    """Write every requested CSV plus ``manifest.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []
    windows: dict = {}
    audits: dict = {}
    need_series = config.outputs & {Output.HFUNC, Output.DISTRIBUTION, Output.ENTROPY}
    points = time_points(config) if need_series else []

    if Output.ENVELOPE in config.outputs:
        ts = config.time_grid.points()
        fs = envelope_values(config.pulse, np.asarray(ts))
        files.append(_write_csv(out / "envelope.csv", "t_over_T,f",
                                ([fmt(t), fmt(f)] for t, f in zip(ts, fs))))

    if Output.HFUNC in config.outputs:
        rows = ([fmt(p.t), fmt(p.h.real), fmt(p.h.imag), fmt(abs(p.h)), fmt(p.eta)]
                for p in points)
        files.append(_write_csv(out / "hfunc.csv", "t_over_T,re_h,im_h,abs_h,eta", rows))
        audits["h_end"] = {"re": InteractionFunction(config.pulse).h_end.real,
                           "im": InteractionFunction(config.pulse).h_end.imag}

    if config.outputs & {Output.DISTRIBUTION, Output.ENTROPY}:
        results = _parallel_map(_diagonal_job, [p.state for p in points], workers)
        lows = [r[0] for r in results]
        highs = [r[0] + len(r[1]) - 1 for r in results]
        if results:
            windows["distribution"] = {"k_min": min(lows), "k_max": max(highs)}
            audits["max_probability_deficit"] = max(abs(r[5]) for r in results)
        if Output.DISTRIBUTION in config.outputs:
            def dist_rows():
                for p, (lo, probs, *_rest) in zip(points, results):
                    t = fmt(p.t)
                    for i, v in enumerate(probs):
                        yield [t, str(lo + i), fmt(v)]
            files.append(_write_csv(out / "distribution.csv", "t_over_T,k,p_k", dist_rows()))
        if Output.ENTROPY in config.outputs:
            scale = 1.0 / math.log(2.0) if config.entropy_units == BITS else 1.0
            rows = ([fmt(p.t), fmt(r[2] * scale), fmt(r[3]), fmt(r[4])]
                    for p, r in zip(points, results))
            files.append(_write_csv(out / "entropy.csv", "t_over_T,S,H,K", rows))

    if Output.DENSITY in config.outputs:
        windows["density"] = {}
        for tp in time_points(config, config.density_times):
            rho = reduced_density_matrix(tp.state)
            ks = rho.ks
            rows = ([str(k), str(l), fmt(rho[k, l].real), fmt(rho[k, l].imag)]
                    for k in ks for l in ks)
            files.append(_write_csv(out / _density_name(tp.t), "k,l,re_P,im_P", rows))
            windows["density"][fmt(tp.t)] = [rho.k_min, rho.k_max]

    if Output.WAVEPACKET_ORACLE in config.outputs:
        t_o = config.oracle.time if config.oracle.time is not None else config.time_grid.stop
        numeric, analytic, audit = _oracle(config, time_points(config, [t_o])[0])
        ks = numeric.ks
        rows = ([str(k), str(l), fmt(numeric[k, l].real), fmt(numeric[k, l].imag),
                 fmt(analytic[k, l].real), fmt(analytic[k, l].imag)] for k in ks for l in ks)
        files.append(_write_csv(out / "wavepacket_oracle.csv",
                                "k,l,re_P_numeric,im_P_numeric,re_P_analytic,im_P_analytic",
                                rows))
        audits["wavepacket_oracle"] = audit

    manifest = {
        "version": __version__,
        "config": config.echo(),
        "files": [f.name for f in files],
        "windows": windows,
        "audits": audits,
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    return RunSummary(out, files, manifest, manifest_path)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str) -> None:
        self.checks.append(Check(name, bool(passed), detail))


def _probe_times(config: ScenarioConfig) -> list[float]:
    g = config.time_grid
    times = set(np.linspace(g.start, g.stop, PROBE_COUNT).tolist())
    times.update(config.density_times)
    if g.start <= config.pulse.t_end <= g.stop:
        times.add(config.pulse.t_end)
    return sorted(times)


def validate(config: ScenarioConfig, workers: int = 1, oracle: bool | None = None) -> ValidationReport:
    """Run the invariant suite at the scenario's parameters; never raises on failure."""
    report = ValidationReport()
    points = time_points(config)
    diag = _parallel_map(_diagonal_job, [p.state for p in points], workers)

    worst = max(abs(r[5]) for r in diag)
    report.add("trace_distribution", worst < TRACE_TOL,
               f"max |sum p_k - 1| = {worst:.3g} over {len(points)} times")

    probes = time_points(config, _probe_times(config))
    tr_err, min_eig, h_err, lim_err = 0.0, math.inf, 0.0, 0.0
    for tp in probes:
        rho = reduced_density_matrix(tp.state)
        tr_err = max(tr_err, abs(rho.trace - 1.0))
        min_eig = min(min_eig, float(jacobi_eigenvalues(rho.entries)[-1]))
        H = linear_entropy(cycle_averaged_distribution(tp.state))
        h_err = max(h_err, abs(H - linear_entropy_closed_form(tp.state)))
        if config.kappa_scale == 0.0:
            general = cycle_averaged_distribution(tp.state)
            lim = limiting_distribution(tp.state, Branch.SMALL_KAPPA,
                                        (general.k_min, general.k_max))
            lim_err = max(lim_err, float(np.max(np.abs(general.probabilities
                                                        - lim.probabilities))))
    report.add("trace_density", tr_err < TRACE_TOL,
               f"max |Tr P - 1| = {tr_err:.3g} at {len(probes)} probe times")
    report.add("positivity", min_eig >= -POSITIVITY_TOL, f"min eigenvalue of P = {min_eig:.3g}")
    report.add("closed_form_linear_entropy", h_err < CLOSED_FORM_TOL,
               f"max |H - Bessel-sum H| = {h_err:.3g}")
    if config.kappa_scale == 0.0:
        report.add("closed_form_limit", lim_err < LIMIT_TOL,
                   f"max |p_k - exp(-q) I_k(q)| = {lim_err:.3g}")

    t0, t_end = config.pulse.t0, config.pulse.t_end
    before = [r[2] for p, r in zip(points, diag) if p.t <= t0]
    s_before = max(before, default=0.0)
    report.add("entropy_zero_before_switch_on", s_before == 0.0,
               f"max S for t <= t0: {s_before:.3g}")
    after = [r[2] for p, r in zip(points, diag) if p.t >= t_end]
    if after:
        s_end = _diagonal_job(time_points(config, [t_end])[0].state)[2]
        spread = max(abs(s - s_end) for s in after)
        report.add("entropy_remnant_constant", spread < REMNANT_TOL,
                   f"max |S(t) - S(t0+T1)| = {spread:.3g} for t >= t0+T1")

    run_oracle = Output.WAVEPACKET_ORACLE in config.outputs if oracle is None else oracle
    if run_oracle:
        t_o = config.oracle.time if config.oracle.time is not None else config.time_grid.stop
        _, _, audit = _oracle(config, time_points(config, [t_o])[0])
        norm_err = abs(audit["normalization"] - 1.0)
        report.add("wavepacket_normalization", norm_err < ORACLE_TOL,
                   f"|sum_k int |Psi_k|^2 - 1| = {norm_err:.3g}")
        report.add("wavepacket_oracle", audit["max_abs_deviation"] < ORACLE_TOL,
                   f"max |P_numeric - P_analytic| = {audit['max_abs_deviation']:.3g}")
    return report


def compare_exact_quasiclassical(n0_list, sigma_scale: float) -> list[tuple[int, float]]:
    """max_k |exact - quasiclassical| for each n0 at fixed 2 sqrt(n0)|sigma| = sigma_scale."""
    if sigma_scale < 0 or not math.isfinite(sigma_scale):
        raise DomainError(f"argument must be finite and >= 0, got {sigma_scale}")
    rows = []
    for n0 in n0_list:
        if int(n0) != n0 or n0 < 10:
            raise DomainError(f"n0 values must be integers >= 10, got {n0}")
        rows.append((int(n0), exact_vs_quasiclassical(int(n0), float(sigma_scale))))
    return rows


def write_convergence_csv(rows, path) -> Path:
    return _write_csv(Path(path), "n0,max_abs_deviation",
                      ([str(n0), fmt(d)] for n0, d in rows))
