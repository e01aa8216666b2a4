"""Scenario configuration: flat ``key = value`` files with ``#`` comments.

Times are in units of the optical period T; the mode frequency is 2 pi / T.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .entropy import BITS, NATS
from .errors import ConfigurationError
from .pulse import MIN_SAMPLES_PER_PERIOD, Envelope, PulseSpec

__all__ = ["Output", "TimeGrid", "OracleSettings", "ScenarioConfig",
           "parse_config_text", "load_config"]


class Output(enum.Enum):
    ENVELOPE = "envelope"
    HFUNC = "hfunc"
    DISTRIBUTION = "distribution"
    ENTROPY = "entropy"
    DENSITY = "density"
    WAVEPACKET_ORACLE = "wavepacket_oracle"


@dataclass(frozen=True)
class TimeGrid:
    start: float
    stop: float
    step: float

    def points(self) -> list[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        # index-based so every run produces identical values
        return [self.start + i * self.step for i in range(n + 1)]


@dataclass(frozen=True)
class OracleSettings:
    """Physical realisation used by the wavepacket oracle."""

    time: float | None = None  # pulse time (units of T); defaults to the grid stop
    theta: float = 0.0  # packet spreading time t/tau
    width_cm: float = 1e-5
    points_per_width: int = 8


@dataclass(frozen=True)
class ScenarioConfig:
    pulse: PulseSpec
    mu0: float
    lambda_over_4pi_w: float
    kappa_scale: float = 0.0
    chi0: float = 0.0
    time_grid: TimeGrid = TimeGrid(0.0, 41.0, 1.0 / 64)
    outputs: frozenset = frozenset()
    entropy_units: str = NATS
    density_times: tuple[float, ...] = ()
    oracle: OracleSettings = OracleSettings()
    source: dict = field(default_factory=dict, compare=False)

    @property
    def lambda_over_2pi_w(self) -> float:
        return 2.0 * self.lambda_over_4pi_w

    def echo(self) -> dict:
        """JSON-friendly view of the resolved configuration."""
        pulse = {"envelope": self.pulse.family.value, "t0": self.pulse.t0, "T1": self.pulse.T1,
                 "samples_per_period": self.pulse.samples_per_period}
        if self.pulse.table is not None:
            pulse["table"] = [list(k) for k in self.pulse.table]
        return {
            "pulse": pulse,
            "mu0": self.mu0,
            "lambda_over_4pi_w": self.lambda_over_4pi_w,
            "kappa_scale": self.kappa_scale,
            "chi0": self.chi0,
            "time_grid": asdict(self.time_grid),
            "outputs": sorted(o.value for o in self.outputs),
            "entropy_units": self.entropy_units,
            "density_times": list(self.density_times),
            "oracle": asdict(self.oracle),
        }


_KEYS = {
    "envelope", "t0", "T1", "samples_per_period", "envelope_table",
    "mu0", "lambda_over_4pi_w", "kappa_scale", "chi0",
    "t_start", "t_stop", "t_step", "outputs", "entropy_units", "density_times",
    "oracle_time", "oracle_theta", "oracle_width_cm", "oracle_points_per_width",
}
_REQUIRED = ("envelope", "t0", "T1", "mu0", "lambda_over_4pi_w")


def _parse_lines(text: str, problems: list[str]) -> dict[str, str]:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            problems.append(f"line {lineno}: expected 'key = value'")
            continue
        if key not in _KEYS:
            problems.append(f"line {lineno}: unknown key '{key}'")
            continue
        if key in raw:
            problems.append(f"line {lineno}: duplicate key '{key}'")
        raw[key] = value.strip()
    return raw


class _Reader:
    def __init__(self, raw, problems):
        self.raw, self.problems = raw, problems

    def number(self, key, default=None, *, integer=False, minimum=None, strict=False):
        if key not in self.raw:
            return default
        text = self.raw[key]
        try:
            value = int(text) if integer else float(text)
        except ValueError:
            self.problems.append(f"{key}: cannot parse {text!r} as a number")
            return default
        if not math.isfinite(value):
            self.problems.append(f"{key}: must be finite, got {text}")
            return default
        if minimum is not None and (value <= minimum if strict else value < minimum):
            rel = ">" if strict else ">="
            self.problems.append(f"{key}: must be {rel} {minimum}, got {text}")
        return value

    def number_list(self, key):
        items = [s.strip() for s in self.raw.get(key, "").split(",") if s.strip()]
        out = []
        for s in items:
            try:
                v = float(s)
            except ValueError:
                self.problems.append(f"{key}: cannot parse {s!r} as a number")
                continue
            if not math.isfinite(v):
                self.problems.append(f"{key}: values must be finite, got {s}")
                continue
            out.append(v)
        return tuple(out)


def _load_table(path: Path, problems: list[str]):
    try:
        with path.open(encoding="utf-8", newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        problems.append(f"envelope_table: cannot read {path}: {exc.strerror}")
        return None
    knots = []
    for row in rows:
        try:
            knots.append((float(row[0]), float(row[1])))
        except (ValueError, IndexError):
            if knots:  # only a leading header row is tolerated
                problems.append(f"envelope_table: bad row {row!r}")
    return tuple(knots)


def parse_config_text(text: str, base_dir: Path | str = ".") -> ScenarioConfig:
    """Parse and validate; every violated constraint is reported at once."""
    problems: list[str] = []
    raw = _parse_lines(text, problems)
    for key in _REQUIRED:
        if key not in raw:
            problems.append(f"missing required key '{key}'")
    rd = _Reader(raw, problems)

    family = None
    if "envelope" in raw:
        try:
            family = Envelope(raw["envelope"].lower())
        except ValueError:
            choices = ", ".join(e.value for e in Envelope)
            problems.append(f"envelope: {raw['envelope']!r} is not one of {choices}")
    table = None
    if family is Envelope.CUSTOM_TABLE:
        if "envelope_table" not in raw:
            problems.append("envelope_table is required for envelope = custom_table")
        else:
            table = _load_table(Path(base_dir) / raw["envelope_table"], problems)

    t0 = rd.number("t0", 0.0)
    T1 = rd.number("T1", 1.0, minimum=0.0, strict=True)
    spp = rd.number("samples_per_period", 512, integer=True, minimum=MIN_SAMPLES_PER_PERIOD)
    mu0 = rd.number("mu0", 0.0, minimum=0.0)
    l4 = rd.number("lambda_over_4pi_w", 1.0, minimum=0.0, strict=True)
    kappa_scale = rd.number("kappa_scale", 0.0, minimum=0.0)
    chi0 = rd.number("chi0", 0.0)
    start = rd.number("t_start", 0.0)
    stop = rd.number("t_stop", (t0 or 0.0) + (T1 or 0.0) + 10.0)
    step = rd.number("t_step", 1.0 / 64, minimum=0.0, strict=True)
    if stop is not None and start is not None and stop < start:
        problems.append(f"t_stop ({stop}) must not precede t_start ({start})")

    outputs = set()
    for name in (s.strip() for s in raw.get("outputs", "").split(",")):
        if not name:
            continue
        try:
            outputs.add(Output(name.lower()))
        except ValueError:
            problems.append(f"outputs: unknown output {name!r}")
    if Output.HFUNC in outputs and step is not None and step > 1.0 / MIN_SAMPLES_PER_PERIOD:
        problems.append(f"t_step = {step} exceeds T/{MIN_SAMPLES_PER_PERIOD}, "
                        "the largest step allowed with HFUNC output")
    if Output.HFUNC in outputs and start is not None and t0 is not None and start > t0:
        problems.append(f"t_start ({start}) must not be after t0 ({t0}) with HFUNC output")

    units = raw.get("entropy_units", NATS).lower()
    if units not in (NATS, BITS):
        problems.append(f"entropy_units: must be '{NATS}' or '{BITS}', got {units!r}")
    density_times = rd.number_list("density_times")
    if Output.DENSITY in outputs and not density_times:
        problems.append("density_times must list at least one time with DENSITY output")

    oracle = OracleSettings(
        time=rd.number("oracle_time"),
        theta=rd.number("oracle_theta", 0.0),
        width_cm=rd.number("oracle_width_cm", 1e-5, minimum=0.0, strict=True),
        points_per_width=rd.number("oracle_points_per_width", 8, integer=True, minimum=2),
    )

    pulse = None
    if family is not None and not problems:
        try:
            pulse = PulseSpec(family, t0, T1, spp, table)
        except ConfigurationError as exc:
            problems.extend(exc.violations)
    if problems:
        raise ConfigurationError(problems)
    return ScenarioConfig(
        pulse=pulse, mu0=mu0, lambda_over_4pi_w=l4, kappa_scale=kappa_scale, chi0=chi0,
        time_grid=TimeGrid(start, stop, step), outputs=frozenset(outputs),
        entropy_units=units, density_times=density_times, oracle=oracle, source=raw,
    )


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config_text(text, path.parent)
