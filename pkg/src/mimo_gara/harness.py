"""Monte-Carlo experiments: realizations, sweeps, aggregation and reports.

Seeding
-------
Every random stream is derived from the master seed with a fixed spawn
key. Realization ``r`` draws its users from key ``(0, r)``. The optimizer
of method ``m``, architecture ``a`` and subcarrier ``i`` uses key
``(1, r, m, a, i)``. Results therefore do not depend on the worker count,
on the number of realizations requested, or on which other methods run
alongside. The same realization seeds are reused at every sweep point and
for both architectures, so comparisons are paired.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .channel import assemble_channel
from .errors import InvalidConfigError, SimulationError
from .metrics import (
    AllocationResult,
    Method,
    digital_power_model,
    energy_efficiency,
    gain_matrix,
    hybrid_power_model,
    sum_rate_from_gains,
)
from .optimizer import SubcarrierProblem, _run_ga, _run_pso, eq_allocate
from .precoding import RfBeamformer, build_rf_beamformer, quantized_grid, rzf_precoder
from .scenario import ScenarioConfig, draw_realization

__all__ = [
    "Architecture",
    "SweepAxis",
    "ExperimentSpec",
    "ReportRow",
    "AggregateReport",
    "RealizationResult",
    "apply_sweep",
    "simulate_realization",
    "run_experiment",
    "emit_report",
    "load_report",
    "CSV_COLUMNS",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "sweep_axis",
    "sweep_value",
    "method",
    "architecture",
    "mean_rate_bpshz",
    "mean_rate_per_sc",
    "mean_ee_bpshzw",
    "gain_ratio_vs_eq",
    "std_rate",
    "n_realizations",
)

_METHOD_CODE = {Method.EQ: 0, Method.GA: 1, Method.PSO: 2}


class Architecture(str, enum.Enum):
    HP = "HP"
    FDP = "FDP"


_ARCH_CODE = {Architecture.HP: 0, Architecture.FDP: 1}


class SweepAxis(str, enum.Enum):
    P_T_DBM = "p_t_dbm"
    SUBCARRIERS = "subcarriers"
    USERS = "users"

    @classmethod
    def parse(cls, text: str) -> SweepAxis:
        aliases = {"pt": cls.P_T_DBM, "c": cls.SUBCARRIERS, "k": cls.USERS}
        key = text.strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


def apply_sweep(scenario: ScenarioConfig, axis: SweepAxis, value) -> ScenarioConfig:
    if axis is SweepAxis.P_T_DBM:
        return replace(scenario, total_power_dbm=float(value))
    if float(value) != int(value) or int(value) < 1:
        raise InvalidConfigError(f"{axis.value} sweep values must be positive integers, got {value}")
    if axis is SweepAxis.SUBCARRIERS:
        return replace(scenario, subcarriers=int(value))
    return scenario.with_users(int(value))


def _current_value(scenario: ScenarioConfig, axis: SweepAxis):
    return {
        SweepAxis.P_T_DBM: scenario.total_power_dbm,
        SweepAxis.SUBCARRIERS: scenario.subcarriers,
        SweepAxis.USERS: scenario.n_users,
    }[axis]


@dataclass
class ExperimentSpec:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    methods: tuple[tuple[Method, Architecture], ...] = ((Method.GA, Architecture.HP), (Method.EQ, Architecture.HP))
    sweep_axis: SweepAxis = SweepAxis.P_T_DBM
    sweep_values: tuple = ()
    realizations: int = 1000
    master_seed: int = 0
    trace_dir: Path | None = None
    workers: int = 1

    def __post_init__(self):
        self.methods = tuple((Method(m), Architecture(a)) for m, a in self.methods)
        self.sweep_axis = SweepAxis(self.sweep_axis)
        self.sweep_values = tuple(self.sweep_values)
        if self.realizations < 1:
            raise InvalidConfigError(f"realizations must be >= 1, got {self.realizations}")
        if not self.methods:
            raise InvalidConfigError("no methods requested")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidConfigError("master seed must be a 64-bit unsigned integer")
        for value in self.sweep_values:
            apply_sweep(self.scenario, self.sweep_axis, value)

    def points(self) -> list:
        if self.sweep_values:
            return list(self.sweep_values)
        return [_current_value(self.scenario, self.sweep_axis)]


def _rng(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


@dataclass
class RealizationResult:
    index: int
    allocations: dict[tuple[Method, Architecture], AllocationResult]
    traces: dict[Architecture, np.ndarray] = field(default_factory=dict)


def _rf_beamformer(scenario: ScenarioConfig) -> RfBeamformer:
    grid = quantized_grid(scenario.geometry)
    return build_rf_beamformer(scenario.groups, grid, scenario.geometry, scenario.rf_chains_per_group)


def simulate_realization(scenario: ScenarioConfig, methods, index: int, master_seed: int,
                         beamformer: RfBeamformer | None = None) -> RealizationResult:
    """Draw one network realization and score every requested (method, arch).

    EQ-RA is always evaluated for each architecture in use, since it is
    the reference for gain ratios. GA traces come back as a (C, Q) array
    per architecture.
    """
    archs = sorted({a for _, a in methods}, key=lambda a: _ARCH_CODE[a])
    wanted = set(methods) | {(Method.EQ, a) for a in archs}
    C, p_t, sigma2 = scenario.subcarriers, scenario.total_power_w, scenario.sigma2
    alpha = sigma2 / p_t

    users = draw_realization(scenario, _rng(master_seed, 0, index))
    h = assemble_channel(users, scenario).per_subcarrier
    result = RealizationResult(index, {})
    for arch in archs:
        if arch is Architecture.HP:
            f = beamformer if beamformer is not None else _rf_beamformer(scenario)
            eff = h @ f.matrix_f
        else:
            eff = h
        try:
            b = rzf_precoder(eff, alpha, scenario.n_users)
        except np.linalg.LinAlgError as exc:
            raise SimulationError(f"realization {index}, {arch.value}: {exc}") from exc
        gains = gain_matrix(eff, b)
        col_norms = np.sum(np.abs(b) ** 2, axis=-2)
        for method in sorted({m for m, a in wanted if a is arch}, key=lambda m: _METHOD_CODE[m]):
            powers = np.empty((C, scenario.n_users))
            traces = []
            for i in range(C):
                try:
                    if method is Method.EQ:
                        powers[i] = eq_allocate(b[i], p_t, C)
                        continue
                    problem = SubcarrierProblem(gains[i], col_norms[i], sigma2, p_t / C)
                    rng = _rng(master_seed, 1, index, _METHOD_CODE[method], _ARCH_CODE[arch], i)
                    if method is Method.GA:
                        powers[i], trace = _run_ga(problem, scenario.ga, rng)
                        traces.append(trace)
                    else:
                        powers[i], _ = _run_pso(problem, scenario.pso, rng)
                except (ValueError, ArithmeticError) as exc:
                    raise SimulationError(
                        f"realization {index}, {arch.value}/{method.value}, subcarrier {i + 1}: {exc}"
                    ) from exc
            rates = np.array([sum_rate_from_gains(gains[i], powers[i], sigma2) for i in range(C)])
            result.allocations[(method, arch)] = AllocationResult(
                powers=powers.T, per_subcarrier_rate=rates, total_rate=float(rates.sum()),
                method_tag=method,
            )
            if traces:
                result.traces[arch] = np.asarray(traces)
    return result


def _simulate_batch(args):
    scenario, methods, indices, seed, beamformer = args
    return [simulate_realization(scenario, methods, r, seed, beamformer) for r in indices]


@dataclass
class ReportRow:
    sweep_axis: str
    sweep_value: float
    method: str
    architecture: str
    mean_rate_bpshz: float
    mean_rate_per_sc: float
    mean_ee_bpshzw: float
    gain_ratio_vs_eq: float
    std_rate: float
    n_realizations: int


@dataclass
class AggregateReport:
    rows: list[ReportRow] = field(default_factory=list)

    def get(self, sweep_value, method, architecture=Architecture.HP) -> ReportRow:
        method, architecture = Method(method), Architecture(architecture)
        for row in self.rows:
            if (row.sweep_value == sweep_value and row.method == method.value
                    and row.architecture == architecture.value):
                return row
        raise KeyError((sweep_value, method.value, architecture.value))

    def to_dict(self) -> dict:
        return {"rows": [asdict(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, data: dict) -> AggregateReport:
        return cls([ReportRow(**r) for r in data["rows"]])


def _power_model(scenario: ScenarioConfig, arch: Architecture):
    m = scenario.geometry.n_antennas
    if arch is Architecture.HP:
        return hybrid_power_model(scenario.n_rf, m, scenario.rf_chain_power_w, scenario.phase_shifter_power_w)
    return digital_power_model(m, scenario.rf_chain_power_w, scenario.phase_shifter_power_w)


def _write_traces(trace_dir: Path, axis: SweepAxis, value, results: list[RealizationResult]):
    trace_dir.mkdir(parents=True, exist_ok=True)
    archs = sorted({a for r in results for a in r.traces}, key=lambda a: _ARCH_CODE[a])
    for arch in archs:
        path = trace_dir / f"ga_trace_{axis.value}_{value:g}_{arch.value}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["realization", "subcarrier", "generation", "best_fitness"])
            for res in results:
                for i, trace in enumerate(res.traces[arch]):
                    for q, val in enumerate(trace):
                        writer.writerow([res.index, i + 1, q + 1, repr(float(val))])


def _run_point(spec: ExperimentSpec, scenario: ScenarioConfig) -> list[RealizationResult]:
    methods = spec.methods
    beamformer = None
    if any(a is Architecture.HP for _, a in methods):
        beamformer = _rf_beamformer(scenario)
    indices = list(range(spec.realizations))
    if spec.workers <= 1:
        return [simulate_realization(scenario, methods, r, spec.master_seed, beamformer) for r in indices]
    chunks = [indices[w::spec.workers] for w in range(spec.workers)]
    jobs = [(scenario, methods, chunk, spec.master_seed, beamformer) for chunk in chunks if chunk]
    with ProcessPoolExecutor(max_workers=spec.workers) as pool:
        merged = [res for batch in pool.map(_simulate_batch, jobs) for res in batch]
    return sorted(merged, key=lambda res: res.index)


def run_experiment(spec: ExperimentSpec) -> AggregateReport:
    """Sample means over realizations for every sweep point and (method, arch)."""
    report = AggregateReport()
    for value in spec.points():
        scenario = apply_sweep(spec.scenario, spec.sweep_axis, value)
        log.info("sweep %s=%s: %d realizations", spec.sweep_axis.value, value, spec.realizations)
        results = _run_point(spec, scenario)
        if spec.trace_dir is not None:
            _write_traces(Path(spec.trace_dir), spec.sweep_axis, value, results)
        n = len(results)
        for method, arch in spec.methods:
            totals = np.array([res.allocations[(method, arch)].total_rate for res in results])
            eq_totals = np.array([res.allocations[(Method.EQ, arch)].total_rate for res in results])
            mean_rate = float(np.mean(totals))
            eq_mean = float(np.mean(eq_totals))
            report.rows.append(ReportRow(
                sweep_axis=spec.sweep_axis.value,
                sweep_value=float(value),
                method=method.value,
                architecture=arch.value,
                mean_rate_bpshz=mean_rate,
                mean_rate_per_sc=mean_rate / scenario.subcarriers,
                mean_ee_bpshzw=energy_efficiency(mean_rate, scenario.total_power_w, _power_model(scenario, arch)),
                gain_ratio_vs_eq=mean_rate / eq_mean if eq_mean > 0 else math.nan,
                std_rate=float(np.std(totals, ddof=1)) if n > 1 else 0.0,
                n_realizations=n,
            ))
    return report


def emit_report(report: AggregateReport, fmt: str, path: str | Path) -> None:
    """Write the report as CSV (fixed column order) or JSON."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if fmt == "csv":
                writer = csv.writer(fh)
                writer.writerow(CSV_COLUMNS)
                for row in report.rows:
                    writer.writerow([_csv_cell(getattr(row, c)) for c in CSV_COLUMNS])
            elif fmt == "json":
                json.dump(report.to_dict(), fh, indent=2)
                fh.write("\n")
            else:
                raise ValueError(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def _csv_cell(value):
    return repr(value) if isinstance(value, float) else value


def load_report(path: str | Path) -> AggregateReport:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        if path.suffix == ".json":
            return AggregateReport.from_dict(json.load(fh))
        types = {f.name: f.type for f in fields(ReportRow)}
        rows = []
        for rec in csv.DictReader(fh):
            rows.append(ReportRow(**{
                k: (v if types[k] == "str" else int(v) if types[k] == "int" else float(v))
                for k, v in rec.items()
            }))
        return AggregateReport(rows)
