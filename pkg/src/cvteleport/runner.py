"""Deterministic execution of a run configuration."""

from __future__ import annotations

import logging
import os
from pathlib import Path

import numpy as np

from .analysis import (
    FidelityReport,
    SampleWithSeed,
    Scenario,
    envelope_profile,
    kernel_profile,
    run_sweep,
)
from .channel import MeasurementOutcome, regime_for
from .config import SAMPLE, RunConfig, ScenarioSpec
from .errors import ParseError, TeleportError
from .grid import to_momentum
from .images import load_image, save_image, teleport_image
from .signals import (
    atomic_write_text,
    bundled_silhouette_path,
    load_signal,
    save_signal,
)

log = logging.getLogger(__name__)

REPORT_HEADER = "label,sigma_a,sigma_b,x3,p4,fidelity,l2_distortion"

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_PARTIAL_FAILURE = 2


def resolve_input_path(spec: str) -> Path:
    """Map the special ``bundled:silhouette`` spec to the packaged asset."""
    if spec == "bundled:silhouette":
        return bundled_silhouette_path()
    return Path(spec)


def scenario_seed(config_seed: int, spec: ScenarioSpec, index: int) -> int:
    """Per-scenario random seed: explicit, or derived from (master, index)."""
    if spec.seed is not None:
        return spec.seed
    return int(np.random.SeedSequence((config_seed, index)).generate_state(1)[0])


def _worker_cap() -> int | None:
    raw = os.environ.get("TELEPORT_THREADS")
    if raw is None:
        return None
    try:
        cap = int(raw)
    except ValueError:
        raise ParseError(f"TELEPORT_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise ParseError("TELEPORT_THREADS must be at least 1")
    return cap


def _is_graymap(path: Path) -> bool:
    try:
        with open(path, "rb") as fh:
            return fh.read(2) in (b"P2", b"P5")
    except OSError:
        return False


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report(path, report: FidelityReport) -> None:
    lines = [REPORT_HEADER]
    for row in report.rows:
        lines.append(
            ",".join(
                [
                    row.label,
                    _fmt(row.sigma_a),
                    _fmt(row.sigma_b),
                    _fmt(row.x3),
                    _fmt(row.p4),
                    _fmt(row.fidelity),
                    _fmt(row.l2_distortion),
                ]
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def _write_profiles(
    out_dir: Path, spec: ScenarioSpec, x3: float | None, p4: float | None, window
) -> None:
    if not spec.params.a_is_ideal and p4 is not None:
        sa = spec.params.sigma_a
        prof = kernel_profile(sa, p4, (-12.0 * sa, 12.0 * sa))
        lines = ["u,real,imag"] + [
            f"{float(u)!r},{float(re)!r},{float(im)!r}"
            for u, re, im in zip(prof.u, prof.real, prof.imag)
        ]
        atomic_write_text(out_dir / f"{spec.label}_kernel.csv", "\n".join(lines) + "\n")
    if not spec.params.b_is_ideal and x3 is not None:
        prof = envelope_profile(spec.params.sigma_b, x3, window)
        lines = ["x,value"] + [
            f"{float(x)!r},{float(v)!r}" for x, v in zip(prof.x, prof.values)
        ]
        atomic_write_text(
            out_dir / f"{spec.label}_envelope.csv", "\n".join(lines) + "\n"
        )


def _build_scenarios(config: RunConfig) -> list[Scenario]:
    scenarios = []
    for index, spec in enumerate(config.scenarios):
        if spec.needs_sampling:
            outcome = SampleWithSeed(
                seed=scenario_seed(config.seed, spec, index),
                fixed_x3=None if spec.x3 == SAMPLE else spec.x3,
                fixed_p4=None if spec.p4 == SAMPLE else spec.p4,
            )
        else:
            outcome = MeasurementOutcome(spec.x3, spec.p4)
        scenarios.append(
            Scenario(
                label=spec.label,
                params=spec.params,
                outcome=outcome,
                grid=spec.grid or config.grid,
            )
        )
    return scenarios


def run(config: RunConfig) -> int:
    """Execute a configuration; returns the process exit status.

    Config and I/O failures raise (the CLI maps them to exit 1); scenario
    failures are recorded in the report and yield exit 2.
    """
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    input_path = resolve_input_path(config.input_path)
    if not input_path.exists():
        raise ParseError("no such input file", path=str(input_path))
    if _is_graymap(input_path):
        return _run_image(config, input_path, out_dir)
    return _run_signal(config, input_path, out_dir)


def _run_signal(config: RunConfig, input_path: Path, out_dir: Path) -> int:
    state = load_signal(input_path, config.grid)
    scenarios = _build_scenarios(config)
    report = run_sweep(
        scenarios, state, max_workers=_worker_cap(), enforce_span_rule=True
    )
    write_report(out_dir / "report.csv", report)
    for spec, row in zip(config.scenarios, report.rows):
        if row.failed:
            log.error("scenario %s failed: %s", row.label, row.error)
            continue
        save_signal(out_dir / f"{row.label}_teleported.txt", row.output)
        save_signal(
            out_dir / f"{row.label}_teleported_p.txt",
            to_momentum(row.output),
            representation="p",
        )
        window = _support_window(row)
        _write_profiles(out_dir, spec, row.x3, row.p4, window)
    return EXIT_PARTIAL_FAILURE if report.any_failed else EXIT_OK


def _support_window(row):
    m = row.input_moments
    lo = m.mean_x - 0.75 * m.support_length
    hi = m.mean_x + 0.75 * m.support_length
    return (lo, hi)


def _run_image(config: RunConfig, input_path: Path, out_dir: Path) -> int:
    for spec in config.scenarios:
        if spec.needs_sampling:
            raise ParseError(
                f"scenario {spec.label!r}: sampled outcomes are not supported "
                "for image inputs"
            )
    asset = load_image(input_path)
    failures = 0
    rows = []
    for spec in config.scenarios:
        regime = regime_for(spec.params)
        outcome = MeasurementOutcome(spec.x3, spec.p4)
        try:
            result = teleport_image(asset, regime, outcome, config.image_mode)
        except TeleportError as exc:
            log.error("scenario %s failed: %s", spec.label, exc)
            failures += 1
            rows.append((spec, None, None))
            continue
        save_image(out_dir / f"{spec.label}.pgm", result.display)
        raw_lines = [
            " ".join(repr(float(v)) for v in line) for line in result.raw
        ]
        atomic_write_text(
            out_dir / f"{spec.label}_intensity.txt", "\n".join(raw_lines) + "\n"
        )
        valid = result.column_fidelities[~np.isnan(result.column_fidelities)]
        mean_fid = float(valid.mean()) if valid.size else float("nan")
        rows.append((spec, mean_fid, result))
        _write_profiles(out_dir, spec, spec.x3, spec.p4, (0.0, float(asset.height)))
    lines = [REPORT_HEADER]
    for spec, mean_fid, _ in rows:
        lines.append(
            ",".join(
                [
                    spec.label,
                    _fmt(spec.sigma_a),
                    _fmt(spec.sigma_b),
                    _fmt(float(spec.x3)),
                    _fmt(float(spec.p4)),
                    _fmt(mean_fid if mean_fid is not None else float("nan")),
                    "",
                ]
            )
        )
    atomic_write_text(out_dir / "report.csv", "\n".join(lines) + "\n")
    return EXIT_PARTIAL_FAILURE if failures else EXIT_OK
