"""Run configuration: line-based ``key = value`` files with [scenario] sections.

Example::

    input = bundled:silhouette
    grid = -256:256:1024
    output_dir = out
    seed = 42

    [scenario]
    label = strong
    sigma_a = 0.0055555555555555558
    sigma_b = ideal
    x3 = 0
    p4 = 180

Sentinel widths are spelled exactly ``ideal``; outcome coordinates may be
``sample`` to draw them from the outcome distribution using the scenario seed
(or one derived from the master seed and the scenario index).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError
from .grid import GridSpec
from .optics import IDEAL, SqueezingParams

_GLOBAL_KEYS = {"input", "grid", "output_dir", "seed", "image_mode"}
_SCENARIO_KEYS = {"label", "sigma_a", "sigma_b", "x3", "p4", "seed", "grid"}

#: Outcome-coordinate spelling that requests sampling.
SAMPLE = "sample"


@dataclass
class ScenarioSpec:
    label: str
    sigma_a: object  # float or IDEAL
    sigma_b: object
    x3: object  # float or SAMPLE
    p4: object
    seed: int | None = None
    grid: GridSpec | None = None

    @property
    def params(self) -> SqueezingParams:
        return SqueezingParams(self.sigma_a, self.sigma_b)

    @property
    def needs_sampling(self) -> bool:
        return self.x3 == SAMPLE or self.p4 == SAMPLE


@dataclass
class RunConfig:
    input_path: str
    grid: GridSpec
    output_dir: str
    scenarios: list[ScenarioSpec] = field(default_factory=list)
    seed: int = 0
    image_mode: str = "column-wise"


def parse_grid(spec: str, path=None, line=None) -> GridSpec:
    """Parse ``xmin:xmax:n`` into a grid covering [xmin, xmax)."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ParseError(f"grid must be xmin:xmax:n, got {spec!r}", path, line)
    try:
        x_min, x_max, n = float(parts[0]), float(parts[1]), int(parts[2])
        return GridSpec.from_bounds(x_min, x_max, n)
    except ValueError as exc:
        raise ParseError(f"bad grid {spec!r}: {exc}", path, line)


def _parse_width(value: str, key: str, path, line):
    if value == "ideal":
        return IDEAL
    try:
        width = float(value)
    except ValueError:
        raise ParseError(f"{key} must be a number or 'ideal', got {value!r}", path, line)
    if not width > 0:
        raise ParseError(f"{key} must be positive, got {value!r}", path, line)
    return width


def _parse_coordinate(value: str, key: str, path, line):
    if value == SAMPLE:
        return SAMPLE
    try:
        return float(value)
    except ValueError:
        raise ParseError(
            f"{key} must be a number or 'sample', got {value!r}", path, line
        )


def parse_config(path) -> RunConfig:
    """Parse and validate a run configuration file."""
    path = Path(path)
    if not path.exists():
        raise ParseError("no such file", path=str(path))
    text = path.read_text(encoding="utf-8")
    pstr = str(path)

    globals_raw: dict[str, str] = {}
    scenario_raws: list[dict] = []
    current: dict | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped == "[scenario]":
            current = {"_line": lineno}
            scenario_raws.append(current)
            continue
        if stripped.startswith("["):
            raise ParseError(f"unknown section {stripped!r}", pstr, lineno)
        if "=" not in stripped:
            raise ParseError("expected 'key = value'", pstr, lineno)
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if current is None:
            if key not in _GLOBAL_KEYS:
                raise ParseError(f"unknown key {key!r}", pstr, lineno)
            globals_raw[key] = value
        else:
            if key not in _SCENARIO_KEYS:
                raise ParseError(f"unknown scenario key {key!r}", pstr, lineno)
            current[key] = (value, lineno)

    if "input" not in globals_raw:
        raise ParseError("missing required key 'input'", pstr)
    if "output_dir" not in globals_raw:
        raise ParseError("missing required key 'output_dir'", pstr)
    grid = parse_grid(globals_raw.get("grid", "-256:256:1024"), pstr)
    try:
        seed = int(globals_raw.get("seed", "0"))
    except ValueError:
        raise ParseError("seed must be an integer", pstr)
    image_mode = globals_raw.get("image_mode", "column-wise")
    if image_mode not in ("column-wise", "row-wise"):
        raise ParseError("image_mode must be column-wise or row-wise", pstr)

    scenarios = []
    labels = set()
    for raw in scenario_raws:
        start = raw.pop("_line")
        missing = {"label", "sigma_a", "sigma_b", "x3", "p4"} - set(raw)
        if missing:
            raise ParseError(
                f"scenario is missing {sorted(missing)}", pstr, start
            )
        label, _ = raw["label"]
        if label in labels:
            raise ParseError(f"duplicate scenario label {label!r}", pstr, start)
        labels.add(label)
        sigma_a = _parse_width(raw["sigma_a"][0], "sigma_a", pstr, raw["sigma_a"][1])
        sigma_b = _parse_width(raw["sigma_b"][0], "sigma_b", pstr, raw["sigma_b"][1])
        x3 = _parse_coordinate(raw["x3"][0], "x3", pstr, raw["x3"][1])
        p4 = _parse_coordinate(raw["p4"][0], "p4", pstr, raw["p4"][1])
        scen_seed = None
        if "seed" in raw:
            try:
                scen_seed = int(raw["seed"][0])
            except ValueError:
                raise ParseError("scenario seed must be an integer", pstr, raw["seed"][1])
        scen_grid = parse_grid(raw["grid"][0], pstr, raw["grid"][1]) if "grid" in raw else None
        scenarios.append(
            ScenarioSpec(label, sigma_a, sigma_b, x3, p4, scen_seed, scen_grid)
        )

    return RunConfig(
        input_path=globals_raw["input"],
        grid=grid,
        output_dir=globals_raw["output_dir"],
        scenarios=scenarios,
        seed=seed,
        image_mode=image_mode,
    )
