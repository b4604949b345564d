"""YAML scenario files.

Schema::

    hbar: 1.0            # optional, default 1
    n: 1                 # optional, default 1
    grid: {N: 64, L: 16} # optional, default desk grid
    inputs:              # named field sources
      A: {builtin: gaussian, params: {width: 1.5}}          # phase space (default)
      psi: {builtin: gaussian, space: config}                # configuration space
      B: {file: b.mkf}                                       # relative to the scenario file
    params: {...}        # command-specific settings

Every input is resolved when the scenario is loaded, so a bad reference
fails before any computation starts.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import yaml

from .builtins import GENERATORS, generate
from .fieldio import read_field
from .grid import GridSpec, SampledField
from .symplectic import HbarContext

DESK = {"hbar": 1.0, "n": 1, "grid": {"N": 64, "L": 16.0}}
_TOP_KEYS = {"hbar", "n", "grid", "inputs", "params"}
_SPACES = ("phase", "config")


class ScenarioError(ValueError):
    """Malformed scenario (exit code 2)."""


@dataclass
class Scenario:
    ctx: HbarContext
    grid: GridSpec  # phase grid; the configuration grid is grid.config()
    inputs: dict = field(default_factory=dict)  # name -> SampledField
    params: dict = field(default_factory=dict)
    source: Optional[Path] = None
    raw: dict = field(default_factory=dict, repr=False)  # parsed mapping, for refinement
    base: Path = Path(".")

    @property
    def config_grid(self) -> GridSpec:
        return self.grid.config()

    def input(self, name: str) -> SampledField:
        try:
            return self.inputs[name]
        except KeyError:
            raise ScenarioError(f"scenario has no input named {name!r}") from None

    def has(self, name: str) -> bool:
        return name in self.inputs

    def refined(self, factor: int = 2) -> "Scenario":
        """The same scenario on a grid with ``factor`` times as many points per axis."""
        if any("file" in _mapping(v, "input") for v in _mapping(self.raw.get("inputs"), "inputs").values()):
            raise ValueError("refinement needs builtin inputs; file inputs have a fixed grid")
        data = dict(self.raw)
        data["grid"] = {"N": self.grid.points[0] * factor, "L": self.grid.extent[0]}
        return scenario_from_dict(data, self.base, self.source)

    def param(self, key: str, default: Any = None, kind: type = float) -> Any:
        if key not in self.params:
            return default
        v = self.params[key]
        if kind is bool:
            if isinstance(v, bool):
                return v
            raise ScenarioError(f"parameter {key!r}={v!r} must be true or false")
        try:
            if kind is float and isinstance(v, str) and v.strip().lower() in ("inf", "infinity"):
                return math.inf
            return kind(v)
        except (TypeError, ValueError):
            raise ScenarioError(f"parameter {key!r}={v!r} is not a valid {kind.__name__}") from None


def _mapping(v, where: str) -> Mapping:
    if v is None:
        return {}
    if not isinstance(v, Mapping):
        raise ScenarioError(f"{where} must be a mapping")
    return v


def _resolve_input(name: str, entry, scen: Scenario, base: Path) -> SampledField:
    entry = _mapping(entry, f"input {name!r}")
    space = entry.get("space", "phase")
    if space not in _SPACES:
        raise ScenarioError(f"input {name!r}: space must be one of {_SPACES}")
    grid = scen.grid if space == "phase" else scen.config_grid
    if ("builtin" in entry) == ("file" in entry):
        raise ScenarioError(f"input {name!r} needs exactly one of 'builtin' or 'file'")
    if "file" in entry:
        path = Path(entry["file"])
        path = path if path.is_absolute() else base / path
        if not path.is_file():
            raise ScenarioError(f"input {name!r}: no such file {path}")
        F, fctx = read_field(path, expect_hbar=scen.ctx.hbar)
        if fctx.n != scen.ctx.n:
            raise ValueError(f"input {name!r}: file has n = {fctx.n}, scenario has n = {scen.ctx.n}")
        return F
    kind = entry["builtin"]
    if kind not in GENERATORS:
        raise ScenarioError(f"input {name!r}: unknown builtin {kind!r}; choose from {sorted(GENERATORS)}")
    params = dict(_mapping(entry.get("params"), f"input {name!r} params"))
    try:
        return generate(kind, grid, scen.ctx, **params)
    except ValueError as exc:
        raise ScenarioError(f"input {name!r}: {exc}") from None


def scenario_from_dict(data: Mapping, base: Union[str, os.PathLike] = ".", source: Optional[Path] = None) -> Scenario:
    data = _mapping(data, "scenario")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ScenarioError(f"unknown top-level keys {sorted(unknown)}")
    g = _mapping(data.get("grid", DESK["grid"]), "grid")
    try:
        ctx = HbarContext(float(data.get("hbar", DESK["hbar"])), int(data.get("n", DESK["n"])))
        if ctx.n != 1:
            raise ScenarioError("only n = 1 scenarios are supported")
        grid = GridSpec.uniform(2 * ctx.n, int(g.get("N", DESK["grid"]["N"])), float(g.get("L", DESK["grid"]["L"])))
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid context or grid: {exc}") from None
    params = dict(_mapping(data.get("params"), "params"))
    scen = Scenario(ctx, grid, params=params, source=source, raw=dict(data), base=Path(base))
    for name, entry in _mapping(data.get("inputs"), "inputs").items():
        scen.inputs[str(name)] = _resolve_input(str(name), entry, scen, Path(base))
    return scen


def load_scenario(path: Union[str, os.PathLike, None]) -> Scenario:
    """Load a scenario file; ``None`` gives the default desk scenario with no inputs."""
    if path is None:
        return scenario_from_dict({})
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse scenario {path}: {exc}") from None
    return scenario_from_dict(data or {}, base=path.parent, source=path)
