"""JSON scenario configuration shared by the CLI subcommands."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .params import ModelParams

__all__ = ["ConfigError", "DataSpec", "ScenarioConfig", "PRESETS", "load_config"]


class ConfigError(ValueError):
    """Invalid or unreadable scenario configuration."""


def _sin(x, L):
    return np.sin(np.pi * x / L)


def _bump(x, L):
    return 16.0 * x**2 * (L - x) ** 2 / L**4


PRESETS = {
    "sin_pi_over_L": _sin,
    "bump": _bump,
    "zero": lambda x, L: np.zeros_like(x),
    "const": lambda x, L: np.ones_like(x),
}


@dataclass(frozen=True)
class DataSpec:
    """A named preset times ``scale``, or samples on a uniform grid of ``[0, L]``."""

    preset: str | None = None
    scale: float = 1.0
    samples: tuple[float, ...] | None = None

    @classmethod
    def parse(cls, raw, what: str) -> "DataSpec":
        if isinstance(raw, str):
            raw = {"preset": raw}
        if not isinstance(raw, dict):
            raise ConfigError(f"{what}: expected a preset name or an object, got {raw!r}")
        unknown = set(raw) - {"preset", "scale", "samples"}
        if unknown:
            raise ConfigError(f"{what}: unknown keys {sorted(unknown)}")
        if ("preset" in raw) == ("samples" in raw):
            raise ConfigError(f"{what}: give exactly one of 'preset' or 'samples'")
        if "preset" in raw and raw["preset"] not in PRESETS:
            raise ConfigError(f"{what}: unknown preset {raw['preset']!r}; known: {sorted(PRESETS)}")
        samples = raw.get("samples")
        if samples is not None:
            samples = tuple(float(v) for v in samples)
            if len(samples) < 2:
                raise ConfigError(f"{what}: need at least two samples")
        return cls(raw.get("preset"), float(raw.get("scale", 1.0)), samples)

    @property
    def is_zero(self) -> bool:
        if self.samples is not None:
            return not any(self.samples)
        return self.preset == "zero" or self.scale == 0

    def function(self, L: float):
        """Callable of ``x``; samples are interpolated linearly."""
        if self.samples is not None:
            grid = np.linspace(0.0, L, len(self.samples))
            values = np.asarray(self.samples) * self.scale
            return lambda x: np.interp(x, grid, values)
        fun = PRESETS[self.preset]
        return lambda x: self.scale * fun(np.asarray(x, dtype=float), L)


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams
    L: float
    T: float
    conductivity: float | tuple[float, ...]
    U0: DataSpec
    V0: DataSpec
    F: DataSpec
    n_modes: int = 20
    quad_points: int | None = None
    eval_points: int = 33
    eval_steps: int = 64
    element_counts: tuple[int, ...] = (32,)
    step_counts: tuple[int, ...] = (32,)
    output_dir: Path = field(default=Path("out"))
    precision: int = 17

    @property
    def constant_conductivity(self) -> bool:
        return not isinstance(self.conductivity, tuple) or len(set(self.conductivity)) == 1

    @property
    def k_bar(self) -> float:
        return self.conductivity[0] if isinstance(self.conductivity, tuple) else self.conductivity

    def refinement_pairs(self) -> list[tuple[int, int]]:
        """``(n, M)`` pairs: zipped lists, or a fixed ``M`` when one element count is given."""
        if len(self.element_counts) == 1:
            return [(n, self.element_counts[0]) for n in self.step_counts]
        if len(self.element_counts) != len(self.step_counts):
            raise ConfigError("element_counts and step_counts must have equal length")
        return list(zip(self.step_counts, self.element_counts))

    def source(self):
        """``F(x, t)``; presets are constant in time."""
        fun = self.F.function(self.L)
        return lambda x, t: fun(x) + 0.0 * t


def _get(block: dict, key: str, default=None, required: bool = False):
    if key in block:
        return block[key]
    if required:
        raise ConfigError(f"missing required key {key!r}")
    return default


def _int_list(value, what: str) -> tuple[int, ...]:
    values = value if isinstance(value, list) else [value]
    try:
        out = tuple(int(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: expected integers, got {value!r}") from exc
    if any(v < 1 for v in out):
        raise ConfigError(f"{what}: entries must be positive")
    return out


def parse_config(raw: dict, base: Path | None = None) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    problem = _get(raw, "problem", required=True)
    if not isinstance(problem, dict):
        raise ConfigError("problem must be an object")
    spectral = raw.get("spectral", {})
    rothe = raw.get("rothe", {})
    output = raw.get("output", {})
    try:
        params = ModelParams(
            alpha=float(_get(problem, "alpha", required=True)),
            tau_q_alpha=float(_get(problem, "tau_q_alpha", required=True)),
            rho=float(problem.get("rho", 1.0)),
            c=float(problem.get("c", 1.0)),
            a=float(problem.get("a", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"problem: {exc}") from exc
    L = float(problem.get("L", 1.0))
    T = float(problem.get("T", 1.0))
    if not (L > 0 and T > 0):
        raise ConfigError("problem: L and T must be positive")
    k = problem.get("k", 1.0)
    if isinstance(k, list):
        k = tuple(float(v) for v in k)
        if any(not v > 0 for v in k):
            raise ConfigError("problem: conductivity must be positive")
    else:
        k = float(k)
        if not k > 0:
            raise ConfigError("problem: conductivity must be positive")
    step_counts = _int_list(rothe.get("step_counts", [32]), "rothe.step_counts")
    if any(b <= a for a, b in zip(step_counts, step_counts[1:])):
        raise ConfigError("rothe.step_counts must be strictly increasing")
    element_counts = _int_list(rothe.get("element_counts", rothe.get("element_count", [32])), "rothe.element_counts")
    if isinstance(k, tuple) and any(M != len(k) for M in element_counts):
        raise ConfigError("per-element conductivity list must match every element count")
    directory = Path(output.get("directory", "out"))
    if base is not None and not directory.is_absolute():
        directory = base / directory
    cfg = ScenarioConfig(
        params=params,
        L=L,
        T=T,
        conductivity=k,
        U0=DataSpec.parse(problem.get("U0", "zero"), "problem.U0"),
        V0=DataSpec.parse(problem.get("V0", "zero"), "problem.V0"),
        F=DataSpec.parse(problem.get("F", "zero"), "problem.F"),
        n_modes=int(spectral.get("n_modes", 20)),
        quad_points=spectral.get("quad_points"),
        eval_points=int(spectral.get("eval_points", 33)),
        eval_steps=int(spectral.get("eval_steps", 64)),
        element_counts=element_counts,
        step_counts=step_counts,
        output_dir=directory,
        precision=int(output.get("precision", 17)),
    )
    u0 = cfg.U0.function(L)(np.array([0.0, L]))
    if np.any(np.abs(u0) > 1e-12):
        raise ConfigError("problem.U0 must vanish at both endpoints")
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    try:
        return parse_config(raw)
    except ConfigError:
        raise
    except (TypeError, AttributeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed config ({exc})") from exc
