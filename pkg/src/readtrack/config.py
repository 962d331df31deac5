"""Flat ``key = value`` run configuration.

Every key is optional and defaults to the reference experiment. Lines
starting with ``#`` or ``;`` are comments. Example::

    num_lines = 25
    sigma_levels = 0.2, 0.46, 1
    rng_seed = 7
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from readtrack.geometry import PageGeometry, ReadTrackError
from readtrack.lines import HmmParams
from readtrack.saccade import DEFAULT_DELTA_T, MotionModel
from readtrack.simulate import (
    DEFAULT_FIXATIONS_PER_LINE,
    DEFAULT_PAGES,
    DEFAULT_SEED,
    SIGMA_LEVELS,
    SimConfig,
)

SEED_ENV = "GPT_SEED"
_SECTION = "run"


class ConfigError(ReadTrackError):
    pass


@dataclass(frozen=True)
class RunConfig:
    num_lines: int = 25
    line_spacing: float = 25.0
    text_width: float = 600.0
    emission_std: Optional[float] = None
    p_stay: float = 0.94
    p_advance: float = 0.05
    p_other_total: float = 0.01
    initial_mass_on_line1: float = 0.9
    sweep_cue: bool = True
    sweep_std: Optional[float] = None
    delta_t: float = DEFAULT_DELTA_T
    sigma: float = 1.0
    sigma_levels: tuple = SIGMA_LEVELS
    fixations_per_line: int = DEFAULT_FIXATIONS_PER_LINE
    pages: int = DEFAULT_PAGES
    rng_seed: int = DEFAULT_SEED
    normalized_coords: bool = False
    input: Optional[str] = None
    output: Optional[str] = None

    def geometry(self) -> PageGeometry:
        return PageGeometry(self.num_lines, self.line_spacing, self.text_width)

    def hmm(self) -> HmmParams:
        return HmmParams(
            p_stay=self.p_stay,
            p_advance=self.p_advance,
            p_other_total=self.p_other_total,
            emission_std=self.emission_std,
            initial_mass_on_line1=self.initial_mass_on_line1,
            sweep_cue=self.sweep_cue,
            sweep_std=self.sweep_std,
        )

    def motion(self) -> MotionModel:
        return MotionModel(delta_t=self.delta_t, sigma=self.sigma)

    def sim(self, sigma: float) -> SimConfig:
        return SimConfig(
            geometry=self.geometry(),
            sigma=sigma,
            fixations_per_line=self.fixations_per_line,
            pages=self.pages,
            rng_seed=self.rng_seed,
        )

    def validate(self) -> RunConfig:
        """Build every derived object once so bad values surface here."""
        problems = []
        for build in (self.geometry, self.hmm, self.motion):
            try:
                build()
            except ValueError as exc:
                problems.append(str(exc))
        for s in self.sigma_levels:
            try:
                self.sim(s)
            except ValueError as exc:
                problems.append(str(exc))
        if not self.sigma_levels:
            problems.append("sigma_levels is empty")
        if problems:
            raise ConfigError("invalid configuration: " + "; ".join(problems))
        return self


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


def _parse_levels(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


_PARSERS = {
    "num_lines": int,
    "line_spacing": float,
    "text_width": float,
    "emission_std": _parse_optional_float,
    "p_stay": float,
    "p_advance": float,
    "p_other_total": float,
    "initial_mass_on_line1": float,
    "sweep_cue": _parse_bool,
    "sweep_std": _parse_optional_float,
    "delta_t": float,
    "sigma": float,
    "sigma_levels": _parse_levels,
    "fixations_per_line": int,
    "pages": int,
    "rng_seed": int,
    "normalized_coords": _parse_bool,
    "input": str,
    "output": str,
}
assert set(_PARSERS) == {f.name for f in dataclasses.fields(RunConfig)}


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n{text}", source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    values = {}
    unknown, bad = [], []
    for key, raw in parser.items(_SECTION):
        if key not in _PARSERS:
            unknown.append(key)
            continue
        try:
            values[key] = _PARSERS[key](raw)
        except ValueError as exc:
            bad.append(f"{key} ({exc})")
    msgs = []
    if unknown:
        msgs.append(f"unknown key(s): {', '.join(sorted(unknown))}")
    if bad:
        msgs.append(f"unparseable value(s): {', '.join(bad)}")
    if msgs:
        raise ConfigError(f"{source}: " + "; ".join(msgs))
    return RunConfig(**values)


def load_config(path=None, env=None) -> RunConfig:
    """Read a config file (or defaults when ``path`` is None) and apply ``GPT_SEED``."""
    env = os.environ if env is None else env
    if path is None:
        config = RunConfig()
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        config = parse_config_text(text, str(path))
    seed = env.get(SEED_ENV)
    if seed:
        try:
            config = dataclasses.replace(config, rng_seed=int(seed))
        except ValueError:
            raise ConfigError(f"{SEED_ENV} is not an integer: {seed!r}") from None
    return config.validate()


def missing_keys(config: RunConfig, required, overrides: dict) -> list[str]:
    """Required io keys supplied neither by a CLI flag nor by the config."""
    return [k for k in required if overrides.get(k) is None and getattr(config, k) is None]


def with_overrides(config: RunConfig, **overrides) -> RunConfig:
    return dataclasses.replace(config, **{k: v for k, v in overrides.items() if v is not None})

