"""Run configuration: INI-style sections, strict keys, typed values.

Every key is optional; omitted keys take the defaults below. Unknown sections
or keys are rejected with the line they appear on.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .basis import ConfigurationError, QuadGrid
from .engine import EngineConfig
from .generalized import ScatteringConfig

EXPERIMENTS = ("evolve", "joint", "coherence", "verify", "wigner", "scattering", "gamma-oracle")


class ConfigError(ConfigurationError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line


@dataclass(frozen=True)
class StateSettings:
    kind: str = "vacuum"
    alpha_re: float = 0.0
    alpha_im: float = 0.0
    theta: float = 0.0
    level: int = 0

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)


@dataclass(frozen=True)
class CoherenceSettings:
    delta: str = "auto"
    x: float = 0.0
    n_theta: int = 73
    delta_min: float = 0.1
    delta_max: float = 4.0
    delta_points: int = 79


@dataclass(frozen=True)
class JointSettings:
    n_points: int = 81


@dataclass(frozen=True)
class WignerSettings:
    x_min: float = -5.0
    x_max: float = 5.0
    n_points: int = 101


@dataclass(frozen=True)
class SweepSettings:
    gammas: str = "1e-4,1e-3,1e-2,3e-2,1e-1"
    detunings: str = "0.0025,0.005,0.01,0.02,0.04"
    masses: str = "0,0.05,0.1,0.15,0.2,0.25"


@dataclass(frozen=True)
class GammaOracleSettings:
    omega: float = 1.0
    epsilons: str = "0.02,0.05"
    Omegas: str = "25,50,100"
    cutoff_c: int = 20
    cutoff_b: int = 6


@dataclass(frozen=True)
class RunSettings:
    output_dir: str = "out"
    sample_times: str | None = None


DEFAULT_SAMPLE_TIMES = {
    "evolve": "0:12:0.1",
    "joint": "0,12",
    "coherence": "0,12",
    "verify": "0,6,12",
}

DEFAULT_STATE_J = {
    "evolve": StateSettings("coherent", alpha_re=2.0),
    "wigner": StateSettings("cat", alpha_re=2.0, theta=math.pi),
}


@dataclass
class RunConfig:
    experiment: str
    run: RunSettings = field(default_factory=RunSettings)
    engine: EngineConfig = field(default_factory=EngineConfig)
    state_j: StateSettings = field(default_factory=lambda: StateSettings("cat", alpha_re=2.0))
    state_k: StateSettings = field(default_factory=StateSettings)
    grid: QuadGrid = field(default_factory=QuadGrid)
    joint: JointSettings = field(default_factory=JointSettings)
    coherence: CoherenceSettings = field(default_factory=CoherenceSettings)
    wigner: WignerSettings = field(default_factory=WignerSettings)
    scattering: ScatteringConfig = field(default_factory=ScatteringConfig)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    gamma_oracle: GammaOracleSettings = field(default_factory=GammaOracleSettings)

    @property
    def sample_times(self) -> list[float]:
        text = self.run.sample_times
        if text is None:
            text = DEFAULT_SAMPLE_TIMES.get(self.experiment, "")
        return parse_times(text)

    def as_dict(self) -> dict:
        out = {"experiment": self.experiment}
        for name in SECTIONS:
            out[name] = asdict(getattr(self, name))
        out["run"]["sample_times_resolved"] = self.sample_times
        return out


SECTIONS = {
    "run": RunSettings,
    "engine": EngineConfig,
    "state_j": StateSettings,
    "state_k": StateSettings,
    "grid": QuadGrid,
    "joint": JointSettings,
    "coherence": CoherenceSettings,
    "wigner": WignerSettings,
    "scattering": ScatteringConfig,
    "sweep": SweepSettings,
    "gamma_oracle": GammaOracleSettings,
}


def parse_times(text: str) -> list[float]:
    """'a,b,c' or 'start:stop:step' (inclusive of stop); empty string -> []."""
    text = (text or "").strip()
    if not text:
        return []
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ConfigurationError("sample_times step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


def parse_floats(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _coerce(cls, key: str, raw: str):
    ftype = {f.name: f.type for f in fields(cls)}[key]
    ftype = str(ftype)
    raw = raw.strip()
    if "int" in ftype and "float" not in ftype:
        return int(raw)
    if "float" in ftype:
        return float(eval_number(raw))
    if "None" in ftype and raw.lower() in ("none", ""):
        return None if raw.lower() == "none" else raw
    return raw


def eval_number(raw: str) -> float:
    """Plain floats plus 'pi' multiples such as '0.5*pi' or 'pi/2'."""
    if re.fullmatch(r"[0-9eE+\-*/. ()pi]+", raw) and "pi" in raw:
        return float(eval(raw, {"__builtins__": {}}, {"pi": math.pi}))
    return float(raw)


def _line_of(text: str, section: str | None, key: str | None = None) -> int | None:
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", stripped)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return lineno
            continue
        if key is not None and current == section:
            k = re.split(r"[=:]", stripped, maxsplit=1)[0].strip()
            if k == key:
                return lineno
    return None


def load_config(experiment: str, text: str = "", overrides=(), source: str = "<config>") -> RunConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}", source=source)
    parser = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], line, source) from exc

    values: dict[str, dict[str, tuple[str, int | None]]] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", _line_of(text, section), source)
        for key, raw in parser.items(section):
            values.setdefault(section, {})[key] = (raw, _line_of(text, section, key))
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}", source="--set")
        lhs, raw = item.split("=", 1)
        section, key = lhs.strip().split(".", 1)
        if section not in SECTIONS:
            raise ConfigError(f"unknown section {section!r} in --set", source="--set")
        values.setdefault(section, {})[key.strip()] = (raw, None)

    cfg = RunConfig(experiment=experiment)
    if "state_j" not in values and experiment in DEFAULT_STATE_J:
        cfg.state_j = DEFAULT_STATE_J[experiment]
    for section, items in values.items():
        cls = SECTIONS[section]
        known = {f.name for f in fields(cls) if f.init}
        kwargs = {}
        for key, (raw, line) in items.items():
            src = source if line is not None else "--set"
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in [{section}]", line, src)
            try:
                kwargs[key] = _coerce(cls, key, raw)
            except (ValueError, SyntaxError) as exc:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r} ({exc})", line, src) from exc
        try:
            setattr(cfg, section, replace(getattr(cfg, section), **kwargs))
        except ConfigurationError as exc:
            line = min((ln for _, ln in items.values() if ln is not None), default=None)
            raise ConfigError(f"[{section}] {exc}", line, source) from exc
    _validate(cfg, source)
    return cfg


def _validate(cfg: RunConfig, source: str):
    try:
        times = cfg.sample_times
    except (ValueError, ConfigurationError) as exc:
        raise ConfigError(f"bad sample_times: {exc}", source=source) from exc
    if any(t < 0 or t > cfg.engine.t_final + 1e-12 for t in times):
        raise ConfigError(f"sample_times must lie in [0, t_final={cfg.engine.t_final}]", source=source)
    if cfg.engine.steps > 0 and times:
        dt = cfg.engine.dt
        for t in times:
            if dt > 0 and abs(round(t / dt) * dt - t) > 1e-9 * max(1.0, t):
                raise ConfigError(f"sample time {t} is not a multiple of dt={dt:.6g}", source=source)
    for name in ("state_j", "state_k"):
        state = getattr(cfg, name)
        if state.kind not in ("vacuum", "coherent", "cat", "zero", "fock"):
            raise ConfigError(f"[{name}] unknown kind {state.kind!r}", source=source)
    if cfg.coherence.delta != "auto":
        try:
            float(cfg.coherence.delta)
        except ValueError as exc:
            raise ConfigError(f"[coherence] delta must be 'auto' or a number", source=source) from exc
    for text in (cfg.sweep.gammas, cfg.sweep.detunings, cfg.sweep.masses,
                 cfg.gamma_oracle.epsilons, cfg.gamma_oracle.Omegas):
        try:
            parse_floats(text)
        except ValueError as exc:
            raise ConfigError(f"bad number list {text!r}", source=source) from exc


def theta_grid(n_theta: int) -> np.ndarray:
    return np.linspace(0.0, 2 * np.pi, n_theta)
