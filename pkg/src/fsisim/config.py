"""Run configuration: an INI-style ``key = value`` file with ``[section]`` headers.

Parsing is strict: unknown sections or keys, duplicate keys and malformed
lines are all errors.  Defaults (``REQUIRED`` marks keys without one):

=========== ================== =========== ===========================================
section     key                default     meaning
=========== ================== =========== ===========================================
grid        Nx                 REQUIRED    x-nodes (periodic)
grid        Nz                 REQUIRED    z-cells (Nz + 1 nodes)
grid        L                  1.0         channel period
physics     mu                 1.0         shear viscosity
physics     mu_prime           0.0         dilatational viscosity
physics     a                  1.0         pressure law ``p = a rho**gamma``
physics     gamma              1.4
physics     rho_bar            1.0         reference density
physics     alpha              1.0         beam rigidity
physics     beta               1.0         beam stretching
physics     delta              1.0         beam friction
initial     preset             steady      steady | density_bump | beam_kick | from_snapshot
initial     amplitude          0.0         perturbation amplitude
initial     mode               1           Fourier mode of the perturbation
initial     path               ""          snapshot file for ``from_snapshot``
numerics    dt                 1e-3        time step
numerics    window_steps       20          steps per coupling window
numerics    min_window_steps   1           halving floor
numerics    t_end              REQUIRED    final time
numerics    tol_pic            1e-8        Picard tolerance on the composite delta
numerics    max_iter           50          Picard iteration cap
numerics    lin_tol            1e-10       relative residual of the momentum solve
numerics    delta0             0.5         admissibility margin ``1 + eta >= delta0``
numerics    coupling_mode      window      window | step
numerics    compat_tol         1e-10       compatibility threshold at t = 0
output      dir                out         output directory
output      snapshot_every     0           steps between snapshots (0: final only)
output      timeseries_every   1           steps between timeseries rows
flags       allow_incompatible false       run even if the initial data fail (b)1
=========== ================== =========== ===========================================
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ValidationError
from .fields import Grid, make_grid
from .sources import PhysParams

PRESETS = ("steady", "density_bump", "beam_kick", "from_snapshot")
COUPLING_MODES = ("window", "step")


@dataclass(frozen=True)
class GridSpec:
    Nx: int
    Nz: int
    L: float = 1.0


@dataclass(frozen=True)
class PhysicsSpec:
    mu: float = 1.0
    mu_prime: float = 0.0
    a: float = 1.0
    gamma: float = 1.4
    rho_bar: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    delta: float = 1.0


@dataclass(frozen=True)
class InitialSpec:
    preset: str = "steady"
    amplitude: float = 0.0
    mode: int = 1
    path: str = ""


@dataclass(frozen=True)
class NumericsSpec:
    t_end: float
    dt: float = 1e-3
    window_steps: int = 20
    min_window_steps: int = 1
    tol_pic: float = 1e-8
    max_iter: int = 50
    lin_tol: float = 1e-10
    delta0: float = 0.5
    coupling_mode: str = "window"
    compat_tol: float = 1e-10


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "out"
    snapshot_every: int = 0
    timeseries_every: int = 1


@dataclass(frozen=True)
class FlagsSpec:
    allow_incompatible: bool = False


@dataclass(frozen=True)
class SimConfig:
    grid: GridSpec
    numerics: NumericsSpec
    physics: PhysicsSpec = field(default_factory=PhysicsSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    flags: FlagsSpec = field(default_factory=FlagsSpec)

    def __post_init__(self):
        validate(self)

    def make_grid(self) -> Grid:
        return make_grid(self.grid.Nx, self.grid.Nz, self.grid.L)

    def phys_params(self) -> PhysParams:
        return PhysParams(L=self.grid.L, **dataclasses.asdict(self.physics))

    @property
    def effective_window(self) -> int:
        return 1 if self.numerics.coupling_mode == "step" else self.numerics.window_steps

    def replace(self, **sections) -> "SimConfig":
        """Copy with whole sections or individual ``section__key`` values replaced."""
        updates = {}
        for key, value in sections.items():
            if "__" in key:
                sec, name = key.split("__", 1)
                base = updates.get(sec, getattr(self, sec))
                updates[sec] = dataclasses.replace(base, **{name: value})
            else:
                updates[key] = value
        return dataclasses.replace(self, **updates)


SECTIONS = {
    "grid": GridSpec,
    "physics": PhysicsSpec,
    "initial": InitialSpec,
    "numerics": NumericsSpec,
    "output": OutputSpec,
    "flags": FlagsSpec,
}


def _require(cond: bool, name: str, message: str):
    if not cond:
        raise ValidationError(name, message)


def validate(cfg: SimConfig) -> None:
    g, n, o = cfg.grid, cfg.numerics, cfg.output
    _require(g.Nx >= 4, "grid.Nx", "must be >= 4")
    _require(g.Nz >= 4, "grid.Nz", "must be >= 4")
    _require(g.L > 0, "grid.L", "must be positive")
    try:
        cfg.phys_params()
    except ValidationError as exc:
        raise ValidationError(f"physics.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    _require(cfg.initial.preset in PRESETS, "initial.preset", f"must be one of {PRESETS}")
    _require(cfg.initial.mode >= 0, "initial.mode", "must be >= 0")
    _require(2 * cfg.initial.mode <= g.Nx, "initial.mode", "exceeds the Nyquist mode of the grid")
    if cfg.initial.preset == "from_snapshot":
        _require(bool(cfg.initial.path), "initial.path", "required for from_snapshot")
    _require(n.dt > 0, "numerics.dt", "must be positive")
    _require(n.t_end > 0, "numerics.t_end", "must be positive")
    _require(n.tol_pic > 0, "numerics.tol_pic", "must be positive")
    _require(n.lin_tol > 0, "numerics.lin_tol", "must be positive")
    _require(n.compat_tol > 0, "numerics.compat_tol", "must be positive")
    _require(n.max_iter >= 1, "numerics.max_iter", "must be >= 1")
    _require(0 < n.delta0 < 1, "numerics.delta0", "must lie in (0, 1)")
    _require(n.window_steps >= 1, "numerics.window_steps", "must be >= 1")
    _require(n.min_window_steps >= 1, "numerics.min_window_steps", "must be >= 1")
    _require(n.min_window_steps <= n.window_steps, "numerics.min_window_steps",
             "must not exceed window_steps")
    _require(n.coupling_mode in COUPLING_MODES, "numerics.coupling_mode",
             f"must be one of {COUPLING_MODES}")
    _require(o.snapshot_every >= 0, "output.snapshot_every", "must be >= 0")
    _require(o.timeseries_every >= 1, "output.timeseries_every", "must be >= 1")


def _convert(section: str, f: dataclasses.Field, raw: str):
    name = f"{section}.{f.name}"
    kind = f.type if isinstance(f.type, str) else f.type.__name__
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.strip().lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        return raw.strip()
    except ValueError:
        raise ValidationError(name, f"cannot interpret {raw!r} as {kind}") from None


def parse_config_text(text: str, source: str = "<string>") -> SimConfig:
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.section}.{exc.option}", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("key outside of any [section]", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ParseError("malformed line, expected 'key = value'", lineno) from None

    kwargs = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ValidationError(section, "unknown section")
        fields = {f.name: f for f in dataclasses.fields(SECTIONS[section])}
        values = {}
        for key, raw in parser.items(section):
            if key not in fields:
                raise ValidationError(f"{section}.{key}", "unknown key")
            values[key] = _convert(section, fields[key], raw)
        kwargs[section] = values
    for section, required in (("grid", ("Nx", "Nz")), ("numerics", ("t_end",))):
        for key in required:
            if key not in kwargs.get(section, {}):
                raise ValidationError(f"{section}.{key}", "required key missing")
    built = {name: SECTIONS[name](**kwargs.get(name, {})) for name in SECTIONS}
    return SimConfig(**built)


def parse_config(path) -> SimConfig:
    path = Path(path)
    return parse_config_text(path.read_text(), source=str(path))


def config_to_text(cfg: SimConfig) -> str:
    """Serialise every key explicitly; ``parse_config_text`` inverts it exactly."""
    lines = []
    for name in SECTIONS:
        lines.append(f"[{name}]")
        for key, value in dataclasses.asdict(getattr(cfg, name)).items():
            text = repr(value) if isinstance(value, float) else str(value).lower() \
                if isinstance(value, bool) else str(value)
            lines.append(f"{key} = {text}")
        lines.append("")
    return "\n".join(lines)
