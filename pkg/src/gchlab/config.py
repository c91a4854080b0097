"""
Scenario configuration: a small YAML schema, validated into frozen dataclasses.

Example::

    model: {preset: camassa_holm}
    grid: {n: 256, length: 6.283185307179586}
    control: {dt: 1.0e-4, t_end: 1.0}
    initial: {kind: cosine_packet, modes: [[1, 0.5], [2, 0.25, 1.5707963267948966]]}
    outputs: {csv: run.csv, snapshots: "chk_{step}.gchs", cadence: 100}
    seed: 0

Every problem is reported as :class:`ConfigError` naming the dotted key.
"""

from dataclasses import dataclass
import math

import yaml

from .errors import ConfigError
from .model import PRESETS, ModelParams
from .spectral import GridSpec
from .timestepper import StepControl

__all__ = [
    "InitialData",
    "OutputSpec",
    "ScenarioConfig",
    "INITIAL_KINDS",
    "LOCALIZED_KINDS",
    "DEFAULT_LOCALIZED_LENGTH",
    "default_monitor_s",
    "parse_config",
    "load_config",
    "render_config",
    "config_to_dict",
]

INITIAL_KINDS = ("gaussian", "cosine_packet", "mollified_peakon", "random_bandlimited")
LOCALIZED_KINDS = ("gaussian", "mollified_peakon")
DEFAULT_LOCALIZED_LENGTH = 40.0


@dataclass(frozen=True)
class InitialData:
    kind: str
    amplitude: float = 1.0
    center: float | None = None
    width: float = 1.0
    modes: tuple = ()  # ((mode, amplitude, phase), ...) for cosine_packet
    mollify_width: float = 0.1

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ValueError(f"unknown initial kind {self.kind!r}; choose from {INITIAL_KINDS}")
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if not (math.isfinite(self.width) and self.width > 0):
            raise ValueError("width must be positive")
        if not (math.isfinite(self.mollify_width) and self.mollify_width > 0):
            raise ValueError("mollify_width must be positive")
        if self.kind == "cosine_packet" and not self.modes:
            raise ValueError("cosine_packet needs at least one mode")
        for m, a, ph in self.modes:
            if int(m) != m or m < 0:
                raise ValueError(f"mode numbers must be non-negative integers, got {m!r}")


@dataclass(frozen=True)
class OutputSpec:
    csv: str | None = None
    snapshots: str | None = None  # may contain "{step}"; otherwise overwritten
    cadence: int = 100  # steps between diagnostics records and snapshots


@dataclass(frozen=True)
class ScenarioConfig:
    model: ModelParams
    grid: GridSpec
    control: StepControl
    initial: InitialData
    outputs: OutputSpec = OutputSpec()
    monitor_s: float = 1.6
    seed: int = 0
    preset: str | None = None


def default_monitor_s(k):
    """Smallest admissible regularity index plus a 0.1 margin."""
    return 2 * (k - 1) + 1.5 + 0.1


# ---------------------------------------------------------------------------
# typed field readers


def _section(doc, name, required=False):
    if name not in doc:
        if required:
            raise ConfigError(name, "missing required section")
        return {}
    sec = doc[name]
    if not isinstance(sec, dict):
        raise ConfigError(name, f"expected a mapping, got {type(sec).__name__}")
    return sec


def _reject_unknown(sec, allowed, prefix):
    for key in sec:
        if key not in allowed:
            where = f"{prefix}.{key}" if prefix else str(key)
            raise ConfigError(where, f"unknown key (allowed: {', '.join(allowed)})")


def _real(value, key, positive=False, nonneg=False):
    if isinstance(value, bool):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if isinstance(value, str):
        try:
            value = float(value)  # YAML 1.1 reads "1e-4" as a string
        except ValueError:
            raise ConfigError(key, f"expected a number, got {value!r}") from None
    if not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite")
    if positive and value <= 0:
        raise ConfigError(key, f"must be > 0, got {value}")
    if nonneg and value < 0:
        raise ConfigError(key, f"must be >= 0, got {value}")
    return value


def _integer(value, key, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(key, f"expected an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {value}")
    return value


def _string(value, key):
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a string, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# sections


def _parse_model(sec):
    _reject_unknown(sec, ("preset", "k", "p", "b", "g_coeffs"), "model")
    g = sec.get("g_coeffs", [])
    if not isinstance(g, (list, tuple)):
        raise ConfigError("model.g_coeffs", "expected a list of coefficients")
    g = tuple(_real(c, f"model.g_coeffs[{i}]") for i, c in enumerate(g))
    if g and g[0] != 0.0:
        raise ConfigError("model.g_coeffs", "g(0) = 0 is required (first coefficient must be 0)")
    if "preset" in sec:
        name = _string(sec["preset"], "model.preset")
        clash = [key for key in ("k", "p", "b") if key in sec]
        if clash:
            raise ConfigError(f"model.{clash[0]}", "cannot be combined with model.preset")
        if name not in PRESETS:
            raise ConfigError("model.preset", f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        base = PRESETS[name]
        return ModelParams(base.k, base.p, base.b, g), name
    for key in ("k", "p", "b"):
        if key not in sec:
            raise ConfigError(f"model.{key}", "missing (give model.preset or all of k, p, b)")
    k = _integer(sec["k"], "model.k")
    if k < 1:
        raise ConfigError("model.k", f"k >= 1 required, got {k}")
    p = _integer(sec["p"], "model.p")
    if p < 1:
        raise ConfigError("model.p", f"p >= 1 required, got {p}")
    b = _real(sec["b"], "model.b")
    return ModelParams(k, p, b, g), None


def _parse_modes(raw, amplitude):
    if not isinstance(raw, (list, tuple)):
        raise ConfigError("initial.modes", "expected a list")
    out = []
    for i, item in enumerate(raw):
        key = f"initial.modes[{i}]"
        if isinstance(item, (list, tuple)):
            if not 1 <= len(item) <= 3:
                raise ConfigError(key, "expected [mode], [mode, amplitude] or [mode, amplitude, phase]")
            m = _integer(item[0], key, minimum=0)
            a = _real(item[1], key) if len(item) > 1 else amplitude
            ph = _real(item[2], key) if len(item) > 2 else 0.0
        else:
            m, a, ph = _integer(item, key, minimum=0), amplitude, 0.0
        out.append((m, a, ph))
    return tuple(out)


def _parse_initial(sec, length):
    _reject_unknown(sec, ("kind", "amplitude", "center", "width", "modes", "mollify_width"), "initial")
    if "kind" not in sec:
        raise ConfigError("initial.kind", "missing")
    kind = _string(sec["kind"], "initial.kind")
    if kind not in INITIAL_KINDS:
        raise ConfigError("initial.kind", f"unknown kind {kind!r}; choose from {INITIAL_KINDS}")
    amplitude = _real(sec.get("amplitude", 1.0), "initial.amplitude")
    center = _real(sec["center"], "initial.center") if "center" in sec else None
    if center is None and kind in LOCALIZED_KINDS:
        center = 0.5 * length
    width = _real(sec.get("width", 1.0), "initial.width", positive=True)
    mollify = _real(sec.get("mollify_width", 0.1), "initial.mollify_width", positive=True)
    modes = _parse_modes(sec["modes"], amplitude) if "modes" in sec else ()
    if kind == "cosine_packet" and not modes:
        raise ConfigError("initial.modes", "cosine_packet needs at least one mode")
    if modes and kind != "cosine_packet":
        raise ConfigError("initial.modes", f"only used by cosine_packet, not {kind}")
    return InitialData(kind, amplitude, center, width, modes, mollify)


def _parse_control(sec):
    _reject_unknown(sec, ("dt", "cfl", "t_end", "breaking_threshold", "max_steps"), "control")
    if "t_end" not in sec:
        raise ConfigError("control.t_end", "missing")
    t_end = _real(sec["t_end"], "control.t_end", positive=True)
    dt = sec.get("dt", "auto")
    if dt == "auto":
        dt = None
    else:
        dt = _real(dt, "control.dt", positive=True)  # cfl is then unused but kept
    cfl = _real(sec.get("cfl", 0.3), "control.cfl", positive=True)
    if cfl > 1:
        raise ConfigError("control.cfl", f"must lie in (0, 1], got {cfl}")
    thr = _real(sec.get("breaking_threshold", 1e6), "control.breaking_threshold", positive=True)
    max_steps = _integer(sec.get("max_steps", 10_000_000), "control.max_steps", minimum=1)
    return StepControl(t_end=t_end, dt=dt, cfl_safety=cfl, breaking_threshold=thr, max_steps=max_steps)


def _parse_outputs(sec):
    _reject_unknown(sec, ("csv", "snapshots", "cadence"), "outputs")
    csv_path = _string(sec["csv"], "outputs.csv") if sec.get("csv") is not None else None
    snaps = _string(sec["snapshots"], "outputs.snapshots") if sec.get("snapshots") is not None else None
    cadence = _integer(sec.get("cadence", 100), "outputs.cadence", minimum=1)
    return OutputSpec(csv_path, snaps, cadence)


_TOP_KEYS = ("model", "grid", "control", "initial", "outputs", "monitor_s", "seed")


def parse_config(doc):
    """Validate a YAML string (or an already-loaded mapping) into a :class:`ScenarioConfig`."""
    if isinstance(doc, str):
        try:
            doc = yaml.safe_load(doc)
        except yaml.YAMLError as exc:
            raise ConfigError("<document>", f"not valid YAML: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "expected a mapping at the top level")
    _reject_unknown(doc, _TOP_KEYS, "")

    params, preset_name = _parse_model(_section(doc, "model", required=True))

    initial_sec = _section(doc, "initial", required=True)
    grid_sec = _section(doc, "grid")
    _reject_unknown(grid_sec, ("n", "length"), "grid")
    n = _integer(grid_sec.get("n", 256), "grid.n")
    if "length" in grid_sec:
        length = _real(grid_sec["length"], "grid.length", positive=True)
    elif initial_sec.get("kind") in LOCALIZED_KINDS:
        length = DEFAULT_LOCALIZED_LENGTH
    else:
        length = 2 * math.pi
    try:
        grid = GridSpec(n, length)
    except ValueError as exc:
        raise ConfigError("grid.n", str(exc)) from None

    initial = _parse_initial(initial_sec, length)
    control = _parse_control(_section(doc, "control", required=True))
    outputs = _parse_outputs(_section(doc, "outputs"))
    if "monitor_s" in doc:
        monitor_s = _real(doc["monitor_s"], "monitor_s", nonneg=True)
    else:
        monitor_s = default_monitor_s(params.k)
    seed = _integer(doc.get("seed", 0), "seed", minimum=0)
    return ScenarioConfig(params, grid, control, initial, outputs, monitor_s, seed, preset_name)


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def config_to_dict(cfg):
    """Plain-data form of ``cfg``; ``parse_config(config_to_dict(cfg)) == cfg``."""
    if cfg.preset is not None:
        model = {"preset": cfg.preset}
    else:
        model = {"k": cfg.model.k, "p": cfg.model.p, "b": cfg.model.b}
    if cfg.model.g_coeffs:
        model["g_coeffs"] = list(cfg.model.g_coeffs)
    c = cfg.control
    control = {"t_end": c.t_end, "dt": "auto" if c.dt is None else c.dt, "cfl": c.cfl_safety}
    control["breaking_threshold"] = c.breaking_threshold
    control["max_steps"] = c.max_steps
    ini = cfg.initial
    initial = {"kind": ini.kind, "amplitude": ini.amplitude, "width": ini.width, "mollify_width": ini.mollify_width}
    if ini.center is not None:
        initial["center"] = ini.center
    if ini.modes:
        initial["modes"] = [[m, a, ph] for m, a, ph in ini.modes]
    outputs = {"cadence": cfg.outputs.cadence}
    if cfg.outputs.csv is not None:
        outputs["csv"] = cfg.outputs.csv
    if cfg.outputs.snapshots is not None:
        outputs["snapshots"] = cfg.outputs.snapshots
    return {
        "model": model,
        "grid": {"n": cfg.grid.n_points, "length": cfg.grid.length},
        "control": control,
        "initial": initial,
        "outputs": outputs,
        "monitor_s": cfg.monitor_s,
        "seed": cfg.seed,
    }


def render_config(cfg):
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
