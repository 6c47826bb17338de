"""Experiment configuration: sectioned ``key = value`` text (INI).

Keys are unique across sections, so a key may also appear before any
section header. Every key has a default; the defaults reproduce the
reference scenario (2 GHz, 4x12 staggered array, 1.732 km ISD, 32 m mast,
20 W, 5 MHz, 6 degree downtilt).
"""

from __future__ import annotations

import configparser
import dataclasses
import re
from dataclasses import dataclass, field, fields

from hybridmimo.channel import SCATTER_MODELS
from hybridmimo.errors import ConfigError, UnknownKeyError

_TOP = "__top__"


def _opt(section, default):
    return field(default=default, metadata={"section": section})


@dataclass(frozen=True)
class ExperimentConfig:
    # geometry
    columns: int = _opt("geometry", 4)
    rows: int = _opt("geometry", 12)
    carrier_frequency: float = _opt("geometry", 2e9)
    inter_site_distance: float = _opt("geometry", 1732.0)
    tower_height: float = _opt("geometry", 32.0)
    grid_spacing: float = _opt("geometry", 38.5)
    grid_heights: tuple[float, ...] = _opt("geometry", (1.5, 5.0, 8.5))
    min_horizontal_distance: float = _opt("geometry", 100.0)
    sector_id: int = _opt("geometry", 0)
    # channel
    path_loss_exponent: float = _opt("channel", 2.0)
    scatter_model: str = _opt("channel", "diagonal")
    subbands: int = _opt("channel", 25)
    band_half_width: int = _opt("channel", 2)
    seed: int = _opt("channel", 1)
    # analysis
    rank_budget: int = _opt("analysis", 4)
    rf_chains: int = _opt("analysis", 4)
    equivalence_ranks: tuple[int, ...] = _opt("analysis", ())
    noise_power: float = _opt("analysis", 0.0)
    perturb_beams: bool = _opt("analysis", False)
    # patterns
    azimuth_min: float = _opt("patterns", -90.0)
    azimuth_max: float = _opt("patterns", 90.0)
    elevation_min: float = _opt("patterns", -90.0)
    elevation_max: float = _opt("patterns", 30.0)
    angle_step: float = _opt("patterns", 1.0)
    # network
    sites: int = _opt("network", 19)
    sectors_per_site: int = _opt("network", 3)
    tx_power: float = _opt("network", 20.0)
    bandwidth: float = _opt("network", 5e6)
    downtilt: float = _opt("network", 6.0)
    noise_figure: float = _opt("network", 9.0)
    network_path_loss_exponent: float = _opt("network", 3.76)
    h_beamwidth: float = _opt("network", 65.0)
    v_beamwidth: float = _opt("network", 10.0)
    front_to_back: float = _opt("network", 30.0)
    max_gain: float = _opt("network", 15.0)
    ue_height: float = _opt("network", 1.5)
    map_radius: float = _opt("network", 2500.0)
    map_spacing: float = _opt("network", 50.0)
    # output
    out_dir: str = _opt("output", "results")

    def __post_init__(self):
        validate(self)

    @property
    def num_elements(self) -> int:
        return self.columns * self.rows

    @property
    def ranks(self) -> tuple[int, ...]:
        return self.equivalence_ranks or (self.rank_budget,)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
SECTIONS = tuple(dict.fromkeys(f.metadata["section"] for f in fields(ExperimentConfig)))

_POSITIVE = ("columns", "rows", "carrier_frequency", "inter_site_distance", "tower_height", "grid_spacing",
             "subbands", "rank_budget", "rf_chains", "angle_step", "sites", "sectors_per_site", "tx_power",
             "bandwidth", "h_beamwidth", "v_beamwidth", "front_to_back", "map_spacing")


def validate(cfg: ExperimentConfig) -> None:
    for name in _POSITIVE:
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be positive, got {getattr(cfg, name)!r}")
    for name in ("min_horizontal_distance", "noise_power", "band_half_width", "sector_id", "map_radius"):
        if getattr(cfg, name) < 0:
            raise ConfigError(f"{name} must be >= 0, got {getattr(cfg, name)!r}")
    if not cfg.grid_heights or min(cfg.grid_heights) < 0 or max(cfg.grid_heights) > 10:
        raise ConfigError(f"grid_heights must be nonempty and within [0, 10] m, got {cfg.grid_heights}")
    for t in cfg.ranks:
        if not 1 <= t <= cfg.num_elements:
            raise ConfigError(f"rank {t} must lie in 1..{cfg.num_elements} (number of elements)")
    if cfg.scatter_model not in SCATTER_MODELS:
        raise ConfigError(f"scatter_model must be one of {SCATTER_MODELS}, got {cfg.scatter_model!r}")
    if cfg.sites not in (1, 7, 19):
        raise ConfigError(f"sites must be 1, 7 or 19, got {cfg.sites}")
    if cfg.sector_id >= cfg.sites * cfg.sectors_per_site:
        raise ConfigError(f"sector_id {cfg.sector_id} does not exist")
    if cfg.azimuth_min > cfg.azimuth_max or cfg.elevation_min > cfg.elevation_max:
        raise ConfigError("pattern angle ranges are reversed")


def _convert(name: str, raw: str):
    kind = _FIELDS[name].type
    raw = raw.strip()
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind.startswith("tuple[float"):
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if kind.startswith("tuple[int"):
        return tuple(int(v) for v in raw.split(",") if v.strip())
    return raw


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    return str(value)


_KEY_LINE = re.compile(r"^\s*([^=:\s\[#;][^=:]*?)\s*[=:]")
_SECTION_LINE = re.compile(r"^\s*\[([^\]]+)\]")


def _key_lines(text: str) -> dict:
    """Map (section, key) to its 1-based line number in ``text``."""
    out, section = {}, _TOP
    for n, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_LINE.match(line)
        if m:
            section = m.group(1).strip()
            continue
        m = _KEY_LINE.match(line)
        if m and not line[:1].isspace():
            out.setdefault((section, m.group(1).strip().lower()), n)
    return out


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; keys left out keep their defaults."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        parser.read_string(f"[{_TOP}]\n" + text)
    except configparser.MissingSectionHeaderError as exc:  # pragma: no cover - the synthetic header prevents it
        raise ConfigError(str(exc), exc.lineno - 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", exc.lineno - 1) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno - 1) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] - 1 if exc.errors else None
        raise ConfigError("malformed line", lineno) from None

    lines = _key_lines(text)
    values = {}
    for section in parser.sections():
        if section != _TOP and section not in SECTIONS:
            line = next((i for i, ln in enumerate(text.splitlines(), 1)
                         if _SECTION_LINE.match(ln) and _SECTION_LINE.match(ln).group(1).strip() == section), None)
            raise ConfigError(f"unknown section [{section}]", line)
        for key, raw in parser.items(section):
            line = lines.get((section, key))
            f = _FIELDS.get(key)
            if f is None or (section != _TOP and f.metadata["section"] != section):
                raise UnknownKeyError(key if section == _TOP else f"{section}.{key}", line)
            if key in values:
                raise ConfigError(f"key {key!r} given twice", line)
            try:
                values[key] = _convert(key, raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}", line) from None
    try:
        return ExperimentConfig(**values)
    except ConfigError as exc:
        # attach the offending key's line when the message names it
        for key in values:
            if str(exc).startswith(key):
                raise ConfigError(str(exc), next((v for (s, k), v in lines.items() if k == key), None)) from None
        raise


def serialize_config(cfg: ExperimentConfig) -> str:
    chunks = []
    for section in SECTIONS:
        chunks.append(f"[{section}]")
        for f in fields(cfg):
            if f.metadata["section"] == section:
                chunks.append(f"{f.name} = {_format(getattr(cfg, f.name))}")
        chunks.append("")
    return "\n".join(chunks)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())
