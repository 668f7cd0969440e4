"""
Flat `key = value` config files.

Grammar: one assignment per line, `#` starts a comment, keys are
case-sensitive, list values are comma-separated. Every key has a fixed unit
(see KEYS); a value carrying its own unit suffix is a parse error. Missing
keys take the built-in defaults.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union
import logging
import os
import re

from dotenv import load_dotenv
from pydantic import ValidationError

from bm_engine.energy import PowerModel
from bm_engine.errors import ConfigParseError, ConfigurationError, RangeViolation
from bm_engine.scenario import SystemConfig
from bm_runner.schemas import RunSettings, SweepAxes

logger = logging.getLogger(__name__)

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_FLOAT = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_INT = re.compile(r"^[+-]?\d+$")
_WORD = re.compile(r"^[A-Za-z0-9_-]+$")
_BOOLS = {"true": True, "false": False}

Origin = Union[int, str]


@dataclass(frozen=True)
class ConfigKey:
    name: str
    target: str
    field: str
    kind: str
    unit: str
    doc: str


KEYS: Tuple[ConfigKey, ...] = (
    ConfigKey("L", "config", "hall_length", "float", "m", "hall length"),
    ConfigKey("W", "config", "hall_width", "float", "m", "hall width"),
    ConfigKey("H", "config", "hall_height", "float", "m", "hall height"),
    ConfigKey("h_gNB", "config", "gnb_height", "float", "m", "gNB height"),
    ConfigKey("h_UE", "config", "ue_height", "float", "m", "UE height"),
    ConfigKey("d_c", "config", "clutter_size", "float", "m", "clutter size"),
    ConfigKey("h_c", "config", "clutter_height", "float", "m", "clutter height"),
    ConfigKey("r", "config", "clutter_density", "float", "", "clutter density, fraction in (0, 1)"),
    ConfigKey("K", "config", "num_ues", "int", "", "UEs per trial"),
    ConfigKey("d_min", "config", "min_distance", "float", "m", "exclusion radius around the gNB"),
    ConfigKey("placement", "config", "placement", "choice", "", "uniform-area | uniform-annulus"),
    ConfigKey("f_c", "config", "carrier_ghz", "float", "GHz", "carrier frequency"),
    ConfigKey("B", "config", "bandwidth_mhz", "float", "MHz", "bandwidth"),
    ConfigKey("N_0", "config", "noise_psd_dbm_hz", "float", "dBm/Hz", "noise spectral density"),
    ConfigKey("NF", "config", "noise_figure_db", "float", "dB", "UE noise figure"),
    ConfigKey("n", "config", "numerology", "int", "", "numerology, 0..4"),
    ConfigKey("G_UE", "config", "ue_gain_dbi", "float", "dBi", "UE antenna gain"),
    ConfigKey("shadowing", "config", "shadowing", "bool", "", "log-normal shadowing on the path loss"),
    ConfigKey("sigma_sf_los", "config", "shadow_sigma_los_db", "float", "dB", "LoS shadowing std"),
    ConfigKey("sigma_sf_nlos", "config", "shadow_sigma_nlos_db", "float", "dB", "NLoS shadowing std"),
    ConfigKey("los_mode", "config", "los_mode", "choice", "", "blend | bernoulli"),
    ConfigKey("los_distance", "config", "los_distance", "choice", "", "2d | 3d distance for P_LoS"),
    ConfigKey("cap_at_peak", "config", "cap_at_peak", "bool", "", "stop the N scan at N_M"),
    ConfigKey("misdetection_rule", "config", "misdetection_rule", "choice", "", "best | peak"),
    ConfigKey("seed", "config", "seed", "int", "", "master seed"),
    ConfigKey("N_UE", "power", "ue_antennas", "int", "", "UE receive antennas"),
    ConfigKey("P_LNA", "power", "lna_mw", "float", "mW", "low noise amplifier"),
    ConfigKey("P_PS", "power", "phase_shifter_mw", "float", "mW", "phase shifter"),
    ConfigKey("P_M", "power", "mixer_mw", "float", "mW", "mixer"),
    ConfigKey("P_LO", "power", "local_oscillator_mw", "float", "mW", "local oscillator"),
    ConfigKey("P_LPF", "power", "low_pass_filter_mw", "float", "mW", "low pass filter"),
    ConfigKey("P_BB", "power", "baseband_mw", "float", "mW", "baseband amplifier"),
    ConfigKey("P_ADC", "power", "adc_mw", "float", "mW", "ADC (counted twice)"),
    ConfigKey("P_C", "power", "combiner_mw", "float", "mW", "combiner"),
    ConfigKey("v", "axes", "speeds", "floats", "m/s", "UE speeds"),
    ConfigKey("T_ss", "axes", "burst_periods_ms", "ints", "ms", "burst periods, {5,10,20,40,80,160}"),
    ConfigKey("N_ss", "axes", "ssb_per_burst", "ints", "", "SSBs per burst, {8,16,32,64}"),
    ConfigKey("tau", "axes", "taus_db", "floats", "dB", "SNR thresholds"),
    ConfigKey("P_T", "axes", "tx_powers_dbm", "floats", "dBm", "gNB transmit powers"),
    ConfigKey("N_gNB", "axes", "antennas", "ints", "", "candidate gNB antenna counts, ascending"),
    ConfigKey("trials", "run", "trials", "int", "", "Monte Carlo trials per cell"),
    ConfigKey("epsilon", "run", "epsilon", "float", "", "region cell tolerance"),
    ConfigKey("region_rule", "run", "region_rule", "choice", "", "infeasible | misdetection, statistic held to epsilon"),
)

KEYS_BY_NAME: Dict[str, ConfigKey] = {key.name: key for key in KEYS}
_KEYS_BY_FIELD: Dict[Tuple[str, str], ConfigKey] = {(key.target, key.field): key for key in KEYS}
# model-level SystemConfig checks span several keys
_CROSS_FIELD_KEYS = "h_UE/h_c/h_gNB/H/n"


def load_environment() -> Dict[str, Optional[str]]:
    """Runner defaults from the process environment and an optional .env file."""
    load_dotenv()
    return {
        "seed": os.getenv("BM_SEED"),
        "threads": os.getenv("BM_THREADS"),
        "log_level": os.getenv("BM_LOG_LEVEL", "INFO"),
    }


def _located(origin: Origin, detail: str) -> ConfigurationError:
    if isinstance(origin, int):
        return ConfigParseError(origin, detail)
    return ConfigurationError(f"{origin}: {detail}")


def _split(line: str) -> Optional[Tuple[str, str]]:
    """(key, raw value) of one line, or None for blank and comment lines."""
    content = line.split("#", 1)[0].strip()
    if not content:
        return None
    if "=" not in content:
        raise ValueError(f"expected 'key = value', got {content!r}")
    key, value = (part.strip() for part in content.split("=", 1))
    if not _KEY.match(key):
        raise ValueError(f"invalid key {key!r}")
    if key not in KEYS_BY_NAME:
        raise ValueError(f"unknown key {key!r}")
    if not value:
        raise ValueError(f"{key}: missing value")
    return key, value


def _scalar(kind: str, key: str, token: str):
    if kind == "float":
        if not _FLOAT.match(token):
            raise ValueError(f"{key}: {token!r} is not a number (units are fixed per key)")
        return float(token)
    if kind == "int":
        if not _INT.match(token):
            raise ValueError(f"{key}: {token!r} is not an integer")
        return int(token)
    if kind == "bool":
        if token not in _BOOLS:
            raise ValueError(f"{key}: {token!r} is not true or false")
        return _BOOLS[token]
    if not _WORD.match(token):
        raise ValueError(f"{key}: {token!r} is not a valid choice token")
    return token


def convert(key: ConfigKey, raw: str):
    if key.kind in ("floats", "ints"):
        tokens = [token.strip() for token in raw.split(",")]
        if any(not token for token in tokens):
            raise ValueError(f"{key.name}: empty list entry in {raw!r}")
        return tuple(_scalar(key.kind[:-1], key.name, token) for token in tokens)
    return _scalar(key.kind, key.name, raw)


def _range_violation(error: ValidationError, target: str) -> RangeViolation:
    first = error.errors()[0]
    location = first.get("loc") or ()
    key = _KEYS_BY_FIELD.get((target, str(location[0]))) if location else None
    name = key.name if key else _CROSS_FIELD_KEYS
    return RangeViolation(name, first.get("msg", str(error)))


def collect(text: str, overrides: Sequence[str] = ()) -> Dict[str, Tuple[str, Origin]]:
    """
    Raw assignments from the file then from `key=value` overrides; later
    overrides win, a key repeated inside the file is an error.
    """
    values: Dict[str, Tuple[str, Origin]] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        try:
            pair = _split(line)
        except ValueError as exc:
            raise ConfigParseError(number, str(exc)) from None
        if pair is None:
            continue
        key, value = pair
        if key in values:
            raise ConfigParseError(number, f"duplicate key {key!r} (first on line {values[key][1]})")
        values[key] = (value, number)

    for item in overrides:
        origin = f"--set {item}"
        try:
            pair = _split(item)
        except ValueError as exc:
            raise _located(origin, str(exc)) from None
        if pair is None:
            raise _located(origin, "empty override")
        values[pair[0]] = (pair[1], origin)
    return values


def parse_config(
    text: str,
    overrides: Sequence[str] = (),
    seed_default: Optional[str] = None,
) -> RunSettings:
    """
    Resolve config text plus overrides into RunSettings.

    Raises ConfigParseError (with line number) for malformed lines or values
    and RangeViolation (with key name) for values outside their allowed set.
    """
    raw = collect(text, overrides)
    if "seed" not in raw and seed_default is not None:
        raw["seed"] = (seed_default.strip(), "BM_SEED")

    groups: Dict[str, Dict[str, object]] = {"config": {}, "power": {}, "axes": {}, "run": {}}
    for name, (value, origin) in raw.items():
        key = KEYS_BY_NAME[name]
        try:
            groups[key.target][key.field] = convert(key, value)
        except ValueError as exc:
            raise _located(origin, str(exc)) from None

    try:
        power = PowerModel(**groups["power"])
    except ValidationError as exc:
        raise _range_violation(exc, "power") from None
    try:
        axes = SweepAxes(**groups["axes"])
    except ValidationError as exc:
        raise _range_violation(exc, "axes") from None

    scalars = {
        "speed": axes.speeds[0],
        "snr_threshold_db": axes.taus_db[0],
        "tx_power_dbm": axes.tx_powers_dbm[0],
    }
    try:
        config = SystemConfig(**groups["config"], **scalars, power=power)
    except ValidationError as exc:
        raise _range_violation(exc, "config") from None
    try:
        settings = RunSettings(config=config, axes=axes, **groups["run"])
    except ValidationError as exc:
        raise _range_violation(exc, "run") from None

    logger.debug(f"Resolved {len(raw)} config keys, {len(KEYS) - len(raw)} defaulted")
    return settings


def _format_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _value_of(settings: RunSettings, key: ConfigKey):
    if key.target == "config":
        return getattr(settings.config, key.field)
    if key.target == "power":
        return getattr(settings.config.power, key.field)
    if key.target == "axes":
        return getattr(settings.axes, key.field)
    return getattr(settings, key.field)


def config_lines(settings: RunSettings) -> List[str]:
    """One `key = value` line per key, in KEYS order, at full float precision."""
    lines = []
    for key in KEYS:
        value = _value_of(settings, key)
        if key.kind in ("floats", "ints"):
            text = ", ".join(_format_scalar(float(v) if key.kind == "floats" else int(v)) for v in value)
        elif key.kind == "float":
            text = _format_scalar(float(value))
        else:
            text = _format_scalar(value)
        lines.append(f"{key.name} = {text}")
    return lines


def emit_config(settings: RunSettings) -> str:
    """Config text that parses back to `settings`."""
    return "# resolved beam-management configuration\n" + "\n".join(config_lines(settings)) + "\n"


def read_config(path: Optional[str], overrides: Sequence[str] = (), seed_default: Optional[str] = None) -> RunSettings:
    text = ""
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
        logger.info(f"Loaded config file {path}")
    return parse_config(text, overrides, seed_default)
