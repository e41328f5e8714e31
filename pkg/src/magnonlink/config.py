"""Configuration: versioned JSON schema, validation, overrides, builders.

A run configuration is a plain JSON object with ``schema_version: 1`` and
a fixed set of sections.  All frequencies at this boundary are ordinary
frequencies in Hz; powers are watts or suffix-tagged strings such as
``"-41 dBm"``; lengths are metres.  Unknown sections or keys are rejected
with location-precise messages, and every value is type-checked against
the schema table below (the same table is exported as a JSON document so
external tooling can introspect it).
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .constants import TWO_PI
from .errors import ConfigError
from .params import FieldBias, MaterialGeometry, OpticalDriveParams, SystemParams
from .units import parse_power

SCHEMA_VERSION = 1

# Schema table: section -> key -> (type, default, extras).
# Types: "number", "int", "bool", "string", "power" (watts or tagged
# string), "number_or_null", "string_list".  Extras: {"choices": [...]}.

_N = "number"
_I = "int"
_B = "bool"
_S = "string"
_P = "power"
_NN = "number_or_null"
_SL = "string_list"

QUANTITY_CHOICES = ["s11_power", "s11_complex", "s_lm_power", "s_lm_complex",
                    "efficiency"]
TRACE_KIND_CHOICES = ["s11_hybrid", "s11_coil", "s_lm", "power_only"]

SCHEMA: dict[str, dict[str, tuple]] = {
    "system": {
        "omega_c_hz": (_N, 10.45e9),
        "omega_m_hz": (_N, 10.45e9),
        "kappa_hz": (_N, 3.3e6),
        "kappa_c_hz": (_N, 25.0e6),
        "gamma_hz": (_N, 1.1e6),
        "g_hz": (_N, 63.0e6),
        "zeta_hz": (_N, 1.8e-4),
        "eta": (_N, 1.0),
    },
    "material": {
        "spin_density_m3": (_N, 2.1e28),
        "verdet_rad_m": (_N, 380.0),
        "sample_length_m": (_N, 0.75e-3),
        "sample_volume_m3": (_N, 2.2984729611703887e-10),
        "cavity_volume_m3": (_N, 1.197e-6),
        "gilbert_alpha": (_N, 5.2631578947368424e-05),
        "gyromagnetic_ratio_hz_per_t": (_N, 28.0e9),
        "bare_kittel_freq_hz": (_N, 10.45e9),
    },
    "bias": {
        "static_field_t": (_N, 0.31),
        "field_per_current_t_per_a": (_N, 0.05),
        "reference_current_a": (_N, 0.4),
        "reference_kittel_freq_hz": (_N, 10.45e9),
    },
    "drive": {
        "power": (_P, 0.015),
        "carrier_freq_hz": (_N, 200.0e12),
    },
    "sweep": {
        "freq_start_hz": (_N, 10.0e9),
        "freq_stop_hz": (_N, 10.9e9),
        "freq_points": (_I, 801),
        "current_start_a": (_N, 0.0),
        "current_stop_a": (_N, 0.8),
        "current_points": (_I, 201),
        "quantity": (_S, "s11_power", {"choices": QUANTITY_CHOICES}),
    },
    "simulate": {
        "kind": (_S, "s11_hybrid", {"choices": TRACE_KIND_CHOICES}),
        "freq_start_hz": (_N, 10.0e9),
        "freq_stop_hz": (_N, 10.9e9),
        "freq_points": (_I, 2001),
        "noise_sigma": (_N, 0.0),
        "seed": (_I, 0),
        "gamma_c_hz": (_N, 1.5e6),
    },
    "fit": {
        "kind": (_S, "s11_hybrid", {"choices": TRACE_KIND_CHOICES}),
        "max_iter": (_I, 500),
        "auto_init": (_B, False),
        "gamma_c_hz": (_N, 1.5e6),
        "fixed": (_SL, ["omega_c", "omega_m", "kappa", "kappa_c"]),
    },
    "optimize": {
        "span": (_NN, None),
        "grid_points": (_I, 201),
        "landscape_points": (_I, 201),
        "fixed_offset_hz": (_NN, None),
        "write_landscape": (_B, True),
    },
    "calibrate_shotnoise": {
        "microwave_power": (_P, "-41 dBm"),
        "photon_flux_per_s": (_N, 1.2e17),
        "resolution_bandwidth_hz": (_N, 100.0),
        "coil_coupling_hz": (_N, 1.5e6),
        "magnon_freq_hz": (_N, 9.5e9),
        "measured_snr_db": (_N, 36.8),
        "reference_zeta_hz": (_NN, None),
    },
    "calibrate_chain": {
        "tone_power": (_P, 1.0e-3),
        "kappa_1_hz": (_N, 42.0e3),
        "s21_threshold": (_N, 1.0e-8),
    },
    "derive": {
        "overlap_factor": (_N, 1.0),
    },
}


def default_config() -> dict:
    """A fully populated configuration with built-in defaults."""
    cfg: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    for section, keys in SCHEMA.items():
        cfg[section] = {key: copy.deepcopy(spec[1]) for key, spec in keys.items()}
    return cfg


def _check_type(section: str, key: str, spec: tuple, value):
    kind = spec[0]
    where = f"{section}.{key}"
    if kind == _N:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {type(value).__name__}")
        return float(value)
    if kind == _I:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {type(value).__name__}")
        return value
    if kind == _B:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected a boolean, got {type(value).__name__}")
        return value
    if kind == _S:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {type(value).__name__}")
        choices = spec[2].get("choices") if len(spec) > 2 else None
        if choices and value not in choices:
            raise ConfigError(
                f"{where}: {value!r} is not one of {', '.join(choices)}")
        return value
    if kind == _P:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ConfigError(
                f"{where}: expected watts or a tagged power string, got "
                f"{type(value).__name__}")
        if isinstance(value, str):
            try:
                parse_power(value)
            except ConfigError as exc:
                raise ConfigError(f"{where}: {exc}") from None
        return value
    if kind == _NN:
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(
                f"{where}: expected a number or null, got {type(value).__name__}")
        return float(value)
    if kind == _SL:
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ConfigError(f"{where}: expected a list of strings")
        return list(value)
    raise AssertionError(f"unhandled schema type {kind!r}")


def validate_config(raw: Mapping) -> dict:
    """Merge ``raw`` over the defaults, rejecting unknown keys and bad types."""
    if not isinstance(raw, Mapping):
        raise ConfigError("configuration root must be a JSON object")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    cfg = default_config()
    for section, body in raw.items():
        if section == "schema_version":
            continue
        if section not in SCHEMA:
            raise ConfigError(f"{section}: unknown section")
        if not isinstance(body, Mapping):
            raise ConfigError(f"{section}: expected an object")
        for key, value in body.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"{section}.{key}: unknown key")
            cfg[section][key] = _check_type(section, key, SCHEMA[section][key], value)
    return cfg


def load_config(path: str | Path | None) -> dict:
    """Read and validate a JSON config file; ``None`` yields the defaults."""
    if path is None:
        return default_config()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc.strerror or exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return validate_config(raw)


def _parse_override(item: str) -> tuple[str, str, Any]:
    if "=" not in item:
        raise ConfigError(f"override {item!r} must look like section.key=value")
    dotted, text = item.split("=", 1)
    parts = dotted.strip().split(".")
    if len(parts) != 2 or not all(parts):
        raise ConfigError(f"override key {dotted!r} must look like section.key")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text  # bare strings (e.g. s11_hybrid, -41 dBm) pass through
    return parts[0], parts[1], value


def apply_overrides(cfg: Mapping, sets: list[str]) -> dict:
    """Apply ``--set section.key=value`` items over ``cfg`` and revalidate.

    Values parse as JSON when possible and fall back to literal strings,
    so ``--set sweep.freq_points=401`` and ``--set fit.kind=s_lm`` both
    work without quoting gymnastics.
    """
    raw = {k: (dict(v) if isinstance(v, Mapping) else v) for k, v in cfg.items()}
    for item in sets:
        section, key, value = _parse_override(item)
        if section not in SCHEMA:
            raise ConfigError(f"{section}: unknown section")
        raw.setdefault(section, {})[key] = value
    return validate_config(raw)


def canonical_json(obj) -> str:
    """Deterministic JSON serialization (sorted keys, minimal separators)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


def config_hash(cfg: Mapping) -> str:
    """SHA-256 of the canonical serialization of a validated config."""
    return hashlib.sha256(canonical_json(cfg).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RunConfig:
    """A validated configuration plus its provenance hash."""

    data: dict
    sha256: str

    @classmethod
    def from_mapping(cls, raw: Mapping) -> "RunConfig":
        cfg = validate_config(raw)
        return cls(data=cfg, sha256=config_hash(cfg))

    @classmethod
    def from_file(cls, path: str | Path | None, sets: list[str] | None = None) -> "RunConfig":
        cfg = load_config(path)
        if sets:
            cfg = apply_overrides(cfg, sets)
        return cls(data=cfg, sha256=config_hash(cfg))

    def __getitem__(self, section: str) -> dict:
        return self.data[section]


def build_system_params(cfg: Mapping) -> SystemParams:
    s = cfg["system"]
    return SystemParams.from_hz(
        omega_c_hz=s["omega_c_hz"], omega_m_hz=s["omega_m_hz"],
        kappa_hz=s["kappa_hz"], kappa_c_hz=s["kappa_c_hz"],
        gamma_hz=s["gamma_hz"], g_hz=s["g_hz"], zeta_hz=s["zeta_hz"])


def build_material(cfg: Mapping) -> MaterialGeometry:
    m = cfg["material"]
    return MaterialGeometry(
        spin_density=m["spin_density_m3"],
        verdet=m["verdet_rad_m"],
        sample_length=m["sample_length_m"],
        sample_volume=m["sample_volume_m3"],
        cavity_volume=m["cavity_volume_m3"],
        gilbert_alpha=m["gilbert_alpha"],
        gyromagnetic_ratio=TWO_PI * m["gyromagnetic_ratio_hz_per_t"],
        bare_kittel_freq=TWO_PI * m["bare_kittel_freq_hz"])


def build_bias(cfg: Mapping) -> FieldBias:
    b = cfg["bias"]
    return FieldBias(
        static_field=b["static_field_t"],
        field_per_current=b["field_per_current_t_per_a"],
        reference_current=b["reference_current_a"],
        reference_kittel_freq=TWO_PI * b["reference_kittel_freq_hz"])


def build_drive(cfg: Mapping) -> OpticalDriveParams:
    d = cfg["drive"]
    return OpticalDriveParams(
        power=parse_power(d["power"]),
        carrier_angular_freq=TWO_PI * d["carrier_freq_hz"])


def schema_document() -> dict:
    """The schema table as a plain JSON-serializable document."""
    doc: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "sections": {}}
    for section, keys in SCHEMA.items():
        body = {}
        for key, spec in keys.items():
            entry: dict[str, Any] = {"type": spec[0], "default": spec[1]}
            if len(spec) > 2 and "choices" in spec[2]:
                entry["choices"] = list(spec[2]["choices"])
            body[key] = entry
        doc["sections"][section] = body
    return doc
