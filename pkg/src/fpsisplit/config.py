"""INI configuration files.

Grammar (all sections optional, unknown sections or keys are errors)::

    [run]       bc = mms | vessel, dt, T_final, d_h, P_max, T_pulse, output_dir, cadence
    [geometry]  length, R_b, R_f
    [mesh]      nx, ny_thick, ny_plate, ny_fluid
    [params]    preset = unit | vessel, then any PhysicalParams field;
                kappa is a scalar or four comma-separated entries k11,k12,k21,k22
    [study]     levels, steps, n_time, T_time, H, H_values, t_star, seeds

Lists are comma separated. Missing entries fall back to the defaults of the
chosen ``bc``: the unit-square manufactured-solution layout at n = 20, or the
vessel layout at full resolution.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from io import StringIO
from pathlib import Path

from .model import (Geometry, PhysicalParams, RunConfig, mms_config,
                    unit_params, validate_params, vessel_params)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StudySettings:
    levels: tuple = (20, 40, 80)
    steps: tuple = (0.04, 0.02, 0.01)
    n_time: int = 100
    T_time: float = 1.0
    H: float = 0.02
    H_values: tuple = (0.05, 0.025, 0.0125, 0.00625)
    t_star: float = 0.0075
    seeds: int = 20


@dataclass(frozen=True)
class Settings:
    run: RunConfig
    params: PhysicalParams
    study: StudySettings = field(default_factory=StudySettings)
    preset: str = "unit"


_RUN_KEYS = {f.name for f in dataclasses.fields(RunConfig)} - {"geometry", "mesh"}
_PARAM_KEYS = {f.name for f in dataclasses.fields(PhysicalParams)}
_SECTIONS = {
    "run": _RUN_KEYS,
    "geometry": {f.name for f in dataclasses.fields(Geometry)},
    "mesh": {"nx", "ny_thick", "ny_plate", "ny_fluid"},
    "params": _PARAM_KEYS | {"preset"},
    "study": {f.name for f in dataclasses.fields(StudySettings)},
}


def _float_list(s: str) -> tuple:
    return tuple(float(v) for v in s.split(",") if v.strip())


def _int_list(s: str) -> tuple:
    return tuple(int(v) for v in s.split(",") if v.strip())


def _convert(section: str, key: str, raw: str):
    try:
        if section == "run":
            if key in ("bc", "output_dir"):
                return raw.strip()
            return int(raw) if key == "cadence" else float(raw)
        if section == "mesh":
            return int(raw)
        if section == "params":
            if key == "preset":
                return raw.strip()
            if key == "kappa":
                vals = _float_list(raw)
                if len(vals) == 1:
                    return vals[0]
                if len(vals) == 4:
                    return ((vals[0], vals[1]), (vals[2], vals[3]))
                raise ValueError("kappa needs 1 or 4 entries")
            return float(raw)
        if section == "study":
            if key == "levels":
                return _int_list(raw)
            if key in ("steps", "H_values"):
                return _float_list(raw)
            if key in ("n_time", "seeds"):
                return int(raw)
            return float(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None


def parse(text: str, overrides: dict | None = None) -> Settings:
    """Build settings from INI text plus ``{"section.key": "value"}`` overrides."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    for dotted, value in (overrides or {}).items():
        if "." not in dotted:
            raise ConfigError(f"override {dotted!r} must look like section.key")
        sec, key = dotted.split(".", 1)
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp.set(sec, key, str(value))

    data = {}
    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        for key, raw in cp.items(sec):
            if key not in _SECTIONS[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
            data.setdefault(sec, {})[key] = _convert(sec, key, raw)

    run_kw = dict(data.get("run", {}))
    bc = run_kw.get("bc", "mms")
    if bc == "vessel":
        from .vessel import vessel_config
        base = vessel_config()
    elif bc == "mms":
        base = mms_config()
    else:
        raise ConfigError(f"[run] bc must be 'mms' or 'vessel' (got {bc!r})")
    geom = dataclasses.replace(base.geometry, **data.get("geometry", {}))
    mesh = dataclasses.replace(base.mesh, **data.get("mesh", {}))
    try:
        run = dataclasses.replace(base, geometry=geom, mesh=mesh, **run_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[run] {exc}") from None

    pkw = dict(data.get("params", {}))
    preset = pkw.pop("preset", "vessel" if bc == "vessel" else "unit")
    try:
        if preset == "unit":
            params = unit_params(**pkw)
        elif preset == "vessel":
            params = vessel_params(**pkw)
        else:
            raise ConfigError(f"[params] preset must be 'unit' or 'vessel' (got {preset!r})")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[params] {exc}") from None
    bad = validate_params(params)
    if bad:
        raise ConfigError("invalid parameters: " + "; ".join(bad))

    study = StudySettings(**data.get("study", {}))
    if any(n < 1 for n in study.levels) or any(s <= 0 for s in study.steps):
        raise ConfigError("[study] levels and steps must be positive")
    if any(h <= 0 for h in study.H_values) or study.H <= 0:
        raise ConfigError("[study] plate thicknesses must be positive")
    return Settings(run, params, study, preset)


def load(path, overrides: dict | None = None) -> Settings:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"configuration file not found: {p}")
    return parse(p.read_text(), overrides)


def _fmt(v) -> str:
    if isinstance(v, tuple):
        flat = [x for row in v for x in (row if isinstance(row, tuple) else (row,))]
        return ", ".join(repr(x) for x in flat)
    return repr(v) if isinstance(v, float) else str(v)


def dump(s: Settings) -> str:
    """INI text that :func:`parse` maps back to ``s``."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    run = {k: getattr(s.run, k) for k in sorted(_RUN_KEYS)}
    cp["run"] = {k: _fmt(v) for k, v in run.items()}
    cp["geometry"] = {f.name: _fmt(getattr(s.run.geometry, f.name))
                      for f in dataclasses.fields(Geometry)}
    cp["mesh"] = {k: _fmt(getattr(s.run.mesh, k)) for k in ("nx", "ny_thick", "ny_plate", "ny_fluid")}
    cp["params"] = {"preset": s.preset} | {f.name: _fmt(getattr(s.params, f.name))
                                            for f in dataclasses.fields(PhysicalParams)}
    cp["study"] = {f.name: _fmt(getattr(s.study, f.name)) for f in dataclasses.fields(StudySettings)}
    buf = StringIO()
    cp.write(buf)
    return buf.getvalue()


def as_dict(s: Settings) -> dict:
    return {"run": dataclasses.asdict(s.run), "params": dataclasses.asdict(s.params),
            "study": dataclasses.asdict(s.study), "preset": s.preset}
