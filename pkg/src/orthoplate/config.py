"""Flat ``key = value`` configuration files for plates and materials.

Blank lines and ``#`` comments are ignored.  Every parse error carries the
file name and line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .elasticity import MaterialError, OrthotropicConstants, TransverselyIsotropicConstants
from .plate import PlateModel, derive_material

PLATE_KEYS = {"L", "ell", "M", "nu", "E1", "E2", "d", "R", "nu23", "kappa"}
MATERIAL_KEYS = {"E3", "nu12", "nu13", "nu21", "nu31", "nu32", "mu12", "mu13", "mu23"}
INT_KEYS = {"nx", "ny", "m_max", "k_per_mode"}
KNOWN_KEYS = PLATE_KEYS | MATERIAL_KEYS | INT_KEYS
KAPPA_RTOL = 1e-4
DEFAULT_NU23 = 0.2


class ConfigError(ValueError):
    pass


def parse_text(text: str, source: str = "<config>") -> dict:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, val = (s.strip() for s in line.partition("="))
        if not key:
            raise ConfigError(f"{source}:{lineno}: missing key")
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            num = int(val) if key in INT_KEYS else float(val)
        except ValueError:
            kind = "an integer" if key in INT_KEYS else "a number"
            raise ConfigError(f"{source}:{lineno}: value of {key!r} must be {kind}, got {val!r}") from None
        if not math.isfinite(num):
            raise ConfigError(f"{source}:{lineno}: value of {key!r} must be finite")
        values[key] = num
    return values


def parse_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_text(text, str(path))


def default_config_text() -> str:
    return resources.files("orthoplate").joinpath("data/tacoma.cfg").read_text()


def load_config(path=None) -> dict:
    """Parsed values of ``path``, or of the bundled Tacoma Narrows config."""
    if path is None:
        return parse_text(default_config_text(), "tacoma.cfg")
    return parse_file(path)


@dataclass(frozen=True)
class RunConfig:
    model: PlateModel
    nx: int = 201
    ny: int = 41
    m_max: int = 12
    k_per_mode: int = 4


def _require(values: dict, keys, what: str):
    missing = [k for k in keys if k not in values]
    if missing:
        raise ConfigError(f"{what} config is missing: {', '.join(missing)}")


def plate_from_values(values: dict) -> PlateModel:
    _require(values, ("L", "ell", "M", "nu", "E1", "E2"), "plate")
    if ("d" in values) == ("R" in values):
        raise ConfigError("plate config must give exactly one of 'd' or 'R'")
    for k in ("L", "ell", "M", "E1", "E2", "d", "R"):
        if k in values and not values[k] > 0:
            raise ConfigError(f"{k} must be positive, got {values[k]}")
    mat = derive_material(values["E1"], values["E2"], values["nu"])
    if "kappa" in values:
        # the stated reinforcement ratio is a rounded consequence of E1 and E2
        if abs(values["kappa"] - mat.kappa) > KAPPA_RTOL * mat.kappa:
            raise ConfigError(
                f"kappa = {values['kappa']} is inconsistent with (E1 - E2)/E2 = {mat.kappa:.6g}"
            )
    return PlateModel.build(
        values["L"], values["ell"], mat, values["M"],
        d=values.get("d"), R=values.get("R"), nu23=values.get("nu23", DEFAULT_NU23),
    )


def run_config(values: dict) -> RunConfig:
    try:
        model = plate_from_values(values)
    except MaterialError as exc:
        raise ConfigError(str(exc)) from None
    opts = {k: values[k] for k in ("nx", "ny", "m_max", "k_per_mode") if k in values}
    return RunConfig(model, **opts)


def material_from_values(values: dict):
    """Elastic constants for the tensor checks.

    A config listing any full-tensor key (``E3``, ``nu13``, ``mu23`` ...)
    describes a general orthotropic material.  Otherwise the plate keys
    define the reinforced material: ``nu12 = nu`` and ``mu12 = K (1 - nu) / 2``.
    """
    full = MATERIAL_KEYS & set(values)
    if full - {"nu12", "mu12"}:
        keys = {k: values[k] for k in ("E1", "E2", "nu23") if k in values}
        keys.update({k: values[k] for k in full})
        if "nu12" not in keys and "nu" in values:
            keys["nu12"] = values["nu"]
        return OrthotropicConstants.from_mapping(keys)
    _require(values, ("E1", "E2"), "material")
    nu12 = values.get("nu12", values.get("nu"))
    if nu12 is None:
        raise ConfigError("material config is missing: nu")
    mu12 = values.get("mu12")
    if mu12 is None:
        mu12 = derive_material(values["E1"], values["E2"], nu12).mu12
    return TransverselyIsotropicConstants(values["E1"], values["E2"], nu12, values.get("nu23", DEFAULT_NU23), mu12)
