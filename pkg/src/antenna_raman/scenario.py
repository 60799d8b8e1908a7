"""Scenario files: flat "key = value" text with dotted keys.

Values keep the units their key suffix names (_hz ordinary Hz, _nm, _m2,
_m3, _uw_per_um2, _deg); unit conversion happens downstream, exactly once.
Unknown keys are rejected.  Every key has a default, so a scenario file
only needs the entries it changes.  Serialization is canonical (fixed key
order, repr-exact numbers), which makes hashing and byte-identical
round-trips trivial.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from importlib import resources

from .errors import ConfigError


def _parse_float(s: str) -> float:
    return float(s)


def _parse_int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError(f"expected integer, got {s}")
    return int(v)


def _parse_str(s: str) -> str:
    return s


def _parse_complex(s: str) -> complex:
    return complex(s.replace("i", "j"))


def _parse_opt_float(s: str):
    if s.lower() in ("none", ""):
        return None
    return float(s)


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, str):
        return v
    if isinstance(v, complex):
        return repr(v).strip("()")
    return repr(v)


@dataclass(frozen=True)
class Scenario:
    preset: str = "hybrid"
    # drive
    omega_l_hz: float = 498e12
    intensity_uw_per_um2: float = 1e-4
    incidence_angle_deg: float = 60.0
    spot_area_m2: float = 1e-12
    # antenna (two-level emitter in the host)
    omega_sigma_hz: float = 498e12
    gamma0_hz: float = 25e6
    gamma_total_over_gamma0: float = 4.0
    depth_nm: float = 2.0
    host_index: float = 2.42
    # cavity (broad radiating mode)
    omega_a_hz: float = 498e12
    kappa_hz: float = 50e12
    v_eff_nm3: float = 1000.0
    sigma_ext_m2: float = 1e-13
    detuning_policy: str = "explicit"
    delta_a_hz: float = -20e12
    # vibration
    omega_b_hz: float = 40e12
    gamma_b_hz: float = 1e12
    raman_volume_m3: float = 2e-30
    n_b_th: float = 0.05
    # couplings
    separation_nm: float = 3.0
    g_jc_hz: float = 2.0e9
    g_res_hz: float | None = None
    g0_sigma_hz: float | None = None
    g0_a_hz: float | None = None
    # engine
    cavity_levels: int = 4
    phonon_levels: int = 4
    tau_points: int = 4096
    # electromagnetic environment
    np_radius_nm: float = 100.0
    eps_metal: complex = -9.53 + 1.51j
    eps_substrate: float = 5.86
    em_wavelength_nm: float = 602.0
    molecule_height_nm: float = 1.0
    gap_nm: float = 10.0
    gap_min_nm: float = 1.0
    gap_max_nm: float = 20.0
    gap_points: int = 20


# file key -> (field name, parser); order fixes the canonical serialization
SCHEMA = {
    "preset": ("preset", _parse_str),
    "drive.omega_l_hz": ("omega_l_hz", _parse_float),
    "drive.intensity_uw_per_um2": ("intensity_uw_per_um2", _parse_float),
    "drive.incidence_angle_deg": ("incidence_angle_deg", _parse_float),
    "drive.spot_area_m2": ("spot_area_m2", _parse_float),
    "antenna.omega_sigma_hz": ("omega_sigma_hz", _parse_float),
    "antenna.gamma0_hz": ("gamma0_hz", _parse_float),
    "antenna.gamma_total_over_gamma0": ("gamma_total_over_gamma0", _parse_float),
    "antenna.depth_nm": ("depth_nm", _parse_float),
    "antenna.host_index": ("host_index", _parse_float),
    "cavity.omega_a_hz": ("omega_a_hz", _parse_float),
    "cavity.kappa_hz": ("kappa_hz", _parse_float),
    "cavity.v_eff_nm3": ("v_eff_nm3", _parse_float),
    "cavity.sigma_ext_m2": ("sigma_ext_m2", _parse_float),
    "cavity.detuning_policy": ("detuning_policy", _parse_str),
    "cavity.delta_a_hz": ("delta_a_hz", _parse_float),
    "vibration.omega_b_hz": ("omega_b_hz", _parse_float),
    "vibration.gamma_b_hz": ("gamma_b_hz", _parse_float),
    "vibration.raman_volume_m3": ("raman_volume_m3", _parse_float),
    "vibration.n_b_th": ("n_b_th", _parse_float),
    "coupling.separation_nm": ("separation_nm", _parse_float),
    "coupling.g_jc_hz": ("g_jc_hz", _parse_float),
    "coupling.g_res_hz": ("g_res_hz", _parse_opt_float),
    "coupling.g0_sigma_hz": ("g0_sigma_hz", _parse_opt_float),
    "coupling.g0_a_hz": ("g0_a_hz", _parse_opt_float),
    "engine.cavity_levels": ("cavity_levels", _parse_int),
    "engine.phonon_levels": ("phonon_levels", _parse_int),
    "engine.tau_points": ("tau_points", _parse_int),
    "em.np_radius_nm": ("np_radius_nm", _parse_float),
    "em.eps_metal": ("eps_metal", _parse_complex),
    "em.eps_substrate": ("eps_substrate", _parse_float),
    "em.wavelength_nm": ("em_wavelength_nm", _parse_float),
    "em.molecule_height_nm": ("molecule_height_nm", _parse_float),
    "em.gap_nm": ("gap_nm", _parse_float),
    "em.gap_min_nm": ("gap_min_nm", _parse_float),
    "em.gap_max_nm": ("gap_max_nm", _parse_float),
    "em.gap_points": ("gap_points", _parse_int),
}

_FIELD_TO_KEY = {field: key for key, (field, _) in SCHEMA.items()}

assert set(_FIELD_TO_KEY) == {f.name for f in fields(Scenario)}


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text; unlisted keys fall back to defaults."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        field_name, parser = SCHEMA[key]
        if field_name in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[field_name] = parser(val)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return Scenario(**values)


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_scenario(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc


def default_scenario() -> Scenario:
    text = resources.files("antenna_raman").joinpath("data/default_scenario.txt").read_text()
    return parse_scenario(text)


def serialize_scenario(scenario: Scenario) -> str:
    lines = [f"{key} = {_fmt(getattr(scenario, field))}" for key, (field, _) in SCHEMA.items()]
    return "\n".join(lines) + "\n"


def scenario_sha256(scenario: Scenario) -> str:
    return hashlib.sha256(serialize_scenario(scenario).encode("utf-8")).hexdigest()


def with_updates(scenario: Scenario, **changes) -> Scenario:
    return replace(scenario, **changes)
