"""Run configuration: an INI-style key-value file with strict validation.

Every key has a default equal to the nominal benchmark preset, so an
empty (or absent) config reproduces the reference simulation. Unknown
sections or keys are rejected rather than ignored.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from . import presets
from .exceptions import ConfigError
from .observers import ObserverGains, ObserverState
from .rigidbody import IntegratorConfig, TorqueProfile
from .sensing import NoiseConfig, Scenario, make_direction_set, sample_scenario

_KNOWN = {
    "scenario": {"source", "seed", "q0", "r0", "omega0", "b", "qhat0", "rhat0",
                 "lhat0", "bhat0", "j", "v1", "v2"},
    "gains": {"k_r", "k_l", "k_a", "k_b", "alpha", "weights"},
    "noise": {"enabled", "sigma", "h_meas"},
    "integrator": {"h_truth", "h_obs", "duration"},
    "torque": {"kind", "value"},
}


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    gains: ObserverGains
    noise: NoiseConfig
    integrator: IntegratorConfig
    torque: TorqueProfile
    seed: int = 0
    source: str = "nominal"

    def observer_init(self) -> ObserverState:
        s = self.scenario
        return ObserverState(b_hat=s.bhat0, l_hat=s.lhat0, q_hat=s.qhat0)


def default_config() -> RunConfig:
    return RunConfig(
        scenario=presets.nominal_scenario(),
        gains=presets.nominal_gains(),
        noise=presets.nominal_noise(enabled=False),
        integrator=presets.nominal_integrator(),
        torque=presets.nominal_torque(),
    )


def _vector(raw: str, n: int, key: str) -> np.ndarray:
    parts = raw.replace(",", " ").split()
    if len(parts) != n:
        raise ConfigError(f"key '{key}' needs {n} numbers, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ConfigError(f"key '{key}': {exc}") from None


def _matrix(raw: str, key: str) -> np.ndarray:
    return _vector(raw, 9, key).reshape(3, 3)


def _get_float(sec, key: str, default: float) -> float:
    if key not in sec:
        return default
    try:
        return float(sec[key])
    except ValueError:
        raise ConfigError(f"key '{key}' is not a number: {sec[key]!r}") from None


def _get_bool(sec, key: str, default: bool) -> bool:
    if key not in sec:
        return default
    val = sec[key].strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key '{key}' is not a boolean: {sec[key]!r}")


def _attitude_quat(sec, qkey: str, rkey: str, default_q: np.ndarray) -> np.ndarray:
    from .so3 import check_unit_quaternion, project_to_so3, rot_to_quat

    if qkey in sec and rkey in sec:
        raise ConfigError(f"give either '{qkey}' or '{rkey}', not both")
    if qkey in sec:
        q = _vector(sec[qkey], 4, qkey)
        try:
            return check_unit_quaternion(q, tol=1e-6) / np.linalg.norm(q)
        except Exception as exc:
            raise ConfigError(f"key '{qkey}': {exc}") from None
    if rkey in sec:
        return rot_to_quat(project_to_so3(_matrix(sec[rkey], rkey)))
    return default_q


def load_config(path: str | None) -> RunConfig:
    """Parse a config file; None or an empty file yields the defaults."""
    base = default_config()
    if path is None:
        return base

    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None

    for section in parser.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _KNOWN[section]:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")

    sec = parser["gains"] if parser.has_section("gains") else {}
    weights = (_vector(sec["weights"], 3, "weights") if "weights" in sec
               else presets.NOMINAL_WEIGHTS)
    gain_vals = dict(
        k_r=_get_float(sec, "k_r", 2.0),
        k_l=_get_float(sec, "k_l", 2.0),
        k_a=_get_float(sec, "k_a", 1.0),
        k_b=_get_float(sec, "k_b", 4.0),
        alpha=_get_float(sec, "alpha", 0.3),
    )

    sec = parser["noise"] if parser.has_section("noise") else {}
    noise = NoiseConfig(
        sigma=_get_float(sec, "sigma", 0.1),
        enabled=_get_bool(sec, "enabled", False),
        h_meas=_get_float(sec, "h_meas", 0.002),
    )

    sec = parser["integrator"] if parser.has_section("integrator") else {}
    try:
        integrator = IntegratorConfig(
            h_truth=_get_float(sec, "h_truth", 1e-4),
            h_obs=_get_float(sec, "h_obs", 1e-3),
            duration=_get_float(sec, "duration", 10.0),
        )
    except ValueError as exc:
        raise ConfigError(f"[integrator]: {exc}") from None

    sec = parser["torque"] if parser.has_section("torque") else {}
    try:
        torque = TorqueProfile(
            kind=sec.get("kind", "sinusoid"),
            value=_vector(sec["value"], 3, "value") if "value" in sec else np.zeros(3),
        )
    except ValueError as exc:
        raise ConfigError(f"[torque]: {exc}") from None

    sec = parser["scenario"] if parser.has_section("scenario") else {}
    source = sec.get("source", "nominal")
    seed = int(_get_float(sec, "seed", 0.0))
    nominal = presets.nominal_scenario()
    if source == "nominal":
        scenario = nominal
    elif source == "sampled":
        scenario = sample_scenario(np.random.default_rng(
            np.random.SeedSequence(seed, spawn_key=(0,))), weights=weights)
    elif source == "explicit":
        scenario = Scenario(
            q0=_attitude_quat(sec, "q0", "r0", nominal.q0),
            omega0=_vector(sec["omega0"], 3, "omega0") if "omega0" in sec else nominal.omega0,
            b=_vector(sec["b"], 3, "b") if "b" in sec else nominal.b,
            qhat0=_attitude_quat(sec, "qhat0", "rhat0", nominal.qhat0),
            lhat0=_vector(sec["lhat0"], 3, "lhat0") if "lhat0" in sec else nominal.lhat0,
            bhat0=_vector(sec["bhat0"], 3, "bhat0") if "bhat0" in sec else nominal.bhat0,
            j=_matrix(sec["j"], "j") if "j" in sec else nominal.j,
            v1=_vector(sec["v1"], 3, "v1") if "v1" in sec else nominal.v1,
            v2=_vector(sec["v2"], 3, "v2") if "v2" in sec else nominal.v2,
        )
    else:
        raise ConfigError(f"unknown scenario source {source!r} "
                          "(options: nominal, sampled, explicit)")

    try:
        dirs = make_direction_set(scenario.v1, scenario.v2, weights)
        gains = ObserverGains(dirs=dirs, **gain_vals)
    except Exception as exc:
        raise ConfigError(f"invalid gains/directions: {exc}") from None

    return RunConfig(scenario=scenario, gains=gains, noise=noise,
                     integrator=integrator, torque=torque, seed=seed, source=source)
