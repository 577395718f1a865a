"""Scenario file parsing, strict validation, and canonical re-emission.

Scenario files are JSON documents mirroring the Scenario type field for field.
Unknown keys are rejected (a typo in a noise parameter silently invalidates an
experiment) and semantic errors are reported with the line the offending key
sits on.  Covariances accept a scalar (isotropic), a pair (diagonal), or a
full 2x2 matrix; canonical output always writes the full matrix.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .geometry import Vec2
from .simulator import RobotConfig, Scenario
from .surrogate import cantelli_k

SUPPORTED_VERSIONS = ("1",)

_TOP_REQUIRED = {"format_version", "robots"}
_TOP_OPTIONAL = {
    "name",
    "k",
    "eta",
    "n_candidates",
    "s_max",
    "dt",
    "max_steps",
    "goal_tolerance",
    "seed",
    "ego_uncertainty_enabled",
}
_ROBOT_KEYS = {
    "start",
    "goal",
    "radius",
    "pos_cov",
    "vel_cov",
    "actuation_cov",
    "preferred_speed",
}


class ScenarioFormatError(ValueError):
    """A scenario file failed schema or semantic validation."""

    def __init__(self, message: str, source: str = "scenario", line: int | None = None):
        self.source = source
        self.line = line
        loc = f"{source}:{line}" if line is not None else source
        super().__init__(f"{loc}: {message}")


def _key_line(text: str, key: str, occurrence: int = 1) -> int | None:
    """Line (1-based) of the n-th occurrence of a JSON key in the raw text."""
    needle = f'"{key}"'
    seen = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        seen += line.count(needle)
        if seen >= occurrence:
            return lineno
    return None


def _parse_vec(value, path: str, err) -> Vec2:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise err(f"{path}: expected a pair of numbers")
    return Vec2(float(value[0]), float(value[1]))


def _parse_cov(value, path: str, err) -> np.ndarray:
    if isinstance(value, (int, float)):
        m = float(value) * np.eye(2)
    elif isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) for v in value
    ):
        m = np.diag([float(value[0]), float(value[1])])
    elif (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(row, list) and len(row) == 2 for row in value)
    ):
        m = np.array(value, dtype=float)
    else:
        raise err(f"{path}: expected a scalar, a pair, or a 2x2 matrix")
    try:
        from .geometry import psd_matrix

        return psd_matrix(m)
    except ValueError as e:
        raise err(f"{path}: {e}") from e


def parse_scenario(text: str, source: str = "scenario") -> Scenario:
    """Parse and validate a scenario document; raises ScenarioFormatError."""

    def err_at(key: str, occurrence: int = 1):
        line = _key_line(text, key, occurrence)

        def make(message: str) -> ScenarioFormatError:
            return ScenarioFormatError(message, source, line)

        return make

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(f"invalid JSON: {e.msg}", source, e.lineno) from e
    if not isinstance(doc, dict):
        raise ScenarioFormatError("top level must be an object", source, 1)

    for key in doc:
        if key not in _TOP_REQUIRED | _TOP_OPTIONAL:
            raise err_at(key)(f"unknown key '{key}'")
    for key in _TOP_REQUIRED:
        if key not in doc:
            raise ScenarioFormatError(f"missing required key '{key}'", source, 1)

    version = doc["format_version"]
    if version not in SUPPORTED_VERSIONS:
        raise err_at("format_version")(
            f"unsupported format_version {version!r}; supported: {SUPPORTED_VERSIONS}"
        )

    if ("k" in doc) == ("eta" in doc):
        raise ScenarioFormatError("exactly one of 'k' or 'eta' is required", source, 1)
    if "k" in doc:
        k = float(doc["k"])
        if k < 0.0:
            raise err_at("k")("k must be >= 0")
    else:
        try:
            k = cantelli_k(float(doc["eta"]))
        except ValueError as e:
            raise err_at("eta")(str(e)) from e

    robots_doc = doc["robots"]
    if not isinstance(robots_doc, list) or not robots_doc:
        raise err_at("robots")("'robots' must be a non-empty list")
    robots = []
    for i, rd in enumerate(robots_doc):
        if not isinstance(rd, dict):
            raise err_at("robots")(f"robots[{i}] must be an object")
        for key in rd:
            if key not in _ROBOT_KEYS:
                raise err_at(key, i + 1)(f"robots[{i}]: unknown key '{key}'")
        for key in _ROBOT_KEYS:
            if key not in rd:
                raise err_at("robots")(f"robots[{i}]: missing key '{key}'")
        err = err_at("radius", i + 1)
        try:
            robots.append(
                RobotConfig(
                    start=_parse_vec(rd["start"], f"robots[{i}].start", err_at("start", i + 1)),
                    goal=_parse_vec(rd["goal"], f"robots[{i}].goal", err_at("goal", i + 1)),
                    radius=float(rd["radius"]),
                    pos_cov=_parse_cov(rd["pos_cov"], f"robots[{i}].pos_cov", err_at("pos_cov", i + 1)),
                    vel_cov=_parse_cov(rd["vel_cov"], f"robots[{i}].vel_cov", err_at("vel_cov", i + 1)),
                    actuation_cov=_parse_cov(
                        rd["actuation_cov"], f"robots[{i}].actuation_cov", err_at("actuation_cov", i + 1)
                    ),
                    preferred_speed=float(rd["preferred_speed"]),
                )
            )
        except ScenarioFormatError:
            raise
        except (ValueError, TypeError) as e:
            raise err(f"robots[{i}]: {e}") from e

    kwargs = {}
    for key, cast in (
        ("name", str),
        ("n_candidates", int),
        ("s_max", float),
        ("dt", float),
        ("max_steps", int),
        ("goal_tolerance", float),
        ("seed", int),
        ("ego_uncertainty_enabled", bool),
    ):
        if key in doc:
            value = doc[key]
            if cast in (int, float) and not isinstance(value, (int, float)):
                raise err_at(key)(f"'{key}' must be a number")
            if cast is bool and not isinstance(value, bool):
                raise err_at(key)(f"'{key}' must be a boolean")
            if cast is str and not isinstance(value, str):
                raise err_at(key)(f"'{key}' must be a string")
            kwargs[key] = cast(value)

    try:
        return Scenario(robots=tuple(robots), k=k, **kwargs)
    except ValueError as e:
        raise ScenarioFormatError(str(e), source, 1) from e


def load_scenario(path) -> Scenario:
    p = Path(path)
    return parse_scenario(p.read_text(), source=str(p))


def _cov_list(m: np.ndarray) -> list[list[float]]:
    return [[float(m[0, 0]), float(m[0, 1])], [float(m[1, 0]), float(m[1, 1])]]


def canonical_text(scenario: Scenario) -> str:
    """Deterministic canonical form; parsing then re-emitting is idempotent."""
    doc = {
        "format_version": SUPPORTED_VERSIONS[-1],
        "name": scenario.name,
        "robots": [
            {
                "start": [r.start.x, r.start.y],
                "goal": [r.goal.x, r.goal.y],
                "radius": r.radius,
                "pos_cov": _cov_list(r.pos_cov),
                "vel_cov": _cov_list(r.vel_cov),
                "actuation_cov": _cov_list(r.actuation_cov),
                "preferred_speed": r.preferred_speed,
            }
            for r in scenario.robots
        ],
        "k": scenario.k,
        "n_candidates": scenario.n_candidates,
        "s_max": scenario.s_max,
        "dt": scenario.dt,
        "max_steps": scenario.max_steps,
        "goal_tolerance": scenario.goal_tolerance,
        "seed": scenario.seed,
        "ego_uncertainty_enabled": scenario.ego_uncertainty_enabled,
    }
    return json.dumps(doc, indent=2) + "\n"


def bundled_scenario_path(name: str) -> Path:
    """Filesystem path of a scenario shipped with the package."""
    p = resources.files("prvo").joinpath("scenarios", f"{name}.json")
    return Path(str(p))
