"""Scenario catalog and the ``key = value`` scenario file format.

A scenario fixes a grid size, a metric from a small family of periodic
geometries and a spinor field from a catalog of expressions.  Example::

    name = product-kahler
    grid.n = 16
    geometry.name = product
    geometry.amplitudes = 0.2, 0, 0.2, 0
    geometry.frequencies = 1, 1, 1, 1
    spinor.name = constant
    spinor.constant = 1, 0, 0, 0
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fiber import I_UNIT, quat_mul
from .geometry import Grid, MetricField

TWO_PI = 2.0 * np.pi

GEOMETRIES = ("flat", "conformal", "product", "perturbed")
SPINORS = ("constant", "trig", "conformal", "phase")

_LIST_KEYS = {
    "geometry.amplitudes", "geometry.frequencies", "geometry.axes",
    "spinor.constant", "spinor.amplitudes", "spinor.frequencies", "spinor.axes",
    "spinor.w", "spinor.x", "spinor.y", "spinor.z",
}
_SCALAR_KEYS = {
    "name", "grid.n", "geometry.name", "geometry.seed", "spinor.name", "spinor.frequency",
    "tol.d", "tol.m", "tol.q", "tol.consistency",
}
KNOWN_KEYS = _LIST_KEYS | _SCALAR_KEYS


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class Scenario:
    name: str
    n: int
    geometry: str = "flat"
    geometry_params: dict = field(default_factory=dict)
    spinor: str = "constant"
    spinor_params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ScenarioError(f"unknown geometry {self.geometry!r}; expected one of {GEOMETRIES}")
        if self.spinor not in SPINORS:
            raise ScenarioError(f"unknown spinor {self.spinor!r}; expected one of {SPINORS}")

    @property
    def grid(self) -> Grid:
        return Grid(self.n)

    def with_n(self, n: int) -> "Scenario":
        return Scenario(self.name, n, self.geometry, dict(self.geometry_params),
                        self.spinor, dict(self.spinor_params), dict(self.tolerances))

    def metric(self) -> MetricField:
        return MetricField(self.grid, metric_array(self.grid, self.geometry, self.geometry_params))

    def spinor_field(self) -> np.ndarray:
        return spinor_array(self.grid, self.spinor, self.spinor_params)

    def to_text(self) -> str:
        lines = [f"name = {self.name}", f"grid.n = {self.n}", f"geometry.name = {self.geometry}"]
        for key, value in self.geometry_params.items():
            lines.append(f"geometry.{key} = {_fmt(value)}")
        lines.append(f"spinor.name = {self.spinor}")
        for key, value in self.spinor_params.items():
            lines.append(f"spinor.{key} = {_fmt(value)}")
        for key, value in self.tolerances.items():
            lines.append(f"tol.{key} = {_fmt(value)}")
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, (list, tuple)):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return str(int(value)) if value.is_integer() else repr(value)
    return str(value)


def _parse_number(text: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ScenarioError(f"not a number: {text!r}", line) from None


def parse_scenario(text: str, *, default_name: str = "scenario") -> Scenario:
    values: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ScenarioError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ScenarioError(f"duplicate key {key!r}", lineno)
        values[key] = (value, lineno)

    def scalar(key, default=None):
        return values[key][0] if key in values else default

    n_text, n_line = values.get("grid.n", ("16", None))
    try:
        n = int(n_text)
    except ValueError:
        raise ScenarioError(f"grid.n must be an integer, got {n_text!r}", n_line) from None
    if n < 4:
        raise ScenarioError(f"grid.n must be >= 4, got {n}", n_line)

    geometry_params: dict = {}
    spinor_params: dict = {}
    tolerances: dict = {}
    for key, (value, lineno) in values.items():
        section, _, sub = key.partition(".")
        if key in _LIST_KEYS:
            parsed = [_parse_number(v.strip(), lineno) for v in value.split(",") if v.strip()]
            if not parsed:
                raise ScenarioError(f"{key} needs at least one number", lineno)
        elif key in ("geometry.seed",):
            parsed = int(_parse_number(value, lineno))
        elif key == "spinor.frequency" or section == "tol":
            parsed = _parse_number(value, lineno)
        else:
            continue
        target = {"geometry": geometry_params, "spinor": spinor_params, "tol": tolerances}[section]
        target[sub] = parsed

    geometry = scalar("geometry.name", "flat")
    spinor = scalar("spinor.name", "constant")
    for key, allowed in (("geometry.name", GEOMETRIES), ("spinor.name", SPINORS)):
        if key in values and values[key][0] not in allowed:
            raise ScenarioError(f"{key} must be one of {allowed}, got {values[key][0]!r}", values[key][1])
    scenario = Scenario(scalar("name", default_name), n, geometry, geometry_params,
                        spinor, spinor_params, tolerances)
    # surface construction errors (shapes, definiteness) at parse time
    validate(scenario)
    return scenario


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), default_name=path.stem)


def validate(scenario: Scenario) -> None:
    small = scenario.with_n(4)
    try:
        small.metric()
        small.spinor_field()
    except (ValueError, IndexError) as exc:
        raise ScenarioError(str(exc)) from None


# -- catalog -------------------------------------------------------------------

def _sine_sum(x: np.ndarray, params: dict, default_axes=(0,)) -> np.ndarray:
    amps = list(params.get("amplitudes", []))
    freqs = list(params.get("frequencies", [1.0] * len(amps)))
    axes = list(params.get("axes", list(default_axes) * len(amps)))
    if not (len(amps) == len(freqs) == len(axes)):
        raise ValueError("amplitudes, frequencies and axes must have equal length")
    total = np.zeros(x.shape[:-1])
    for a, m, ax in zip(amps, freqs, axes):
        ax = int(ax)
        if not 0 <= ax <= 3:
            raise ValueError(f"axis must be in 0..3, got {ax}")
        total = total + a * np.sin(TWO_PI * m * x[..., ax])
    return total


def metric_array(grid: Grid, name: str, params: dict) -> np.ndarray:
    x = grid.coords()
    eye = np.broadcast_to(np.eye(4), grid.shape + (4, 4))
    if name == "flat":
        return eye.copy()
    if name == "conformal":
        f = _sine_sum(x, params)
        return np.exp(2.0 * f)[..., None, None] * eye
    if name == "product":
        amps = list(params.get("amplitudes", [0.2, 0.0, 0.2, 0.0]))
        freqs = list(params.get("frequencies", [1.0] * 4))
        if len(amps) != 4 or len(freqs) != 4:
            raise ValueError("product geometry takes 4 amplitudes and 4 frequencies")
        log_h = [amps[a] * np.sin(TWO_PI * freqs[a] * x[..., a]) for a in range(4)]
        h1 = np.exp(log_h[0] + log_h[1])
        h2 = np.exp(log_h[2] + log_h[3])
        g = np.zeros(grid.shape + (4, 4))
        for a, h in zip(range(4), (h1, h1, h2, h2)):
            g[..., a, a] = h
        return g
    if name == "perturbed":
        amps = list(params.get("amplitudes", [0.2]))
        freqs = list(params.get("frequencies", [1.0]))
        rng = np.random.default_rng(int(params.get("seed", 0)))
        coeff = rng.normal(size=(4, 4, 4))
        coeff = 0.5 * (coeff + np.swapaxes(coeff, 0, 1))
        phase = rng.uniform(0.0, TWO_PI, size=(4, 4, 4))
        phase = 0.5 * (phase + np.swapaxes(phase, 0, 1))
        # sum of spectral norms bounds |S| by 1, so g is positive for amplitude < 1
        coeff /= sum(np.linalg.norm(coeff[..., r], 2) for r in range(4))
        pert = np.zeros(grid.shape + (4, 4))
        for amp, m in zip(amps, freqs):
            for r in range(4):
                pert += amp * coeff[:, :, r] * np.sin(TWO_PI * m * x[..., r, None, None] + phase[:, :, r])
        return eye + pert
    raise ValueError(f"unknown geometry {name!r}")


def spinor_array(grid: Grid, name: str, params: dict) -> np.ndarray:
    x = grid.coords()
    const = np.asarray(params.get("constant", [1.0, 0.0, 0.0, 0.0]), dtype=float)
    if const.shape != (4,):
        raise ValueError("spinor.constant takes 4 numbers")
    ones = np.ones(grid.shape)
    if name == "constant":
        return ones[..., None] * const
    if name == "trig":
        m = float(params.get("frequency", 1.0))
        q = np.zeros(grid.shape + (4,))
        for comp, key in enumerate("wxyz"):
            coeffs = list(params.get(key, []))
            if len(coeffs) > 9:
                raise ValueError(f"spinor.{key} takes at most 9 numbers")
            coeffs += [0.0] * (9 - len(coeffs))
            q[..., comp] = coeffs[0]
            for ax in range(4):
                arg = TWO_PI * m * x[..., ax]
                q[..., comp] += coeffs[1 + 2 * ax] * np.sin(arg) + coeffs[2 + 2 * ax] * np.cos(arg)
        return q
    if name == "conformal":
        f = _sine_sum(x, params)
        return np.exp(f)[..., None] * const
    if name == "phase":
        theta = _sine_sum(x, params)
        rot = np.cos(theta)[..., None] * np.array([1.0, 0, 0, 0]) + np.sin(theta)[..., None] * I_UNIT
        return quat_mul(rot, const)
    raise ValueError(f"unknown spinor {name!r}")


# -- named and random scenarios ---------------------------------------------------

def catalog(n: int = 16) -> dict[str, Scenario]:
    return {
        "flat-kahler": Scenario("flat-kahler", n),
        "conformal-spinor": Scenario(
            "conformal-spinor", n, spinor="conformal",
            spinor_params={"amplitudes": [0.3], "frequencies": [1.0], "axes": [0]},
        ),
        "product-kahler": Scenario(
            "product-kahler", n, geometry="product",
            geometry_params={"amplitudes": [0.2, 0.0, 0.2, 0.0], "frequencies": [1.0, 1.0, 1.0, 1.0]},
        ),
        "conformal-metric": Scenario(
            "conformal-metric", n, geometry="conformal",
            geometry_params={"amplitudes": [0.1], "frequencies": [1.0], "axes": [0]},
            spinor="trig", spinor_params={"w": [1.0, 0.2, 0, 0, 0.1], "x": [0.0, 0, 0, 0.3],
                                          "y": [0.2, 0, 0, 0, 0, 0.2], "z": [0.0, 0, 0, 0, 0, 0, 0, 0.25]},
        ),
        "phase-product": Scenario(
            "phase-product", n, geometry="product",
            geometry_params={"amplitudes": [0.2, 0.1, 0.15, 0.1], "frequencies": [1.0, 1.0, 1.0, 1.0]},
            spinor="phase", spinor_params={"amplitudes": [0.5, 0.4], "frequencies": [1.0, 1.0], "axes": [1, 3]},
        ),
    }


def random_scenario(seed: int, n: int = 16) -> Scenario:
    """A smooth, nowhere-vanishing random scenario on one of the curved families."""
    rng = np.random.default_rng(seed)
    family = ("conformal", "product", "perturbed")[seed % 3]
    if family == "conformal":
        geometry_params = {
            "amplitudes": [round(float(a), 6) for a in rng.uniform(-0.15, 0.15, size=2)],
            "frequencies": [1.0, 1.0],
            "axes": [float(a) for a in rng.choice(4, size=2, replace=False)],
        }
    elif family == "product":
        geometry_params = {
            "amplitudes": [round(float(a), 6) for a in rng.uniform(-0.2, 0.2, size=4)],
            "frequencies": [1.0] * 4,
        }
    else:
        geometry_params = {"amplitudes": [round(float(rng.uniform(0.05, 0.2)), 6)],
                           "frequencies": [1.0], "seed": int(rng.integers(0, 2**31))}
    spinor_params: dict = {"frequency": 1.0}
    base = rng.normal(size=4)
    base /= np.linalg.norm(base)
    for comp, key in enumerate("wxyz"):
        # 8 terms of size <= 0.06 per component keep |q - base| < 1
        coeffs = rng.uniform(-0.06, 0.06, size=9)
        coeffs[0] = base[comp]
        spinor_params[key] = [round(float(c), 6) for c in coeffs]
    return Scenario(f"random-{seed}", n, family, geometry_params, "trig", spinor_params)
