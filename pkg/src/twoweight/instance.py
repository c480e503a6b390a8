"""JSON instance files: schema, parsing and serialisation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from .grid import CubeId, GridSpec
from .measure import DisjointAllocation, LeafMeasure, as_exact
from .operator import ExponentTriple
from .sparse import CubeFamily
from .wolff import WolffParams

_NUM = {"anyOf": [{"type": "number"}, {"type": "string", "pattern": r"^-?[0-9./eE+-]+$"}]}
_CUBE = {
    "type": "object",
    "required": ["level", "index"],
    "properties": {
        "level": {"type": "integer", "minimum": 0},
        "index": {"type": "array", "items": {"type": "integer", "minimum": 0}},
    },
}
_CUBE_VALUE = {
    "type": "object",
    "required": ["level", "index", "value"],
    "properties": {**_CUBE["properties"], "value": _NUM},
}
_EXPONENT = {"anyOf": [{"type": "number"}, {"const": "inf"}]}

SCHEMA = {
    "type": "object",
    "required": ["dimension", "depth", "sigma", "mu", "lambda", "exponents"],
    "properties": {
        "dimension": {"type": "integer", "minimum": 1, "maximum": 3},
        "depth": {"type": "integer", "minimum": 0, "maximum": 8},
        "sigma": {"type": "array", "items": _NUM},
        "mu": {"type": "array", "items": _NUM},
        "lambda": {"type": "array", "items": _CUBE_VALUE},
        "exponents": {
            "type": "object",
            "required": ["p", "q"],
            "properties": {"p": {"type": "number"}, "q": {"type": "number"}, "s": _EXPONENT},
            "additionalProperties": False,
        },
        "f": {"type": "array", "items": _NUM},
        "g": {"type": "array", "items": _CUBE_VALUE},
        "beta": {"type": "array", "items": _CUBE_VALUE},
        "families": {"type": "object", "additionalProperties": {"type": "array", "items": _CUBE}},
        "allocations": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["cube", "leaf_fractions"],
                    "properties": {"cube": _CUBE, "leaf_fractions": {"type": "array", "items": _NUM}},
                },
            },
        },
        "wolff": {
            "type": "object",
            "required": ["alpha", "s"],
            "properties": {"alpha": {"type": "number"}, "s": {"type": "number"}},
        },
        "alpha": {"type": "number"},
        "E": {"type": "array", "items": _NUM},
        "C": _NUM,
        "seed": {"type": "integer", "minimum": 0},
        "expect": {"type": "object"},
    },
    "additionalProperties": False,
}


class InstanceError(ValueError):
    """Schema or consistency violation; ``path`` locates the offending entry."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _path(parts) -> str:
    out = "$"
    for part in parts:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def _number(x, exact: bool):
    if exact:
        return x if isinstance(x, Fraction) else Fraction(str(x))
    return float(Fraction(x)) if isinstance(x, str) else float(x)


def _leaf_array(values, exact: bool) -> np.ndarray:
    return as_exact(values) if exact else np.array([_number(v, False) for v in values], dtype=float)


@dataclass
class Instance:
    grid: GridSpec
    sigma: LeafMeasure
    mu: LeafMeasure
    lam: np.ndarray
    exponents: ExponentTriple
    f: np.ndarray | None = None
    g: np.ndarray | None = None
    beta: np.ndarray | None = None
    families: dict[str, CubeFamily] = field(default_factory=dict)
    allocations: dict[str, DisjointAllocation] = field(default_factory=dict)
    wolff: WolffParams | None = None
    alpha: float | None = None
    E: np.ndarray | None = None
    C: object = None
    seed: int | None = None
    expect: dict = field(default_factory=dict)
    exact: bool = False

    # -- parsing --------------------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, exact: bool = False) -> "Instance":
        errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(data), key=lambda err: list(err.path))
        if errors:
            err = errors[0]
            raise InstanceError(_path(err.path), err.message)
        grid = GridSpec(data["dimension"], data["depth"])
        for key in ("sigma", "mu", "f", "E"):
            if key in data and len(data[key]) != grid.num_leaves:
                raise InstanceError(_path([key]), f"expected {grid.num_leaves} entries, got {len(data[key])}")
        try:
            exps = ExponentTriple.from_json(data["exponents"])
        except ValueError as err:
            raise InstanceError("$.exponents", str(err)) from None
        sigma = LeafMeasure(grid, _leaf_array(data["sigma"], exact), "sigma", exact)
        mu = LeafMeasure(grid, _leaf_array(data["mu"], exact), "mu", exact)
        inst = cls(grid, sigma, mu, cls._cube_values(grid, data["lambda"], "lambda", exact), exps, exact=exact)
        if "f" in data:
            inst.f = _leaf_array(data["f"], exact)
        for key in ("g", "beta"):
            if key in data:
                setattr(inst, key, cls._cube_values(grid, data[key], key, exact, signed=key == "g"))
        for name, cubes in data.get("families", {}).items():
            for j, c in enumerate(cubes):
                cls._check_cube(grid, c, ["families", name, j])
            inst.families[name] = CubeFamily.from_json(grid, cubes)
        for name, items in data.get("allocations", {}).items():
            for j, item in enumerate(items):
                cls._check_cube(grid, item["cube"], ["allocations", name, j, "cube"])
                if len(item["leaf_fractions"]) != grid.num_leaves:
                    raise InstanceError(_path(["allocations", name, j, "leaf_fractions"]),
                                        f"expected {grid.num_leaves} entries")
            try:
                inst.allocations[name] = DisjointAllocation.from_json(grid, items, exact)
            except ValueError as err:
                raise InstanceError(_path(["allocations", name]), str(err)) from None
        if "wolff" in data:
            inst.wolff = WolffParams.from_json(data["wolff"])
        if "alpha" in data:
            inst.alpha = float(data["alpha"])
        if "E" in data:
            inst.E = _leaf_array(data["E"], exact)
        if "C" in data:
            inst.C = _number(data["C"], exact)
        inst.seed = data.get("seed")
        inst.expect = dict(data.get("expect", {}))
        return inst

    @staticmethod
    def _check_cube(grid: GridSpec, obj, where) -> CubeId:
        cube = CubeId.from_json(obj)
        try:
            grid.validate(cube)
        except ValueError as err:
            raise InstanceError(_path(where), str(err)) from None
        return cube

    @classmethod
    def _cube_values(cls, grid: GridSpec, items, key: str, exact: bool, signed: bool = False) -> np.ndarray:
        out = grid.cube_array(dtype=object) if exact else np.zeros(grid.num_cubes)
        if exact:
            out[:] = Fraction(0)
        for j, item in enumerate(items):
            cube = cls._check_cube(grid, item, [key, j])
            value = _number(item["value"], exact)
            if not signed and value < 0:
                raise InstanceError(_path([key, j, "value"]), "must be nonnegative")
            out[grid.flat(cube)] = value
        return out

    @classmethod
    def loads(cls, text: str, exact: bool = False) -> "Instance":
        try:
            data = json.loads(text, parse_float=Fraction if exact else float)
        except json.JSONDecodeError as err:
            raise InstanceError("$", f"invalid JSON: {err}") from None
        if exact and isinstance(data, dict):
            # exponents stay floating; only masses and coefficients are rational
            real = {k: _fractions_to_floats(data.pop(k)) for k in _REAL_KEYS if k in data}
            data = {**_fractions_to_strings(data), **real}
        return cls.from_dict(data, exact)

    @classmethod
    def load(cls, path: str | Path, exact: bool = False) -> "Instance":
        return cls.loads(Path(path).read_text(), exact)

    # -- serialisation ------------------------------------------------------------------

    def to_dict(self) -> dict:
        grid = self.grid
        out = {
            "dimension": grid.dimension,
            "depth": grid.depth,
            "sigma": [_num_out(x) for x in self.sigma.masses],
            "mu": [_num_out(x) for x in self.mu.masses],
            "lambda": _cube_values_out(grid, self.lam),
            "exponents": self.exponents.to_json(),
        }
        if self.f is not None:
            out["f"] = [_num_out(x) for x in self.f]
        if self.g is not None:
            out["g"] = _cube_values_out(grid, self.g)
        if self.beta is not None:
            out["beta"] = _cube_values_out(grid, self.beta)
        if self.families:
            out["families"] = {k: v.to_json() for k, v in self.families.items()}
        if self.allocations:
            out["allocations"] = {k: v.to_json() for k, v in self.allocations.items()}
        if self.wolff is not None:
            out["wolff"] = self.wolff.to_json()
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.E is not None:
            out["E"] = [_num_out(x) for x in self.E]
        if self.C is not None:
            out["C"] = _num_out(self.C)
        if self.seed is not None:
            out["seed"] = self.seed
        if self.expect:
            out["expect"] = self.expect
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


_REAL_KEYS = ("exponents", "wolff", "alpha")


def _fractions_to_floats(obj):
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _fractions_to_floats(v) for k, v in obj.items()}
    return obj


def _fractions_to_strings(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _fractions_to_strings(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_fractions_to_strings(v) for v in obj]
    return obj


def _num_out(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    x = float(x)
    if math.isfinite(x) and x == int(x) and abs(x) < 2 ** 53:
        return int(x)
    return x


def _cube_values_out(grid: GridSpec, arr) -> list[dict]:
    return [
        {**grid.cube(int(i)).to_json(), "value": _num_out(arr[i])}
        for i in range(grid.num_cubes)
        if arr[i] != 0
    ]
