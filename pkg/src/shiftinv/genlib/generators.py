from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..exceptions import ConfigError, DimensionMismatch
from ..lattice import Group, Lattice, format_group, parse_group
from .expr import Node, merge_intervals, node_from_dict


@dataclass(frozen=True)
class FourierGenerator:
    """A generator given by its Fourier transform ``expr``.

    ``tail_bound`` certifies the sup distance between the truncated model and
    the untruncated function; it defaults to the bound reported by the tree.
    """

    expr: Node
    label: str = ""
    tail_bound: Optional[float] = None

    def __post_init__(self):
        if self.tail_bound is None:
            object.__setattr__(self, "tail_bound", float(self.expr.tail_sup()))
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be nonnegative")

    @property
    def dim(self) -> int:
        return self.expr.dim

    def __call__(self, omega) -> np.ndarray:
        return self.expr.evaluate(omega)

    def support_intervals(self) -> list[np.ndarray]:
        return [merge_intervals(iv) for iv in self.expr.support()]

    def to_dict(self) -> dict:
        return {"label": self.label, "expr": self.expr.to_dict(), "tail_bound": repr(float(self.tail_bound))}

    @classmethod
    def from_dict(cls, d: dict) -> "FourierGenerator":
        tb = d.get("tail_bound")
        return cls(node_from_dict(d["expr"]), d.get("label", ""), None if tb is None else float(tb))


def eval_generator(gen: FourierGenerator, omega) -> np.ndarray:
    """Evaluate at one point (a d-vector) or a batch ``(N, d)``; returns complex."""
    omega = np.asarray(omega, dtype=float)
    single = omega.ndim == 0 or (omega.ndim == 1 and gen.dim > 1)
    if omega.ndim == 0:
        omega = omega.reshape(1, 1)
    elif omega.ndim == 1:
        omega = omega.reshape(1, -1) if gen.dim > 1 else omega.reshape(-1, 1)
    if omega.shape[1] != gen.dim:
        raise DimensionMismatch(f"generator has dimension {gen.dim}, point has {omega.shape[1]}")
    out = np.asarray(gen.expr.evaluate(omega), dtype=complex)
    return out[0] if single else out


def support_intervals(gen: FourierGenerator) -> list[np.ndarray]:
    return gen.support_intervals()


@dataclass(frozen=True)
class GeneratorSet:
    gens: tuple
    lattice: Group = field(default_factory=lambda: Lattice.integer(1))

    def __post_init__(self):
        object.__setattr__(self, "gens", tuple(self.gens))
        if not self.gens:
            raise ValueError("a generator set needs at least one generator")
        dims = {g.dim for g in self.gens}
        if len(dims) != 1:
            raise DimensionMismatch("all generators must share a dimension")
        if not isinstance(self.lattice, Lattice):
            raise ValueError("the base group must be a lattice")
        if self.lattice.dim != self.dim:
            raise DimensionMismatch("lattice and generators have different dimensions")

    @property
    def dim(self) -> int:
        return self.gens[0].dim

    @property
    def r(self) -> int:
        return len(self.gens)

    def __len__(self):
        return len(self.gens)

    def __iter__(self):
        return iter(self.gens)

    @property
    def continuous(self) -> bool:
        """True when every truncated model is a continuous function."""
        return all(g.expr.continuous for g in self.gens)

    def scaled(self, c: complex) -> "GeneratorSet":
        from .expr import Scale
        return GeneratorSet(tuple(FourierGenerator(Scale(g.expr, c), g.label, abs(c) * g.tail_bound)
                                  for g in self.gens), self.lattice)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "lattice": format_group(self.lattice),
                "generators": [g.to_dict() for g in self.gens]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSet":
        try:
            gens = tuple(FourierGenerator.from_dict(g) for g in d["generators"])
        except KeyError as exc:
            raise ConfigError("generators", f"missing field {exc}") from None
        except (ValueError, TypeError) as exc:
            raise ConfigError("generators", str(exc)) from None
        lat = parse_group(d.get("lattice", "Z"))
        if "dim" in d and int(d["dim"]) != gens[0].dim:
            raise ConfigError("dim", f"declared {d['dim']} but generators have dimension {gens[0].dim}")
        return cls(gens, lat)

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSet":
        return cls.from_dict(json.loads(text))
