"""Index bookkeeping: increasing tuples, (0,q)-form coefficients and derivative multiindices."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

import numpy as np


def increasing_tuples(d: int, q: int) -> list[tuple[int, ...]]:
    """All strictly increasing q-tuples in ``1..d`` (``[()]`` when q = 0)."""
    if q < 0 or q > d:
        raise ValueError(f"form degree q={q} outside 0..{d}")
    return [tuple(i + 1 for i in c) for c in combinations(range(d), q)]


def check_tuple(K, d: int) -> tuple[int, ...]:
    K = tuple(int(k) for k in K)
    if any(b <= a for a, b in zip(K, K[1:])):
        raise ValueError(f"{K} is not strictly increasing")
    if any(k < 1 or k > d for k in K):
        raise ValueError(f"index out of range in {K} (allowed 1..{d})")
    return K


@dataclass
class FormCoefficients:
    """Coefficients of a (0,q)-form in the ``dz̄^J`` basis."""

    q: int
    entries: dict[tuple[int, ...], complex] = field(default_factory=dict)

    def __post_init__(self):
        for J in self.entries:
            if len(J) != self.q or any(b <= a for a, b in zip(J, J[1:])):
                raise ValueError(f"bad key {J} for a (0,{self.q})-form")

    def __getitem__(self, J) -> complex:
        return self.entries[tuple(J)]

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def vector(self) -> np.ndarray:
        return np.array([self.entries[J] for J in sorted(self.entries)], dtype=complex)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector()))

    def scaled(self, c: complex) -> FormCoefficients:
        return FormCoefficients(self.q, {J: c * v for J, v in self.entries.items()})


@dataclass(frozen=True)
class MultiIndex:
    """Derivative request: orders in ``z_k``/``z̄_k`` and in ``t_l``.

    ``dz[k]`` and ``dzb[k]`` count derivatives in ``z_{k+1}`` and ``z̄_{k+1}``;
    the pair corresponds to the length-2·dim_z vector ``I1``.
    """

    dz: tuple[int, ...]
    dzb: tuple[int, ...]
    dt: tuple[int, ...]

    def __post_init__(self):
        if len(self.dz) != len(self.dzb):
            raise ValueError("dz and dzb must have the same length")
        if min(self.dz + self.dzb + self.dt, default=0) < 0:
            raise ValueError("derivative orders must be nonnegative")

    @classmethod
    def zero(cls, dim_z: int, codim: int) -> MultiIndex:
        return cls((0,) * dim_z, (0,) * dim_z, (0,) * codim)

    @classmethod
    def parse(cls, text: str, dim_z: int, codim: int) -> MultiIndex:
        """Parse the named-axis syntax ``z1:2,zb1:1,t2:1`` (``0`` or empty means no derivative)."""
        dz, dzb, dt = [0] * dim_z, [0] * dim_z, [0] * codim
        text = (text or "").strip()
        if text in ("", "0"):
            return cls(tuple(dz), tuple(dzb), tuple(dt))
        for item in text.split(","):
            m = re.fullmatch(r"\s*(zb|z|t)(\d+)(?::(\d+))?\s*", item)
            if not m:
                raise ValueError(f"cannot parse derivative spec {item!r}")
            axis, idx, order = m.group(1), int(m.group(2)), int(m.group(3) or 1)
            target = {"z": dz, "zb": dzb, "t": dt}[axis]
            if not 1 <= idx <= len(target):
                raise ValueError(f"axis {axis}{idx} out of range")
            target[idx - 1] += order
        return cls(tuple(dz), tuple(dzb), tuple(dt))

    @property
    def I1(self) -> tuple[int, ...]:
        return self.dz + self.dzb

    @property
    def I2(self) -> tuple[int, ...]:
        return self.dt

    @property
    def weighted_order(self) -> int:
        return sum(self.I1) + 2 * sum(self.I2)

    @property
    def order(self) -> int:
        return sum(self.I1) + sum(self.I2)

    def slots(self) -> list[tuple[str, int]]:
        """The derivative as an ordered list of ``(axis, 0-based index)`` slots."""
        out = []
        for axis, orders in (("z", self.dz), ("zb", self.dzb), ("t", self.dt)):
            for k, o in enumerate(orders):
                out.extend([(axis, k)] * o)
        return out

    def describe(self) -> str:
        parts = [f"{axis}{k + 1}:{o}" for axis, orders in (("z", self.dz), ("zb", self.dzb), ("t", self.dt))
                 for k, o in enumerate(orders) if o]
        return ",".join(parts) or "0"
