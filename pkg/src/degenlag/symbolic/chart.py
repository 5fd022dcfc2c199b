"""Coordinate charts: ordered, named, role-tagged coordinate systems.

A chart fixes the ambient space every other object lives on. Expressions
refer to coordinates by name only; the chart is what ties a name to a slot
index and to a geometric role (position, velocity, momentum, parameter).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class Role(Enum):
    POSITION = "position"
    VELOCITY = "velocity"
    MOMENTUM = "momentum"
    PARAMETER = "parameter"


@dataclass(frozen=True)
class Chart:
    """An ordered tuple of named coordinates with one role per coordinate."""

    names: tuple[str, ...]
    roles: tuple[Role, ...]

    def __post_init__(self):
        if len(self.names) != len(self.roles):
            raise ValueError("names and roles must have equal length")
        seen = set()
        for name in self.names:
            if not _NAME_RE.match(name):
                raise ValueError(f"invalid coordinate name {name!r}")
            if name in seen:
                raise ValueError(f"duplicate coordinate name {name!r}")
            seen.add(name)

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        return self.names.index(name)

    def role_of(self, name: str) -> Role:
        return self.roles[self.index(name)]

    def of_role(self, role: Role) -> tuple[str, ...]:
        return tuple(n for n, r in zip(self.names, self.roles) if r is role)

    @property
    def positions(self) -> tuple[str, ...]:
        return self.of_role(Role.POSITION)

    @property
    def velocities(self) -> tuple[str, ...]:
        return self.of_role(Role.VELOCITY)

    @property
    def momenta(self) -> tuple[str, ...]:
        return self.of_role(Role.MOMENTUM)

    def indices_of(self, names) -> tuple[int, ...]:
        return tuple(self.index(n) for n in names)

    # ------------------------------------------------------------------
    # standard bundle charts over an n-dimensional configuration space

    @staticmethod
    def base(n: int) -> "Chart":
        """Configuration space chart (q1 .. qn)."""
        return Chart(_names("q", n), (Role.POSITION,) * n)

    @staticmethod
    def tangent(n: int) -> "Chart":
        """Velocity phase space chart (q1 .. qn, v1 .. vn)."""
        return Chart(
            _names("q", n) + _names("v", n),
            (Role.POSITION,) * n + (Role.VELOCITY,) * n,
        )

    @staticmethod
    def cotangent(n: int) -> "Chart":
        """Momentum phase space chart (q1 .. qn, p1 .. pn)."""
        return Chart(
            _names("q", n) + _names("p", n),
            (Role.POSITION,) * n + (Role.MOMENTUM,) * n,
        )

    @staticmethod
    def velocity_momentum(n: int) -> "Chart":
        """Combined bundle chart (q1 .. qn, v1 .. vn, p1 .. pn).

        This is the ambient chart for the unified velocity-momentum
        formalism: positions, independent velocities, and momenta.
        """
        return Chart(
            _names("q", n) + _names("v", n) + _names("p", n),
            (Role.POSITION,) * n + (Role.VELOCITY,) * n + (Role.MOMENTUM,) * n,
        )


def _names(prefix: str, n: int) -> tuple[str, ...]:
    if n < 1:
        raise ValueError("dimension must be at least 1")
    return tuple(f"{prefix}{i}" for i in range(1, n + 1))
