"""m-adic cubes, exact net content of digital sets, and Frostman measures.

A digital set is a finite union of depth-``k`` m-adic cubes in ``[0, 1)**n``.
All costs ``side**s = m**(-j s)`` for rational ``s`` live in one radical
field (see :mod:`bourgain.exact`), so every quantity here is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Iterable, Iterator

from .errors import EmptySetError, InputError, ResolutionError
from .exact import RadicalField, RadicalNumber, field_for_power

Coords = tuple[int, ...]


@dataclass(frozen=True)
class MadicCube:
    """Half-open cube ``prod [c_i m**-k, (c_i + 1) m**-k)``."""

    m: int
    depth: int
    coords: Coords

    def __post_init__(self) -> None:
        if self.m < 2 or self.depth < 0:
            raise InputError("input: need m >= 2 and depth >= 0")
        top = self.m**self.depth
        if any(not 0 <= c < top for c in self.coords):
            raise InputError(f"input: coords {self.coords} outside [0, {top}) at depth {self.depth}")

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def side(self) -> Fraction:
        return Fraction(1, self.m**self.depth)

    @property
    def volume(self) -> Fraction:
        return self.side**self.n

    def diameter_squared(self) -> Fraction:
        return self.n * self.side**2

    def parent(self) -> MadicCube:
        if self.depth == 0:
            raise ValueError("the unit cube has no parent")
        return MadicCube(self.m, self.depth - 1, tuple(c // self.m for c in self.coords))

    def children(self) -> list[MadicCube]:
        base = [c * self.m for c in self.coords]
        return [
            MadicCube(self.m, self.depth + 1, tuple(b + o for b, o in zip(base, off)))
            for off in product(range(self.m), repeat=self.n)
        ]

    def ancestor(self, depth: int) -> MadicCube:
        if not 0 <= depth <= self.depth:
            raise ValueError("ancestor depth out of range")
        f = self.m ** (self.depth - depth)
        return MadicCube(self.m, depth, tuple(c // f for c in self.coords))

    def contains(self, other: MadicCube) -> bool:
        return other.m == self.m and other.depth >= self.depth and other.ancestor(self.depth) == self


def _check_coords(raw, n: int, top: int, where: str) -> Coords:
    if not isinstance(raw, list) or len(raw) != n:
        raise InputError(f"input: {where} must be a list of {n} integers")
    for c in raw:
        if not isinstance(c, int) or isinstance(c, bool):
            raise InputError(f"input: {where} has non-integer coordinate {c!r}")
        if not 0 <= c < top:
            raise InputError(f"input: {where} coordinate {c} outside [0, {top})")
    return tuple(raw)


def _int_field(obj: dict, name: str, low: int) -> int:
    if name not in obj:
        raise InputError(f"input: missing field {name!r}")
    v = obj[name]
    if not isinstance(v, int) or isinstance(v, bool) or v < low:
        raise InputError(f"input: field {name!r} must be an integer >= {low}, got {v!r}")
    return v


def _parse_json(text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"input: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise InputError("input: top level must be a JSON object")
    return obj


@dataclass(frozen=True)
class DigitalSet:
    """Union of the depth-``depth`` cubes listed in ``cubes``."""

    n: int
    m: int
    depth: int
    cubes: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 2 or self.depth < 0:
            raise InputError("input: need n >= 1, m >= 2, depth >= 0")
        cubes = frozenset(tuple(c) for c in self.cubes)
        top = self.m**self.depth
        for c in cubes:
            if len(c) != self.n or any(not 0 <= x < top for x in c):
                raise InputError(f"input: cube {c} invalid for n={self.n}, depth={self.depth}")
        object.__setattr__(self, "cubes", cubes)

    def __len__(self) -> int:
        return len(self.cubes)

    def __iter__(self) -> Iterator[Coords]:
        return iter(sorted(self.cubes))

    def union(self, other: DigitalSet) -> DigitalSet:
        if (self.n, self.m, self.depth) != (other.n, other.m, other.depth):
            raise InputError("input: digital sets on different grids")
        return DigitalSet(self.n, self.m, self.depth, self.cubes | other.cubes)

    def refine(self, depth: int) -> DigitalSet:
        """The same set described at a finer depth."""
        if depth < self.depth:
            raise ValueError("cannot coarsen")
        f = self.m ** (depth - self.depth)
        out = set()
        for c in self.cubes:
            for off in product(range(f), repeat=self.n):
                out.add(tuple(x * f + o for x, o in zip(c, off)))
        return DigitalSet(self.n, self.m, depth, frozenset(out))

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "depth": self.depth, "cubes": [list(c) for c in self]}

    @classmethod
    def from_json(cls, obj: dict) -> DigitalSet:
        n = _int_field(obj, "n", 1)
        m = _int_field(obj, "m", 2)
        depth = _int_field(obj, "depth", 0)
        if "cubes" not in obj:
            raise InputError("input: missing field 'cubes'")
        if not isinstance(obj["cubes"], list):
            raise InputError("input: field 'cubes' must be a list")
        top = m**depth
        cubes = [_check_coords(c, n, top, f"cubes[{i}]") for i, c in enumerate(obj["cubes"])]
        return cls(n, m, depth, frozenset(cubes))

    @classmethod
    def loads(cls, text: str) -> DigitalSet:
        return cls.from_json(_parse_json(text))

    @classmethod
    def load(cls, path: str | Path) -> DigitalSet:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"input: cannot read {path}: {exc.strerror}") from exc
        return cls.loads(text)


def parse_exponent(text: str | int | Fraction) -> Fraction:
    """Exact rational ``s`` from ``"p/q"``, a decimal string, or a number."""
    if isinstance(text, float):
        raise InputError("input: pass s as a string or Fraction, not a float")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"input: invalid exponent {text!r}") from exc


class _Costs:
    """``side(depth)**s`` as radical-field elements, cached per depth."""

    def __init__(self, m: int, s: Fraction):
        self.field, self.step = field_for_power(m, s)
        self._cache: dict[int, RadicalNumber] = {}

    def __call__(self, depth: int) -> RadicalNumber:
        v = self._cache.get(depth)
        if v is None:
            v = self._cache[depth] = self.field.theta_power(-depth * self.step)
        return v


def side_power(m: int, depth: int, s) -> RadicalNumber:
    """Exact ``(m**-depth)**s``."""
    return _Costs(m, parse_exponent(s))(depth)


def _validate_s(n: int, s: Fraction) -> None:
    if not 0 < s <= n:
        raise InputError(f"input: s must satisfy 0 < s <= n={n}, got {s}")


def _levels(cubes: Iterable[Coords], m: int, depth: int) -> list[dict[Coords, list[Coords]]]:
    """``levels[j]`` maps each occupied depth-``j`` cube to its occupied children."""
    levels: list[dict[Coords, list[Coords]]] = [dict() for _ in range(depth + 1)]
    current = set(cubes)
    levels[depth] = {c: [] for c in current}
    for j in range(depth - 1, -1, -1):
        nxt: dict[Coords, list[Coords]] = {}
        for c in current:
            nxt.setdefault(tuple(x // m for x in c), []).append(c)
        levels[j] = nxt
        current = set(nxt)
    return levels


def net_content(E: DigitalSet, s, delta_depth: int = 0) -> RadicalNumber:
    """``M^s_delta(E)`` with ``delta = m**-delta_depth`` by dynamic programming on the cube tree.

    A cube of depth ``j >= delta_depth`` may cover its part of ``E`` at cost
    ``m**(-j s)``; otherwise its occupied children are covered separately.
    Depth-``k`` cubes of ``E`` always cover themselves.  Returns zero for an
    empty set.
    """
    s = parse_exponent(s)
    _validate_s(E.n, s)
    if delta_depth > E.depth:
        raise ResolutionError(f"resolution: delta_depth={delta_depth} exceeds set depth {E.depth}")
    cost = _Costs(E.m, s)
    if not E.cubes:
        return cost.field.zero()
    levels = _levels(E.cubes, E.m, E.depth)
    best = {c: cost(E.depth) for c in levels[E.depth]}
    for j in range(E.depth - 1, -1, -1):
        own = cost(j)
        nxt = {}
        for c, kids in levels[j].items():
            split = sum((best[k] for k in kids), cost.field.zero())
            nxt[c] = own if j >= delta_depth and own < split else split
        best = nxt
    (total,) = best.values()
    return total


@dataclass
class MassFunction:
    """Masses of the depth-``k`` cubes of ``base``; uniform inside each cube."""

    base: DigitalSet
    s: Fraction
    mass: dict[Coords, RadicalNumber]
    outside_hypothesis: bool = False

    @property
    def field(self) -> RadicalField:
        return _Costs(self.base.m, self.s).field

    def total(self) -> RadicalNumber:
        return sum(self.mass.values(), self.field.zero())

    def cube_masses(self) -> list[dict[Coords, RadicalNumber]]:
        """``out[j]`` maps each occupied depth-``j`` cube to its mass."""
        k, m = self.base.depth, self.base.m
        out: list[dict[Coords, RadicalNumber]] = [dict() for _ in range(k + 1)]
        out[k] = dict(self.mass)
        for j in range(k - 1, -1, -1):
            layer: dict[Coords, RadicalNumber] = {}
            for c, v in out[j + 1].items():
                p = tuple(x // m for x in c)
                layer[p] = layer[p] + v if p in layer else v
            out[j] = layer
        return out

    def to_json(self) -> dict:
        out = self.base.to_json()
        f = self.field
        out["s"] = str(self.s)
        out["field"] = {"base": f.base, "degree": f.degree}
        out["mass"] = [list(c) + [self.mass[c].to_json()] for c in sorted(self.mass)]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> MassFunction:
        base = DigitalSet.from_json(obj)
        if "s" not in obj:
            raise InputError("input: missing field 's'")
        s = parse_exponent(obj["s"]) if isinstance(obj["s"], str) else None
        if s is None:
            raise InputError("input: field 's' must be a string rational")
        f = _Costs(base.m, s).field
        if "mass" not in obj or not isinstance(obj["mass"], list):
            raise InputError("input: field 'mass' must be a list")
        top = base.m**base.depth
        mass = {}
        for i, entry in enumerate(obj["mass"]):
            if not isinstance(entry, list) or len(entry) != base.n + 1:
                raise InputError(f"input: mass[{i}] must be {base.n} coordinates then a value")
            c = _check_coords(entry[:-1], base.n, top, f"mass[{i}]")
            try:
                v = RadicalNumber.from_json(f, entry[-1])
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                raise InputError(f"input: mass[{i}] has invalid value {entry[-1]!r}") from exc
            mass[c] = v
        return cls(base, s, mass, s <= base.n - 1)


def frostman(K: DigitalSet, s) -> MassFunction:
    """Measure on ``K`` with ``mu(Q) <= side(Q)**s`` for every m-adic ``Q``.

    Every occupied depth-``k`` cube starts at ``side**s``; then, level by
    level upward, all mass under a cube ``Q`` heavier than ``side(Q)**s``
    is scaled by ``side(Q)**s / mu(Q)``.  The total is at least
    ``net_content(K, s, 0)`` because the cubes left saturated form a cover.
    ``outside_hypothesis`` is set when ``s <= n - 1``.
    """
    s = parse_exponent(s)
    _validate_s(K.n, s)
    if not K.cubes:
        raise EmptySetError("empty: Frostman measure needs a nonempty set")
    cost = _Costs(K.m, s)
    levels = _levels(K.cubes, K.m, K.depth)
    # factor[j][c]: scaling applied at cube c of depth j; mass[j][c] after scaling
    leaf = cost(K.depth)
    mass = {c: leaf for c in levels[K.depth]}
    factors: list[dict[Coords, RadicalNumber]] = [dict() for _ in range(K.depth + 1)]
    for j in range(K.depth - 1, -1, -1):
        cap = cost(j)
        nxt = {}
        for c, kids in levels[j].items():
            total = sum((mass[k] for k in kids), cost.field.zero())
            if cap < total:
                factors[j][c] = cap / total
                total = cap
            nxt[c] = total
        mass = nxt
    out = {}
    for c in levels[K.depth]:
        v = leaf
        for j in range(K.depth - 1, -1, -1):
            a = tuple(x // K.m ** (K.depth - j) for x in c)
            f = factors[j].get(a)
            if f is not None:
                v = v * f
        out[c] = v
    return MassFunction(K, s, out, s <= K.n - 1)


@dataclass
class FrostmanReport:
    ok: bool
    total: RadicalNumber
    content: RadicalNumber
    violations: list[tuple[int, Coords, RadicalNumber, RadicalNumber]]
    tight: list[tuple[int, Coords]]
    negative: list[Coords]
    outside_support: list[Coords]

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "total": self.total.to_json(),
            "total_float": float(self.total),
            "content": self.content.to_json(),
            "content_float": float(self.content),
            "total_ge_content": not self.total < self.content,
            "violations": [
                {"depth": j, "coords": list(c), "mass": v.to_json(), "cap": cap.to_json()}
                for j, c, v, cap in self.violations
            ],
            "tight": [{"depth": j, "coords": list(c)} for j, c in self.tight],
            "negative": [list(c) for c in self.negative],
            "outside_support": [list(c) for c in self.outside_support],
        }


def verify_frostman(mu: MassFunction, s=None) -> FrostmanReport:
    """Check every cube constraint and ``mu(K) >= M^s_inf(K)`` exactly.

    Also lists the saturated cubes, where ``mu(Q) == side(Q)**s``.
    """
    s = mu.s if s is None else parse_exponent(s)
    K = mu.base
    cost = _Costs(K.m, s)
    if cost.field != mu.field:
        raise InputError("input: exponent does not match the mass function")
    negative = sorted(c for c, v in mu.mass.items() if v.sign() < 0)
    outside = sorted(c for c in mu.mass if c not in K.cubes)
    violations, tight = [], []
    for j, layer in enumerate(mu.cube_masses()):
        cap = cost(j)
        for c in sorted(layer):
            v = layer[c]
            if cap < v:
                violations.append((j, c, v, cap))
            elif v == cap:
                tight.append((j, c))
    total = mu.total()
    content = net_content(K, s, 0) if K.cubes else cost.field.zero()
    ok = not violations and not negative and not outside and not total < content
    return FrostmanReport(ok, total, content, violations, tight, negative, outside)
