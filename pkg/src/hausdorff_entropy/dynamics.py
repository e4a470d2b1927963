"""Maps, generating families and the orbit sets they produce.

Maps act on ``(k, dim)`` arrays of canonical points and return canonical
points.  A :class:`Family` is the ordered generating set; words over it
are tuples of 0-based member indices listed in application order, so the
word ``(j1, ..., jn)`` stands for ``f_jn o ... o f_j1``.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .exceptions import ContractViolation, SizeLimitError
from .geometry import CIRCLE, INTERVAL, SpaceSpec, canonical_circle, grid, rowwise_distance
from .pointset import DEFAULT_DEDUP_TOL, FiniteSet, coalesce, singleton

DEFAULT_SET_CAP = 2_000_000
DEFAULT_WORD_CAP = 2_000_000

GOLDEN_ALPHA = (math.sqrt(5.0) - 1.0) / 2.0


class MapSpec:
    """Base class for continuous self-maps of a product space."""

    #: number of coordinates consumed, ``None`` for "any"
    arity: int | None = 1
    #: factor kind the map requires, ``None`` for "any"
    factor: str | None = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def lipschitz(self) -> float:
        raise NotImplementedError

    def inverse(self) -> "MapSpec":
        raise ContractViolation(f"{self!r} is not invertible")

    def to_config(self) -> dict:
        raise NotImplementedError

    def check_space(self, space: SpaceSpec) -> None:
        if self.arity is not None and self.arity != space.dim:
            raise ContractViolation(f"{self!r} acts on {self.arity} coordinates, space has {space.dim}")
        if self.factor is not None and any(tag != self.factor for tag in space.factors):
            raise ContractViolation(f"{self!r} needs a {self.factor} factor, got {space.factors}")


@dataclass(frozen=True)
class PiecewiseLinear(MapSpec):
    """Continuous piecewise-linear self-map of [0, 1] through ``(x[i], y[i])``."""

    x: tuple[float, ...]
    y: tuple[float, ...]
    factor = INTERVAL

    def __post_init__(self):
        xs = tuple(float(v) for v in self.x)
        ys = tuple(float(v) for v in self.y)
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "y", ys)
        if len(xs) != len(ys) or len(xs) < 2:
            raise ContractViolation("breakpoints and values must have equal length >= 2")
        if xs[0] != 0.0 or xs[-1] != 1.0 or any(b <= a for a, b in zip(xs, xs[1:])):
            raise ContractViolation("breakpoints must increase strictly from 0 to 1")
        if min(ys) < 0.0 or max(ys) > 1.0:
            raise ContractViolation("values of a self-map of [0, 1] must lie in [0, 1]")

    @classmethod
    def from_branches(cls, breaks: Sequence[float], branches: Sequence[tuple[float, float]],
                      tol: float = 1e-12) -> "PiecewiseLinear":
        """Build from affine branches ``slope * x + intercept`` on consecutive pieces.

        Adjacent branches must agree at their shared breakpoint.  Pass
        ``Fraction`` inputs to get correctly rounded breakpoint values.
        """
        if len(branches) != len(breaks) - 1:
            raise ContractViolation("need exactly one branch per piece")
        for k in range(1, len(breaks) - 1):
            (s0, c0), (s1, c1) = branches[k - 1], branches[k]
            left, right = s0 * breaks[k] + c0, s1 * breaks[k] + c1
            if abs(left - right) > tol:
                raise ContractViolation(f"branches disagree at x={breaks[k]}: {left} vs {right}")
        ys = [s * b + c for (s, c), b in zip(branches, breaks[:-1])]
        s, c = branches[-1]
        ys.append(s * breaks[-1] + c)
        return cls(tuple(float(b) for b in breaks), tuple(float(y) for y in ys))

    def __call__(self, x):
        return np.interp(x, self.x, self.y)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.y) / np.diff(self.x)

    @property
    def lipschitz(self) -> float:
        return float(np.max(np.abs(self.slopes)))

    @property
    def is_increasing(self) -> bool:
        return bool(np.all(np.diff(self.y) > 0))

    @property
    def is_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.y) < 0))

    @property
    def is_homeomorphism(self) -> bool:
        return (self.is_increasing and self.y[0] == 0.0 and self.y[-1] == 1.0) or (
            self.is_decreasing and self.y[0] == 1.0 and self.y[-1] == 0.0)

    def inverse(self) -> "PiecewiseLinear":
        if not self.is_homeomorphism:
            raise ContractViolation(f"{self!r} is not a homeomorphism of [0, 1]")
        if self.is_increasing:
            return PiecewiseLinear(self.y, self.x)
        return PiecewiseLinear(self.y[::-1], self.x[::-1])

    def preimage(self, a: float, b: float) -> tuple[float, float] | None:
        """Preimage of [a, b] under a strictly monotone map, or ``None`` if empty."""
        lo, hi = max(a, min(self.y)), min(b, max(self.y))
        if lo > hi:
            return None
        if self.is_increasing:
            return (float(np.interp(lo, self.y, self.x)), float(np.interp(hi, self.y, self.x)))
        if self.is_decreasing:
            ys, xs = self.y[::-1], self.x[::-1]
            return (float(np.interp(hi, ys, xs)), float(np.interp(lo, ys, xs)))
        raise ContractViolation(f"{self!r} is not strictly monotone")

    def image_interval(self, a: float, b: float) -> tuple[float, float]:
        """``f([a, b])``: extremes over the endpoints and interior breakpoints."""
        xs = np.array(self.x)
        probe = np.concatenate(([a, b], xs[(xs > a) & (xs < b)]))
        vals = np.interp(probe, self.x, self.y)
        return float(vals.min()), float(vals.max())

    def to_config(self):
        return {"type": "pwl", "x": list(self.x), "y": list(self.y)}


@dataclass(frozen=True)
class Rotation(MapSpec):
    alpha: float
    factor = CIRCLE

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(canonical_circle(self.alpha)))

    def __call__(self, x):
        return canonical_circle(x + self.alpha)

    @property
    def lipschitz(self):
        return 1.0

    def inverse(self):
        return Rotation(-self.alpha)

    def to_config(self):
        return {"type": "rotation", "alpha": self.alpha}


@dataclass(frozen=True)
class AffineMod1(MapSpec):
    """``x -> a x + c (mod 1)`` on the circle, ``a`` an integer."""

    a: int
    c: float = 0.0
    factor = CIRCLE

    def __post_init__(self):
        if int(self.a) != self.a:
            raise ContractViolation("AffineMod1 slope must be an integer")
        object.__setattr__(self, "a", int(self.a))

    def __call__(self, x):
        return canonical_circle(self.a * x + self.c)

    @property
    def lipschitz(self):
        return float(abs(self.a))

    def inverse(self):
        if self.a == 1:
            return AffineMod1(1, -self.c)
        if self.a == -1:
            return self
        raise ContractViolation(f"{self!r} is not invertible (|a| != 1)")

    def to_config(self):
        return {"type": "affine_mod1", "a": self.a, "c": self.c}


@dataclass(frozen=True)
class Monomial(MapSpec):
    """``x -> x ** exponent`` on [0, 1]; the Lipschitz bound is infinite below exponent 1."""

    exponent: float
    factor = INTERVAL

    def __post_init__(self):
        if self.exponent <= 0:
            raise ContractViolation("exponent must be positive")

    def __call__(self, x):
        return np.power(x, self.exponent)

    @property
    def lipschitz(self):
        return float(self.exponent) if self.exponent >= 1 else math.inf

    def inverse(self):
        return Monomial(1.0 / self.exponent)

    def to_config(self):
        return {"type": "monomial", "exponent": self.exponent}


@dataclass(frozen=True)
class Identity(MapSpec):
    arity = None

    def __call__(self, x):
        return np.array(x, dtype=float)

    @property
    def lipschitz(self):
        return 1.0

    def inverse(self):
        return self

    def to_config(self):
        return {"type": "identity"}


@dataclass(frozen=True)
class ProductMap(MapSpec):
    """Acts blockwise: ``parts[k]`` on the next ``widths[k]`` coordinates."""

    parts: tuple[MapSpec, ...]
    widths: tuple[int, ...] = ()
    factor = None

    def __post_init__(self):
        parts = tuple(self.parts)
        widths = tuple(self.widths) or tuple(p.arity or 1 for p in parts)
        if len(widths) != len(parts) or not parts:
            raise ContractViolation("a product map needs one width per part")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "widths", widths)

    @property
    def arity(self):
        return sum(self.widths)

    def _blocks(self):
        edges = np.cumsum((0,) + self.widths)
        return [slice(int(lo), int(hi)) for lo, hi in zip(edges, edges[1:])]

    def check_space(self, space):
        if space.dim != self.arity:
            raise ContractViolation(f"{self!r} acts on {self.arity} coordinates, space has {space.dim}")
        for part, block in zip(self.parts, self._blocks()):
            part.check_space(SpaceSpec(space.factors[block]))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for part, block in zip(self.parts, self._blocks()):
            out[..., block] = part(x[..., block])
        return out

    @property
    def lipschitz(self):
        return max(p.lipschitz for p in self.parts)

    def inverse(self):
        return ProductMap(tuple(p.inverse() for p in self.parts), self.widths)

    def to_config(self):
        return {"type": "product", "factors": [p.to_config() for p in self.parts],
                "widths": list(self.widths)}


@dataclass(frozen=True)
class Composition(MapSpec):
    """``steps`` applied first to last, evaluated one step at a time."""

    steps: tuple[MapSpec, ...]
    factor = None

    def __post_init__(self):
        if not self.steps:
            raise ContractViolation("empty composition; use Identity")
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def arity(self):
        known = [s.arity for s in self.steps if s.arity is not None]
        return known[0] if known else None

    def check_space(self, space):
        for s in self.steps:
            s.check_space(space)

    def __call__(self, x):
        for s in self.steps:
            x = s(x)
        return x

    @property
    def lipschitz(self):
        return math.prod(s.lipschitz for s in self.steps)

    def inverse(self):
        return Composition(tuple(s.inverse() for s in reversed(self.steps)))

    def to_config(self):
        return {"type": "composition", "steps": [s.to_config() for s in self.steps]}


@dataclass(frozen=True)
class Conjugated(MapSpec):
    """``T o inner o T_inv``."""

    inner: MapSpec
    T: MapSpec
    T_inv: MapSpec
    factor = None

    @property
    def arity(self):
        return self.inner.arity if self.inner.arity is not None else self.T.arity

    def check_space(self, space):
        for m in (self.inner, self.T, self.T_inv):
            m.check_space(space)

    def __call__(self, x):
        return self.T(self.inner(self.T_inv(x)))

    @property
    def lipschitz(self):
        return self.T.lipschitz * self.inner.lipschitz * self.T_inv.lipschitz

    def inverse(self):
        return Conjugated(self.inner.inverse(), self.T, self.T_inv)

    def to_config(self):
        return {"type": "conjugated", "inner": self.inner.to_config(),
                "T": self.T.to_config(), "T_inv": self.T_inv.to_config()}


def map_from_config(cfg: dict) -> MapSpec:
    """Build a MapSpec from its JSON form."""
    kind = cfg.get("type")
    if kind == "pwl":
        return PiecewiseLinear(tuple(cfg["x"]), tuple(cfg["y"]))
    if kind == "rotation":
        return Rotation(float(cfg["alpha"]))
    if kind == "affine_mod1":
        return AffineMod1(int(cfg["a"]), float(cfg.get("c", 0.0)))
    if kind == "identity":
        return Identity()
    if kind == "monomial":
        return Monomial(float(cfg["exponent"]))
    if kind == "product":
        parts = tuple(map_from_config(f) for f in cfg["factors"])
        return ProductMap(parts, tuple(cfg.get("widths", ())))
    if kind == "composition":
        return Composition(tuple(map_from_config(s) for s in cfg["steps"]))
    if kind == "conjugated":
        return Conjugated(map_from_config(cfg["inner"]), map_from_config(cfg["T"]),
                          map_from_config(cfg["T_inv"]))
    raise ContractViolation(f"unknown map type {kind!r}")


@dataclass(frozen=True)
class Family:
    """Ordered generating set of a semigroup acting on ``space``."""

    space: SpaceSpec
    maps: tuple[MapSpec, ...]
    name: str = ""

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ContractViolation("a family needs at least one map")
        for m in maps:
            m.check_space(self.space)
        object.__setattr__(self, "maps", maps)

    @property
    def p(self) -> int:
        return len(self.maps)

    @property
    def lipschitz(self) -> float:
        return max(m.lipschitz for m in self.maps)

    def singletons(self) -> list["Family"]:
        return [Family(self.space, (m,), f"{self.name}[{j}]") for j, m in enumerate(self.maps)]

    def to_config(self) -> dict:
        return {"name": self.name, "space": list(self.space.factors),
                "maps": [m.to_config() for m in self.maps]}


def family_from_config(cfg: dict) -> Family:
    space = SpaceSpec(tuple(cfg["space"]))
    return Family(space, tuple(map_from_config(m) for m in cfg["maps"]), cfg.get("name", ""))


# ---------------------------------------------------------------------------
# built-in families


def example41_maps() -> tuple[PiecewiseLinear, PiecewiseLinear]:
    """The two zero-entropy interval homeomorphisms with positive joint entropy."""
    Q = Fraction
    f1 = PiecewiseLinear.from_branches(
        (Q(0), Q(1, 3), Q(4, 9), Q(1)),
        ((Q(1), Q(0)), (Q(3), Q(-2, 3)), (Q(3, 5), Q(2, 5))),
    )
    f2 = PiecewiseLinear.from_branches(
        (Q(0), Q(5, 9), Q(2, 3), Q(1)),
        ((Q(3, 5), Q(0)), (Q(3), Q(-4, 3)), (Q(1), Q(0))),
    )
    for f in (f1, f2):
        if not f.is_homeomorphism or not f.is_increasing:
            raise AssertionError("example maps must be increasing homeomorphisms")
    return f1, f2


def example41() -> Family:
    return Family(SpaceSpec.of(INTERVAL), example41_maps(), "example41")


def rotation_id(alpha: float = GOLDEN_ALPHA) -> Family:
    return Family(SpaceSpec.of(CIRCLE), (Rotation(alpha), Identity()), "rotation_id")


def rotation(alpha: float = GOLDEN_ALPHA) -> Family:
    return Family(SpaceSpec.of(CIRCLE), (Rotation(alpha),), "rotation")


def doubling() -> Family:
    return Family(SpaceSpec.of(CIRCLE), (AffineMod1(2, 0.0),), "doubling")


def tent() -> Family:
    return Family(SpaceSpec.of(INTERVAL), (PiecewiseLinear((0.0, 0.5, 1.0), (0.0, 1.0, 0.0)),), "tent")


def identity_family(space: SpaceSpec | None = None) -> Family:
    return Family(space or SpaceSpec.of(INTERVAL), (Identity(),), "identity")


BUILTIN_FAMILIES = {
    "example41": example41,
    "rotation_id": rotation_id,
    "rotation": rotation,
    "doubling": doubling,
    "tent": tent,
    "identity": identity_family,
}


def builtin_family(name: str) -> Family:
    try:
        return BUILTIN_FAMILIES[name]()
    except KeyError:
        raise ContractViolation(f"unknown family {name!r}; known: {sorted(BUILTIN_FAMILIES)}") from None


# ---------------------------------------------------------------------------
# evaluation and orbit sets


def apply(m: MapSpec, space: SpaceSpec, x) -> np.ndarray:
    """Evaluate ``m`` at a single point."""
    pt = space.canonicalize(np.reshape(np.asarray(x, dtype=float), (space.dim,)))
    return space.canonicalize(m(pt[None, :])[0])


def apply_word(family: Family, word: Sequence[int], points: np.ndarray) -> np.ndarray:
    out = np.asarray(points, dtype=float)
    for j in word:
        out = family.maps[j](out)
    return family.space.canonicalize(np.atleast_2d(out))


def image_of_set(family: Family, A: FiniteSet, delta: float = 0.0) -> FiniteSet:
    """Union of the images of ``A`` under every member, optionally coalesced."""
    images = np.vstack([m(A.points) for m in family.maps])
    out = FiniteSet.from_points(family.space, images, A.dedup_tol)
    return coalesce(out, delta) if delta > 0 else out


@dataclass(frozen=True)
class OrbitTable:
    base: np.ndarray
    family: Family
    sets: tuple[FiniteSet, ...]
    accumulated_coalesce_error: float = 0.0

    @property
    def depth(self) -> int:
        return len(self.sets) - 1


def coalesce_error_bound(delta: float, lipschitz: float, n: int) -> float:
    """``delta * sum_{i<n} L**i``: worst-case drift after ``n`` coalesced steps."""
    if delta == 0 or n == 0:
        return 0.0
    if lipschitz == 1.0:
        return delta * n
    return delta * (lipschitz ** n - 1.0) / (lipschitz - 1.0)


def orbit_set(family: Family, x, n: int, delta: float = 0.0,
              cap: int = DEFAULT_SET_CAP, dedup_tol: float = DEFAULT_DEDUP_TOL) -> OrbitTable:
    """Orbit sets ``F^0(x), ..., F^n(x)`` by repeated set images."""
    if n < 0:
        raise ContractViolation("depth must be nonnegative")
    current = singleton(family.space, x, dedup_tol)
    sets = [current]
    for i in range(n):
        if len(current) * family.p > cap:
            raise SizeLimitError(
                f"orbit set at depth {i + 1} may exceed {cap} points; raise the coalesce radius or lower n"
            )
        current = image_of_set(family, current, delta)
        sets.append(current)
    bound = coalesce_error_bound(delta, family.lipschitz, n)
    return OrbitTable(np.array(current.space.canonicalize(np.reshape(x, (family.space.dim,)))),
                      family, tuple(sets), bound)


def _dedup_grouped_1d(values: np.ndarray, labels: np.ndarray, n_groups: int,
                      tol: float, circle: bool) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((values, labels))
    values = values[order]
    labels = labels[order]
    keep = np.ones(len(values), dtype=bool)
    same = labels[1:] == labels[:-1]
    keep[1:] = ~(same & (values[1:] - values[:-1] <= tol))
    values = values[keep]
    labels = labels[keep]
    counts = np.bincount(labels, minlength=n_groups)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    if circle:
        first = offsets[:-1]
        last = offsets[1:] - 1
        wrap = (counts > 1) & (values[first] + 1.0 - values[last] <= tol)
        if wrap.any():
            drop = np.ones(len(values), dtype=bool)
            drop[last[wrap]] = False
            values = values[drop]
            counts = counts - wrap
            offsets = np.concatenate(([0], np.cumsum(counts)))
    return values, offsets


def iterate_orbit_sets(family: Family, points: np.ndarray, n: int, cap: int = DEFAULT_SET_CAP,
                       dedup_tol: float = DEFAULT_DEDUP_TOL) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(flat, offsets)`` for ``F^i`` of every point, ``i = 0..n``.

    Segment ``s`` of ``flat`` holds the sorted orbit set of ``points[s]``.
    All candidates advance together in one array.
    """
    space = family.space
    flat = space.canonicalize(np.atleast_2d(points))
    N = len(flat)
    offsets = np.arange(N + 1)
    yield flat, offsets
    for i in range(1, n + 1):
        if family.p == 1:
            flat = space.canonicalize(family.maps[0](flat))
            yield flat, offsets
            continue
        sizes = np.diff(offsets) * family.p
        if sizes.max() > cap:
            raise SizeLimitError(
                f"orbit sets at depth {i} may exceed {cap} points; raise the coalesce radius or lower n"
            )
        images = np.vstack([space.canonicalize(m(flat)) for m in family.maps])
        labels = np.tile(np.repeat(np.arange(N), np.diff(offsets)), family.p)
        if space.is_one_dimensional:
            vals, offsets = _dedup_grouped_1d(images[:, 0], labels, N, dedup_tol,
                                              space.factors[0] == CIRCLE)
            flat = vals[:, None]
        else:
            order = np.argsort(labels, kind="stable")
            images, labels = images[order], labels[order]
            bounds = np.searchsorted(labels, np.arange(N + 1))
            segs = [FiniteSet.from_points(space, images[bounds[s]:bounds[s + 1]], dedup_tol).points
                    for s in range(N)]
            offsets = np.concatenate(([0], np.cumsum([len(s) for s in segs])))
            flat = np.vstack(segs)
        yield flat, offsets


# ---------------------------------------------------------------------------
# word-level constructions


def all_words(p: int, n: int, cap: int = DEFAULT_WORD_CAP) -> Iterator[tuple[int, ...]]:
    if p ** n > cap:
        raise SizeLimitError(f"{p}**{n} words exceed the cap of {cap}")
    return itertools.product(range(p), repeat=n)


def word_images(family: Family, points: np.ndarray, n: int,
                cap: int = DEFAULT_WORD_CAP) -> Iterator[np.ndarray]:
    """Yield arrays of shape ``(N, p**k, dim)``: images under every length-k word, k = 0..n.

    Words are ordered lexicographically in application order.
    """
    space = family.space
    current = space.canonicalize(np.atleast_2d(points))[:, None, :]
    yield current
    for k in range(1, n + 1):
        if current.shape[1] * family.p > cap:
            raise SizeLimitError(f"{family.p}**{k} words per point exceed the cap of {cap}")
        N, W, d = current.shape
        flat = current.reshape(-1, d)
        # word w + (j,) applies f_j last; lexicographic order keeps the new letter innermost
        nxt = np.stack([space.canonicalize(m(flat)).reshape(N, W, d) for m in family.maps], axis=2)
        current = nxt.reshape(N, W * family.p, d)
        yield current


def power_family(family: Family, m: int, cap: int = DEFAULT_WORD_CAP) -> Family:
    """All ``p**m`` length-m compositions, lexicographic in word indices."""
    if m < 1:
        raise ContractViolation("power must be a positive integer")
    if m == 1:
        return family
    maps = tuple(Composition(tuple(family.maps[j] for j in word)) for word in all_words(family.p, m, cap))
    return Family(family.space, maps, f"{family.name}^{m}")


def product_family(F: Family, G: Family) -> Family:
    """``{f x g : f in F, g in G}`` on the product space."""
    widths = (F.space.dim, G.space.dim)
    maps = tuple(ProductMap((f, g), widths) for f in F.maps for g in G.maps)
    return Family(F.space.product(G.space), maps, f"{F.name}x{G.name}")


def _verification_grid(space: SpaceSpec, points: int = 1000) -> np.ndarray:
    per_axis = max(2, int(round(points ** (1.0 / space.dim))))
    return grid(space, 1.0 / per_axis)


def conjugate_family(family: Family, T: MapSpec, T_inv: MapSpec, tol: float = 1e-9) -> Family:
    """``{T o f o T_inv}``; ``T_inv`` is checked against ``T`` on a grid first."""
    space = family.space
    pts = _verification_grid(space)
    for name, a, b in (("T o T_inv", T, T_inv), ("T_inv o T", T_inv, T)):
        back = space.canonicalize(a(space.canonicalize(b(pts))))
        err = float(np.max(rowwise_distance(space, back, pts)))
        if err > tol:
            raise ContractViolation(f"{name} deviates from the identity by {err:.3g} > {tol}")
    maps = tuple(Conjugated(f, T, T_inv) for f in family.maps)
    return Family(space, maps, f"{family.name}^T")


def invert_family(family: Family) -> Family:
    maps = []
    for j, m in enumerate(family.maps):
        try:
            maps.append(m.inverse())
        except ContractViolation as exc:
            raise ContractViolation(f"member {j} ({m!r}) of {family.name!r} is not invertible") from exc
    return Family(family.space, tuple(maps), f"{family.name}^-1")


# ---------------------------------------------------------------------------
# preimages and separation witnesses


def _monotone_members(family: Family) -> list[PiecewiseLinear]:
    members = []
    for j, m in enumerate(family.maps):
        if not isinstance(m, PiecewiseLinear) or not (m.is_increasing or m.is_decreasing):
            raise ContractViolation(f"member {j} of {family.name!r} is not a strictly monotone interval map")
        members.append(m)
    return members


def preimage_intervals(word: Sequence[int], family: Family,
                       target: tuple[float, float]) -> list[tuple[float, float]]:
    """``g^{-1}([a, b])`` for the word's composition, pulled back one letter at a time."""
    members = _monotone_members(family)
    interval = (float(target[0]), float(target[1]))
    for j in reversed(tuple(word)):
        interval = members[j].preimage(*interval)
        if interval is None:
            return []
    return [interval]


def invariant_subintervals(family: Family, resolution: float,
                           tol: float = 1e-12) -> list[tuple[float, float]]:
    """Closed subintervals ``[a, b]`` with grid endpoints mapped into themselves by every member.

    Forward closure is checked exactly from the piecewise-linear images.
    Identity members are skipped.
    """
    if family.space.factors != (INTERVAL,):
        raise ContractViolation("invariant subintervals need a one-interval space")
    members = []
    for j, m in enumerate(family.maps):
        if isinstance(m, Identity):
            continue
        if not isinstance(m, PiecewiseLinear):
            raise ContractViolation(f"member {j} of {family.name!r} is not piecewise linear")
        members.append(m)
    ends = grid(family.space, resolution)[:, 0]
    out = []
    for i, a in enumerate(ends):
        for b in ends[i + 1:]:
            if all(lo >= a - tol and hi <= b + tol for lo, hi in (m.image_interval(a, b) for m in members)):
                out.append((float(a), float(b)))
    return out


EXAMPLE41_TARGET = (1 / 3, 2 / 3)


def witness_points(family: Family, n: int,
                   target: tuple[float, float] = EXAMPLE41_TARGET) -> list[tuple[tuple[int, ...], float]]:
    """One point per length-n word: the midpoint of the word's preimage of ``target``."""
    if n < 1:
        raise ContractViolation("witness depth must be positive")
    out = []
    for word in all_words(family.p, n):
        pieces = preimage_intervals(word, family, target)
        if not pieces:
            raise ContractViolation(f"word {word} has an empty preimage of {target}")
        a, b = pieces[0]
        out.append((word, 0.5 * (a + b)))
    return out
