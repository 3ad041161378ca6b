"""Concrete groups: integer lattices Z^d and finite groups given by Cayley tables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ElementMismatch, MalformedInput, NoIdentity, NonInvertible, NotAssociative, Overflow

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1
MAX_DIM = 4


@dataclass(frozen=True)
class GroupSpec:
    """Either the lattice Z^dim or a finite group with a validated Cayley table.

    Lattice elements are tuples of ints, finite elements are table indices.
    """

    kind: str
    dim: int = 0
    table: tuple = ()
    name: str = ""
    identity_index: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == "lattice":
            if not (1 <= self.dim <= MAX_DIM):
                raise MalformedInput(f"lattice dimension must be in 1..{MAX_DIM}, got {self.dim}")
        elif self.kind == "finite":
            table = tuple(tuple(int(v) for v in row) for row in self.table)
            object.__setattr__(self, "table", table)
            object.__setattr__(self, "identity_index", _validate_table(table))
        else:
            raise MalformedInput(f"unknown group kind {self.kind!r}")

    @property
    def is_lattice(self) -> bool:
        return self.kind == "lattice"

    @property
    def order(self) -> int:
        return len(self.table) if self.kind == "finite" else 0

    def __repr__(self):
        if self.is_lattice:
            return f"GroupSpec(Z^{self.dim})"
        return f"GroupSpec({self.name or 'finite'}, order={self.order})"


def _validate_table(table) -> int:
    n = len(table)
    if n == 0 or any(len(row) != n for row in table):
        raise MalformedInput("Cayley table must be a non-empty square array")
    t = np.array(table, dtype=np.int64)
    if t.min() < 0 or t.max() >= n:
        raise MalformedInput("Cayley table entries must be indices 0..order-1")
    full = np.arange(n)
    for i in range(n):
        if not np.array_equal(np.sort(t[i]), full):
            raise NonInvertible("row", i, _repeat_detail(t[i]))
    for j in range(n):
        if not np.array_equal(np.sort(t[:, j]), full):
            raise NonInvertible("column", j, _repeat_detail(t[:, j]))
    ident = None
    for e in range(n):
        if np.array_equal(t[e], full) and np.array_equal(t[:, e], full):
            ident = e
            break
    if ident is None:
        raise NoIdentity("no two-sided identity in Cayley table")
    left = t[t, :]  # left[x, y, z] = (xy)z
    right = t[:, t]  # right[x, y, z] = x(yz)
    bad = np.argwhere(left != right)
    if len(bad):
        raise NotAssociative(tuple(int(v) for v in bad[0]))
    return ident


def _repeat_detail(values) -> str:
    seen = {}
    for pos, v in enumerate(values):
        if int(v) in seen:
            return f" (entry {int(v)} repeated at positions {seen[int(v)]} and {pos})"
        seen[int(v)] = pos
    return ""


def lattice(dim: int = 1) -> GroupSpec:
    return GroupSpec("lattice", dim=dim)


def cyclic(n: int) -> GroupSpec:
    if n < 1:
        raise MalformedInput("cyclic group order must be >= 1")
    return GroupSpec("finite", table=tuple(tuple((i + j) % n for j in range(n)) for i in range(n)), name=f"Z{n}")


def dihedral(n: int) -> GroupSpec:
    """Symmetries of the regular n-gon, order 2n. Element r^k s^e has index k + n*e."""
    if n < 1:
        raise MalformedInput("dihedral parameter must be >= 1")

    def compose(a, b):
        k1, e1 = a % n, a // n
        k2, e2 = b % n, b // n
        # r^k1 s^e1 r^k2 s^e2 = r^(k1 + (-1)^e1 k2) s^(e1+e2)
        k = (k1 + (k2 if e1 == 0 else -k2)) % n
        return k + n * ((e1 + e2) % 2)

    size = 2 * n
    return GroupSpec("finite", table=tuple(tuple(compose(a, b) for b in range(size)) for a in range(size)), name=f"D{n}")


def symmetric3() -> GroupSpec:
    perms = list(itertools.permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}
    # (p*q)(i) = p(q(i)): apply q first
    table = tuple(tuple(index[tuple(p[q[i]] for i in range(3))] for q in perms) for p in perms)
    return GroupSpec("finite", table=table, name="S3")


def custom(table, name: str = "custom") -> GroupSpec:
    return GroupSpec("finite", table=table, name=name)


def build_finite(kind: str, n: int | None = None, table=None, name: str | None = None) -> GroupSpec:
    if kind == "cyclic":
        return cyclic(n)
    if kind == "dihedral":
        return dihedral(n)
    if kind == "symmetric3":
        return symmetric3()
    if kind == "custom":
        return custom(table, name or "custom")
    raise MalformedInput(f"unknown finite group builder {kind!r}")


def named_group(name: str) -> GroupSpec:
    """Parse names like Z6, D4, S3, Z^2."""
    key = name.strip()
    if key.upper() == "S3":
        return symmetric3()
    if key.startswith("Z^"):
        return lattice(int(key[2:]))
    if key in ("Z", "ZZ"):
        return lattice(1)
    if key[:1].upper() in "ZD" and key[1:].isdigit():
        n = int(key[1:])
        return cyclic(n) if key[0].upper() == "Z" else dihedral(n)
    raise MalformedInput(f"unknown group name {name!r}")


def check_element(g: GroupSpec, x):
    """Return x in canonical form (tuple of ints or int) or raise ElementMismatch."""
    if g.is_lattice:
        if isinstance(x, (int, np.integer)) and g.dim == 1:
            x = (x,)
        if not isinstance(x, (tuple, list, np.ndarray)) or len(x) != g.dim:
            raise ElementMismatch(f"expected a lattice point with {g.dim} coordinates, got {x!r}")
        coords = []
        for c in x:
            if isinstance(c, (bool, np.bool_)) or not isinstance(c, (int, np.integer)):
                raise ElementMismatch(f"lattice coordinates must be integers, got {c!r}")
            c = int(c)
            if not INT64_MIN <= c <= INT64_MAX:
                raise Overflow(f"coordinate {c} outside the int64 range")
            coords.append(c)
        return tuple(coords)
    if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)):
        raise ElementMismatch(f"expected a finite-group index, got {x!r}")
    if not 0 <= int(x) < g.order:
        raise ElementMismatch(f"index {x} outside 0..{g.order - 1}")
    return int(x)


def identity(g: GroupSpec):
    return (0,) * g.dim if g.is_lattice else g.identity_index


def mul(g: GroupSpec, x, y):
    x, y = check_element(g, x), check_element(g, y)
    if g.is_lattice:
        out = tuple(a + b for a, b in zip(x, y))
        if any(not INT64_MIN <= c <= INT64_MAX for c in out):
            raise Overflow(f"lattice product {x}+{y} leaves the int64 range")
        return out
    return g.table[x][y]


def inverse(g: GroupSpec, x):
    x = check_element(g, x)
    if g.is_lattice:
        if any(c == INT64_MIN for c in x):
            raise Overflow(f"inverse of {x} leaves the int64 range")
        return tuple(-c for c in x)
    return _inverse_table(g)[x]


@lru_cache(maxsize=64)
def _inverse_table(g: GroupSpec) -> tuple:
    e = g.identity_index
    return tuple(row.index(e) for row in g.table)


def inverse_table(g: GroupSpec) -> np.ndarray:
    return np.array(_inverse_table(g), dtype=np.int64)


def window(g: GroupSpec, radius: int) -> list:
    """Elements of the window: the max-norm box on lattices, the whole group otherwise."""
    pts = window_array(g, radius)
    if g.is_lattice:
        return [tuple(int(c) for c in row) for row in pts]
    return [int(i) for i in pts]


@lru_cache(maxsize=256)
def _window_cached(g: GroupSpec, radius: int) -> np.ndarray:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if not g.is_lattice:
        arr = np.arange(g.order, dtype=np.int64)
    else:
        axis = np.arange(-radius, radius + 1, dtype=np.int64)
        grids = np.meshgrid(*([axis] * g.dim), indexing="ij")
        arr = np.stack([m.ravel() for m in grids], axis=1)
    arr.setflags(write=False)
    return arr


def window_array(g: GroupSpec, radius: int) -> np.ndarray:
    """Window as an array: (n, dim) int64 on lattices, (n,) indices on finite groups."""
    return _window_cached(g, int(radius))


def window_size(g: GroupSpec, radius: int) -> int:
    return (2 * radius + 1) ** g.dim if g.is_lattice else g.order


def norm_array(g: GroupSpec, pts: np.ndarray) -> np.ndarray:
    """Max-norm of lattice points (zeros for finite groups, which sit in every window)."""
    if g.is_lattice:
        return np.abs(pts).max(axis=1)
    return np.zeros(len(pts), dtype=np.int64)


def mul_array(g: GroupSpec, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    if g.is_lattice:
        if max(int(np.abs(xs).max(initial=0)), int(np.abs(ys).max(initial=0))) >= 1 << 62:
            big = xs.astype(object) + ys.astype(object)
            if any(not INT64_MIN <= int(c) <= INT64_MAX for c in big.ravel()):
                raise Overflow("lattice product leaves the int64 range")
            return big.astype(np.int64)
        return xs + ys
    return np.array(g.table, dtype=np.int64)[xs, ys]


def generators(g: GroupSpec) -> list:
    """Unit vectors on lattices; a greedy generating set on finite groups."""
    if g.is_lattice:
        return [tuple(1 if i == j else 0 for i in range(g.dim)) for j in range(g.dim)]
    gens = []
    span = {g.identity_index}
    for x in range(g.order):
        if x not in span:
            gens.append(x)
            span = _closure(g, gens)
    return gens


def _closure(g: GroupSpec, gens) -> set:
    span = {g.identity_index}
    frontier = list(span)
    while frontier:
        nxt = []
        for s in frontier:
            for t in gens:
                p = g.table[s][t]
                if p not in span:
                    span.add(p)
                    nxt.append(p)
        frontier = nxt
    return span


def group_to_json(g: GroupSpec) -> dict:
    if g.is_lattice:
        return {"kind": "lattice", "dim": g.dim}
    return {"kind": "finite", "name": g.name, "table": [list(row) for row in g.table]}


def group_from_json(obj) -> GroupSpec:
    if isinstance(obj, str):
        return named_group(obj)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise MalformedInput("group descriptor must be an object with a 'kind' field")
    if obj["kind"] == "lattice":
        dim = obj.get("dim", 1)
        if not isinstance(dim, int):
            raise MalformedInput("lattice 'dim' must be an integer")
        return lattice(dim)
    if obj["kind"] == "finite":
        if "table" not in obj:
            if "name" in obj:
                return named_group(obj["name"])
            raise MalformedInput("finite group needs a 'table'")
        table = obj["table"]
        if not isinstance(table, list) or not all(isinstance(r, list) and all(isinstance(v, int) for v in r) for r in table):
            raise MalformedInput("finite group 'table' must be a list of integer lists")
        return GroupSpec("finite", table=tuple(tuple(r) for r in table), name=obj.get("name", "custom"))
    raise MalformedInput(f"unknown group kind {obj['kind']!r}")


def element_to_json(g: GroupSpec, x):
    return list(x) if g.is_lattice else int(x)


def element_from_json(g: GroupSpec, obj):
    if g.is_lattice and isinstance(obj, list):
        obj = tuple(obj)
    return check_element(g, obj)
