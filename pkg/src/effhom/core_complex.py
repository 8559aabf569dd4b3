"""Chains, algebraic cellular complexes and chain morphisms over the integers.

Cells are ``(degree, key)`` pairs.  Keys of one degree must be mutually
comparable so that every iteration order is deterministic.  Coefficients are
Python integers, so arithmetic is exact and never overflows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, NamedTuple


class ContractError(ValueError):
    """A precondition of an operation was violated."""


class BasisMembershipError(ContractError):
    """A cell is not part of the complex it was presented to."""


class InvalidComplexError(ValueError):
    """The differential does not square to zero."""


class InternalConsistencyError(RuntimeError):
    """A result that is guaranteed by theory failed its runtime check."""


class Cell(NamedTuple):
    degree: int
    key: Any

    def __repr__(self) -> str:
        return f"Cell({self.degree}, {self.key!r})"


def _clean(terms: Mapping) -> dict:
    return {k: v for k, v in terms.items() if v}


def add_into(acc: dict, terms: Mapping, coeff: int = 1) -> dict:
    """In-place ``acc += coeff * terms`` on raw coefficient dicts, dropping zeros."""
    if not coeff:
        return acc
    for k, v in terms.items():
        n = acc.get(k, 0) + coeff * v
        if n:
            acc[k] = n
        else:
            acc.pop(k, None)
    return acc


class Chain:
    """Immutable finite integer combination of cells of a single degree."""

    __slots__ = ("degree", "_terms", "_hash")

    def __init__(self, degree: int, terms: Mapping | Iterable | None = None):
        self.degree = degree
        if terms is None:
            self._terms = {}
        elif isinstance(terms, Mapping):
            self._terms = _clean(terms)
        else:
            acc: dict = {}
            for k, v in terms:
                add_into(acc, {k: v})
            self._terms = acc
        self._hash = None

    @classmethod
    def _wrap(cls, degree: int, terms: dict) -> "Chain":
        # trusted constructor: terms already free of zeros and not shared
        c = cls.__new__(cls)
        c.degree = degree
        c._terms = terms
        c._hash = None
        return c

    @classmethod
    def zero(cls, degree: int) -> "Chain":
        return cls._wrap(degree, {})

    @classmethod
    def of(cls, cell: Cell, coeff: int = 1) -> "Chain":
        return cls._wrap(cell.degree, {cell.key: coeff} if coeff else {})

    @property
    def terms(self) -> dict:
        """A copy of the coefficient mapping key -> coefficient."""
        return dict(self._terms)

    def raw(self) -> Mapping:
        return self._terms

    def coeff(self, key) -> int:
        return self._terms.get(key, 0)

    def keys(self) -> list:
        return sorted(self._terms)

    def cells(self) -> list[Cell]:
        return [Cell(self.degree, k) for k in sorted(self._terms)]

    def items(self) -> list[tuple[Any, int]]:
        return sorted(self._terms.items())

    def __iter__(self) -> Iterator[tuple[Any, int]]:
        return iter(self.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def _check(self, other: "Chain") -> None:
        if not isinstance(other, Chain):
            raise TypeError(f"expected Chain, got {type(other).__name__}")
        if other.degree != self.degree:
            raise ContractError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "Chain") -> "Chain":
        self._check(other)
        return Chain._wrap(self.degree, add_into(dict(self._terms), other._terms))

    def __sub__(self, other: "Chain") -> "Chain":
        self._check(other)
        return Chain._wrap(self.degree, add_into(dict(self._terms), other._terms, -1))

    def __neg__(self) -> "Chain":
        return Chain._wrap(self.degree, {k: -v for k, v in self._terms.items()})

    def __mul__(self, n: int) -> "Chain":
        if not isinstance(n, int):
            return NotImplemented
        if n == 0:
            return Chain.zero(self.degree)
        return Chain._wrap(self.degree, {k: n * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return self.degree == other.degree and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.degree, frozenset(self._terms.items())))
        return self._hash

    def filter(self, keep: Callable[[Any], bool]) -> "Chain":
        return Chain._wrap(self.degree, {k: v for k, v in self._terms.items() if keep(k)})

    def __repr__(self) -> str:
        if not self._terms:
            return f"Chain({self.degree}, 0)"
        body = " + ".join(f"{v}*{k!r}" for k, v in self.items())
        return f"Chain({self.degree}, {body})"


class CellularComplex:
    """A free chain complex over Z with a distinguished basis in every degree.

    Parameters
    ----------
    boundary : callable ``(degree, key) -> mapping key -> int``
        Boundary of a basis cell, as coefficients on cells of ``degree - 1``.
    basis : callable ``degree -> sequence of keys`` or None
        Explicit finite basis.  ``None`` means the complex is only presented
        through ``contains`` (possibly infinite).
    contains : callable ``(degree, key) -> bool``, optional
        Membership test.  Defaults to membership in ``basis``.
    degrees : (lo, hi), optional
        Range outside of which the basis is empty (enumerable complexes).
    """

    def __init__(self, boundary: Callable, basis: Callable | None = None,
                 contains: Callable | None = None, degrees: tuple[int, int] | None = None,
                 name: str = ""):
        self._boundary_fn = boundary
        self._basis_fn = basis
        self._contains_fn = contains
        self._basis_cache: dict[int, tuple] = {}
        self._basis_sets: dict[int, frozenset] = {}
        self._bd_cache: dict = {}
        self.degrees = degrees
        self.name = name

    @property
    def enumerable(self) -> bool:
        return self._basis_fn is not None

    def basis(self, degree: int) -> tuple:
        if self._basis_fn is None:
            raise ContractError(f"complex {self.name!r} has no enumerable basis")
        if self.degrees is not None and not self.degrees[0] <= degree <= self.degrees[1]:
            return ()
        b = self._basis_cache.get(degree)
        if b is None:
            b = tuple(sorted(self._basis_fn(degree)))
            self._basis_cache[degree] = b
        return b

    def degree_range(self) -> range:
        if self.degrees is None:
            raise ContractError(f"complex {self.name!r} has no finite degree range")
        return range(self.degrees[0], self.degrees[1] + 1)

    def cells(self, degree: int | None = None) -> list[Cell]:
        if degree is not None:
            return [Cell(degree, k) for k in self.basis(degree)]
        return [Cell(p, k) for p in self.degree_range() for k in self.basis(p)]

    def contains(self, degree: int, key) -> bool:
        if self._contains_fn is not None:
            return bool(self._contains_fn(degree, key))
        s = self._basis_sets.get(degree)
        if s is None:
            s = frozenset(self.basis(degree))
            self._basis_sets[degree] = s
        return key in s

    def boundary_raw(self, degree: int, key) -> Mapping:
        """Boundary coefficients of a basis cell, memoized; do not mutate."""
        ck = (degree, key)
        r = self._bd_cache.get(ck)
        if r is None:
            r = _clean(self._boundary_fn(degree, key))
            self._bd_cache[ck] = r
        return r

    def d(self, c: Chain) -> Chain:
        acc: dict = {}
        for k, v in c.raw().items():
            add_into(acc, self.boundary_raw(c.degree, k), v)
        return Chain._wrap(c.degree - 1, acc)

    def with_differential(self, boundary: Callable, name: str = "") -> "CellularComplex":
        """Same basis, different differential."""
        return CellularComplex(boundary, self._basis_fn, self._contains_fn, self.degrees,
                               name or self.name)

    def __repr__(self) -> str:
        return f"<CellularComplex {self.name or hex(id(self))}>"


AlgebraicCellularComplex = CellularComplex


def finite_complex(basis: Mapping[int, Iterable], boundaries: Mapping, name: str = "") -> CellularComplex:
    """Build an enumerable complex from explicit data.

    ``boundaries`` maps ``(degree, key)`` to a mapping of face keys to
    coefficients; missing entries mean a zero boundary.
    """
    basis = {p: tuple(sorted(ks)) for p, ks in basis.items()}
    sets = {p: frozenset(ks) for p, ks in basis.items()}
    degs = [p for p, ks in basis.items() if ks]
    rng = (min(degs), max(degs)) if degs else (0, -1)
    bds = {(p, k): dict(v) for (p, k), v in boundaries.items()}
    for (p, k), faces in bds.items():
        if k not in sets.get(p, ()):
            raise InvalidComplexError(f"boundary given for {k!r}, not a basis cell of degree {p}")
        below = sets.get(p - 1, frozenset())
        for f in faces:
            if f not in below:
                raise InvalidComplexError(f"face {f!r} of {k!r} is not a basis cell of degree {p - 1}")

    return CellularComplex(lambda p, k: bds.get((p, k), {}), lambda p: basis.get(p, ()),
                           lambda p, k: k in sets.get(p, ()), rng, name)


def boundary(C: CellularComplex, cell: Cell) -> Chain:
    """Boundary of a basis cell of ``C``."""
    if not C.contains(cell.degree, cell.key):
        raise BasisMembershipError(f"{cell!r} is not a basis cell of {C!r}")
    return Chain._wrap(cell.degree - 1, dict(C.boundary_raw(cell.degree, cell.key)))


def incidence(C: CellularComplex, sigma: Cell, tau: Cell) -> int:
    """Coefficient of ``sigma`` in the boundary of ``tau``."""
    if sigma.degree != tau.degree - 1:
        raise ContractError(f"incidence needs |sigma| = |tau| - 1, got {sigma.degree}, {tau.degree}")
    return C.boundary_raw(tau.degree, tau.key).get(sigma.key, 0)


class ChainMorphism:
    """Linear map between complexes given on basis cells, with a degree shift.

    ``evaluator(degree, key)`` returns the image of a basis cell as a mapping
    of keys (of degree ``degree + shift`` in the target) to coefficients.
    Images are memoized; evaluators must be pure.
    """

    def __init__(self, source: CellularComplex, target: CellularComplex, shift: int,
                 evaluator: Callable[[int, Any], Mapping], name: str = ""):
        self.source = source
        self.target = target
        self.shift = shift
        self._eval = evaluator
        self._cache: dict = {}
        self.name = name

    def image_raw(self, degree: int, key) -> Mapping:
        ck = (degree, key)
        r = self._cache.get(ck)
        if r is None:
            r = self._eval(degree, key)
            if isinstance(r, Chain):
                r = r.raw()
            else:
                r = _clean(r)
            self._cache[ck] = r
        return r

    def on_cell(self, cell: Cell) -> Chain:
        return Chain._wrap(cell.degree + self.shift, dict(self.image_raw(cell.degree, cell.key)))

    def __call__(self, c: Chain) -> Chain:
        acc: dict = {}
        for k, v in c.raw().items():
            add_into(acc, self.image_raw(c.degree, k), v)
        return Chain._wrap(c.degree + self.shift, acc)

    def __repr__(self) -> str:
        return f"<ChainMorphism {self.name} shift={self.shift}>"


def apply_morphism(m: ChainMorphism, c: Chain) -> Chain:
    return m(c)


def identity_morphism(C: CellularComplex) -> ChainMorphism:
    return ChainMorphism(C, C, 0, lambda p, k: {k: 1}, "id")


def zero_morphism(src: CellularComplex, dst: CellularComplex, shift: int) -> ChainMorphism:
    return ChainMorphism(src, dst, shift, lambda p, k: {}, "0")


def compose(outer: ChainMorphism, inner: ChainMorphism, name: str = "") -> ChainMorphism:
    """``outer o inner``."""
    def ev(p, k):
        return outer(Chain._wrap(p + inner.shift, dict(inner.image_raw(p, k)))).raw()
    return ChainMorphism(inner.source, outer.target, inner.shift + outer.shift, ev,
                         name or f"{outer.name}.{inner.name}")


def differential_morphism(C: CellularComplex) -> ChainMorphism:
    return ChainMorphism(C, C, -1, lambda p, k: C.boundary_raw(p, k), "d")


@dataclass
class Violation:
    check: str
    cell: Cell
    detail: Any = None


@dataclass
class Report:
    """Outcome of a cell-wise verification; violations are data, not exceptions."""

    checked: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, check: str, cell: Cell, detail: Any = None) -> None:
        self.violations.append(Violation(check, cell, detail))

    def merge(self, other: "Report") -> "Report":
        self.checked += other.checked
        self.violations.extend(other.violations)
        return self

    def __repr__(self) -> str:
        head = ", ".join(f"{v.check}@{v.cell!r}" for v in self.violations[:5])
        return f"Report(checked={self.checked}, violations={len(self.violations)}{': ' + head if head else ''})"


def verify_d_squared(C: CellularComplex, cells: Iterable[Cell] | None = None) -> Report:
    rep = Report()
    for cell in (C.cells() if cells is None else cells):
        rep.checked += 1
        dd = C.d(C.d(Chain.of(cell)))
        if dd:
            rep.add("d^2=0", cell, dd)
    return rep


def resolve_linear(root, step: Callable, memo: dict, limit: int | None = None,
                   on_loop: Callable | None = None, on_limit: Callable | None = None) -> dict:
    """Evaluate a memoized linear recursion without using the Python stack.

    ``step(x)`` returns ``(base, deps)`` meaning
    ``value(x) = base + sum(c * value(y) for c, y in deps)``, with values raw
    coefficient dicts.  A dependency cycle calls ``on_loop(path)`` (which must
    raise); a chain of nested dependencies longer than ``limit`` calls
    ``on_limit(path)``.
    """
    if root in memo:
        return memo[root]
    base, deps = step(root)
    frames = [[root, base, deps, 0]]
    on_path = {root}
    while frames:
        fr = frames[-1]
        deps = fr[2]
        i = fr[3]
        n = len(deps)
        while i < n and deps[i][1] in memo:
            i += 1
        fr[3] = i
        if i < n:
            y = deps[i][1]
            if y in on_path:
                path = [f[0] for f in frames]
                path = path[path.index(y):] + [y]
                if on_loop is None:
                    raise ContractError(f"dependency loop {path}")
                on_loop(path)
            if limit is not None and len(frames) >= limit:
                path = [f[0] for f in frames] + [y]
                if on_limit is None:
                    raise ContractError(f"recursion deeper than {limit}")
                on_limit(path)
            b2, d2 = step(y)
            frames.append([y, b2, d2, 0])
            on_path.add(y)
            continue
        x, base = fr[0], fr[1]
        acc = dict(base)
        for c, y in deps:
            add_into(acc, memo[y], c)
        memo[x] = acc
        frames.pop()
        on_path.discard(x)
    return memo[root]


def boundary_matrix(C: CellularComplex, degree: int):
    """Boundary ``C_degree -> C_{degree-1}`` as an IntegerMatrix (rows = faces)."""
    from .matrix_reduce import IntegerMatrix
    rows = C.basis(degree - 1)
    cols = C.basis(degree)
    entries = {}
    for k in cols:
        for r, v in C.boundary_raw(degree, k).items():
            entries[(r, k)] = v
    return IntegerMatrix(rows, cols, entries)
