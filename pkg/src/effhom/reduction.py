"""Homology reductions, their verification, composition and perturbation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .core_complex import (Cell, CellularComplex, Chain, ChainMorphism, ContractError, Report,
                           add_into, identity_morphism, resolve_linear, zero_morphism)


class NilpotencyError(RuntimeError):
    """The perturbation series did not vanish within the declared bound."""


@dataclass(frozen=True)
class Reduction:
    """``big => small`` given by ``f: big -> small``, ``g: small -> big``, ``h: big -> big``.

    Expected identities: ``fg = id``, ``gf + dh + hd = id``, ``fh = 0``,
    ``hg = 0`` and ``hh = 0``.
    """

    big: CellularComplex
    small: CellularComplex
    f: ChainMorphism
    g: ChainMorphism
    h: ChainMorphism


@dataclass(frozen=True)
class Perturbation:
    """A degree -1 map ``delta_hat`` on the big complex of a reduction.

    ``nilpotency_bound(cell)`` must give ``nu`` with ``(delta_hat h)^nu`` zero
    on that cell; ``None`` means only dependency loops are detected.
    """

    delta_hat: ChainMorphism
    nilpotency_bound: Callable[[Cell], int] | None = None


def identity_reduction(C: CellularComplex) -> Reduction:
    return Reduction(C, C, identity_morphism(C), identity_morphism(C), zero_morphism(C, C, 1))


def verify_reduction(rho: Reduction, cells: Iterable[Cell] | None = None,
                     small_cells: Iterable[Cell] | None = None, chain_maps: bool = True) -> Report:
    """Check the five reduction identities on the given cells.

    ``cells`` are big cells (default: the whole big basis, if enumerable),
    ``small_cells`` are small cells (default: the whole small basis, or the
    cells in the images ``f(c)`` when the small complex is lazy).  With
    ``chain_maps`` the commutation of f and g with the differentials is also
    checked.
    """
    big, small, f, g, h = rho.big, rho.small, rho.f, rho.g, rho.h
    rep = Report()
    if cells is None:
        cells = big.cells()
    cells = list(cells)
    if small_cells is None:
        if small.enumerable and small.degrees is not None:
            small_cells = small.cells()
        else:
            small_cells = sorted({y for c in cells for y in f.on_cell(c).cells()}, key=repr)
    for a in small_cells:
        rep.checked += 1
        x = Chain.of(a)
        gx = g(x)
        if f(gx) != x:
            rep.add("fg=id", a, f(gx))
        if h(gx):
            rep.add("hg=0", a, h(gx))
        if chain_maps and big.d(gx) != g(small.d(x)):
            rep.add("dg=gd", a)
    for c in cells:
        rep.checked += 1
        x = Chain.of(c)
        hx = h(x)
        total = g(f(x)) + big.d(hx) + h(big.d(x))
        if total != x:
            rep.add("gf+dh+hd=id", c, total - x)
        if f(hx):
            rep.add("fh=0", c, f(hx))
        if h(hx):
            rep.add("hh=0", c, h(hx))
        if chain_maps and small.d(f(x)) != f(big.d(x)):
            rep.add("df=fd", c)
    return rep


def compose_reductions(outer: Reduction, inner: Reduction) -> Reduction:
    """Compose ``big => mid`` with ``mid => small``.

    ``f = f2 f1``, ``g = g1 g2`` and ``h = h1 + g1 h2 f1``.
    """
    if outer.small is not inner.big:
        raise ContractError("outer.small and inner.big must be the same complex")
    f1, g1, h1 = outer.f, outer.g, outer.h
    f2, g2, h2 = inner.f, inner.g, inner.h

    def f(p, k):
        return f2(f1.on_cell(Cell(p, k))).raw()

    def g(p, k):
        return g1(g2.on_cell(Cell(p, k))).raw()

    def h(p, k):
        x = Chain.of(Cell(p, k))
        return (h1(x) + g1(h2(f1(x)))).raw()

    return Reduction(outer.big, inner.small,
                     ChainMorphism(outer.big, inner.small, 0, f, "f"),
                     ChainMorphism(inner.small, outer.big, 0, g, "g"),
                     ChainMorphism(outer.big, outer.big, 1, h, "h"))


def project_cycle(rho: Reduction, z: Chain) -> Chain:
    """Image in the small complex of a big cycle; same homology class."""
    if rho.big.d(z):
        raise ContractError("project_cycle expects a cycle")
    return rho.f(z)


def lift_cycle(rho: Reduction, z: Chain) -> Chain:
    """Representative in the big complex of a small cycle."""
    if rho.small.d(z):
        raise ContractError("lift_cycle expects a cycle")
    return rho.g(z)


def boundary_preimage(rho: Reduction, z: Chain, c: Chain) -> Chain:
    """Return ``w = g(c) + h(z)`` with ``d(w) = z`` when ``d(c) = f(z)``."""
    if rho.big.d(z):
        raise ContractError("boundary_preimage expects a cycle")
    if c.degree != z.degree + 1:
        raise ContractError("c must have degree |z| + 1")
    if rho.small.d(c) != rho.f(z):
        raise ContractError("d(c) must equal f(z)")
    w = rho.g(c) + rho.h(z)
    if rho.big.d(w) != z:
        raise ContractError("reduction does not satisfy its identities on z")
    return w


def perturb(rho: Reduction, pert: Perturbation,
            perturbed_big: CellularComplex | None = None) -> Reduction:
    """Transfer a perturbation of the big differential through ``rho``.

    With ``phi = sum (-1)^i (h delta_hat)^i``: ``f' = f (id - delta_hat phi h)``,
    ``g' = phi g``, ``h' = phi h`` and the small differential gains
    ``delta = f delta_hat phi g``.  ``perturbed_big``, when given, is used as the
    new big complex; it must carry the differential ``d + delta_hat``.
    """
    big, small, f, g, h = rho.big, rho.small, rho.f, rho.g, rho.h
    dh = pert.delta_hat
    bound = pert.nilpotency_bound
    memo: dict = {}

    def step(cell_key):
        p, k = cell_key
        hd = h(dh.on_cell(Cell(p, k)))
        return {k: 1}, [(-v, (p, y)) for y, v in hd.raw().items()]

    def loop(path):
        raise NilpotencyError(f"perturbation series loops through {path[:6]}")

    def phi_cell(p, k):
        limit = None
        if bound is not None:
            limit = bound(Cell(p, k)) + 1

        def over(path):
            raise NilpotencyError(f"perturbation series exceeds bound {limit - 1} at {Cell(p, k)!r}")
        return resolve_linear((p, k), step, memo, limit, loop, over)

    def phi(c: Chain) -> Chain:
        acc: dict = {}
        for k, v in c.raw().items():
            add_into(acc, phi_cell(c.degree, k), v)
        return Chain._wrap(c.degree, acc)

    def f2(p, k):
        x = Chain.of(Cell(p, k))
        return f(x - dh(phi(h(x)))).raw()

    def g2(p, k):
        return phi(g.on_cell(Cell(p, k))).raw()

    def h2(p, k):
        return phi(h.on_cell(Cell(p, k))).raw()

    def small_d(p, k):
        x = Chain.of(Cell(p, k))
        return (small.d(x) + f(dh(phi(g(x))))).raw()

    if perturbed_big is None:
        def big_d(p, k):
            return add_into(dict(big.boundary_raw(p, k)), dh.image_raw(p, k))
        perturbed_big = big.with_differential(big_d, big.name + "+pert")
    new_small = small.with_differential(small_d, small.name + "+pert")
    return Reduction(perturbed_big, new_small,
                     ChainMorphism(perturbed_big, new_small, 0, f2, "f'"),
                     ChainMorphism(new_small, perturbed_big, 0, g2, "g'"),
                     ChainMorphism(perturbed_big, perturbed_big, 1, h2, "h'"))


def same_morphism(m1: ChainMorphism, m2: ChainMorphism, cells: Iterable[Cell],
                  relabel: Callable | None = None) -> list[Cell]:
    """Cells on which two morphisms differ (optionally after relabelling m2's output)."""
    bad = []
    for c in cells:
        a = m1.on_cell(c)
        b = m2.on_cell(c)
        if relabel is not None:
            b = relabel(b)
        if a != b:
            bad.append(c)
    return bad
