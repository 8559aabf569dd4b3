import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from randomcomplex import random_complex, random_field

from effhom import (Cell, Chain, ChainMorphism, ContractError, NilpotencyError, Perturbation, Reduction,
                    boundary_preimage, compose_reductions, finite_complex, identity_reduction, lift_cycle,
                    perturb, project_cycle, verify_reduction)
from effhom.core_complex import zero_morphism
from effhom.dvf import DiscreteVectorField, build_reduction_gauss, build_reduction_hpt, check_admissible
from effhom.simplicial import BoundarySimplex, StandardSimplex, nondegenerate_chain_complex


def C_(deg, key):
    return Cell(deg, key)


def boundary_triangle():
    C = nondegenerate_chain_complex(BoundarySimplex(2))
    V = DiscreteVectorField([(C_(0, (1,)), C_(1, (0, 1))), (C_(0, (2,)), C_(1, (0, 2)))])
    return C, V


def same(m1, m2, cells):
    return all(m1.on_cell(c) == m2.on_cell(c) for c in cells)


def test_identity_reduction_is_clean():
    C = nondegenerate_chain_complex(StandardSimplex(2))
    rep = verify_reduction(identity_reduction(C))
    assert rep.ok and rep.checked == 14


def test_boundary_triangle_reduction_is_clean():
    C, V = boundary_triangle()
    rho = build_reduction_gauss(C, V)
    rep = verify_reduction(rho)
    assert rep.ok
    assert len(C.cells()) == 6


def test_zeroed_h_is_reported_at_the_source():
    C, V = boundary_triangle()
    rho = build_reduction_gauss(C, V)
    src = C_(0, (1,))

    def h(p, k):
        return {} if (p, k) == tuple(src) else rho.h.image_raw(p, k)

    bad = Reduction(rho.big, rho.small, rho.f, rho.g, ChainMorphism(C, C, 1, h))
    rep = verify_reduction(bad)
    assert not rep.ok
    assert ("gf+dh+hd=id", src) in {(v.check, v.cell) for v in rep.violations}


def test_compose_with_identity_on_either_side():
    C, V = boundary_triangle()
    rho = build_reduction_gauss(C, V)
    left = compose_reductions(identity_reduction(C), rho)
    right = compose_reductions(rho, identity_reduction(rho.small))
    for r in (left, right):
        assert same(r.f, rho.f, C.cells())
        assert same(r.h, rho.h, C.cells())
        assert same(r.g, rho.g, rho.small.cells())


def test_compose_requires_matching_complexes():
    C, V = boundary_triangle()
    rho = build_reduction_gauss(C, V)
    with pytest.raises(ContractError):
        compose_reductions(rho, identity_reduction(C))


def two_step(C, V, split):
    pairs = V.pairs()
    first = DiscreteVectorField(pairs[:split])
    rho1 = build_reduction_gauss(C, first)
    second = DiscreteVectorField(pairs[split:])
    rho2 = build_reduction_gauss(rho1.small, second)
    return compose_reductions(rho1, rho2)


def test_two_step_equals_one_step_on_hand_built_complex():
    # six cells: two vertices, three edges, one square-like 2-cell
    C = finite_complex({0: ["a", "b"], 1: ["x", "y", "z"], 2: ["Q"]},
                       {(1, "x"): {"b": 1, "a": -1}, (1, "y"): {"b": 1, "a": -1},
                        (1, "z"): {"b": 1, "a": -1}, (2, "Q"): {"x": 1, "y": -1}})
    V = DiscreteVectorField([(C_(0, "b"), C_(1, "x")), (C_(1, "y"), C_(2, "Q"))])
    assert len(C.cells()) == 6
    one = build_reduction_gauss(C, V)
    two = two_step(C, V, 1)
    assert verify_reduction(two).ok
    assert same(one.f, two.f, C.cells()) and same(one.h, two.h, C.cells())
    assert same(one.g, two.g, one.small.cells())


def test_two_step_equals_one_step_on_random_complexes():
    rng = random.Random(8)
    for _ in range(40):
        C = random_complex(rng, 30, 5)
        V = random_field(C, rng)
        if len(V) < 2:
            continue
        one = build_reduction_gauss(C, V)
        two = two_step(C, V, rng.randint(1, len(V) - 1))
        assert verify_reduction(two).ok
        assert same(one.f, two.f, C.cells()) and same(one.h, two.h, C.cells())
        assert same(one.g, two.g, one.small.cells())


def test_boundary_triangle_cycle_tools():
    C, V = boundary_triangle()
    rho = build_reduction_gauss(C, V)
    assert [c.key for c in rho.small.cells()] == [(0,), (1, 2)]
    z = Chain(1, {(0, 1): 1, (1, 2): 1, (0, 2): -1})
    assert project_cycle(rho, z) == Chain(1, {(1, 2): 1})
    assert lift_cycle(rho, Chain(1, {(1, 2): 1})) == z
    assert project_cycle(rho, Chain.zero(1)).is_zero()
    assert lift_cycle(rho, Chain.zero(1)).is_zero()
    with pytest.raises(ContractError):
        project_cycle(rho, Chain(1, {(0, 1): 1}))


def test_boundary_preimage_zero():
    C, V = boundary_triangle()
    rho = build_reduction_gauss(C, V)
    assert boundary_preimage(rho, Chain.zero(0), Chain.zero(1)).is_zero()
    with pytest.raises(ContractError):
        boundary_preimage(rho, Chain(0, {(0,): 1}), Chain.zero(1))


@given(st.integers(0, 10**6))
def test_cycle_tools_on_random_complexes(seed):
    rng = random.Random(seed)
    C = random_complex(rng, 25, 4)
    V = random_field(C, rng)
    rho = build_reduction_gauss(C, V)
    for p in C.degree_range():
        cells = C.cells(p)
        if not cells:
            continue
        w = Chain(p, {c.key: rng.randint(-2, 2) for c in rng.sample(cells, min(3, len(cells)))})
        z = C.d(w)
        # z is a boundary: its class is zero, and g f z - z is a boundary
        fz = project_cycle(rho, z)
        assert rho.small.d(rho.f(w)) == fz
        pre = boundary_preimage(rho, z, rho.f(w))
        assert C.d(pre) == z
        lp = lift_cycle(rho, fz) - z
        assert lp == -C.d(rho.h(z))
        # small cycles survive a round trip
        assert rho.f(lift_cycle(rho, fz)) == fz


@given(st.integers(0, 10**6))
def test_composed_reductions_pass_identities(seed):
    rng = random.Random(seed)
    C = random_complex(rng, 25, 4)
    V = random_field(C, rng)
    if len(V) < 2:
        return
    assert verify_reduction(two_step(C, V, rng.randint(1, len(V) - 1))).ok


def test_zero_perturbation_changes_nothing():
    C, V = boundary_triangle()
    rho = build_reduction_gauss(C, V)
    out = perturb(rho, Perturbation(zero_morphism(C, C, -1)))
    cells = C.cells()
    assert same(out.f, rho.f, cells) and same(out.h, rho.h, cells)
    assert same(out.g, rho.g, rho.small.cells())
    for c in rho.small.cells():
        assert out.small.boundary_raw(*c) == rho.small.boundary_raw(*c)
    assert verify_reduction(out).ok


def small_pair():
    C = finite_complex({0: ["s"], 1: ["t"]}, {(1, "t"): {"s": 1}})
    V = DiscreteVectorField([(C_(0, "s"), C_(1, "t"))])
    return C, build_reduction_gauss(C, V)


def test_perturbation_loop_raises():
    C, rho = small_pair()
    dhat = ChainMorphism(C, C, -1, lambda p, k: {"s": 1} if k == "t" else {})
    out = perturb(rho, Perturbation(dhat))
    with pytest.raises(NilpotencyError):
        out.h.on_cell(C_(0, "s"))


def test_perturbation_bound_is_enforced():
    # (dhat h)^2 != 0 on a chain of three sources, so a bound of 1 must be refused
    C = finite_complex({0: ["a", "b", "c"], 1: ["x", "y", "z"]},
                       {(1, "x"): {"a": 1}, (1, "y"): {"b": 1}, (1, "z"): {"c": 1}})
    V = DiscreteVectorField([(C_(0, "a"), C_(1, "x")), (C_(0, "b"), C_(1, "y")), (C_(0, "c"), C_(1, "z"))])
    rho = build_reduction_gauss(C, V)
    dhat = ChainMorphism(C, C, -1, lambda p, k: {"x": {"b": 1}, "y": {"c": 1}}.get(k, {}))
    ok = perturb(rho, Perturbation(dhat, lambda cell: 3))
    assert ok.h.on_cell(C_(0, "a")) == Chain(1, {"x": 1, "y": -1, "z": 1})
    tight = perturb(rho, Perturbation(dhat, lambda cell: 1))
    with pytest.raises(NilpotencyError):
        tight.h.on_cell(C_(0, "a"))


@given(st.integers(0, 10**6))
def test_perturbed_reduction_satisfies_identities(seed):
    # perturb the vector part of the differential back to the full one
    rng = random.Random(seed)
    C = random_complex(rng, 25, 4)
    V = random_field(C, rng)
    rho = build_reduction_hpt(C, V, check_admissible(C, V))
    assert verify_reduction(rho).ok
