import random

import pytest

from dieudonne.errors import InputError
from dieudonne.isocrystal import (DieudonneModule, IsocrystalAmbient,
                                  direct_sum, dual_module, newton_polygon,
                                  standard_ambient, standard_module)
from dieudonne.linalg import (PadicMatrix, lattice_contains, lattice_equal,
                              lattice_key)
from dieudonne.minimal import (enumerate_stable_overlattices,
                               enumerate_stable_sublattices, is_minimal,
                               minimal_isogeny, minimal_overmodule,
                               minimal_submodule,
                               minimal_overmodule_exhaustive,
                               minimal_submodule_exhaustive,
                               polygons_of_height, random_fv_stable_lattice,
                               transport_endomorphism)
from dieudonne.isocrystal import NewtonPolygon
from dieudonne.wittring import default_precision, make_witt_ring


def ring_for(h, p=2, m=1):
    return make_witt_ring(p, m, default_precision(h))


def test_standard_modules_are_minimal():
    for (a, b, r) in [(1, 0, 1), (0, 1, 2), (1, 1, 1), (2, 1, 1), (1, 1, 2)]:
        R = ring_for(r * (a + b), 3, 1)
        cert = is_minimal(standard_module(a, b, r, R))
        assert cert.is_minimal and cert.split_flag


def test_rescaled_mixed_lattice_is_minimal():
    # <e_1, f_1, p e_2, f_2> inside the superspecial ambient: isomorphic to
    # a rescaled direct sum of minimal blocks
    R = ring_for(4, 2, 1)
    M = direct_sum(standard_module(1, 1, 1, R), standard_module(1, 1, 1, R))
    basis = PadicMatrix.diag(
        R, [R.one(), R.one(), R.from_int(2), R.one()])
    scaled = DieudonneModule(M.ambient, basis, check=False)
    # the diagonal scaling is only F,V-stable if it scales whole blocks
    basis2 = PadicMatrix.diag(
        R, [R.one(), R.one(), R.from_int(2), R.from_int(2)])
    M2 = DieudonneModule(M.ambient, basis2)
    assert is_minimal(M2).is_minimal


def test_minimal_fixpoint_on_minimal_module_is_identity():
    R = ring_for(3, 2, 1)
    M = standard_module(2, 1, 1, R)
    over = minimal_overmodule(M)
    sub = minimal_submodule(M)
    assert lattice_equal(over.basis, M.basis)
    assert lattice_equal(sub.basis, M.basis)


def test_scaling_preserves_minimality():
    R = ring_for(2, 3, 1)
    M = standard_module(1, 1, 1, R)
    pM = M.scaled(1)
    over = minimal_overmodule(pM)
    assert lattice_equal(over.basis, pM.basis)


def test_supersingular_point_with_rational_coords_is_minimal():
    # M1 + W*(1/p)(f1 + f2): the mixing vector has subfield-rational
    # coordinates, and the lattice is isomorphic to a sum of standard
    # blocks (u = e0+e2, v = (1/p)(e1+e3) span a twisted (1,1)-block)
    R = ring_for(4, 2, 2)
    M1 = direct_sum(standard_module(1, 1, 1, R), standard_module(1, 1, 1, R))
    cols = M1.basis.columns()
    extra = [R.zero(), R.one().mul_p_power(-1), R.zero(),
             R.one().mul_p_power(-1)]
    from dieudonne.linalg import lattice_from_columns
    Mx = DieudonneModule(M1.ambient, lattice_from_columns(R, cols + [extra]))
    assert is_minimal(Mx).is_minimal


def test_non_minimal_supersingular_lattice():
    # mixing vector (1/p)(f1 + tau(g) f2) with g generating F_{p^4} over
    # F_{p^2}: non-minimal; its minimal submodule is M1 (length 1) and the
    # minimal overmodule has length 1 as well
    R = ring_for(4, 2, 4)
    M1 = direct_sum(standard_module(1, 1, 1, R), standard_module(1, 1, 1, R))
    amb = M1.ambient
    g = R.teichmuller((0, 1, 0, 0))
    cols = M1.basis.columns()
    extra = [R.zero(), R.one().mul_p_power(-1), R.zero(),
             g.mul_p_power(-1)]
    from dieudonne.linalg import lattice_from_columns
    Mx = DieudonneModule(amb, lattice_from_columns(R, cols + [extra]))
    cert = is_minimal(Mx)
    assert not cert.is_minimal
    data = minimal_isogeny(Mx)
    assert data.length_sub == 1
    assert data.length_over == 1
    assert data.annihilator_exponent == 1
    assert lattice_equal(data.M_min.basis, M1.basis)
    assert is_minimal(data.M_min).is_minimal
    assert is_minimal(data.M_over).is_minimal


def test_route_agreement_fixpoint_dual_skeleton():
    R = ring_for(4, 2, 2)
    M1 = direct_sum(standard_module(1, 1, 1, R), standard_module(1, 1, 1, R))
    amb = M1.ambient
    rng = random.Random(17)
    for _ in range(6):
        M = random_fv_stable_lattice(amb, rng, steps=3)
        subs = {route: minimal_submodule(M, route=route)
                for route in ("dual", "fixpoint", "skeleton")}
        for route, sub in subs.items():
            assert lattice_equal(sub.basis, subs["dual"].basis), route
        overs = {route: minimal_overmodule(M, route=route)
                 for route in ("fixpoint", "dual", "skeleton")}
        for route, over in overs.items():
            assert lattice_equal(over.basis, overs["fixpoint"].basis), route


def test_exhaustive_oracle_matches_fixpoint():
    R = ring_for(4, 2, 1)
    M1 = direct_sum(standard_module(1, 1, 1, R), standard_module(1, 1, 1, R))
    rng = random.Random(5)
    for _ in range(4):
        M = random_fv_stable_lattice(M1.ambient, rng, steps=2)
        data = minimal_isogeny(M)
        if data.length_sub <= 2:
            oracle = minimal_submodule_exhaustive(M, 2)
            assert oracle is not None
            assert lattice_equal(oracle.basis, data.M_min.basis)
        if data.length_over <= 2:
            oracle = minimal_overmodule_exhaustive(M, 2)
            assert oracle is not None
            assert lattice_equal(oracle.basis, data.M_over.basis)


def test_duality_of_min_and_over():
    R = ring_for(4, 2, 2)
    M1 = direct_sum(standard_module(1, 1, 1, R), standard_module(1, 1, 1, R))
    rng = random.Random(23)
    for _ in range(5):
        M = random_fv_stable_lattice(M1.ambient, rng, steps=3)
        lhs = dual_module(minimal_submodule(M))
        rhs = minimal_overmodule(dual_module(M))
        assert lattice_equal(lhs.basis, rhs.basis)


def test_idempotence_and_monotonicity():
    R = ring_for(4, 3, 1)
    M1 = direct_sum(standard_module(1, 1, 1, R), standard_module(1, 1, 1, R))
    rng = random.Random(31)
    M = random_fv_stable_lattice(M1.ambient, rng, steps=3)
    over = minimal_overmodule(M)
    assert lattice_equal(minimal_overmodule(over).basis, over.basis)
    sub = minimal_submodule(M)
    assert lattice_equal(minimal_submodule(sub).basis, sub.basis)
    # monotonicity: M subset over 	=> M_min subset over_min etc.
    assert lattice_contains(over.basis, sub.basis)


def test_minimality_iff_trivial_isogeny():
    R = ring_for(4, 2, 1)
    M1 = direct_sum(standard_module(1, 1, 1, R), standard_module(1, 1, 1, R))
    rng = random.Random(41)
    for _ in range(6):
        M = random_fv_stable_lattice(M1.ambient, rng, steps=2)
        cert = is_minimal(M)
        data = minimal_isogeny(M)
        assert cert.is_minimal == (data.length_sub == 0)
        assert cert.is_minimal == (data.length_over == 0)


def test_ordinary_rank2_lattices_all_split_minimal():
    # étale (+) multiplicative: every F,V-stable lattice splits, hence is
    # minimal; the exhaustive search confirms there is nothing below M but
    # scalings
    R = ring_for(2, 2, 1)
    M = direct_sum(standard_module(1, 0, 1, R), standard_module(0, 1, 1, R))
    for cand in enumerate_stable_sublattices(M, 2):
        assert is_minimal(cand).is_minimal


def test_transport_certificate():
    R = ring_for(4, 2, 2)
    M1 = direct_sum(standard_module(1, 1, 1, R), standard_module(1, 1, 1, R))
    rng = random.Random(53)
    M = random_fv_stable_lattice(M1.ambient, rng, steps=3)
    ident = PadicMatrix.identity(R, 4)
    cert = transport_endomorphism(M, ident)
    assert cert.stabilizes_sub and cert.stabilizes_over
    cert_p = transport_endomorphism(M, ident.mul_p_power(1))
    assert cert_p.stabilizes_sub and cert_p.stabilizes_over
    with pytest.raises(InputError):
        bad = PadicMatrix.zeros(R, 4, 4)
        bad.rows[0][1] = R.one().mul_p_power(-3)
        transport_endomorphism(M, bad)


def test_polygons_of_height():
    polys = polygons_of_height(2)
    assert NewtonPolygon([(1, 1, 1)]) in polys
    assert NewtonPolygon([(1, 0, 1), (0, 1, 1)]) in polys
    assert NewtonPolygon([(1, 0, 2)]) in polys
    assert all(p.height == 2 for p in polys)
    assert len(polys) == len({p.parts for p in polys})


def test_random_lattices_stay_stable_and_isogenous():
    R = ring_for(4, 2, 1)
    amb = standard_ambient(NewtonPolygon([(1, 1, 2)]), R)
    rng = random.Random(7)
    for _ in range(8):
        M = random_fv_stable_lattice(amb, rng, steps=3)
        M.validate()
        assert newton_polygon(M) == NewtonPolygon([(1, 1, 2)])
