"""Minimality tests, minimal sub/over-modules, and minimal isogenies.

Per isotypic component of slope b/n, minimality is: (i) F^n L = p^b L and
(ii) Pi_0 L inside L; a module is minimal iff it splits into isotypic
components and each one satisfies (i)+(ii).  The biggest minimal
submodule and the smallest minimal overmodule are computed per component
by increasing/decreasing fixpoints of the closure ops
L +-> p^{-b} F^n L, p^b F^{-n} L, Pi_0 L.  Two independent cross-check
routes exist: the dual route (overmodule of the dual, dualized) and the
skeleton route (the Pi_0-closure of the skeleton lattice on the dual,
dualized back through the skeleton pairing).
"""

import random
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import InputError, InternalError
from .isocrystal import (DieudonneModule, IsocrystalAmbient, bezout_pair,
                         dual_module, isotypic_decomposition, newton_polygon,
                         pi0_apply, skeleton, skeleton_lattice,
                         standard_ambient, NewtonPolygon)
from .linalg import (PadicMatrix, integral_solution_lattice, is_integral,
                     lattice_canonical, lattice_contains, lattice_equal,
                     lattice_from_columns, lattice_index_exponent,
                     lattice_intersection, lattice_key, restrict_scalars,
                     smith_normal_form)
from .wittring import GUARD_DIGITS, default_precision, make_witt_ring, \
    tower_embedding

FIXPOINT_CAP_FACTOR = 4


class MinimalityCertificate:
    """Per-component minimality flags plus the splitness flag."""

    __slots__ = ("is_minimal", "split_flag", "per_component", "field_degree")

    def __init__(self, is_minimal, split_flag, per_component, field_degree):
        self.is_minimal = is_minimal
        self.split_flag = split_flag
        self.per_component = per_component
        self.field_degree = field_degree

    def to_json(self):
        return {
            "is_minimal": self.is_minimal,
            "split": self.split_flag,
            "components": [
                {"slope": [a, b], "stable_power": ci, "pi0_stable": cii}
                for (a, b), ci, cii in self.per_component],
            "field_degree": self.field_degree,
        }


def component_modules(M):
    """The lattices M_lambda as modules on their component sub-ambients."""
    comps, lats, amb_L, embed = isotypic_decomposition(M)
    mods = [DieudonneModule(c.sub_ambient, lat, check=False)
            for c, lat in zip(comps, lats)]
    return comps, mods, amb_L, embed


def _component_condition_i(comp, lat):
    """F^n L = p^b L, tested as containment with equal index."""
    a, b = comp.slope_pair
    n = a + b
    sub = comp.sub_ambient
    img = sub.apply_F(lat, n).mul_p_power(-b)
    return lattice_contains(lat, img) and lattice_contains(img, lat)


def _component_condition_ii(comp, lat):
    return lattice_contains(lat, pi0_apply(comp, lat))


def is_minimal(M):
    comps, lats, amb_L, embed = isotypic_decomposition(M)
    per = []
    all_ok = True
    for comp, lat in zip(comps, lats):
        ci = _component_condition_i(comp, lat)
        cii = _component_condition_ii(comp, lat)
        per.append((comp.slope_pair, ci, cii))
        all_ok = all_ok and ci and cii
    if len(comps) == 1:
        split = True
    else:
        cols = []
        for comp, lat in zip(comps, lats):
            cols.extend(comp.to_ambient(lat).columns())
        split_sum = lattice_from_columns(amb_L.ring, cols)
        split = lattice_equal(split_sum, embed(M.basis))
    return MinimalityCertificate(all_ok and split, split, per, amb_L.ring.m)


# ---------------------------------------------------------------------------
# fixpoint closures per component
# ---------------------------------------------------------------------------

def _closure_images(comp, lat):
    a, b = comp.slope_pair
    n = a + b
    sub = comp.sub_ambient
    up = sub.apply_F(lat, n).mul_p_power(-b)
    down = sub.apply_F(lat, -n).mul_p_power(b)
    pi = pi0_apply(comp, lat)
    return up, down, pi


def _overmodule_component(comp, lat):
    ring = comp.sub_ambient.ring
    cap = FIXPOINT_CAP_FACTOR * comp.dim * ring.N
    for _ in range(cap):
        up, down, pi = _closure_images(comp, lat)
        new = lattice_from_columns(
            ring, lat.columns() + up.columns() + down.columns()
            + pi.columns())
        if lattice_key(new) == lattice_key(lat):
            return new
        lat = new
    raise InternalError("overmodule fixpoint did not stabilize "
                        "(cap exceeded; this is a bug)")


def _submodule_component(comp, lat):
    a, b = comp.slope_pair
    n = a + b
    x, y = bezout_pair(a, b)
    sub = comp.sub_ambient
    ring = sub.ring
    cap = FIXPOINT_CAP_FACTOR * comp.dim * ring.N
    for _ in range(cap):
        up = sub.apply_F(lat, n).mul_p_power(-b)
        down = sub.apply_F(lat, -n).mul_p_power(b)
        # Pi_0^{-1} L  (Pi_0 = p^x F^{y-x})
        pi_inv = sub.apply_F(lat, x - y).mul_p_power(-x)
        new = lat
        for other in (up, down, pi_inv):
            new = lattice_intersection(new, other)
        if lattice_key(new) == lattice_key(lat):
            return new
        lat = new
    raise InternalError("submodule fixpoint did not stabilize "
                        "(cap exceeded; this is a bug)")


def _assemble(M, comps, comp_lats, amb_L, embed):
    """Assemble per-component lattices into a module on M's ambient.

    Results of minimal sub/over constructions are Galois-stable, so the
    canonical basis descends to the original base ring.
    """
    if len(comps) == 1 and comps[0].sub_ambient is M.ambient:
        return DieudonneModule(M.ambient, comp_lats[0], check=False)
    cols = []
    for comp, lat in zip(comps, comp_lats):
        cols.extend(comp.to_ambient(lat).columns())
    basis_L = lattice_from_columns(amb_L.ring, cols)
    if amb_L.ring == M.ambient.ring:
        return DieudonneModule(M.ambient, basis_L, check=False)
    emb = tower_embedding(M.ring.p, M.ring.m, amb_L.ring.m, M.ring.N)
    rows = [[emb.descend(a) for a in row] for row in basis_L.rows]
    return DieudonneModule(M.ambient, PadicMatrix(M.ring, rows), check=False)


def minimal_overmodule(M, route="fixpoint"):
    """The smallest minimal module containing M."""
    if route == "fixpoint":
        comps, mods, amb_L, embed = component_modules(M)
        lats = [_overmodule_component(c, m0.basis)
                for c, m0 in zip(comps, mods)]
        return _assemble(M, comps, lats, amb_L, embed)
    if route == "dual":
        return dual_module(minimal_submodule(dual_module(M),
                                             route="fixpoint"))
    if route == "skeleton":
        return dual_module(minimal_submodule(dual_module(M),
                                             route="skeleton"))
    raise InputError(f"unknown route {route!r}")


def minimal_submodule(M, route="dual"):
    """The biggest minimal module contained in M."""
    if route == "dual":
        return dual_module(minimal_overmodule(dual_module(M),
                                              route="fixpoint"))
    if route == "fixpoint":
        comps, mods, amb_L, embed = component_modules(M)
        lats = [_submodule_component(c, m0.basis)
                for c, m0 in zip(comps, mods)]
        return _assemble(M, comps, lats, amb_L, embed)
    if route == "skeleton":
        comps, mods, amb_L, embed = component_modules(M)
        lats = [_submodule_component_skeleton(c, m0.basis)
                for c, m0 in zip(comps, mods)]
        return _assemble(M, comps, lats, amb_L, embed)
    raise InputError(f"unknown route {route!r}")


# ---------------------------------------------------------------------------
# the skeleton route: Pi_0-closure of the dual skeleton lattice, dualized
# ---------------------------------------------------------------------------

class _DualComponent:
    """Just enough of the component interface for the dual sub-ambient."""

    def __init__(self, comp):
        a, b = comp.slope_pair
        sub = comp.sub_ambient
        F_dual = sub.F.inverse().transpose().mul_p_power(1)
        self.slope_pair = (b, a)
        self.sub_ambient = IsocrystalAmbient(sub.ring, F_dual)
        self.r = comp.r
        self.dim = comp.dim

    @property
    def n(self):
        return self.slope_pair[0] + self.slope_pair[1]

    @property
    def slope(self):
        a, b = self.slope_pair
        return Fraction(b, a + b)


def _submodule_component_skeleton(comp, lat):
    """Eq-4.1 route: P~ = (W_0[Pi_0] M~^t)^t inside the skeleton pairing."""
    dualc = _DualComponent(comp)
    lat_t = lat.inverse().transpose()
    skel = skeleton(comp)
    skel_t = skeleton(dualc)
    L = max(skel.field_degree, skel_t.field_degree,
            comp.sub_ambient.ring.m)

    def extend_to_L(mat, amb):
        if amb.ring.m == L:
            return mat
        _, emb = amb.extend(L)
        return emb(mat)

    vec_p = extend_to_L(skel.vectors, skel.ambient_L)
    vec_t = extend_to_L(skel_t.vectors, skel_t.ambient_L)
    amb_pL, emb_p = comp.sub_ambient.extend(L)
    amb_tL, emb_t = dualc.sub_ambient.extend(L)
    ringL = amb_pL.ring
    n = comp.n
    sub_emb = tower_embedding(ringL.p, n, L, ringL.N)
    subring = sub_emb.small

    # M~^t: skeleton lattice of the dual component lattice
    lam_t = _skeleton_lattice_at(vec_t, emb_t(lat_t), subring, sub_emb)
    # Pi_0 on the dual skeleton, as a W(F_{p^n})-matrix with a twist
    a_p, b_p = comp.slope_pair
    a_t, b_t = b_p, a_p  # the dual swaps the slope pair
    x, y = bezout_pair(a_t, b_t)
    pi_vec = amb_tL.apply_F(vec_t, y - x).mul_p_power(x)
    C = vec_t.inverse() * pi_vec
    C0 = _descend_matrix(C, sub_emb)
    twist = (y - x) % n
    # Q~ = sum_j Pi_0^j(M~^t): closure over the subring
    q_lat = lam_t
    for _ in range(n + 1):
        img = C0 * q_lat.twist(twist)
        new = lattice_from_columns(subring,
                                   q_lat.columns() + img.columns())
        if lattice_key(new) == lattice_key(q_lat):
            break
        q_lat = new
    else:
        raise InternalError("Pi_0 closure on the skeleton did not stabilize")
    # P~ = Q~^t under the skeleton pairing G = vec_t^T vec_p
    G = vec_t.transpose() * vec_p
    G0 = _descend_matrix(G, sub_emb)
    cond = q_lat.transpose() * G0
    p_lat = integral_solution_lattice(cond)
    # back to sub-ambient coordinates over W(F_{p^L})
    cols = (vec_p * _embed_matrix(p_lat, sub_emb)).columns()
    basisL = lattice_from_columns(ringL, cols)
    if ringL == comp.sub_ambient.ring:
        return lattice_canonical(basisL)
    emb_back = tower_embedding(ringL.p, comp.sub_ambient.ring.m, L, ringL.N)
    rows = [[emb_back.descend(a) for a in row] for row in basisL.rows]
    return lattice_canonical(PadicMatrix(comp.sub_ambient.ring, rows))


def _skeleton_lattice_at(vectors, lat_L, subring, sub_emb):
    X = lat_L.inverse() * vectors
    if sub_emb.index == 1:
        return lattice_canonical(integral_solution_lattice(X))
    Xr = restrict_scalars(X, sub_emb)
    return lattice_canonical(integral_solution_lattice(Xr))


def _descend_matrix(M, emb):
    return PadicMatrix(emb.small,
                       [[emb.descend(a) for a in row] for row in M.rows])


def _embed_matrix(M, emb):
    return PadicMatrix(emb.big,
                       [[emb.embed(a) for a in row] for row in M.rows])


# ---------------------------------------------------------------------------
# minimal isogeny data
# ---------------------------------------------------------------------------

class MinimalIsogenyData:
    __slots__ = ("M_min", "M_over", "length_sub", "length_over",
                 "annihilator_exponent")

    def __init__(self, M_min, M_over, length_sub, length_over,
                 annihilator_exponent):
        self.M_min = M_min
        self.M_over = M_over
        self.length_sub = length_sub
        self.length_over = length_over
        self.annihilator_exponent = annihilator_exponent

    @property
    def degree_exponent(self):
        """deg(minimal isogeny) = p^length_sub (covariant convention)."""
        return self.length_sub

    def to_json(self):
        return {
            "length_sub": self.length_sub,
            "length_over": self.length_over,
            "annihilator_exponent": self.annihilator_exponent,
            "isogeny_degree_exponent": self.degree_exponent,
        }


def minimal_isogeny(M):
    M_min = minimal_submodule(M)
    M_over = minimal_overmodule(M)
    length_sub = lattice_index_exponent(M.basis, M_min.basis)
    length_over = lattice_index_exponent(M_over.basis, M.basis)
    X = M_over.basis.inverse() * M.basis
    exps = smith_normal_form(X, need_U=False, need_V=False).exact_exponents()
    annihilator = max(exps) if exps else 0
    return MinimalIsogenyData(M_min, M_over, length_sub, length_over,
                              annihilator)


# ---------------------------------------------------------------------------
# equivariant transport (endomorphisms stabilize both endpoints)
# ---------------------------------------------------------------------------

class TransportCertificate:
    __slots__ = ("operator", "stabilizes_sub", "stabilizes_over")

    def __init__(self, operator, stabilizes_sub, stabilizes_over):
        self.operator = operator
        self.stabilizes_sub = stabilizes_sub
        self.stabilizes_over = stabilizes_over


def is_endomorphism(M, phi):
    """phi commutes with F and stabilizes M."""
    amb = M.ambient
    comm = phi * amb.F - amb.F * phi.twist(1)
    if not comm.is_zero_with_guard():
        return False
    return lattice_contains(M.basis, phi * M.basis)


def transport_endomorphism(M, phi):
    """Certify that an endomorphism of M stabilizes M_min and M^min.

    The operator itself is unchanged (it acts on the ambient); stability
    on both endpoints is forced by the theory, so a failure here is an
    internal error, not user error.
    """
    if not is_endomorphism(M, phi):
        raise InputError("phi is not an endomorphism of M")
    data = minimal_isogeny(M)
    ok_sub = lattice_contains(data.M_min.basis, phi * data.M_min.basis)
    ok_over = lattice_contains(data.M_over.basis, phi * data.M_over.basis)
    if not (ok_sub and ok_over):
        raise InternalError(
            "endomorphism fails to stabilize a minimal endpoint "
            "(contradicts equivariance; this is a bug)")
    return TransportCertificate(phi, ok_sub, ok_over)


# ---------------------------------------------------------------------------
# random F,V-stable lattices
# ---------------------------------------------------------------------------

def _residue_operator_matrix(M, op_matrix, twist):
    """F_p-matrix of a semilinear operator on M/pM in basis coordinates."""
    ring = M.ring
    B = M.basis
    op_B = B.inverse() * op_matrix * B.twist(twist)
    if not is_integral(op_B):
        raise InternalError("operator not integral on the lattice")
    sig = ring.residue_frobenius_matrix(twist % ring.m)
    h = M.h
    blocks = []
    for i in range(h):
        row = []
        for j in range(h):
            row.append((ring.residue_mult_matrix(op_B.rows[i][j].residue())
                        @ sig) % ring.p)
        blocks.append(row)
    return np.block(blocks)


def _modp_kernel(A, p):
    A = A.copy() % p
    rows, cols = A.shape
    r = 0
    pivots = []
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if A[i, c] % p:
                piv = i
                break
        if piv is None:
            continue
        A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r] = (A[r] * inv) % p
        for i in range(rows):
            if i != r and A[i, c] % p:
                A[i] = (A[i] - int(A[i, c]) * A[r]) % p
        pivots.append(c)
        r += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = np.zeros(cols, dtype=np.int64)
        v[fc] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-A[i, fc]) % p
        basis.append(v % p)
    return basis


def _up_move(M, rng):
    """M + W*(v/p) for v with Fv, Vv in pM (an elementary overlattice)."""
    amb = M.ambient
    ring = M.ring
    FM = _residue_operator_matrix(M, amb.F, 1)
    VM = _residue_operator_matrix(M, amb.V_matrix, -1)
    stacked = np.concatenate([FM, VM], axis=0)
    kern = _modp_kernel(stacked, ring.p)
    if not kern:
        return None
    coeffs = rng.choice(kern)
    if len(kern) > 1:
        extra = rng.choice(kern)
        scal = rng.randrange(ring.p)
        coeffs = (coeffs + scal * extra) % ring.p
    if not coeffs.any():
        coeffs = kern[0]
    m = ring.m
    y = [ring.element(tuple(int(coeffs[i * m + j]) for j in range(m)))
         for i in range(M.h)]
    v = M.basis.apply(y)
    col = [c.mul_p_power(-1) for c in v]
    new_basis = lattice_from_columns(
        ring, M.basis.columns() + [col])
    return DieudonneModule(amb, new_basis, check=False)


def random_fv_stable_lattice(ambient, rng, steps=4):
    """A random F,V-stable lattice obtained by a chain of elementary moves."""
    M = DieudonneModule(ambient, check=False)
    for _ in range(steps):
        kind = rng.randrange(3)
        if kind == 0:
            M2 = _up_move(M, rng)
            if M2 is not None:
                M = M2
        elif kind == 1:
            dual = dual_module(M)
            D2 = _up_move(dual, rng)
            if D2 is not None:
                back = dual_module(D2)
                M = DieudonneModule(ambient, back.basis, check=False)
        else:
            M = M.scaled(rng.choice([-1, 1]))
    return M


# ---------------------------------------------------------------------------
# exhaustive enumeration oracle (small indices)
# ---------------------------------------------------------------------------

def _stable_colength1_sublattices(M):
    """All F,V-stable sublattices M' with pM <= M' < M of W-length 1."""
    amb = M.ambient
    ring = M.ring
    p, m, h = ring.p, ring.m, M.h
    FM = _residue_operator_matrix(M, amb.F, 1)
    VM = _residue_operator_matrix(M, amb.V_matrix, -1)
    q = p ** m
    out = []
    # hyperplanes of k^h: kernels of nonzero functionals up to k-scaling
    for point in _projective_points(p, m, h, ring):
        U = _functional_kernel(point, p, m, h, ring)  # F_p-basis, dim m(h-1)
        if _subspace_stable(U, FM, p) and _subspace_stable(U, VM, p):
            cols = M.basis.mul_p_power(1).columns()
            for vec in U.T:
                y = [ring.element(tuple(int(vec[i * m + j])
                                        for j in range(m)))
                     for i in range(h)]
                cols.append(M.basis.apply(y))
            out.append(DieudonneModule(
                amb, lattice_from_columns(ring, cols), check=False))
    assert len({lattice_key(M2.basis) for M2 in out}) == len(out)
    _ = q
    return out


def _projective_points(p, m, h, ring):
    """Representatives of P^{h-1}(F_{p^m}): first nonzero coordinate 1."""
    q_elems = _field_elements(p, m)
    for lead in range(h):
        prefix = [(0,) * m] * lead + [(1,) + (0,) * (m - 1)]
        tail_len = h - lead - 1
        for tail in _tuples(q_elems, tail_len):
            yield prefix + list(tail)


def _field_elements(p, m):
    out = []
    for idx in range(p ** m):
        coeffs = []
        rem = idx
        for _ in range(m):
            rem, d = divmod(rem, p)
            coeffs.append(d)
        out.append(tuple(coeffs))
    return out


def _tuples(pool, k):
    if k == 0:
        yield ()
        return
    for rest in _tuples(pool, k - 1):
        for x in pool:
            yield (x,) + rest


def _functional_kernel(point, p, m, h, ring):
    """F_p-basis of the kernel of the k-functional x -> sum point_i * x_i."""
    rows = []
    for j in range(m):  # components of the k-valued functional
        row = np.zeros(h * m, dtype=np.int64)
        for i in range(h):
            mult = ring.residue_mult_matrix(point[i])
            row[i * m:(i + 1) * m] = mult[j] % p
        rows.append(row)
    A = np.array(rows, dtype=np.int64)
    kern = _modp_kernel(A, p)
    return np.array(kern, dtype=np.int64).T if kern else \
        np.zeros((h * m, 0), dtype=np.int64)


def _subspace_stable(U, op, p):
    if U.shape[1] == 0:
        return True
    img = (op @ U) % p
    aug = np.concatenate([U, img], axis=1)
    return _np_rank(aug, p) == _np_rank(U, p)


def _np_rank(A, p):
    A = A.copy() % p
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if A[i, c] % p:
                piv = i
                break
        if piv is None:
            continue
        A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r] = (A[r] * inv) % p
        for i in range(rows):
            if i != r and A[i, c] % p:
                A[i] = (A[i] - int(A[i, c]) * A[r]) % p
        r += 1
    return r


def enumerate_stable_sublattices(M, max_length):
    """All F,V-stable sublattices of W-colength <= max_length (with dups
    removed); includes M itself."""
    seen = {lattice_key(M.basis): (M, 0)}
    frontier = [(M, 0)]
    while frontier:
        cur, depth = frontier.pop()
        if depth == max_length:
            continue
        for sub in _stable_colength1_sublattices(cur):
            key = lattice_key(sub.basis)
            if key not in seen:
                seen[key] = (sub, depth + 1)
                frontier.append((sub, depth + 1))
    return [mod for mod, _ in seen.values()]


def enumerate_stable_overlattices(M, max_length):
    duals = enumerate_stable_sublattices(dual_module(M), max_length)
    out = []
    for D in duals:
        back = dual_module(D)
        out.append(DieudonneModule(M.ambient, back.basis, check=False))
    return out


def minimal_submodule_exhaustive(M, max_length):
    """Oracle: the biggest minimal submodule among colength<=max_length."""
    best = None
    for cand in enumerate_stable_sublattices(M, max_length):
        if is_minimal(cand).is_minimal:
            if best is None or lattice_contains(cand.basis, best.basis):
                best = cand
    return best


def minimal_overmodule_exhaustive(M, max_length):
    best = None
    for cand in enumerate_stable_overlattices(M, max_length):
        if is_minimal(cand).is_minimal:
            if best is None or lattice_contains(best.basis, cand.basis):
                best = cand
    return best


# ---------------------------------------------------------------------------
# polygons of a given height and the Manin-bound harness
# ---------------------------------------------------------------------------

def coprime_pairs_up_to(n_max):
    pairs = []
    for n in range(1, n_max + 1):
        for b in range(0, n + 1):
            a = n - b
            if (a, b) != (0, 0) and gcd(a, b) == 1:
                pairs.append((a, b))
    return pairs


def polygons_of_height(h):
    """All Newton polygons of total height h."""
    pairs = coprime_pairs_up_to(h)
    out = []

    def rec(idx, remaining, acc):
        if remaining == 0:
            out.append(NewtonPolygon(list(acc)))
            return
        if idx == len(pairs):
            return
        a, b = pairs[idx]
        n = a + b
        rec(idx + 1, remaining, acc)
        for r in range(1, remaining // n + 1):
            rec(idx + 1, remaining - r * n, acc + [(a, b, r)])

    rec(0, h, [])
    return out


def manin_bound_harness(h, sample_count, p=2, seed=0, polygons=None):
    """Sample random lattices per polygon; report empirical maxima.

    Rows: (h, polygon, samples, max_length_sub, max_annihilator,
    max_coindex).  Also checks on every sample the proof inequality
    coindex <= annihilator_exponent * dim End^0.
    """
    from .endo import endomorphism_ring  # local import: layering
    rng = random.Random(seed)
    ring = make_witt_ring(p, 1, default_precision(h))
    rows = []
    polys = polygons if polygons is not None else polygons_of_height(h)
    for poly in polys:
        amb = standard_ambient(poly, ring)
        max_sub = max_ann = max_ci = 0
        for _ in range(sample_count):
            M = random_fv_stable_lattice(amb, rng)
            data = minimal_isogeny(M)
            max_sub = max(max_sub, data.length_sub)
            max_ann = max(max_ann, data.annihilator_exponent)
            order = endomorphism_ring(M)
            ci = order.coindex_exponent
            max_ci = max(max_ci, ci)
            dim = order.dimension
            if ci > data.annihilator_exponent * dim:
                raise InternalError(
                    "coindex exceeds annihilator * dim bound "
                    f"on polygon {poly}")
        rows.append({
            "h": h,
            "polygon": "+".join(f"{r}x({a},{b})" for a, b, r in poly.parts),
            "samples": sample_count,
            "max_length_sub": max_sub,
            "max_annihilator": max_ann,
            "max_coindex": max_ci,
        })
    return rows


def harness_rows_to_csv(rows):
    header = ["h", "polygon", "samples", "max_length_sub",
              "max_annihilator", "max_coindex"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(row[k]) for k in header))
    return "\n".join(lines) + "\n"
