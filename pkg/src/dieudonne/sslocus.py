"""The genus-2 supersingular family: superspecial base, P^1 of degree-p
neighbours, c_p profiles and the V_m stratification.

The base module M1 has rank 4 with F e_i = f_i, F f_i = -p e_i (so
F^2 = -p); this F_{p^2}-structure makes the superspecial points of the
family exactly the P^1(F_{p^2})-points.  A family point [a : b] (Teichmueller
coordinates, first nonzero coordinate normalized to 1) has module
M_x = M1 + W * (1/p)(a f1 + b f2).  Its endomorphism ring has co-index
exponent 0, 4 or 6 according to the least field of definition of [a : b]:
F_{p^2}, F_{p^4}, or beyond.
"""

import json
import random

from .endo import endomorphism_ring, maximal_order_basis
from .errors import AcceptanceFailure, InputError
from .isocrystal import (DieudonneModule, IsocrystalAmbient, newton_polygon,
                         NewtonPolygon)
from .linalg import (PadicMatrix, lattice_contains, lattice_equal,
                     lattice_from_columns)
from .minimal import is_minimal
from .wittring import GUARD_DIGITS, default_precision, make_witt_ring

import numpy as np


class SuperspecialBase:
    """Rank-4 base module with F^2 = -p, plus cached maximal order."""

    def __init__(self, ring, *, certify=True):
        if ring.m % 2:
            raise InputError("superspecial base needs an even field degree")
        F = PadicMatrix.zeros(ring, 4, 4)
        one = ring.one()
        minus_p = (-one).mul_p_power(1)
        # basis order (e1, f1, e2, f2)
        F.rows[1][0] = one        # F e1 = f1
        F.rows[0][1] = minus_p    # F f1 = -p e1
        F.rows[3][2] = one        # F e2 = f2
        F.rows[2][3] = minus_p    # F f2 = -p e2
        self.ring = ring
        self.ambient = IsocrystalAmbient(ring, F)
        self.module = DieudonneModule(self.ambient, check=False)
        self._maximal_order = None
        if certify:
            assert newton_polygon(self.module) == NewtonPolygon([(1, 1, 2)])
            cert = is_minimal(self.module)
            if not cert.is_minimal:
                raise AcceptanceFailure("superspecial base is not minimal")

    def maximal_order(self):
        if self._maximal_order is None:
            order = maximal_order_basis(self.module, certify_minimal=False)
            if order.dimension != 16 or order.coindex_exponent != 0:
                raise AcceptanceFailure(
                    "superspecial base does not have End = M_2(O_D)")
            self._maximal_order = order
        return self._maximal_order


def superspecial_base(ring, *, certify=True):
    return SuperspecialBase(ring, certify=certify)


class FamilyPoint:
    __slots__ = ("base", "coords", "field_level", "module")

    def __init__(self, base, coords, field_level, module):
        self.base = base
        self.coords = coords
        self.field_level = field_level
        self.module = module

    def coord_residues(self):
        return tuple(c.residue() for c in self.coords)


def _teichmuller_normalize(ring, a, b):
    """Normalize [a : b] so the first nonzero coordinate is 1."""
    if a.is_zero_at_capacity() and b.is_zero_at_capacity():
        raise InputError("projective coordinates cannot both vanish")
    if not a.is_zero_at_capacity():
        if a.valuation() != 0:
            raise InputError("coordinates must be Teichmueller units or 0")
        inv = a.inverse()
        return ring.one(), b * inv
    if b.valuation() != 0:
        raise InputError("coordinates must be Teichmueller units or 0")
    return ring.zero(), ring.one()


def _field_level(ring, residues):
    """Least k with all residues in F_{p^{2k}} (within the Conway tower)."""
    for k in range(1, ring.m // 2 + 1):
        if (2 * k) > ring.m or ring.m % (2 * k):
            continue
        e = ring.p ** (2 * k)
        if all(ring.residue_pow(res, e) == tuple(c % ring.p for c in res)
               for res in residues):
            return k
    raise InputError(
        f"coordinates not defined over any subfield F_p^(2k) of the "
        f"model field F_p^{ring.m}")


def point_module(base, coords):
    """M_x = M1 + W*(1/p)(a f1 + b f2) for normalized Teichmueller [a:b]."""
    ring = base.ring
    a, b = _teichmuller_normalize(ring, coords[0], coords[1])
    for c in (a, b):
        if not c.is_zero_at_capacity():
            q = ring.p ** ring.m
            if c ** q != c:
                raise InputError("coordinates must be Teichmueller lifts")
    level = _field_level(ring, [x.residue() for x in (a, b)])
    extra = [ring.zero(), a.mul_p_power(-1), ring.zero(), b.mul_p_power(-1)]
    basis = lattice_from_columns(
        ring, base.module.basis.columns() + [extra])
    M = DieudonneModule(base.ambient, basis, check=True)
    return FamilyPoint(base, (a, b), level, M)


def mod_pi_image_matrix(order, op_coords):
    """pi(op) in M_2(F_{p^2}) for an operator given by maximal-order coords.

    The maximal-order labels are (comp, i, k, j, t); reduction mod Pi kills
    j >= 1 and reads the residue of the W(F_{p^2})-scalar sum_t x_t c_t in
    the power basis.
    """
    p = order.ambient_L.ring.p
    entries = {}
    for idx, lab in enumerate(order.labels):
        _, i, k, j, t = lab
        if j != 0:
            continue
        c = op_coords[idx]
        val = 0 if c.is_zero_at_capacity() or c.shift > 0 \
            else c.coeffs[0] % p
        key = (i, k)
        cur = entries.setdefault(key, [0, 0])
        cur[t] = (cur[t] + val) % p
    return entries


def _pi_image_vector(order, op_coords):
    ent = mod_pi_image_matrix(order, op_coords)
    vec = []
    for i in range(2):
        for k in range(2):
            pair = ent.get((i, k), [0, 0])
            vec.extend(pair)
    return np.array(vec, dtype=np.int64)


def reduction_shape(order):
    """F_p-dimension of the mod-Pi image of the order in M_2(F_{p^2}),
    plus the image vectors for finer checks.  The order's coords_in_R
    columns are read against its own maximal-order labels."""
    vecs = []
    for t in range(order.coords_in_R.ncols):
        col = [order.coords_in_R.rows[i][t]
               for i in range(order.coords_in_R.nrows)]
        vecs.append(_pi_image_vector(order, col))
    mat = np.array(vecs, dtype=np.int64)
    p = order.ambient_L.ring.p
    return _rank_mod_p(mat, p), vecs


def _rank_mod_p(A, p):
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


_EXPECTED_SHAPE = {0: 8, 4: 4, 6: 2}


def c_p_profile(point, *, check_shape=True):
    """c_p(x) = v_p(ci(End(M_x))), with the ring-shape cross-check."""
    order = endomorphism_ring_of_point(point)
    ci = order.coindex_exponent
    if check_shape:
        dim, vecs = reduction_shape(order)
        expected = _EXPECTED_SHAPE.get(ci)
        if expected is None or dim != expected:
            raise AcceptanceFailure(
                f"mod-Pi image dimension {dim} does not match the expected "
                f"shape for c_p = {ci}")
        if ci == 4:
            _check_quadratic_subfield_shape(point, order, vecs)
        if ci == 6:
            _check_scalar_shape(point, vecs)
    return ci


def endomorphism_ring_of_point(point):
    """End(M_x), with End(M_1) as the reference maximal order.

    For non-superspecial points the biggest minimal submodule of M_x is
    M_1 (asserted against the fixpoint construction), and
    End(M_x) = {phi in End(M_1) : phi(M_x) in M_x}; the expensive maximal
    order is therefore built once per base.  Superspecial points are
    minimal and End is their own maximal order.
    """
    from .linalg import integral_solution_lattice, is_integral, \
        restrict_scalars
    from .linalg import smith_normal_form
    from .errors import InternalError
    from .wittring import tower_embedding
    from .endo import EndoOrder
    M = point.module
    base = point.base
    # M_1 <= M_x with W-length 1, so the biggest minimal submodule is
    # either M_x itself (superspecial) or exactly M_1
    if is_minimal(M).is_minimal:
        return maximal_order_basis(M, certify_minimal=False)
    if not lattice_contains(M.basis, base.module.basis):
        raise AcceptanceFailure(
            "family point does not contain the superspecial base")
    R = base.maximal_order()
    ring_all = R.ambient_L.ring
    if ring_all.m != M.ring.m:
        emb = tower_embedding(M.ring.p, M.ring.m, ring_all.m, M.ring.N)
        basis_L = PadicMatrix(ring_all, [[emb.embed(e) for e in row]
                                         for row in M.basis.rows])
    else:
        basis_L = M.basis
    basis_inv = basis_L.inverse()
    cond_cols = []
    for op in R.basis:
        img = basis_inv * (op * basis_L)
        cond_cols.append([img.rows[i][j] for i in range(M.h)
                          for j in range(M.h)])
    X = PadicMatrix.from_columns(ring_all, cond_cols)
    if ring_all.m > 1:
        zp_emb = tower_embedding(ring_all.p, 1, ring_all.m, ring_all.N)
        X = restrict_scalars(X, zp_emb)
    coords = integral_solution_lattice(X)
    if not is_integral(coords):
        raise InternalError("End(M_x) not inside End(M_1)")
    ci = sum(smith_normal_form(coords, need_U=False, need_V=False).exact_exponents())
    ops = []
    for t in range(coords.ncols):
        acc = PadicMatrix.zeros(ring_all, M.h, M.h)
        for i, op in enumerate(R.basis):
            c = coords.rows[i][t]
            if c.is_zero_at_capacity():
                continue
            scal = ring_all.element(tuple(c.coeffs) + (0,) * (ring_all.m - 1),
                                    c.shift) if ring_all.m > 1 else c
            acc = acc + op * scal
        ops.append(acc)
    return EndoOrder(R.structure, ops, R.labels, R.ambient_L, M, R.basis,
                     coords, ci, R._coordinatizer)


def _scalar_space(p):
    # pi(phi_c) for c in W(F_{p^2}) is the scalar matrix diag(cbar, cbar)
    vecs = []
    for t in range(2):
        vec = np.zeros(8, dtype=np.int64)
        vec[0 + t] = 1   # entry (0, 0), component t
        vec[6 + t] = 1   # entry (1, 1), component t
        vecs.append(vec)
    return vecs


def _check_quadratic_subfield_shape(point, order, vecs):
    """Prop-5.1 case (2): the image is F_{p^2}[xi], xi quadratic over
    F_{p^2} with irreducible minimal polynomial."""
    ring2 = make_witt_ring(point.base.ring.p, 2, 2)
    p = ring2.p
    mat = np.array(vecs, dtype=np.int64) % p
    scal = np.array(_scalar_space(p), dtype=np.int64)
    # find an image element outside the scalars
    xi = None
    for vec in vecs:
        stacked = np.concatenate([scal, vec.reshape(1, -1)], axis=0)
        if _rank_mod_p(stacked, p) == 3:
            xi = vec
            break
    if xi is None:
        raise AcceptanceFailure("case-2 image has no non-scalar generator")
    X = _vec_to_f4_matrix(xi)
    tr = _f2add(X[0][0], X[1][1], p)
    det = _f2sub(_f2mul(X[0][0], X[1][1], ring2),
                 _f2mul(X[0][1], X[1][0], ring2), p)
    # xi^2 - tr*xi + det = 0; irreducible over F_{p^2} iff no root there
    for root_idx in range(p * p):
        r0, r1 = root_idx % p, root_idx // p
        root = (r0, r1)
        val = _f2sub(_f2mul(root, root, ring2),
                     _f2add(_f2mul(tr, root, ring2),
                            tuple((-d) % p for d in det), p), p)
        if val == (0, 0):
            raise AcceptanceFailure(
                "case-2 generator has a reducible minimal polynomial")
    # and the image is exactly F_{p^2}[xi]: scalars + scalars*xi
    gens = list(scal)
    for s in scal:
        Xs = _vec_to_f4_matrix(s)
        prod = _f4_matmul(Xs, X, ring2)
        gens.append(_f4_matrix_to_vec(prod))
    gens = np.array(gens, dtype=np.int64)
    image = np.array(vecs, dtype=np.int64)
    both = np.concatenate([gens, image], axis=0)
    if _rank_mod_p(both, p) != 4:
        raise AcceptanceFailure("case-2 image is not F_{p^2}[xi]")


def _check_scalar_shape(point, vecs):
    p = point.base.ring.p
    scal = np.array(_scalar_space(p), dtype=np.int64)
    both = np.concatenate([scal, np.array(vecs, dtype=np.int64)], axis=0)
    if _rank_mod_p(both, p) != 2:
        raise AcceptanceFailure("case-3 image is not the scalar algebra")


def _vec_to_f4_matrix(vec):
    return [[(int(vec[0]), int(vec[1])), (int(vec[2]), int(vec[3]))],
            [(int(vec[4]), int(vec[5])), (int(vec[6]), int(vec[7]))]]


def _f4_matrix_to_vec(M):
    out = []
    for i in range(2):
        for k in range(2):
            out.extend(M[i][k])
    return np.array(out, dtype=np.int64)


def _f2mul(a, b, ring2):
    return ring2.residue_mul(a, b)


def _f2add(a, b, p):
    return tuple((x + y) % p for x, y in zip(a, b))


def _f2sub(a, b, p):
    return tuple((x - y) % p for x, y in zip(a, b))


def _f4_matmul(A, B, ring2):
    p = ring2.p
    out = [[(0, 0), (0, 0)], [(0, 0), (0, 0)]]
    for i in range(2):
        for j in range(2):
            acc = (0, 0)
            for k in range(2):
                acc = _f2add(acc, _f2mul(A[i][k], B[k][j], ring2), p)
            out[i][j] = acc
    return out


# ---------------------------------------------------------------------------
# stratification over P^1(F_{p^{2k}})
# ---------------------------------------------------------------------------

class StratumTable:
    def __init__(self, p, k_max, rows, counts, field_degree, precision):
        self.p = p
        self.k_max = k_max
        self.rows = rows  # (a_digits, b_digits, field_level, c_p)
        self.counts = counts  # |V_m| for m = 0..6
        self.field_degree = field_degree
        self.precision = precision

    def to_csv(self):
        lines = ["a,b,field_level,c_p"]
        for a, b, lvl, cp in self.rows:
            lines.append(f"{a},{b},{lvl},{cp}")
        return "\n".join(lines) + "\n"

    def summary(self):
        return {
            "p": self.p,
            "k_max": self.k_max,
            "points": len(self.rows),
            "counts": {f"V{m}": self.counts[m] for m in range(7)},
            "field_degree": self.field_degree,
            "precision": self.precision,
        }


def stratification(p, k_max, *, check_shape=True, precision=None,
                   model_degree=None, progress=None):
    """Enumerate P^1(F_{p^{2 k_max}}), compute c_p, assert the filtration.

    V_0 = ... = V_3, V_4 = V_5, V_6 = everything; |V_0| = p^2 + 1 and,
    when F_{p^4} lies inside the enumerated field, |V_4| = p^4 + 1.

    Points are labelled by powers of the canonical generator g of
    F_{p^{2 k_max}} (Conway tower), so reports computed over a larger
    model field (model_degree a multiple of 2 k_max) are comparable
    row by row.
    """
    if k_max < 1 or k_max > 4:
        raise InputError("k_max must be between 1 and 4")
    enum_deg = 2 * k_max
    m = model_degree if model_degree is not None else enum_deg
    if m % enum_deg:
        raise InputError("model_degree must be a multiple of 2*k_max")
    N = precision if precision is not None else \
        max(default_precision(4), 4 * m + 2 * GUARD_DIGITS + 4)
    ring = make_witt_ring(p, m, N)
    base = superspecial_base(ring)
    q = p ** enum_deg
    if m > 1:
        tau_top = ring.teichmuller((0, 1) + (0,) * (m - 2))
        g = tau_top ** ((p ** m - 1) // (q - 1))
    else:
        g = ring.one()
    rows = []
    pts = [("0", "1", (ring.zero(), ring.one())),
           ("1", "0", (ring.one(), ring.zero()))]
    cur = ring.one()
    for j in range(q - 1):
        pts.append(("1", f"g^{j}", (ring.one(), cur)))
        cur = cur * g
    for idx, (la, lb, ab) in enumerate(pts):
        point = point_module(base, ab)
        cp = c_p_profile(point, check_shape=check_shape)
        rows.append((la, lb, point.field_level, cp))
        if progress is not None:
            progress(idx + 1, len(pts))
    counts = [sum(1 for r in rows if r[3] <= mm) for mm in range(7)]
    _assert_filtration(p, k_max, rows, counts)
    return StratumTable(p, k_max, rows, counts, m, N)


def _assert_filtration(p, k_max, rows, counts):
    if not (counts[0] == counts[1] == counts[2] == counts[3]):
        raise AcceptanceFailure("V_0 = V_1 = V_2 = V_3 violated")
    if counts[4] != counts[5]:
        raise AcceptanceFailure("V_4 = V_5 violated")
    if counts[6] != len(rows):
        raise AcceptanceFailure("V_6 = everything violated")
    if counts[0] != p * p + 1:
        raise AcceptanceFailure(
            f"|V_0| = {counts[0]} but P^1(F_p^2) has {p * p + 1} points")
    expect_v4 = p ** 4 + 1 if k_max % 2 == 0 else p * p + 1
    if counts[4] != expect_v4:
        raise AcceptanceFailure(
            f"|V_4| = {counts[4]}, expected {expect_v4}")
    # c_p must be constant on Galois orbits / per field level
    by_level = {}
    for _, _, lvl, cp in rows:
        by_level.setdefault(lvl, set()).add(cp)
    for lvl, cps in by_level.items():
        if len(cps) != 1:
            raise AcceptanceFailure(
                f"c_p not constant on field level {lvl}: {sorted(cps)}")


def sample_level3_points(p, count, seed=0, *, check_shape=True,
                         precision=None, model_degree=None):
    """c_p values of `count` points of exact field level 3 (in F_{p^6}).

    Returns [(label, c_p)]; labels are generator powers in F_{p^6}, so
    runs over a larger model field are comparable.
    """
    m = model_degree if model_degree is not None else 6
    if m % 6:
        raise InputError("model_degree must be a multiple of 6")
    N = precision if precision is not None else \
        max(default_precision(4), 4 * m + 2 * GUARD_DIGITS + 4)
    ring = make_witt_ring(p, m, N)
    base = superspecial_base(ring)
    q2 = p * p
    rng = random.Random(seed)
    tau_top = ring.teichmuller((0, 1) + (0,) * (m - 2))
    g = tau_top ** ((p ** m - 1) // (p ** 6 - 1))
    out = []
    seen = set()
    while len(out) < count:
        j = rng.randrange(p ** 6 - 1)
        if j in seen:
            continue
        seen.add(j)
        y = g ** j
        # exact level 3: the residue must not lie in F_{p^2}
        if y.residue() == ring.residue_pow(y.residue(), q2):
            continue
        point = point_module(base, (ring.one(), y))
        assert point.field_level == 3
        out.append((f"g^{j}", c_p_profile(point, check_shape=check_shape)))
    return out
