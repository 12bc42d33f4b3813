"""Endomorphism algebras and rings of Dieudonne modules.

The algebra structure is read off the Newton polygon: one factor
M_r(D_{b/n}) per slope part.  For a minimal module the endomorphism ring
IS the maximal order, realized by explicit ambient operators: the
component lattice is rewritten on a standard basis Pi_0^j f_i (the f_i
are skeleton vectors spanning M~/Pi_0 M~), on which the matrix units
E_ik, the uniformizer Pi (shift by one power of Pi_0) and the scalars
phi_c (c over a W(F_{p^n})-basis) have the textbook relations.  For a
general module M, End(M) = {phi in End(M^min) : phi(M) in M} is solved
as one Z_p-integrality system against the maximal-order basis.
"""

from math import gcd

from .errors import InputError, InternalError
from .isocrystal import (DieudonneModule, bezout_pair, isotypic_decomposition,
                         newton_polygon, skeleton, skeleton_lattice)
from .linalg import (PadicMatrix, integral_solution_lattice, is_integral,
                     lattice_equal, lattice_from_columns, lattice_key,
                     restrict_scalars, smith_normal_form)
from .minimal import component_modules, is_minimal, minimal_isogeny, \
    minimal_overmodule
from .wittring import lcm, make_witt_ring, tower_embedding


class AlgebraStructure:
    """End^0(M) = product of M_r(D) factors, D of invariant b/n."""

    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = tuple((int(r), int(n), int(b)) for r, n, b in factors)

    @property
    def dimension(self):
        return sum(r * r * n * n for r, n, _ in self.factors)

    def __eq__(self, other):
        return (isinstance(other, AlgebraStructure)
                and self.factors == other.factors)

    def __repr__(self):
        body = " x ".join(f"M_{r}(D_{b}/{n})" for r, n, b in self.factors)
        return f"AlgebraStructure({body})"

    def to_json(self):
        return [{"matrix_size": r, "degree": n, "invariant_num": b,
                 "invariant_den": n} for r, n, b in self.factors]


def endomorphism_algebra(M):
    poly = newton_polygon(M)
    return AlgebraStructure([(r, a + b, b) for a, b, r in poly.parts])


class EndoOrder:
    """A Z_p-order given by explicit ambient operators, with its maximal
    order and the co-index exponent stored alongside."""

    __slots__ = ("structure", "basis", "labels", "ambient_L", "module",
                 "maximal_basis", "coords_in_R", "coindex_exponent",
                 "_coordinatizer")

    def __init__(self, structure, basis, labels, ambient_L, module,
                 maximal_basis, coords_in_R, coindex_exponent, coordinatizer):
        self.structure = structure
        self.basis = basis
        self.labels = labels
        self.ambient_L = ambient_L
        self.module = module
        self.maximal_basis = maximal_basis
        self.coords_in_R = coords_in_R
        self.coindex_exponent = coindex_exponent
        self._coordinatizer = coordinatizer

    @property
    def dimension(self):
        return len(self.basis)

    def is_maximal(self):
        return self.coindex_exponent == 0


def coindex(order):
    """v_p of the index [R : O] (a Z_p-index)."""
    return order.coindex_exponent


def is_maximal(order):
    return order.is_maximal()


# ---------------------------------------------------------------------------
# maximal order of a minimal module
# ---------------------------------------------------------------------------

class _Coordinatizer:
    """Express ambient operators in a fixed operator basis over Z_p."""

    def __init__(self, ring_L, basis_ops, module_basis):
        self.ring_L = ring_L
        self.emb = tower_embedding(ring_L.p, 1, ring_L.m, ring_L.N) \
            if ring_L.m > 1 else None
        self.basis_ops = basis_ops
        cols = [self._vectorize(op) for op in basis_ops]
        self.opmat = PadicMatrix.from_columns(self._zp_ring(), cols)
        self.snf = smith_normal_form(self.opmat)
        if self.snf.rank < len(basis_ops):
            raise InternalError("operator basis is linearly dependent")
        self._Uinv = None
        self._exps = self.snf.exponents

    def _zp_ring(self):
        return make_witt_ring(self.ring_L.p, 1, self.ring_L.N)

    def _vectorize(self, op):
        entries = [op.rows[i][j] for i in range(op.nrows)
                   for j in range(op.ncols)]
        if self.emb is None:
            return [e for e in entries]
        out = []
        for e in entries:
            out.extend(self.emb.coordinates(e))
        return out

    def coordinates(self, op):
        """x with sum x_i basis_i = op; raises if op is outside the span."""
        return self.coordinates_matrix([op])

    def coordinates_matrix(self, ops):
        """One column of coordinates per operator (batched solve)."""
        zp = self._zp_ring()
        rhs = PadicMatrix.from_columns(zp,
                                       [self._vectorize(op) for op in ops])
        # solve opmat * X = rhs via the SNF: U opmat V = D
        y = self.snf.U * rhs
        r = len(self.basis_ops)
        x_rows = []
        for i in range(r):
            e = self.snf.exponents[i]
            x_rows.append([v.mul_p_power(-e) for v in y.rows[i]])
        for i in range(r, y.nrows):
            for v in y.rows[i]:
                if not v.is_effectively_zero():
                    raise InternalError("operator outside the algebra span")
        return self.snf.V * PadicMatrix(zp, x_rows)


def _component_standard_realization(comp, lat):
    """Columns Pi_0^j f_i realizing the component lattice on standard form.

    Returns (columns, ring_L, r, n, subring embed data); the f_i span
    M~/Pi_0 M~ over F_{p^n} per the minimality criterion.
    """
    a, b = comp.slope_pair
    n = a + b
    r = comp.r
    skel = skeleton(comp)
    ring_L = skel.ambient_L.ring
    amb_L, emb = comp.sub_ambient.extend(ring_L.m)
    lat_L = emb(lat)
    sub_emb = tower_embedding(ring_L.p, n, ring_L.m, ring_L.N)
    lam = skeleton_lattice(skel, lat_L)  # W_0-lattice in skeleton coords
    # Pi_0 in skeleton coordinates, descended to W_0 = W(F_{p^n})
    x, y = bezout_pair(a, b)
    pi_vec = amb_L.apply_F(skel.vectors, y - x).mul_p_power(x)
    C = skel.vectors.inverse() * pi_vec
    C0 = PadicMatrix(sub_emb.small,
                     [[sub_emb.descend(e) for e in row] for row in C.rows])
    twist = (y - x) % n if n > 1 else 0
    pi_lam = C0 * lam.twist(twist)
    # adapted basis: f_i are the SNF-adapted generators with divisor p
    X = lam.inverse() * pi_lam
    snf = smith_normal_form(X)
    exps = snf.exact_exponents()
    if sorted(exps) != [0] * (comp.dim - r) + [1] * r:
        raise InternalError(
            f"M~/Pi_0 M~ has divisors {exps}; expected {r} ones "
            "(is the module minimal?)")
    adapted = lam * snf.U.inverse()
    f_cols = [adapted.column(j) for j, e in enumerate(exps) if e == 1]
    # back to sub-ambient coordinates and spin out Pi_0 powers
    f_amb = [skel.vectors.apply([sub_emb.embed(v) for v in col])
             for col in f_cols]
    columns = []
    for f in f_amb:
        vec = PadicMatrix(ring_L, [[v] for v in f])
        for _ in range(n):
            columns.append([vec.rows[i][0] for i in range(comp.dim)])
            vec = amb_L.apply_F(vec, y - x).mul_p_power(x)
    return columns, ring_L, amb_L, r, n, sub_emb


def _component_order_ops(comp, lat):
    """Operator matrices of the maximal order on one component.

    Returns (ops, labels, ring_L): ops act in sub-ambient coordinates
    over W(F_{p^L}); labels are (i, k, j, t) for E_ik Pi^j phi_{c_t}.
    """
    a, b = comp.slope_pair
    n = a + b
    columns, ring_L, amb_L, r, n_, sub_emb = \
        _component_standard_realization(comp, lat)
    d = comp.dim
    S = PadicMatrix.from_columns(ring_L, columns)
    _, emb = comp.sub_ambient.extend(ring_L.m)
    lat_L = emb(lat)
    if not lattice_equal(S, lat_L):
        raise InternalError("standard realization does not span the lattice")
    Sinv = S.inverse()
    w = pow(b, -1, n) if n > 1 else 0
    # subring scalar basis c_t = s^t embedded into W(F_{p^L})
    c_basis = []
    cur = sub_emb.small.one()
    for _ in range(n):
        c_basis.append(sub_emb.embed(cur))
        if n > 1:
            cur = cur * sub_emb.small.gen()
    ops, labels = [], []
    for i in range(r):
        for k in range(r):
            for j in range(n):
                for t in range(n):
                    std = PadicMatrix.zeros(ring_L, d, d)
                    for jj in range(n):
                        # E_ik Pi^j phi_c on column (k, jj):
                        # scalar sigma0^{w jj}(c), then shift jj -> jj + j
                        scal = c_basis[t].frobenius(
                            (w * jj) % ring_L.m if n > 1 else 0)
                        target = jj + j
                        row_block = i * n
                        if target >= n:
                            scal = scal.mul_p_power(1)
                            target -= n
                        std.rows[row_block + target][k * n + jj] = scal
                    ops.append(S * std * Sinv)
                    labels.append((i, k, j, t))
    return ops, labels, ring_L


def maximal_order_basis(M, *, certify_minimal=True):
    """The maximal order End(M) of a minimal module M, as explicit ops."""
    if certify_minimal and not is_minimal(M).is_minimal:
        raise InputError("maximal_order_basis requires a minimal module")
    comps, mods, amb_L, embed = component_modules(M)
    per_comp = []
    degrees = [amb_L.ring.m]
    for comp, mod in zip(comps, mods):
        ops, labels, ring_L = _component_order_ops(comp, mod.basis)
        per_comp.append((comp, ops, labels, ring_L))
        degrees.append(ring_L.m)
    L_all = 1
    for dg in degrees:
        L_all = lcm(L_all, dg)
    ring_all = make_witt_ring(M.ring.p, L_all, M.ring.N)
    amb_all, embed_all = amb_L.extend(L_all)

    def lift_matrix(mat, ring_from):
        if ring_from.m == L_all:
            return mat
        emb = tower_embedding(ring_from.p, ring_from.m, L_all, ring_from.N)
        return PadicMatrix(ring_all,
                           [[emb.embed(e) for e in row] for row in mat.rows])

    # assemble ambient operators: full-basis conjugation of block ops
    full_cols = []
    for comp, _, _, _ in per_comp:
        full_cols.extend(lift_matrix(comp.component_basis,
                                     amb_L.ring).columns())
    full = PadicMatrix.from_columns(ring_all, full_cols)
    full_inv = full.inverse()
    basis_ops, labels = [], []
    offset = 0
    h = M.h
    for ci, (comp, ops, comp_labels, ring_L) in enumerate(per_comp):
        d = comp.dim
        for op, lab in zip(ops, comp_labels):
            op_L = lift_matrix(op, ring_L)
            big = PadicMatrix.zeros(ring_all, h, h)
            for i in range(d):
                for j in range(d):
                    big.rows[offset + i][offset + j] = op_L.rows[i][j]
            basis_ops.append(full * big * full_inv)
            labels.append((ci,) + lab)
        offset += d
    structure = endomorphism_algebra(M)
    coordinatizer = _Coordinatizer(ring_all, basis_ops, None)
    ident = PadicMatrix.identity(ring_all, len(basis_ops))
    return EndoOrder(structure, basis_ops, labels,
                     amb_all, M, basis_ops, ident, 0, coordinatizer)


# ---------------------------------------------------------------------------
# End(M) for arbitrary M
# ---------------------------------------------------------------------------

def endomorphism_ring(M):
    """End(M) = {phi in End(M^min) : phi(M) in M} with its co-index."""
    data = minimal_isogeny(M)
    R = maximal_order_basis(data.M_over, certify_minimal=False)
    ring_all = R.ambient_L.ring
    emb = None
    if ring_all.m != M.ring.m:
        emb = tower_embedding(M.ring.p, M.ring.m, ring_all.m, M.ring.N)
        basis_L = PadicMatrix(ring_all,
                              [[emb.embed(e) for e in row]
                               for row in M.basis.rows])
    else:
        basis_L = M.basis
    basis_inv = basis_L.inverse()
    cond_rows = []
    for op in R.basis:
        img = basis_inv * (op * basis_L)
        cond_rows.append([img.rows[i][j] for i in range(M.h)
                          for j in range(M.h)])
    X = PadicMatrix.from_columns(ring_all,
                                 cond_rows)  # (h^2) x D over ring_all
    if ring_all.m > 1:
        zp_emb = tower_embedding(ring_all.p, 1, ring_all.m, ring_all.N)
        X = restrict_scalars(X, zp_emb)
    coords = integral_solution_lattice(X)
    if not is_integral(coords):
        raise InternalError("End(M) not contained in the maximal order")
    exps = smith_normal_form(coords, need_U=False, need_V=False).exact_exponents()
    ci = sum(exps)
    sanity = coords.inverse().mul_p_power(data.annihilator_exponent)
    if not is_integral(sanity):
        raise InternalError(
            "p^N2 * End(M^min) not inside End(M): contradicts theory")
    ops = []
    for t in range(coords.ncols):
        acc = PadicMatrix.zeros(ring_all, M.h, M.h)
        for i, op in enumerate(R.basis):
            c = coords.rows[i][t]
            if c.is_zero_at_capacity():
                continue
            scal = ring_all.element(
                tuple(c.coeffs) + (0,) * (ring_all.m - 1), c.shift) \
                if ring_all.m > 1 else c
            acc = acc + op * scal
        ops.append(acc)
    return EndoOrder(R.structure, ops, None, R.ambient_L, M,
                     R.basis, coords, ci, R._coordinatizer)


# ---------------------------------------------------------------------------
# Lemma 2.1: co-index does not depend on the maximal order
# ---------------------------------------------------------------------------

def coindex_under_conjugation(order, g):
    """Recompute the co-index against the conjugated maximal order gRg^-1.

    Requires O inside gRg^-1 (checked); returns the recomputed exponent.
    """
    ginv = g.inverse()
    conj = [g * op * ginv for op in order.maximal_basis]
    ring_L = order.ambient_L.ring
    coordz = _Coordinatizer(ring_L, conj, None)
    coords = coordz.coordinates_matrix(order.basis)
    if not is_integral(coords):
        raise InputError("order not contained in the conjugated maximal "
                         "order; premise of the co-index test fails")
    return sum(smith_normal_form(coords, need_U=False,
                                 need_V=False).exact_exponents())


def random_order_unit(order, rng):
    """A unit of O of the form 1 + p*(random O-element): inverse in O."""
    ring_L = order.ambient_L.ring
    h = order.basis[0].nrows
    acc = PadicMatrix.identity(ring_L, h)
    for op in order.basis:
        c = rng.randrange(ring_L.p ** 3)
        if c:
            acc = acc + op * ring_L.from_int(c).mul_p_power(1)
    return acc


# ---------------------------------------------------------------------------
# reduced multiplication table and order reports
# ---------------------------------------------------------------------------

def multiplication_table(order):
    """Structure constants of the order basis over Z_p (as coordinates)."""
    coordz = _Coordinatizer(order.ambient_L.ring, order.basis, None)
    D = order.dimension
    table = []
    for u in range(D):
        row = []
        for v in range(D):
            prod = order.basis[u] * order.basis[v]
            x = coordz.coordinates(prod)
            if not is_integral(x):
                raise InternalError("order not closed under multiplication")
            row.append([x.rows[i][0] for i in range(D)])
        table.append(row)
    return table


def reduced_multiplication_table(order):
    table = multiplication_table(order)
    p = order.ambient_L.ring.p
    out = []
    for row in table:
        out_row = []
        for cell in row:
            out_row.append([int(c.coeffs[0] % p)
                            if not c.is_zero_at_capacity() and c.shift == 0
                            else 0 for c in cell])
        out.append(out_row)
    return out


def order_report(order, *, include_table=None):
    include_table = (order.dimension <= 16) if include_table is None \
        else include_table
    doc = {
        "algebra": order.structure.to_json(),
        "zp_dimension": order.dimension,
        "coindex_exponent": order.coindex_exponent,
        "maximal": order.is_maximal(),
        "field_degree": order.ambient_L.ring.m,
        "precision": order.ambient_L.ring.N,
    }
    if include_table:
        doc["mult_table_mod_p"] = reduced_multiplication_table(order)
    return doc
