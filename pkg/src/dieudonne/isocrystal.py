"""Dieudonne modules as F,V-stable lattices in a fixed ambient isocrystal.

The ambient is B(F_{p^m})^h with a sigma-semilinear operator F given by an
h x h matrix A_F: F(x) = A_F * sigma(x) on coordinate vectors, and
V = p F^{-1} (as sigma^{-1}-semilinear operator).  A module is a full-rank
lattice with F(M) and V(M) inside M.

Newton polygons are read off the linearization Phi = A_F sigma(A_F) ...
sigma^{m-1}(A_F) (the matrix of the linear operator F^m); isotypic
projectors come from slope factorization of its characteristic polynomial,
Hensel-lifted after extending the base field far enough that every slope
of Phi is an integer.  Skeletons solve the fixed-point equation
F^n v = p^b v levelwise, extending the base field on demand.
"""

from fractions import Fraction
from math import gcd

import numpy as np

from .errors import (ExtensionError, InputError, InternalError,
                     PrecisionError)
from .linalg import (PadicMatrix, integral_solution_lattice, is_integral,
                     kernel_with_expected_dim, lattice_canonical,
                     lattice_from_columns, lattice_key, restrict_scalars,
                     smith_normal_form)
from .wittring import (GUARD_DIGITS, default_precision, lcm, make_witt_ring,
                       tower_embedding)

FIELD_DEGREE_CAP = 12


class NewtonPolygon:
    """Multiset of coprime slope pairs: parts (a, b, r), sorted by slope."""

    def __init__(self, parts):
        cleaned = []
        for a, b, r in parts:
            if gcd(a, b) != 1 or (a, b) == (0, 0) or r < 1:
                raise InputError(f"bad polygon part {(a, b, r)}")
            cleaned.append((int(a), int(b), int(r)))
        cleaned.sort(key=lambda t: Fraction(t[1], t[0] + t[1]))
        if len({(a, b) for a, b, _ in cleaned}) != len(cleaned):
            raise InputError("duplicate slope pairs")
        self.parts = tuple(cleaned)

    @property
    def height(self):
        return sum(r * (a + b) for a, b, r in self.parts)

    def slopes(self):
        return [Fraction(b, a + b) for a, b, _ in self.parts]

    def dual(self):
        return NewtonPolygon([(b, a, r) for a, b, r in self.parts])

    def is_isoclinic(self):
        return len(self.parts) == 1

    def is_supersingular(self):
        return self.parts == ((1, 1, self.height // 2),)

    def __eq__(self, other):
        return isinstance(other, NewtonPolygon) and self.parts == other.parts

    def __hash__(self):
        return hash(self.parts)

    def __repr__(self):
        body = " + ".join(f"{r}*({a},{b})" for a, b, r in self.parts)
        return f"NewtonPolygon({body})"

    def to_json(self):
        return [[a, b, r] for a, b, r in self.parts]


class IsocrystalAmbient:
    """B(F_{p^m})^h with the semilinear operator F."""

    def __init__(self, ring, F):
        if F.nrows != F.ncols:
            raise InputError("F must be square")
        if F.ring != ring:
            raise InputError("F not over the given ring")
        self.ring = ring
        self.h = F.nrows
        self.F = F
        self._V = None
        self._cache = {}

    @property
    def V_matrix(self):
        if self._V is None:
            self._V = self.F.inverse().mul_p_power(1).twist(-1)
        return self._V

    def apply_F(self, M, k=1):
        """F^k applied to the columns of M (k may be negative)."""
        if k == 0:
            return M
        if k < 0:
            # F^{-1}(x) = sigma^{-1}(A_F^{-1} x); V = p F^{-1}
            out = M
            Finv = self.F.inverse()
            for _ in range(-k):
                out = (Finv * out).twist(-1)
            return out
        out = M
        for _ in range(k):
            out = self.F * out.twist(1)
        return out

    def apply_V(self, M, k=1):
        # V^k = p^k F^{-k} for every k (FV = VF = p)
        return self.apply_F(M, -k).mul_p_power(k)

    def linearization(self, k=None):
        """Matrix of the linear operator F^m (or of F^k for k | given)."""
        k = self.ring.m if k is None else k
        key = ("lin", k)
        if key not in self._cache:
            Phi = self.F
            for i in range(1, k):
                Phi = Phi * self.F.twist(i)
            self._cache[key] = Phi
        return self._cache[key]

    def extend(self, L):
        """The same ambient over W(F_{p^L}) plus the matrix embedding."""
        if L == self.ring.m:
            return self, lambda M: M
        if L % self.ring.m:
            raise InputError(f"{self.ring.m} does not divide {L}")
        if L > FIELD_DEGREE_CAP:
            raise ExtensionError(
                f"required field degree {L} exceeds the cap "
                f"{FIELD_DEGREE_CAP}", required_degree=L)
        key = ("ext", L)
        if key not in self._cache:
            emb = tower_embedding(self.ring.p, self.ring.m, L, self.ring.N)

            def embed_matrix(M):
                return PadicMatrix(
                    emb.big,
                    [[emb.embed(a) for a in row] for row in M.rows])

            amb = IsocrystalAmbient(emb.big, embed_matrix(self.F))
            self._cache[key] = (amb, embed_matrix)
        return self._cache[key]

    def __eq__(self, other):
        return (isinstance(other, IsocrystalAmbient)
                and self.ring == other.ring and self.F == other.F)

    def __hash__(self):
        return hash((self.ring, tuple(
            (a.coeffs, a.shift) for row in self.F.rows for a in row)))


class DieudonneModule:
    """Full-rank F,V-stable lattice, stored by a canonical basis matrix."""

    def __init__(self, ambient, basis=None, check=True):
        self.ambient = ambient
        if basis is None:
            basis = PadicMatrix.identity(ambient.ring, ambient.h)
        if basis.nrows != ambient.h or basis.ncols != ambient.h:
            raise InputError("basis must be h x h")
        self.basis = lattice_canonical(basis)
        if check:
            self.validate()

    @property
    def ring(self):
        return self.ambient.ring

    @property
    def h(self):
        return self.ambient.h

    def validate(self):
        F_img = self.ambient.apply_F(self.basis)
        if not is_integral(self.basis.inverse() * F_img):
            raise InputError("lattice is not F-stable")
        V_img = self.ambient.apply_V(self.basis)
        if not is_integral(self.basis.inverse() * V_img):
            raise InputError("lattice is not V-stable")

    def key(self):
        return lattice_key(self.basis)

    def scaled(self, k):
        return DieudonneModule(self.ambient, self.basis.mul_p_power(k),
                               check=False)

    def __eq__(self, other):
        return (isinstance(other, DieudonneModule)
                and self.ambient == other.ambient
                and self.basis == other.basis)

    def __repr__(self):
        return (f"DieudonneModule(h={self.h}, p={self.ring.p}, "
                f"m={self.ring.m})")


# ---------------------------------------------------------------------------
# standard modules, sums, duals
# ---------------------------------------------------------------------------

def standard_block_matrix(ring, a, b):
    """F-matrix of the standard block: F e_i = e_{i+b}, e_{i+n} = p e_i."""
    n = a + b
    F = PadicMatrix.zeros(ring, n, n)
    one = ring.one()
    for i in range(n):
        j = i + b
        F.rows[j % n][i] = one if j < n else one.mul_p_power(1)
    return F


def standard_module(a, b, r, ring):
    """The minimal module M((a,b))^r on its standard ambient."""
    if gcd(a, b) != 1 or (a, b) == (0, 0):
        raise InputError(f"(a, b) = {(a, b)} must be coprime and nonzero")
    if r < 1:
        raise InputError("multiplicity must be >= 1")
    block = standard_block_matrix(ring, a, b)
    F = PadicMatrix.block_diag([block] * r)
    return DieudonneModule(IsocrystalAmbient(ring, F), check=False)


def standard_ambient(polygon, ring):
    blocks = []
    for a, b, r in polygon.parts:
        blocks.extend([standard_block_matrix(ring, a, b)] * r)
    return IsocrystalAmbient(ring, PadicMatrix.block_diag(blocks))


def direct_sum(M1, M2):
    if M1.ring != M2.ring:
        raise InputError("direct sum requires equal (p, m, N)")
    if M2.h == 0:
        return M1
    if M1.h == 0:
        return M2
    F = PadicMatrix.block_diag([M1.ambient.F, M2.ambient.F])
    basis = PadicMatrix.block_diag([M1.basis, M2.basis])
    return DieudonneModule(IsocrystalAmbient(M1.ring, F), basis, check=False)


def extend_module(M, L):
    """The same module viewed over W(F_{p^L}) (m | L)."""
    amb_L, embed = M.ambient.extend(L)
    return DieudonneModule(amb_L, embed(M.basis), check=False)


def dual_module(M):
    """M^t = Hom_W(M, W) with F_{M^t} = (V_M)^*, in dual coordinates."""
    amb = M.ambient
    F_dual = amb.F.inverse().transpose().mul_p_power(1)
    dual_basis = M.basis.inverse().transpose()
    return DieudonneModule(IsocrystalAmbient(amb.ring, F_dual), dual_basis,
                           check=False)


# ---------------------------------------------------------------------------
# Newton polygon
# ---------------------------------------------------------------------------

def newton_polygon(M):
    """Slopes of M (an isogeny invariant: depends only on the ambient)."""
    amb = M.ambient if isinstance(M, DieudonneModule) else M
    key = "polygon"
    if key in amb._cache:
        return amb._cache[key]
    ring, h = amb.ring, amb.h
    if ring.N < ring.m * h + 2 * GUARD_DIGITS:
        raise PrecisionError(
            f"N = {ring.N} too small to separate slopes at m = {ring.m}, "
            f"h = {h}; need at least {ring.m * h + 2 * GUARD_DIGITS}")
    cp = amb.linearization().charpoly()
    points = []
    for i, c in enumerate(cp):
        if not c.is_zero_at_capacity():
            points.append((i, c.valuation()))
    if points[-1][0] != h or points[-1][1] != 0:
        raise InternalError("characteristic polynomial is not monic")
    if points[0][0] != 0:
        raise PrecisionError("det(F^m) vanishes at working precision")
    hull = _lower_hull(points)
    parts = {}
    for (i1, v1), (i2, v2) in zip(hull, hull[1:]):
        run, rise = i2 - i1, v1 - v2
        if rise % 1:
            raise InternalError("non-integer hull data")
        if rise == 0:
            lam = Fraction(0)
        else:
            lam = Fraction(rise, run * ring.m)
        if lam < 0 or lam > 1:
            raise InternalError(f"slope {lam} outside [0, 1]")
        b_, a_ = lam.numerator, lam.denominator - lam.numerator
        n_ = a_ + b_
        if run % n_:
            raise PrecisionError(
                f"slope {lam} multiplicity {run} not divisible by {n_}")
        parts[(a_, b_)] = run // n_
    poly = NewtonPolygon([(a, b, r) for (a, b), r in parts.items()])
    if poly.height != h:
        raise InternalError("polygon height mismatch")
    amb._cache[key] = poly
    return poly


def _lower_hull(points):
    """Lower convex hull, left to right; points are (i, valuation)."""
    hull = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            x3, y3 = pt
            if (y2 - y1) * (x3 - x2) >= (y3 - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


# ---------------------------------------------------------------------------
# slope factorization and isotypic projectors
# ---------------------------------------------------------------------------

def _poly_mul(a, b, ring):
    out = [ring.zero()] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x.is_zero_at_capacity():
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def _poly_divmod_monic(a, b, ring):
    """Divide by a monic polynomial b."""
    a = list(a)
    db = len(b) - 1
    q = [ring.zero()] * max(1, len(a) - db)
    while len(a) - 1 >= db and len(a) > 0:
        c = a[-1]
        da = len(a) - 1
        if not c.is_zero_at_capacity():
            q[da - db] = c
            for k in range(db + 1):
                a[da - db + k] = a[da - db + k] - c * b[k]
        a.pop()
    return q, a


def _residue_poly(coeffs, p):
    return [tuple(x % p for x in c.coeffs) if c.shift == 0 and not
            c.is_zero_at_capacity() else None for c in coeffs]


def _slope_split_unit_part(f, ring):
    """Split monic f (all slopes >= 0, unit-root part of degree d > 0)
    as (unit_root_factor, positive_slope_factor) by linear Hensel lifting."""
    h = len(f) - 1
    k = 0
    while f[k].valuation() is None or f[k].valuation() > 0:
        k += 1
    if k == 0:
        return f, [ring.one()]
    if k == h:
        return [ring.one()], f
    d = h - k
    # residue factorization: f mod p = g0 * x^k with g0(0) != 0
    g = [f[k + i] for i in range(d)] + [ring.one()]
    hpart = [ring.zero()] * k + [ring.one()]
    s, t = _residue_bezout(g, k, ring)
    one = ring.one()
    for level in range(1, ring.N):
        prod = _poly_mul(g, hpart, ring)
        err = [fi - pi for fi, pi in
               zip(f, prod + [ring.zero()] * (len(f) - len(prod)))]
        if all(e.is_zero_at_capacity() for e in err):
            break
        ebar = [e.mul_p_power(-level) for e in err]
        if any(e.shift > 0 for e in ebar):
            raise InternalError("Hensel error not divisible by p^level")
        # solve dg*h0 + g0*dh = ebar mod p with deg dg < d, deg dh < k
        et = _poly_mul(ebar, t, ring)
        q, dg = _poly_divmod_monic(et, g, ring)
        es = _poly_mul(ebar, s, ring)
        qh = _poly_mul(q, hpart, ring)
        dh = [x + y for x, y in zip(es + [ring.zero()] * len(qh),
                                    qh + [ring.zero()] * len(es))][:k]
        pl = one.mul_p_power(level)
        g = [a + b * pl for a, b in zip(g, dg + [ring.zero()] * len(g))]
        hpart = [a + b * pl
                 for a, b in zip(hpart, dh + [ring.zero()] * len(hpart))]
        g = [_truncate_mod_p(x, ring, level + 1) for x in g]
        hpart = [_truncate_mod_p(x, ring, level + 1) for x in hpart]
    return g, hpart


def _truncate_mod_p(x, ring, level):
    # keep Hensel iterates integral and tidy; they are exact mod p^level
    return x


def _residue_bezout(g, k, ring):
    """s, t with s*g + t*x^k = 1 over the residue field, lifted to W."""
    p = ring.p
    a = [_res(c, p) for c in g]
    b = [_zero_res(ring)] * k + [_one_res(ring)]
    # extended Euclid over F_{p^m}[X]
    r0, r1 = a, b
    s0, s1 = [_one_res(ring)], [_zero_res(ring)]
    t0, t1 = [_zero_res(ring)], [_one_res(ring)]
    while _res_deg(r1) >= 0:
        q, r = _res_divmod(r0, r1, ring)
        r0, r1 = r1, r
        s0, s1 = s1, _res_sub(s0, _res_mul(q, s1, ring), ring)
        t0, t1 = t1, _res_sub(t0, _res_mul(q, t1, ring), ring)
    if _res_deg(r0) != 0:
        raise InternalError("unit-root and nilpotent parts not coprime")
    inv = ring.residue_inv(r0[0])
    s = [_res_scal(c, inv, ring) for c in s0]
    t = [_res_scal(c, inv, ring) for c in t0]
    lift = lambda cs: [ring.element(c) for c in cs]
    return lift(s), lift(t)


def _res(c, p):
    if c.shift != 0:
        raise InternalError("non-integral coefficient in residue reduction")
    return tuple(v % p for v in c.coeffs)


def _zero_res(ring):
    return (0,) * ring.m


def _one_res(ring):
    return (1,) + (0,) * (ring.m - 1)


def _res_deg(a):
    for i in range(len(a) - 1, -1, -1):
        if any(a[i]):
            return i
    return -1


def _res_mul(a, b, ring):
    out = [_zero_res(ring)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not any(x):
            continue
        for j, y in enumerate(b):
            prod = ring.residue_mul(x, y)
            out[i + j] = tuple((u + v) % ring.p
                               for u, v in zip(out[i + j], prod))
    return out if out else [_zero_res(ring)]


def _res_sub(a, b, ring):
    n = max(len(a), len(b))
    a = a + [_zero_res(ring)] * (n - len(a))
    b = b + [_zero_res(ring)] * (n - len(b))
    return [tuple((u - v) % ring.p for u, v in zip(x, y))
            for x, y in zip(a, b)]


def _res_scal(a, c, ring):
    return ring.residue_mul(a, c)


def _res_divmod(a, b, ring):
    db = _res_deg(b)
    if db < 0:
        raise ZeroDivisionError
    inv = ring.residue_inv(b[db])
    r = list(a)
    q = [_zero_res(ring)] * max(1, len(a) - db)
    while _res_deg(r) >= db:
        dr = _res_deg(r)
        c = ring.residue_mul(r[dr], inv)
        q[dr - db] = c
        for k in range(db + 1):
            prod = ring.residue_mul(c, b[k])
            r[dr - db + k] = tuple((u - v) % ring.p
                                   for u, v in zip(r[dr - db + k], prod))
    return q, r


def slope_factorization(coeffs, ring, slopes):
    """Factor monic coeffs into {phi_slope: monic factor}, slopes integral.

    `slopes` is the sorted list of distinct integer Phi-slopes with
    multiplicities (run lengths) implied by the polynomial itself.
    """
    factors = {}
    rest = list(coeffs)
    for idx, v in enumerate(slopes):
        if idx == len(slopes) - 1:
            factors[v] = rest
            break
        h = len(rest) - 1
        scaled = [rest[i].mul_p_power(v * i - v * h) for i in range(h + 1)]
        if any(c.shift > 0 for c in scaled):
            raise InternalError("slope scaling produced denominators")
        g, hp = _slope_split_unit_part(scaled, ring)
        d = len(g) - 1
        factors[v] = [g[i].mul_p_power(v * (d - i)) for i in range(d + 1)]
        e = len(hp) - 1
        rest = [hp[i].mul_p_power(v * (e - i)) for i in range(e + 1)]
    return factors


class IsotypicComponent:
    """One slope part of the isocrystal.

    component_basis: h x d columns spanning N_lambda over the fraction
    field (of the extended ring).  sub_ambient: the induced d-dimensional
    ambient in component coordinates, so all lattice machinery applies
    recursively; a component lattice is a full-rank d x d basis there.
    """

    __slots__ = ("ambient", "slope_pair", "r", "projector", "component_basis",
                 "sub_ambient", "factor")

    def __init__(self, ambient, slope_pair, r, projector, component_basis,
                 sub_ambient, factor):
        self.ambient = ambient
        self.slope_pair = slope_pair  # (a, b) coprime
        self.r = r
        self.projector = projector
        self.component_basis = component_basis
        self.sub_ambient = sub_ambient
        self.factor = factor

    @property
    def n(self):
        return self.slope_pair[0] + self.slope_pair[1]

    @property
    def slope(self):
        a, b = self.slope_pair
        return Fraction(b, a + b)

    @property
    def dim(self):
        return self.r * self.n

    def to_ambient(self, coords):
        """Map component-coordinate columns to ambient coordinates."""
        return self.component_basis * coords

    def lattice_of(self, module_basis_L):
        """M_lambda = M cap N_lambda in component coordinates (d x d)."""
        if self.sub_ambient is self.ambient:
            return lattice_canonical(module_basis_L)
        X = module_basis_L.inverse() * self.component_basis
        return lattice_canonical(integral_solution_lattice(X))


def isotypic_decomposition(M):
    """Slope components and the lattices M_lambda = M cap N_lambda.

    Returns (components, lattices, ambient_L, embed): lattices are given in
    each component's own coordinates (full-rank d x d bases over the
    possibly field-extended ring); embed maps matrices of the original
    ring into the extended one.
    """
    amb = M.ambient
    poly = newton_polygon(M)
    components, amb_L, embed = _isotypic_components(amb, poly)
    basis_L = embed(M.basis)
    lattices = [comp.lattice_of(basis_L) for comp in components]
    return components, lattices, amb_L, embed


def _isotypic_components(amb, poly):
    key = "components"
    if key in amb._cache:
        return amb._cache[key]
    components = []
    if len(poly.parts) == 1:
        # isoclinic: no slope splitting, no field extension needed
        a, b, r = poly.parts[0]
        amb_L, embed = amb, lambda M: M
        ident = PadicMatrix.identity(amb.ring, amb.h)
        components.append(IsotypicComponent(
            amb, (a, b), r, ident, ident, amb, None))
    else:
        denoms = lcm_list([a + b for a, b, _ in poly.parts])
        L = lcm(amb.ring.m, denoms)
        amb_L, embed = amb.extend(L)
        ring = amb_L.ring
        Phi = amb_L.linearization()
        cp = Phi.charpoly()
        slope_exps = sorted({int(part_slope * L)
                             for part_slope in poly.slopes()})
        factors = slope_factorization(cp, ring, slope_exps)
        data = []
        all_cols = []
        for a, b, r in poly.parts:
            v = int(Fraction(b, a + b) * L)
            c_lambda = factors[v]
            q_lambda = [ring.one()]
            for v2 in slope_exps:
                if v2 != v:
                    q_lambda = _poly_mul(q_lambda, factors[v2], ring)
            u = _poly_bezout_inverse(q_lambda, c_lambda, ring)
            proj_poly = _poly_mul(u, q_lambda, ring)
            proj = _poly_eval_matrix(proj_poly, Phi, ring)
            comp_basis = _span_basis(proj, r * (a + b))
            data.append(((a, b), r, proj, comp_basis, c_lambda))
            all_cols.extend(comp_basis.columns())
        full = PadicMatrix.from_columns(ring, all_cols)
        F_full = full.inverse() * amb_L.F * full.twist(1)
        offset = 0
        for (ab, r, proj, comp_basis, c_lambda) in data:
            d = r * (ab[0] + ab[1])
            F_sub = PadicMatrix(ring, [row[offset:offset + d] for row in
                                       F_full.rows[offset:offset + d]])
            _check_block_isolation(F_full, offset, d)
            sub_amb = IsocrystalAmbient(ring, F_sub)
            components.append(IsotypicComponent(
                amb_L, ab, r, proj, comp_basis, sub_amb, c_lambda))
            offset += d
        _check_projectors(components, amb_L)
    amb._cache[key] = (components, amb_L, embed)
    return amb._cache[key]


def lcm_list(xs):
    out = 1
    for x in xs:
        out = lcm(out, x)
    return out


def _poly_bezout_inverse(q, c, ring):
    """u with u*q = 1 mod c, over the fraction field (extended Euclid)."""
    r0, r1 = list(c), list(q)
    s0, s1 = [ring.zero()], [ring.one()]

    def deg(a):
        for i in range(len(a) - 1, -1, -1):
            if not a[i].is_zero_at_capacity():
                return i
        return -1

    def divmod_frac(a, b):
        db = deg(b)
        inv = b[db].inverse()
        r = list(a)
        q_ = [ring.zero()] * max(1, len(a) - db)
        while deg(r) >= db and deg(r) >= 0:
            dr = deg(r)
            cquo = r[dr] * inv
            q_[dr - db] = cquo
            for k in range(db + 1):
                r[dr - db + k] = r[dr - db + k] - cquo * b[k]
            r = r[:dr]
        return q_, r

    while deg(r1) > 0:
        qq, rr = divmod_frac(r0, r1)
        r0, r1 = r1, rr
        s0, s1 = s1, _poly_sub(s0, _poly_mul(qq, s1, ring), ring)
    if deg(r1) != 0:
        raise PrecisionError("slope factors not coprime at this precision")
    inv = r1[0].inverse()
    u = [x * inv for x in s1]
    _, u = divmod_frac(u, c) if deg(u) >= deg(c) else (None, u)
    return u


def _poly_sub(a, b, ring):
    n = max(len(a), len(b))
    a = a + [ring.zero()] * (n - len(a))
    b = b + [ring.zero()] * (n - len(b))
    return [x - y for x, y in zip(a, b)]


def _poly_eval_matrix(coeffs, A, ring):
    n = A.nrows
    out = PadicMatrix.zeros(ring, n, n)
    for c in reversed(coeffs):
        out = out * A
        for i in range(n):
            out.rows[i][i] = out.rows[i][i] + c
    return out


def _span_basis(proj, dim):
    """A basis of the column span of the projector over the fraction field."""
    ring = proj.ring
    shift = proj.max_shift()
    work = proj.mul_p_power(shift)
    snf = smith_normal_form(work)
    Uinv = snf.U.inverse()
    cols = []
    for j, e in enumerate(snf.exponents):
        if e is not None:
            cols.append(Uinv.column(j))
    if len(cols) != dim:
        raise PrecisionError(
            f"projector rank {len(cols)} != expected {dim}")
    return PadicMatrix.from_columns(ring, cols)


def _check_block_isolation(F_full, offset, d):
    """F in full-component coordinates must preserve each component."""
    for i, row in enumerate(F_full.rows):
        for j in range(offset, offset + d):
            inside = offset <= i < offset + d
            if not inside and not row[j].is_effectively_zero(GUARD_DIGITS):
                raise InternalError(
                    "F does not preserve an isotypic component")


def _check_projectors(components, amb_L):
    ring = amb_L.ring
    total = PadicMatrix.zeros(ring, amb_L.h, amb_L.h)
    for comp in components:
        P = comp.projector
        if not (P * P - P).is_zero_with_guard():
            raise PrecisionError("projector fails idempotence check")
        total = total + P
    ident = PadicMatrix.identity(ring, amb_L.h)
    if not (total - ident).is_zero_with_guard():
        raise PrecisionError("projectors do not sum to the identity")


# ---------------------------------------------------------------------------
# skeletons: fixed points of T = p^{-b} F^n
# ---------------------------------------------------------------------------

class SkeletonBasis:
    """Exact solutions of F^n v = p^b v spanning an isoclinic component.

    vectors: d columns over W(F_{p^L}) in the coordinates of the ambient
    the skeleton was solved on (a component sub-ambient, usually); their
    B(F_{p^n})-span is the skeleton.  field_degree records the L that was
    needed.
    """

    __slots__ = ("slope_pair", "field_degree", "vectors", "subring",
                 "ambient_L", "embed")

    def __init__(self, slope_pair, field_degree, vectors, subring, ambient_L,
                 embed):
        self.slope_pair = slope_pair
        self.field_degree = field_degree
        self.vectors = vectors
        self.subring = subring
        self.ambient_L = ambient_L
        self.embed = embed

    @property
    def n(self):
        return self.slope_pair[0] + self.slope_pair[1]


class ModpSolver:
    """Reusable F_p-linear solver for (Id - Abar o sigma^n) delta = rhs."""

    def __init__(self, ring, A, n_twist):
        self.ring = ring
        self.p = ring.p
        d = A.nrows
        m = ring.m
        sig = ring.residue_frobenius_matrix(n_twist % m)
        blocks = []
        for i in range(d):
            row_blocks = []
            for j in range(d):
                entry = A.rows[i][j]
                if entry.shift > 0:
                    raise InternalError("non-integral entry in residue solve")
                mult = ring.residue_mult_matrix(entry.residue())
                row_blocks.append((mult @ sig) % self.p)
            blocks.append(row_blocks)
        big = np.block(blocks) if d else np.zeros((0, 0), dtype=np.int64)
        self.mat = (np.eye(d * m, dtype=np.int64) - big) % self.p
        self.d = d
        self.m = m
        self._echelon()

    def _echelon(self):
        p = self.p
        A = self.mat.copy()
        n = A.shape[0]
        self.perm = []
        r = 0
        pivots = []
        transform = np.eye(n, dtype=np.int64)
        for c in range(n):
            rows = [i for i in range(r, n) if A[i, c] % p]
            if not rows:
                continue
            i = rows[0]
            A[[r, i]] = A[[i, r]]
            transform[[r, i]] = transform[[i, r]]
            inv = pow(int(A[r, c]), -1, p)
            A[r] = (A[r] * inv) % p
            transform[r] = (transform[r] * inv) % p
            for i2 in range(n):
                if i2 != r and A[i2, c] % p:
                    f = int(A[i2, c])
                    A[i2] = (A[i2] - f * A[r]) % p
                    transform[i2] = (transform[i2] - f * transform[r]) % p
            pivots.append(c)
            r += 1
        self.red = A
        self.transform = transform
        self.pivots = pivots
        self.rank = r

    def kernel_basis(self):
        p, n = self.p, self.mat.shape[0]
        free = [c for c in range(n) if c not in self.pivots]
        basis = []
        for fc in free:
            v = np.zeros(n, dtype=np.int64)
            v[fc] = 1
            for r, pc in enumerate(self.pivots):
                v[pc] = (-self.red[r, fc]) % p
            basis.append(v % p)
        return basis

    def solve(self, rhs):
        """One solution of mat @ x = rhs (free variables 0), or None."""
        p = self.p
        rhs = np.asarray(rhs, dtype=np.int64) % p
        y = (self.transform @ rhs) % p
        n = self.mat.shape[0]
        if any(y[r] % p for r in range(self.rank, n)):
            return None
        x = np.zeros(n, dtype=np.int64)
        for r, pc in enumerate(self.pivots):
            x[pc] = y[r] % p
        if ((self.mat @ x - rhs) % p).any():
            raise InternalError("mod-p solver inconsistency")
        return x


def _vec_to_residue(ring, vec):
    out = []
    for x in vec:
        if x.shift > 0:
            raise InternalError("non-integral vector in residue step")
        out.extend(v % ring.p for v in x.coeffs)
    return np.array(out, dtype=np.int64)


def _residue_to_vec(ring, arr, d):
    m = ring.m
    out = []
    for i in range(d):
        coeffs = tuple(int(arr[i * m + j]) % ring.p for j in range(m))
        out.append(ring.element(coeffs))
    return out


def skeleton(component, *, degree_cap=FIELD_DEGREE_CAP):
    """Solve F^n v = p^b v on a component sub-ambient; auto-extends L.

    Returns a SkeletonBasis (vectors in sub-ambient coordinates) whose
    columns exactly satisfy the skeleton equation and span the component
    over the fraction field.  Extends the base field in steps of
    lcm(m, n) until the fixed space is full, up to the degree cap.
    """
    amb = component.sub_ambient
    n = component.n
    L = lcm(amb.ring.m, n)
    last_exc = None
    while L <= degree_cap:
        try:
            return _skeleton_at_degree(component, L)
        except (_SkeletonRetry, PrecisionError) as exc:
            last_exc = exc
            L += lcm(amb.ring.m, n)
    raise ExtensionError(
        f"skeleton for slope {component.slope} not solvable within field "
        f"degree cap {degree_cap} (last: {last_exc})",
        required_degree=L)


class _SkeletonRetry(Exception):
    pass


def _skeleton_at_degree(component, L):
    a, b = component.slope_pair
    n = a + b
    d = component.dim
    amb_L, embed = component.sub_ambient.extend(L)
    ring = amb_L.ring
    # T = p^{-b} F^n, a sigma^n-semilinear automorphism of slope 0
    Tc = amb_L.linearization(n).mul_p_power(-b)
    # find a lattice with T Lambda = Lambda (closure under T, T^{-1})
    lat = PadicMatrix.identity(ring, d)
    for _ in range(4 * d * ring.N):
        img_f = Tc * lat.twist(n)
        img_b = (Tc.inverse() * lat).twist(-n)
        new = lattice_from_columns(
            ring, lat.columns() + img_f.columns() + img_b.columns())
        if lattice_key(new) == lattice_key(lat):
            break
        lat = new
    else:
        raise InternalError("no T-stable lattice found (unexpected)")
    # in lat-coordinates T is integral with integral inverse
    Tl = lat.inverse() * Tc * lat.twist(n)
    if not is_integral(Tl):
        raise InternalError("T not integral on its stable lattice")
    solver = ModpSolver(ring, Tl, n)
    kern = solver.kernel_basis()
    if len(kern) > n * d:
        raise InternalError("fixed space larger than theory allows")
    if len(kern) < n * d:
        raise _SkeletonRetry(
            f"fixed space has F_p-dimension {len(kern)} < {n * d} at L={L}")
    subring = make_witt_ring(ring.p, n, ring.N)
    sub_emb = tower_embedding(ring.p, n, L, ring.N)
    chosen = _greedy_subfield_basis(ring, kern, d, n, sub_emb)
    vectors = [_lift_fixed_vector(ring, Tl, n, v0, solver, d)
               for v0 in chosen]
    V = PadicMatrix.from_columns(ring, vectors)
    sub_vectors = lat * V
    resid = (amb_L.linearization(n) * sub_vectors.twist(n)
             ).mul_p_power(-b) - sub_vectors
    if not resid.is_zero_with_guard():
        raise _SkeletonRetry("lifted vectors fail the skeleton equation")
    return SkeletonBasis((a, b), L, sub_vectors, subring, amb_L, embed)


def _greedy_subfield_basis(ring, kern, d, n, sub_emb):
    """Pick d kernel vectors that are independent over F_{p^n}."""
    p, m = ring.p, ring.m
    gen_res = sub_emb.embed(sub_emb.small.gen()).residue() if n > 1 else None
    span = []
    chosen = []
    mat_rows = []
    for cand in kern:
        vecs = [cand]
        if gen_res is not None:
            # multiply by powers of the embedded F_{p^n} generator
            velem = _residue_to_vec(ring, cand, len(cand) // m)
            cur = velem
            for _ in range(n - 1):
                cur = [x * ring.element(gen_res) for x in cur]
                vecs.append(_vec_to_residue(ring, cur))
        new_rows = mat_rows + [v % p for v in vecs]
        rank = _modp_rank(np.array(new_rows, dtype=np.int64), p)
        if rank == len(new_rows):
            mat_rows = new_rows
            chosen.append(cand)
            if len(chosen) == d:
                return chosen
    raise _SkeletonRetry(
        f"could not select {d} F_(p^n)-independent fixed vectors")


def _modp_rank(A, p):
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
        if r == rows:
            break
    return r


def _lift_fixed_vector(ring, Tl, n, v0, solver, d):
    """Levelwise lift of a mod-p fixed vector to a fixed vector.

    Converges to exactness within the guard band: digits above
    N - GUARD_DIGITS may carry division junk and are not corrected.
    """
    x = _residue_to_vec(ring, v0, d)
    one = ring.one()
    for level in range(1, ring.N - GUARD_DIGITS + 1):
        Tx = [_dotv(Tl.rows[i], [y.frobenius(n) for y in x], ring)
              for i in range(d)]
        resid = [tx - xi for tx, xi in zip(Tx, x)]
        if all(r.is_effectively_zero(GUARD_DIGITS) for r in resid):
            return x
        scaled = [r.mul_p_power(-level) for r in resid]
        if any(s.shift > 0 for s in scaled):
            raise InternalError("lift residual not divisible by p^level")
        rhs = _vec_to_residue(ring, scaled)
        delta = solver.solve(rhs % ring.p)
        if delta is None:
            raise _SkeletonRetry(f"lifting obstruction at level {level}")
        dvec = _residue_to_vec(ring, delta, d)
        pl = one.mul_p_power(level)
        x = [xi + di * pl for xi, di in zip(x, dvec)]
    Tx = [_dotv(Tl.rows[i], [y.frobenius(n) for y in x], ring)
          for i in range(d)]
    if not all((tx - xi).is_effectively_zero(GUARD_DIGITS)
               for tx, xi in zip(Tx, x)):
        raise _SkeletonRetry("lift did not converge within the window")
    return x


def _dotv(row, vec, ring):
    acc = ring.zero()
    for a, b in zip(row, vec):
        acc = acc + a * b
    return acc


def skeleton_lattice(skel, lattice_basis_L):
    """M~ = (lattice cap skeleton) as a W(F_{p^n})-lattice.

    lattice_basis_L: component lattice over the skeleton's extended ring.
    Returns a d x d matrix over W(F_{p^n}): columns are skeleton
    coordinates (w.r.t. skel.vectors) of a basis of M~; the skeleton-span
    map is y |-> skel.vectors * embed(y).
    """
    ring = skel.ambient_L.ring
    if skel.n == ring.m:
        X = lattice_basis_L.inverse() * skel.vectors
        return lattice_canonical(integral_solution_lattice(X))
    X = lattice_basis_L.inverse() * skel.vectors
    emb = tower_embedding(ring.p, skel.n, ring.m, ring.N)
    Xr = restrict_scalars(X, emb)
    return lattice_canonical(integral_solution_lattice(Xr))


# ---------------------------------------------------------------------------
# Pi_0 operator
# ---------------------------------------------------------------------------

def bezout_pair(a, b):
    """Canonical (x, y) with x*a + y*b = 1; x minimal nonnegative."""
    if a == 0:
        return 0, 1
    if b == 0:
        return 1, 0
    g, x, y = _ext_gcd(a, b)
    if g != 1:
        raise InputError(f"({a}, {b}) not coprime")
    # normalize: x in [0, b)
    t = x // b
    x -= t * b
    y += t * a
    return x, y


def _ext_gcd(a, b):
    if b == 0:
        return a, 1, 0
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def pi0_apply(component, vec_matrix, bez=None):
    """Apply Pi_0 = F^y V^x = p^x F^{y-x} in component coordinates."""
    a, b = component.slope_pair
    x, y = bez if bez is not None else bezout_pair(a, b)
    return component.sub_ambient.apply_F(vec_matrix, y - x).mul_p_power(x)


# patched onto PadicMatrix here to keep linalg free of policy:
def _matrix_is_zero_with_guard(self, margin=GUARD_DIGITS):
    """Zero up to guard-band junk in every entry."""
    for row in self.rows:
        for a in row:
            if a.is_zero_at_capacity():
                if a.window < GUARD_DIGITS:
                    raise PrecisionError("zero test in the guard band")
                continue
            if not a.is_effectively_zero(margin):
                return False
    return True


PadicMatrix.is_zero_with_guard = _matrix_is_zero_with_guard
