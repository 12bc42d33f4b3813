"""Exact linear algebra over truncated Witt rings and their fraction fields.

Matrices hold WittElement entries sharing one ring.  Lattices are spanned by
matrix columns.  Everything that has to decide "is this zero / integral"
goes through the guard-band policy: exact answers inside the window, a
PrecisionError when a decision falls within GUARD_DIGITS of the top.
"""

from .errors import (ContainmentError, InputError, InternalError,
                     PrecisionError, RankError)
from .wittring import GUARD_DIGITS


class PadicMatrix:
    """Dense matrix over one WittRing (entries may carry p-power shifts)."""

    __slots__ = ("ring", "nrows", "ncols", "rows")

    def __init__(self, ring, rows):
        self.ring = ring
        self.rows = [list(r) for r in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        for r in self.rows:
            if len(r) != self.ncols:
                raise InputError("ragged matrix")

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zeros(ring, nrows, ncols):
        z = ring.zero()
        return PadicMatrix(ring, [[z] * ncols for _ in range(nrows)])

    @staticmethod
    def identity(ring, n):
        M = PadicMatrix.zeros(ring, n, n)
        one = ring.one()
        for i in range(n):
            M.rows[i][i] = one
        return M

    @staticmethod
    def from_int_rows(ring, int_rows):
        return PadicMatrix(
            ring, [[ring.from_int(v) for v in row] for row in int_rows])

    @staticmethod
    def diag(ring, entries):
        n = len(entries)
        M = PadicMatrix.zeros(ring, n, n)
        for i, e in enumerate(entries):
            M.rows[i][i] = e
        return M

    @staticmethod
    def block_diag(blocks):
        ring = blocks[0].ring
        n = sum(b.nrows for b in blocks)
        c = sum(b.ncols for b in blocks)
        M = PadicMatrix.zeros(ring, n, c)
        r0 = c0 = 0
        for b in blocks:
            if b.ring != ring:
                raise InputError("mixed rings in block_diag")
            for i in range(b.nrows):
                for j in range(b.ncols):
                    M.rows[r0 + i][c0 + j] = b.rows[i][j]
            r0 += b.nrows
            c0 += b.ncols
        return M

    @staticmethod
    def from_columns(ring, cols):
        nrows = len(cols[0])
        return PadicMatrix(
            ring, [[cols[j][i] for j in range(len(cols))]
                   for i in range(nrows)])

    def copy(self):
        return PadicMatrix(self.ring, [list(r) for r in self.rows])

    def column(self, j):
        return [self.rows[i][j] for i in range(self.nrows)]

    def columns(self):
        return [self.column(j) for j in range(self.ncols)]

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        self._check(other)
        return PadicMatrix(self.ring,
                           [[a + b for a, b in zip(ra, rb)]
                            for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other):
        self._check(other)
        return PadicMatrix(self.ring,
                           [[a - b for a, b in zip(ra, rb)]
                            for ra, rb in zip(self.rows, other.rows)])

    def __neg__(self):
        return PadicMatrix(self.ring,
                           [[-a for a in r] for r in self.rows])

    def __mul__(self, other):
        if isinstance(other, PadicMatrix):
            if self.ncols != other.nrows or self.ring != other.ring:
                raise InputError("matmul dimension/ring mismatch")
            bcols = list(zip(*other.rows))
            out = []
            for row in self.rows:
                out.append([_dot(row, col) for col in bcols])
            return PadicMatrix(self.ring, out)
        return PadicMatrix(self.ring,
                           [[a * other for a in r] for r in self.rows])

    def apply(self, vec):
        if len(vec) != self.ncols:
            raise InputError("vector length mismatch")
        return [_dot(row, vec) for row in self.rows]

    def mul_p_power(self, k):
        return PadicMatrix(self.ring,
                           [[a.mul_p_power(k) for a in r] for r in self.rows])

    def twist(self, k=1):
        """Entrywise sigma^k."""
        return PadicMatrix(self.ring,
                           [[a.frobenius(k) for a in r] for r in self.rows])

    def transpose(self):
        return PadicMatrix(self.ring, [list(r) for r in zip(*self.rows)])

    def max_shift(self):
        return max((a.shift for r in self.rows for a in r), default=0)

    def is_zero_at_capacity(self):
        return all(a.is_zero_at_capacity() for r in self.rows for a in r)

    def __eq__(self, other):
        return (isinstance(other, PadicMatrix) and self.ring == other.ring
                and self.rows == other.rows)

    def __repr__(self):
        body = "\n  ".join(
            "[" + ", ".join(repr(a) for a in r) + "]" for r in self.rows)
        return f"PadicMatrix({self.nrows}x{self.ncols},\n  {body})"

    def _check(self, other):
        if (self.nrows, self.ncols) != (other.nrows, other.ncols) \
                or self.ring != other.ring:
            raise InputError("matrix shape/ring mismatch")

    # -- inverse over the fraction field ----------------------------------

    def inverse(self):
        if self.nrows != self.ncols:
            raise InputError("inverse of non-square matrix")
        n = self.nrows
        ring = self.ring
        work = [list(r) for r in self.rows]
        inv = [[ring.one() if i == j else ring.zero() for j in range(n)]
               for i in range(n)]
        for col in range(n):
            piv_row, piv_val = None, None
            for r in range(col, n):
                if work[r][col].is_effectively_zero():
                    continue
                v = work[r][col].valuation()
                if piv_val is None or v < piv_val:
                    piv_row, piv_val = r, v
            if piv_row is None:
                raise RankError(f"matrix singular at working precision "
                                f"(column {col})")
            work[col], work[piv_row] = work[piv_row], work[col]
            inv[col], inv[piv_row] = inv[piv_row], inv[col]
            scale = work[col][col].inverse()
            work[col] = [a * scale for a in work[col]]
            inv[col] = [a * scale for a in inv[col]]
            for r in range(n):
                if r != col:
                    f = work[r][col]
                    if not f.is_zero_at_capacity():
                        work[r] = [a - f * b
                                   for a, b in zip(work[r], work[col])]
                        inv[r] = [a - f * b
                                  for a, b in zip(inv[r], inv[col])]
        return PadicMatrix(ring, inv)

    # -- characteristic polynomial (Berkowitz, division-free) --------------

    def charpoly(self):
        """Coefficients of det(X*I - A), ascending degree, length n+1."""
        if self.nrows != self.ncols:
            raise InputError("charpoly of non-square matrix")
        ring = self.ring
        n = self.nrows
        one, zero = ring.one(), ring.zero()
        poly = [one]  # descending-degree coefficients, deg 0 so far
        for k in range(n):
            a_kk = self.rows[k][k]
            row = self.rows[k][:k]
            col = [self.rows[i][k] for i in range(k)]
            toep = [one, -a_kk]
            v = col
            for step in range(k):
                toep.append(-_dot(row, v))
                if step < k - 1:
                    v = [_dot(self.rows[i][:k], v) for i in range(k)]
            new = [zero] * (len(poly) + 1)
            for i, c in enumerate(poly):
                if c.is_zero_at_capacity():
                    continue
                for j, t in enumerate(toep):
                    if i + j < len(new):
                        new[i + j] = new[i + j] + c * t
            poly = new
        return list(reversed(poly))


def _dot(a, b):
    acc = None
    for x, y in zip(a, b):
        term = x * y
        acc = term if acc is None else acc + term
    return acc


# ---------------------------------------------------------------------------
# Smith normal form over W (diagonal entries are p-powers)
# ---------------------------------------------------------------------------

class SNFResult:
    """U * A * V = diag(p^e_1, ..., p^e_r, 0...) with U, V invertible.

    ``exponents`` lists the diagonal p-exponents for the first
    min(nrows, ncols) slots; entries that are zero at working capacity are
    reported as None with the guaranteed lower bound ``floor``.
    """

    __slots__ = ("U", "V", "exponents", "floor", "nrows", "ncols")

    def __init__(self, U, V, exponents, floor, nrows, ncols):
        self.U = U
        self.V = V
        self.exponents = exponents
        self.floor = floor
        self.nrows = nrows
        self.ncols = ncols

    @property
    def rank(self):
        return sum(1 for e in self.exponents if e is not None)

    def exact_exponents(self):
        if any(e is None for e in self.exponents):
            raise PrecisionError(
                f"SNF divisor indistinguishable from 0 at working precision "
                f"(>= p^{self.floor}); increase N")
        return list(self.exponents)

    def diagonal_matrix(self, ring):
        D = PadicMatrix.zeros(ring, self.nrows, self.ncols)
        one = ring.one()
        for i, e in enumerate(self.exponents):
            if e is not None:
                D.rows[i][i] = one.mul_p_power(e)
        return D


def smith_normal_form(A, *, need_U=True, need_V=True):
    """SNF over the Witt ring; pivots chosen by minimal valuation.

    need_U / need_V skip the transform bookkeeping when the caller only
    wants exponents (or one side); the skipped attribute is None.
    """
    ring = A.ring
    if ring.m == 1 and all(a.junk == 0 for row in A.rows for a in row):
        return _smith_normal_form_zp(A, need_U, need_V)
    n, c = A.nrows, A.ncols
    shift = A.max_shift()
    floor = ring.N - shift - GUARD_DIGITS
    work = [[a for a in row] for row in A.rows]
    U = PadicMatrix.identity(ring, n)
    V = PadicMatrix.identity(ring, c)
    exps = []
    k = 0
    limit = min(n, c)
    while k < limit:
        piv, piv_val = None, None
        for i in range(k, n):
            for j in range(k, c):
                if work[i][j].is_effectively_zero():
                    continue
                v = work[i][j].valuation()
                if piv_val is None or v < piv_val:
                    piv, piv_val = (i, j), v
        if piv is None:
            exps.extend([None] * (limit - k))
            break
        i0, j0 = piv
        if i0 != k:
            work[k], work[i0] = work[i0], work[k]
            U.rows[k], U.rows[i0] = U.rows[i0], U.rows[k]
        if j0 != k:
            for row in work:
                row[k], row[j0] = row[j0], row[k]
            for row in V.rows:
                row[k], row[j0] = row[j0], row[k]
        pivot = work[k][k]
        unit_inv = pivot.mul_p_power(-piv_val).inverse()
        work[k] = [a * unit_inv for a in work[k]]
        U.rows[k] = [a * unit_inv for a in U.rows[k]]
        pivot = work[k][k]  # now exactly p^piv_val (times 1)
        for i in range(k + 1, n):
            e = work[i][k]
            if not e.is_zero_at_capacity():
                f = e * pivot.inverse()
                work[i] = [a - f * b for a, b in zip(work[i], work[k])]
                U.rows[i] = [a - f * b
                             for a, b in zip(U.rows[i], U.rows[k])]
        for j in range(k + 1, c):
            e = work[k][j]
            if not e.is_zero_at_capacity():
                f = e * pivot.inverse()
                for i in range(n):
                    work[i][j] = work[i][j] - f * work[i][k]
                for i in range(c):
                    V.rows[i][j] = V.rows[i][j] - f * V.rows[i][k]
        exps.append(piv_val)
        k += 1
    return SNFResult(U, V, exps, floor, n, c)


def _smith_normal_form_zp(A, need_U, need_V):
    """Integer fast path: W(F_p) entries are plain residues mod p^N."""
    ring = A.ring
    p, pN = ring.p, ring.pN
    n, c = A.nrows, A.ncols
    shift = A.max_shift()
    floor = ring.N - shift - GUARD_DIGITS
    scale = p ** shift
    work = [[(a.coeffs[0] * (scale // p ** a.shift)) % pN for a in row]
            for row in A.rows]
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)] \
        if need_U else None
    V = [[1 if i == j else 0 for j in range(c)] for i in range(c)] \
        if need_V else None
    cutoff = ring.N

    def val(x):
        if x == 0:
            return None
        v = 0
        while x % p == 0:
            x //= p
            v += 1
        return v if v < cutoff else None

    exps = []
    k = 0
    limit = min(n, c)
    while k < limit:
        piv, piv_val = None, None
        for i in range(k, n):
            row = work[i]
            for j in range(k, c):
                v = val(row[j])
                if v is not None and (piv_val is None or v < piv_val):
                    piv, piv_val = (i, j), v
                    if v == 0:
                        break
            if piv_val == 0:
                break
        if piv is None:
            exps.extend([None] * (limit - k))
            break
        i0, j0 = piv
        if i0 != k:
            work[k], work[i0] = work[i0], work[k]
            if need_U:
                U[k], U[i0] = U[i0], U[k]
        if j0 != k:
            for row in work:
                row[k], row[j0] = row[j0], row[k]
            if need_V:
                for row in V:
                    row[k], row[j0] = row[j0], row[k]
        pe = p ** piv_val
        inv = pow(work[k][k] // pe, -1, pN)
        work[k] = [(a * inv) % pN for a in work[k]]
        if need_U:
            U[k] = [(a * inv) % pN for a in U[k]]
        for i in range(k + 1, n):
            e = work[i][k]
            if e:
                f = e // pe
                wk = work[k]
                work[i] = [(a - f * b) % pN for a, b in zip(work[i], wk)]
                if need_U:
                    U[i] = [(a - f * b) % pN for a, b in zip(U[i], U[k])]
        for j in range(k + 1, c):
            e = work[k][j]
            if e:
                f = e // pe
                for i in range(k, n):
                    work[i][j] = (work[i][j] - f * work[i][k]) % pN
                if need_V:
                    for i in range(c):
                        V[i][j] = (V[i][j] - f * V[i][k]) % pN
        exps.append(piv_val)
        k += 1
    exps = [e - shift if e is not None else None for e in exps]

    def back(mat):
        if mat is None:
            return None
        return PadicMatrix(ring, [[ring.element((x,)) for x in row]
                                  for row in mat])

    return SNFResult(back(U), back(V), exps, floor, n, c)


# ---------------------------------------------------------------------------
# Canonical lattice bases (column Hermite form over W)
# ---------------------------------------------------------------------------

def lattice_from_columns(ring, cols, expect_rank=None):
    """Canonical basis of the W-span of the given columns.

    Returns an h x h lower-triangular basis matrix with p-power pivots and
    below-pivot entries reduced to canonical residues; unique per lattice,
    so equality of lattices is equality of these matrices.
    """
    if not cols:
        raise InputError("no columns")
    h = len(cols[0])
    shift = max((a.shift for col in cols for a in col), default=0)
    work = [[a.mul_p_power(shift) for a in col] for col in cols]
    basis = []
    pivots = []
    for row_i in range(h):
        piv, piv_val = None, None
        for idx, col in enumerate(work):
            if col[row_i].is_effectively_zero():
                continue
            v = col[row_i].valuation()
            if piv_val is None or v < piv_val:
                piv, piv_val = idx, v
        if piv is None:
            if expect_rank is None or expect_rank == h:
                raise RankError(
                    f"columns do not span full rank at row {row_i}")
            continue
        col = work.pop(piv)
        unit_inv = col[row_i].mul_p_power(-piv_val).inverse()
        col = [a * unit_inv for a in col]
        for other in work:
            e = other[row_i]
            if not e.is_zero_at_capacity():
                f = e.mul_p_power(-piv_val)
                for i in range(row_i, h):
                    other[i] = other[i] - f * col[i]
        basis.append(col)
        pivots.append(piv_val)
    if len(basis) != h:
        raise RankError("columns do not span a full-rank lattice")
    # canonical reduction: entries below a pivot reduced mod later pivots
    for j in range(h - 1, -1, -1):
        for r in range(j + 1, h):
            e_r = pivots[r]
            entry = basis[j][r]
            if entry.is_zero_at_capacity():
                continue
            q = _floor_div_p_power(entry, e_r, ring)
            if q is not None:
                for i in range(r, h):
                    basis[j][i] = basis[j][i] - q * basis[r][i]
    out = PadicMatrix.from_columns(ring, basis)
    return out.mul_p_power(-shift)


def _floor_div_p_power(entry, e, ring):
    """Quotient q with entry - q*p^e having canonical coefficients < p^e."""
    if entry.shift != 0:
        raise InternalError("expected an integral entry")
    pe = ring.p ** min(e, ring.N)
    qc = tuple(c // pe for c in entry.coeffs)
    if all(c == 0 for c in qc):
        return None
    return ring.element(qc).mul_p_power(0)


# ---------------------------------------------------------------------------
# Lattice predicates and constructions (bases are square PadicMatrix columns)
# ---------------------------------------------------------------------------

def lattice_canonical(basis):
    return lattice_from_columns(basis.ring, basis.columns())


def lattice_key(basis):
    """Cache/dedup fingerprint: canonical basis with guard digits dropped.

    Top digits of unit parts can carry junk from p-divisions, so keys are
    truncated; definitive equality is lattice_equal (containment both ways).
    """
    can = lattice_canonical(basis)
    return tuple(a.truncated() for row in can.rows for a in row)


def coordinates_in(basis, other):
    """Matrix X with basis * X = other (coordinates of other in basis)."""
    return basis.inverse() * other


def is_integral(M):
    """True if all entries have valuation >= 0.

    Observed valuations are exact (unit parts are exact within the window);
    the only undecidable case is a zero-at-capacity entry whose window has
    fewer than GUARD_DIGITS nonnegative digits.
    """
    for row in M.rows:
        for a in row:
            if a.is_zero_at_capacity():
                if a.window < GUARD_DIGITS:
                    raise PrecisionError(
                        "integrality of a vanishing entry undecidable: "
                        f"window {a.window} below the guard band")
                continue
            if a.valuation() < 0:
                return False
    return True


def lattice_contains(L1, L2):
    """L2 subseteq L1 (as column spans)."""
    return is_integral(coordinates_in(L1, L2))


def lattice_equal(L1, L2):
    """Definitive equality: mutual containment (junk-digit immune)."""
    return lattice_contains(L1, L2) and lattice_contains(L2, L1)


def lattice_sum(L1, *others):
    cols = L1.columns()
    for L in others:
        cols.extend(L.columns())
    return lattice_from_columns(L1.ring, cols)


def lattice_intersection(L1, L2):
    """L1 cap L2 = L1 * {y integral : L2^{-1} L1 y integral}."""
    X = coordinates_in(L2, L1)
    stacked = PadicMatrix(X.ring,
                          PadicMatrix.identity(X.ring, X.ncols).rows + X.rows)
    sol = integral_solution_lattice(stacked)
    return lattice_canonical(L1 * sol)


def lattice_index_exponent(L1, L2, *, zp_index=False):
    """v_p([L1 : L2]) as a W-length (or Z_p-index with zp_index=True)."""
    X = coordinates_in(L1, L2)
    if not is_integral(X):
        raise ContainmentError("L2 is not contained in L1")
    exps = smith_normal_form(X, need_U=False, need_V=False).exact_exponents()
    total = sum(exps)
    return total * L1.ring.m if zp_index else total


def integral_solution_lattice(X):
    """Basis of the lattice {y : X y integral} for full-column-rank X."""
    ring = X.ring
    s = max(0, X.max_shift())
    snf = smith_normal_form(X.mul_p_power(s), need_U=False)
    exps = snf.exponents
    if len(exps) < X.ncols or any(e is None for e in exps[:X.ncols]):
        raise RankError("integrality system is rank deficient (or precision "
                        "exhausted); cannot solve")
    diag = [ring.one().mul_p_power(s - exps[j]) for j in range(X.ncols)]
    return snf.V * PadicMatrix.diag(ring, diag)


def kernel_with_expected_dim(A, dim):
    """Kernel basis over the fraction field, validated against `dim`.

    Kernel vectors correspond to SNF divisors that vanish at capacity; a
    mismatch with the expected dimension raises PrecisionError.
    """
    snf = smith_normal_form(A, need_U=False)
    n_zero = sum(1 for e in snf.exponents if e is None)
    free = A.ncols - min(A.nrows, A.ncols)
    total = n_zero + free
    if total != dim:
        raise PrecisionError(
            f"kernel dimension {total} != expected {dim} at working "
            f"precision; increase N")
    cols = []
    for j in range(A.ncols):
        if j >= len(snf.exponents) or snf.exponents[j] is None:
            cols.append(snf.V.column(j))
    if not cols:
        return PadicMatrix(A.ring, [[] for _ in range(A.ncols)])
    return PadicMatrix.from_columns(A.ring, cols)


# ---------------------------------------------------------------------------
# Restriction of scalars along a tower embedding
# ---------------------------------------------------------------------------

def restrict_scalars(X, embedding):
    """Rewrite X (over the big ring) as a matrix over the small ring.

    Each big-ring entry acts on a small-ring unknown by multiplication;
    with respect to the power basis {t^j} of big over small, that action
    is a column of index = L/n small-ring coordinates.  Shape:
    (nrows * index) x ncols.
    """
    idx = embedding.index
    out_rows = [[None] * X.ncols for _ in range(X.nrows * idx)]
    for i in range(X.nrows):
        for j in range(X.ncols):
            coords = embedding.coordinates(X.rows[i][j])
            for k in range(idx):
                out_rows[i * idx + k][j] = coords[k]
    return PadicMatrix(embedding.small, out_rows)
