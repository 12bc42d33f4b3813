"""Truncated Witt vectors of finite fields: W(F_{p^m}) mod p^N.

The ring is presented as (Z/p^N)[t]/(f(t)) with f the canonical lift of the
Conway polynomial of F_{p^m}.  Fraction-field elements carry an explicit
p-power shift: an element with shift c represents p^(-c) * (unit part) and
is determined mod p^(N-c).  Unit parts are exact mod p^N throughout; all
decisions that look at the top digits go through guard-band helpers.

Frobenius sigma is the unique ring automorphism lifting x |-> x^p; it is
computed once per ring by Newton-lifting t^p to a root of the modulus and
stored as an m x m matrix over Z/p^N.
"""

from functools import lru_cache
from math import gcd

import numpy as np

from .conway import conway_polynomial
from .errors import (CapacityError, InputError, InternalError,
                     PrecisionError)

GUARD_DIGITS = 4
MAX_PRECISION = 4096

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _is_prime(n):
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n == q:
            return True
        if n % q == 0:
            return False
    d = 41
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def default_precision(h):
    """Default working precision for ambient rank h."""
    return 2 * h * h + 16


class WittRing:
    """W(F_{p^m}) truncated at absolute precision p^N."""

    def __init__(self, p, m, N):
        if not _is_prime(p):
            raise InputError(f"p = {p} is not prime")
        if m < 1 or N < 1:
            raise InputError("need m >= 1 and N >= 1")
        if N > MAX_PRECISION:
            raise CapacityError(f"N = {N} exceeds capacity {MAX_PRECISION}")
        self.p = p
        self.m = m
        self.N = N
        self.pN = p ** N
        self.conway = conway_polynomial(p, m)
        # canonical lift: Conway digits reinterpreted in Z/p^N
        self.modulus = tuple(self.conway[:m]) + (1,)
        self._zero_coeffs = (0,) * m
        self._red_rows = self._reduction_rows()
        self._frob_cache = {}
        if m > 1:
            self._frob_cache[1] = self._compute_frobenius_columns()
        else:
            self._frob_cache[1] = [(1,)]
        self._teich_cache = {}

    # -- construction of elements ------------------------------------

    def element(self, coeffs, shift=0):
        if len(coeffs) != self.m:
            raise InputError(f"expected {self.m} coefficients")
        return WittElement(self, tuple(c % self.pN for c in coeffs),
                           shift)._reduce()

    def zero(self):
        return WittElement(self, (0,) * self.m, 0)

    def one(self):
        return self.from_int(1)

    def from_int(self, n):
        return self.element((n,) + (0,) * (self.m - 1))

    def gen(self):
        """The power-basis generator t (a lift of the Conway root)."""
        if self.m == 1:
            raise InputError("W(F_p) has no extension generator")
        return self.element((0, 1) + (0,) * (self.m - 2))

    def random_element(self, rng, shift=0):
        return self.element(
            tuple(rng.randrange(self.pN) for _ in range(self.m)), shift)

    def random_unit(self, rng):
        while True:
            x = self.random_element(rng)
            if x.valuation() == 0:
                return x

    def __repr__(self):
        return f"WittRing(p={self.p}, m={self.m}, N={self.N})"

    def __eq__(self, other):
        return (isinstance(other, WittRing)
                and (self.p, self.m, self.N) == (other.p, other.m, other.N))

    def __hash__(self):
        return hash((self.p, self.m, self.N))

    # -- polynomial reduction tables -----------------------------------

    def _reduction_rows(self):
        # t^d for d = m .. 2m-2 expressed on the power basis, mod p^N
        m, pN = self.m, self.pN
        rows = []
        cur = [(-c) % pN for c in self.modulus[:m]]  # t^m
        rows.append(tuple(cur))
        for _ in range(m - 2):
            top = cur[m - 1]
            cur = [0] + cur[:m - 1]
            if top:
                cur = [(a - top * c) % pN
                       for a, c in zip(cur, self.modulus[:m])]
                cur[0] = (cur[0] + 0) % pN
            # fix: shifting already multiplied by t; subtract top*t^m
            rows.append(tuple(cur))
        return rows

    def _mul_coeffs(self, a, b):
        m, pN = self.m, self.pN
        prod = [0] * (2 * m - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        out = [c % pN for c in prod[:m]]
        for d in range(m, 2 * m - 1):
            c = prod[d] % pN
            if c:
                row = self._red_rows[d - m]
                for k in range(m):
                    out[k] = (out[k] + c * row[k]) % pN
        return tuple(out)

    def _pow_coeffs(self, a, e):
        result = (1,) + (0,) * (self.m - 1)
        while e:
            if e & 1:
                result = self._mul_coeffs(result, a)
            a = self._mul_coeffs(a, a)
            e >>= 1
        return result

    # -- residue-field helpers (tuples mod p) --------------------------

    def residue_mul(self, a, b):
        return tuple(c % self.p for c in self._mul_coeffs(a, b))

    def residue_pow(self, a, e):
        return tuple(c % self.p for c in self._pow_coeffs(a, e))

    def residue_inv(self, a):
        a = tuple(c % self.p for c in a)
        if all(c == 0 for c in a):
            raise ZeroDivisionError("residue zero")
        inv = self.residue_pow(a, self.p ** self.m - 2)
        return inv

    def residue_mult_matrix(self, a):
        """Multiplication-by-a on F_{p^m} as an m x m F_p-matrix (numpy)."""
        cols = []
        cur = tuple(c % self.p for c in a)
        basis = [(0,) * i + (1,) + (0,) * (self.m - 1 - i)
                 for i in range(self.m)]
        for e in basis:
            cols.append(self.residue_mul(a, e))
        arr = np.array(cols, dtype=np.int64).T % self.p
        _ = cur
        return arr

    def residue_frobenius_matrix(self, k=1):
        cols = [tuple(c % self.p for c in col)
                for col in self.frobenius_columns(k)]
        return np.array(cols, dtype=np.int64).T % self.p

    # -- Frobenius ------------------------------------------------------

    def _compute_frobenius_columns(self):
        # Newton-lift s = t^p to an exact root of the modulus, then store
        # the matrix of sigma on the power basis (columns = coords of s^i).
        m = self.m
        s = self._pow_coeffs((0, 1) + (0,) * (m - 2), self.p)
        fcoeffs = [c % self.pN for c in self.modulus]

        def poly_eval(coeffs_int, x):
            acc = (0,) * m
            for c in reversed(coeffs_int):
                acc = self._mul_coeffs(acc, x)
                acc = ((acc[0] + c) % self.pN,) + acc[1:]
            return acc

        dcoeffs = [(i * fcoeffs[i]) % self.pN
                   for i in range(1, len(fcoeffs))]
        prec = 1
        while prec < self.N:
            fs = poly_eval(fcoeffs, s)
            dfs = poly_eval(dcoeffs, s)
            inv = self._inv_unit_coeffs(dfs)
            corr = self._mul_coeffs(fs, inv)
            s = tuple((a - b) % self.pN for a, b in zip(s, corr))
            prec *= 2
        cols = []
        cur = (1,) + (0,) * (m - 1)
        for _ in range(m):
            cols.append(cur)
            cur = self._mul_coeffs(cur, s)
        return cols

    def frobenius_columns(self, k=1):
        k %= self.m
        if k == 0:
            ident = [(0,) * i + (1,) + (0,) * (self.m - 1 - i)
                     for i in range(self.m)]
            return ident
        if k not in self._frob_cache:
            base = self.frobenius_columns(1)
            cur = self.frobenius_columns(k - 1)
            self._frob_cache[k] = [self._apply_columns(base, col)
                                   for col in cur]
        return self._frob_cache[k]

    def _apply_columns(self, cols, vec):
        m, pN = self.m, self.pN
        out = [0] * m
        for i, c in enumerate(vec):
            if c:
                col = cols[i]
                for j in range(m):
                    out[j] = (out[j] + c * col[j]) % pN
        return tuple(out)

    def frobenius_coeffs(self, coeffs, k=1):
        k %= self.m
        if k == 0:
            return tuple(coeffs)
        return self._apply_columns(self.frobenius_columns(k), coeffs)

    # -- unit inversion (Hensel from the residue field) -----------------

    def _inv_unit_coeffs(self, a):
        if all(c % self.p == 0 for c in a):
            raise ZeroDivisionError("not a unit")
        y = self.residue_inv(a)
        prec = 1
        two = (2,) + (0,) * (self.m - 1)
        while prec < self.N:
            ay = self._mul_coeffs(a, y)
            corr = tuple((t - c) % self.pN for t, c in zip(two, ay))
            y = self._mul_coeffs(y, corr)
            prec *= 2
        return y

    # -- Teichmueller lifts ---------------------------------------------

    def teichmuller(self, residue):
        """The exact (q-1)-th root of unity lifting a residue element."""
        res = tuple(c % self.p for c in residue)
        if all(c == 0 for c in res):
            return self.zero()
        if res in self._teich_cache:
            return self._teich_cache[res]
        q1 = self.p ** self.m - 1
        x = res  # correct mod p
        prec = 1
        while prec < self.N:
            w = self._pow_coeffs(x, q1)
            err = ((w[0] - 1) % self.pN,) + w[1:]
            denom = self._mul_coeffs(
                tuple((q1 * c) % self.pN for c in w), (1,) + (0,) * (self.m - 1))
            step = self._mul_coeffs(
                self._mul_coeffs(x, err), self._inv_unit_coeffs(denom))
            x = tuple((a - b) % self.pN for a, b in zip(x, step))
            prec *= 2
        out = WittElement(self, x, 0)
        self._teich_cache[res] = out
        return out


class WittElement:
    """p^(-shift) times a polynomial in t.

    The unit part is exact mod p^(N - junk): `junk` counts top digits that
    may have been polluted by dividing unit parts by p (the only lossy
    step in the representation).  Freshly constructed elements have
    junk = 0 and all their decisions are exact.
    """

    __slots__ = ("ring", "coeffs", "shift", "junk")

    def __init__(self, ring, coeffs, shift, junk=0):
        self.ring = ring
        self.coeffs = coeffs
        self.shift = shift
        self.junk = junk

    # -- normal form ---------------------------------------------------

    def _reduce(self):
        ring = self.ring
        coeffs, shift, junk = self.coeffs, self.shift, self.junk
        if shift == 0:
            return self
        if shift < 0:
            scale = ring.p ** (-shift)
            coeffs = tuple((c * scale) % ring.pN for c in coeffs)
            return WittElement(ring, coeffs, 0, max(0, junk + shift))
        if coeffs == ring._zero_coeffs:
            return WittElement(ring, coeffs, 0, junk)
        p = ring.p
        while shift > 0 and all(c % p == 0 for c in coeffs):
            coeffs = tuple(c // p for c in coeffs)
            shift -= 1
            junk = min(ring.N, junk + 1)
        return WittElement(ring, coeffs, shift, junk)

    @property
    def window(self):
        """Absolute precision: the element is determined mod p^window."""
        return self.ring.N - self.shift - self.junk

    def is_zero_at_capacity(self):
        return self.coeffs == self.ring._zero_coeffs

    def is_effectively_zero(self, margin=None):
        """Zero within the element's honest window."""
        if all(c == 0 for c in self.coeffs):
            return True
        margin = self.junk if margin is None else max(margin, self.junk)
        if self.ring.N - margin - self.shift <= 0:
            raise PrecisionError(
                "window exhausted by accumulated division junk; increase N")
        v = self.valuation()
        return v + self.shift >= self.ring.N - margin

    def truncated(self, drop=None):
        """Canonical fingerprint with unreliable top digits zeroed."""
        drop = 2 * GUARD_DIGITS if drop is None else drop
        drop = max(drop, self.junk)
        mod = self.ring.p ** max(1, self.ring.N - drop)
        return (tuple(c % mod for c in self.coeffs), self.shift)

    def valuation(self):
        """Exact valuation, or None when zero at working capacity."""
        if self.is_zero_at_capacity():
            return None
        p = self.ring.p
        best = None
        for c in self.coeffs:
            if c:
                v = 0
                while c % p == 0:
                    c //= p
                    v += 1
                best = v if best is None else min(best, v)
                if best == 0:
                    break
        return best - self.shift

    def valuation_checked(self, need_margin=GUARD_DIGITS):
        """Valuation, raising PrecisionError inside the unreliable band."""
        v = self.valuation()
        if v is None:
            return None
        margin = max(need_margin, self.junk)
        if v + self.shift >= self.ring.N - margin:
            raise PrecisionError(
                f"valuation {v} within {margin} guard digits of the "
                f"window; increase N")
        return v

    # -- arithmetic ------------------------------------------------------

    def _align(self, other):
        s = max(self.shift, other.shift)
        p, pN = self.ring.p, self.ring.pN
        a, ja = self.coeffs, self.junk
        if s > self.shift:
            f = p ** (s - self.shift)
            a = tuple((c * f) % pN for c in a)
            ja = max(0, ja - (s - self.shift))
        b, jb = other.coeffs, other.junk
        if s > other.shift:
            f = p ** (s - other.shift)
            b = tuple((c * f) % pN for c in b)
            jb = max(0, jb - (s - other.shift))
        return a, b, s, max(ja, jb)

    def __add__(self, other):
        if type(other) is not WittElement:
            other = self._coerce(other)
        a, b, s, j = self._align(other)
        pN = self.ring.pN
        return WittElement(self.ring,
                           tuple((x + y) % pN for x, y in zip(a, b)),
                           s, j)._reduce()

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        if type(other) is not WittElement:
            other = self._coerce(other)
        a, b, s, j = self._align(other)
        pN = self.ring.pN
        return WittElement(self.ring,
                           tuple((x - y) % pN for x, y in zip(a, b)),
                           s, j)._reduce()

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __neg__(self):
        pN = self.ring.pN
        return WittElement(self.ring,
                           tuple((-c) % pN for c in self.coeffs), self.shift,
                           self.junk)

    def __mul__(self, other):
        if type(other) is not WittElement:
            other = self._coerce(other)
        coeffs = self.ring._mul_coeffs(self.coeffs, other.coeffs)
        # junk digits of one factor are pushed up by the other factor's
        # coefficient valuation (junk counts digits below p^N in the
        # stored coefficient vector)
        junk = 0
        if self.junk or other.junk:
            va = self._coeff_valuation()
            vb = other._coeff_valuation()
            junk = max(0, self.junk - vb, other.junk - va)
        return WittElement(self.ring, coeffs,
                           self.shift + other.shift, junk)._reduce()

    def _coeff_valuation(self):
        """Minimal p-valuation of the stored coefficients (N if all zero)."""
        v = self.valuation()
        return self.ring.N if v is None else v + self.shift

    def __rmul__(self, other):
        return self.__mul__(other)

    def inverse(self):
        v = self.valuation()
        if v is None:
            raise ZeroDivisionError("inverting a zero-at-capacity element")
        p = self.ring.p
        unit = self.coeffs
        inner = v + self.shift
        if inner:
            f = p ** inner
            unit = tuple(c // f for c in unit)
        inv = self.ring._inv_unit_coeffs(unit)
        return WittElement(self.ring, inv, v,
                           min(self.ring.N, self.junk + inner))._reduce()

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.ring.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def mul_p_power(self, k):
        """Multiply by p^k (k may be negative)."""
        return WittElement(self.ring, self.coeffs, self.shift - k,
                           self.junk)._reduce()

    def frobenius(self, k=1):
        return WittElement(self.ring,
                           self.ring.frobenius_coeffs(self.coeffs, k),
                           self.shift, self.junk)

    def residue(self):
        """Image in F_{p^m} (shift must be <= 0 ... i.e. integral)."""
        if self.shift > 0:
            raise InputError("residue of a non-integral element")
        return tuple(c % self.ring.p for c in self.coeffs)

    def _coerce(self, other):
        if isinstance(other, WittElement):
            if other.ring != self.ring:
                raise InputError("mixed Witt rings")
            return other
        if isinstance(other, int):
            return self.ring.from_int(other)
        raise TypeError(f"cannot coerce {type(other)!r}")

    # -- comparison / hashing / display ----------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        if not isinstance(other, WittElement):
            return NotImplemented
        return (self.ring == other.ring and self.coeffs == other.coeffs
                and self.shift == other.shift)

    def __hash__(self):
        return hash((self.coeffs, self.shift))

    def __repr__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                parts.append(f"{c}*t^{i}" if i else f"{c}")
        body = " + ".join(parts) if parts else "0"
        if self.shift:
            return f"p^-{self.shift}*({body})"
        return body

    # -- serialization -----------------------------------------------------

    def to_json(self):
        p = self.ring.p
        mod = self.ring.p ** (self.ring.N - self.junk)
        digit_lists = []
        for c in self.coeffs:
            c %= mod  # junk digits are zeroed for determinism
            digits = []
            while c:
                c, d = divmod(c, p)
                digits.append(d)
            digit_lists.append(digits)
        if self.shift == 0:
            return digit_lists
        return {"shift": self.shift, "coeffs": digit_lists}

    @staticmethod
    def from_json(ring, data):
        if isinstance(data, dict):
            shift = int(data["shift"])
            digit_lists = data["coeffs"]
        else:
            shift = 0
            digit_lists = data
        if len(digit_lists) != ring.m:
            raise InputError("wrong number of coefficients")
        coeffs = []
        for digits in digit_lists:
            c = 0
            for d in reversed(digits):
                if not 0 <= int(d) < ring.p:
                    raise InputError(f"digit {d} out of range for p={ring.p}")
                c = c * ring.p + int(d)
            coeffs.append(c % ring.pN)
        return WittElement(ring, tuple(coeffs), shift)._reduce()


@lru_cache(maxsize=None)
def make_witt_ring(p, m, N):
    """Construct (and cache) W(F_{p^m}) at absolute precision p^N."""
    return WittRing(p, m, N)


class TowerEmbedding:
    """The canonical embedding W(F_{p^n}) -> W(F_{p^L}) for n | L.

    Pinned by the Conway compatibility t_n |-> t_L^((p^L-1)/(p^n-1)) on
    residue fields, Newton-lifted to an exact root of the small modulus.
    """

    def __init__(self, small, big):
        if small.p != big.p or small.N != big.N:
            raise InputError("embedding requires equal p and N")
        if big.m % small.m:
            raise InputError(f"{small.m} does not divide {big.m}")
        self.small = small
        self.big = big
        self.index = big.m // small.m
        self._root = self._lift_root()
        self._powers = self._root_powers()
        self._basis_inv = self._basis_inverse()

    def _lift_root(self):
        small, big = self.small, self.big
        if small.m == 1:
            return big.one()
        e = (big.p ** big.m - 1) // (big.p ** small.m - 1)
        res = big.residue_pow((0, 1) + (0,) * (big.m - 2), e)
        r = big.element(res)
        fcoeffs = list(small.modulus)
        dcoeffs = [i * fcoeffs[i] for i in range(1, len(fcoeffs))]

        def ev(cs, x):
            acc = big.zero()
            for c in reversed(cs):
                acc = acc * x + big.from_int(c)
            return acc

        prec = 1
        while prec < big.N:
            r = r - ev(fcoeffs, r) * ev(dcoeffs, r).inverse()
            prec *= 2
        if not ev(fcoeffs, r).is_zero_at_capacity():
            raise InternalError("root lift did not converge")
        return r

    def _root_powers(self):
        powers = [self.big.one()]
        for _ in range(self.small.m - 1):
            powers.append(powers[-1] * self._root)
        return powers

    def _basis_inverse(self):
        # Z/p^N-basis of big over Z_p: r^i * t^j, i < n, j < L/n
        big = self.big
        cols = []
        tj = big.one()
        self._basis_cols = []
        for _ in range(self.index):
            for ri in self._powers:
                cols.append((ri * tj).coeffs)
            tj = tj * big.gen() if big.m > 1 else tj
        mat = [[cols[c][r] for c in range(big.m)] for r in range(big.m)]
        return _invert_int_matrix(mat, big.pN, big.p)

    def embed(self, x):
        if x.ring != self.small:
            raise InputError("element not in the source ring")
        out = self.big.zero()
        for c, rp in zip(x.coeffs, self._powers):
            out = out + rp * self.big.from_int(c)
        return out.mul_p_power(-x.shift) if x.shift else out

    def coordinates(self, x):
        """Coordinates of a big-ring element over the small ring.

        Returns a list of `index` small-ring elements y_j with
        x = sum_j embed(y_j) * t_big^j.
        """
        if x.ring != self.big:
            raise InputError("element not in the target ring")
        n, idx = self.small.m, self.index
        pN = self.big.pN
        vec = [sum(self._basis_inv[r][c] * x.coeffs[c] for c in range(self.big.m)) % pN
               for r in range(self.big.m)]
        out = []
        for j in range(idx):
            coeffs = tuple(vec[j * n + i] for i in range(n))
            out.append(WittElement(self.small, coeffs, x.shift,
                                   x.junk)._reduce())
        return out

    def descend(self, x):
        """Inverse of embed for elements lying in the image (guard-checked)."""
        coords = self.coordinates(x)
        for y in coords[1:]:
            if not y.is_effectively_zero(GUARD_DIGITS):
                raise InternalError("element does not lie in the subring")
        return coords[0]


@lru_cache(maxsize=None)
def tower_embedding(p, n, L, N):
    return TowerEmbedding(make_witt_ring(p, n, N), make_witt_ring(p, L, N))


def _invert_int_matrix(rows, modulus, p):
    """Invert a square integer matrix mod p^N (requires unit determinant)."""
    n = len(rows)
    aug = [list(rows[i]) + [1 if j == i else 0 for j in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if aug[r][col] % p:
                piv = r
                break
        if piv is None:
            raise InternalError("matrix not invertible mod p")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = pow(aug[col][col], -1, modulus)
        aug[col] = [(v * inv) % modulus for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [(a - f * b) % modulus
                          for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def frobenius(x, k=1):
    """sigma^k applied to a Witt element (k reduced mod m)."""
    return x.frobenius(k)


def lcm(a, b):
    return a * b // gcd(a, b)
