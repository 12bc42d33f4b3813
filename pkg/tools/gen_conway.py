"""Generate the Conway polynomial table shipped in src/dieudonne/conway.py.

Conway polynomial C_{p,n}: the minimal monic degree-n polynomial over F_p,
w.r.t. the standard word ordering, that is primitive and norm-compatible
with C_{p,d} for every proper divisor d | n.  Ordering: write
f = sum_i (-1)^(n-i) f_i x^i with f_i in {0..p-1}; compare the words
(f_{n-1}, ..., f_0) lexicographically.

Hot loop uses base-2^20 integer packing: one F_p[x] product = one bigint
multiply.  Results are checkpointed to a JSON file so primes can be
computed in separate runs.

Run:  python3 tools/gen_conway.py --out /tmp/conway.json --primes 2 3 5
"""

import argparse
import json
import sys
import time

from sympy import factorint

MAX_DEG = 12
SHIFT = 20
MASK = (1 << SHIFT) - 1


def pack(coeffs):
    v = 0
    for c in reversed(coeffs):
        v = (v << SHIFT) | c
    return v


def unpack(v, p):
    out = []
    while v:
        out.append((v & MASK) % p)
        v >>= SHIFT
    return out


class ModRing:
    """Arithmetic in F_p[x]/(f) with packed-integer polynomials."""

    def __init__(self, f, p):
        self.p = p
        self.n = len(f) - 1
        self.f = f

    def mulmod(self, a, b):
        # a, b packed, reduced; returns packed reduced product
        prod = unpack(a * b, self.p)
        n, p, f = self.n, self.p, self.f
        for d in range(len(prod) - 1, n - 1, -1):
            c = prod[d]
            if c:
                prod[d] = 0
                for k in range(n):
                    if f[k]:
                        prod[d - n + k] = (prod[d - n + k] - c * f[k]) % p
        return pack(prod[:n])

    def powmod(self, a, e):
        result = 1  # the constant polynomial 1
        while e:
            if e & 1:
                result = self.mulmod(result, a)
            a = self.mulmod(a, a)
            e >>= 1
        return result


def poly_trim(a):
    i = len(a)
    while i > 0 and a[i - 1] == 0:
        i -= 1
    return a[:i]


def poly_gcd(a, b, p):
    a, b = poly_trim(list(a)), poly_trim(list(b))
    while b:
        inv = pow(b[-1], p - 2, p)
        r = list(a)
        db = len(b) - 1
        while len(r) - 1 >= db and r:
            c = r[-1] * inv % p
            if c:
                off = len(r) - 1 - db
                for k in range(db + 1):
                    r[off + k] = (r[off + k] - c * b[k]) % p
            while r and r[-1] == 0:
                r.pop()
        a, b = b, r
    return a


def minus_x(v, p):
    coeffs = unpack(v, p)
    while len(coeffs) < 2:
        coeffs.append(0)
    coeffs[1] = (coeffs[1] - 1) % p
    return coeffs


def is_irreducible(ring):
    n, p = ring.n, ring.p
    if n == 1:
        return True
    v = ring.powmod(pack((0, 1)), p)
    for k in range(1, n):
        if k <= n // 2 and len(poly_gcd(minus_x(v, p), ring.f, p)) > 1:
            return False
        v = ring.powmod(v, p)
    return not poly_trim(minus_x(v, p))


def x_order_is(ring, order, prime_divs):
    x = pack((0, 1))
    if ring.powmod(x, order) != 1:
        return False
    for q in prime_divs:
        if ring.powmod(x, order // q) == 1:
            return False
    return True


def compatible(ring, n, p, table):
    for d in range(1, n):
        if n % d:
            continue
        e = (p ** n - 1) // (p ** d - 1)
        y = ring.powmod(pack((0, 1)), e)
        acc = 0
        for c in reversed(table[(p, d)]):
            acc = ring.mulmod(acc, y)
            acc = acc + c if (acc & MASK) + c < p else acc - (acc & MASK) + ((acc & MASK) + c) % p
        if acc:
            return False
    return True


def word_to_poly(word, n, p):
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    for idx, fi in enumerate(word):
        i = n - 1 - idx
        coeffs[i] = (fi if (n - i) % 2 == 0 else (-fi) % p) % p
    return tuple(coeffs)


def has_root(f, p):
    for a in range(p):
        acc = 0
        for c in reversed(f):
            acc = (acc * a + c) % p
        if acc == 0:
            return True
    return False


def conway(p, n, table):
    order = p ** n - 1
    prime_divs = sorted(factorint(order))
    if n == 1:
        for f0 in range(p):
            f = ((-f0) % p, 1)
            ring = ModRing(f, p)
            if x_order_is(ring, p - 1, sorted(factorint(p - 1))):
                return f
        raise RuntimeError("no primitive root found")
    g0 = table[(p, 1)]
    f0 = (-g0[0]) % p
    word = [0] * (n - 1)
    count = 0
    while True:
        count += 1
        f = word_to_poly(tuple(word) + (f0,), n, p)
        if not has_root(f, p):
            ring = ModRing(f, p)
            if (is_irreducible(ring)
                    and x_order_is(ring, order, prime_divs)
                    and compatible(ring, n, p, table)):
                print(f"#   tried {count} candidates", file=sys.stderr)
                return f
        for pos in range(n - 2, -1, -1):
            word[pos] += 1
            if word[pos] < p:
                break
            word[pos] = 0
        else:
            raise RuntimeError(f"search exhausted for p={p} n={n}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    ap.add_argument("--primes", type=int, nargs="+", required=True)
    ap.add_argument("--max-deg", type=int, default=MAX_DEG)
    args = ap.parse_args()

    try:
        with open(args.out) as fh:
            stored = json.load(fh)
    except FileNotFoundError:
        stored = {}

    table = {tuple(map(int, k.split(","))): tuple(v) for k, v in stored.items()}
    for p in args.primes:
        for n in range(1, args.max_deg + 1):
            if (p, n) in table:
                continue
            t0 = time.time()
            table[(p, n)] = conway(p, n, table)
            print(f"# p={p} n={n}  {time.time() - t0:.1f}s  {table[(p, n)]}",
                  file=sys.stderr, flush=True)
            stored = {f"{q},{m}": list(v) for (q, m), v in table.items()}
            with open(args.out, "w") as fh:
                json.dump(stored, fh)


if __name__ == "__main__":
    main()
