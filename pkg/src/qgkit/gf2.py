"""GF(2^r) in polynomial basis and the quasigroups x*y = a x + (a+1) y."""

from __future__ import annotations

from .table import CayleyTable

# bit i is the coefficient of X^i
IRREDUCIBLE = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,
}


def gf_mul(a: int, b: int, r: int) -> int:
    poly = IRREDUCIBLE[r]
    top = 1 << r
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return out


def gf_inverse(a: int, r: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse")
    # a^(2^r - 2)
    result, base, e = 1, a, (1 << r) - 2
    while e:
        if e & 1:
            result = gf_mul(result, base, r)
        base = gf_mul(base, base, r)
        e >>= 1
    return result


def gf2r_construct(r: int, a: int) -> CayleyTable:
    """x*y = a x + (a+1) y over GF(2^r); idempotent and medial for a not in {0, 1}."""
    if r == 1:
        raise ValueError("GF(2) has no element a with a and a+1 both nonzero")
    if r not in IRREDUCIBLE:
        raise ValueError(f"r must be in 2..8, got {r}")
    if not 0 <= a < 1 << r:
        raise ValueError(f"a={a} is not an element of GF(2^{r})")
    if a == 0:
        raise ValueError("invalid a: a = 0 is not invertible")
    if a == 1:
        raise ValueError("invalid a: a+1 = 0 is not invertible")
    b = a ^ 1
    n = 1 << r
    ax = [gf_mul(a, x, r) for x in range(n)]
    by = [gf_mul(b, y, r) for y in range(n)]
    return CayleyTable(tuple(tuple(ax[x] ^ by[y] for y in range(n)) for x in range(n)))
