"""Finite fields F_q as integer labels 0..q-1 with numpy lookup tables."""
from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np


class FieldError(ValueError):
    pass


def factor_prime_power(q: int):
    if q < 2:
        raise FieldError(f"{q} is not a prime power")
    p = 2
    while p * p <= q and q % p:
        p += 1
    if q % p:
        p = q
    k, r = 0, q
    while r % p == 0:
        r //= p
        k += 1
    if r != 1:
        raise FieldError(f"{q} is not a prime power")
    return p, k


def _poly_mulmod(a, b, mod, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    k = len(mod) - 1
    for i in range(len(out) - 1, k - 1, -1):
        c = out[i]
        if c:
            for j in range(k + 1):
                out[i - k + j] = (out[i - k + j] - c * mod[j]) % p
    return out[:k] + [0] * (k - len(out[:k]))


def _irreducible(p, k):
    # monic degree-k polynomial without roots in any proper subfield: test by
    # checking that x generates a multiplicative group of order p^k - 1
    for tail in product(range(p), repeat=k):
        mod = list(tail) + [1]
        if mod[0] == 0:
            continue
        cur = [0, 1] + [0] * (k - 2) if k > 1 else [0]
        one = [1] + [0] * (k - 1)
        x = cur[:]
        order = 1
        seen_one = False
        while order <= p ** k:
            if cur == one:
                seen_one = True
                break
            cur = _poly_mulmod(cur, x, mod, p)
            order += 1
        if seen_one and order == p ** k - 1:
            return mod
    raise FieldError(f"no primitive polynomial of degree {k} over F_{p}")


class Field:
    """Elements are ints in ``range(q)``; 0 and 1 are the field's zero and one."""

    def __init__(self, q: int):
        self.q = q
        self.p, self.k = factor_prime_power(q)
        self.prime = self.k == 1
        if self.prime:
            self.add_t = self.mul_t = None
        else:
            self._build_tables()

    def _build_tables(self):
        p, k, q = self.p, self.k, self.q
        mod = _irreducible(p, k)

        def to_vec(n):
            return [(n // p ** i) % p for i in range(k)]

        def to_int(v):
            return sum(c * p ** i for i, c in enumerate(v))

        add = np.zeros((q, q), dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            va = to_vec(a)
            for b in range(q):
                vb = to_vec(b)
                add[a, b] = to_int([(x + y) % p for x, y in zip(va, vb)])
                mul[a, b] = to_int(_poly_mulmod(va, vb, mod, p))
        self.add_t, self.mul_t = add, mul
        self.neg_t = np.array([int(np.argmax(add[a] == 0)) for a in range(q)], dtype=np.int64)

    def add(self, a, b):
        return (a + b) % self.p if self.prime else self.add_t[a, b]

    def mul(self, a, b):
        return (a * b) % self.p if self.prime else self.mul_t[a, b]

    def scalar(self, c: int):
        """Image of an integer in the field."""
        c %= self.p
        if self.prime:
            return c
        # c * 1 in characteristic p: the label of c is c itself (constant polynomial)
        return c


@lru_cache(maxsize=16)
def get_field(q: int) -> Field:
    return Field(q)
