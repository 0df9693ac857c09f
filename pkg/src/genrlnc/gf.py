"""Exact arithmetic in GF(q) for prime q and for GF(256).

Field elements are plain ints (numpy integers in vector form) in [0, q).
Prime fields use modular arithmetic; GF(256) uses log/exp tables over the
reduction polynomial x^8 + x^4 + x^3 + x^2 + 1 (mask 0x11D, generator x),
plus a full 256x256 product table for vectorized row operations.
"""

from __future__ import annotations

import numpy as np

GF256_REDUCTION = 0x11D


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def shift_reduce_mul(a: int, b: int, reduction: int = GF256_REDUCTION, width: int = 8) -> int:
    """Carry-less product of a and b reduced by the field polynomial.

    Slow reference used to cross-check the table-driven multiply.
    """
    acc = 0
    for i in range(b.bit_length()):
        if (b >> i) & 1:
            acc ^= a << i
    for bit in range(acc.bit_length() - 1, width - 1, -1):
        if (acc >> bit) & 1:
            acc ^= reduction << (bit - width)
    return acc


class FieldSpec:
    """Arithmetic context for GF(q), q prime or exactly 256."""

    def __init__(self, q: int):
        self.q = q
        if q == 256:
            self.kind = "binary-extension"
            self.reduction: int | None = GF256_REDUCTION
            self.dtype = np.uint8
            self._build_tables()
        elif _is_prime(q):
            self.kind = "prime"
            self.reduction = None
            self.dtype = np.int64
        else:
            raise ValueError(f"field order must be prime or 256, got {q}")

    def _build_tables(self) -> None:
        # exp is doubled so scalar mul can skip the mod-255 step
        exp = np.zeros(510, dtype=np.uint8)
        log = np.zeros(256, dtype=np.int16)
        x = 1
        for i in range(255):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & 0x100:
                x ^= GF256_REDUCTION
        exp[255:510] = exp[0:255]
        self._exp = exp
        self._log = log
        mul = np.zeros((256, 256), dtype=np.uint8)
        ln = log[1:].astype(np.int32)
        mul[1:, 1:] = exp[(ln[:, None] + ln[None, :]) % 255]
        self._mul_table = mul

    def __repr__(self) -> str:
        return f"FieldSpec(q={self.q})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldSpec) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("FieldSpec", self.q))

    def _check(self, a: int) -> None:
        if not 0 <= a < self.q:
            raise ValueError(f"element {a!r} is not in GF({self.q})")

    # -- scalar operations ------------------------------------------------

    def add(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        if self.kind == "prime":
            return (a + b) % self.q
        return a ^ b

    def sub(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        if self.kind == "prime":
            return (a - b) % self.q
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        if self.kind == "prime":
            return (a * b) % self.q
        if a == 0 or b == 0:
            return 0
        return int(self._exp[self._log[a] + self._log[b]])

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.q})")
        if self.kind == "prime":
            return pow(a, -1, self.q)
        return int(self._exp[(255 - self._log[a]) % 255])

    def random_element(self, rng: np.random.Generator) -> int:
        """Uniform draw from [0, q); exact, not a floored float."""
        return int(rng.integers(0, self.q))

    def random_vector(self, rng: np.random.Generator, size) -> np.ndarray:
        """i.i.d. uniform field elements with the field's native dtype."""
        return rng.integers(0, self.q, size=size, dtype=self.dtype)

    # -- vectorized operations (codec hot path) ---------------------------

    def subtract(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.kind == "prime":
            return (a - b) % self.q
        return a ^ b

    def isub(self, dst: np.ndarray, src: np.ndarray) -> None:
        """dst -= src in place."""
        if self.kind == "prime":
            np.subtract(dst, src, out=dst)
            np.mod(dst, self.q, out=dst)
        else:
            np.bitwise_xor(dst, src, out=dst)

    def scale(self, vec: np.ndarray, c: int) -> np.ndarray:
        if self.kind == "prime":
            return (vec * c) % self.q
        return self._mul_table[c, vec]

    def scale_rows(self, rows: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        """Row i of the result is coeffs[i] * rows[i]."""
        if self.kind == "prime":
            return (rows * coeffs[:, None]) % self.q
        return self._mul_table[coeffs[:, None], rows]

    def sum_rows(self, rows: np.ndarray) -> np.ndarray:
        # prime path: row count * q^2 must fit in int64
        if self.kind == "prime":
            return rows.sum(axis=0) % self.q
        return np.bitwise_xor.reduce(rows, axis=0)

    def row_combination(self, coeffs: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Field sum over i of coeffs[i] * rows[i] (one elimination sweep)."""
        if self.kind == "prime":
            return (coeffs @ rows) % self.q
        return np.bitwise_xor.reduce(self._mul_table[coeffs[:, None], rows], axis=0)

    def outer(self, col: np.ndarray, vec: np.ndarray) -> np.ndarray:
        """Products col[i] * vec[j], shape (len(col), len(vec))."""
        if self.kind == "prime":
            return (col[:, None] * vec[None, :]) % self.q
        return self._mul_table[col[:, None], vec[None, :]]

    def combine(self, matrix: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        """Linear combination of matrix columns: matrix @ coeffs over the field."""
        if self.kind == "prime":
            return (matrix @ coeffs) % self.q
        return np.bitwise_xor.reduce(self._mul_table[coeffs[None, :], matrix], axis=1)
