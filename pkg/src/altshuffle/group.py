"""Prime-order group arithmetic and ElGamal operations.

All protocol arithmetic happens in a Schnorr group: the order-q subgroup of
quadratic residues mod a safe prime P = 2q + 1.  Three fixed instances are
exported:

  * MODP_GROUP  -- 256-bit modulus, the production-scale choice.  Elements and
    scalars serialize to 32 bytes.
  * TINY_GROUP  -- 31-bit modulus, small enough for exhaustive oracles.
  * MICRO_GROUP -- P = 23, used where tests enumerate entire distributions.

Exponentiations are the unit of cost everywhere, so every operation that
performs one takes an optional ExpCounter and increments it.
"""

from __future__ import annotations

import hashlib
from typing import NamedTuple, Optional

try:
    from gmpy2 import powmod as _powmod, jacobi as _jacobi

    def _pow(base: int, exp: int, mod: int) -> int:
        return int(_powmod(base, exp, mod))

    def _jac(a: int, n: int) -> int:
        return int(_jacobi(a, n))

except ImportError:  # pure fallback, ~7x slower

    def _pow(base: int, exp: int, mod: int) -> int:
        return pow(base, exp, mod)

    def _jac(a: int, n: int) -> int:
        a %= n
        t = 1
        while a:
            while a % 2 == 0:
                a //= 2
                if n % 8 in (3, 5):
                    t = -t
            a, n = n, a
            if a % 4 == 3 and n % 4 == 3:
                t = -t
            a %= n
        return t if n == 1 else 0


class GroupError(ValueError):
    pass


class PayloadTooLarge(GroupError):
    pass


class DecodingError(GroupError):
    pass


class ExpCounter:
    """Mutable tally of group exponentiations, one handle per party."""

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int = 1) -> None:
        self.count += n

    def __repr__(self) -> str:
        return f"ExpCounter({self.count})"


class SchnorrGroup:
    """Subgroup of quadratic residues mod a safe prime P = 2q + 1.

    Elements are ints in [1, P); scalars are ints mod q.  Both serialize to
    fixed-width little-endian byte strings, and deserialization accepts only
    the canonical encoding (value < P, subgroup membership verified).
    """

    def __init__(
        self,
        name: str,
        p: int,
        g: int,
        *,
        element_bytes: int = 32,
        payload_mode: str = "direct",
        payload_capacity: int = 16,
        chunk_bits: int = 32,
    ) -> None:
        if p % 4 != 3:
            raise GroupError("modulus must be 3 mod 4 so -1 is a non-residue")
        self.name = name
        self.p = p
        self.order = (p - 1) // 2
        self.g = g
        self.element_bytes = element_bytes
        self.scalar_bytes = element_bytes
        if payload_mode not in ("direct", "chunked"):
            raise GroupError(f"unknown payload mode {payload_mode!r}")
        self.payload_mode = payload_mode
        self.payload_capacity = payload_capacity
        self.chunk_bits = chunk_bits
        if payload_mode == "chunked" and chunk_bits >= self.order.bit_length():
            raise GroupError("chunk width must fit below the group order")
        self._bsgs_table: Optional[dict] = None
        self._bsgs_m = 0
        if _jac(g, p) != 1 or g in (0, 1):
            raise GroupError("generator must be a non-trivial quadratic residue")

    # -- core arithmetic -------------------------------------------------

    @property
    def identity(self) -> int:
        return 1

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        return _pow(a, self.p - 2, self.p)

    def pow(self, base: int, exp: int, counter: ExpCounter | None = None) -> int:
        if counter is not None:
            counter.add()
        return _pow(base, exp % self.order, self.p)

    def is_element(self, x: int) -> bool:
        return 0 < x < self.p and _jac(x, self.p) == 1

    def rand_scalar(self, rng) -> int:
        return rng.randrange(self.order)

    def rand_element(self, rng) -> int:
        # g generates the whole subgroup (prime order), so this is uniform.
        return _pow(self.g, rng.randrange(self.order), self.p)

    # -- serialization ---------------------------------------------------

    def encode_element(self, x: int) -> bytes:
        return x.to_bytes(self.element_bytes, "little")

    def decode_element(self, data: bytes) -> int:
        if len(data) != self.element_bytes:
            raise DecodingError(f"element must be {self.element_bytes} bytes")
        x = int.from_bytes(data, "little")
        if not self.is_element(x):
            raise DecodingError("not a canonical group element encoding")
        return x

    def encode_scalar(self, s: int) -> bytes:
        return (s % self.order).to_bytes(self.scalar_bytes, "little")

    def decode_scalar(self, data: bytes) -> int:
        if len(data) != self.scalar_bytes:
            raise DecodingError(f"scalar must be {self.scalar_bytes} bytes")
        s = int.from_bytes(data, "little")
        if s >= self.order:
            raise DecodingError("scalar out of range")
        return s

    # -- payload embedding -----------------------------------------------
    #
    # direct: value v maps to whichever of {v+1, P-(v+1)} is a residue; the
    # map is invertible because payloads stay far below (P-1)/2.
    #
    # chunked: split into chunk_bits-wide chunks, encode each as g^chunk,
    # recover by baby-step giant-step.

    @property
    def elements_per_payload(self) -> int:
        if self.payload_mode == "direct":
            return 1
        return (self.payload_capacity * 8 + self.chunk_bits - 1) // self.chunk_bits

    def encode_payload(self, data: bytes) -> list[int]:
        if len(data) > self.payload_capacity:
            raise PayloadTooLarge(
                f"payload of {len(data)} bytes exceeds capacity {self.payload_capacity}"
            )
        data = data.ljust(self.payload_capacity, b"\x00")
        if self.payload_mode == "direct":
            v = int.from_bytes(data, "little") + 1
            if v >= (self.p - 1) // 2:
                raise PayloadTooLarge("payload exceeds direct embedding range")
            return [v if _jac(v, self.p) == 1 else self.p - v]
        value = int.from_bytes(data, "little")
        mask = (1 << self.chunk_bits) - 1
        out = []
        for _ in range(self.elements_per_payload):
            out.append(_pow(self.g, value & mask, self.p))
            value >>= self.chunk_bits
        return out

    def decode_payload(self, elements: list[int]) -> bytes:
        if self.payload_mode == "direct":
            if len(elements) != 1:
                raise DecodingError("direct payloads use exactly one element")
            x = elements[0]
            v = min(x, self.p - x) - 1
            if v < 0 or v >= 1 << (self.payload_capacity * 8):
                raise DecodingError("element is not a payload embedding")
            return v.to_bytes(self.payload_capacity, "little")
        if len(elements) != self.elements_per_payload:
            raise DecodingError("wrong chunk count for payload")
        value = 0
        for i, el in enumerate(elements):
            value |= self._dlog_chunk(el) << (i * self.chunk_bits)
        return value.to_bytes(self.payload_capacity, "little")

    def _dlog_chunk(self, el: int) -> int:
        # baby-step giant-step over the chunk range
        m = 1 << ((self.chunk_bits + 1) // 2)
        if self._bsgs_table is None or self._bsgs_m != m:
            table = {}
            acc = 1
            for i in range(m):
                table.setdefault(acc, i)
                acc = (acc * self.g) % self.p
            self._bsgs_table = table
            self._bsgs_m = m
            self._bsgs_stride = self.inv(_pow(self.g, m, self.p))
        table = self._bsgs_table
        x = el
        limit = (1 << self.chunk_bits) // m + 1
        for j in range(limit + 1):
            if x in table:
                v = j * m + table[x]
                if v < 1 << self.chunk_bits:
                    return v
            x = (x * self._bsgs_stride) % self.p
        raise DecodingError("element is not a chunk encoding")


MODP_GROUP = SchnorrGroup(
    "modp256",
    0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF72EF,
    4,
    payload_mode="direct",
    payload_capacity=16,
)

TINY_GROUP = SchnorrGroup(
    "tiny31",
    2147483579,
    4,
    payload_mode="chunked",
    payload_capacity=4,
    chunk_bits=16,
)

MICRO_GROUP = SchnorrGroup(
    "micro23",
    23,
    4,
    payload_mode="chunked",
    payload_capacity=1,
    chunk_bits=3,
)

GROUPS = {g.name: g for g in (MODP_GROUP, TINY_GROUP, MICRO_GROUP)}


# -- ElGamal ------------------------------------------------------------


class KeyPair(NamedTuple):
    sk: int
    pk: int


class Ciphertext(NamedTuple):
    c1: int
    c2: int


def keygen(group: SchnorrGroup, rng, counter: ExpCounter | None = None) -> KeyPair:
    sk = group.rand_scalar(rng)
    return KeyPair(sk, group.pow(group.g, sk, counter))


def encrypt(
    group: SchnorrGroup, pk: int, m: int, r: int, counter: ExpCounter | None = None
) -> Ciphertext:
    """Encrypt group element m under pk with explicit randomness r."""
    return Ciphertext(
        group.mul(m, group.pow(pk, r, counter)), group.pow(group.g, r, counter)
    )


def decrypt(
    group: SchnorrGroup, sk: int, ct: Ciphertext, counter: ExpCounter | None = None
) -> int:
    return group.mul(ct.c1, group.inv(group.pow(ct.c2, sk, counter)))


def shift_key(
    group: SchnorrGroup, ct: Ciphertext, a: int, counter: ExpCounter | None = None
) -> Ciphertext:
    """Re-target ct so it decrypts under sk + a instead of sk."""
    return Ciphertext(group.mul(ct.c1, group.pow(ct.c2, a, counter)), ct.c2)


def reencrypt(
    group: SchnorrGroup, pk: int, ct: Ciphertext, r: int, counter: ExpCounter | None = None
) -> Ciphertext:
    """Multiply in a fresh encryption of the identity with randomness r."""
    return Ciphertext(
        group.mul(ct.c1, group.pow(pk, r, counter)),
        group.mul(ct.c2, group.pow(group.g, r, counter)),
    )


def rerandomize(
    group: SchnorrGroup, pk: int, ct: Ciphertext, rng, counter: ExpCounter | None = None
) -> Ciphertext:
    return reencrypt(group, pk, ct, group.rand_scalar(rng), counter)


def encrypt_payload(
    group: SchnorrGroup, pk: int, data: bytes, rng, counter: ExpCounter | None = None
) -> list[Ciphertext]:
    """One ciphertext per embedded element; chunks stay in order."""
    return [
        encrypt(group, pk, m, group.rand_scalar(rng), counter)
        for m in group.encode_payload(data)
    ]


def decrypt_payload(
    group: SchnorrGroup, sk: int, cts: list[Ciphertext], counter: ExpCounter | None = None
) -> bytes:
    return group.decode_payload([decrypt(group, sk, ct, counter) for ct in cts])


def hash_scalar(group: SchnorrGroup, data: bytes) -> int:
    """Hash bytes to a scalar, for challenge derivation."""
    h = hashlib.sha256(data).digest()
    return int.from_bytes(h, "little") % group.order
