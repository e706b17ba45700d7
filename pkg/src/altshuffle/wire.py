"""Canonical message encoding and the size formulas built on it.

Every payload that crosses the simulated network is produced by a Writer
here, so byte counts are reproducible: u32 fields are 4 bytes, variable
fields carry a u32 length or count prefix, and group scalars, elements,
and ciphertexts use their fixed-width encodings.  The message-level cost
model adds up the same size_* formulas instead of building payloads, and
an invariant test holds the two accountings equal.

Transport adds ENVELOPE_BYTES per hop for addressing and framing.
"""

from __future__ import annotations

from typing import Sequence

from .group import Ciphertext, SchnorrGroup

ENVELOPE_BYTES = 16


class Writer:
    def __init__(self, group: SchnorrGroup) -> None:
        self.group = group
        self._parts: list[bytes] = []

    def u32(self, x: int) -> "Writer":
        self._parts.append(int(x).to_bytes(4, "little"))
        return self

    def raw(self, data: bytes) -> "Writer":
        self.u32(len(data))
        self._parts.append(data)
        return self

    def scalar(self, s: int) -> "Writer":
        self._parts.append(self.group.encode_scalar(s))
        return self

    def element(self, x: int) -> "Writer":
        self._parts.append(self.group.encode_element(x))
        return self

    def ciphertext(self, ct: Ciphertext) -> "Writer":
        return self.element(ct.c1).element(ct.c2)

    def u32_list(self, xs: Sequence[int]) -> "Writer":
        self.u32(len(xs))
        for x in xs:
            self.u32(x)
        return self

    def scalar_list(self, xs: Sequence[int]) -> "Writer":
        self.u32(len(xs))
        for x in xs:
            self.scalar(x)
        return self

    def element_list(self, xs: Sequence[int]) -> "Writer":
        self.u32(len(xs))
        for x in xs:
            self.element(x)
        return self

    def ciphertext_list(self, cts: Sequence[Ciphertext]) -> "Writer":
        self.u32(len(cts))
        for ct in cts:
            self.ciphertext(ct)
        return self

    def raw_list(self, items: Sequence[bytes]) -> "Writer":
        self.u32(len(items))
        for item in items:
            self.raw(item)
        return self

    def done(self) -> bytes:
        return b"".join(self._parts)


class WireError(ValueError):
    pass


class Reader:
    def __init__(self, group: SchnorrGroup, data: bytes) -> None:
        self.group = group
        self.data = data
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise WireError("payload truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return int.from_bytes(self._take(4), "little")

    def raw(self) -> bytes:
        return self._take(self.u32())

    def scalar(self) -> int:
        return self.group.decode_scalar(self._take(self.group.scalar_bytes))

    def element(self) -> int:
        return self.group.decode_element(self._take(self.group.element_bytes))

    def ciphertext(self) -> Ciphertext:
        return Ciphertext(self.element(), self.element())

    def u32_list(self) -> list[int]:
        return [self.u32() for _ in range(self.u32())]

    def scalar_list(self) -> list[int]:
        return [self.scalar() for _ in range(self.u32())]

    def element_list(self) -> list[int]:
        return [self.element() for _ in range(self.u32())]

    def ciphertext_list(self) -> list[Ciphertext]:
        return [self.ciphertext() for _ in range(self.u32())]

    def raw_list(self) -> list[bytes]:
        return [self.raw() for _ in range(self.u32())]

    def expect_end(self) -> None:
        if self.pos != len(self.data):
            raise WireError("trailing bytes in payload")


# -- size formulas ------------------------------------------------------
#
# One formula per Writer method; a message's size is the sum over its
# fields, which the cost model composes without touching real payloads.

SCALAR_BYTES = 32
ELEMENT_BYTES = 32
CT_BYTES = 2 * ELEMENT_BYTES


def size_u32() -> int:
    return 4


def size_raw(n: int) -> int:
    return 4 + n


def size_scalar() -> int:
    return SCALAR_BYTES


def size_element() -> int:
    return ELEMENT_BYTES


def size_ciphertext() -> int:
    return CT_BYTES


def size_u32_list(n: int) -> int:
    return 4 + 4 * n


def size_scalar_list(n: int) -> int:
    return 4 + SCALAR_BYTES * n


def size_element_list(n: int) -> int:
    return 4 + ELEMENT_BYTES * n


def size_ciphertext_list(n: int) -> int:
    return 4 + CT_BYTES * n


def size_raw_list(item_sizes: Sequence[int]) -> int:
    return 4 + sum(4 + s for s in item_sizes)
