"""Fixed-width binary codes used as index keys and similarity fingerprints."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

CANONICAL_WIDTH = 128


@dataclass(frozen=True)
class HashCode:
    """Immutable binary code of `width` bits; bit j is ``(value >> j) & 1``.

    Equality and hashing are bitwise, so codes work directly as dict keys.
    """

    value: int
    width: int = CANONICAL_WIDTH

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError(f"code width must be >= 1, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"value does not fit in {self.width} bits")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> HashCode:
        """Build a code from bit 0 upward; each bit must be 0 or 1."""
        value = 0
        width = 0
        for j, bit in enumerate(bits):
            if bit not in (0, 1):
                raise ValueError(f"bit {j} is {bit!r}, expected 0 or 1")
            value |= bit << j
            width += 1
        if width == 0:
            raise ValueError("cannot build a zero-width code")
        return cls(value, width)

    @classmethod
    def from_bytes(cls, data: bytes, width: int) -> HashCode:
        if len(data) != _byte_len(width):
            raise ValueError(f"expected {_byte_len(width)} bytes for width {width}, got {len(data)}")
        return cls(int.from_bytes(data, "little"), width)

    @classmethod
    def zeros(cls, width: int = CANONICAL_WIDTH) -> HashCode:
        return cls(0, width)

    @classmethod
    def ones(cls, width: int = CANONICAL_WIDTH) -> HashCode:
        return cls((1 << width) - 1, width)

    def bit(self, j: int) -> int:
        if not 0 <= j < self.width:
            raise IndexError(f"bit index {j} out of range for width {self.width}")
        return (self.value >> j) & 1

    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> j) & 1 for j in range(self.width))

    def to_bytes(self) -> bytes:
        """Little-endian packed form; width must be a whole number of bytes."""
        if self.width % 8 != 0:
            raise ValueError(f"width {self.width} is not a multiple of 8")
        return self.value.to_bytes(self.width // 8, "little")

    def popcount(self) -> int:
        return self.value.bit_count()

    def __str__(self) -> str:
        return "".join(str((self.value >> j) & 1) for j in range(self.width))


def _byte_len(width: int) -> int:
    if width % 8 != 0:
        raise ValueError(f"width {width} is not a multiple of 8")
    return width // 8
