# qdsig/utils/bits.py
from typing import Iterable, List, Sequence, Tuple

from qdsig.core.config import settings
from qdsig.core.exceptions import KeyLengthError

Bits = Tuple[int, ...]


def as_bits(values: Iterable[int]) -> Bits:
    """Normalize an iterable of 0/1 values into a bit tuple"""
    bits = tuple(int(v) for v in values)
    if any(b not in (0, 1) for b in bits):
        raise KeyLengthError("Bit sequence may only contain 0 and 1", field="bits")
    return bits


def bits_from_str(text: str) -> Bits:
    return as_bits(int(ch) for ch in text.strip())


def bits_to_str(bits: Sequence[int]) -> str:
    return "".join(str(b) for b in bits)


def int_to_bits(value: int, width: int) -> Bits:
    """Big-endian fixed-width encoding"""
    if value < 0 or value >= (1 << width):
        raise KeyLengthError(f"Value {value} does not fit in {width} bits",
                             field="value", expected=width)
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def xor_bits(a: Sequence[int], b: Sequence[int]) -> Bits:
    if len(a) != len(b):
        raise KeyLengthError("XOR operands differ in length", field="xor",
                             expected=len(a), actual=len(b))
    return tuple(int(x) ^ int(y) for x, y in zip(a, b))


def bits_to_hex(bits: Sequence[int]) -> str:
    """Hex string, left-padded to a whole number of nibbles"""
    if not bits:
        return ""
    width = -(-len(bits) // 4)
    return format(bits_to_int(bits), f"0{width}x")


def hex_to_bits(text: str, length: int) -> Bits:
    if length == 0:
        return ()
    return int_to_bits(int(text, 16), length)


def pack_fields(fields: Sequence[Sequence[int]]) -> Bits:
    """Concatenate fields, each preceded by a big-endian length prefix"""
    width = settings.LENGTH_PREFIX_BITS
    packed: List[int] = []
    for field in fields:
        packed.extend(int_to_bits(len(field), width))
        packed.extend(int(b) for b in field)
    return tuple(packed)


def unpack_fields(bits: Sequence[int], count: int) -> List[Bits]:
    """Inverse of pack_fields; rejects truncated or trailing data"""
    width = settings.LENGTH_PREFIX_BITS
    fields: List[Bits] = []
    pos = 0
    for index in range(count):
        if pos + width > len(bits):
            raise KeyLengthError("Truncated length prefix", field=f"field[{index}]")
        length = bits_to_int(bits[pos:pos + width])
        pos += width
        if pos + length > len(bits):
            raise KeyLengthError("Field runs past end of message", field=f"field[{index}]",
                                 expected=length, actual=len(bits) - pos)
        fields.append(tuple(int(b) for b in bits[pos:pos + length]))
        pos += length
    if pos != len(bits):
        raise KeyLengthError("Trailing bits after last field", field="message",
                             expected=pos, actual=len(bits))
    return fields


def packed_length(field_lengths: Sequence[int]) -> int:
    return sum(settings.LENGTH_PREFIX_BITS + n for n in field_lengths)
