# qdsig/models/codes.py
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from qdsig.core.exceptions import CodeConstructionError, KeyLengthError
from qdsig.models.quantum import PauliString
from qdsig.utils.bits import as_bits, bits_to_hex, bits_to_int, hex_to_bits, int_to_bits, xor_bits


@dataclass(frozen=True, eq=False)
class CodeSpec:
    """Classical code E: F2^w -> F2^m with verified agreement bound delta"""
    w: int
    c_rate: int
    codewords: np.ndarray
    delta: float
    generator: Optional[np.ndarray] = None

    def __post_init__(self):
        table = np.array(self.codewords, dtype=np.uint8)
        if table.shape != (2 ** self.w, self.m):
            raise CodeConstructionError(
                f"Codeword table has shape {table.shape}, expected {(2 ** self.w, self.m)}",
                w=self.w, c_rate=self.c_rate
            )
        if not self.delta < 1.0:
            raise CodeConstructionError("delta must be strictly below 1",
                                        w=self.w, c_rate=self.c_rate, target_delta=self.delta)
        table.setflags(write=False)
        object.__setattr__(self, "codewords", table)

    @property
    def m(self) -> int:
        return self.c_rate * self.w

    @property
    def is_linear(self) -> bool:
        return self.generator is not None

    def codeword(self, index: int) -> Tuple[int, ...]:
        return tuple(int(b) for b in self.codewords[index])

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "w": self.w,
            "c_rate": self.c_rate,
            "m": self.m,
            "delta": self.delta,
            "codewords": [bits_to_hex(row) for row in self.codewords.tolist()],
        }
        if self.generator is not None:
            data["generator"] = [bits_to_hex(row) for row in self.generator.tolist()]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CodeSpec":
        m = int(data["m"])
        table = np.array([hex_to_bits(h, m) for h in data["codewords"]], dtype=np.uint8)
        generator = None
        if data.get("generator"):
            generator = np.array([hex_to_bits(h, m) for h in data["generator"]], dtype=np.uint8)
        return cls(w=int(data["w"]), c_rate=int(data["c_rate"]), codewords=table,
                   delta=float(data["delta"]), generator=generator)


@dataclass(frozen=True)
class Syndrome:
    """Generator-ordered measurement signs: bit i is 1 iff generator i gave -1"""
    bits: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", as_bits(self.bits))

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def value(self) -> int:
        return bits_to_int(self.bits)

    @property
    def is_zero(self) -> bool:
        return not any(self.bits)

    @classmethod
    def zero(cls, length: int) -> "Syndrome":
        return cls((0,) * length)

    @classmethod
    def from_value(cls, value: int, length: int) -> "Syndrome":
        return cls(int_to_bits(value, length))

    def xor(self, other: "Syndrome") -> "Syndrome":
        return Syndrome(xor_bits(self.bits, other.bits))

    def blocks(self, block_length: int) -> List["Syndrome"]:
        if len(self.bits) % block_length:
            raise KeyLengthError("Syndrome does not split into whole blocks",
                                 field="syndrome", expected=block_length, actual=len(self.bits))
        return [Syndrome(self.bits[i:i + block_length])
                for i in range(0, len(self.bits), block_length)]

    @classmethod
    def concat(cls, parts: List["Syndrome"]) -> "Syndrome":
        bits: Tuple[int, ...] = ()
        for part in parts:
            bits += part.bits
        return cls(bits)


@dataclass(frozen=True)
class CodeFamilyKey:
    """Selects one member Q_k of the keyed stabilizer family"""
    bits: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", as_bits(self.bits))

    @property
    def is_zero(self) -> bool:
        return not any(self.bits)


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    """[[n_phys, k_log, distance]] stabilizer code with its syndrome lookup table"""
    name: str
    n_phys: int
    k_log: int
    distance: int
    generators: Tuple[PauliString, ...]
    logical_x: Tuple[PauliString, ...]
    logical_z: Tuple[PauliString, ...]
    coset_reps: Dict[int, PauliString]
    _cache: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @property
    def syndrome_length(self) -> int:
        return self.n_phys - self.k_log

    def coset_rep(self, syndrome: Syndrome) -> PauliString:
        if len(syndrome) != self.syndrome_length:
            raise KeyLengthError("Syndrome length does not match the code",
                                 field="syndrome", expected=self.syndrome_length,
                                 actual=len(syndrome))
        return self.coset_reps[syndrome.value]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "n_phys": self.n_phys,
            "k_log": self.k_log,
            "distance": self.distance,
            "generators": [g.to_dict() for g in self.generators],
            "logical_x": [p.to_dict() for p in self.logical_x],
            "logical_z": [p.to_dict() for p in self.logical_z],
            "coset_reps": {str(k): v.to_dict() for k, v in sorted(self.coset_reps.items())},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StabilizerCode":
        return cls(
            name=data["name"],
            n_phys=int(data["n_phys"]),
            k_log=int(data["k_log"]),
            distance=int(data["distance"]),
            generators=tuple(PauliString.from_dict(g) for g in data["generators"]),
            logical_x=tuple(PauliString.from_dict(p) for p in data["logical_x"]),
            logical_z=tuple(PauliString.from_dict(p) for p in data["logical_z"]),
            coset_reps={int(k): PauliString.from_dict(v) for k, v in data["coset_reps"].items()},
        )
