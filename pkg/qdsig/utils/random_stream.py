# qdsig/utils/random_stream.py
import hashlib
from typing import List, Tuple

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(seed: int, label: str) -> int:
    """Derive a 64-bit child seed from a parent seed and a label"""
    digest = hashlib.sha256(f"{seed & MASK64}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class RandomStream:
    """Seeded source of randomness; every draw advances the counter"""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.counter = 0
        self._generator = np.random.default_rng(self.seed)

    def spawn(self, label: str) -> "RandomStream":
        """Independent child stream keyed by label (does not advance this stream)"""
        return RandomStream(derive_seed(self.seed, label))

    def random(self) -> float:
        self.counter += 1
        return float(self._generator.random())

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def bits(self, n: int) -> Tuple[int, ...]:
        self.counter += 1
        if n == 0:
            return ()
        return tuple(int(b) for b in self._generator.integers(0, 2, size=n))

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)"""
        self.counter += 1
        return int(self._generator.integers(low, high))

    def permutation(self, n: int) -> List[int]:
        self.counter += 1
        return [int(i) for i in self._generator.permutation(n)]

    def sample_positions(self, n: int, k: int) -> List[int]:
        """k distinct positions out of n, sorted"""
        self.counter += 1
        chosen = self._generator.choice(n, size=min(k, n), replace=False)
        return sorted(int(i) for i in chosen)

    def complex_normal(self, size: int) -> np.ndarray:
        self.counter += 1
        real = self._generator.standard_normal(size)
        imag = self._generator.standard_normal(size)
        return real + 1j * imag
