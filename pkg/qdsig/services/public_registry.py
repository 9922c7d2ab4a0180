# qdsig/services/public_registry.py
import logging
from typing import Any, Dict, List

from qdsig.core.exceptions import KeyLengthError
from qdsig.models.keys import DerivedX, KeyIndex, KeyPairSet
from qdsig.models.quantum import Signature, StateVector
from qdsig.utils.random_stream import RandomStream

logger = logging.getLogger(__name__)


class PublicKeyRegistry:
    """Alice's published fingerprint states |y_{i,j}>

    Honest verifiers may draw as many regenerated copies as they need.
    Adversary access goes through measure_copies, which counts the copies
    consumed and releases at most the budgeted number of secret bits.
    """

    def __init__(self, keys: KeyPairSet):
        self.n_msg = keys.n_msg
        self._states: Dict[KeyIndex, StateVector] = keys.public_states()
        self._leak_source = keys
        self.honest_copies = 0
        self.adversary_copies: Dict[KeyIndex, int] = {}
        self.leaked_bits: Dict[KeyIndex, int] = {}

    def __len__(self) -> int:
        return len(self._states)

    @property
    def num_blocks(self) -> int:
        return 2 * self.n_msg

    def indices(self) -> List[KeyIndex]:
        return sorted(self._states)

    def public_state(self, i: int, j: int) -> StateVector:
        self.honest_copies += 1
        return self._states[(i, j)]

    def signature_for(self, X: DerivedX) -> Signature:
        """Signature blocks |y_{1,X_1}>, ..., |y_{2n,X_2n}>"""
        if len(X) != self.num_blocks:
            raise KeyLengthError("X must select one key per signature block",
                                 field="X", expected=self.num_blocks, actual=len(X))
        return tuple(self.public_state(i, X.bits[i - 1]) for i in range(1, self.num_blocks + 1))

    def measure_copies(self, i: int, j: int, copies: int, budget_bits: int,
                       rng: RandomStream) -> Dict[int, int]:
        """Metered adversary access: `copies` measured copies reveal `budget_bits` uniformly placed bits"""
        secret = self._leak_source.secret(i, j)
        self.adversary_copies[(i, j)] = self.adversary_copies.get((i, j), 0) + copies
        count = min(budget_bits, len(secret))
        positions = rng.sample_positions(len(secret), count) if count else []
        self.leaked_bits[(i, j)] = self.leaked_bits.get((i, j), 0) + len(positions)
        logger.debug(f"Adversary measured {copies} copies of y_{i},{j}: {len(positions)} bits revealed")
        return {p: secret.bits[p] for p in positions}

    def get_statistics(self) -> Dict[str, Any]:
        return {
            "public_states": len(self._states),
            "honest_copies": self.honest_copies,
            "adversary_copies": sum(self.adversary_copies.values()),
            "leaked_bits": sum(self.leaked_bits.values()),
        }
