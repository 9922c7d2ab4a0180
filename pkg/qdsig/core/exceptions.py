# qdsig/core/exceptions.py
from typing import Any, Dict, Optional


class QuantumStateError(Exception):
    """Exception raised for invalid statevector or Pauli inputs"""

    def __init__(self, message: str, expected: Optional[int] = None,
                 actual: Optional[int] = None, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.expected = expected
        self.actual = actual
        self.details = details or {}
        super().__init__(self.message)


class CodeConstructionError(Exception):
    """Exception raised when no fingerprint code meets the requested bound"""

    def __init__(self, message: str, w: Optional[int] = None,
                 c_rate: Optional[int] = None, target_delta: Optional[float] = None):
        self.message = message
        self.w = w
        self.c_rate = c_rate
        self.target_delta = target_delta
        super().__init__(self.message)


class StabilizerCodeError(Exception):
    """Exception raised when a stabilizer code violates its invariants"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class DecodeError(Exception):
    """Exception raised when a state leaves the codespace after offset removal"""

    def __init__(self, message: str, block: Optional[int] = None,
                 generator: Optional[int] = None):
        self.message = message
        self.block = block
        self.generator = generator
        super().__init__(self.message)


class KeyExhaustedError(Exception):
    """Exception raised when a one-time key has no unconsumed bits left"""

    def __init__(self, message: str, key_name: Optional[str] = None,
                 requested: Optional[int] = None, remaining: Optional[int] = None):
        self.message = message
        self.key_name = key_name
        self.requested = requested
        self.remaining = remaining
        super().__init__(self.message)


class KeyLengthError(Exception):
    """Exception raised when key or message lengths disagree"""

    def __init__(self, message: str, field: Optional[str] = None,
                 expected: Optional[int] = None, actual: Optional[int] = None):
        self.message = message
        self.field = field
        self.expected = expected
        self.actual = actual
        super().__init__(self.message)


class ProtocolAbort(Exception):
    """Exception raised when a party aborts the protocol"""

    def __init__(self, message: str, reason: Any = None, party: Optional[str] = None,
                 details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.reason = reason
        self.party = party
        self.details = details or {}
        super().__init__(self.message)


class PlanValidationError(Exception):
    """Exception raised for invalid experiment plans or session configs"""

    def __init__(self, message: str, field: Optional[str] = None,
                 value: Optional[Any] = None):
        self.message = message
        self.field = field
        self.value = value
        super().__init__(self.message)


class ReportIOError(Exception):
    """Exception raised when reports or transcripts cannot be read or written"""

    def __init__(self, message: str, path: Optional[str] = None):
        self.message = message
        self.path = path
        super().__init__(self.message)
