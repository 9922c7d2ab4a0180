# qdsig/services/selftest.py
"""
Invariant battery behind `qdsig selftest`.

Each suite returns a SuiteResult instead of raising, so the CLI can print one
line per suite and still run the rest. Quick mode shrinks trial counts and the
fingerprint code size.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from qdsig.core.config import settings
from qdsig.core.exceptions import DecodeError, StabilizerCodeError
from qdsig.models.codes import CodeFamilyKey, StabilizerCode, Syndrome
from qdsig.models.keys import QotpKey, SecretKey
from qdsig.models.quantum import PauliString
from qdsig.services import qcrypto, stabilizer
from qdsig.services.fingerprint import build_code, fingerprint
from qdsig.services.quantum_core import (
    apply_pauli, density_matrix, fidelity, random_state, state_with_overlap, swap_test,
    swap_test_circuit_probability, swap_test_pass_probability, trace_distance,
)
from qdsig.utils.bits import int_to_bits
from qdsig.utils.random_stream import RandomStream
from qdsig.utils.stats import within_sigma

logger = logging.getLogger(__name__)

SELFTEST_SEED = 20240601
# statistical tolerance in standard deviations
SIGMA = 4.0


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int = 0
    failures: List[str] = field(default_factory=list)

    def fail(self, message: str):
        self.passed = False
        self.failures.append(message)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        detail = f"{self.checks} checks" if self.passed else "; ".join(self.failures[:3])
        return f"{self.name:<12} {status}  {detail}"


def fingerprint_suite(quick: bool = False, seed: int = SELFTEST_SEED) -> SuiteResult:
    """Exhaustive pairwise overlaps equal agreement/m and stay below delta"""
    result = SuiteResult("fingerprint", True)
    w = 4 if quick else settings.DEFAULT_W
    rng = RandomStream(seed).spawn("fingerprint")
    code = build_code(w, settings.DEFAULT_C_RATE, settings.DEFAULT_TARGET_DELTA, rng)

    states = np.stack([
        fingerprint(code, SecretKey(int_to_bits(u, w)), "register").amplitudes for u in range(2 ** w)
    ])
    overlaps = states.conj() @ states.T
    signs = 1 - 2 * code.codewords.astype(np.int64)
    agreements = (code.m + signs @ signs.T) / 2
    expected = agreements / code.m

    result.checks = overlaps.size
    if np.max(np.abs(overlaps - expected)) > 1e-12:
        result.fail("overlap differs from agreement fraction")
    off_diagonal = overlaps.real[~np.eye(2 ** w, dtype=bool)]
    if off_diagonal.max() > code.delta + 1e-12:
        result.fail(f"overlap {off_diagonal.max():.4f} exceeds delta {code.delta:.4f}")
    if code.delta > settings.DEFAULT_TARGET_DELTA:
        result.fail(f"code delta {code.delta:.4f} above target")
    return result


def single_qubit_errors(n_phys: int) -> List[PauliString]:
    errors = [PauliString.identity(n_phys)]
    for q, letter in itertools.product(range(n_phys), "XYZ"):
        errors.append(PauliString.single(n_phys, q, letter))
    return errors


def stabilizer_suite(quick: bool = False, seed: int = SELFTEST_SEED,
                     code: Optional[StabilizerCode] = None) -> SuiteResult:
    """Syndrome bijection, measurement agreement and decode-after-correction"""
    result = SuiteResult("stabilizer", True)
    code = code or stabilizer.base_code()
    rng = RandomStream(seed).spawn("stabilizer")
    zero = Syndrome.zero(code.syndrome_length)

    errors = single_qubit_errors(code.n_phys)
    syndromes = {}
    for e in errors:
        syndromes[stabilizer.syndrome_of_error(code, e).value] = e
    result.checks += 1
    if len(syndromes) != 2 ** code.syndrome_length:
        result.fail(f"{len(syndromes)} distinct syndromes for {len(errors)} errors")

    for value, rep in code.coset_reps.items():
        result.checks += 1
        if stabilizer.syndrome_of_error(code, rep).value != value:
            result.fail(f"coset_reps[{value}] = {rep.letters} has the wrong syndrome")

    trials = 2 if quick else 5
    for _ in range(trials):
        psi = random_state(code.k_log, rng)
        encoded = stabilizer.encode(code, psi)
        for e in errors:
            result.checks += 1
            expected = stabilizer.syndrome_of_error(code, e)
            measured, post = stabilizer.measure_syndrome(code, apply_pauli(e, encoded), rng)
            if measured != expected:
                result.fail(f"measured syndrome differs for {e.letters}")
                continue
            try:
                restored = stabilizer.decode(code, stabilizer.correct(code, post, measured, zero), zero)
            except DecodeError as err:
                result.fail(f"decode failed after correcting {e.letters}: {err.message}")
                continue
            if fidelity(restored, psi) < 1.0 - 1e-10:
                result.fail(f"fidelity below 1 after correcting {e.letters}")

    keys = 10 if quick else 100
    for _ in range(keys):
        k = CodeFamilyKey(rng.bits(settings.CODE_FAMILY_KEY_BITS))
        result.checks += 1
        try:
            stabilizer.validate_code(stabilizer.derive_code(k))
        except StabilizerCodeError as err:
            result.fail(f"derived code invalid: {err.message}")
    return result


def qotp_suite(quick: bool = False, seed: int = SELFTEST_SEED) -> SuiteResult:
    """Averaging over every pad key gives the maximally mixed state"""
    result = SuiteResult("qotp", True)
    rng = RandomStream(seed).spawn("qotp")
    samples = 3 if quick else 10
    for n in (1, 2):
        mixed = np.eye(2 ** n, dtype=complex) / 2 ** n
        for _ in range(samples):
            psi = random_state(n, rng)
            average = np.zeros((2 ** n, 2 ** n), dtype=complex)
            for key in range(4 ** n):
                encrypted = qcrypto.qotp_encrypt(psi, QotpKey(int_to_bits(key, 2 * n)))
                average += density_matrix(encrypted)
            average /= 4 ** n
            result.checks += 1
            distance = trace_distance(average, mixed)
            if distance > 1e-10:
                result.fail(f"n={n}: trace distance {distance:.2e} from I/{2 ** n}")
    return result


def _rate_ok(result: SuiteResult, label: str, passes: int, trials: int, p: float):
    result.checks += 1
    rate = passes / trials
    if not within_sigma(rate, p, trials, SIGMA):
        result.fail(f"{label}: rate {rate:.4f} vs {p:.4f}")


def swap_suite(quick: bool = False, seed: int = SELFTEST_SEED) -> SuiteResult:
    """Swap-test statistics against the closed form and the circuit oracle"""
    result = SuiteResult("swap_test", True)
    rng = RandomStream(seed).spawn("swap")
    trials = 2000 if quick else 10000
    num_qubits = 3

    a = random_state(num_qubits, rng)
    result.checks += 1
    if not all(swap_test(a, a, rng) for _ in range(trials)):
        result.fail("identical states failed a swap test")

    for overlap in (0.0, 0.25, 0.5):
        b = state_with_overlap(a, overlap, rng)
        p = swap_test_pass_probability(a, b)
        result.checks += 1
        if abs(p - swap_test_circuit_probability(a, b)) > 1e-10:
            result.fail(f"overlap {overlap}: circuit oracle disagrees")
        passes = sum(swap_test(a, b, rng) for _ in range(trials))
        _rate_ok(result, f"overlap {overlap}", passes, trials, p)

    delta = 0.5
    for n_msg in (1, 2, 3):
        blocks = 2 * n_msg
        pairs = []
        for _ in range(blocks):
            x = random_state(num_qubits, rng)
            pairs.append((x, state_with_overlap(x, delta, rng)))
        joint = ((1 + delta ** 2) / 2) ** blocks
        passes = sum(all(swap_test(x, y, rng) for x, y in pairs) for _ in range(trials))
        _rate_ok(result, f"joint n_msg={n_msg}", passes, trials, joint)
    return result


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "fingerprint": fingerprint_suite,
    "stabilizer": stabilizer_suite,
    "qotp": qotp_suite,
    "swap_test": swap_suite,
}


def run_selftest(quick: bool = False, seed: int = SELFTEST_SEED) -> List[SuiteResult]:
    results = []
    for name, suite in SUITES.items():
        outcome = suite(quick=quick, seed=seed)
        if outcome.passed:
            logger.info(f"Suite {name} passed ({outcome.checks} checks)")
        else:
            logger.warning(f"Suite {name} failed: {outcome.failures[:3]}")
        results.append(outcome)
    return results
