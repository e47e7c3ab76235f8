import dataclasses
import logging
import math
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..settings import ERRORS_URL, QUBIT_CAP
from ..util import RandomSource


log = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-9
ZERO_PROJECTION = 1e-12
SQRT_HALF = 1 / math.sqrt(2)

Outcome = Tuple[int, ...]


class QuantumStateError(Exception):
    """Base class for errors raised by the state-vector engine."""


class InvalidArgumentError(QuantumStateError, ValueError):
    """Raised when an operation receives arguments outside its domain."""


class ConsistencyError(QuantumStateError):
    """Raised when a state vector fails an internal-consistency check."""


class QubitBudgetError(QuantumStateError):
    """Raised when a register would grow beyond the qubit cap."""


class MeasurementBasis(str, Enum):
    Z = "Bz"
    X = "Bx"

    def __str__(self):
        return self.value

    def to_outcome(self, bit: int) -> int:
        """Map an eigenstate index to the reported outcome: a bit for Bz, a sign for Bx."""
        if self is MeasurementBasis.Z:
            return int(bit)
        return 1 - 2 * int(bit)

    def to_index(self, outcome: int) -> int:
        if self is MeasurementBasis.Z:
            if outcome not in (0, 1):
                raise InvalidArgumentError(f"Bz outcomes are bits, got {outcome!r}")
            return int(outcome)
        if outcome not in (1, -1):
            raise InvalidArgumentError(f"Bx outcomes are signs, got {outcome!r}")
        return 0 if outcome == 1 else 1


BasisSpec = Union[MeasurementBasis, Sequence[MeasurementBasis]]


def check_qubit_budget(num_qubits: int, cap: Optional[int] = None) -> None:
    cap = QUBIT_CAP if cap is None else cap
    if num_qubits > cap:
        raise QubitBudgetError(
            f"A register of {num_qubits} qubits exceeds the cap of {cap}. "
            f"Docs: {ERRORS_URL}#E4"
        )


@dataclasses.dataclass(frozen=True)
class StateVector:
    """A normalized pure state over ``num_qubits`` qubits.

    Basis labels are big-endian: qubit 0 is the most significant bit of the
    amplitude index. Instances are immutable; every operation returns a new one.
    """

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits:
            raise InvalidArgumentError(
                f"A state needs at least one qubit, got {self.num_qubits}"
            )
        check_qubit_budget(self.num_qubits)
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.shape[0] != 2**self.num_qubits:
            raise InvalidArgumentError(
                f"{self.num_qubits} qubits need {2 ** self.num_qubits} amplitudes, "
                f"got {amplitudes.shape[0]}"
            )
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ConsistencyError(
                f"State is not normalized: sum of |amplitude|^2 is {norm!r}"
            )
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def from_label(cls, label: str) -> "StateVector":
        """Computational basis state, e.g. ``StateVector.from_label("010")``."""
        amplitudes = np.zeros(2 ** len(label), dtype=np.complex128)
        amplitudes[int(label, 2)] = 1.0
        return cls(num_qubits=len(label), amplitudes=amplitudes)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(self.probabilities().sum())

    def ket(self) -> Dict[str, complex]:
        """Non-zero amplitudes keyed by basis label, handy in tests and logs."""
        width = self.num_qubits
        return {
            format(index, f"0{width}b"): complex(value)
            for index, value in enumerate(self.amplitudes)
            if abs(value) > ZERO_PROJECTION
        }

    def isclose(self, other: "StateVector", atol: float = NORM_TOLERANCE) -> bool:
        return self.num_qubits == other.num_qubits and bool(
            np.allclose(self.amplitudes, other.amplitudes, atol=atol)
        )

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.num_qubits == other.num_qubits and bool(
            np.array_equal(self.amplitudes, other.amplitudes)
        )

    def __hash__(self):
        return hash((self.num_qubits, self.amplitudes.tobytes()))


@dataclasses.dataclass(frozen=True)
class ShiftMask:
    """Alice's private bit-flip pattern: entry n - 1 is the flag for Bob n."""

    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise InvalidArgumentError(f"Mask entries must be bits, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def zeros(cls, students: int) -> "ShiftMask":
        return cls(bits=(0,) * students)

    @classmethod
    def random(cls, students: int, rng: RandomSource) -> "ShiftMask":
        return cls(bits=tuple(int(b) for b in rng.integers(0, 2, size=students)))

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, bob: int) -> int:
        """Mask bit for Bob ``bob`` (1-based, like the parties' names)."""
        return self.bits[bob - 1]


@dataclasses.dataclass(frozen=True)
class MeasurementResult:
    outcome: int
    post_state: StateVector
    basis: MeasurementBasis
    probability: float


def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.num_qubits:
        raise InvalidArgumentError(
            f"Qubit {qubit} is outside a {state.num_qubits}-qubit register"
        )


def _rebuild(state: StateVector, tensor: np.ndarray) -> StateVector:
    return StateVector(num_qubits=state.num_qubits, amplitudes=tensor.reshape(-1))


def _hadamard_tensor(tensor: np.ndarray, qubit: int) -> np.ndarray:
    zero = np.take(tensor, 0, axis=qubit)
    one = np.take(tensor, 1, axis=qubit)
    return np.stack(((zero + one) * SQRT_HALF, (zero - one) * SQRT_HALF), axis=qubit)


def ghz_prepare(k: int) -> StateVector:
    """(|0...0> + |1...1>) / sqrt(2) over ``k`` qubits."""
    if not 1 <= k <= QUBIT_CAP:
        raise InvalidArgumentError(
            f"GHZ states need between 1 and {QUBIT_CAP} qubits, got {k}. "
            f"Docs: {ERRORS_URL}#E1"
        )
    amplitudes = np.zeros(2**k, dtype=np.complex128)
    amplitudes[0] = SQRT_HALF
    amplitudes[-1] = SQRT_HALF
    return StateVector(num_qubits=k, amplitudes=amplitudes)


def apply_pauli_x(state: StateVector, qubit: int) -> StateVector:
    _check_qubit(state, qubit)
    return _rebuild(state, np.flip(state.tensor(), axis=qubit))


def apply_hadamard(state: StateVector, qubit: int) -> StateVector:
    _check_qubit(state, qubit)
    return _rebuild(state, _hadamard_tensor(state.tensor(), qubit))


def apply_shift_mask(state: StateVector, mask: ShiftMask) -> StateVector:
    """Apply u(s_n) to qubit n for every Bob; qubit 0 (Alice) is left alone."""
    students = state.num_qubits - 1
    if len(mask) != students:
        raise InvalidArgumentError(
            f"A mask for {students} students needs {students} bits, got {len(mask)}"
        )
    tensor = state.tensor()
    for bob, bit in enumerate(mask.bits, start=1):
        if bit:
            tensor = np.flip(tensor, axis=bob)
    return _rebuild(state, tensor)


def tensor_product(first: StateVector, second: StateVector) -> StateVector:
    """Joint state with ``first``'s qubits followed by ``second``'s."""
    num_qubits = first.num_qubits + second.num_qubits
    check_qubit_budget(num_qubits)
    return StateVector(
        num_qubits=num_qubits,
        amplitudes=np.kron(first.amplitudes, second.amplitudes),
    )


def _branch_weights(
    state: StateVector, qubit: int, basis: MeasurementBasis
) -> Tuple[np.ndarray, float, float]:
    tensor = state.tensor()
    if basis is MeasurementBasis.X:
        tensor = _hadamard_tensor(tensor, qubit)
    weight_zero = float(np.sum(np.abs(np.take(tensor, 0, axis=qubit)) ** 2))
    weight_one = float(np.sum(np.abs(np.take(tensor, 1, axis=qubit)) ** 2))
    return tensor, weight_zero, weight_one


def _project(
    state: StateVector,
    tensor: np.ndarray,
    qubit: int,
    basis: MeasurementBasis,
    bit: int,
    weight: float,
) -> StateVector:
    projected = np.array(tensor, copy=True)
    index: List[Union[slice, int]] = [slice(None)] * state.num_qubits
    index[qubit] = 1 - bit
    projected[tuple(index)] = 0
    projected = projected / math.sqrt(weight)
    if basis is MeasurementBasis.X:
        projected = _hadamard_tensor(projected, qubit)
    return _rebuild(state, projected)


def collapse(
    state: StateVector, qubit: int, basis: MeasurementBasis, outcome: int
) -> Tuple[float, StateVector]:
    """Probability of ``outcome`` and the renormalized post-measurement state."""
    _check_qubit(state, qubit)
    bit = basis.to_index(outcome)
    tensor, weight_zero, weight_one = _branch_weights(state, qubit, basis)
    weight = weight_one if bit else weight_zero
    if weight < ZERO_PROJECTION:
        raise InvalidArgumentError(
            f"Outcome {outcome} of qubit {qubit} in {basis} has probability zero"
        )
    return weight, _project(state, tensor, qubit, basis, bit, weight)


def measure(
    state: StateVector, qubit: int, basis: MeasurementBasis, rng: RandomSource
) -> MeasurementResult:
    """Born-rule measurement of one qubit; the qubit stays in the found eigenstate."""
    _check_qubit(state, qubit)
    tensor, weight_zero, weight_one = _branch_weights(state, qubit, basis)
    if weight_zero < ZERO_PROJECTION and weight_one < ZERO_PROJECTION:
        raise ConsistencyError(
            f"Both projections of qubit {qubit} vanish; the state is corrupted. "
            f"Docs: {ERRORS_URL}#E2"
        )
    threshold = weight_zero / (weight_zero + weight_one)
    bit = 0 if rng.random() < threshold else 1
    weight = weight_one if bit else weight_zero
    post_state = _project(state, tensor, qubit, basis, bit, weight)
    log.debug("Measured qubit %s in %s: bit %s (p=%.6f)", qubit, basis, bit, weight)
    return MeasurementResult(
        outcome=basis.to_outcome(bit),
        post_state=post_state,
        basis=basis,
        probability=weight,
    )


def _bases_for(qubits: Sequence[int], basis: BasisSpec) -> List[MeasurementBasis]:
    if isinstance(basis, MeasurementBasis):
        return [basis] * len(qubits)
    bases = [MeasurementBasis(b) for b in basis]
    if len(bases) != len(qubits):
        raise InvalidArgumentError(
            f"Got {len(bases)} bases for {len(qubits)} qubits"
        )
    return bases


def outcome_distribution(
    state: StateVector, qubits: Sequence[int], basis: BasisSpec
) -> Dict[Outcome, float]:
    """Exact joint distribution of measuring ``qubits`` in order.

    ``basis`` is either one basis for every listed qubit or one per qubit.
    Outcome tuples with probability below 1e-12 are left out.
    """
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits):
        raise InvalidArgumentError(f"Qubits must be distinct, got {qubits}")
    for qubit in qubits:
        _check_qubit(state, qubit)
    bases = _bases_for(qubits, basis)

    tensor = state.tensor()
    for qubit, qubit_basis in zip(qubits, bases):
        if qubit_basis is MeasurementBasis.X:
            tensor = _hadamard_tensor(tensor, qubit)
    weights = np.abs(tensor) ** 2
    others = tuple(q for q in range(state.num_qubits) if q not in qubits)
    if others:
        weights = np.sum(weights, axis=others)
    kept = sorted(qubits)
    weights = np.transpose(weights, [kept.index(q) for q in qubits])

    distribution: Dict[Outcome, float] = {}
    for index in np.ndindex(*weights.shape):
        probability = float(weights[index])
        if probability < ZERO_PROJECTION:
            continue
        outcome = tuple(b.to_outcome(bit) for b, bit in zip(bases, index))
        distribution[outcome] = probability
    return distribution


def entangle_ancilla(
    state: StateVector, qubit: int, alpha: complex, beta: complex
) -> StateVector:
    """Append an ancilla and apply |chi>|i> -> a|chi_i>|i> + b|chibar_i>|i+1>.

    The ancilla's |0> stands for chi_i and |1> for the orthogonal chibar_i, so
    the ancilla is the last qubit and flags whether ``qubit`` was flipped.
    """
    _check_qubit(state, qubit)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > NORM_TOLERANCE:
        raise InvalidArgumentError(
            f"|alpha|^2 + |beta|^2 must be 1, got alpha={alpha!r} beta={beta!r}. "
            f"Docs: {ERRORS_URL}#E3"
        )
    check_qubit_budget(state.num_qubits + 1)
    flipped = np.flip(state.tensor(), axis=qubit).reshape(-1)
    joint = np.empty((state.amplitudes.shape[0], 2), dtype=np.complex128)
    joint[:, 0] = alpha * state.amplitudes
    joint[:, 1] = beta * flipped
    return StateVector(num_qubits=state.num_qubits + 1, amplitudes=joint.reshape(-1))
