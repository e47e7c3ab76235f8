# type: ignore

import itertools
import math

import numpy as np
import pytest

from quantum_exam.core import (
    ConsistencyError,
    InvalidArgumentError,
    MeasurementBasis,
    QubitBudgetError,
    ShiftMask,
    StateVector,
    apply_hadamard,
    apply_pauli_x,
    apply_shift_mask,
    check_qubit_budget,
    collapse,
    entangle_ancilla,
    ghz_prepare,
    measure,
    outcome_distribution,
    tensor_product,
)
from quantum_exam.util import make_rng

from .conftest import py_test_mark_slow


Z = MeasurementBasis.Z
X = MeasurementBasis.X
HALF = 1 / math.sqrt(2)


def magnitudes(state):
    return {label: abs(value) for label, value in state.ket().items()}


def test_ghz_has_two_branches():
    state = ghz_prepare(3)
    assert state.num_qubits == 3
    assert magnitudes(state) == pytest.approx({"000": HALF, "111": HALF})
    assert state.norm() == pytest.approx(1.0)


@pytest.mark.parametrize("k", [0, -1, 25])
def test_ghz_rejects_out_of_range_sizes(k):
    with pytest.raises(InvalidArgumentError, match="#E1"):
        ghz_prepare(k)


def test_single_qubit_ghz_is_plus_state():
    assert ghz_prepare(1).isclose(apply_hadamard(StateVector.from_label("0"), 0))


def test_unnormalized_state_is_rejected():
    with pytest.raises(ConsistencyError):
        StateVector(num_qubits=1, amplitudes=np.array([1.0, 1.0]))


def test_wrong_amplitude_count_is_rejected():
    with pytest.raises(InvalidArgumentError):
        StateVector(num_qubits=2, amplitudes=np.array([1.0, 0.0]))


def test_states_are_immutable():
    state = ghz_prepare(2)
    with pytest.raises(ValueError):
        state.amplitudes[0] = 1.0


def test_qubit_budget():
    check_qubit_budget(24, cap=24)
    with pytest.raises(QubitBudgetError, match="#E4"):
        check_qubit_budget(25, cap=24)


def test_tensor_product_is_big_endian():
    joint = tensor_product(StateVector.from_label("1"), StateVector.from_label("0"))
    assert joint == StateVector.from_label("10")


def test_pauli_x_flips_one_qubit():
    assert apply_pauli_x(StateVector.from_label("000"), 1) == StateVector.from_label("010")


def test_shift_mask_flips_bobs_only():
    masked = apply_shift_mask(ghz_prepare(3), ShiftMask(bits=(1, 0)))
    assert magnitudes(masked) == pytest.approx({"010": HALF, "101": HALF})


def test_shift_mask_length_must_match():
    with pytest.raises(InvalidArgumentError):
        apply_shift_mask(ghz_prepare(3), ShiftMask(bits=(1,)))


def test_shift_mask_indexes_bobs_from_one():
    mask = ShiftMask(bits=(0, 1, 1))
    assert mask[1] == 0
    assert mask[3] == 1
    assert len(ShiftMask.zeros(4)) == 4


def test_shift_mask_holds_bits_only():
    with pytest.raises(InvalidArgumentError):
        ShiftMask(bits=(0, 2))


def test_basis_outcome_encoding():
    assert Z.to_outcome(1) == 1
    assert X.to_outcome(0) == 1
    assert X.to_outcome(1) == -1
    assert X.to_index(-1) == 1
    with pytest.raises(InvalidArgumentError):
        X.to_index(0)


@pytest.mark.parametrize("basis", list(MeasurementBasis))
def test_basis_keeps_the_str_contract(basis):
    assert basis.encode("utf-8") == basis.value.encode("utf-8")
    assert basis.encode("unicode_escape").decode("ascii") == basis.value


def test_ghz_z_distribution():
    assert outcome_distribution(ghz_prepare(3), [0, 1, 2], Z) == pytest.approx(
        {(0, 0, 0): 0.5, (1, 1, 1): 0.5}
    )


def test_ghz_x_distribution_has_even_parity():
    distribution = outcome_distribution(ghz_prepare(3), [0, 1, 2], X)
    assert len(distribution) == 4
    for outcome, probability in distribution.items():
        assert math.prod(outcome) == 1
        assert probability == pytest.approx(0.25)


@pytest.mark.parametrize("students", [1, 2, 3, 4, 5, 6])
def test_masked_ghz_keeps_x_parity_for_every_mask(students):
    for bits in itertools.product((0, 1), repeat=students):
        state = apply_shift_mask(ghz_prepare(students + 1), ShiftMask(bits=bits))
        distribution = outcome_distribution(state, list(range(students + 1)), X)
        for outcome in distribution:
            assert outcome[0] == math.prod(outcome[1:])
        for outcome in outcome_distribution(state, list(range(students + 1)), Z):
            assert all(outcome[0] == j ^ s for j, s in zip(outcome[1:], bits))


@py_test_mark_slow
@pytest.mark.parametrize("students", range(1, 9))
def test_sampled_z_outcomes_agree_for_every_party(students):
    rng = make_rng(students)
    trials = 10_000
    ones = 0
    for _ in range(trials):
        state = ghz_prepare(students + 1)
        outcomes = []
        for qubit in range(students + 1):
            result = measure(state, qubit, Z, rng)
            outcomes.append(result.outcome)
            state = result.post_state
        assert len(set(outcomes)) == 1
        ones += outcomes[0]
    assert abs(ones / trials - 0.5) < 4 * math.sqrt(0.25 / trials)


def test_distribution_follows_requested_qubit_order():
    state = StateVector.from_label("10")
    assert outcome_distribution(state, [1, 0], Z) == pytest.approx({(0, 1): 1.0})


def test_distribution_marginalizes_other_qubits():
    assert outcome_distribution(ghz_prepare(4), [2], Z) == pytest.approx({(0,): 0.5, (1,): 0.5})


def test_distribution_with_mixed_bases():
    distribution = outcome_distribution(ghz_prepare(2), [0, 1], [Z, X])
    assert sum(distribution.values()) == pytest.approx(1.0)
    assert distribution[(0, 1)] == pytest.approx(0.25)


def test_distribution_rejects_repeated_qubits():
    with pytest.raises(InvalidArgumentError):
        outcome_distribution(ghz_prepare(3), [0, 0], Z)


def test_measure_collapses_ghz():
    rng = make_rng(3)
    result = measure(ghz_prepare(3), 0, Z, rng)
    assert result.probability == pytest.approx(0.5)
    label = str(result.outcome) * 3
    assert result.post_state.isclose(StateVector.from_label(label))
    for qubit in (1, 2):
        assert measure(result.post_state, qubit, Z, rng).outcome == result.outcome


def test_measure_in_x_leaves_eigenstate():
    rng = make_rng(11)
    result = measure(ghz_prepare(2), 1, X, rng)
    again = measure(result.post_state, 1, X, rng)
    assert again.outcome == result.outcome
    assert again.probability == pytest.approx(1.0)


def test_measure_consumes_one_draw():
    first = make_rng(5)
    measure(ghz_prepare(3), 2, X, first)
    second = make_rng(5)
    second.random()
    assert first.random() == second.random()


def test_measure_frequencies_follow_born_rule():
    rng = make_rng(7)
    state = entangle_ancilla(ghz_prepare(2), 1, 0.8, 0.6)
    trials = 10_000
    ones = sum(measure(state, 2, Z, rng).outcome for _ in range(trials))
    # 0.36 within four standard errors
    assert abs(ones / trials - 0.36) < 4 * math.sqrt(0.36 * 0.64 / trials)


def test_collapse_reports_probability_and_state():
    probability, post = collapse(ghz_prepare(2), 1, Z, 1)
    assert probability == pytest.approx(0.5)
    assert post.isclose(StateVector.from_label("11"))


def test_collapse_rejects_impossible_outcome():
    with pytest.raises(InvalidArgumentError):
        collapse(StateVector.from_label("0"), 0, Z, 1)


def test_entangle_ancilla_flips_with_beta_squared():
    state = entangle_ancilla(ghz_prepare(3), 1, 0.8, 0.6)
    assert state.num_qubits == 4
    distribution = outcome_distribution(state, [0, 1], Z)
    mismatch = sum(p for (a, b), p in distribution.items() if a != b)
    assert mismatch == pytest.approx(0.36)


def test_entangle_ancilla_flags_the_flip():
    state = entangle_ancilla(ghz_prepare(2), 1, 0.8, 0.6j)
    for (alice, bob1, ancilla), _ in outcome_distribution(state, [0, 1, 2], Z).items():
        assert ancilla == (alice ^ bob1)


def test_entangle_ancilla_needs_normalized_amplitudes():
    with pytest.raises(InvalidArgumentError, match="#E3"):
        entangle_ancilla(ghz_prepare(2), 1, 0.8, 0.8)
