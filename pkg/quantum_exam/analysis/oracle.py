"""Exact detection probabilities, computed from explicit joint states.

Every branch Eve's attack can take (disturbance flips, measure-resend
collapses, intercept masks) and every mask Alice can draw is enumerated with
its weight; the check verdict is then read off ``outcome_distribution``.
"""
import itertools
from typing import Dict, Iterator, List, Tuple

from ..adversary import AttackConfig, AttackKind
from ..core import (
    MeasurementBasis,
    ShiftMask,
    StateVector,
    apply_pauli_x,
    apply_shift_mask,
    collapse,
    entangle_ancilla,
    ghz_prepare,
    outcome_distribution,
    tensor_product,
)
from ..protocol import ResourceKind, check_passes


PSI_PHASES = frozenset({"share_psi", "give", "direct_give"})
PHI_PHASES = frozenset({"share_phi", "collect", "direct_collect"})

# (weight, joint state, qubit of Alice followed by each Bob's qubit)
Branch = Tuple[float, StateVector, List[int]]


def resource_kind_for(phase: str) -> ResourceKind:
    if phase in PSI_PHASES:
        return ResourceKind.PSI
    if phase in PHI_PHASES:
        return ResourceKind.PHI
    raise ValueError(f"No resources are checked in phase {phase!r}")


def _masks(students: int, kind: ResourceKind) -> Iterator[ShiftMask]:
    if kind is ResourceKind.PSI:
        yield ShiftMask.zeros(students)
        return
    for bits in itertools.product((0, 1), repeat=students):
        yield ShiftMask(bits=bits)


def _attacked(
    attack: AttackConfig, kind: ResourceKind, state: StateVector, students: int
) -> List[Branch]:
    legit = list(range(students + 1))
    targets = attack.target_bobs(students)
    if attack.kind is AttackKind.DISTURBANCE:
        branches = []
        for flips in itertools.product((0, 1), repeat=len(targets)):
            flipped = state
            for n, flip in zip(targets, flips):
                if flip:
                    flipped = apply_pauli_x(flipped, n)
            branches.append((0.5 ** len(targets), flipped, legit))
        return branches
    if attack.kind is AttackKind.MEASURE_RESEND:
        branches = [(1.0, state, legit)]
        for n in targets:
            expanded = []
            for weight, current, qubits in branches:
                for bit in (0, 1):
                    try:
                        p, post = collapse(current, n, MeasurementBasis.Z, bit)
                    except ValueError:
                        continue
                    expanded.append((weight * p, post, qubits))
            branches = expanded
        return branches
    if attack.kind is AttackKind.ENTANGLE_MEASURE:
        for n in targets:
            state = entangle_ancilla(state, n, attack.alpha, attack.beta)
        return [(1.0, state, legit)]
    if attack.kind is AttackKind.INTERCEPT_RESEND:
        if kind is ResourceKind.PSI:
            own_masks = [ShiftMask.zeros(students)]
        elif attack.intercept_mask is not None:
            own_masks = [ShiftMask(bits=tuple(attack.intercept_mask))]
        else:
            own_masks = list(_masks(students, ResourceKind.PHI))
        offset = state.num_qubits
        qubits = [0] + [offset + n if n in targets else n for n in range(1, students + 1)]
        return [
            (
                1.0 / len(own_masks),
                tensor_product(state, apply_shift_mask(ghz_prepare(students + 1), own)),
                qubits,
            )
            for own in own_masks
        ]
    return [(1.0, state, legit)]


def check_failure_probability(
    attack: AttackConfig,
    kind: ResourceKind,
    basis: MeasurementBasis,
    students: int,
) -> float:
    """Probability that one tapped resource of ``kind`` fails a check in ``basis``."""
    if attack.kind is AttackKind.NONE:
        return 0.0
    if attack.kind is AttackKind.MASQUERADE:
        return 1.0
    masks = list(_masks(students, kind))
    if (
        attack.kind is AttackKind.INTERCEPT_RESEND
        and attack.intercept_mask is None
        and len(attack.target_bobs(students)) == students
    ):
        # Alice's mask only touches qubits Eve keeps, and her uniform s' already
        # randomises what the Bobs see, so one mask of Alice's suffices.
        masks = masks[:1]
    failure = 0.0
    for mask in masks:
        state = ghz_prepare(students + 1)
        if kind is ResourceKind.PHI:
            state = apply_shift_mask(state, mask)
        for weight, joint, qubits in _attacked(attack, kind, state, students):
            for outcome, p in outcome_distribution(joint, qubits, basis).items():
                if not check_passes(basis, outcome[0], outcome[1:], mask.bits):
                    failure += weight * p / len(masks)
    return failure


def detection_oracle(
    attack: AttackConfig,
    phase: str,
    basis: MeasurementBasis,
    students: int,
) -> float:
    """Exact chance that a single check in ``phase`` exposes ``attack``.

    Rounds Eve leaves alone never fail, so the tapped-round failure is scaled
    by ``tap_rate``.
    """
    kind = resource_kind_for(phase)
    failure = check_failure_probability(attack, kind, basis, students)
    if attack.kind is AttackKind.MASQUERADE:
        return failure
    return min(1.0, max(0.0, attack.tap_rate * failure))


def per_check_detection(attack: AttackConfig, phase: str, students: int) -> float:
    """Detection chance of a control round whose basis is a fair coin."""
    return 0.5 * sum(
        detection_oracle(attack, phase, basis, students) for basis in MeasurementBasis
    )


def oracle_table(
    attack: AttackConfig, phase: str, students: int
) -> Dict[MeasurementBasis, float]:
    return {
        basis: detection_oracle(attack, phase, basis, students) for basis in MeasurementBasis
    }
