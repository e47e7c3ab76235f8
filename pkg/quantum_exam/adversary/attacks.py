import dataclasses
import logging
from typing import Dict, List, Optional, Sequence

from ..core import (
    MeasurementBasis,
    ShiftMask,
    apply_pauli_x,
    apply_shift_mask,
    entangle_ancilla,
    ghz_prepare,
    measure,
    tensor_product,
)
from ..protocol.model import ALICE, EntangledResource, ResourceKind, bob, parties
from ..protocol.transcript import EventKind, Transcript
from ..util import RandomSource, coin, seeded_ulid
from .config import AttackConfig, AttackConfigError, AttackKind
from .knowledge import EveKnowledge, EveRoundRecord


log = logging.getLogger(__name__)

# Attacks whose holder decodes broadcasts afterwards.
READING_ATTACKS = frozenset(
    {
        AttackKind.MEASURE_RESEND,
        AttackKind.ENTANGLE_MEASURE,
        AttackKind.INTERCEPT_RESEND,
    }
)


@dataclasses.dataclass
class InFlightQubit:
    """Bob ``bob``'s qubit of ``resource`` between Alice's send and his receipt."""

    resource: EntangledResource
    bob: int

    @property
    def party(self) -> str:
        return bob(self.bob)

    @property
    def qubit(self) -> int:
        return self.resource.ownership[self.party]


def tap_measure_resend(
    flight: InFlightQubit,
    rng: RandomSource,
    record: Optional[EveRoundRecord] = None,
) -> InFlightQubit:
    result = measure(flight.resource.state, flight.qubit, MeasurementBasis.Z, rng)
    flight.resource.state = result.post_state
    if record is not None:
        record.outcomes[flight.party] = result.outcome
        record.pads[flight.party] = result.outcome
    return flight


def tap_disturbance(flight: InFlightQubit, rng: RandomSource) -> InFlightQubit:
    # v is thrown away: the flip gains Eve nothing.
    if coin(rng, 0.5):
        flight.resource.state = apply_pauli_x(flight.resource.state, flight.qubit)
    return flight


def tap_entangle_measure(
    flight: InFlightQubit,
    alpha: complex,
    beta: complex,
    rng: RandomSource,
    record: Optional[EveRoundRecord] = None,
) -> InFlightQubit:
    """Entangle a fresh ancilla with the qubit; Eve reads it in ``settle``.

    ``rng`` is unused: the map itself is deterministic.
    """
    resource = flight.resource
    resource.state = entangle_ancilla(resource.state, flight.qubit, alpha, beta)
    ancilla = resource.state.num_qubits - 1
    resource.eve_qubits[f"ancilla:{flight.party}"] = ancilla
    if record is not None:
        record.ancillas[flight.party] = ancilla
    return flight


def tap_intercept_resend(
    resource: EntangledResource,
    bobs: Sequence[int],
    rng: RandomSource,
    mask: Optional[ShiftMask] = None,
    record: Optional[EveRoundRecord] = None,
) -> List[InFlightQubit]:
    """Keep Alice's qubits for ``bobs`` and forward Eve's own in their place.

    Eve's resource is a GHZ state masked with ``mask`` (all zeros when unset),
    appended after the current register. Her copy of Alice's qubit is labelled
    ``prime:alice``; the captured qubits are ``kept:bob<n>``.
    """
    students = resource.students
    mask = mask or ShiftMask.zeros(students)
    own = apply_shift_mask(ghz_prepare(students + 1), mask)
    offset = resource.state.num_qubits
    resource.state = tensor_product(resource.state, own)
    resource.eve_qubits["prime:alice"] = offset
    forwarded = []
    for n in bobs:
        party = bob(n)
        resource.eve_qubits[f"kept:{party}"] = resource.ownership[party]
        resource.ownership[party] = offset + n
        forwarded.append(InFlightQubit(resource=resource, bob=n))
    if record is not None:
        record.mask = list(mask.bits)
        record.kept_qubits = {
            label: qubit for label, qubit in resource.eve_qubits.items()
        }
    return forwarded


@dataclasses.dataclass(frozen=True)
class ForgedIdentity:
    """Eve's classical-channel disguise as ``party``."""

    party: str
    token: str

    def forged_token(self, party: str, serial: int) -> Optional[str]:
        return self.token if party == self.party else None


def masquerade(party: str, rng: RandomSource) -> ForgedIdentity:
    return ForgedIdentity(party=party, token=str(seeded_ulid(rng)))


@dataclasses.dataclass(frozen=True)
class EveScore:
    guesses: int = 0
    correct: int = 0
    leaked: int = 0


class Eavesdropper:
    """Eve for one protocol run: taps qubits per her AttackConfig and reads the
    public side of the transcript."""

    def __init__(self, config: AttackConfig, students: int):
        self.config = config
        self.students = students
        self.targets = config.target_bobs(students) if config.active else []
        self.knowledge = EveKnowledge()
        self._decisions: Dict[int, bool] = {}
        self._forger: Optional[ForgedIdentity] = None
        if config.intercept_mask is not None and len(config.intercept_mask) != students:
            raise AttackConfigError(
                f"intercept_mask needs {students} bits, got {len(config.intercept_mask)}"
            )
        if config.impersonate and config.impersonate not in parties(students):
            raise AttackConfigError(
                f"Cannot impersonate {config.impersonate!r} in a {students}-student exam"
            )

    @property
    def kind(self) -> AttackKind:
        return self.config.kind

    @property
    def extra_qubits(self) -> int:
        return self.config.extra_qubits(self.students)

    def attach(self, transcript: Transcript, rng: RandomSource) -> None:
        if self.kind in READING_ATTACKS:
            transcript.subscribe(self.knowledge.observe)
        if self.kind is AttackKind.MASQUERADE:
            self._forger = masquerade(self.config.impersonate, rng)

    def taps(self, serial: int, rng: RandomSource) -> bool:
        if serial not in self._decisions:
            eligible = self.config.rounds is None or serial in self.config.rounds
            if eligible and self.config.tap_rate < 1.0:
                eligible = coin(rng, self.config.tap_rate)
            self._decisions[serial] = eligible
        return self._decisions[serial]

    def on_flight(self, resource: EntangledResource, bob: int, rng: RandomSource) -> None:
        kind = self.kind
        if kind not in READING_ATTACKS and kind is not AttackKind.DISTURBANCE:
            return
        if bob not in self.targets or not self.taps(resource.serial, rng):
            return
        flight = InFlightQubit(resource=resource, bob=bob)
        if kind is AttackKind.MEASURE_RESEND:
            tap_measure_resend(flight, rng, self.knowledge.record(resource.serial))
        elif kind is AttackKind.DISTURBANCE:
            tap_disturbance(flight, rng)
        elif kind is AttackKind.ENTANGLE_MEASURE:
            tap_entangle_measure(
                flight,
                self.config.alpha,
                self.config.beta,
                rng,
                self.knowledge.record(resource.serial),
            )
        elif kind is AttackKind.INTERCEPT_RESEND:
            # Eve swaps the whole round at the first qubit she sees.
            if "prime:alice" in resource.eve_qubits:
                return
            tap_intercept_resend(
                resource,
                self.targets,
                rng,
                mask=self._intercept_mask(resource, rng),
                record=self.knowledge.record(resource.serial),
            )
        log.debug("Eve tapped %s on resource %s", flight.party, resource.serial)

    def _intercept_mask(self, resource: EntangledResource, rng: RandomSource) -> ShiftMask:
        if resource.kind is ResourceKind.PSI:
            return ShiftMask.zeros(self.students)
        if self.config.intercept_mask is not None:
            return ShiftMask(bits=tuple(self.config.intercept_mask))
        return ShiftMask.random(self.students, rng)

    def settle(self, resource: EntangledResource, rng: RandomSource) -> None:
        """Eve's own measurements once the legitimate parties have measured."""
        record = self.knowledge.rounds.get(resource.serial)
        if record is None or record.settled:
            return
        record.settled = True
        for party, ancilla in sorted(record.ancillas.items()):
            flag = self._read(resource, ancilla, rng)
            record.outcomes[f"ancilla:{party}"] = flag
            # The ancilla flags a flip, not the bit, so the flag is her best guess.
            record.pads[party] = flag
        if record.mask is not None:
            prime = self._read(resource, resource.eve_qubits["prime:alice"], rng)
            record.outcomes["prime:alice"] = prime
            for n in self.targets:
                party = bob(n)
                kept = self._read(resource, resource.eve_qubits[f"kept:{party}"], rng)
                record.outcomes[f"kept:{party}"] = kept
                record.pads[party] = prime ^ record.mask[n - 1]
            record.pads[ALICE] = record.outcomes[f"kept:{bob(self.targets[0])}"]

    @staticmethod
    def _read(resource: EntangledResource, qubit: int, rng: RandomSource) -> int:
        result = measure(resource.state, qubit, MeasurementBasis.Z, rng)
        resource.state = result.post_state
        return result.outcome

    def forged_token(self, party: str, serial: int) -> Optional[str]:
        if self._forger is None:
            return None
        return self._forger.forged_token(party, serial)

    def score(self, transcript: Transcript, since: int = 0) -> EveScore:
        """Compare Eve's decodes from events at ``since`` or later with the
        senders' private plaintext records."""
        plaintext = {
            (event.payload["resource"], event.actor): event.payload["bit"]
            for event in transcript.of_kind(EventKind.ENCODE)
        }
        failures = [
            event.seq
            for event in transcript.of_kind(EventKind.CHECK)
            if event.seq >= since and not event.payload["passed"]
        ]
        first_failure = min(failures) if failures else None
        guesses = correct = leaked = 0
        for estimate in self.knowledge.estimates():
            if estimate.seq < since:
                continue
            truth = plaintext.get((estimate.resource, estimate.sender))
            if truth is None:
                continue
            guesses += 1
            if estimate.bit != truth:
                continue
            correct += 1
            if estimate.tapped and (first_failure is None or estimate.seq < first_failure):
                leaked += 1
        return EveScore(guesses=guesses, correct=correct, leaked=leaked)
