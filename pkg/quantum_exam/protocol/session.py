import logging
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

from ..core import (
    InvalidArgumentError,
    MeasurementBasis,
    ShiftMask,
    apply_shift_mask,
    check_qubit_budget,
    ghz_prepare,
)
from ..util import RandomSource, coin, seeded_ulid
from .channel import ClassicalChannel, MasqueradeDetectedError, ProtocolError, QuantumChannel
from .model import (
    ALICE,
    BitString,
    EntangledResource,
    OperatingMode,
    OutcomeStatus,
    ProtocolOutcome,
    ResourceKind,
    RunStatistics,
    bob,
    default_ownership,
    parties,
)
from .policy import ExamPolicy, check_count
from .transcript import EventKind, Transcript


if TYPE_CHECKING:
    from ..adversary import Eavesdropper


log = logging.getLogger(__name__)

PROBLEM_SENT = (
    "My problem has been transferred successfully to all of you. "
    "Please return your solution after time T"
)
SOLUTIONS_COLLECTED = "Your solutions have been collected successfully"

Pool = List[EntangledResource]


class ProtocolAbortError(ProtocolError):
    """Raised when a phase cannot go on; ``outcome`` holds what was done so far."""

    def __init__(self, message: str, outcome: ProtocolOutcome):
        self.outcome = outcome
        super().__init__(message)


class InsufficientResourcesError(ProtocolAbortError):
    """Raised when a pool holds fewer resources than the bits to move."""


class RoundCapExceededError(ProtocolAbortError):
    """Raised when a direct program reaches its round cap."""


def check_passes(
    basis: MeasurementBasis,
    alice: int,
    bobs: Sequence[int],
    mask: Sequence[int],
) -> bool:
    """Alice's verdict on one checked resource.

    In Bz every Bob must satisfy j_a = j_n xor s_n; in Bx Alice's sign must
    equal the product of the Bobs' signs. Unmasked resources pass zeros.
    """
    if basis is MeasurementBasis.Z:
        return all(alice == outcome ^ bit for outcome, bit in zip(bobs, mask))
    product = 1
    for outcome in bobs:
        product *= outcome
    return alice == product


class ExamSession:
    """One teacher, ``students`` Bobs, their channels and a shared transcript.

    Every sub-protocol of the exam runs as a method on the session; resources
    get serial numbers unique within it. Eve, when present, sits on the
    quantum channel and reads the public side of the transcript.
    """

    def __init__(
        self,
        students: int,
        rng: RandomSource,
        adversary: Optional["Eavesdropper"] = None,
        policy: Optional[ExamPolicy] = None,
        transcript: Optional[Transcript] = None,
    ):
        if students < 1:
            raise InvalidArgumentError(f"An exam needs at least one student, got {students}")
        self.students = students
        self.rng = rng
        self.policy = policy or ExamPolicy()
        self.adversary = adversary
        extra = adversary.extra_qubits if adversary is not None else 0
        check_qubit_budget(students + 1 + extra, self.policy.qubit_cap)

        self.transcript = transcript if transcript is not None else Transcript()
        self.classical = ClassicalChannel(self.transcript)
        self.quantum = QuantumChannel(adversary)
        for party in parties(students):
            self.classical.register(party, str(seeded_ulid(rng)))
        if adversary is not None:
            adversary.attach(self.transcript, rng)
        self._serial = 0
        self._phase_start = 0

    @property
    def bobs(self) -> List[str]:
        return [bob(n) for n in range(1, self.students + 1)]

    def _new_resource(
        self, index: int, kind: ResourceKind, mask: Optional[ShiftMask] = None
    ) -> EntangledResource:
        state = ghz_prepare(self.students + 1)
        if kind is ResourceKind.PHI:
            state = apply_shift_mask(state, mask)
        resource = EntangledResource(
            index=index,
            serial=self._serial,
            kind=kind,
            state=state,
            ownership=default_ownership(self.students),
            mask=mask,
        )
        self._serial += 1
        return resource

    def _distribute(self, resource: EntangledResource, m: int) -> None:
        def transmit(receiver: str) -> None:
            self.quantum.send(resource, receiver, self.rng)

        self.classical.authenticate_exchange(
            ALICE,
            self.bobs,
            m,
            resource.serial,
            transmit=transmit,
            forger=self.adversary,
        )

    def _measure(
        self, resource: EntangledResource, m: int, party: str, basis: MeasurementBasis
    ) -> int:
        outcome = resource.measure_party(party, basis, self.rng)
        self.transcript.record(
            m,
            party,
            EventKind.MEASUREMENT,
            resource=resource.serial,
            basis=basis.value,
            outcome=outcome,
        )
        return outcome

    def _settle(self, resource: EntangledResource) -> None:
        if self.adversary is not None:
            self.adversary.settle(resource, self.rng)

    def _announce(self, m: int, **payload) -> None:
        self.classical.post(m, ALICE, EventKind.ANNOUNCEMENT, **payload)

    def _abort(
        self, phase: str, m: int, cause: str, stats: RunStatistics, **extra
    ) -> ProtocolOutcome:
        self.classical.post(m, ALICE, EventKind.ABORT, phase=phase, cause=cause)
        log.warning("Aborting %s in round %s: %s", phase, m, cause)
        self._score_eavesdropper(stats)
        return ProtocolOutcome(
            phase=phase,
            status=OutcomeStatus.ABORTED_EVE_DETECTED,
            transcript=self.transcript,
            statistics=stats,
            cause=cause,
            **extra,
        )

    def _masquerade_abort(
        self, phase: str, error: MasqueradeDetectedError, stats: RunStatistics
    ) -> ProtocolOutcome:
        if stats.first_detection_round is None:
            stats.first_detection_round = stats.rounds
        return self._abort(phase, error.m, "masquerade", stats)

    def _open_phase(self) -> None:
        self._phase_start = len(self.transcript)

    def _score_eavesdropper(self, stats: RunStatistics) -> None:
        # Scores the current phase only.
        if self.adversary is None:
            return
        score = self.adversary.score(self.transcript, since=self._phase_start)
        stats.eve_guesses = score.guesses
        stats.eve_correct = score.correct
        stats.leaked_bits = score.leaked

    def run_check(
        self,
        resource: EntangledResource,
        m: int,
        basis: Optional[MeasurementBasis] = None,
    ) -> bool:
        """Security check on one distributed resource.

        Alice announces a basis (uniform when not given), every party measures,
        the Bobs reveal their outcomes and Alice records her verdict.
        """
        if basis is None:
            basis = MeasurementBasis.Z if coin(self.rng, 0.5) else MeasurementBasis.X
        self.classical.post(
            m, ALICE, EventKind.BASIS_ANNOUNCE, resource=resource.serial, basis=basis.value
        )
        alice = self._measure(resource, m, ALICE, basis)
        outcomes = [self._measure(resource, m, party, basis) for party in self.bobs]
        self._settle(resource)
        for party, outcome in zip(self.bobs, outcomes):
            if basis is MeasurementBasis.Z:
                self.classical.post(
                    m, party, EventKind.PUBLIC_BIT,
                    purpose="check", resource=resource.serial, bit=outcome,
                )
            else:
                self.classical.post(
                    m, party, EventKind.PUBLIC_SIGN,
                    purpose="check", resource=resource.serial, sign=outcome,
                )
        mask = resource.mask_bits()
        passed = check_passes(basis, alice, outcomes, mask)
        payload = dict(resource=resource.serial, basis=basis.value)
        if basis is MeasurementBasis.Z and resource.kind is ResourceKind.PHI:
            payload["mask"] = mask
        self.transcript.record(m, ALICE, EventKind.CHECK, passed=passed, **payload)
        if not passed:
            log.warning("Check failed on resource %s in %s", resource.serial, basis)
        return passed

    def _share(
        self,
        kind: ResourceKind,
        count: int,
        check_fraction: float,
        required: int,
        stats: RunStatistics,
    ) -> Tuple[Pool, ProtocolOutcome]:
        phase = f"share_{kind.value}"
        self._open_phase()
        if count < 1:
            raise InvalidArgumentError(f"{phase} needs at least one resource, got {count}")
        if not 0.0 < check_fraction < 1.0:
            raise InvalidArgumentError(f"check_fraction must lie in (0, 1), got {check_fraction}")
        self._announce(0, phase=phase, marker="start", count=count)
        resources = []
        for m in range(count):
            mask = ShiftMask.random(self.students, self.rng) if kind is ResourceKind.PHI else None
            resource = self._new_resource(m, kind, mask)
            stats.rounds += 1
            try:
                self._distribute(resource, m)
            except MasqueradeDetectedError as e:
                return [], self._masquerade_abort(phase, e, stats)
            resources.append(resource)

        checked = sorted(
            int(i)
            for i in self.rng.choice(count, size=check_count(count, check_fraction), replace=False)
        )
        self._announce(0, phase=phase, checked=[resources[i].serial for i in checked])
        failed = 0
        for i in checked:
            passed = self.run_check(resources[i], i)
            stats.record_check(passed)
            stats.control_rounds += 1
            failed += not passed

        if failed / len(checked) > self.policy.error_threshold:
            stats.restarts += 1
            self.classical.post(
                0, ALICE, EventKind.RESTART, phase=phase, failed=failed, checked=len(checked)
            )
            log.warning(
                "%s: %s of %s checks failed, discarding the pool", phase, failed, len(checked)
            )
            self._score_eavesdropper(stats)
            return [], ProtocolOutcome(
                phase=phase,
                status=OutcomeStatus.RESTARTED,
                transcript=self.transcript,
                statistics=stats,
                cause="check-failure",
            )

        chosen = set(checked)
        pool = [resource for i, resource in enumerate(resources) if i not in chosen]
        for position, resource in enumerate(pool):
            resource.index = position
        if len(pool) < required:
            outcome = self._abort(phase, 0, "insufficient-resources", stats)
            raise InsufficientResourcesError(
                f"{phase} kept {len(pool)} resources, {required} are needed", outcome
            )
        self._announce(0, phase=phase, marker="end", kept=len(pool))
        log.info("%s kept %s of %s resources", phase, len(pool), count)
        self._score_eavesdropper(stats)
        return pool, ProtocolOutcome(
            phase=phase,
            status=OutcomeStatus.COMPLETED,
            transcript=self.transcript,
            statistics=stats,
        )

    def share_psi(
        self, count: int, check_fraction: Optional[float] = None, required: int = 1
    ) -> Tuple[Pool, ProtocolOutcome]:
        fraction = self.policy.check_fraction if check_fraction is None else check_fraction
        return self._share(ResourceKind.PSI, count, fraction, required, RunStatistics())

    def share_phi(
        self, count: int, check_fraction: Optional[float] = None, required: int = 1
    ) -> Tuple[Pool, ProtocolOutcome]:
        fraction = self.policy.check_fraction if check_fraction is None else check_fraction
        return self._share(ResourceKind.PHI, count, fraction, required, RunStatistics())

    def share_with_restarts(
        self,
        kind: ResourceKind,
        count: int,
        check_fraction: Optional[float] = None,
        required: int = 1,
    ) -> Tuple[Pool, ProtocolOutcome]:
        """Share until a pool survives its checks or the restart budget is spent."""
        fraction = self.policy.check_fraction if check_fraction is None else check_fraction
        stats = RunStatistics()
        outcome = None
        for _ in range(self.policy.max_restarts + 1):
            pool, outcome = self._share(kind, count, fraction, required, stats)
            if outcome.status is not OutcomeStatus.RESTARTED:
                return pool, outcome
        return [], self._abort(outcome.phase, 0, "restart-limit", stats)

    def _require(self, phase: str, pool: Pool, length: int, stats: RunStatistics) -> None:
        if len(pool) < length:
            outcome = self._abort(phase, len(pool), "pool-exhausted", stats)
            raise InsufficientResourcesError(
                f"{phase} needs {length} resources, the pool holds {len(pool)}", outcome
            )

    def _transfer_bit(self, resource: EntangledResource, m: int, bit: int) -> Dict[str, int]:
        """Move one problem bit over a Psi resource; returns each Bob's decode."""
        j_a = self._measure(resource, m, ALICE, MeasurementBasis.Z)
        pads = {party: self._measure(resource, m, party, MeasurementBasis.Z) for party in self.bobs}
        self._settle(resource)
        self.transcript.record(m, ALICE, EventKind.ENCODE, resource=resource.serial, bit=bit)
        broadcast = bit ^ j_a
        self.classical.post(
            m, ALICE, EventKind.PUBLIC_BIT, purpose="message", resource=resource.serial, bit=broadcast
        )
        decoded = {}
        for party, pad in pads.items():
            decoded[party] = broadcast ^ pad
            self.transcript.record(
                m, party, EventKind.DECODE,
                resource=resource.serial, source=ALICE, bit=decoded[party],
            )
        return decoded

    def _collect_bits(
        self, resource: EntangledResource, m: int, solutions: Sequence[BitString]
    ) -> Dict[str, int]:
        """Move bit m of every long-enough solution over a Phi resource."""
        j_a = self._measure(resource, m, ALICE, MeasurementBasis.Z)
        senders = [
            (n, party) for n, party in enumerate(self.bobs, start=1) if m < len(solutions[n - 1])
        ]
        pads = {party: self._measure(resource, m, party, MeasurementBasis.Z) for _, party in senders}
        self._settle(resource)
        broadcasts = {}
        for n, party in senders:
            bit = solutions[n - 1][m]
            self.transcript.record(m, party, EventKind.ENCODE, resource=resource.serial, bit=bit)
            broadcasts[party] = bit ^ pads[party]
            self.classical.post(
                m, party, EventKind.PUBLIC_BIT,
                purpose="message", resource=resource.serial, bit=broadcasts[party],
            )
        mask = resource.mask_bits()
        decoded = {}
        for n, party in senders:
            decoded[party] = broadcasts[party] ^ j_a ^ mask[n - 1]
            self.transcript.record(
                m, ALICE, EventKind.DECODE,
                resource=resource.serial, source=party, bit=decoded[party], mask=mask[n - 1],
            )
        return decoded

    def _check_solutions(self, solutions: Sequence[BitString]) -> List[BitString]:
        solutions = list(solutions)
        if len(solutions) != self.students:
            raise InvalidArgumentError(
                f"Expected {self.students} solutions, got {len(solutions)}"
            )
        if not any(len(solution) for solution in solutions):
            raise InvalidArgumentError("At least one solution must be non-empty")
        return solutions

    def give_problem(self, pool: Pool, problem: BitString) -> ProtocolOutcome:
        phase = "give"
        self._open_phase()
        stats = RunStatistics()
        self._require(phase, pool, len(problem), stats)
        self._announce(0, phase=phase, marker="start", length=len(problem))
        decoded: Dict[str, List[int]] = {party: [] for party in self.bobs}
        for m, bit in enumerate(problem):
            stats.rounds += 1
            stats.message_rounds += 1
            for party, value in self._transfer_bit(pool[m], m, bit).items():
                decoded[party].append(value)
        self._announce(len(problem), phase=phase, marker="end", text=PROBLEM_SENT)
        log.info("Gave a %s-bit problem to %s students", len(problem), self.students)
        self._score_eavesdropper(stats)
        return ProtocolOutcome(
            phase=phase,
            status=OutcomeStatus.COMPLETED,
            transcript=self.transcript,
            decoded={party: BitString(bits=tuple(bits)) for party, bits in decoded.items()},
            recipients=self.bobs,
            statistics=stats,
        )

    def collect_solutions(
        self, pool: Pool, solutions: Sequence[BitString]
    ) -> ProtocolOutcome:
        phase = "collect"
        self._open_phase()
        solutions = self._check_solutions(solutions)
        length = max(len(solution) for solution in solutions)
        stats = RunStatistics()
        self._require(phase, pool, length, stats)
        self._announce(0, phase=phase, marker="start", length=length)
        decoded: Dict[str, List[int]] = {party: [] for party in self.bobs}
        for m in range(length):
            stats.rounds += 1
            stats.message_rounds += 1
            for party, value in self._collect_bits(pool[m], m, solutions).items():
                decoded[party].append(value)
        self._announce(length, phase=phase, marker="end", text=SOLUTIONS_COLLECTED)
        log.info("Collected solutions from %s students", self.students)
        self._score_eavesdropper(stats)
        return ProtocolOutcome(
            phase=phase,
            status=OutcomeStatus.COMPLETED,
            transcript=self.transcript,
            decoded={party: BitString(bits=tuple(bits)) for party, bits in decoded.items()},
            recipients=self.bobs,
            statistics=stats,
        )

    def _direct(
        self,
        phase: str,
        kind: ResourceKind,
        length: int,
        control_rate: float,
        transfer,
    ) -> ProtocolOutcome:
        """The direct program shared by both directions.

        Each round distributes a fresh resource, then Alice picks control mode
        with probability ``control_rate``. Control rounds do not advance m. A
        failed control is a detection: Alice restarts from m = 0 while her
        restart budget lasts, then aborts.
        """
        if not 0.0 <= control_rate < 1.0:
            raise InvalidArgumentError(f"Control rate must lie in [0, 1), got {control_rate}")
        stats = RunStatistics()
        self._open_phase()
        cap = self.policy.round_cap(length, control_rate)
        restarts_left = self.policy.direct_max_restarts
        decoded: Dict[str, List[int]] = {}
        window_checked = 0
        m = 0
        self._announce(0, phase=phase, marker="start", length=length, control_rate=control_rate)
        while m < length:
            if stats.rounds >= cap:
                outcome = self._abort(phase, m, "round-cap", stats)
                raise RoundCapExceededError(f"{phase} used all {cap} rounds", outcome)
            stats.rounds += 1
            mask = ShiftMask.random(self.students, self.rng) if kind is ResourceKind.PHI else None
            resource = self._new_resource(m, kind, mask)
            try:
                self._distribute(resource, m)
            except MasqueradeDetectedError as e:
                return self._masquerade_abort(phase, e, stats)

            mode = OperatingMode.CONTROL if coin(self.rng, control_rate) else OperatingMode.MESSAGE
            self.classical.post(
                m, ALICE, EventKind.MODE_ANNOUNCE, resource=resource.serial, mode=mode.value
            )
            if mode is OperatingMode.CONTROL:
                stats.control_rounds += 1
                passed = self.run_check(resource, m)
                stats.record_check(passed)
                window_checked += 1
                if passed:
                    continue
                stats.restarts += 1
                self.classical.post(
                    m, ALICE, EventKind.RESTART, phase=phase, failed=1, checked=window_checked
                )
                window_checked = 0
                if restarts_left == 0:
                    return self._abort(
                        phase, m, "eve-detected", stats,
                        decoded={p: BitString(bits=tuple(b)) for p, b in decoded.items()},
                    )
                restarts_left -= 1
                log.warning("%s restarting from m = 0 after round %s", phase, stats.rounds)
                decoded = {}
                m = 0
                continue

            stats.message_rounds += 1
            if stats.first_detection_round is None:
                stats.message_rounds_before_detection += 1
            for party, value in transfer(resource, m).items():
                decoded.setdefault(party, []).append(value)
            m += 1

        text = PROBLEM_SENT if kind is ResourceKind.PSI else SOLUTIONS_COLLECTED
        self._announce(m, phase=phase, marker="end", text=text)
        log.info("%s finished after %s rounds", phase, stats.rounds)
        self._score_eavesdropper(stats)
        return ProtocolOutcome(
            phase=phase,
            status=OutcomeStatus.COMPLETED,
            transcript=self.transcript,
            decoded={p: BitString(bits=tuple(decoded.get(p, ()))) for p in self.bobs},
            recipients=self.bobs,
            statistics=stats,
        )

    def direct_give_problem(self, problem: BitString, control_rate: float) -> ProtocolOutcome:
        return self._direct(
            "direct_give",
            ResourceKind.PSI,
            len(problem),
            control_rate,
            lambda resource, m: self._transfer_bit(resource, m, problem[m]),
        )

    def direct_collect_solutions(
        self, solutions: Sequence[BitString], control_rate: float
    ) -> ProtocolOutcome:
        solutions = self._check_solutions(solutions)
        return self._direct(
            "direct_collect",
            ResourceKind.PHI,
            max(len(solution) for solution in solutions),
            control_rate,
            lambda resource, m: self._collect_bits(resource, m, solutions),
        )

    def spot_check(self, kind: ResourceKind, basis: MeasurementBasis) -> bool:
        """Distribute one fresh resource and check it in ``basis``."""
        m = self._serial
        mask = ShiftMask.random(self.students, self.rng) if kind is ResourceKind.PHI else None
        resource = self._new_resource(m, kind, mask)
        try:
            self._distribute(resource, m)
        except MasqueradeDetectedError:
            return False
        return self.run_check(resource, m, basis)
