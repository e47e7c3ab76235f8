"""Offline consistency check of a transcript.

Every decode, encode, check reveal and check verdict claims a relation
between events of the same resource. Replay recomputes each one from the
recorded measurements and broadcasts, and reports those that do not hold.
"""
import dataclasses
import logging
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple, Union

from ..core import MeasurementBasis
from ..protocol import ALICE, EventKind, Transcript, TranscriptEvent, bob_index, check_passes


log = logging.getLogger(__name__)

Key = Tuple[int, str]


@dataclasses.dataclass(frozen=True)
class ReplayIssue:
    seq: int
    kind: str
    reason: str


@dataclasses.dataclass
class ReplayVerdict:
    events: int
    checked: int
    issues: List[ReplayIssue] = dataclasses.field(default_factory=list)
    aborted_at: Optional[int] = None

    @property
    def consistent(self) -> bool:
        return not self.issues

    def flagged(self) -> Set[int]:
        return {issue.seq for issue in self.issues}


@dataclasses.dataclass
class _Relation:
    owner: TranscriptEvent
    holds: bool
    reason: str
    broadcast: Optional[int] = None


class _Replayer:
    def __init__(self, events: List[TranscriptEvent]):
        self.events = events
        self.issues: List[ReplayIssue] = []
        self.relations: List[_Relation] = []
        self.measurements: Dict[Key, TranscriptEvent] = {}
        self.broadcasts: Dict[Key, TranscriptEvent] = {}

    def flag(self, event: TranscriptEvent, reason: str) -> None:
        self.issues.append(ReplayIssue(seq=event.seq, kind=event.kind.value, reason=reason))

    def relate(
        self,
        owner: TranscriptEvent,
        holds: bool,
        reason: str,
        broadcast: Optional[TranscriptEvent] = None,
    ) -> None:
        self.relations.append(
            _Relation(
                owner=owner,
                holds=holds,
                reason=reason,
                broadcast=broadcast.seq if broadcast is not None else None,
            )
        )

    def index(self) -> None:
        previous = -1
        for event in self.events:
            if event.seq <= previous:
                self.flag(event, f"sequence number {event.seq} follows {previous}")
            previous = max(previous, event.seq)
            resource = event.payload.get("resource")
            key = (resource, event.actor)
            if event.kind is EventKind.MEASUREMENT:
                if key in self.measurements:
                    self.flag(event, f"{event.actor} measured resource {resource} twice")
                self.measurements[key] = event
            elif event.kind is EventKind.PUBLIC_BIT and event.payload.get("purpose") == "message":
                self.broadcasts[key] = event

    def pad(self, event: TranscriptEvent, party: str) -> Optional[int]:
        measurement = self.measurements.get((event.payload.get("resource"), party))
        if measurement is None:
            self.flag(event, f"no measurement of {party} on resource {event.payload.get('resource')}")
            return None
        if measurement.payload.get("basis") != MeasurementBasis.Z.value:
            self.flag(event, f"{party}'s pad was not measured in Bz")
            return None
        return measurement.payload.get("outcome")

    def check_encode(self, event: TranscriptEvent) -> None:
        broadcast = self.broadcasts.get((event.payload.get("resource"), event.actor))
        pad = self.pad(event, event.actor)
        if broadcast is None:
            self.flag(event, "encoded bit was never broadcast")
            return
        if pad is None:
            return
        expected = event.payload.get("bit") ^ pad
        self.relate(
            event,
            broadcast.payload.get("bit") == expected,
            f"broadcast {broadcast.payload.get('bit')} is not plaintext xor pad ({expected})",
            broadcast,
        )

    def check_decode(self, event: TranscriptEvent) -> None:
        source = event.payload.get("source")
        broadcast = self.broadcasts.get((event.payload.get("resource"), source))
        pad = self.pad(event, event.actor)
        if broadcast is None:
            self.flag(event, f"decodes a broadcast of {source} that does not exist")
            return
        if pad is None:
            return
        expected = broadcast.payload.get("bit") ^ pad ^ event.payload.get("mask", 0)
        self.relate(
            event,
            event.payload.get("bit") == expected,
            f"decoded {event.payload.get('bit')}, broadcast xor pad xor mask is {expected}",
            broadcast,
        )

    def check_reveal(self, event: TranscriptEvent) -> None:
        field = "bit" if event.kind is EventKind.PUBLIC_BIT else "sign"
        measurement = self.measurements.get((event.payload.get("resource"), event.actor))
        if measurement is None:
            self.flag(event, "reveals an outcome that was never measured")
            return
        self.relate(
            event,
            measurement.payload.get("outcome") == event.payload.get(field),
            f"revealed {event.payload.get(field)}, measured {measurement.payload.get('outcome')}",
        )

    def check_verdict(self, event: TranscriptEvent) -> None:
        resource = event.payload.get("resource")
        basis = MeasurementBasis(event.payload.get("basis"))
        alice = self.measurements.get((resource, ALICE))
        bobs = sorted(
            (
                measurement
                for (serial, party), measurement in self.measurements.items()
                if serial == resource and party != ALICE
            ),
            key=lambda m: bob_index(m.actor),
        )
        if alice is None or not bobs:
            self.flag(event, f"check of resource {resource} lacks measurements")
            return
        if any(m.payload.get("basis") != basis.value for m in [alice] + bobs):
            self.flag(event, f"measurements of resource {resource} are not all in {basis}")
            return
        mask = event.payload.get("mask") or [0] * len(bobs)
        verdict = check_passes(
            basis,
            alice.payload.get("outcome"),
            [m.payload.get("outcome") for m in bobs],
            mask,
        )
        self.relate(
            event,
            verdict == event.payload.get("passed"),
            f"verdict {event.payload.get('passed')} but outcomes give {verdict}",
        )

    def run(self) -> Tuple[int, Optional[int]]:
        self.index()
        window_checked = window_failed = 0
        checked = 0
        aborted_at = None
        for event in self.events:
            kind = event.kind
            if kind is EventKind.ENCODE:
                self.check_encode(event)
            elif kind is EventKind.DECODE:
                self.check_decode(event)
            elif kind in (EventKind.PUBLIC_BIT, EventKind.PUBLIC_SIGN) and (
                event.payload.get("purpose") == "check"
            ):
                self.check_reveal(event)
            elif kind is EventKind.CHECK:
                self.check_verdict(event)
                window_checked += 1
                window_failed += not event.payload.get("passed")
            elif kind is EventKind.RESTART:
                claimed = (event.payload.get("failed"), event.payload.get("checked"))
                if claimed != (window_failed, window_checked):
                    self.flag(
                        event,
                        f"restart claims {claimed[0]}/{claimed[1]} failed checks, "
                        f"transcript shows {window_failed}/{window_checked}",
                    )
                window_checked = window_failed = 0
            elif kind is EventKind.ANNOUNCEMENT and event.payload.get("marker") == "start":
                window_checked = window_failed = 0
            elif kind is EventKind.ABORT:
                aborted_at = event.seq
                checked += 1
                break
            checked += 1
        self.attribute()
        return checked, aborted_at

    def attribute(self) -> None:
        """Report each broken relation once.

        A broadcast whose every relation fails is the event at fault;
        otherwise the event claiming the relation is.
        """
        touching: Dict[int, List[_Relation]] = {}
        for relation in self.relations:
            if relation.broadcast is not None:
                touching.setdefault(relation.broadcast, []).append(relation)
        blamed: Set[int] = set()
        by_seq = {event.seq: event for event in self.events}
        for seq, relations in touching.items():
            if all(not relation.holds for relation in relations):
                self.flag(by_seq[seq], "no party's pad explains this broadcast")
                blamed.add(seq)
        for relation in self.relations:
            if relation.holds or relation.broadcast in blamed:
                continue
            self.flag(relation.owner, relation.reason)
        self.issues.sort(key=lambda issue: issue.seq)


def verify_transcript(transcript: Transcript) -> ReplayVerdict:
    events = list(transcript)
    abort = next((e.seq for e in events if e.kind is EventKind.ABORT), None)
    if abort is not None:
        events = [e for e in events if e.seq <= abort]
    replayer = _Replayer(events)
    checked, aborted_at = replayer.run()
    verdict = ReplayVerdict(
        events=len(transcript),
        checked=checked,
        issues=replayer.issues,
        aborted_at=aborted_at,
    )
    if verdict.consistent:
        log.info("Transcript of %s events is consistent", verdict.events)
    else:
        log.warning("Transcript has %s inconsistencies", len(verdict.issues))
    return verdict


def replay(path: Union[str, Path]) -> ReplayVerdict:
    """Load a JSONL transcript and verify it; parse errors carry line numbers."""
    return verify_transcript(Transcript.load(path))
