import dataclasses
from typing import Dict, List, Optional

from ..protocol.model import ALICE
from ..protocol.transcript import EventKind, TranscriptEvent


@dataclasses.dataclass
class EveRoundRecord:
    """What Eve holds about one resource.

    ``pads`` are her estimates of each party's Z outcome, the one-time pad that
    party will use if the resource carries a message bit.
    """

    serial: int
    outcomes: Dict[str, int] = dataclasses.field(default_factory=dict)
    pads: Dict[str, int] = dataclasses.field(default_factory=dict)
    kept_qubits: Dict[str, int] = dataclasses.field(default_factory=dict)
    ancillas: Dict[str, int] = dataclasses.field(default_factory=dict)
    mask: Optional[List[int]] = None
    settled: bool = False


@dataclasses.dataclass(frozen=True)
class BitEstimate:
    seq: int
    resource: int
    sender: str
    bit: int
    tapped: bool


@dataclasses.dataclass
class EveKnowledge:
    """Everything Eve learned, from her own taps and from public broadcasts."""

    rounds: Dict[int, EveRoundRecord] = dataclasses.field(default_factory=dict)
    broadcasts: List[TranscriptEvent] = dataclasses.field(default_factory=list)

    def record(self, serial: int) -> EveRoundRecord:
        if serial not in self.rounds:
            self.rounds[serial] = EveRoundRecord(serial=serial)
        return self.rounds[serial]

    def observe(self, event: TranscriptEvent) -> None:
        if not event.public:
            raise ValueError(f"Eve cannot read private {event.kind} records")
        if event.kind is EventKind.PUBLIC_BIT and event.payload.get("purpose") == "message":
            self.broadcasts.append(event)

    def pad_estimate(self, serial: int, sender: str) -> Optional[int]:
        record = self.rounds.get(serial)
        if record is None:
            return None
        if sender in record.pads:
            return record.pads[sender]
        # Without a direct reading, Eve assumes Alice's pad equals the first
        # student pad she holds, as it does for unmasked states.
        if sender == ALICE and record.pads:
            return record.pads[sorted(record.pads)[0]]
        return None

    def estimates(self) -> List[BitEstimate]:
        """Eve's plaintext guess for every message broadcast she saw.

        On resources she did not tap she has no pad and reads the broadcast
        as the plaintext.
        """
        guesses = []
        for event in self.broadcasts:
            serial = event.payload["resource"]
            pad = self.pad_estimate(serial, event.actor)
            guesses.append(
                BitEstimate(
                    seq=event.seq,
                    resource=serial,
                    sender=event.actor,
                    bit=event.payload["bit"] ^ (pad or 0),
                    tapped=pad is not None,
                )
            )
        return guesses
