import dataclasses
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Union

from ..encoders import jsonable_encoder
from ..settings import ERRORS_URL


log = logging.getLogger(__name__)

FIELD_ORDER = ("seq", "m", "actor", "kind", "payload")


class TranscriptParseError(Exception):
    """Raised when a transcript file cannot be parsed."""

    def __init__(self, line: int, reason: str):
        self.line = line
        super().__init__(
            f"Malformed transcript at line {line}: {reason}. Docs: {ERRORS_URL}#E6"
        )


class EventKind(str, Enum):
    QUBIT_SENT = "QubitSent"
    QUBIT_RECEIPT_CONFIRMED = "QubitReceiptConfirmed"
    AUTH_NOTICE = "AuthNotice"
    BASIS_ANNOUNCE = "BasisAnnounce"
    MODE_ANNOUNCE = "ModeAnnounce"
    PUBLIC_BIT = "PublicBit"
    PUBLIC_SIGN = "PublicSign"
    DECODE = "Decode"
    ABORT = "Abort"
    RESTART = "Restart"
    ANNOUNCEMENT = "Announcement"
    MEASUREMENT = "Measurement"
    ENCODE = "Encode"
    CHECK = "Check"
    MASQUERADE = "Masquerade"

    def __str__(self):
        return self.value


# Everything on the classical broadcast channel. Measurement, Encode, Decode and
# Check records stay with the party that made them.
PUBLIC_KINDS = frozenset(
    {
        EventKind.QUBIT_SENT,
        EventKind.QUBIT_RECEIPT_CONFIRMED,
        EventKind.AUTH_NOTICE,
        EventKind.BASIS_ANNOUNCE,
        EventKind.MODE_ANNOUNCE,
        EventKind.PUBLIC_BIT,
        EventKind.PUBLIC_SIGN,
        EventKind.ABORT,
        EventKind.RESTART,
        EventKind.ANNOUNCEMENT,
    }
)


@dataclasses.dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    m: int
    actor: str
    kind: EventKind
    payload: Dict[str, Any]

    @property
    def public(self) -> bool:
        return self.kind in PUBLIC_KINDS

    def to_json(self) -> str:
        document = {
            "seq": self.seq,
            "m": self.m,
            "actor": self.actor,
            "kind": self.kind.value,
            "payload": jsonable_encoder(self.payload),
        }
        return json.dumps(document, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str, line: int = 0) -> "TranscriptEvent":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise TranscriptParseError(line, f"invalid JSON ({e.msg})") from e
        if not isinstance(document, dict) or tuple(document) != FIELD_ORDER:
            raise TranscriptParseError(
                line, f"expected the fields {', '.join(FIELD_ORDER)} in that order"
            )
        try:
            kind = EventKind(document["kind"])
        except ValueError as e:
            raise TranscriptParseError(line, f"unknown kind {document['kind']!r}") from e
        seq, m = document["seq"], document["m"]
        if not isinstance(seq, int) or not isinstance(m, int):
            raise TranscriptParseError(line, "seq and m must be integers")
        if not isinstance(document["actor"], str):
            raise TranscriptParseError(line, "actor must be a string")
        if not isinstance(document["payload"], dict):
            raise TranscriptParseError(line, "payload must be an object")
        return cls(
            seq=seq,
            m=m,
            actor=document["actor"],
            kind=kind,
            payload=document["payload"],
        )


Subscriber = Callable[[TranscriptEvent], None]


class Transcript:
    """Append-only event log of one protocol run.

    Subscribers see public events only, as they are recorded.
    """

    def __init__(self, events: Optional[Iterable[TranscriptEvent]] = None):
        self.events: List[TranscriptEvent] = list(events or [])
        self._subscribers: List[Subscriber] = []

    def subscribe(self, subscriber: Subscriber) -> None:
        self._subscribers.append(subscriber)

    def record(self, m: int, actor: str, kind: EventKind, **payload: Any) -> TranscriptEvent:
        event = TranscriptEvent(
            seq=len(self.events), m=m, actor=actor, kind=kind, payload=payload
        )
        self.events.append(event)
        if event.public:
            for subscriber in self._subscribers:
                subscriber(event)
        return event

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[TranscriptEvent]:
        return iter(self.events)

    def __getitem__(self, seq: int) -> TranscriptEvent:
        return self.events[seq]

    def since(self, seq: int) -> List[TranscriptEvent]:
        return self.events[seq:]

    def of_kind(self, *kinds: EventKind) -> List[TranscriptEvent]:
        return [event for event in self.events if event.kind in kinds]

    def dumps(self) -> str:
        return "".join(event.to_json() + "\n" for event in self.events)

    def dump(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        log.info("Wrote %s transcript events to %s", len(self.events), path)
        return path

    @classmethod
    def loads(cls, text: str) -> "Transcript":
        events = []
        for line_number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            events.append(TranscriptEvent.from_json(line, line_number))
        return cls(events)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Transcript":
        return cls.loads(Path(path).read_text(encoding="utf-8"))
