import logging
from typing import Callable, Dict, List, Optional, Sequence

from typing_extensions import Protocol

from ..settings import ERRORS_URL
from ..util import RandomSource
from .model import EntangledResource, bob_index
from .transcript import EventKind, Transcript, TranscriptEvent


log = logging.getLogger(__name__)


class ProtocolError(Exception):
    """Base class for protocol-level failures."""


class MasqueradeDetectedError(ProtocolError):
    """Raised when a classical message carries an identity token that does not
    match the one registered for the party it claims to come from."""

    def __init__(self, claimed: str, m: int, event: TranscriptEvent):
        self.claimed = claimed
        self.m = m
        self.event = event
        super().__init__(
            f"Message claiming to come from {claimed} in round {m} carries a "
            f"foreign identity token. Docs: {ERRORS_URL}#E5"
        )


class Forger(Protocol):
    def forged_token(self, party: str, serial: int) -> Optional[str]:
        ...


class Tapper(Protocol):
    def on_flight(self, resource: EntangledResource, bob: int, rng: RandomSource) -> None:
        ...


class ClassicalChannel:
    """Authenticated broadcast channel.

    Identities are ideal tokens registered once per session; the channel compares
    the token each message carries with the registered token of its claimed sender.
    """

    def __init__(self, transcript: Transcript):
        self.transcript = transcript
        self.registry: Dict[str, str] = {}

    def register(self, party: str, token: str) -> None:
        self.registry[party] = str(token)

    def post(
        self,
        m: int,
        actor: str,
        kind: EventKind,
        token: Optional[str] = None,
        **payload,
    ) -> TranscriptEvent:
        registered = self.registry.get(actor)
        if token is not None and token != registered:
            event = self.transcript.record(
                m, actor, EventKind.MASQUERADE, claimed_kind=kind.value, token=token
            )
            log.warning("Identity mismatch on a %s claimed by %s in round %s", kind, actor, m)
            raise MasqueradeDetectedError(actor, m, event)
        if token is not None:
            payload = dict(payload, token=token)
        return self.transcript.record(m, actor, kind, **payload)

    def _token_for(self, party: str, serial: int, forger: Optional[Forger]) -> str:
        if forger is not None:
            forged = forger.forged_token(party, serial)
            if forged is not None:
                return forged
        return self.registry[party]

    def authenticate_exchange(
        self,
        sender: str,
        receivers: Sequence[str],
        m: int,
        resource: int,
        transmit: Optional[Callable[[str], None]] = None,
        forger: Optional[Forger] = None,
    ) -> List[TranscriptEvent]:
        """Notify, send and confirm one qubit per receiver.

        The sender announces each qubit before it leaves and every receiver
        confirms receipt; both messages are identity-checked.
        """
        events = []
        for receiver in receivers:
            events.append(
                self.post(
                    m,
                    sender,
                    EventKind.AUTH_NOTICE,
                    token=self._token_for(sender, resource, forger),
                    to=receiver,
                    resource=resource,
                )
            )
            events.append(
                self.transcript.record(
                    m, sender, EventKind.QUBIT_SENT, to=receiver, resource=resource
                )
            )
            if transmit is not None:
                transmit(receiver)
            events.append(
                self.post(
                    m,
                    receiver,
                    EventKind.QUBIT_RECEIPT_CONFIRMED,
                    token=self._token_for(receiver, resource, forger),
                    resource=resource,
                )
            )
        return events


class QuantumChannel:
    """Carries Bobs' qubits from Alice; an eavesdropper may sit on the line."""

    def __init__(self, tapper: Optional[Tapper] = None):
        self.tapper = tapper

    def send(self, resource: EntangledResource, receiver: str, rng: RandomSource) -> None:
        if self.tapper is not None:
            self.tapper.on_flight(resource, bob_index(receiver), rng)
