# qdsig/services/channel.py
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

from qdsig.models.messages import MessageKind, Party, ProtocolMessage, SessionTranscript

logger = logging.getLogger(__name__)

Tap = Callable[[ProtocolMessage], ProtocolMessage]


@dataclass
class _TapEntry:
    tap: Tap
    sender: Optional[Party]
    receiver: Optional[Party]
    kind: Optional[MessageKind]

    def matches(self, message: ProtocolMessage) -> bool:
        return ((self.sender is None or message.sender == self.sender)
                and (self.receiver is None or message.receiver == self.receiver)
                and (self.kind is None or message.kind == self.kind))


class Channel:
    """In-process transport; taps see (and may replace) every matching message"""

    def __init__(self, transcript: SessionTranscript):
        self.transcript = transcript
        self._taps: List[_TapEntry] = []
        self._inboxes: Dict[Party, List[ProtocolMessage]] = {p: [] for p in Party}
        self.intercepted: List[ProtocolMessage] = []

    def add_tap(self, tap: Tap, sender: Optional[Party] = None,
                receiver: Optional[Party] = None, kind: Optional[MessageKind] = None):
        self._taps.append(_TapEntry(tap, sender, receiver, kind))

    def send(self, message: ProtocolMessage) -> ProtocolMessage:
        delivered = message
        for entry in self._taps:
            if entry.matches(delivered):
                self.intercepted.append(delivered)
                delivered = entry.tap(delivered)
        if delivered is not message:
            logger.debug(f"{message.kind.value} {message.sender.value}->{message.receiver.value} replaced in transit")
        self.transcript.append(delivered)
        self._inboxes[delivered.receiver].append(delivered)
        return delivered

    def send_all(self, messages: List[ProtocolMessage]):
        for message in messages:
            self.send(message)

    def inbox(self, party: Party) -> List[ProtocolMessage]:
        return list(self._inboxes[party])
