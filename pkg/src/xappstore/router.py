"""Type-indexed message router with multi-recipient fanout.

Endpoints register the message types they send and receive; a routed message
is copied into the mailbox of every endpoint registered for its mtype, in
endpoint-ID order.  Every route produces a DeliveryRecord in an append-only
observation log, which conformance checking and the gateway read back.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

from .errors import AlreadyRegistered, UnknownEndpoint

MAX_PAYLOAD_BYTES = 65536

# Well-known mtype constants for this artifact; treated as opaque configuration.
SUBSCRIPTION_REQ = 12010
SUBSCRIPTION_RESP = 12011
RIC_INDICATION = 12050
HEALTH_PROBE = 100
HEALTH_REPLY = 101


@dataclass(frozen=True)
class RmrMessage:
    mtype: int
    source: str
    payload: bytes = b""
    correlation_id: str | None = None
    sim_time_ms: int = 0

    def __post_init__(self):
        if len(self.payload) > MAX_PAYLOAD_BYTES:
            raise ValueError(f"payload exceeds {MAX_PAYLOAD_BYTES} bytes")


@dataclass(frozen=True)
class DeliveryRecord:
    seq: int
    message: RmrMessage
    delivered_to: tuple
    dropped: bool
    observed_at: int

    def to_json_obj(self) -> dict:
        return {
            "seq": self.seq,
            "sim_time_ms": self.observed_at,
            "mtype": self.message.mtype,
            "source": self.message.source,
            "delivered_to": list(self.delivered_to),
            "dropped": self.dropped,
        }


@dataclass
class _Endpoint:
    declared_rx: frozenset
    declared_tx: frozenset
    mailbox: list = field(default_factory=list)


class RmrRouter:
    """In-process RMR stand-in: registration, fanout routing, pull mailboxes."""

    def __init__(self):
        self._lock = threading.RLock()
        self._endpoints: dict[str, _Endpoint] = {}
        self._rx_index: dict[int, list] = {}
        self._log: list[DeliveryRecord] = []
        self._seq = 0
        self.stats = {
            "route_calls": 0,
            "messages_delivered_total": 0,  # copies enqueued into mailboxes
            "messages_dropped": 0,          # route calls with no recipient
            "messages_drained": 0,
            "discarded_on_deregister": 0,
        }

    def register_endpoint(self, endpoint_id: str, rx, tx) -> None:
        with self._lock:
            if endpoint_id in self._endpoints:
                raise AlreadyRegistered(f"endpoint {endpoint_id!r} already registered")
            self._endpoints[endpoint_id] = _Endpoint(frozenset(rx), frozenset(tx))
            for t in rx:
                receivers = self._rx_index.setdefault(t, [])
                receivers.append(endpoint_id)
                receivers.sort()

    def deregister_endpoint(self, endpoint_id: str) -> None:
        with self._lock:
            ep = self._endpoints.pop(endpoint_id, None)
            if ep is None:
                raise UnknownEndpoint(f"endpoint {endpoint_id!r} not registered")
            for t in ep.declared_rx:
                receivers = self._rx_index.get(t, [])
                if endpoint_id in receivers:
                    receivers.remove(endpoint_id)
                if not receivers:
                    self._rx_index.pop(t, None)
            self.stats["discarded_on_deregister"] += len(ep.mailbox)

    def is_registered(self, endpoint_id: str) -> bool:
        with self._lock:
            return endpoint_id in self._endpoints

    def registration(self, endpoint_id: str):
        with self._lock:
            ep = self._endpoints.get(endpoint_id)
            if ep is None:
                raise UnknownEndpoint(f"endpoint {endpoint_id!r} not registered")
            return ep.declared_rx, ep.declared_tx

    def receivers_for(self, mtype: int) -> list:
        with self._lock:
            return list(self._rx_index.get(mtype, []))

    def route(self, msg: RmrMessage) -> DeliveryRecord:
        """Fan the message out to every endpoint registered for its mtype.

        No receiver is not a fault: the message is logged as dropped.  Each
        recipient gets its own copy (payloads are immutable bytes, so sharing
        the message object is safe).
        """
        with self._lock:
            receivers = tuple(self._rx_index.get(msg.mtype, []))
            for eid in receivers:
                self._endpoints[eid].mailbox.append(msg)
            dropped = not receivers
            record = DeliveryRecord(
                seq=self._seq, message=msg, delivered_to=receivers,
                dropped=dropped, observed_at=msg.sim_time_ms)
            self._seq += 1
            self._log.append(record)
            self.stats["route_calls"] += 1
            if dropped:
                self.stats["messages_dropped"] += 1
            else:
                self.stats["messages_delivered_total"] += len(receivers)
            return record

    def drain(self, endpoint_id: str, max_messages: int | None = None) -> list:
        with self._lock:
            ep = self._endpoints.get(endpoint_id)
            if ep is None:
                raise UnknownEndpoint(f"endpoint {endpoint_id!r} not registered")
            if max_messages is None:
                max_messages = len(ep.mailbox)
            taken = ep.mailbox[:max_messages]
            del ep.mailbox[:max_messages]
            self.stats["messages_drained"] += len(taken)
            return taken

    def mailbox_depth(self, endpoint_id: str) -> int:
        with self._lock:
            ep = self._endpoints.get(endpoint_id)
            if ep is None:
                raise UnknownEndpoint(f"endpoint {endpoint_id!r} not registered")
            return len(ep.mailbox)

    def observation_log(self, since_seq: int = -1) -> list:
        with self._lock:
            return [r for r in self._log if r.seq > since_seq]

    def export_log_jsonl(self, since_seq: int = -1) -> str:
        return "\n".join(json.dumps(r.to_json_obj(), sort_keys=True)
                         for r in self.observation_log(since_seq))

    def endpoint_ids(self) -> list:
        with self._lock:
            return sorted(self._endpoints)

    def pending_copies(self) -> int:
        with self._lock:
            return sum(len(ep.mailbox) for ep in self._endpoints.values())

    def conservation_holds(self) -> bool:
        """Copy accounting: enqueued == drained + pending + discarded, and
        every route call was either delivered somewhere or dropped."""
        s = self.stats
        copies_ok = (s["messages_delivered_total"]
                     == s["messages_drained"] + self.pending_copies()
                     + s["discarded_on_deregister"])
        calls_ok = (s["route_calls"]
                    == s["messages_dropped"]
                    + sum(1 for r in self._log if not r.dropped))
        return copies_ok and calls_ok
