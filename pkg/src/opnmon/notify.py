"""Alarm events and pluggable notification sinks.

A state transition of an end-to-end link becomes an AlarmEvent. Every event
goes to the trap-style sinks (management-tool integration wants all
transitions); transitions into DEGRADED or DOWN additionally go to the
notify-style sinks unless the link was under planned maintenance at the
time. Shipped sinks write JSON lines to a file or fire JSON datagrams over
UDP; real mail or SNMP delivery plugs in behind the same interface.
"""

from __future__ import annotations

import json
import socket
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol

from .model import AdministrativeState, OperationalState

NOTIFY_STATES = (OperationalState.DEGRADED, OperationalState.DOWN)


@dataclass(frozen=True, slots=True)
class AlarmEvent:
    """One observed state change of an end-to-end link."""

    e2e_link_id: str
    old_state: OperationalState
    new_state: OperationalState
    cycle_index: int
    suppressed: bool
    channels: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "e2e_link_id": self.e2e_link_id,
            "old_state": self.old_state.value,
            "new_state": self.new_state.value,
            "cycle_index": self.cycle_index,
            "suppressed": self.suppressed,
            "channels": list(self.channels),
        }


def make_event(
    link_id: str,
    old: OperationalState,
    new: OperationalState,
    cycle_index: int,
    administrative: AdministrativeState,
) -> AlarmEvent:
    return AlarmEvent(
        e2e_link_id=link_id,
        old_state=old,
        new_state=new,
        cycle_index=cycle_index,
        suppressed=administrative is AdministrativeState.PLANNED_MAINTENANCE,
    )


class NotificationSink(Protocol):
    name: str

    def deliver(self, event: AlarmEvent) -> None: ...


class JsonLinesSink:
    """Append-only JSON-lines file, the desk-scale stand-in for email."""

    def __init__(self, name: str, path: str | Path):
        self.name = name
        self.path = Path(path)

    def deliver(self, event: AlarmEvent) -> None:
        line = json.dumps(event.to_dict(), sort_keys=True)
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(line + "\n")


class UdpDatagramSink:
    """Fire-and-forget JSON datagrams, the stand-in for SNMP traps."""

    def __init__(self, name: str, host: str, port: int):
        self.name = name
        self.address = (host, port)
        self._socket = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)

    def deliver(self, event: AlarmEvent) -> None:
        payload = json.dumps(event.to_dict(), sort_keys=True).encode("utf-8")
        try:
            self._socket.sendto(payload, self.address)
        except OSError:
            pass  # traps are best-effort by design

    def close(self) -> None:
        self._socket.close()


class MemorySink:
    """Collects events in memory; test doubles and embedding."""

    def __init__(self, name: str):
        self.name = name
        self.events: list[AlarmEvent] = []

    def deliver(self, event: AlarmEvent) -> None:
        self.events.append(event)


class AlarmDispatcher:
    """Routes alarm events to trap and notify sinks.

    Trap sinks receive every transition, suppressed or not. Notify sinks
    receive only unsuppressed transitions into DEGRADED or DOWN.
    """

    def __init__(
        self,
        notify_sinks: list[NotificationSink] | None = None,
        trap_sinks: list[NotificationSink] | None = None,
    ):
        self.notify_sinks = list(notify_sinks or [])
        self.trap_sinks = list(trap_sinks or [])

    def dispatch(self, event: AlarmEvent) -> AlarmEvent:
        """Deliver one event and return it with the reached channels filled in."""
        notify = event.new_state in NOTIFY_STATES and not event.suppressed
        channels = [sink.name for sink in self.trap_sinks]
        if notify:
            channels.extend(sink.name for sink in self.notify_sinks)
        final = replace(event, channels=tuple(channels))
        for sink in self.trap_sinks:
            sink.deliver(final)
        if notify:
            for sink in self.notify_sinks:
                sink.deliver(final)
        return final
