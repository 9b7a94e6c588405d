"""Per-domain measurement point.

Each participating domain runs one of these next to whatever local system
actually knows the state of its links. The local system drops a JSON
snapshot (or pushes it over HTTP); the agent translates local status
vocabulary to the canonical states through a mapping table and answers
status polls with the XML dialect from :mod:`opnmon.nmwg`.

The agent never interprets topology. It reports the sections it was given,
one datum per section, and leaves stitching to the central monitor.

Unmapped local vocabulary degrades to UNKNOWN rather than failing the whole
snapshot: a domain inventing a new status word must not blind the monitor
to its other links. A snapshot that has not been refreshed for longer than
``stale_after`` seconds is no longer trusted and every section it contains
is reported as UNKNOWN/UNKNOWN.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .model import (
    DEFAULT_POLLING_PERIOD,
    AdministrativeState,
    MonitoredLinkReport,
    MonitoredLinkType,
    OperationalState,
)
from .nmwg import (
    PATH_STATUS_EVENT,
    REQUEST_TYPE,
    CodecError,
    SchemaViolation,
    emit_status_document,
    is_soap_wrapped,
    make_response,
    parse_status_document,
)


class SnapshotError(ValueError):
    """The local snapshot file is not usable."""


def _normalize(word: str) -> str:
    return word.strip().upper().replace("-", "_").replace(" ", "_")


@dataclass(frozen=True)
class StateMappingTable:
    """Translation from local status vocabulary to canonical states.

    Lookups are case- and separator-insensitive. Words with no mapping
    translate to UNKNOWN.
    """

    operational: dict[str, OperationalState] = field(default_factory=dict)
    administrative: dict[str, AdministrativeState] = field(default_factory=dict)

    def map_operational(self, word: str) -> OperationalState:
        key = _normalize(word)
        if key in self.operational:
            return self.operational[key]
        try:
            return OperationalState(key)
        except ValueError:
            return OperationalState.UNKNOWN

    def map_administrative(self, word: str) -> AdministrativeState:
        key = _normalize(word)
        if key in self.administrative:
            return self.administrative[key]
        try:
            return AdministrativeState(key)
        except ValueError:
            return AdministrativeState.UNKNOWN

    @classmethod
    def from_json(cls, obj: dict) -> "StateMappingTable":
        if not isinstance(obj, dict):
            raise SnapshotError("mapping table must be a JSON object")
        oper = {
            _normalize(word): OperationalState(state)
            for word, state in obj.get("operational", {}).items()
        }
        admin = {
            _normalize(word): AdministrativeState(state)
            for word, state in obj.get("administrative", {}).items()
        }
        return cls(operational=oper, administrative=admin)


@dataclass(frozen=True)
class LocalLinkRecord:
    """One section as described by the domain's own tooling."""

    e2e_link_id: str
    link_type: MonitoredLinkType
    dp_a: str
    dp_b: str
    operational_word: str
    administrative_word: str


@dataclass(frozen=True)
class LocalSnapshot:
    domain: str
    generated_at: int
    records: tuple[LocalLinkRecord, ...]

    @classmethod
    def from_json(cls, obj: dict) -> "LocalSnapshot":
        try:
            domain = obj["domain"]
            generated_at = obj["generated_at"]
            raw_links = obj["links"]
        except (TypeError, KeyError) as exc:
            raise SnapshotError("snapshot missing field %s" % exc) from None
        if not isinstance(domain, str) or not domain:
            raise SnapshotError("snapshot domain must be a non-empty string")
        if not isinstance(generated_at, int) or isinstance(generated_at, bool):
            raise SnapshotError("generated_at must be an integer timestamp")
        if not isinstance(raw_links, list):
            raise SnapshotError("links must be a list")
        records = []
        for index, raw in enumerate(raw_links):
            try:
                records.append(
                    LocalLinkRecord(
                        e2e_link_id=raw["e2e_link_id"],
                        link_type=MonitoredLinkType(raw["link_type"]),
                        dp_a=raw["dp_a"],
                        dp_b=raw["dp_b"],
                        operational_word=str(raw["operational"]),
                        administrative_word=str(raw["administrative"]),
                    )
                )
            except (TypeError, KeyError, ValueError) as exc:
                raise SnapshotError("bad link record %d: %s" % (index, exc)) from None
        return cls(domain=domain, generated_at=generated_at, records=tuple(records))

    @classmethod
    def parse(cls, raw: bytes | str) -> "LocalSnapshot":
        try:
            obj = json.loads(raw)
        except ValueError as exc:
            raise SnapshotError("snapshot is not valid JSON: %s" % exc) from None
        return cls.from_json(obj)


class MpAgent:
    """Holds the domain's current snapshot and answers status polls."""

    def __init__(
        self,
        domain: str,
        mapping: StateMappingTable | None = None,
        stale_after: int = 2 * DEFAULT_POLLING_PERIOD,
    ):
        if not domain:
            raise ValueError("domain must be non-empty")
        self.domain = domain
        self.mapping = mapping or StateMappingTable()
        self.stale_after = stale_after
        self._snapshot: LocalSnapshot | None = None
        self._lock = threading.Lock()

    def apply_snapshot(self, snapshot: LocalSnapshot) -> None:
        if snapshot.domain != self.domain:
            raise SnapshotError(
                "snapshot is for domain %r, agent serves %r" % (snapshot.domain, self.domain)
            )
        with self._lock:
            self._snapshot = snapshot

    def snapshot_stale(self, now: int) -> bool:
        with self._lock:
            snapshot = self._snapshot
        if snapshot is None:
            return True
        return now - snapshot.generated_at > self.stale_after

    def reports(self, now: int) -> tuple[MonitoredLinkReport, ...]:
        """Current section reports; stale or missing data reads as UNKNOWN."""
        with self._lock:
            snapshot = self._snapshot
        if snapshot is None:
            return ()
        stale = now - snapshot.generated_at > self.stale_after
        out = []
        for record in snapshot.records:
            if stale:
                oper = OperationalState.UNKNOWN
                admin = AdministrativeState.UNKNOWN
            else:
                oper = self.mapping.map_operational(record.operational_word)
                admin = self.mapping.map_administrative(record.administrative_word)
            out.append(
                MonitoredLinkReport(
                    e2e_link_id=record.e2e_link_id,
                    link_type=record.link_type,
                    dp_a=record.dp_a,
                    dp_b=record.dp_b,
                    reporting_domain=self.domain,
                    operational=oper,
                    administrative=admin,
                    cycle_timestamp=snapshot.generated_at,
                )
            )
        return tuple(out)

    def handle_status_request(self, raw: bytes, now: int) -> bytes:
        """Answer one poll. The reply is SOAP-wrapped iff the request was."""
        document = parse_status_document(raw)
        if document.message_type != REQUEST_TYPE:
            raise SchemaViolation(
                "expected %s, got %s" % (REQUEST_TYPE, document.message_type)
            )
        if not any(m.event_type == PATH_STATUS_EVENT for m in document.metadata_blocks):
            raise SchemaViolation("request carries no %s metadata" % PATH_STATUS_EVENT)
        response = make_response(self.reports(now))
        return emit_status_document(response, soap=is_soap_wrapped(raw))


class _AgentHandler(BaseHTTPRequestHandler):
    server_version = "opnmon-mp/0.1"

    def log_message(self, *args) -> None:
        pass

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length", "0"))
        return self.rfile.read(length)

    def do_POST(self) -> None:
        if self.path.rstrip("/") != "/mp":
            self._respond(404, b"not found", "text/plain")
            return
        raw = self._body()
        try:
            reply = self.server.agent.handle_status_request(raw, self.server.clock())
        except CodecError as exc:
            self._respond(400, str(exc).encode("utf-8"), "text/plain")
            return
        self._respond(200, reply, "text/xml; charset=utf-8")

    def do_PUT(self) -> None:
        if self.path.rstrip("/") != "/snapshot":
            self._respond(404, b"not found", "text/plain")
            return
        try:
            snapshot = LocalSnapshot.parse(self._body())
            self.server.agent.apply_snapshot(snapshot)
        except SnapshotError as exc:
            self._respond(400, str(exc).encode("utf-8"), "text/plain")
            return
        self._respond(204, b"", "text/plain")

    def _respond(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        if body:
            self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)


class AgentServer(ThreadingHTTPServer):
    """POST /mp for status polls, PUT /snapshot for local updates."""

    daemon_threads = True

    def __init__(self, address: tuple[str, int], agent: MpAgent, clock=None):
        super().__init__(address, _AgentHandler)
        self.agent = agent
        self.clock = clock or (lambda: int(time.time()))


def serve_agent(
    agent: MpAgent, host: str = "127.0.0.1", port: int = 0, clock=None
) -> AgentServer:
    server = AgentServer((host, port), agent, clock=clock)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server


def _watch_snapshot(agent: MpAgent, path: Path, interval: float) -> None:
    last_mtime = None
    while True:
        try:
            mtime = path.stat().st_mtime
        except OSError:
            mtime = None
        if mtime is not None and mtime != last_mtime:
            try:
                agent.apply_snapshot(LocalSnapshot.parse(path.read_bytes()))
                last_mtime = mtime
            except SnapshotError as exc:
                print("snapshot rejected: %s" % exc, file=sys.stderr)
        time.sleep(interval)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mp-agent", description="Serve one domain's link status over HTTP."
    )
    parser.add_argument("--domain", required=True, help="domain this agent reports for")
    parser.add_argument("--snapshot", type=Path, help="JSON snapshot file to load and watch")
    parser.add_argument("--mapping", type=Path, help="JSON state mapping table")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8141)
    parser.add_argument(
        "--stale-after",
        type=int,
        default=2 * DEFAULT_POLLING_PERIOD,
        help="seconds before an unrefreshed snapshot reads as UNKNOWN",
    )
    parser.add_argument(
        "--watch-interval",
        type=float,
        default=5.0,
        help="seconds between snapshot file checks",
    )
    args = parser.parse_args(argv)

    mapping = None
    if args.mapping:
        mapping = StateMappingTable.from_json(json.loads(args.mapping.read_text("utf-8")))
    agent = MpAgent(args.domain, mapping=mapping, stale_after=args.stale_after)
    if args.snapshot and args.snapshot.exists():
        agent.apply_snapshot(LocalSnapshot.parse(args.snapshot.read_bytes()))

    server = AgentServer((args.host, args.port), agent)
    if args.snapshot:
        watcher = threading.Thread(
            target=_watch_snapshot,
            args=(agent, args.snapshot, args.watch_interval),
            daemon=True,
        )
        watcher.start()
    host, port = server.server_address[:2]
    print("mp-agent for %s listening on %s:%d" % (agent.domain, host, port))
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
