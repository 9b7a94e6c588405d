"""Central monitor.

Drives the polling loop: every cycle it asks every registered measurement
point for its section reports, assembles per-link views, books availability
periods, raises alarms on state changes and rewrites the export files.

Per-MP failures never abort a cycle. An unreachable MP simply contributes
no reports, which surfaces as gaps and UNKNOWN aggregation on the links it
would have covered; the failure reason is kept as a cycle diagnostic.

Exports written each cycle into the output directory:

* ``status.xml``        aggregated state of all productive links
* ``cycle-state.json``  full per-link views plus poll errors (API feed)
* ``stats-weekly.csv``  availability counters for the current weekly windows
* ``stats-monthly.csv`` same for monthly windows

Alarm and trap records append to JSON-lines logs via the notify sinks.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import time
import urllib.error
import urllib.request
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence
from xml.sax.saxutils import quoteattr

from .assembly import E2ELinkView, stitch, view_to_dict
from .availability import LedgerBook, WindowKind, classify_period, export_stats_csv
from .model import AdministrativeState, OperationalState, PollingCycle
from .nmwg import (
    RESPONSE_TYPE,
    CodecError,
    MalformedXml,
    emit_status_document,
    make_request,
    parse_status_document,
)
from .notify import AlarmDispatcher, AlarmEvent, JsonLinesSink, UdpDatagramSink, make_event


class TransportError(Exception):
    """Poll delivery failed: connection refused, timeout, bad HTTP status."""


class EmptyRegistry(ValueError):
    """A cycle cannot run without at least one registered MP."""


@dataclass(frozen=True, slots=True)
class MpEndpoint:
    domain: str
    url: str
    timeout: float = 30.0

    def __post_init__(self) -> None:
        if not self.domain or not self.url:
            raise ValueError("endpoint needs a domain and a url")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


@dataclass(frozen=True, slots=True)
class LinkCatalogEntry:
    """Configured knowledge about one end-to-end link."""

    e2e_link_id: str
    endpoints: tuple[str, str] | None = None
    productive: bool = True


class InProcessTransport:
    """Routes polls straight to agent objects, still via the XML bytes path.

    Used by tests and the simulator; outages are simulated per URL.
    """

    def __init__(self, agents: Mapping[str, object], clock: Callable[[], int] | None = None):
        self.agents = dict(agents)
        self.clock = clock or (lambda: int(time.time()))
        self._down: set[str] = set()

    def set_down(self, url: str) -> None:
        self._down.add(url)

    def set_up(self, url: str) -> None:
        self._down.discard(url)

    def poll(self, endpoint: MpEndpoint, payload: bytes) -> bytes:
        if endpoint.url in self._down:
            raise TransportError("simulated outage at %s" % endpoint.url)
        agent = self.agents.get(endpoint.url)
        if agent is None:
            raise TransportError("nothing listening at %s" % endpoint.url)
        return agent.handle_status_request(payload, self.clock())


class HttpPollTransport:
    """POSTs the status request over plain HTTP."""

    def poll(self, endpoint: MpEndpoint, payload: bytes) -> bytes:
        request = urllib.request.Request(
            endpoint.url,
            data=payload,
            headers={"Content-Type": "text/xml; charset=utf-8"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=endpoint.timeout) as response:
                return response.read()
        except (urllib.error.URLError, OSError, TimeoutError) as exc:
            raise TransportError("%s: %s" % (endpoint.url, exc)) from None


@dataclass
class CycleResult:
    cycle: PollingCycle
    views: dict[str, E2ELinkView]
    poll_errors: dict[str, str]
    wall_seconds: float = 0.0


def run_cycle(
    cycle: PollingCycle,
    registry: Sequence[MpEndpoint],
    transport,
    catalog: Sequence[LinkCatalogEntry] = (),
    max_workers: int | None = None,
) -> CycleResult:
    """Poll every MP concurrently and assemble all link views.

    Always completes; per-MP failures land in ``poll_errors`` keyed by
    domain. Links in the catalog that nobody reported on still get a view
    (all UNKNOWN) so silence is visible downstream.
    """
    if not registry:
        raise EmptyRegistry("no measurement points registered")
    urls = [endpoint.url for endpoint in registry]
    if len(set(urls)) != len(urls):
        raise ValueError("duplicate MP urls in registry")

    started = time.monotonic()
    request_bytes = emit_status_document(make_request())
    poll_errors: dict[str, str] = {}
    by_link: dict[str, list] = {}

    with concurrent.futures.ThreadPoolExecutor(
        max_workers=max_workers or min(32, len(registry))
    ) as pool:
        futures = {
            endpoint.domain: pool.submit(transport.poll, endpoint, request_bytes)
            for endpoint in registry
        }
        # Collect in registry order so diagnostics and views are stable.
        for endpoint in registry:
            try:
                raw = futures[endpoint.domain].result()
            except TransportError as exc:
                poll_errors[endpoint.domain] = str(exc)
                continue
            except Exception as exc:  # defensive: a transport bug is a poll failure
                poll_errors[endpoint.domain] = "transport failure: %s" % exc
                continue
            try:
                document = parse_status_document(raw)
                if document.message_type != RESPONSE_TYPE:
                    raise MalformedXml("unexpected message type %s" % document.message_type)
                reports = document.reports()
            except CodecError as exc:
                poll_errors[endpoint.domain] = "bad response: %s" % exc
                continue
            for report in reports:
                by_link.setdefault(report.e2e_link_id, []).append(report)

    catalog_map = {entry.e2e_link_id: entry for entry in catalog}
    views: dict[str, E2ELinkView] = {}
    for link_id in sorted(set(by_link) | set(catalog_map)):
        entry = catalog_map.get(link_id)
        views[link_id] = stitch(
            by_link.get(link_id, ()),
            endpoints=entry.endpoints if entry else None,
            e2e_link_id=link_id,
        )
    return CycleResult(
        cycle=cycle,
        views=views,
        poll_errors=poll_errors,
        wall_seconds=time.monotonic() - started,
    )


def detect_transitions(
    previous: CycleResult | None,
    current: CycleResult,
    dispatcher: AlarmDispatcher | None = None,
) -> list[AlarmEvent]:
    """One event per link whose aggregated operational state changed.

    The first cycle has no predecessor and therefore raises nothing; links
    seen for the first time likewise start without a transition.
    """
    if previous is None:
        return []
    events = []
    for link_id in sorted(current.views):
        view = current.views[link_id]
        old_view = previous.views.get(link_id)
        if old_view is None:
            continue
        old = old_view.aggregated_operational
        new = view.aggregated_operational
        if new is old:
            continue
        event = make_event(
            link_id, old, new, current.cycle.cycle_index, view.aggregated_administrative
        )
        if dispatcher is not None:
            event = dispatcher.dispatch(event)
        events.append(event)
    return events


def update_ledgers(
    result: CycleResult, book: LedgerBook, catalog: Sequence[LinkCatalogEntry]
) -> None:
    """Book exactly one period per productive link for this cycle."""
    for entry in catalog:
        if not entry.productive:
            continue
        view = result.views.get(entry.e2e_link_id)
        if view is None:
            bucket = classify_period(
                stitch((), e2e_link_id=entry.e2e_link_id)
            )
        else:
            bucket = classify_period(view)
        book.record(entry.e2e_link_id, bucket, result.cycle.start)


def export_status_xml(
    result: CycleResult, catalog: Sequence[LinkCatalogEntry] = ()
) -> bytes:
    """Aggregated per-link status as a deterministic XML document.

    Only productive links are included when a catalog is given; with no
    catalog every assembled link is exported.
    """
    if catalog:
        link_ids = sorted(e.e2e_link_id for e in catalog if e.productive)
    else:
        link_ids = sorted(result.views)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<e2emonStatus cycleIndex=%s cycleStart=%s period=%s>'
        % (
            quoteattr(str(result.cycle.cycle_index)),
            quoteattr(str(result.cycle.start)),
            quoteattr(str(result.cycle.period)),
        ),
    ]
    for link_id in link_ids:
        view = result.views.get(link_id)
        if view is None:
            view = stitch((), e2e_link_id=link_id)
        lines.append(
            "  <link id=%s operState=%s adminState=%s uncertain=%s"
            " hasUnknown=%s fullyReconstructed=%s/>"
            % (
                quoteattr(link_id),
                quoteattr(view.aggregated_operational.value),
                quoteattr(view.aggregated_administrative.value),
                quoteattr("true" if view.uncertain else "false"),
                quoteattr("true" if view.has_unknown else "false"),
                quoteattr("true" if view.fully_reconstructed else "false"),
            )
        )
    lines.append("</e2emonStatus>")
    return ("\n".join(lines) + "\n").encode("utf-8")


@dataclass(frozen=True, slots=True)
class ExportedLinkStatus:
    operational: OperationalState
    administrative: AdministrativeState
    uncertain: bool
    has_unknown: bool
    fully_reconstructed: bool


@dataclass(frozen=True, slots=True)
class StatusExport:
    cycle_index: int
    cycle_start: int
    period: int
    links: dict[str, ExportedLinkStatus]


def parse_status_export(raw: bytes | str) -> StatusExport:
    """Read back a status.xml export."""
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        raise MalformedXml("bad status export: %s" % exc) from None
    if root.tag != "e2emonStatus":
        raise MalformedXml("unexpected root element %r" % root.tag)
    links: dict[str, ExportedLinkStatus] = {}
    for element in root.findall("link"):
        links[element.attrib["id"]] = ExportedLinkStatus(
            operational=OperationalState(element.attrib["operState"]),
            administrative=AdministrativeState(element.attrib["adminState"]),
            uncertain=element.attrib["uncertain"] == "true",
            has_unknown=element.attrib["hasUnknown"] == "true",
            fully_reconstructed=element.attrib["fullyReconstructed"] == "true",
        )
    return StatusExport(
        cycle_index=int(root.attrib["cycleIndex"]),
        cycle_start=int(root.attrib["cycleStart"]),
        period=int(root.attrib["period"]),
        links=links,
    )


@dataclass
class MonitorConfig:
    endpoints: tuple[MpEndpoint, ...]
    catalog: tuple[LinkCatalogEntry, ...]
    period: int = 300
    epoch: int = 0
    output_dir: Path = Path("out")
    alarm_log: Path | None = None
    trap_log: Path | None = None
    trap_udp: tuple[str, int] | None = None

    @classmethod
    def from_json(cls, obj: dict, base_dir: Path | None = None) -> "MonitorConfig":
        base = base_dir or Path(".")

        def _path(value, default=None):
            if value is None:
                return default
            p = Path(value)
            return p if p.is_absolute() else base / p

        endpoints = tuple(
            MpEndpoint(
                domain=e["domain"], url=e["url"], timeout=float(e.get("timeout", 30.0))
            )
            for e in obj.get("endpoints", [])
        )
        catalog = tuple(
            LinkCatalogEntry(
                e2e_link_id=l["e2e_link_id"],
                endpoints=tuple(l["endpoints"]) if l.get("endpoints") else None,
                productive=bool(l.get("productive", True)),
            )
            for l in obj.get("links", [])
        )
        trap_udp = None
        if obj.get("trap_udp"):
            trap_udp = (obj["trap_udp"]["host"], int(obj["trap_udp"]["port"]))
        output_dir = _path(obj.get("output_dir", "out"))
        return cls(
            endpoints=endpoints,
            catalog=catalog,
            period=int(obj.get("period", 300)),
            epoch=int(obj.get("epoch", 0)),
            output_dir=output_dir,
            alarm_log=_path(obj.get("alarm_log"), output_dir / "alarms.jsonl"),
            trap_log=_path(obj.get("trap_log"), output_dir / "traps.jsonl"),
            trap_udp=trap_udp,
        )

    @classmethod
    def load(cls, path: str | Path) -> "MonitorConfig":
        path = Path(path)
        return cls.from_json(json.loads(path.read_text("utf-8")), base_dir=path.parent)


def build_dispatcher(config: MonitorConfig) -> AlarmDispatcher:
    notify_sinks = []
    trap_sinks = []
    if config.alarm_log is not None:
        notify_sinks.append(JsonLinesSink("email", config.alarm_log))
    if config.trap_log is not None:
        trap_sinks.append(JsonLinesSink("trap-log", config.trap_log))
    if config.trap_udp is not None:
        trap_sinks.append(UdpDatagramSink("trap", *config.trap_udp))
    return AlarmDispatcher(notify_sinks=notify_sinks, trap_sinks=trap_sinks)


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


class MonitorService:
    """Owns the cycle loop state: registry, ledgers, previous views, sinks."""

    def __init__(
        self,
        config: MonitorConfig,
        transport=None,
        dispatcher: AlarmDispatcher | None = None,
    ):
        if not config.endpoints:
            raise EmptyRegistry("monitor config registers no measurement points")
        self.config = config
        self.transport = transport or HttpPollTransport()
        self.dispatcher = dispatcher if dispatcher is not None else build_dispatcher(config)
        self.book = LedgerBook()
        self.previous: CycleResult | None = None
        self.events: list[AlarmEvent] = []
        config.output_dir.mkdir(parents=True, exist_ok=True)

    def run_once(self, cycle_index: int) -> CycleResult:
        cycle = PollingCycle.at(cycle_index, epoch=self.config.epoch, period=self.config.period)
        result = run_cycle(cycle, self.config.endpoints, self.transport, self.config.catalog)
        self.events.extend(detect_transitions(self.previous, result, self.dispatcher))
        update_ledgers(result, self.book, self.config.catalog)
        self.write_exports(result)
        self.previous = result
        return result

    def write_exports(self, result: CycleResult) -> None:
        out = self.config.output_dir
        _write_atomic(out / "status.xml", export_status_xml(result, self.config.catalog))
        _write_atomic(
            out / "stats-weekly.csv",
            export_stats_csv(self.book.ledgers(WindowKind.WEEKLY)),
        )
        _write_atomic(
            out / "stats-monthly.csv",
            export_stats_csv(self.book.ledgers(WindowKind.MONTHLY)),
        )
        state = {
            "cycle_index": result.cycle.cycle_index,
            "cycle_start": result.cycle.start,
            "period": result.cycle.period,
            "poll_errors": dict(sorted(result.poll_errors.items())),
            "productive": sorted(
                e.e2e_link_id for e in self.config.catalog if e.productive
            ),
            "links": {
                link_id: view_to_dict(view) for link_id, view in sorted(result.views.items())
            },
        }
        _write_atomic(
            out / "cycle-state.json",
            json.dumps(state, indent=2, sort_keys=True).encode("utf-8") + b"\n",
        )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="monitor", description="Run the central link monitor."
    )
    parser.add_argument("--config", required=True, type=Path)
    parser.add_argument("--cycles", type=int, help="stop after N cycles (default: run forever)")
    parser.add_argument(
        "--no-wait",
        action="store_true",
        help="run cycles back to back instead of sleeping out the period",
    )
    args = parser.parse_args(argv)

    config = MonitorConfig.load(args.config)
    if config.epoch == 0:
        now = int(time.time())
        config.epoch = now - now % config.period
    service = MonitorService(config)
    index = 0
    while args.cycles is None or index < args.cycles:
        result = service.run_once(index)
        state = ", ".join(
            "%s=%s" % (link_id, view.aggregated_operational)
            for link_id, view in sorted(result.views.items())
        )
        print(
            "cycle %d: %d links (%s), %d poll errors, %.2fs"
            % (
                index,
                len(result.views),
                state or "none",
                len(result.poll_errors),
                result.wall_seconds,
            )
        )
        index += 1
        if args.cycles is not None and index >= args.cycles:
            break
        if not args.no_wait:
            next_start = config.epoch + index * config.period
            delay = next_start - time.time()
            if delay > 0:
                time.sleep(delay)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
