"""Deterministic multi-domain scenario engine.

Runs the whole stack at desk scale: one in-process MP agent per scripted
domain, the central monitor polling them through the in-process transport
(still exchanging real XML bytes), and synthesized probe/interface metrics
flowing into a metric archive.

Time is simulated: cycles run back to back and ``cycle_index`` is the only
authority; every timestamp derives from ``epoch + cycle_index * period``.
Two runs of the same (scenario, seed) produce byte-identical snapshots,
exports and alarm logs.

The event script is the ground truth. ``expected_states`` recomputes each
cycle's per-link aggregated state directly from the script, without touching
the assembly pipeline, so scenario runs double as an independent oracle.

Scenario documents are JSON; see :mod:`opnmon.fixtures` for builders.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from .agent import LocalLinkRecord, LocalSnapshot, MpAgent
from .archive import (
    InvalidSample,
    MetricArchive,
    MetricKind,
    MetricSample,
    SeriesKey,
    parse_series_key,
    validate_value,
)
from .model import (
    AdministrativeState,
    MonitoredLinkType,
    OperationalState,
)
from .monitor import (
    CycleResult,
    InProcessTransport,
    LinkCatalogEntry,
    MonitorConfig,
    MonitorService,
    MpEndpoint,
)
from .notify import AlarmDispatcher, AlarmEvent, JsonLinesSink
from .weathermap import AbstractTopology, TopologyError, load_topology


class ScenarioInvalid(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class SectionSpec:
    """One scripted section: what a domain reports about one e2e link."""

    e2e_link_id: str
    link_type: MonitoredLinkType
    dp_a: str
    dp_b: str
    operational: OperationalState = OperationalState.UP
    administrative: AdministrativeState = AdministrativeState.NORMAL_OPERATION


@dataclass(frozen=True, slots=True)
class DomainSpec:
    domain: str
    records: tuple[SectionSpec, ...]


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    period: int
    epoch: int
    domains: tuple[DomainSpec, ...]
    catalog: tuple[LinkCatalogEntry, ...]
    topology: AbstractTopology | None
    events: tuple[dict, ...]
    acceleration: float = 300.0
    topology_raw: dict | None = None

    @classmethod
    def from_json(cls, obj: dict) -> "Scenario":
        if not isinstance(obj, dict):
            raise ScenarioInvalid("scenario must be a JSON object")
        try:
            seed = int(obj["seed"])
            period = int(obj.get("period", 300))
            epoch = int(obj.get("epoch", 0))
            raw_domains = obj["domains"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioInvalid("bad scenario header: %s" % exc) from None
        if period <= 0:
            raise ScenarioInvalid("period must be positive")
        if not raw_domains:
            raise ScenarioInvalid("scenario needs at least one domain")

        domains: list[DomainSpec] = []
        seen_domains: set[str] = set()
        for raw in raw_domains:
            name = raw.get("domain")
            if not name:
                raise ScenarioInvalid("domain entry without a name")
            if name in seen_domains:
                raise ScenarioInvalid("domain %r appears twice" % name)
            seen_domains.add(name)
            records = []
            for item in raw.get("links", []):
                try:
                    records.append(
                        SectionSpec(
                            e2e_link_id=item["e2e_link_id"],
                            link_type=MonitoredLinkType(item["link_type"]),
                            dp_a=item["dp_a"],
                            dp_b=item["dp_b"],
                            operational=OperationalState(item.get("operational", "UP")),
                            administrative=AdministrativeState(
                                item.get("administrative", "NORMAL_OPERATION")
                            ),
                        )
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise ScenarioInvalid(
                        "bad section in domain %r: %s" % (name, exc)
                    ) from None
            domains.append(DomainSpec(domain=name, records=tuple(records)))

        catalog = []
        for item in obj.get("catalog", []):
            try:
                catalog.append(
                    LinkCatalogEntry(
                        e2e_link_id=item["e2e_link_id"],
                        endpoints=tuple(item["endpoints"]) if item.get("endpoints") else None,
                        productive=bool(item.get("productive", True)),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise ScenarioInvalid("bad catalog entry: %s" % exc) from None

        topology = None
        if obj.get("topology"):
            try:
                topology = load_topology(obj["topology"])
            except TopologyError as exc:
                raise ScenarioInvalid("bad embedded topology: %s" % exc) from exc

        events = tuple(obj.get("events", ()))
        scenario = cls(
            name=str(obj.get("name", "scenario")),
            seed=seed,
            period=period,
            epoch=epoch,
            domains=tuple(domains),
            catalog=tuple(catalog),
            topology=topology,
            events=events,
            acceleration=float(obj.get("acceleration", 300.0)),
            topology_raw=obj.get("topology") or None,
        )
        scenario._validate_events()
        return scenario

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        try:
            obj = json.loads(Path(path).read_text("utf-8"))
        except ValueError as exc:
            raise ScenarioInvalid("scenario file is not valid JSON: %s" % exc) from None
        return cls.from_json(obj)

    def domain(self, name: str) -> DomainSpec:
        for spec in self.domains:
            if spec.domain == name:
                return spec
        raise ScenarioInvalid("unknown domain %r" % name)

    def _validate_events(self) -> None:
        domain_names = {spec.domain for spec in self.domains}
        for index, event in enumerate(self.events):
            where = "event %d" % index
            kind = event.get("kind")
            at = event.get("at")
            if not isinstance(at, int) or at < 0:
                raise ScenarioInvalid("%s: 'at' must be a cycle index >= 0" % where)
            if kind == "set":
                if event.get("domain") not in domain_names:
                    raise ScenarioInvalid("%s: unknown domain %r" % (where, event.get("domain")))
                matches = _matching_sections(self.domain(event["domain"]), event)
                if not matches:
                    raise ScenarioInvalid("%s: no section matches" % where)
                if "operational" not in event and "administrative" not in event:
                    raise ScenarioInvalid("%s: set event changes nothing" % where)
                try:
                    if "operational" in event:
                        OperationalState(event["operational"])
                    if "administrative" in event:
                        AdministrativeState(event["administrative"])
                except ValueError as exc:
                    raise ScenarioInvalid("%s: %s" % (where, exc)) from None
            elif kind in ("mp_down", "mp_up"):
                if event.get("domain") not in domain_names:
                    raise ScenarioInvalid("%s: unknown domain %r" % (where, event.get("domain")))
            elif kind == "metric":
                try:
                    key = parse_series_key(event["series"])
                    validate_value(key, event["value"])
                except (KeyError, InvalidSample) as exc:
                    raise ScenarioInvalid("%s: %s" % (where, exc)) from None
                until = event.get("until", at + 1)
                if not isinstance(until, int) or until <= at:
                    raise ScenarioInvalid("%s: 'until' must be > 'at'" % where)
            else:
                raise ScenarioInvalid("%s: unknown kind %r" % (where, kind))


def _matching_sections(spec: DomainSpec, event: dict) -> list[SectionSpec]:
    out = []
    for record in spec.records:
        if record.e2e_link_id != event.get("e2e_link_id"):
            continue
        if "dp_a" in event and {record.dp_a, record.dp_b} != {event["dp_a"], event["dp_b"]}:
            continue
        out.append(record)
    return out


# Section key used by the live state table and the oracle alike.
def _section_key(domain: str, record: SectionSpec) -> tuple:
    return (domain, record.e2e_link_id, record.dp_a, record.dp_b)


def expected_states(scenario: Scenario, cycle: int) -> dict[str, OperationalState]:
    """Ground-truth aggregated state per cataloged link at one cycle.

    Replays the event script directly: pair collapse and worst-dominates
    reduce to one max over the visible raw section states, so the oracle
    needs no stitching. Links with every section hidden by an MP outage
    read UNKNOWN.
    """
    weight = {
        OperationalState.UP: 0,
        OperationalState.UNKNOWN: 1,
        OperationalState.DEGRADED: 2,
        OperationalState.DOWN: 3,
    }
    states: dict[tuple, OperationalState] = {}
    for spec in scenario.domains:
        for record in spec.records:
            states[_section_key(spec.domain, record)] = record.operational
    hidden: set[str] = set()
    for event in scenario.events:
        if event["at"] > cycle:
            continue
        kind = event["kind"]
        if kind == "set" and "operational" in event:
            spec = scenario.domain(event["domain"])
            for record in _matching_sections(spec, event):
                states[_section_key(spec.domain, record)] = OperationalState(
                    event["operational"]
                )
        elif kind == "mp_down":
            hidden.add(event["domain"])
        elif kind == "mp_up":
            hidden.discard(event["domain"])

    out: dict[str, OperationalState] = {}
    for entry in scenario.catalog:
        visible = [
            state
            for (domain, e2e_id, _, _), state in states.items()
            if e2e_id == entry.e2e_link_id and domain not in hidden
        ]
        if not visible:
            out[entry.e2e_link_id] = OperationalState.UNKNOWN
        else:
            out[entry.e2e_link_id] = max(visible, key=weight.__getitem__)
    return out


class MetricSynthesizer:
    """Seeded metric streams for every series implied by the topology.

    One generator per series, seeded from (scenario seed, series key), so
    streams are independent of emission order. Baselines derive from the
    series key alone. Scripted metric events override whole bins; nothing
    else is random beyond the uniform noise.
    """

    def __init__(self, scenario: Scenario, archive: MetricArchive):
        assert scenario.topology is not None
        self.archive = archive
        self.seed = scenario.seed
        self.topology = scenario.topology
        self._rngs: dict[str, random.Random] = {}
        self._overrides = [
            (event["at"], event.get("until", event["at"] + 1), event["series"], event["value"])
            for event in scenario.events
            if event["kind"] == "metric"
        ]
        nodes = sorted(node.id for node in self.topology.nodes)
        self.pairs = [(a, b) for a in nodes for b in nodes if a != b]
        self.interfaces = sorted(
            address for link in self.topology.links for address in link.ip_interfaces
        )
        self.bwctl_pairs = sorted(
            {
                pair
                for link in self.topology.links
                for pair in (link.endpoints, link.endpoints[::-1])
            }
        )

    def _rng(self, key: str) -> random.Random:
        rng = self._rngs.get(key)
        if rng is None:
            digest = hashlib.sha256(("%d|%s" % (self.seed, key)).encode()).digest()
            rng = random.Random(int.from_bytes(digest[:8], "big"))
            self._rngs[key] = rng
        return rng

    @staticmethod
    def _base(key: str, lo: float, hi: float) -> float:
        digest = hashlib.sha256(key.encode()).digest()
        return lo + (hi - lo) * (int.from_bytes(digest[:4], "big") / 0xFFFFFFFF)

    def _active_overrides(self, cycle: int) -> dict[str, object]:
        return {
            series: value
            for at, until, series, value in self._overrides
            if at <= cycle < until
        }

    def _put(self, key: SeriesKey, ts: int, value, overrides) -> None:
        value = overrides.get(str(key), value)
        self.archive.ingest(MetricSample(key, ts, value))

    def emit(self, cycle: int, start: int) -> int:
        """Synthesize all samples for one cycle; returns the sample count."""
        overrides = self._active_overrides(cycle)
        count = 0
        for src, dst in self.pairs:
            for kind in (MetricKind.OWD, MetricKind.JITTER):
                key = SeriesKey.mesh(kind, src, dst)
                rng = self._rng(str(key))
                scale = 1.0 if kind is MetricKind.OWD else 0.05
                base = self._base(str(key), 5.0, 45.0) * scale
                med = base + rng.uniform(-0.5, 0.5) * scale
                low = med - rng.uniform(0.0, 0.3) * scale
                high = med + rng.uniform(0.0, 0.8) * scale
                triplet = {
                    "min": round(low, 4),
                    "med": round(med, 4),
                    "max": round(high, 4),
                }
                self._put(key, start, triplet, overrides)
                count += 1
            self._put(SeriesKey.mesh(MetricKind.LOSS, src, dst), start, 0.0, overrides)
            route = [src, "rtr-%s" % src.lower(), "rtr-%s" % dst.lower(), dst]
            self._put(SeriesKey.mesh(MetricKind.TRACEROUTE, src, dst), start, route, overrides)
            count += 2
        for address in self.interfaces:
            key = SeriesKey.router(MetricKind.UTILIZATION, address)
            rng = self._rng(str(key))
            base = self._base(str(key), 0.5e9, 4.0e9)
            self._put(key, start, round(base * (1 + rng.uniform(-0.2, 0.2))), overrides)
            self._put(SeriesKey.router(MetricKind.INPUT_ERRORS, address), start, 0, overrides)
            self._put(SeriesKey.router(MetricKind.OUTPUT_DROPS, address), start, 0, overrides)
            count += 3
        if start % 28800 == 0:
            for src, dst in self.bwctl_pairs:
                key = SeriesKey.mesh(MetricKind.THROUGHPUT, src, dst)
                rng = self._rng(str(key))
                base = self._base(str(key), 2.0e9, 8.5e9)
                med = base * (1 + rng.uniform(-0.05, 0.05))
                low = med * (1 - rng.uniform(0.0, 0.1))
                high = med * (1 + rng.uniform(0.0, 0.1))
                triplet = {"min": round(low), "med": round(med), "max": round(high)}
                self._put(key, start, triplet, overrides)
                count += 1
        return count


@dataclass
class CycleTrace:
    cycle_index: int
    expected: dict[str, OperationalState]
    pipeline: dict[str, OperationalState]
    events_applied: tuple[dict, ...]
    poll_errors: dict[str, str]
    alarms: tuple[AlarmEvent, ...]
    samples: int = 0

    @property
    def agrees(self) -> bool:
        return self.expected == self.pipeline


@dataclass
class ScenarioTrace:
    scenario: Scenario
    cycles: list[CycleTrace] = field(default_factory=list)
    output_dir: Path | None = None
    service: MonitorService | None = None
    archive: MetricArchive | None = None

    @property
    def all_agree(self) -> bool:
        return all(row.agrees for row in self.cycles)


def _url(domain: str) -> str:
    return "inproc://%s" % domain


def run_scenario(
    scenario: Scenario,
    cycles: int,
    output_dir: str | Path,
    archive_root: str | Path | None = None,
    with_metrics: bool = True,
    pace_seconds: float = 0.0,
) -> ScenarioTrace:
    """Drive the full stack for ``cycles`` simulated polling cycles."""
    if cycles <= 0:
        raise ScenarioInvalid("cycles must be > 0")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for stale in ("alarms.jsonl", "traps.jsonl"):
        (out / stale).unlink(missing_ok=True)
    if scenario.topology_raw is not None:
        # so an apiserver can point straight at this directory
        (out / "topology.json").write_text(
            json.dumps(scenario.topology_raw, indent=2, sort_keys=True) + "\n", "utf-8"
        )

    agents = {spec.domain: MpAgent(spec.domain) for spec in scenario.domains}
    clock = [scenario.epoch]
    transport = InProcessTransport(
        {_url(domain): agent for domain, agent in agents.items()},
        clock=lambda: clock[0],
    )
    config = MonitorConfig(
        endpoints=tuple(
            MpEndpoint(domain=spec.domain, url=_url(spec.domain)) for spec in scenario.domains
        ),
        catalog=scenario.catalog,
        period=scenario.period,
        epoch=scenario.epoch,
        output_dir=out,
        alarm_log=out / "alarms.jsonl",
        trap_log=out / "traps.jsonl",
    )
    dispatcher = AlarmDispatcher(
        notify_sinks=[JsonLinesSink("email", config.alarm_log)],
        trap_sinks=[JsonLinesSink("trap-log", config.trap_log)],
    )
    service = MonitorService(config, transport=transport, dispatcher=dispatcher)

    archive = None
    synthesizer = None
    if with_metrics and scenario.topology is not None:
        archive = MetricArchive(archive_root or out / "archive")
        synthesizer = MetricSynthesizer(scenario, archive)

    states: dict[tuple, list] = {}
    for spec in scenario.domains:
        for record in spec.records:
            states[_section_key(spec.domain, record)] = [
                record.operational,
                record.administrative,
            ]

    events_by_cycle: dict[int, list[dict]] = {}
    for event in scenario.events:
        events_by_cycle.setdefault(event["at"], []).append(event)

    trace = ScenarioTrace(scenario=scenario, output_dir=out, service=service, archive=archive)
    for cycle in range(cycles):
        start = scenario.epoch + cycle * scenario.period
        clock[0] = start

        applied = tuple(events_by_cycle.get(cycle, ()))
        for event in applied:
            kind = event["kind"]
            if kind == "set":
                spec = scenario.domain(event["domain"])
                for record in _matching_sections(spec, event):
                    cell = states[_section_key(spec.domain, record)]
                    if "operational" in event:
                        cell[0] = OperationalState(event["operational"])
                    if "administrative" in event:
                        cell[1] = AdministrativeState(event["administrative"])
            elif kind == "mp_down":
                transport.set_down(_url(event["domain"]))
            elif kind == "mp_up":
                transport.set_up(_url(event["domain"]))
            # metric events are consumed by the synthesizer

        for spec in scenario.domains:
            records = tuple(
                LocalLinkRecord(
                    e2e_link_id=record.e2e_link_id,
                    link_type=record.link_type,
                    dp_a=record.dp_a,
                    dp_b=record.dp_b,
                    operational_word=states[_section_key(spec.domain, record)][0].value,
                    administrative_word=states[_section_key(spec.domain, record)][1].value,
                )
                for record in spec.records
            )
            agents[spec.domain].apply_snapshot(
                LocalSnapshot(domain=spec.domain, generated_at=start, records=records)
            )

        samples = synthesizer.emit(cycle, start) if synthesizer else 0

        alarms_before = len(service.events)
        result: CycleResult = service.run_once(cycle)
        trace.cycles.append(
            CycleTrace(
                cycle_index=cycle,
                expected=expected_states(scenario, cycle),
                pipeline={
                    link_id: view.aggregated_operational
                    for link_id, view in result.views.items()
                },
                events_applied=applied,
                poll_errors=dict(result.poll_errors),
                alarms=tuple(service.events[alarms_before:]),
                samples=samples,
            )
        )
        if pace_seconds > 0:
            time.sleep(pace_seconds)
    return trace


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="simulate", description="Run a scripted multi-domain scenario."
    )
    parser.add_argument(
        "--scenario",
        default="lhcopn",
        help="scenario JSON file, or 'lhcopn' for the built-in fixture",
    )
    parser.add_argument("--cycles", type=int, default=24)
    parser.add_argument("--out", type=Path, default=Path("sim-out"))
    parser.add_argument("--archive", type=Path, help="metric archive root (default: OUT/archive)")
    parser.add_argument("--no-metrics", action="store_true", help="skip metric synthesis")
    parser.add_argument(
        "--accelerate",
        action="store_true",
        help="run cycles back to back instead of pacing by the acceleration factor",
    )
    parser.add_argument(
        "--dump-scenario",
        type=Path,
        help="write the chosen scenario JSON to this path and exit",
    )
    args = parser.parse_args(argv)

    if args.scenario == "lhcopn":
        from .fixtures import lhcopn_demo_events, lhcopn_scenario

        raw = lhcopn_scenario(events=lhcopn_demo_events())
        scenario = Scenario.from_json(raw)
    else:
        raw = json.loads(Path(args.scenario).read_text("utf-8"))
        scenario = Scenario.from_json(raw)

    if args.dump_scenario:
        args.dump_scenario.write_text(json.dumps(raw, indent=2, sort_keys=True) + "\n", "utf-8")
        print("scenario written to %s" % args.dump_scenario)
        return 0

    pace = 0.0 if args.accelerate else scenario.period / max(scenario.acceleration, 1e-9)
    trace = run_scenario(
        scenario,
        args.cycles,
        args.out,
        archive_root=args.archive,
        with_metrics=not args.no_metrics,
        pace_seconds=pace,
    )
    disagreements = [row.cycle_index for row in trace.cycles if not row.agrees]
    alarms = sum(len(row.alarms) for row in trace.cycles)
    samples = sum(row.samples for row in trace.cycles)
    print(
        "%s: %d cycles, %d alarms, %d samples, oracle %s"
        % (
            scenario.name,
            len(trace.cycles),
            alarms,
            samples,
            "agrees" if not disagreements else "DISAGREES at %s" % disagreements,
        )
    )
    print("outputs in %s" % args.out)
    return 0 if not disagreements else 1


if __name__ == "__main__":
    raise SystemExit(main())
