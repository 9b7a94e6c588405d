"""Measurement archive for layer-3-and-up metrics.

Holds timestamped samples per series: active-probe one-way delay, jitter,
loss and traceroute between site nodes (directed, full mesh), scheduled
throughput tests, and router interface counters (utilization, input errors,
output drops). Samples land on a fixed per-metric time grid; re-ingest at
the same bin overwrites (last writer wins); queries read back exactly what
was written, gaps included.

Persistence is one append-friendly JSON-lines file per series under a root
directory plus an in-memory index rebuilt on open. No database engine is
involved; durability across restarts is the whole requirement at this
scale.

A small HTTP listener accepts samples via PUT so feeds can stay out of
process; queries are served by the API facade, not here.
"""

from __future__ import annotations

import enum
import json
import threading
import urllib.parse
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Iterable


class MetricKind(enum.Enum):
    OWD = "owd"
    JITTER = "jitter"
    LOSS = "loss"
    TRACEROUTE = "traceroute"
    THROUGHPUT = "throughput"
    UTILIZATION = "utilization"
    INPUT_ERRORS = "input_errors"
    OUTPUT_DROPS = "output_drops"

    def __str__(self) -> str:
        return self.value


# Metrics measured between two nodes, keyed by direction.
MESH_METRICS = frozenset(
    {MetricKind.OWD, MetricKind.JITTER, MetricKind.LOSS, MetricKind.TRACEROUTE, MetricKind.THROUGHPUT}
)
# Metrics measured per router interface.
INTERFACE_METRICS = frozenset(
    {MetricKind.UTILIZATION, MetricKind.INPUT_ERRORS, MetricKind.OUTPUT_DROPS}
)
TRIPLET_METRICS = frozenset({MetricKind.OWD, MetricKind.JITTER, MetricKind.THROUGHPUT})

# Seconds per bin. Throughput tests run on an eight-hour schedule; everything
# else is on the five-minute grid.
RESOLUTION = {kind: 300 for kind in MetricKind}
RESOLUTION[MetricKind.THROUGHPUT] = 28800

# Probe family per mesh metric, used in the series-key string form.
_FAMILY = {
    MetricKind.OWD: "hades",
    MetricKind.JITTER: "hades",
    MetricKind.LOSS: "hades",
    MetricKind.TRACEROUTE: "hades",
    MetricKind.THROUGHPUT: "bwctl",
}


class ArchiveError(Exception):
    pass


class InvalidSample(ArchiveError):
    pass


class UnknownSeries(ArchiveError):
    pass


@dataclass(frozen=True, slots=True)
class Triplet:
    """Minimum / median / maximum of one measurement interval."""

    minimum: float
    median: float
    maximum: float

    def __post_init__(self) -> None:
        if not self.minimum <= self.median <= self.maximum:
            raise ValueError(
                "triplet out of order: %r/%r/%r" % (self.minimum, self.median, self.maximum)
            )

    def to_json(self) -> dict:
        return {"min": self.minimum, "med": self.median, "max": self.maximum}

    @classmethod
    def from_json(cls, data: dict) -> "Triplet":
        return cls(minimum=data["min"], median=data["med"], maximum=data["max"])


@dataclass(frozen=True, slots=True)
class SeriesKey:
    """Identity of one metric series.

    Mesh metrics carry src and dst node ids (series are directed; the
    reverse direction is a different series). Interface metrics carry the
    interface id instead.
    """

    metric: MetricKind
    src: str | None = None
    dst: str | None = None
    interface: str | None = None

    def __post_init__(self) -> None:
        if self.metric in MESH_METRICS:
            if not self.src or not self.dst or self.interface is not None:
                raise ValueError("mesh metric %s needs src and dst only" % self.metric)
            if self.src == self.dst:
                raise ValueError("src and dst must differ for %s" % self.metric)
        else:
            if not self.interface or self.src is not None or self.dst is not None:
                raise ValueError("interface metric %s needs an interface id" % self.metric)

    @classmethod
    def mesh(cls, metric: MetricKind, src: str, dst: str) -> "SeriesKey":
        return cls(metric=metric, src=src, dst=dst)

    @classmethod
    def router(cls, metric: MetricKind, interface: str) -> "SeriesKey":
        return cls(metric=metric, interface=interface)

    @property
    def resolution(self) -> int:
        return RESOLUTION[self.metric]

    def __str__(self) -> str:
        quote = lambda part: urllib.parse.quote(part, safe="")
        if self.metric in MESH_METRICS:
            return "%s/%s/%s/%s" % (
                _FAMILY[self.metric],
                self.metric.value,
                quote(self.src),
                quote(self.dst),
            )
        return "router/%s/%s" % (self.metric.value, quote(self.interface))


def parse_series_key(text: str) -> SeriesKey:
    parts = text.split("/")
    try:
        if parts[0] in ("hades", "bwctl") and len(parts) == 4:
            metric = MetricKind(parts[1])
            if _FAMILY.get(metric) != parts[0]:
                raise ValueError(parts[0])
            return SeriesKey.mesh(
                metric,
                urllib.parse.unquote(parts[2]),
                urllib.parse.unquote(parts[3]),
            )
        if parts[0] == "router" and len(parts) == 3:
            return SeriesKey.router(MetricKind(parts[1]), urllib.parse.unquote(parts[2]))
    except ValueError as exc:
        raise InvalidSample("bad series key %r: %s" % (text, exc)) from None
    raise InvalidSample("bad series key %r" % text)


@dataclass(frozen=True, slots=True)
class MetricSample:
    key: SeriesKey
    timestamp: int
    value: object  # Triplet | float | int | tuple[str, ...], per metric kind


def validate_value(key: SeriesKey, value: object) -> object:
    """Check and normalize one sample value for its metric kind."""
    metric = key.metric
    if metric in TRIPLET_METRICS:
        if isinstance(value, dict):
            value = Triplet.from_json(value)
        if not isinstance(value, Triplet):
            raise InvalidSample("%s expects a min/med/max triplet" % metric)
        return value
    if metric is MetricKind.LOSS:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise InvalidSample("loss expects a number")
        if not 0.0 <= value <= 1.0:
            raise InvalidSample("loss fraction %r outside [0, 1]" % value)
        return float(value)
    if metric is MetricKind.TRACEROUTE:
        if not isinstance(value, (list, tuple)) or not all(isinstance(h, str) for h in value):
            raise InvalidSample("traceroute expects a hop list of strings")
        if not value:
            raise InvalidSample("traceroute hop list must be non-empty")
        return tuple(value)
    if metric is MetricKind.UTILIZATION:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise InvalidSample("utilization expects a number")
        if value < 0:
            raise InvalidSample("utilization must be >= 0")
        return float(value)
    # error / drop counters
    if not isinstance(value, int) or isinstance(value, bool):
        raise InvalidSample("%s expects an integer count" % metric)
    if value < 0:
        raise InvalidSample("%s must be >= 0" % metric)
    return value


def _value_to_json(value: object) -> object:
    if isinstance(value, Triplet):
        return value.to_json()
    if isinstance(value, tuple):
        return list(value)
    return value


def _value_from_json(key: SeriesKey, raw: object) -> object:
    if key.metric in TRIPLET_METRICS:
        return Triplet.from_json(raw)
    if key.metric is MetricKind.TRACEROUTE:
        return tuple(raw)
    return raw


class MetricArchive:
    """Disk-backed store of metric series with last-writer-wins bins."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._series: dict[SeriesKey, dict[int, object]] = {}
        self._lock = threading.Lock()
        self._load()

    def _series_path(self, key: SeriesKey) -> Path:
        return self.root / (urllib.parse.quote(str(key), safe="") + ".jsonl")

    def _load(self) -> None:
        for path in sorted(self.root.glob("*.jsonl")):
            key = parse_series_key(urllib.parse.unquote(path.stem))
            bins: dict[int, object] = {}
            with path.open("r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    bins[record["ts"]] = _value_from_json(key, record["v"])
            self._series[key] = bins

    def ingest(self, sample: MetricSample) -> None:
        """Validate, grid-align and store one sample."""
        value = validate_value(sample.key, sample.value)
        if sample.timestamp < 0:
            raise InvalidSample("timestamp must be >= 0")
        ts = sample.timestamp - (sample.timestamp % sample.key.resolution)
        record = json.dumps({"ts": ts, "v": _value_to_json(value)}, sort_keys=True)
        with self._lock:
            bins = self._series.setdefault(sample.key, {})
            bins[ts] = value
            with self._series_path(sample.key).open("a", encoding="utf-8") as handle:
                handle.write(record + "\n")

    def series_keys(self) -> list[SeriesKey]:
        with self._lock:
            return sorted(self._series, key=str)

    def has_series(self, key: SeriesKey) -> bool:
        with self._lock:
            return key in self._series

    def query_window(self, key: SeriesKey, start: int, end: int) -> list[MetricSample]:
        """Samples with start <= timestamp < end, ascending; gaps preserved."""
        if start >= end:
            raise ValueError("empty window: %r >= %r" % (start, end))
        with self._lock:
            bins = self._series.get(key)
            if bins is None:
                raise UnknownSeries(str(key))
            items = sorted((ts, v) for ts, v in bins.items() if start <= ts < end)
        return [MetricSample(key, ts, value) for ts, value in items]

    def hop_count_segments(
        self, key: SeriesKey, start: int, end: int
    ) -> list[tuple[str, int, int, int]]:
        """Maximal runs of an unchanged route in a traceroute series.

        Returns (route signature, first bin, past-the-end bin, hop count)
        per run; the segment count is the number of route changes plus one.
        """
        if key.metric is not MetricKind.TRACEROUTE:
            raise UnknownSeries("%s is not a traceroute series" % key)
        samples = self.query_window(key, start, end)
        segments: list[tuple[str, int, int, int]] = []
        resolution = key.resolution
        for sample in samples:
            hops = sample.value
            signature = "|".join(hops)
            if segments and segments[-1][0] == signature:
                previous = segments[-1]
                segments[-1] = (signature, previous[1], sample.timestamp + resolution, previous[3])
            else:
                segments.append(
                    (signature, sample.timestamp, sample.timestamp + resolution, len(hops))
                )
        return segments


def ingest_payload(archive: MetricArchive, series_text: str, payload: bytes) -> None:
    """Apply one HTTP ingestion body: {"timestamp": ..., "value": ...}."""
    key = parse_series_key(series_text)
    try:
        body = json.loads(payload.decode("utf-8"))
        timestamp = body["timestamp"]
        value = body["value"]
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise InvalidSample("bad sample payload: %s" % exc) from None
    if not isinstance(timestamp, int) or isinstance(timestamp, bool):
        raise InvalidSample("timestamp must be an integer")
    if isinstance(value, list):
        value = [str(h) for h in value] if key.metric is MetricKind.TRACEROUTE else value
    archive.ingest(MetricSample(key, timestamp, value))


class _ArchiveHandler(BaseHTTPRequestHandler):
    server_version = "opnmon-archive/0.1"

    def log_message(self, *args) -> None:  # quiet by default
        pass

    def do_PUT(self) -> None:
        prefix = "/archive/"
        if not self.path.startswith(prefix):
            self._respond(404, {"error": "not found"})
            return
        series_text = urllib.parse.unquote(self.path[len(prefix):])
        length = int(self.headers.get("Content-Length", "0"))
        payload = self.rfile.read(length)
        try:
            ingest_payload(self.server.archive, series_text, payload)
        except InvalidSample as exc:
            self._respond(400, {"error": str(exc)})
            return
        self._respond(204, None)

    def _respond(self, status: int, body: dict | None) -> None:
        data = b"" if body is None else json.dumps(body).encode("utf-8")
        self.send_response(status)
        if data:
            self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        if data:
            self.wfile.write(data)


class ArchiveServer(ThreadingHTTPServer):
    """HTTP ingestion endpoint: PUT /archive/{series key}."""

    daemon_threads = True

    def __init__(self, address: tuple[str, int], archive: MetricArchive):
        super().__init__(address, _ArchiveHandler)
        self.archive = archive


def serve_archive(archive: MetricArchive, host: str = "127.0.0.1", port: int = 0) -> ArchiveServer:
    """Start the ingestion listener on a background thread."""
    server = ArchiveServer((host, port), archive)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server
