"""HTTP/JSON facade for the map UI and external consumers.

Read-only. All payloads are rendered when a cycle is published and served
from cache as opaque bytes, so request handling never touches the archive
or recomputes aggregation; a request between publications simply gets the
previous cycle's payload. Payloads never mix data from two cycles.

Endpoints:

* ``GET /api/topology``                     static abstract topology
* ``GET /api/overview``                     per-abstract-link status + color
* ``GET /api/links/{id}/metrics``           status timeline + interface counters
* ``GET /api/nodes/{id}/metrics``           per scoped link: probe mesh metrics
* ``GET /api/links/{id}/e2e``               section/fragment/gap structure
* ``GET /api/export/status.xml``            monitor exports, verbatim
* ``GET /api/export/stats-weekly.csv``
* ``GET /api/export/stats-monthly.csv``

404 body ``{"error": "UnknownElement"}`` for ids not in the topology; 503
``{"error": "NotReady"}`` before the first published cycle. When a web root
is configured, anything outside ``/api/`` is served from it as static files
so a built UI can sit next to the API.
"""

from __future__ import annotations

import argparse
import json
import mimetypes
import threading
import time
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .archive import (
    INTERFACE_METRICS,
    MESH_METRICS,
    MetricArchive,
    MetricKind,
    SeriesKey,
    Triplet,
    UnknownSeries,
)
from .model import OperationalState
from .weathermap import (
    AbstractLinkStatus,
    AbstractTopology,
    compute_abstract_status,
    selection_scope,
    status_color,
    status_hex,
)

DAY_SECONDS = 86400


def _json_bytes(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True).encode("utf-8")


def _series_array(
    archive: MetricArchive | None, key: SeriesKey, start: int, end: int
) -> list:
    """Fixed-grid value array over [start, end); missing bins are null."""
    resolution = key.resolution
    bins = (end - start) // resolution
    values: list = [None] * bins
    if archive is None:
        return values
    try:
        samples = archive.query_window(key, start, end)
    except UnknownSeries:
        return values
    for sample in samples:
        slot = (sample.timestamp - start) // resolution
        value = sample.value
        if isinstance(value, Triplet):
            value = value.to_json()
        elif isinstance(value, tuple):
            value = list(value)
        values[slot] = value
    return values


def _grid_window(cycle_start: int, resolution: int, span: int) -> tuple[int, int]:
    """A span-long window on the metric's grid ending just after cycle_start."""
    end = (cycle_start // resolution + 1) * resolution
    return end - span, end


class ApiState:
    """Published snapshot plus the pre-rendered payload cache."""

    def __init__(
        self,
        topology: AbstractTopology,
        archive: MetricArchive | None = None,
        window_seconds: int = DAY_SECONDS,
    ):
        self.topology = topology
        self.archive = archive
        self.window_seconds = window_seconds
        self._lock = threading.Lock()
        self._history: dict[int, dict[str, str]] = {}  # cycle_start -> abstract statuses
        self._cache: dict[str, tuple[str, bytes]] = {
            "topology": ("application/json", self._topology_payload())
        }
        self.cycle_index: int | None = None

    # -- payload construction ------------------------------------------------

    def _topology_payload(self) -> bytes:
        return _json_bytes(
            {
                "nodes": [
                    {"id": n.id, "tier": n.tier, "x": n.x, "y": n.y}
                    for n in self.topology.nodes
                ],
                "links": [
                    {
                        "id": l.id,
                        "endpoints": list(l.endpoints),
                        "e2e_link_ids": list(l.e2e_link_ids),
                        "ip_interfaces": list(l.ip_interfaces),
                        "protected": l.protected,
                    }
                    for l in self.topology.links
                ],
            }
        )

    def publish_cycle(
        self,
        snapshot: dict,
        status_xml: bytes = b"",
        weekly_csv: bytes = b"",
        monthly_csv: bytes = b"",
    ) -> None:
        """Render every payload for one monitor cycle and swap the cache.

        ``snapshot`` is the monitor's cycle-state JSON document: cycle
        metadata plus the full per-link views.
        """
        cycle_index = snapshot["cycle_index"]
        cycle_start = snapshot["cycle_start"]
        period = snapshot["period"]
        views = snapshot.get("links", {})
        e2e_states = {
            link_id: OperationalState(view["aggregated_operational"])
            for link_id, view in views.items()
        }

        abstract: dict[str, str] = {}
        for link in self.topology.links:
            abstract[link.id] = compute_abstract_status(link, e2e_states).value

        cache: dict[str, tuple[str, bytes]] = {
            "topology": ("application/json", self._topology_payload())
        }
        cache["overview"] = (
            "application/json",
            self._overview_payload(snapshot, abstract),
        )
        with self._lock:
            self._history[cycle_start] = abstract
            floor = cycle_start - self.window_seconds
            for old in [t for t in self._history if t <= floor]:
                del self._history[old]
            history = dict(self._history)

        for link in self.topology.links:
            cache["links/%s/metrics" % link.id] = (
                "application/json",
                self._link_metrics_payload(link.id, cycle_index, cycle_start, period, history),
            )
            cache["links/%s/e2e" % link.id] = (
                "application/json",
                self._e2e_payload(link.id, cycle_index, cycle_start, views),
            )
        for node in self.topology.nodes:
            cache["nodes/%s/metrics" % node.id] = (
                "application/json",
                self._node_metrics_payload(node.id, cycle_index, cycle_start),
            )
        if status_xml:
            cache["export/status.xml"] = ("text/xml; charset=utf-8", status_xml)
        if weekly_csv:
            cache["export/stats-weekly.csv"] = ("text/csv; charset=utf-8", weekly_csv)
        if monthly_csv:
            cache["export/stats-monthly.csv"] = ("text/csv; charset=utf-8", monthly_csv)

        with self._lock:
            self._cache = cache
            self.cycle_index = cycle_index

    def _overview_payload(self, snapshot: dict, abstract: dict[str, str]) -> bytes:
        views = snapshot.get("links", {})
        links = []
        for link in self.topology.links:
            status = abstract[link.id]
            e2e = {}
            for e2e_id in link.e2e_link_ids:
                view = views.get(e2e_id)
                if view is None:
                    e2e[e2e_id] = None
                else:
                    e2e[e2e_id] = {
                        "operational": view["aggregated_operational"],
                        "administrative": view["aggregated_administrative"],
                        "uncertain": not view["fully_reconstructed"] or view["has_unknown"],
                        "gaps": len(view["gaps"]),
                    }
            links.append(
                {
                    "id": link.id,
                    "endpoints": list(link.endpoints),
                    "status": status,
                    "color": status_color_by_name(status),
                    "hex": status_hex_by_name(status),
                    "protected": link.protected,
                    "e2e": e2e,
                }
            )
        return _json_bytes(
            {
                "cycle_index": snapshot["cycle_index"],
                "cycle_start": snapshot["cycle_start"],
                "period": snapshot["period"],
                "poll_errors": snapshot.get("poll_errors", {}),
                "nodes": [
                    {"id": n.id, "tier": n.tier, "x": n.x, "y": n.y}
                    for n in self.topology.nodes
                ],
                "links": links,
            }
        )

    def _link_metrics_payload(
        self,
        link_id: str,
        cycle_index: int,
        cycle_start: int,
        period: int,
        history: dict[int, dict[str, str]],
    ) -> bytes:
        link = self.topology.link(link_id)
        start, end = _grid_window(cycle_start, period, self.window_seconds)
        timestamps = list(range(start, end, period))
        statuses = [history.get(t, {}).get(link_id) for t in timestamps]
        interfaces = {}
        for address in link.ip_interfaces:
            interfaces[address] = {
                kind.value: _series_array(
                    self.archive,
                    SeriesKey.router(kind, address),
                    *_grid_window(cycle_start, 300, self.window_seconds),
                )
                for kind in sorted(INTERFACE_METRICS, key=lambda k: k.value)
            }
        return _json_bytes(
            {
                "link_id": link_id,
                "cycle_index": cycle_index,
                "window": {"start": start, "end": end, "step": period},
                "status_timeline": {"timestamps": timestamps, "statuses": statuses},
                "interfaces": interfaces,
            }
        )

    def _node_metrics_payload(self, node_id: str, cycle_index: int, cycle_start: int) -> bytes:
        scoped = selection_scope(node_id, self.topology)
        start300, end300 = _grid_window(cycle_start, 300, self.window_seconds)
        start_bw, end_bw = _grid_window(cycle_start, 28800, self.window_seconds)
        bundles = []
        for link in scoped:
            a, b = link.endpoints
            directions = []
            for src, dst in ((a, b), (b, a)):
                series = {
                    kind.value: _series_array(
                        self.archive,
                        SeriesKey.mesh(kind, src, dst),
                        start_bw if kind is MetricKind.THROUGHPUT else start300,
                        end_bw if kind is MetricKind.THROUGHPUT else end300,
                    )
                    for kind in sorted(MESH_METRICS, key=lambda k: k.value)
                    if kind is not MetricKind.TRACEROUTE
                }
                segments: list[dict] = []
                if self.archive is not None:
                    key = SeriesKey.mesh(MetricKind.TRACEROUTE, src, dst)
                    if self.archive.has_series(key):
                        segments = [
                            {
                                "start": seg_start,
                                "end": seg_end,
                                "hop_count": hops,
                                "route": signature.split("|"),
                            }
                            for signature, seg_start, seg_end, hops in
                            self.archive.hop_count_segments(key, start300, end300)
                        ]
                directions.append(
                    {"src": src, "dst": dst, "series": series, "hop_segments": segments}
                )
            bundles.append(
                {
                    "link_id": link.id,
                    "endpoints": list(link.endpoints),
                    "directions": directions,
                }
            )
        return _json_bytes(
            {
                "node_id": node_id,
                "cycle_index": cycle_index,
                "window": {"start": start300, "end": end300, "step": 300},
                "throughput_window": {"start": start_bw, "end": end_bw, "step": 28800},
                "bundles": bundles,
            }
        )

    def _e2e_payload(
        self, link_id: str, cycle_index: int, cycle_start: int, views: dict
    ) -> bytes:
        link = self.topology.link(link_id)
        entries = []
        for e2e_id in link.e2e_link_ids:
            view = views.get(e2e_id)
            entries.append(
                {"e2e_link_id": e2e_id, "present": view is not None, "view": view}
            )
        return _json_bytes(
            {
                "link_id": link_id,
                "cycle_index": cycle_index,
                "cycle_start": cycle_start,
                "e2e": entries,
            }
        )

    # -- request-side lookup ---------------------------------------------------

    def lookup(self, key: str) -> tuple[int, str, bytes]:
        """Resolve one cache key to (HTTP status, content type, payload)."""
        with self._lock:
            cached = self._cache.get(key)
            ready = self.cycle_index is not None
        if cached is not None:
            return 200, cached[0], cached[1]
        if not ready:
            return 503, "application/json", _json_bytes({"error": "NotReady"})
        return 404, "application/json", _json_bytes({"error": "UnknownElement"})


def status_color_by_name(status: str) -> str:
    return status_color(AbstractLinkStatus(status))


def status_hex_by_name(status: str) -> str:
    return status_hex(AbstractLinkStatus(status))


def publish_from_dir(state: ApiState, output_dir: str | Path) -> bool:
    """Publish the latest monitor outputs found in ``output_dir``.

    Returns False when no cycle-state file exists yet.
    """
    out = Path(output_dir)
    state_path = out / "cycle-state.json"
    if not state_path.exists():
        return False
    snapshot = json.loads(state_path.read_text("utf-8"))

    def _maybe(name: str) -> bytes:
        path = out / name
        return path.read_bytes() if path.exists() else b""

    state.publish_cycle(
        snapshot,
        status_xml=_maybe("status.xml"),
        weekly_csv=_maybe("stats-weekly.csv"),
        monthly_csv=_maybe("stats-monthly.csv"),
    )
    return True


class _ApiHandler(BaseHTTPRequestHandler):
    server_version = "opnmon-api/0.1"

    def log_message(self, *args) -> None:
        pass

    def do_GET(self) -> None:
        path = urllib.parse.unquote(urllib.parse.urlsplit(self.path).path)
        if path.startswith("/api/"):
            status, content_type, body = self.server.state.lookup(path[len("/api/"):])
            self._respond(status, content_type, body)
            return
        self._serve_static(path)

    def _serve_static(self, path: str) -> None:
        root: Path | None = self.server.web_root
        if root is None:
            self._respond(404, "text/plain", b"not found")
            return
        if path.endswith("/"):
            path += "index.html"
        candidate = (root / path.lstrip("/")).resolve()
        try:
            candidate.relative_to(root.resolve())
        except ValueError:
            self._respond(404, "text/plain", b"not found")
            return
        if not candidate.is_file():
            self._respond(404, "text/plain", b"not found")
            return
        content_type = mimetypes.guess_type(candidate.name)[0] or "application/octet-stream"
        self._respond(200, content_type, candidate.read_bytes())

    def _respond(self, status: int, content_type: str, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)


class ApiServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(
        self, address: tuple[str, int], state: ApiState, web_root: Path | None = None
    ):
        super().__init__(address, _ApiHandler)
        self.state = state
        self.web_root = web_root


def serve_api(
    state: ApiState,
    host: str = "127.0.0.1",
    port: int = 0,
    web_root: Path | None = None,
) -> ApiServer:
    server = ApiServer((host, port), state, web_root=web_root)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server


def _watch_output(state: ApiState, output_dir: Path, interval: float) -> None:
    last_index: int | None = None
    while True:
        try:
            snapshot_path = output_dir / "cycle-state.json"
            if snapshot_path.exists():
                index = json.loads(snapshot_path.read_text("utf-8")).get("cycle_index")
                if index != last_index:
                    publish_from_dir(state, output_dir)
                    last_index = index
        except (OSError, ValueError):
            pass  # partially written file; retry next tick
        time.sleep(interval)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="apiserver", description="Serve the JSON API over monitor outputs."
    )
    parser.add_argument("--config", required=True, type=Path)
    parser.add_argument("--listen", default="127.0.0.1:8180", help="host:port")
    args = parser.parse_args(argv)

    config = json.loads(args.config.read_text("utf-8"))
    base = args.config.parent

    def _path(value) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    from .weathermap import load_topology

    topology = load_topology(_path(config["topology"]).read_bytes())
    archive = None
    if config.get("archive_root"):
        archive = MetricArchive(_path(config["archive_root"]))
    state = ApiState(topology, archive)

    output_dir = _path(config.get("monitor_output", "out"))
    publish_from_dir(state, output_dir)
    watcher = threading.Thread(
        target=_watch_output,
        args=(state, output_dir, float(config.get("poll_seconds", 2.0))),
        daemon=True,
    )
    watcher.start()

    host, _, port = args.listen.rpartition(":")
    server = ApiServer((host or "127.0.0.1", int(port)), state, web_root=_path(config.get("web_root")))
    print("apiserver listening on %s:%d" % server.server_address[:2])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
