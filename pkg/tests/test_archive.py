"""Metric archive tests: keys, validation, binning, persistence, HTTP."""

import itertools
import json
import urllib.error
import urllib.request

import pytest

from opnmon.archive import (
    INTERFACE_METRICS,
    MESH_METRICS,
    RESOLUTION,
    InvalidSample,
    MetricArchive,
    MetricKind,
    MetricSample,
    SeriesKey,
    Triplet,
    UnknownSeries,
    ingest_payload,
    parse_series_key,
    serve_archive,
    validate_value,
)

EPOCH = 1275868800


def owd_key(src="CERN", dst="DE-KIT"):
    return SeriesKey.mesh(MetricKind.OWD, src, dst)


def triplet(base=10.0):
    return Triplet(base, base + 1.0, base + 2.5)


class TestSeriesKey:
    def test_mesh_key_requires_two_distinct_nodes(self):
        with pytest.raises(ValueError):
            SeriesKey.mesh(MetricKind.OWD, "CERN", "CERN")
        with pytest.raises(ValueError):
            SeriesKey.mesh(MetricKind.OWD, "", "DE-KIT")
        with pytest.raises(ValueError):
            SeriesKey(metric=MetricKind.OWD, src="A", dst="B", interface="x")

    def test_interface_key_takes_interface_only(self):
        with pytest.raises(ValueError):
            SeriesKey(metric=MetricKind.UTILIZATION, src="A", interface="x")
        with pytest.raises(ValueError):
            SeriesKey.router(MetricKind.UTILIZATION, "")
        key = SeriesKey.router(MetricKind.UTILIZATION, "192.0.2.1")
        assert key.interface == "192.0.2.1"

    def test_string_forms(self):
        assert str(owd_key()) == "hades/owd/CERN/DE-KIT"
        assert (
            str(SeriesKey.mesh(MetricKind.THROUGHPUT, "CERN", "US-BNL"))
            == "bwctl/throughput/CERN/US-BNL"
        )
        assert (
            str(SeriesKey.router(MetricKind.INPUT_ERRORS, "192.0.2.9"))
            == "router/input_errors/192.0.2.9"
        )

    def test_hostile_node_names_survive_key_round_trip(self):
        key = SeriesKey.mesh(MetricKind.LOSS, "a/b c", "x%y")
        text = str(key)
        assert "/".join(text.split("/")[:2]) == "hades/loss"
        assert parse_series_key(text) == key

    def test_parse_round_trip_for_every_metric(self):
        keys = [SeriesKey.mesh(m, "SRC", "DST") for m in MESH_METRICS]
        keys += [SeriesKey.router(m, "192.0.2.1") for m in INTERFACE_METRICS]
        for key in keys:
            assert parse_series_key(str(key)) == key

    def test_parse_rejects_wrong_family(self):
        with pytest.raises(InvalidSample):
            parse_series_key("hades/throughput/A/B")
        with pytest.raises(InvalidSample):
            parse_series_key("bwctl/owd/A/B")

    def test_parse_rejects_malformed_text(self):
        for text in ("", "nothing", "hades/owd/onlysrc", "router/owd/x", "hades/owd/a/b/c"):
            with pytest.raises(InvalidSample):
                parse_series_key(text)

    def test_resolution_is_five_minutes_except_throughput(self):
        for metric in MetricKind:
            expected = 28800 if metric is MetricKind.THROUGHPUT else 300
            assert RESOLUTION[metric] == expected
        assert owd_key().resolution == 300
        assert SeriesKey.mesh(MetricKind.THROUGHPUT, "A", "B").resolution == 28800


class TestTriplet:
    def test_order_enforced(self):
        with pytest.raises(ValueError):
            Triplet(2.0, 1.0, 3.0)
        with pytest.raises(ValueError):
            Triplet(1.0, 3.0, 2.0)

    def test_degenerate_triplet_allowed(self):
        Triplet(1.0, 1.0, 1.0)

    def test_json_round_trip(self):
        t = triplet()
        assert Triplet.from_json(t.to_json()) == t
        assert t.to_json() == {"min": 10.0, "med": 11.0, "max": 12.5}


class TestValidateValue:
    def test_triplet_metrics_accept_triplet_and_dict(self):
        for metric in (MetricKind.OWD, MetricKind.JITTER):
            key = SeriesKey.mesh(metric, "A", "B")
            assert validate_value(key, triplet()) == triplet()
            assert validate_value(key, {"min": 1, "med": 2, "max": 3}) == Triplet(1, 2, 3)
            with pytest.raises(InvalidSample):
                validate_value(key, 4.2)

    def test_loss_bounds(self):
        key = SeriesKey.mesh(MetricKind.LOSS, "A", "B")
        assert validate_value(key, 0) == 0.0
        assert validate_value(key, 1) == 1.0
        assert validate_value(key, 0.005) == 0.005
        for bad in (-0.01, 1.01, "a lot", True):
            with pytest.raises(InvalidSample):
                validate_value(key, bad)

    def test_traceroute_hops(self):
        key = SeriesKey.mesh(MetricKind.TRACEROUTE, "A", "B")
        assert validate_value(key, ["A", "r1", "B"]) == ("A", "r1", "B")
        for bad in ([], ["A", 7], "A,B"):
            with pytest.raises(InvalidSample):
                validate_value(key, bad)

    def test_utilization_non_negative_number(self):
        key = SeriesKey.router(MetricKind.UTILIZATION, "if0")
        assert validate_value(key, 10) == 10.0
        assert validate_value(key, 0.0) == 0.0
        for bad in (-1, True, "fast"):
            with pytest.raises(InvalidSample):
                validate_value(key, bad)

    def test_counters_are_non_negative_integers(self):
        for metric in (MetricKind.INPUT_ERRORS, MetricKind.OUTPUT_DROPS):
            key = SeriesKey.router(metric, "if0")
            assert validate_value(key, 0) == 0
            assert validate_value(key, 17) == 17
            for bad in (-1, 1.5, True):
                with pytest.raises(InvalidSample):
                    validate_value(key, bad)


class TestMetricArchive:
    def test_samples_land_on_the_grid(self, tmp_path):
        archive = MetricArchive(tmp_path)
        archive.ingest(MetricSample(owd_key(), EPOCH + 299, triplet()))
        (sample,) = archive.query_window(owd_key(), EPOCH, EPOCH + 300)
        assert sample.timestamp == EPOCH
        assert sample.value == triplet()

    def test_throughput_uses_eight_hour_grid(self, tmp_path):
        archive = MetricArchive(tmp_path)
        key = SeriesKey.mesh(MetricKind.THROUGHPUT, "CERN", "US-BNL")
        archive.ingest(MetricSample(key, EPOCH + 30000, triplet(4e9)))
        (sample,) = archive.query_window(key, EPOCH, EPOCH + 86400)
        assert sample.timestamp == EPOCH + 28800

    def test_last_writer_wins_within_a_bin(self, tmp_path):
        archive = MetricArchive(tmp_path)
        key = SeriesKey.router(MetricKind.UTILIZATION, "if0")
        archive.ingest(MetricSample(key, EPOCH + 10, 100.0))
        archive.ingest(MetricSample(key, EPOCH + 200, 900.0))
        (sample,) = archive.query_window(key, EPOCH, EPOCH + 300)
        assert sample.value == 900.0

    def test_negative_timestamp_rejected(self, tmp_path):
        archive = MetricArchive(tmp_path)
        with pytest.raises(InvalidSample):
            archive.ingest(MetricSample(owd_key(), -1, triplet()))

    def test_window_is_half_open_and_ascending(self, tmp_path):
        archive = MetricArchive(tmp_path)
        key = SeriesKey.router(MetricKind.INPUT_ERRORS, "if0")
        for i in (2, 0, 1, 3):
            archive.ingest(MetricSample(key, EPOCH + i * 300, i))
        window = archive.query_window(key, EPOCH + 300, EPOCH + 900)
        assert [s.timestamp for s in window] == [EPOCH + 300, EPOCH + 600]
        assert [s.value for s in window] == [1, 2]

    def test_empty_window_rejected(self, tmp_path):
        archive = MetricArchive(tmp_path)
        archive.ingest(MetricSample(owd_key(), EPOCH, triplet()))
        with pytest.raises(ValueError):
            archive.query_window(owd_key(), EPOCH, EPOCH)

    def test_unknown_series_rejected(self, tmp_path):
        archive = MetricArchive(tmp_path)
        with pytest.raises(UnknownSeries):
            archive.query_window(owd_key(), EPOCH, EPOCH + 300)

    def test_gaps_are_preserved_not_interpolated(self, tmp_path):
        archive = MetricArchive(tmp_path)
        key = SeriesKey.router(MetricKind.OUTPUT_DROPS, "if0")
        archive.ingest(MetricSample(key, EPOCH, 1))
        archive.ingest(MetricSample(key, EPOCH + 900, 2))
        window = archive.query_window(key, EPOCH, EPOCH + 1200)
        assert [s.timestamp for s in window] == [EPOCH, EPOCH + 900]

    def test_restart_replays_every_series(self, tmp_path):
        first = MetricArchive(tmp_path)
        trace_key = SeriesKey.mesh(MetricKind.TRACEROUTE, "CERN", "NDGF")
        first.ingest(MetricSample(owd_key(), EPOCH, triplet()))
        first.ingest(MetricSample(owd_key(), EPOCH + 300, triplet(20.0)))
        first.ingest(MetricSample(trace_key, EPOCH, ("CERN", "r1", "NDGF")))
        reopened = MetricArchive(tmp_path)
        assert reopened.series_keys() == first.series_keys()
        replayed = reopened.query_window(owd_key(), EPOCH, EPOCH + 600)
        assert [s.value for s in replayed] == [triplet(), triplet(20.0)]
        (trace,) = reopened.query_window(trace_key, EPOCH, EPOCH + 300)
        assert trace.value == ("CERN", "r1", "NDGF")

    def test_restart_keeps_last_writer_semantics(self, tmp_path):
        first = MetricArchive(tmp_path)
        key = SeriesKey.router(MetricKind.UTILIZATION, "if0")
        first.ingest(MetricSample(key, EPOCH, 1.0))
        first.ingest(MetricSample(key, EPOCH, 2.0))
        reopened = MetricArchive(tmp_path)
        (sample,) = reopened.query_window(key, EPOCH, EPOCH + 300)
        assert sample.value == 2.0

    def test_full_day_of_five_minute_bins_is_288_points(self, tmp_path):
        archive = MetricArchive(tmp_path)
        for i in range(288):
            archive.ingest(MetricSample(owd_key(), EPOCH + i * 300, triplet(float(i))))
        window = archive.query_window(owd_key(), EPOCH, EPOCH + 86400)
        assert len(window) == 288

    def test_directed_mesh_over_four_nodes_is_twelve_series(self, tmp_path):
        archive = MetricArchive(tmp_path)
        nodes = ("CERN", "DE-KIT", "NDGF", "US-BNL")
        for src, dst in itertools.permutations(nodes, 2):
            archive.ingest(
                MetricSample(SeriesKey.mesh(MetricKind.OWD, src, dst), EPOCH, triplet())
            )
        assert len(archive.series_keys()) == 12
        assert archive.has_series(owd_key())
        assert archive.has_series(owd_key("DE-KIT", "CERN"))


class TestHopCountSegments:
    def test_stable_route_is_one_segment(self, tmp_path):
        archive = MetricArchive(tmp_path)
        key = SeriesKey.mesh(MetricKind.TRACEROUTE, "A", "B")
        route = ("A", "r1", "B")
        for i in range(3):
            archive.ingest(MetricSample(key, EPOCH + i * 300, route))
        segments = archive.hop_count_segments(key, EPOCH, EPOCH + 900)
        assert segments == [("A|r1|B", EPOCH, EPOCH + 900, 3)]

    def test_route_change_starts_a_new_segment(self, tmp_path):
        archive = MetricArchive(tmp_path)
        key = SeriesKey.mesh(MetricKind.TRACEROUTE, "A", "B")
        archive.ingest(MetricSample(key, EPOCH, ("A", "r1", "B")))
        archive.ingest(MetricSample(key, EPOCH + 300, ("A", "r1", "B")))
        archive.ingest(MetricSample(key, EPOCH + 600, ("A", "r2", "r3", "B")))
        segments = archive.hop_count_segments(key, EPOCH, EPOCH + 900)
        assert len(segments) == 2
        assert segments[0] == ("A|r1|B", EPOCH, EPOCH + 600, 3)
        assert segments[1] == ("A|r2|r3|B", EPOCH + 600, EPOCH + 900, 4)

    def test_only_traceroute_series_qualify(self, tmp_path):
        archive = MetricArchive(tmp_path)
        with pytest.raises(UnknownSeries):
            archive.hop_count_segments(owd_key(), EPOCH, EPOCH + 300)


class TestIngestPayload:
    def test_round_trip_through_payload(self, tmp_path):
        archive = MetricArchive(tmp_path)
        body = json.dumps(
            {"timestamp": EPOCH + 7, "value": {"min": 1, "med": 2, "max": 3}}
        ).encode()
        ingest_payload(archive, "hades/owd/CERN/DE-KIT", body)
        (sample,) = archive.query_window(owd_key(), EPOCH, EPOCH + 300)
        assert sample.value == Triplet(1, 2, 3)

    def test_traceroute_hops_coerced_to_strings(self, tmp_path):
        archive = MetricArchive(tmp_path)
        body = json.dumps({"timestamp": EPOCH, "value": ["A", "r1", "B"]}).encode()
        ingest_payload(archive, "hades/traceroute/A/B", body)
        key = SeriesKey.mesh(MetricKind.TRACEROUTE, "A", "B")
        (sample,) = archive.query_window(key, EPOCH, EPOCH + 300)
        assert sample.value == ("A", "r1", "B")

    def test_bad_payloads_rejected(self, tmp_path):
        archive = MetricArchive(tmp_path)
        for body in (
            b"not json",
            b"{}",
            json.dumps({"timestamp": True, "value": 0.1}).encode(),
            json.dumps({"timestamp": EPOCH, "value": 7.0}).encode(),
        ):
            with pytest.raises(InvalidSample):
                ingest_payload(archive, "hades/loss/A/B", body)


class TestArchiveServer:
    @pytest.fixture()
    def server(self, tmp_path):
        archive = MetricArchive(tmp_path)
        server = serve_archive(archive)
        yield server, archive
        server.shutdown()
        server.server_close()

    def _put(self, server, path, body):
        host, port = server.server_address[:2]
        request = urllib.request.Request(
            "http://%s:%d%s" % (host, port, path), data=body, method="PUT"
        )
        return urllib.request.urlopen(request, timeout=5)

    def test_put_sample_lands_in_archive(self, server):
        server, archive = server
        body = json.dumps({"timestamp": EPOCH + 42, "value": 0.25}).encode()
        reply = self._put(server, "/archive/hades/loss/CERN/NDGF", body)
        assert reply.status == 204
        key = SeriesKey.mesh(MetricKind.LOSS, "CERN", "NDGF")
        (sample,) = archive.query_window(key, EPOCH, EPOCH + 300)
        assert sample.value == 0.25

    def test_put_invalid_sample_is_400(self, server):
        server, _ = server
        body = json.dumps({"timestamp": EPOCH, "value": 3.5}).encode()
        with pytest.raises(urllib.error.HTTPError) as err:
            self._put(server, "/archive/hades/loss/CERN/NDGF", body)
        assert err.value.code == 400

    def test_unknown_path_is_404(self, server):
        server, _ = server
        with pytest.raises(urllib.error.HTTPError) as err:
            self._put(server, "/metrics/loss", b"{}")
        assert err.value.code == 404
