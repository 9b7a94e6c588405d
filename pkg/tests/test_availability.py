"""Bucket classification, statistics windows, and the CSV export."""

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from opnmon.assembly import E2ELinkView, stitch
from opnmon.availability import (
    CSV_HEADER,
    AvailabilityLedger,
    LedgerBook,
    PeriodBucket,
    WindowKind,
    classify_period,
    export_stats_csv,
    window_start,
)
from opnmon.model import AdministrativeState, OperationalState

from .helpers import make_chain, make_report

# Frozen calendar oracle, worked out by hand from the 1970 epoch:
# 2010-06-07 00:00 UTC was a Monday.
MONDAY_JUN_7 = 1275868800
MONDAY_MAY_31 = MONDAY_JUN_7 - 7 * 86400
MONDAY_JUN_28 = MONDAY_JUN_7 + 21 * 86400
JUN_1 = 1275350400
JUL_1 = 1277942400
MONDAY_DEC_28_2009 = 1261958400


def make_view(
    operational=OperationalState.UP,
    administrative=AdministrativeState.NORMAL_OPERATION,
    fully=True,
    has_unknown=False,
):
    return E2ELinkView(
        e2e_link_id="L-1",
        fragments=(),
        gaps=(),
        aggregated_operational=operational,
        aggregated_administrative=administrative,
        has_unknown=has_unknown,
        fully_reconstructed=fully,
    )


class TestClassifyPeriod:
    def test_certain_up(self):
        assert classify_period(make_view()) is PeriodBucket.CERTAIN_UP

    def test_aggregated_unknown_always_books_unknown(self):
        view = make_view(OperationalState.UNKNOWN, fully=True, has_unknown=True)
        assert classify_period(view) is PeriodBucket.UNKNOWN

    def test_incomplete_up_is_uncertain_not_up(self):
        view = make_view(OperationalState.UP, fully=False)
        assert classify_period(view) is PeriodBucket.UNCERTAIN

    def test_unknown_member_taints_an_up_period(self):
        view = make_view(OperationalState.UP, fully=True, has_unknown=True)
        assert classify_period(view) is PeriodBucket.UNCERTAIN

    def test_uncertain_down_is_not_a_confirmed_outage(self):
        view = make_view(OperationalState.DOWN, fully=False)
        assert classify_period(view) is PeriodBucket.UNCERTAIN

    def test_certain_down(self):
        assert classify_period(make_view(OperationalState.DOWN)) is PeriodBucket.DOWN

    def test_certain_degraded_is_uncertain(self):
        view = make_view(OperationalState.DEGRADED)
        assert classify_period(view) is PeriodBucket.UNCERTAIN

    def test_stitched_gap_lands_in_uncertain(self):
        rng = random.Random(1)
        reports, dps = make_chain(rng, "E2E-G", 5)
        del reports[2]
        view = stitch(reports, endpoints=(dps[0], dps[-1]))
        assert classify_period(view) is PeriodBucket.UNCERTAIN

    def test_silent_link_lands_in_unknown(self):
        assert classify_period(stitch((), e2e_link_id="L")) is PeriodBucket.UNKNOWN


class TestWindowStart:
    def test_weekly_fixed_point_on_monday_midnight(self):
        assert window_start(WindowKind.WEEKLY, MONDAY_JUN_7) == MONDAY_JUN_7

    def test_weekly_midweek_maps_back_to_monday(self):
        thursday_noon = MONDAY_JUN_7 + 3 * 86400 + 12 * 3600
        assert window_start(WindowKind.WEEKLY, thursday_noon) == MONDAY_JUN_7

    def test_weekly_sunday_belongs_to_previous_monday(self):
        assert window_start(WindowKind.WEEKLY, MONDAY_JUN_7 - 1) == MONDAY_MAY_31

    def test_weekly_crosses_year_boundary(self):
        jan_1_2010 = 1262304000  # a Friday
        assert window_start(WindowKind.WEEKLY, jan_1_2010) == MONDAY_DEC_28_2009

    def test_monthly_maps_to_first_of_month(self):
        assert window_start(WindowKind.MONTHLY, MONDAY_JUN_7 + 5 * 86400) == JUN_1

    def test_monthly_boundary_is_exact(self):
        assert window_start(WindowKind.MONTHLY, JUL_1 - 1) == JUN_1
        assert window_start(WindowKind.MONTHLY, JUL_1) == JUL_1

    @given(st.integers(0, 2**31 - 1))
    @settings(deadline=None)
    def test_window_start_is_idempotent_and_bounded(self, ts):
        for kind in WindowKind:
            start = window_start(kind, ts)
            assert start <= ts
            assert window_start(kind, start) == start


class TestLedger:
    def test_availability_undefined_before_any_period(self):
        ledger = AvailabilityLedger("L-1", WindowKind.WEEKLY, MONDAY_JUN_7)
        assert ledger.total_periods == 0
        assert ledger.availability is None

    def test_counters_and_availability(self):
        ledger = AvailabilityLedger("L-1", WindowKind.WEEKLY, MONDAY_JUN_7)
        for bucket, count in (
            (PeriodBucket.CERTAIN_UP, 9),
            (PeriodBucket.DOWN, 2),
            (PeriodBucket.UNCERTAIN, 1),
        ):
            for _ in range(count):
                ledger.record(bucket)
        assert ledger.total_periods == 12
        assert ledger.availability == 9 / 12


class TestLedgerBook:
    def test_each_record_feeds_both_window_kinds(self):
        book = LedgerBook()
        book.record("L-1", PeriodBucket.CERTAIN_UP, MONDAY_JUN_7)
        assert len(book.current) == 2
        for kind in WindowKind:
            (ledger,) = book.ledgers(kind)
            assert ledger.certain_up_periods == 1

    def test_weekly_rollover_closes_finished_window(self):
        book = LedgerBook()
        book.record("L-1", PeriodBucket.CERTAIN_UP, MONDAY_JUN_7)
        book.record("L-1", PeriodBucket.CERTAIN_UP, MONDAY_JUN_7 + 7 * 86400)
        (weekly,) = book.ledgers(WindowKind.WEEKLY)
        assert weekly.window_start == MONDAY_JUN_7 + 7 * 86400
        assert weekly.total_periods == 1
        (monthly,) = book.ledgers(WindowKind.MONTHLY)
        assert monthly.total_periods == 2  # both cycles are in June
        assert [l.window_kind for l in book.closed] == [WindowKind.WEEKLY]
        assert book.closed[0].window_start == MONDAY_JUN_7

    def test_month_boundary_rolls_both_kinds(self):
        book = LedgerBook()
        book.record("L-1", PeriodBucket.DOWN, MONDAY_JUN_7)
        book.record("L-1", PeriodBucket.DOWN, JUL_1)
        (weekly,) = book.ledgers(WindowKind.WEEKLY)
        (monthly,) = book.ledgers(WindowKind.MONTHLY)
        assert weekly.window_start == MONDAY_JUN_28
        assert monthly.window_start == JUL_1
        assert len(book.closed) == 2

    def test_ledgers_listing_is_sorted_by_link_id(self):
        book = LedgerBook()
        for link in ("L-3", "L-1", "L-2"):
            book.record(link, PeriodBucket.CERTAIN_UP, MONDAY_JUN_7)
        names = [l.e2e_link_id for l in book.ledgers(WindowKind.WEEKLY)]
        assert names == ["L-1", "L-2", "L-3"]

    @given(st.lists(st.sampled_from(tuple(PeriodBucket)), min_size=1, max_size=40))
    @settings(deadline=None)
    def test_every_period_lands_in_exactly_one_counter(self, buckets):
        book = LedgerBook()
        for i, bucket in enumerate(buckets):
            book.record("L-1", bucket, MONDAY_JUN_7 + i * 300)
        (weekly,) = book.ledgers(WindowKind.WEEKLY)
        assert weekly.total_periods == len(buckets)
        assert weekly.certain_up_periods == buckets.count(PeriodBucket.CERTAIN_UP)
        assert weekly.down_periods == buckets.count(PeriodBucket.DOWN)
        assert weekly.uncertain_periods == buckets.count(PeriodBucket.UNCERTAIN)
        assert weekly.unknown_periods == buckets.count(PeriodBucket.UNKNOWN)


def ledger_with(up=0, down=0, uncertain=0, unknown=0, link="L-1"):
    ledger = AvailabilityLedger(link, WindowKind.WEEKLY, MONDAY_JUN_7)
    ledger.certain_up_periods = up
    ledger.down_periods = down
    ledger.uncertain_periods = uncertain
    ledger.unknown_periods = unknown
    return ledger


class TestCsvExport:
    def test_nine_two_one_of_twelve_row(self):
        raw = export_stats_csv([ledger_with(up=9, down=2, uncertain=1)])
        assert raw == (
            b"e2e_link_id,up_percent,down_percent,uncertain_percent,"
            b"unknown_percent,total_periods\n"
            b"L-1,75.00,16.67,8.33,0.00,12\n"
        )

    def test_empty_window_renders_not_available(self):
        raw = export_stats_csv([ledger_with()])
        assert b"L-1,n/a,n/a,n/a,n/a,0\n" in raw

    def test_no_ledgers_gives_header_only(self):
        assert export_stats_csv([]) == (",".join(CSV_HEADER) + "\n").encode()

    def test_rows_sorted_by_link_id(self):
        raw = export_stats_csv(
            [ledger_with(up=1, link="L-B"), ledger_with(up=1, link="L-A")]
        )
        lines = raw.decode().splitlines()
        assert [line.split(",")[0] for line in lines[1:]] == ["L-A", "L-B"]

    def test_rounding_is_half_up_not_bankers(self):
        # 1/800 = 0.125%: banker's rounding would print 0.12
        raw = export_stats_csv([ledger_with(up=1, unknown=799)])
        row = raw.decode().splitlines()[1]
        assert row == "L-1,0.13,0.00,0.00,99.88,800"

    def test_export_is_byte_deterministic(self):
        ledgers = [ledger_with(up=5, down=1, link="L-%d" % i) for i in range(4)]
        assert export_stats_csv(ledgers) == export_stats_csv(list(reversed(ledgers)))
