"""Availability accounting for productive end-to-end links.

Every polling period of a productive link lands in exactly one of four
buckets: certain up, down, uncertain, unknown. Availability is certain
up-time divided by the overall monitored time, so periods where the link
structure was incomplete never count toward availability even if the
computed state looked UP. Weekly windows start Monday 00:00 UTC, monthly
windows on the 1st 00:00 UTC.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import ROUND_HALF_UP, Decimal

from .assembly import E2ELinkView
from .model import OperationalState


class WindowKind(enum.Enum):
    WEEKLY = "WEEKLY"
    MONTHLY = "MONTHLY"


class PeriodBucket(enum.Enum):
    CERTAIN_UP = "CERTAIN_UP"
    DOWN = "DOWN"
    UNCERTAIN = "UNCERTAIN"
    UNKNOWN = "UNKNOWN"


def classify_period(view: E2ELinkView) -> PeriodBucket:
    """Decide which counter one polling period of a link feeds.

    Uncertainty wins over the computed state: an incompletely reconstructed
    link gets no availability credit and no confirmed outage either. Only a
    fully reconstructed, gap-free UP period counts as certain up-time. A
    certain DEGRADED period is also booked as uncertain: the link is not UP,
    but calling it an outage would be wrong too.
    """
    if view.aggregated_operational is OperationalState.UNKNOWN:
        return PeriodBucket.UNKNOWN
    if view.uncertain:
        return PeriodBucket.UNCERTAIN
    if view.aggregated_operational is OperationalState.DOWN:
        return PeriodBucket.DOWN
    if view.aggregated_operational is OperationalState.UP:
        return PeriodBucket.CERTAIN_UP
    return PeriodBucket.UNCERTAIN


def window_start(kind: WindowKind, timestamp: int) -> int:
    """Epoch second of the window boundary containing ``timestamp`` (UTC)."""
    moment = datetime.fromtimestamp(timestamp, tz=timezone.utc)
    if kind is WindowKind.WEEKLY:
        day = datetime(moment.year, moment.month, moment.day, tzinfo=timezone.utc)
        monday = day.timestamp() - moment.weekday() * 86400
        return int(monday)
    first = datetime(moment.year, moment.month, 1, tzinfo=timezone.utc)
    return int(first.timestamp())


@dataclass
class AvailabilityLedger:
    """Per-link period counters for one statistics window."""

    e2e_link_id: str
    window_kind: WindowKind
    window_start: int
    certain_up_periods: int = 0
    down_periods: int = 0
    uncertain_periods: int = 0
    unknown_periods: int = 0

    @property
    def total_periods(self) -> int:
        return (
            self.certain_up_periods
            + self.down_periods
            + self.uncertain_periods
            + self.unknown_periods
        )

    @property
    def availability(self) -> float | None:
        """Certain up-time over total monitored time; None before any period."""
        if self.total_periods == 0:
            return None
        return self.certain_up_periods / self.total_periods

    def record(self, bucket: PeriodBucket) -> None:
        if bucket is PeriodBucket.CERTAIN_UP:
            self.certain_up_periods += 1
        elif bucket is PeriodBucket.DOWN:
            self.down_periods += 1
        elif bucket is PeriodBucket.UNCERTAIN:
            self.uncertain_periods += 1
        else:
            self.unknown_periods += 1


@dataclass
class LedgerBook:
    """Current weekly and monthly ledgers for all productive links.

    When a cycle crosses a window boundary the finished ledger moves to
    ``closed`` and a fresh one starts; past windows are never re-aggregated.
    """

    current: dict[tuple[str, WindowKind], AvailabilityLedger] = field(default_factory=dict)
    closed: list[AvailabilityLedger] = field(default_factory=list)

    def record(self, link_id: str, bucket: PeriodBucket, cycle_start: int) -> None:
        for kind in WindowKind:
            boundary = window_start(kind, cycle_start)
            key = (link_id, kind)
            ledger = self.current.get(key)
            if ledger is None or ledger.window_start != boundary:
                if ledger is not None:
                    self.closed.append(ledger)
                ledger = AvailabilityLedger(link_id, kind, boundary)
                self.current[key] = ledger
            ledger.record(bucket)

    def ledgers(self, kind: WindowKind) -> list[AvailabilityLedger]:
        return sorted(
            (ledger for (_, k), ledger in self.current.items() if k is kind),
            key=lambda ledger: ledger.e2e_link_id,
        )


CSV_HEADER = (
    "e2e_link_id",
    "up_percent",
    "down_percent",
    "uncertain_percent",
    "unknown_percent",
    "total_periods",
)


def _percent(count: int, total: int) -> str:
    value = (Decimal(count) * 100 / Decimal(total)).quantize(
        Decimal("0.01"), rounding=ROUND_HALF_UP
    )
    return str(value)


def export_stats_csv(ledgers: list[AvailabilityLedger]) -> bytes:
    """Deterministic CSV of per-link availability statistics.

    One row per link, sorted by link id; percentages rounded half-up to two
    decimals. Links whose window has no periods yet render "n/a".
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for ledger in sorted(ledgers, key=lambda l: l.e2e_link_id):
        total = ledger.total_periods
        if total == 0:
            writer.writerow([ledger.e2e_link_id, "n/a", "n/a", "n/a", "n/a", 0])
            continue
        writer.writerow(
            [
                ledger.e2e_link_id,
                _percent(ledger.certain_up_periods, total),
                _percent(ledger.down_periods, total),
                _percent(ledger.uncertain_periods, total),
                _percent(ledger.unknown_periods, total),
                total,
            ]
        )
    return buffer.getvalue().encode("utf-8")
