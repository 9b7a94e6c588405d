"""Core domain types shared across the monitoring stack.

States and their severity weights, the per-section status report exchanged
between domains and the central monitor, and polling-cycle bookkeeping.
Everything in this module is an immutable value type and safe to share
between threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping


class OperationalState(enum.Enum):
    """Abstracted operational state of a monitored link section."""

    UP = "UP"
    DEGRADED = "DEGRADED"
    DOWN = "DOWN"
    UNKNOWN = "UNKNOWN"

    def __str__(self) -> str:
        return self.value


class AdministrativeState(enum.Enum):
    """Management-process state reported alongside the operational state."""

    NORMAL_OPERATION = "NORMAL_OPERATION"
    PLANNED_MAINTENANCE = "PLANNED_MAINTENANCE"
    TROUBLESHOOTING = "TROUBLESHOOTING"
    UNKNOWN = "UNKNOWN"

    def __str__(self) -> str:
        return self.value


class MonitoredLinkType(enum.Enum):
    """How a reported section relates to domain boundaries."""

    DOMAIN_LINK = "DOMAIN_LINK"
    INTER_DOMAIN_LINK = "INTER_DOMAIN_LINK"
    INTER_DOMAIN_LINK_PART = "INTER_DOMAIN_LINK_PART"

    def __str__(self) -> str:
        return self.value


# Default severity weights. Higher weight = worse; aggregation keeps the
# maximum, so DOWN dominates everything and a confirmed DEGRADED outranks a
# mere UNKNOWN. Deployments may swap in their own tables as long as the
# replacement stays injective (see validate_weight_table).
DEFAULT_OPERATIONAL_WEIGHTS: Mapping[OperationalState, int] = {
    OperationalState.UP: 0,
    OperationalState.UNKNOWN: 1,
    OperationalState.DEGRADED: 2,
    OperationalState.DOWN: 3,
}

DEFAULT_ADMINISTRATIVE_WEIGHTS: Mapping[AdministrativeState, int] = {
    AdministrativeState.NORMAL_OPERATION: 0,
    AdministrativeState.UNKNOWN: 1,
    AdministrativeState.PLANNED_MAINTENANCE: 2,
    AdministrativeState.TROUBLESHOOTING: 3,
}


def validate_weight_table(table: Mapping) -> None:
    """Reject weight tables that cannot induce a strict total order.

    The table must be injective and cover every member of its key enum;
    a partial table would fail only later, at lookup time.
    """
    if not table:
        raise ValueError("weight table is empty")
    values = list(table.values())
    if len(set(values)) != len(values):
        raise ValueError("weight table is not injective: %r" % (table,))
    enum_type = type(next(iter(table)))
    missing = [member for member in enum_type if member not in table]
    if missing:
        raise ValueError("weight table is missing states: %r" % (missing,))


def operational_weight(
    state: OperationalState,
    weights: Mapping[OperationalState, int] | None = None,
) -> int:
    table = DEFAULT_OPERATIONAL_WEIGHTS if weights is None else weights
    return table[state]


def administrative_weight(
    state: AdministrativeState,
    weights: Mapping[AdministrativeState, int] | None = None,
) -> int:
    table = DEFAULT_ADMINISTRATIVE_WEIGHTS if weights is None else weights
    return table[state]


def worst_operational(
    states: Iterable[OperationalState],
    weights: Mapping[OperationalState, int] | None = None,
) -> OperationalState:
    """The state with the highest severity weight. States must be non-empty."""
    items = list(states)
    if not items:
        raise ValueError("worst_operational() over an empty state list")
    return max(items, key=lambda s: operational_weight(s, weights))


def worst_administrative(
    states: Iterable[AdministrativeState],
    weights: Mapping[AdministrativeState, int] | None = None,
) -> AdministrativeState:
    items = list(states)
    if not items:
        raise ValueError("worst_administrative() over an empty state list")
    return max(items, key=lambda s: administrative_weight(s, weights))


@dataclass(frozen=True, slots=True)
class MonitoredLinkReport:
    """One domain's abstracted status for one section of an end-to-end link.

    Demarcation point ids and the end-to-end link id are opaque,
    case-sensitive strings; cross-domain agreement on them is exact-match
    by construction, so no normalization happens here.
    """

    e2e_link_id: str
    link_type: MonitoredLinkType
    dp_a: str
    dp_b: str
    reporting_domain: str
    operational: OperationalState
    administrative: AdministrativeState
    cycle_timestamp: int

    def __post_init__(self) -> None:
        if not self.e2e_link_id:
            raise ValueError("e2e_link_id must be non-empty")
        if not self.dp_a or not self.dp_b:
            raise ValueError("demarcation point ids must be non-empty")
        if self.dp_a == self.dp_b:
            raise ValueError(
                "demarcation points of %r coincide: %r" % (self.e2e_link_id, self.dp_a)
            )
        if not self.reporting_domain:
            raise ValueError("reporting_domain must be non-empty")
        if self.cycle_timestamp < 0:
            raise ValueError("cycle_timestamp must be >= 0")

    @property
    def dp_pair(self) -> frozenset[str]:
        """Unordered demarcation-point pair, the stitching key."""
        return frozenset((self.dp_a, self.dp_b))


DEFAULT_POLLING_PERIOD = 300


@dataclass(frozen=True, slots=True)
class PollingCycle:
    """One synchronization window of the central poller.

    All reports collected within a cycle are treated as mutually
    synchronized; no cross-domain clock discipline is assumed.
    """

    cycle_index: int
    start: int
    period: int = DEFAULT_POLLING_PERIOD

    def __post_init__(self) -> None:
        if self.cycle_index < 0:
            raise ValueError("cycle_index must be >= 0")
        if self.period <= 0:
            raise ValueError("polling period must be > 0")

    @classmethod
    def at(cls, index: int, epoch: int, period: int = DEFAULT_POLLING_PERIOD) -> "PollingCycle":
        """Cycle ``index`` of a schedule that started at ``epoch``."""
        return cls(cycle_index=index, start=epoch + index * period, period=period)

    @property
    def end(self) -> int:
        return self.start + self.period
