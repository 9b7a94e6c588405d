"""Shared builders for the test suite."""

from __future__ import annotations

import random

from opnmon.model import (
    AdministrativeState,
    MonitoredLinkReport,
    MonitoredLinkType,
    OperationalState,
)

OPS = tuple(OperationalState)
ADMINS = tuple(AdministrativeState)

# Independent severity tables, written out by hand: tests must not trust the
# package's own constants when checking aggregation.
ORACLE_OP_WEIGHT = {
    OperationalState.UP: 0,
    OperationalState.UNKNOWN: 1,
    OperationalState.DEGRADED: 2,
    OperationalState.DOWN: 3,
}
ORACLE_ADMIN_WEIGHT = {
    AdministrativeState.NORMAL_OPERATION: 0,
    AdministrativeState.UNKNOWN: 1,
    AdministrativeState.PLANNED_MAINTENANCE: 2,
    AdministrativeState.TROUBLESHOOTING: 3,
}


def oracle_worst(states, table=None):
    """Brute-force max scan over a hand-written weight table."""
    if table is None:
        table = ORACLE_OP_WEIGHT
    best = None
    for state in states:
        if best is None or table[state] > table[best]:
            best = state
    return best


def make_report(
    e2e_link_id="E2E-1",
    link_type=MonitoredLinkType.DOMAIN_LINK,
    dp_a="dpA",
    dp_b="dpB",
    domain="DOM",
    operational=OperationalState.UP,
    administrative=AdministrativeState.NORMAL_OPERATION,
    timestamp=1275868800,
) -> MonitoredLinkReport:
    return MonitoredLinkReport(
        e2e_link_id=e2e_link_id,
        link_type=link_type,
        dp_a=dp_a,
        dp_b=dp_b,
        reporting_domain=domain,
        operational=operational,
        administrative=administrative,
        cycle_timestamp=timestamp,
    )


def make_chain(rng: random.Random, link_id: str, n_sections: int):
    """A known-good chain of domain-link reports plus its DP order.

    Returns (reports in path order, dp sequence dp0..dpN). Construction is
    the ground truth the stitcher must reproduce.
    """
    dps = ["%s.dp%d" % (link_id, i) for i in range(n_sections + 1)]
    reports = []
    for i in range(n_sections):
        reports.append(
            make_report(
                e2e_link_id=link_id,
                dp_a=dps[i],
                dp_b=dps[i + 1],
                domain="DOM-%d" % rng.randrange(1, 6),
                operational=rng.choice(
                    (OperationalState.UP, OperationalState.UP, OperationalState.DEGRADED)
                ),
            )
        )
    return reports, dps
