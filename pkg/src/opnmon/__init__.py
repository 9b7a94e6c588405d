"""Multi-domain optical-network monitoring stack.

Per-domain measurement point agents export abstracted link status as a
small NMWG XML dialect; a central monitor polls them every cycle, stitches
per-domain sections into end-to-end link views, books availability, raises
alarms and feeds a weathermap API. A deterministic scenario engine runs the
whole federation in one process for tests and demos.
"""

from .model import (
    AdministrativeState,
    MonitoredLinkReport,
    MonitoredLinkType,
    OperationalState,
    PollingCycle,
)

__version__ = "0.1.0"

__all__ = [
    "AdministrativeState",
    "MonitoredLinkReport",
    "MonitoredLinkType",
    "OperationalState",
    "PollingCycle",
    "__version__",
]
