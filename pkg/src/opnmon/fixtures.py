"""Built-in desk-scale fixtures.

The main fixture models the optical private network: one Tier-0 hub (CERN)
with dedicated end-to-end links to eleven Tier-1 sites. Each end-to-end
link crosses three domains — a hub section, an inter-domain section whose
two halves are reported separately by both sides, and a site section — so
stitching, part pairing and gap handling all get exercised by default.
One link (DE-KIT) carries a second end-to-end link as optical 1+1
protection.

Everything here returns plain JSON-able dicts; :mod:`opnmon.simulate`
turns them into runnable scenarios.
"""

from __future__ import annotations

import math

EPOCH = 1275868800  # Monday 2010-06-07 00:00 UTC, aligned to all metric grids

TIER0 = "CERN"

TIER1_SITES = (
    "CA-TRIUMF",
    "DE-KIT",
    "ES-PIC",
    "FR-CCIN2P3",
    "IT-INFN-CNAF",
    "NDGF",
    "NL-T1",
    "TW-ASGC",
    "UK-T1-RAL",
    "US-BNL",
    "US-FNAL",
)

# Sites whose abstract link carries a 1+1 protection e2e link.
PROTECTED_SITES = ("DE-KIT",)


def e2e_link_id(site: str, ordinal: int = 1) -> str:
    return "%s-%s-LHCOPN-%03d" % (TIER0, site, ordinal)


def abstract_link_id(site: str) -> str:
    return "%s--%s" % (TIER0, site)


def _dp(e2e_id: str, n: int) -> str:
    return "%s.dp%d" % (e2e_id, n)


def _e2e_ids_for(site: str) -> list[str]:
    ids = [e2e_link_id(site, 1)]
    if site in PROTECTED_SITES:
        ids.append(e2e_link_id(site, 2))
    return ids


def lhcopn_topology() -> dict:
    """Abstract weathermap topology for the hub-and-spoke fixture."""
    nodes = [{"id": TIER0, "tier": 0, "x": 0.5, "y": 0.5}]
    for index, site in enumerate(TIER1_SITES):
        angle = 2 * math.pi * index / len(TIER1_SITES)
        nodes.append(
            {
                "id": site,
                "tier": 1,
                "x": round(0.5 + 0.38 * math.cos(angle), 4),
                "y": round(0.5 + 0.38 * math.sin(angle), 4),
            }
        )
    links = []
    for index, site in enumerate(TIER1_SITES):
        links.append(
            {
                "id": abstract_link_id(site),
                "endpoints": [TIER0, site],
                "e2e_link_ids": _e2e_ids_for(site),
                "ip_interfaces": [
                    "192.0.2.%d" % (2 * index + 1),
                    "192.0.2.%d" % (2 * index + 2),
                ],
                "bwctl_addresses": {
                    TIER0: "bwctl-cern.example.net",
                    site: "bwctl-%s.example.net" % site.lower(),
                },
            }
        )
    return {"nodes": nodes, "links": links}


def _sections_for(site: str, e2e_id: str) -> tuple[list[dict], list[dict]]:
    """(hub domain records, site domain records) for one e2e link.

    Four raw records: the hub's domain link, both halves of the
    inter-domain section, and the site's domain link.
    """
    dp1, dp2, dp3, dp4 = (_dp(e2e_id, n) for n in (1, 2, 3, 4))
    hub = [
        {
            "e2e_link_id": e2e_id,
            "link_type": "DOMAIN_LINK",
            "dp_a": dp1,
            "dp_b": dp2,
        },
        {
            "e2e_link_id": e2e_id,
            "link_type": "INTER_DOMAIN_LINK_PART",
            "dp_a": dp2,
            "dp_b": dp3,
        },
    ]
    site_records = [
        {
            "e2e_link_id": e2e_id,
            "link_type": "INTER_DOMAIN_LINK_PART",
            "dp_a": dp2,
            "dp_b": dp3,
        },
        {
            "e2e_link_id": e2e_id,
            "link_type": "DOMAIN_LINK",
            "dp_a": dp3,
            "dp_b": dp4,
        },
    ]
    return hub, site_records


def lhcopn_scenario(seed: int = 42, events: list[dict] | None = None) -> dict:
    """Scenario document for the full fixture: 12 domains, 12 e2e links."""
    hub_links: list[dict] = []
    domains = []
    catalog = []
    for site in TIER1_SITES:
        site_links: list[dict] = []
        for e2e_id in _e2e_ids_for(site):
            hub, site_records = _sections_for(site, e2e_id)
            hub_links.extend(hub)
            site_links.extend(site_records)
            catalog.append(
                {
                    "e2e_link_id": e2e_id,
                    "endpoints": [_dp(e2e_id, 1), _dp(e2e_id, 4)],
                    "productive": True,
                }
            )
        domains.append({"domain": site, "links": site_links})
    domains.insert(0, {"domain": TIER0, "links": hub_links})
    return {
        "name": "lhcopn",
        "seed": seed,
        "period": 300,
        "epoch": EPOCH,
        "domains": domains,
        "catalog": catalog,
        "topology": lhcopn_topology(),
        "events": list(events or ()),
    }


def lhcopn_demo_events() -> list[dict]:
    """Standard demo script: an outage, a covered maintenance, an MP outage."""
    down_link = e2e_link_id("UK-T1-RAL")
    maint_link = e2e_link_id("ES-PIC")
    return [
        # plain outage: one site section goes down, recovers later
        {"at": 6, "kind": "set", "domain": "UK-T1-RAL", "e2e_link_id": down_link,
         "operational": "DOWN"},
        {"at": 10, "kind": "set", "domain": "UK-T1-RAL", "e2e_link_id": down_link,
         "operational": "UP"},
        # maintenance window announced before the drop: alarms suppressed
        {"at": 4, "kind": "set", "domain": "ES-PIC", "e2e_link_id": maint_link,
         "administrative": "PLANNED_MAINTENANCE"},
        {"at": 8, "kind": "set", "domain": "ES-PIC", "e2e_link_id": maint_link,
         "operational": "DOWN"},
        {"at": 12, "kind": "set", "domain": "ES-PIC", "e2e_link_id": maint_link,
         "operational": "UP", "administrative": "NORMAL_OPERATION"},
        # one measurement point drops off the network for two cycles
        {"at": 14, "kind": "mp_down", "domain": "NDGF"},
        {"at": 16, "kind": "mp_up", "domain": "NDGF"},
    ]


def chain_federation(n_domains: int = 30, sections_per_link: int = 3) -> dict:
    """Synthetic federation: n domains, one MP each, chained e2e links.

    Consecutive groups of ``sections_per_link`` domains each contribute one
    section to a shared e2e link, so the cycle exercises both wide poll
    fan-out and multi-domain stitching. No metric topology.
    """
    if n_domains < 1:
        raise ValueError("need at least one domain")
    domains = [{"domain": "DOM-%02d" % i, "links": []} for i in range(n_domains)]
    catalog = []
    for link_index in range(0, n_domains, sections_per_link):
        members = range(link_index, min(link_index + sections_per_link, n_domains))
        e2e_id = "CHAIN-%02d" % (link_index // sections_per_link)
        dps = ["%s.dp%d" % (e2e_id, n) for n in range(len(list(members)) + 1)]
        for offset, domain_index in enumerate(members):
            domains[domain_index]["links"].append(
                {
                    "e2e_link_id": e2e_id,
                    "link_type": "DOMAIN_LINK",
                    "dp_a": dps[offset],
                    "dp_b": dps[offset + 1],
                }
            )
        catalog.append(
            {
                "e2e_link_id": e2e_id,
                "endpoints": [dps[0], dps[-1]],
                "productive": True,
            }
        )
    return {
        "name": "chain-%d" % n_domains,
        "seed": 7,
        "period": 300,
        "epoch": EPOCH,
        "domains": domains,
        "catalog": catalog,
        "topology": None,
        "events": [],
    }
