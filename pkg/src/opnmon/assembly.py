"""Reconstruction of end-to-end links from per-domain section reports.

Each polling cycle delivers a bag of section reports per end-to-end link id.
This module pairs the two half-reports of inter-domain sections, collapses
duplicates, stitches sections into ordered fragments by joining shared
demarcation-point ids, inserts gap markers between fragments that do not
touch, and aggregates states worst-dominates.

Everything here is a pure function of one cycle's data; links can be
assembled in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .model import (
    AdministrativeState,
    MonitoredLinkReport,
    MonitoredLinkType,
    OperationalState,
    operational_weight,
    worst_administrative,
    worst_operational,
)


class EmptyInput(ValueError):
    """Aggregation over an empty state list."""


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """A non-fatal oddity noticed while assembling a link."""

    kind: str
    detail: str


# Diagnostic kinds.
TOPOLOGY_CONFLICT = "TopologyConflict"
HALF_REPORTED = "HalfReported"
OVER_REPORTED = "OverReported"
NO_REPORTS = "NoReports"


@dataclass(frozen=True, slots=True)
class Section:
    """One stitchable piece of an end-to-end link."""

    dp_a: str
    dp_b: str
    operational: OperationalState
    administrative: AdministrativeState
    contributing_reports: tuple[MonitoredLinkReport, ...]

    @property
    def dp_pair(self) -> frozenset[str]:
        return frozenset((self.dp_a, self.dp_b))


@dataclass(frozen=True, slots=True)
class Gap:
    """A hole between two reconstructed fragments."""

    after_dp: str
    before_dp: str


@dataclass(frozen=True, slots=True)
class E2ELinkView:
    """Everything one cycle knows about one end-to-end link."""

    e2e_link_id: str
    fragments: tuple[tuple[Section, ...], ...]
    gaps: tuple[Gap, ...]
    aggregated_operational: OperationalState
    aggregated_administrative: AdministrativeState
    has_unknown: bool
    fully_reconstructed: bool
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def sections(self) -> tuple[Section, ...]:
        out: list[Section] = []
        for fragment in self.fragments:
            out.extend(fragment)
        return tuple(out)

    @property
    def uncertain(self) -> bool:
        """True when the computed state may be off because pieces are missing."""
        return not self.fully_reconstructed or self.has_unknown


def aggregate(
    states: Sequence[OperationalState],
    weights: Mapping[OperationalState, int] | None = None,
) -> tuple[OperationalState, bool]:
    """Worst-dominates aggregation plus an any-UNKNOWN warning flag."""
    if not states:
        raise EmptyInput("cannot aggregate an empty state list")
    worst = max(states, key=lambda s: operational_weight(s, weights))
    return worst, OperationalState.UNKNOWN in states


def pair_interdomain_parts(
    reports: Iterable[MonitoredLinkReport],
) -> tuple[list[MonitoredLinkReport], list[Diagnostic]]:
    """Merge half-reports of inter-domain sections into whole-section reports.

    Reports that are not inter-domain parts pass through untouched. Every
    maximal group of part reports sharing (link id, unordered DP pair)
    collapses into one synthetic whole-link report carrying the worst states
    of the group. Lone halves pass through but are flagged, as are groups
    with more than two contributors.
    """
    merged, diagnostics = _pair_with_sources(reports)
    return [report for report, _ in merged], diagnostics


def _pair_with_sources(
    reports: Iterable[MonitoredLinkReport],
) -> tuple[list[tuple[MonitoredLinkReport, tuple[MonitoredLinkReport, ...]]], list[Diagnostic]]:
    passthrough: list[tuple[MonitoredLinkReport, tuple[MonitoredLinkReport, ...]]] = []
    groups: dict[tuple[str, tuple[str, str]], list[MonitoredLinkReport]] = {}
    for report in reports:
        if report.link_type is MonitoredLinkType.INTER_DOMAIN_LINK_PART:
            key = (report.e2e_link_id, tuple(sorted(report.dp_pair)))
            groups.setdefault(key, []).append(report)
        else:
            passthrough.append((report, (report,)))

    diagnostics: list[Diagnostic] = []
    merged: list[tuple[MonitoredLinkReport, tuple[MonitoredLinkReport, ...]]] = []
    for (link_id, pair), group in sorted(groups.items()):
        group.sort(key=_report_sort_key)
        if len(group) == 1:
            only = group[0]
            diagnostics.append(
                Diagnostic(
                    HALF_REPORTED,
                    "section %s-%s of %s reported only by %s"
                    % (only.dp_a, only.dp_b, link_id, only.reporting_domain),
                )
            )
            merged.append((only, (only,)))
            continue
        if len(group) > 2:
            diagnostics.append(
                Diagnostic(
                    OVER_REPORTED,
                    "section %s of %s has %d part reports"
                    % ("-".join(pair), link_id, len(group)),
                )
            )
        synthetic = MonitoredLinkReport(
            e2e_link_id=link_id,
            link_type=MonitoredLinkType.INTER_DOMAIN_LINK,
            dp_a=pair[0],
            dp_b=pair[1],
            reporting_domain="+".join(sorted({r.reporting_domain for r in group})),
            operational=worst_operational(r.operational for r in group),
            administrative=worst_administrative(r.administrative for r in group),
            cycle_timestamp=max(r.cycle_timestamp for r in group),
        )
        merged.append((synthetic, tuple(group)))
    return passthrough + merged, diagnostics


def _report_sort_key(report: MonitoredLinkReport):
    return (
        report.e2e_link_id,
        report.reporting_domain,
        report.link_type.value,
        report.dp_a,
        report.dp_b,
        report.cycle_timestamp,
    )


def _dedupe(reports: Sequence[MonitoredLinkReport]) -> list[MonitoredLinkReport]:
    # Defensive against double polling: identical (domain, type, DP pair)
    # reports collapse to one, keeping the worst state.
    buckets: dict[tuple, list[MonitoredLinkReport]] = {}
    for report in sorted(reports, key=_report_sort_key):
        key = (
            report.reporting_domain,
            report.link_type,
            report.e2e_link_id,
            tuple(sorted(report.dp_pair)),
        )
        buckets.setdefault(key, []).append(report)
    out: list[MonitoredLinkReport] = []
    for group in buckets.values():
        if len(group) == 1:
            out.append(group[0])
            continue
        out.append(
            replace(
                group[0],
                operational=worst_operational(r.operational for r in group),
                administrative=worst_administrative(r.administrative for r in group),
                cycle_timestamp=max(r.cycle_timestamp for r in group),
            )
        )
    return out


def _build_sections(
    paired: list[tuple[MonitoredLinkReport, tuple[MonitoredLinkReport, ...]]],
) -> list[Section]:
    by_pair: dict[tuple[str, str], list[tuple[MonitoredLinkReport, tuple[MonitoredLinkReport, ...]]]] = {}
    for report, sources in paired:
        key = tuple(sorted(report.dp_pair))
        by_pair.setdefault(key, []).append((report, sources))
    sections = []
    for (dp_a, dp_b), group in sorted(by_pair.items()):
        contributing: list[MonitoredLinkReport] = []
        for _, sources in group:
            contributing.extend(sources)
        sections.append(
            Section(
                dp_a=dp_a,
                dp_b=dp_b,
                operational=worst_operational(r.operational for r, _ in group),
                administrative=worst_administrative(r.administrative for r, _ in group),
                contributing_reports=tuple(sorted(contributing, key=_report_sort_key)),
            )
        )
    return sections


def stitch(
    reports: Sequence[MonitoredLinkReport],
    endpoints: tuple[str, str] | None = None,
    e2e_link_id: str | None = None,
) -> E2ELinkView:
    """Assemble one end-to-end link view from its cycle reports.

    ``endpoints``, when configured, names the two terminal demarcation
    points in (near side, far side) order; fragments are oriented away from
    ``endpoints[0]`` and a link counts as fully reconstructed only when a
    single fragment spans exactly those two points. A demarcation point of
    degree > 2 or a cycle in the section graph yields a TopologyConflict
    diagnostic instead of a guessed order; the view is still returned.

    An empty report list is allowed when ``e2e_link_id`` names the link: the
    result is the all-unknown view a silent link gets for that cycle.
    """
    ids = {r.e2e_link_id for r in reports}
    if len(ids) > 1:
        raise ValueError("stitch() got reports for multiple links: %s" % sorted(ids))
    if ids:
        link_id = ids.pop()
        if e2e_link_id is not None and e2e_link_id != link_id:
            raise ValueError("reports are for %r, not %r" % (link_id, e2e_link_id))
    elif e2e_link_id is not None:
        link_id = e2e_link_id
    else:
        raise ValueError("no reports and no e2e_link_id given")

    if not reports:
        return E2ELinkView(
            e2e_link_id=link_id,
            fragments=(),
            gaps=(),
            aggregated_operational=OperationalState.UNKNOWN,
            aggregated_administrative=AdministrativeState.UNKNOWN,
            has_unknown=True,
            fully_reconstructed=False,
            diagnostics=(Diagnostic(NO_REPORTS, "no section reports this cycle"),),
        )

    deduped = _dedupe(reports)
    paired, diagnostics = _pair_with_sources(deduped)
    sections = _build_sections(paired)

    fragments, conflicts = _order_fragments(sections, endpoints)
    diagnostics.extend(conflicts)

    gaps = tuple(
        Gap(after_dp=_fragment_end(fragments[i]), before_dp=_fragment_start(fragments[i + 1]))
        for i in range(len(fragments) - 1)
    )

    operational, any_unknown = aggregate([s.operational for s in sections])
    administrative = worst_administrative(s.administrative for s in sections)
    has_unknown = any_unknown or bool(gaps)

    conflict_free = not any(d.kind == TOPOLOGY_CONFLICT for d in conflicts)
    fully = conflict_free and len(fragments) == 1
    if fully and endpoints is not None:
        terminals = {_fragment_start(fragments[0]), _fragment_end(fragments[0])}
        fully = terminals == set(endpoints)

    return E2ELinkView(
        e2e_link_id=link_id,
        fragments=fragments,
        gaps=gaps,
        aggregated_operational=operational,
        aggregated_administrative=administrative,
        has_unknown=has_unknown,
        fully_reconstructed=fully,
        diagnostics=tuple(diagnostics),
    )


def _fragment_start(fragment: tuple[Section, ...]) -> str:
    return fragment[0].dp_a


def _fragment_end(fragment: tuple[Section, ...]) -> str:
    return fragment[-1].dp_b


def _order_fragments(
    sections: list[Section],
    endpoints: tuple[str, str] | None,
) -> tuple[tuple[tuple[Section, ...], ...], list[Diagnostic]]:
    adjacency: dict[str, list[int]] = {}
    for idx, section in enumerate(sections):
        adjacency.setdefault(section.dp_a, []).append(idx)
        adjacency.setdefault(section.dp_b, []).append(idx)

    diagnostics: list[Diagnostic] = []
    for dp, incident in sorted(adjacency.items()):
        if len(incident) > 2:
            diagnostics.append(
                Diagnostic(
                    TOPOLOGY_CONFLICT,
                    "demarcation point %r appears in %d sections" % (dp, len(incident)),
                )
            )

    seen: set[int] = set()
    components: list[list[int]] = []
    for start in range(len(sections)):
        if start in seen:
            continue
        stack = [start]
        component = []
        seen.add(start)
        while stack:
            idx = stack.pop()
            component.append(idx)
            for dp in (sections[idx].dp_a, sections[idx].dp_b):
                for other in adjacency[dp]:
                    if other not in seen:
                        seen.add(other)
                        stack.append(other)
        components.append(component)

    fragments: list[tuple[Section, ...]] = []
    for component in components:
        fragment = _walk_component(sections, adjacency, component, endpoints)
        if fragment is None:
            # Cycle or branching: keep the sections visible in a stable
            # pseudo-fragment but refuse to claim an order.
            ordered = tuple(
                sorted((sections[i] for i in component), key=lambda s: (s.dp_a, s.dp_b))
            )
            dps = sorted({dp for s in ordered for dp in (s.dp_a, s.dp_b)})
            diagnostics.append(
                Diagnostic(
                    TOPOLOGY_CONFLICT,
                    "sections over %s do not form a simple path" % ",".join(dps),
                )
            )
            fragments.append(ordered)
        else:
            fragments.append(fragment)

    fragments.sort(key=lambda frag: _fragment_rank(frag, endpoints))
    return tuple(fragments), diagnostics


def _fragment_rank(fragment: tuple[Section, ...], endpoints: tuple[str, str] | None):
    first = _fragment_start(fragment)
    last = _fragment_end(fragment)
    if endpoints is not None:
        if first == endpoints[0]:
            return (0, first)
        if last == endpoints[1]:
            return (2, first)
    return (1, first)


def _walk_component(
    sections: list[Section],
    adjacency: dict[str, list[int]],
    component: list[int],
    endpoints: tuple[str, str] | None,
) -> tuple[Section, ...] | None:
    """Order a connected component into a path, or None if it is not one."""
    degrees: dict[str, int] = {}
    for idx in component:
        for dp in (sections[idx].dp_a, sections[idx].dp_b):
            degrees[dp] = degrees.get(dp, 0) + 1
    terminals = sorted(dp for dp, degree in degrees.items() if degree == 1)
    if len(terminals) != 2 or any(count > 2 for count in degrees.values()):
        return None  # cycle or branch

    start = terminals[0]  # lexicographically smaller terminal by default
    if endpoints is not None:
        near_side, far_side = endpoints
        if near_side in degrees and degrees[near_side] == 1:
            start = near_side
        elif far_side in degrees and degrees[far_side] == 1:
            # orient so the far-side endpoint comes last
            start = terminals[1] if far_side == terminals[0] else terminals[0]

    members = set(component)
    ordered: list[Section] = []
    used: set[int] = set()
    current = start
    while len(ordered) < len(component):
        next_idx = None
        for idx in adjacency[current]:
            if idx in members and idx not in used:
                next_idx = idx
                break
        if next_idx is None:
            return None
        section = sections[next_idx]
        used.add(next_idx)
        if section.dp_a == current:
            ordered.append(section)
            current = section.dp_b
        else:
            ordered.append(replace(section, dp_a=section.dp_b, dp_b=section.dp_a))
            current = section.dp_a
    return tuple(ordered)


def view_to_dict(view: E2ELinkView) -> dict:
    """JSON-friendly dump of a link view, for exports and the API."""
    return {
        "e2e_link_id": view.e2e_link_id,
        "fragments": [
            [
                {
                    "dp_a": s.dp_a,
                    "dp_b": s.dp_b,
                    "operational": s.operational.value,
                    "administrative": s.administrative.value,
                    "domains": sorted({r.reporting_domain for r in s.contributing_reports}),
                }
                for s in fragment
            ]
            for fragment in view.fragments
        ],
        "gaps": [{"after": g.after_dp, "before": g.before_dp} for g in view.gaps],
        "aggregated_operational": view.aggregated_operational.value,
        "aggregated_administrative": view.aggregated_administrative.value,
        "has_unknown": view.has_unknown,
        "fully_reconstructed": view.fully_reconstructed,
        "diagnostics": [{"kind": d.kind, "detail": d.detail} for d in view.diagnostics],
    }
