"""Codec for the XML status documents exchanged between agents and the poller.

The wire dialect is a small subset of the OGF NMWG base-2.0 message format:
a ``message`` envelope holding ``metadata`` blocks (id + eventType) and
``data`` blocks (id + metadataIdRef) whose payload is one ``datum`` element
per monitored-link section report. The exact element and attribute names are
pinned by ``docs/nmwg-subset.xsd`` and the golden files under ``tests/data``.

Emission is canonical: fixed attribute order, two-space indentation, UTF-8,
one element per line. That makes golden-file tests byte-exact and makes
``emit(parse(x))`` a canonicalizer (idempotent after one pass).

Documents may travel bare or wrapped in a SOAP 1.1 envelope; parsing strips
the envelope, and emission adds one back when asked to.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from xml.sax.saxutils import escape
from xml.sax.saxutils import quoteattr as _quoteattr

from .model import (
    AdministrativeState,
    MonitoredLinkReport,
    MonitoredLinkType,
    OperationalState,
)

NMWG_NS = "http://ggf.org/ns/nmwg/base/2.0/"
SOAP_NS = "http://schemas.xmlsoap.org/soap/envelope/"

REQUEST_TYPE = "SetupDataRequest"
RESPONSE_TYPE = "SetupDataResponse"
PATH_STATUS_EVENT = "Path.Status"

_MESSAGE = "{%s}message" % NMWG_NS
_METADATA = "{%s}metadata" % NMWG_NS
_EVENT_TYPE = "{%s}eventType" % NMWG_NS
_DATA = "{%s}data" % NMWG_NS
_DATUM = "{%s}datum" % NMWG_NS
_ENVELOPE = "{%s}Envelope" % SOAP_NS
_BODY = "{%s}Body" % SOAP_NS

# Literal whitespace in attribute values would be folded to spaces by XML
# attribute-value normalization on parse; entity-escape it so ids containing
# tabs or newlines survive a round trip unchanged.
_ATTR_ENTITIES = {"\t": "&#9;", "\n": "&#10;", "\r": "&#13;"}


def quoteattr(value: str) -> str:
    return _quoteattr(value, _ATTR_ENTITIES)


# Canonical attribute order of a datum element.
_DATUM_ATTRS = (
    "e2eLinkId",
    "linkType",
    "dpA",
    "dpB",
    "domain",
    "operState",
    "adminState",
    "timestamp",
)


class CodecError(Exception):
    """Base class for status-document codec failures."""


class MalformedXml(CodecError):
    """The input is not well-formed XML."""


class SchemaViolation(CodecError):
    """Well-formed XML that does not follow the status-document dialect."""


class UnknownState(CodecError):
    """A state or link-type token outside the supported vocabulary."""


class InvariantViolation(CodecError):
    """An in-memory document that must not be emitted."""


@dataclass(frozen=True, slots=True)
class MetadataBlock:
    id: str
    event_type: str


@dataclass(frozen=True, slots=True)
class DataBlock:
    id: str
    metadata_ref: str
    reports: tuple[MonitoredLinkReport, ...] = ()


@dataclass(frozen=True, slots=True)
class StatusDocument:
    """In-memory form of one status message."""

    message_type: str
    metadata_blocks: tuple[MetadataBlock, ...] = ()
    data_blocks: tuple[DataBlock, ...] = ()

    def reports(self) -> tuple[MonitoredLinkReport, ...]:
        """All section reports across all data blocks, in document order."""
        out: list[MonitoredLinkReport] = []
        for block in self.data_blocks:
            out.extend(block.reports)
        return tuple(out)


def make_request(metadata_id: str = "meta1", data_id: str = "data1") -> StatusDocument:
    """The canonical poll request: one Path.Status metadata, one empty data block."""
    return StatusDocument(
        message_type=REQUEST_TYPE,
        metadata_blocks=(MetadataBlock(metadata_id, PATH_STATUS_EVENT),),
        data_blocks=(DataBlock(data_id, metadata_id),),
    )


def make_response(reports: tuple[MonitoredLinkReport, ...]) -> StatusDocument:
    return StatusDocument(
        message_type=RESPONSE_TYPE,
        metadata_blocks=(MetadataBlock("meta1", PATH_STATUS_EVENT),),
        data_blocks=(DataBlock("data1", "meta1", tuple(reports)),),
    )


def is_soap_wrapped(raw: bytes | str) -> bool:
    """Cheap sniff for a SOAP envelope, used to answer in kind."""
    head = raw[:512]
    if isinstance(head, bytes):
        try:
            head = head.decode("utf-8", errors="replace")
        except Exception:  # pragma: no cover - decode with replace cannot fail
            return False
    return "Envelope" in head and SOAP_NS in head


def parse_status_document(raw: bytes | str) -> StatusDocument:
    """Parse a (possibly SOAP-wrapped) status document.

    Unknown extension elements are ignored. Raises MalformedXml,
    SchemaViolation or UnknownState; never anything else, regardless of
    input bytes.
    """
    if isinstance(raw, str):
        raw = raw.encode("utf-8")
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc

    message = _unwrap_message(root)
    message_type = message.get("type")
    if not message_type:
        raise SchemaViolation("message element lacks a type attribute")

    metadata_blocks: list[MetadataBlock] = []
    data_elements: list[ET.Element] = []
    seen_ids: set[str] = set()
    for child in message:
        if child.tag == _METADATA:
            metadata_blocks.append(_parse_metadata(child, seen_ids))
        elif child.tag == _DATA:
            block_id = _required_attr(child, "id")
            if block_id in seen_ids:
                raise SchemaViolation("duplicate block id %r" % block_id)
            seen_ids.add(block_id)
            data_elements.append(child)
        # anything else is an extension we do not understand: skip it

    by_id = {m.id: m for m in metadata_blocks}
    data_blocks = tuple(_parse_data(el, by_id) for el in data_elements)
    return StatusDocument(
        message_type=message_type,
        metadata_blocks=tuple(metadata_blocks),
        data_blocks=data_blocks,
    )


def _unwrap_message(root: ET.Element) -> ET.Element:
    if root.tag == _MESSAGE:
        return root
    if root.tag == _ENVELOPE:
        body = root.find(_BODY)
        if body is None:
            raise SchemaViolation("SOAP envelope without a Body element")
        message = body.find(_MESSAGE)
        if message is None:
            raise SchemaViolation("SOAP body does not carry an nmwg message")
        return message
    raise SchemaViolation("unexpected root element %r" % root.tag)


def _required_attr(element: ET.Element, name: str) -> str:
    value = element.get(name)
    if value is None or value == "":
        raise SchemaViolation(
            "element %r lacks required attribute %r" % (element.tag, name)
        )
    return value


def _parse_metadata(element: ET.Element, seen_ids: set[str]) -> MetadataBlock:
    block_id = _required_attr(element, "id")
    if block_id in seen_ids:
        raise SchemaViolation("duplicate block id %r" % block_id)
    seen_ids.add(block_id)
    event = element.find(_EVENT_TYPE)
    if event is None:
        raise SchemaViolation("metadata %r lacks an eventType element" % block_id)
    return MetadataBlock(id=block_id, event_type=(event.text or "").strip())


def _parse_data(element: ET.Element, metadata: dict[str, MetadataBlock]) -> DataBlock:
    block_id = element.get("id", "")
    ref = _required_attr(element, "metadataIdRef")
    meta = metadata.get(ref)
    if meta is None:
        raise SchemaViolation(
            "data block %r references missing metadata %r" % (block_id, ref)
        )
    reports: list[MonitoredLinkReport] = []
    if meta.event_type == PATH_STATUS_EVENT:
        for child in element:
            if child.tag == _DATUM:
                reports.append(_parse_datum(child))
            # unknown payload elements are extensions: ignored
    return DataBlock(id=block_id, metadata_ref=ref, reports=tuple(reports))


def _parse_datum(element: ET.Element) -> MonitoredLinkReport:
    values = {name: _required_attr(element, name) for name in _DATUM_ATTRS}
    try:
        link_type = MonitoredLinkType(values["linkType"])
    except ValueError:
        raise UnknownState("unsupported link type %r" % values["linkType"]) from None
    try:
        operational = OperationalState(values["operState"])
        administrative = AdministrativeState(values["adminState"])
    except ValueError as exc:
        raise UnknownState(str(exc)) from None
    try:
        timestamp = int(values["timestamp"])
    except ValueError:
        raise SchemaViolation(
            "timestamp %r is not an integer" % values["timestamp"]
        ) from None
    try:
        return MonitoredLinkReport(
            e2e_link_id=values["e2eLinkId"],
            link_type=link_type,
            dp_a=values["dpA"],
            dp_b=values["dpB"],
            reporting_domain=values["domain"],
            operational=operational,
            administrative=administrative,
            cycle_timestamp=timestamp,
        )
    except ValueError as exc:
        raise SchemaViolation(str(exc)) from exc


def emit_status_document(document: StatusDocument, soap: bool = False) -> bytes:
    """Serialize a document to canonical UTF-8 bytes.

    Raises InvariantViolation if the document breaks the structural rules
    (dangling metadata reference, duplicate block id, section reports under
    a non Path.Status metadata, unsupported message type).
    """
    _check_document(document)
    indent = "    " if soap else ""
    lines: list[str] = []
    lines.append(
        '%s<nmwg:message type=%s xmlns:nmwg=%s>'
        % (indent, quoteattr(document.message_type), quoteattr(NMWG_NS))
    )
    for meta in document.metadata_blocks:
        lines.append("%s  <nmwg:metadata id=%s>" % (indent, quoteattr(meta.id)))
        lines.append(
            "%s    <nmwg:eventType>%s</nmwg:eventType>"
            % (indent, escape(meta.event_type, {"\r": "&#13;"}))
        )
        lines.append("%s  </nmwg:metadata>" % indent)
    for block in document.data_blocks:
        open_attrs = "id=%s metadataIdRef=%s" % (
            quoteattr(block.id),
            quoteattr(block.metadata_ref),
        )
        if not block.reports:
            lines.append("%s  <nmwg:data %s/>" % (indent, open_attrs))
            continue
        lines.append("%s  <nmwg:data %s>" % (indent, open_attrs))
        for report in block.reports:
            lines.append("%s    %s" % (indent, _datum_line(report)))
        lines.append("%s  </nmwg:data>" % indent)
    lines.append("%s</nmwg:message>" % indent)

    if soap:
        lines = (
            [
                '<SOAP-ENV:Envelope xmlns:SOAP-ENV=%s>' % quoteattr(SOAP_NS),
                "  <SOAP-ENV:Body>",
            ]
            + lines
            + [
                "  </SOAP-ENV:Body>",
                "</SOAP-ENV:Envelope>",
            ]
        )
    body = "\n".join(lines)
    return ('<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n").encode("utf-8")


def _datum_line(report: MonitoredLinkReport) -> str:
    values = {
        "e2eLinkId": report.e2e_link_id,
        "linkType": report.link_type.value,
        "dpA": report.dp_a,
        "dpB": report.dp_b,
        "domain": report.reporting_domain,
        "operState": report.operational.value,
        "adminState": report.administrative.value,
        "timestamp": str(report.cycle_timestamp),
    }
    attrs = " ".join("%s=%s" % (name, quoteattr(values[name])) for name in _DATUM_ATTRS)
    return "<nmwg:datum %s/>" % attrs


def _check_document(document: StatusDocument) -> None:
    if document.message_type not in (REQUEST_TYPE, RESPONSE_TYPE):
        raise InvariantViolation(
            "unsupported message type %r" % document.message_type
        )
    seen: set[str] = set()
    for meta in document.metadata_blocks:
        if not meta.id:
            raise InvariantViolation("metadata block with empty id")
        if meta.id in seen:
            raise InvariantViolation("duplicate block id %r" % meta.id)
        seen.add(meta.id)
    by_id = {m.id: m for m in document.metadata_blocks}
    for block in document.data_blocks:
        if not block.id:
            raise InvariantViolation("data block with empty id")
        if block.id in seen:
            raise InvariantViolation("duplicate block id %r" % block.id)
        seen.add(block.id)
        meta = by_id.get(block.metadata_ref)
        if meta is None:
            raise InvariantViolation(
                "data block %r references missing metadata %r"
                % (block.id, block.metadata_ref)
            )
        if block.reports and meta.event_type != PATH_STATUS_EVENT:
            raise InvariantViolation(
                "data block %r carries section reports under event type %r"
                % (block.id, meta.event_type)
            )
