"""Image-service data model: grouped metadata attributes, sidecar parsing,
validation and original/candidate pairing."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from types import MappingProxyType
from typing import Iterable, Mapping

from . import tags as T
from .errors import DuplicateId, MalformedInput, SchemaViolation

FORMATS = ("json-sidecar", "csv-row")


@dataclass(frozen=True, order=True)
class TimePoint:
    """Calendar components of one timestamp.

    When ``utc_offset_minutes`` is set the components have already been
    shifted to UTC and the field keeps the source offset. ``None`` marks a
    naive local time.
    """

    year: int
    month: int
    day: int
    hour: int = 0
    minute: int = 0
    second: int = 0
    utc_offset_minutes: int | None = field(default=None, compare=False)

    def __post_init__(self):
        try:
            self.to_datetime()
        except (ValueError, TypeError, OverflowError) as exc:
            raise ValueError(f"invalid time point {self.components()}: {exc}") from None
        if any(c < 0 for c in self.components()):
            raise ValueError(f"negative component in {self.components()}")

    def components(self):
        return (self.year, self.month, self.day, self.hour, self.minute, self.second)

    def to_datetime(self):
        return datetime(*self.components())

    @property
    def naive(self):
        return self.utc_offset_minutes is None

    @classmethod
    def from_datetime(cls, dt, utc_offset_minutes=None):
        return cls(dt.year, dt.month, dt.day, dt.hour, dt.minute, dt.second, utc_offset_minutes)


@dataclass(frozen=True)
class SpatialAttributes:
    gps_latitude: float | None = None
    gps_longitude: float | None = None
    gps_satellite: str | None = None
    city: str | None = None
    country: str | None = None
    state: str | None = None
    location: str | None = None

    @property
    def has_gps(self):
        return self.gps_latitude is not None and self.gps_longitude is not None


@dataclass(frozen=True)
class TemporalAttributes:
    datetime_original: TimePoint | None = None
    date_digitized: TimePoint | None = None
    gps_timestamp: TimePoint | None = None
    gps_datestamp: TimePoint | None = None
    timezone_offset: int | None = None


@dataclass(frozen=True)
class ContextualAttributes:
    title: str | None = None
    caption: str | None = None
    content_description: str | None = None
    headline: str | None = None
    image_description: str | None = None
    instructions: str | None = None
    weather_profile: str | None = None
    keywords: tuple[str, ...] = ()
    semantic_names: tuple[str, ...] = ()

    def texts(self):
        """All free-text values in a fixed order, absent fields skipped."""
        fields = (
            self.title,
            self.caption,
            self.content_description,
            self.headline,
            self.image_description,
            self.instructions,
            self.weather_profile,
        )
        return [f for f in fields if f] + list(self.keywords) + list(self.semantic_names)


@dataclass(frozen=True)
class IntrinsicAttributes:
    resolution: tuple[int, int] | None = None
    white_balance: str = "unknown"
    subject_distance: float | None = None
    camera_elevation_angle: float | None = None
    shutter_speed: float | None = None  # reciprocal rate, "1/200" -> 200
    exposure_time: float | None = None  # seconds
    coverage: str | None = None


@dataclass(frozen=True)
class ImageServiceRecord:
    id: str
    spatial: SpatialAttributes = SpatialAttributes()
    temporal: TemporalAttributes = TemporalAttributes()
    contextual: ContextualAttributes = ContextualAttributes()
    intrinsic: IntrinsicAttributes = IntrinsicAttributes()
    raw_tags: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_tags(cls, tags: Mapping[str, object]) -> "ImageServiceRecord":
        return record_from_tags(tags)

    def with_tags(self, **updates) -> "ImageServiceRecord":
        """Copy with tags replaced (``None`` deletes a tag), re-parsed."""
        tags = dict(self.raw_tags)
        for key, value in updates.items():
            if value is None:
                tags.pop(key, None)
            else:
                tags[key] = value
        tags[T.ID] = tags.get(T.ID, self.id)
        return record_from_tags(tags)


@dataclass(frozen=True)
class ServicePair:
    original: ImageServiceRecord
    candidate: ImageServiceRecord

    def __post_init__(self):
        if self.original.id == self.candidate.id:
            raise ValueError(f"original and candidate share id {self.original.id!r}")

    @property
    def id(self):
        return self.candidate.id


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str
    detail: str = ""


@dataclass(frozen=True)
class Finding:
    rule: str
    shutter_speed: float
    exposure_time: float
    deviation: float


# ---------------------------------------------------------------- parsing

_DT_RE = re.compile(
    r"^\s*(\d{4})[:\-/](\d{1,2})[:\-/](\d{1,2})"
    r"(?:[ T](\d{1,2}):(\d{1,2})(?::(\d{1,2})(?:\.\d+)?)?)?"
    r"\s*(Z|[+\-]\d{1,2}:?\d{2})?\s*$"
)
_TIME_RE = re.compile(r"^\s*(\d{1,2}):(\d{1,2})(?::(\d{1,2})(?:\.\d+)?)?\s*(?:Z|UTC)?\s*$")
_OFFSET_RE = re.compile(r"^\s*([+\-])?(\d{1,2}):?(\d{2})\s*$")
_RESOLUTION_RE = re.compile(r"^\s*(\d+)\s*[xX×*,]\s*(\d+)\s*$")
_NUMBER_RE = re.compile(r"^\s*([+\-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+\-]?\d+)?)\s*(?:m|s|sec|deg|°)?\s*$")


def _parse_offset(tag, text):
    """'+10:00', '-0530', 'Z' or signed integer minutes -> minutes."""
    text = text.strip()
    if text in ("Z", "UTC", "+00:00"):
        return 0
    if re.fullmatch(r"[+\-]?\d+", text) and ":" not in text and len(text.lstrip("+-")) <= 3:
        minutes = int(text)
    else:
        m = _OFFSET_RE.match(text)
        if not m:
            raise SchemaViolation(tag, f"unreadable UTC offset {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        minutes = sign * (int(m.group(2)) * 60 + int(m.group(3)))
    if abs(minutes) > 18 * 60:
        raise SchemaViolation(tag, f"UTC offset {minutes} min out of range")
    return minutes


def _parse_timepoint(tag, text, offset_minutes=None):
    m = _DT_RE.match(text)
    if not m:
        raise SchemaViolation(tag, f"unreadable date/time {text!r}")
    parts = [int(g) if g else 0 for g in m.groups()[:6]]
    if m.group(7):
        offset_minutes = _parse_offset(tag, m.group(7))
    try:
        dt = datetime(*parts)
    except ValueError as exc:
        raise SchemaViolation(tag, f"invalid calendar value {text!r}: {exc}") from None
    if offset_minutes is not None:
        dt = dt - timedelta(minutes=offset_minutes)
    return TimePoint.from_datetime(dt, offset_minutes)


def _parse_float(tag, text, lo=-math.inf, hi=math.inf, lo_open=False):
    m = _NUMBER_RE.match(text)
    if not m:
        raise SchemaViolation(tag, f"not a number: {text!r}")
    value = float(m.group(1))
    if not math.isfinite(value) or value < lo or value > hi or (lo_open and value == lo):
        raise SchemaViolation(tag, f"value {value} outside domain")
    return value


def _parse_rational(tag, text):
    """'1/200' or '0.005' -> float."""
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            num, den = float(num), float(den)
        except ValueError:
            raise SchemaViolation(tag, f"not a rational: {text!r}") from None
        if den == 0:
            raise SchemaViolation(tag, f"zero denominator in {text!r}")
        return num / den
    return _parse_float(tag, text)


def _parse_shutter(tag, text):
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            num, den = float(num), float(den)
        except ValueError:
            raise SchemaViolation(tag, f"not a rational: {text!r}") from None
        if num <= 0 or den <= 0:
            raise SchemaViolation(tag, f"shutter speed must be positive: {text!r}")
        return den / num
    value = _parse_float(tag, text)
    if value <= 0:
        raise SchemaViolation(tag, f"shutter speed must be positive: {text!r}")
    return value


def _split_list(text):
    parts = re.split(r"[;,]", text)
    return tuple(p.strip() for p in parts if p.strip())


def _white_balance(text):
    t = text.strip().lower()
    if t in ("auto", "0", "auto white balance"):
        return "auto"
    if t in ("manual", "1", "manual white balance"):
        return "manual"
    return "unknown"


def _text(value):
    if isinstance(value, (list, tuple)):
        return (T.LIST_SEPARATOR + " ").join(str(v) for v in value)
    if isinstance(value, float) and value.is_integer():
        return repr(value)
    return str(value)


def record_from_tags(tags: Mapping[str, object]) -> ImageServiceRecord:
    """Build a record from a flat tag map. Empty strings count as absent."""
    raw = {}
    for key, value in tags.items():
        if value is None:
            continue
        text = _text(value)
        if text.strip() == "":
            continue
        raw[str(key)] = text
    rid = raw.get(T.ID, "").strip()
    if not rid:
        raise SchemaViolation(T.ID, "missing or empty id")

    def get(tag):
        return raw.get(tag)

    lat = lon = None
    if get(T.GPS_LATITUDE) is not None:
        lat = _parse_float(T.GPS_LATITUDE, get(T.GPS_LATITUDE), -90.0, 90.0)
    if get(T.GPS_LONGITUDE) is not None:
        lon = _parse_float(T.GPS_LONGITUDE, get(T.GPS_LONGITUDE), -180.0, 180.0)
    spatial = SpatialAttributes(
        gps_latitude=lat,
        gps_longitude=lon,
        gps_satellite=get(T.GPS_SATELLITES),
        city=get(T.CITY),
        country=get(T.COUNTRY),
        state=get(T.STATE),
        location=get(T.LOCATION),
    )

    tz = _parse_offset(T.TIMEZONE_OFFSET, get(T.TIMEZONE_OFFSET)) if get(T.TIMEZONE_OFFSET) else None
    off_orig = (
        _parse_offset(T.OFFSET_TIME_ORIGINAL, get(T.OFFSET_TIME_ORIGINAL))
        if get(T.OFFSET_TIME_ORIGINAL)
        else tz
    )
    off_dig = (
        _parse_offset(T.OFFSET_TIME_DIGITIZED, get(T.OFFSET_TIME_DIGITIZED))
        if get(T.OFFSET_TIME_DIGITIZED)
        else tz
    )
    dto = _parse_timepoint(T.DATETIME_ORIGINAL, get(T.DATETIME_ORIGINAL), off_orig) if get(T.DATETIME_ORIGINAL) else None
    dtd = _parse_timepoint(T.DATETIME_DIGITIZED, get(T.DATETIME_DIGITIZED), off_dig) if get(T.DATETIME_DIGITIZED) else None
    gps_date = _parse_timepoint(T.GPS_DATESTAMP, get(T.GPS_DATESTAMP), 0) if get(T.GPS_DATESTAMP) else None
    gps_time = None
    if get(T.GPS_TIMESTAMP):
        text = get(T.GPS_TIMESTAMP)
        m = _TIME_RE.match(text)
        if m:
            # time-of-day only: GPS time is UTC, date comes from GPSDateStamp
            if gps_date is None:
                raise SchemaViolation(T.GPS_TIMESTAMP, "time-only GPS timestamp needs GPSDateStamp")
            try:
                gps_time = TimePoint(
                    gps_date.year, gps_date.month, gps_date.day,
                    int(m.group(1)), int(m.group(2)), int(m.group(3) or 0), 0,
                )
            except ValueError as exc:
                raise SchemaViolation(T.GPS_TIMESTAMP, str(exc)) from None
        else:
            gps_time = _parse_timepoint(T.GPS_TIMESTAMP, text, 0)
    temporal = TemporalAttributes(
        datetime_original=dto,
        date_digitized=dtd,
        gps_timestamp=gps_time,
        gps_datestamp=gps_date,
        timezone_offset=tz,
    )

    contextual = ContextualAttributes(
        title=get(T.TITLE),
        caption=get(T.CAPTION),
        content_description=get(T.CONTENT_DESCRIPTION),
        headline=get(T.HEADLINE),
        image_description=get(T.IMAGE_DESCRIPTION),
        instructions=get(T.INSTRUCTIONS),
        weather_profile=get(T.WEATHER_PROFILE),
        keywords=_split_list(get(T.KEYWORDS)) if get(T.KEYWORDS) else (),
        semantic_names=_split_list(get(T.SEMANTIC_NAMES)) if get(T.SEMANTIC_NAMES) else (),
    )

    resolution = None
    if get(T.RESOLUTION):
        m = _RESOLUTION_RE.match(get(T.RESOLUTION))
        if not m or int(m.group(1)) <= 0 or int(m.group(2)) <= 0:
            raise SchemaViolation(T.RESOLUTION, f"expected WIDTHxHEIGHT, got {get(T.RESOLUTION)!r}")
        resolution = (int(m.group(1)), int(m.group(2)))
    exposure = None
    if get(T.EXPOSURE_TIME):
        exposure = _parse_rational(T.EXPOSURE_TIME, get(T.EXPOSURE_TIME))
        if exposure <= 0:
            raise SchemaViolation(T.EXPOSURE_TIME, "exposure time must be positive")
    intrinsic = IntrinsicAttributes(
        resolution=resolution,
        white_balance=_white_balance(get(T.WHITE_BALANCE)) if get(T.WHITE_BALANCE) else "unknown",
        subject_distance=(
            _parse_float(T.SUBJECT_DISTANCE, get(T.SUBJECT_DISTANCE), 0.0) if get(T.SUBJECT_DISTANCE) else None
        ),
        camera_elevation_angle=(
            _parse_float(T.CAMERA_ELEVATION_ANGLE, get(T.CAMERA_ELEVATION_ANGLE), -90.0, 90.0)
            if get(T.CAMERA_ELEVATION_ANGLE)
            else None
        ),
        shutter_speed=_parse_shutter(T.SHUTTER_SPEED, get(T.SHUTTER_SPEED)) if get(T.SHUTTER_SPEED) else None,
        exposure_time=exposure,
        coverage=get(T.COVERAGE),
    )
    return ImageServiceRecord(
        id=rid,
        spatial=spatial,
        temporal=temporal,
        contextual=contextual,
        intrinsic=intrinsic,
        raw_tags=MappingProxyType(raw),
    )


def parse_sidecar(data: bytes, format: str = "json-sidecar") -> ImageServiceRecord:
    """Decode one sidecar (JSON object or CSV header + row) into a record."""
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    try:
        text = data.decode("utf-8-sig") if isinstance(data, (bytes, bytearray)) else data
    except UnicodeDecodeError as exc:
        raise MalformedInput(f"not UTF-8: {exc}") from None
    if format == "json-sidecar":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"invalid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise MalformedInput("JSON sidecar must be an object")
        for key, value in obj.items():
            if isinstance(value, (dict,)):
                raise MalformedInput(f"nested object under {key!r}; sidecars are flat")
        return record_from_tags(obj)
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if len(rows) != 2:
        raise MalformedInput(f"csv-row expects a header and exactly one row, got {len(rows)} rows")
    header, values = rows
    if len(header) != len(values):
        raise MalformedInput("csv header and row differ in length")
    return record_from_tags(dict(zip(header, values)))


def parse_csv_table(data: bytes) -> list[ImageServiceRecord]:
    """Multi-row CSV: header of canonical tag names, one record per row."""
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise MalformedInput(f"not UTF-8: {exc}") from None
    reader = csv.DictReader(io.StringIO(text))
    return [record_from_tags(row) for row in reader]


def serialize_sidecar(record: ImageServiceRecord, format: str = "json-sidecar") -> bytes:
    """Inverse of :func:`parse_sidecar`; keys are emitted in sorted order."""
    tags = dict(record.raw_tags)
    tags[T.ID] = record.id
    keys = sorted(tags)
    if format == "json-sidecar":
        return (json.dumps({k: tags[k] for k in keys}, ensure_ascii=False, sort_keys=True) + "\n").encode("utf-8")
    if format == "csv-row":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(keys)
        writer.writerow([tags[k] for k in keys])
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown format {format!r}")


# ------------------------------------------------------------- validation

def validate(record: ImageServiceRecord) -> list[Violation]:
    """Check type invariants; returns an empty list for a valid record."""
    out = []
    s = record.spatial
    if (s.gps_latitude is None) != (s.gps_longitude is None):
        present = T.GPS_LATITUDE if s.gps_latitude is not None else T.GPS_LONGITUDE
        out.append(Violation(present, "PairedGpsMissing", "GPS latitude and longitude must appear together"))
    if s.gps_latitude is not None and not -90.0 <= s.gps_latitude <= 90.0:
        out.append(Violation(T.GPS_LATITUDE, "GpsOutOfRange", str(s.gps_latitude)))
    if s.gps_longitude is not None and not -180.0 <= s.gps_longitude <= 180.0:
        out.append(Violation(T.GPS_LONGITUDE, "GpsOutOfRange", str(s.gps_longitude)))

    t = record.temporal
    if t.datetime_original is not None and t.date_digitized is not None:
        if t.date_digitized.to_datetime() < t.datetime_original.to_datetime():
            out.append(
                Violation(T.DATETIME_DIGITIZED, "DigitizedBeforeOriginal", "date digitized precedes original capture")
            )

    for tag, tokens in ((T.KEYWORDS, record.contextual.keywords), (T.SEMANTIC_NAMES, record.contextual.semantic_names)):
        if any(not tok.strip() for tok in tokens):
            out.append(Violation(tag, "EmptyKeyword"))

    i = record.intrinsic
    if i.subject_distance is not None and i.subject_distance < 0:
        out.append(Violation(T.SUBJECT_DISTANCE, "NegativeSubjectDistance"))
    if i.shutter_speed is not None and i.shutter_speed <= 0:
        out.append(Violation(T.SHUTTER_SPEED, "NonPositiveShutterSpeed"))
    if i.exposure_time is not None and i.exposure_time <= 0:
        out.append(Violation(T.EXPOSURE_TIME, "NonPositiveExposureTime"))
    if i.resolution is not None and min(i.resolution) <= 0:
        out.append(Violation(T.RESOLUTION, "NonPositiveResolution"))
    if i.white_balance not in ("auto", "manual", "unknown"):
        out.append(Violation(T.WHITE_BALANCE, "UnknownWhiteBalance", i.white_balance))
    return out


def naive_time_fields(record: ImageServiceRecord) -> list[str]:
    """Temporal tags whose time could not be normalized to UTC."""
    t = record.temporal
    pairs = ((T.DATETIME_ORIGINAL, t.datetime_original), (T.DATETIME_DIGITIZED, t.date_digitized))
    return [tag for tag, tp in pairs if tp is not None and tp.naive]


def intrinsic_consistency_lint(record: ImageServiceRecord, rel_tol: float = 0.10) -> list[Finding]:
    """Flag exposure times that disagree with the shutter speed.

    The shutter speed is stored as a rate, so the expected exposure time
    is its reciprocal.
    """
    i = record.intrinsic
    if i.shutter_speed is None or i.exposure_time is None:
        return []
    expected = 1.0 / i.shutter_speed
    deviation = abs(i.exposure_time - expected) / expected
    if deviation > rel_tol:
        return [Finding("ShutterExposureMismatch", i.shutter_speed, i.exposure_time, deviation)]
    return []


# ---------------------------------------------------------------- pairing

@dataclass(frozen=True)
class PairingRule:
    """``id-prefix``: candidate id = original id + separator + suffix.
    ``tag``: candidate carries the original's id under ``tag``."""

    mode: str = "id-prefix"
    separator: str = "_"
    tag: str = "OriginalId"


@dataclass
class Pairing:
    pairs: list[ServicePair]
    unmatched: list[str]


def _index(records: Iterable[ImageServiceRecord], what: str):
    index = {}
    for r in records:
        if r.id in index:
            raise DuplicateId(f"duplicate id {r.id!r} among {what}")
        index[r.id] = r
    return index


def pair_records(originals, candidates, key_rule: PairingRule = PairingRule()) -> Pairing:
    orig = _index(originals, "originals")
    cand = _index(candidates, "candidates")
    pairs, unmatched = [], []
    for cid in sorted(cand):
        c = cand[cid]
        match = None
        if key_rule.mode == "id-prefix":
            pieces = cid.split(key_rule.separator)
            # longest prefix wins so "a_b_m1" prefers original "a_b" over "a"
            for cut in range(len(pieces) - 1, 0, -1):
                prefix = key_rule.separator.join(pieces[:cut])
                if prefix in orig:
                    match = orig[prefix]
                    break
        elif key_rule.mode == "tag":
            key = c.raw_tags.get(key_rule.tag)
            match = orig.get(key) if key is not None else None
        else:
            raise ValueError(f"unknown pairing mode {key_rule.mode!r}")
        if match is None or match.id == cid:
            unmatched.append(cid)
        else:
            pairs.append(ServicePair(match, c))
    return Pairing(pairs, unmatched)
