"""Canonical tokenizer and per-channel token extraction."""

import re

from .records import ImageServiceRecord

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

CHANNELS = ("spatial", "temporal", "contextual")


def tokenize(text):
    """Lowercase, split on Unicode word boundaries, drop punctuation and empties."""
    if not text:
        return []
    return _WORD_RE.findall(text.casefold())


def token_set(texts):
    out = set()
    for t in texts:
        out.update(tokenize(t))
    return out


def contextual_tokens(record: ImageServiceRecord):
    tokens = []
    for t in record.contextual.texts():
        tokens.extend(tokenize(t))
    return tokens


def spatial_tokens(record: ImageServiceRecord, grid_deg=0.1):
    s = record.spatial
    tokens = []
    for name, value in (("city", s.city), ("state", s.state), ("country", s.country), ("location", s.location)):
        for tok in tokenize(value):
            tokens.append(f"{name}-{tok}")
    if s.has_gps:
        lat_bin = int((s.gps_latitude + 90.0) // grid_deg)
        lon_bin = int((s.gps_longitude + 180.0) // grid_deg)
        tokens.append(f"cell-{lat_bin}-{lon_bin}")
    return tokens


def temporal_tokens(record: ImageServiceRecord):
    tp = record.temporal.datetime_original or record.temporal.date_digitized or record.temporal.gps_timestamp
    if tp is None:
        return []
    return [f"year-{tp.year}", f"month-{tp.month:02d}", f"day-{tp.day:02d}", f"hour-{tp.hour:02d}"]


def channel_tokens(record: ImageServiceRecord, channel):
    if channel == "contextual":
        return contextual_tokens(record)
    if channel == "spatial":
        return spatial_tokens(record)
    if channel == "temporal":
        return temporal_tokens(record)
    raise ValueError(f"unknown channel {channel!r}")
