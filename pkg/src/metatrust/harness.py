"""Systematic metadata mutation and synthetic corpus generation.

Seed records carry GPS, a capture time and topic keywords drawn from a
small synonym lexicon. A mutation plan fixes, per channel, whether the
change is minor (GPS jitter <= 1 km, a few seconds, synonym paraphrase)
or major (relocation, calendar shift of >= 1 year, keywords swapped for a
different topic) and how large it is. The intention label follows from a
weighted severity of the three change intensities, so the level regions
are parallel slabs in delta space: contextual change weighs three times
as much as a spatial or temporal one (a contextual rewrite alone is
ill-intentioned, a pure time or place change is not).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tags as T
from .deltas import EARTH_RADIUS_KM, haversine_km, temporal_manhattan
from .errors import ChannelMissing, EmptyCorpus
from .intention import IntentionLevel
from .records import ImageServiceRecord, ServicePair, TimePoint, record_from_tags
from .text import tokenize

CHANNELS = ("spatial", "temporal", "contextual")
SEVERITY_WEIGHTS = (1.0, 1.0, 3.0)

# physical scale of intensity 1.0
SPATIAL_MAX_KM = 10_000.0
TEMPORAL_MAX_UNITS = 100

MINOR_SPATIAL_KM = 1.0
MINOR_TEMPORAL_UNITS = 5

# topic -> concepts -> synonyms
LEXICON = {
    "accident": [
        ("car", "vehicle", "automobile"),
        ("crash", "collision", "smashup"),
        ("road", "street", "highway"),
        ("injured", "hurt", "wounded"),
        ("police", "officers", "cops"),
        ("ambulance", "paramedics", "medics"),
        ("traffic", "congestion", "gridlock"),
        ("intersection", "junction", "crossroads"),
    ],
    "flood": [
        ("flood", "inundation", "deluge"),
        ("water", "floodwater", "torrent"),
        ("river", "stream", "creek"),
        ("rain", "downpour", "rainfall"),
        ("evacuation", "exodus", "displacement"),
        ("rescue", "lifesaving", "retrieval"),
        ("boat", "dinghy", "raft"),
        ("submerged", "underwater", "swamped"),
    ],
    "protest": [
        ("protest", "demonstration", "rally"),
        ("crowd", "throng", "multitude"),
        ("march", "parade", "procession"),
        ("banner", "placard", "signboard"),
        ("chant", "slogan", "cry"),
        ("square", "plaza", "piazza"),
        ("activists", "campaigners", "protesters"),
        ("speech", "address", "oration"),
    ],
    "wildfire": [
        ("fire", "blaze", "inferno"),
        ("smoke", "haze", "fumes"),
        ("forest", "woodland", "bushland"),
        ("firefighters", "firemen", "crews"),
        ("flames", "embers", "sparks"),
        ("burnt", "scorched", "charred"),
        ("helicopter", "chopper", "aircraft"),
        ("heatwave", "scorcher", "hotspell"),
    ],
    "concert": [
        ("concert", "gig", "recital"),
        ("stage", "platform", "podium"),
        ("singer", "vocalist", "performer"),
        ("audience", "spectators", "fans"),
        ("music", "tunes", "songs"),
        ("guitar", "bass", "drums"),
        ("lights", "spotlights", "lasers"),
        ("festival", "carnival", "fete"),
    ],
    "storm": [
        ("storm", "tempest", "gale"),
        ("wind", "gusts", "squall"),
        ("lightning", "thunderbolt", "bolt"),
        ("clouds", "overcast", "thunderheads"),
        ("hail", "sleet", "hailstones"),
        ("damage", "destruction", "wreckage"),
        ("trees", "branches", "limbs"),
        ("power", "electricity", "outage"),
    ],
}

CITIES = (
    ("Sydney", "Australia"),
    ("Melbourne", "Australia"),
    ("Auckland", "New Zealand"),
    ("Jakarta", "Indonesia"),
    ("Lagos", "Nigeria"),
    ("Lima", "Peru"),
    ("Toronto", "Canada"),
    ("Madrid", "Spain"),
    ("Mumbai", "India"),
    ("Nairobi", "Kenya"),
)


@dataclass(frozen=True)
class Lexicon:
    topics: dict

    def __post_init__(self):
        seen = {}
        for topic, concepts in self.topics.items():
            for ci, group in enumerate(concepts):
                for word in group:
                    if word in seen:
                        raise ValueError(f"word {word!r} appears in two concepts")
                    seen[word] = (topic, ci)
        object.__setattr__(self, "_where", seen)

    def topic_of(self, word):
        hit = self._where.get(word)
        return None if hit is None else hit[0]

    def concept_of(self, word):
        return self._where.get(word)

    def synonyms(self, word):
        hit = self._where.get(word)
        if hit is None:
            return ()
        return self.topics[hit[0]][hit[1]]

    @property
    def names(self):
        return tuple(sorted(self.topics))


DEFAULT_LEXICON = Lexicon(LEXICON)


def ideal_context_shift(k, n):
    """Cosine distance between a topic-pure document of n tokens and the same
    document with k tokens swapped for another topic, when each topic
    collapses onto one latent direction."""
    if n == 0:
        return 0.0
    if k <= 0:
        return 0.0
    if k >= n:
        return 1.0
    return 1.0 - (n - k) / math.hypot(n - k, k)


def severity(intensities) -> float:
    w = SEVERITY_WEIGHTS
    return sum(wi * intensities.get(ch, 0.0) for wi, ch in zip(w, CHANNELS)) / sum(w)


def level_for_severity(s, n_levels) -> IntentionLevel:
    """Equal-width severity bands -> ordinal 0..n_levels-1."""
    return IntentionLevel(min(n_levels - 1, max(0, int(math.floor(s * n_levels)))))


def level_center(level, n_levels) -> float:
    return (int(level) + 0.5) / n_levels


@dataclass(frozen=True)
class MutationPlan:
    magnitude: dict  # channel -> "minor" | "major"
    intensity: dict  # channel -> realized intensity in [0, 1]
    params: dict  # concrete knobs consumed by mutate()
    intent_label: IntentionLevel
    n_levels: int
    seed: int

    @property
    def channels(self):
        return tuple(ch for ch in CHANNELS if ch in self.magnitude)

    def __post_init__(self):
        if not self.magnitude:
            raise ValueError("a mutation plan touches at least one channel")
        expected = level_for_severity(severity(self.intensity), self.n_levels)
        if expected != self.intent_label:
            raise ValueError(f"label {self.intent_label.label} inconsistent with pattern table ({expected.label})")

    def to_dict(self):
        return {
            "magnitude": dict(sorted(self.magnitude.items())),
            "intensity": dict(sorted(self.intensity.items())),
            "params": dict(sorted(self.params.items())),
            "intent_label": int(self.intent_label),
            "n_levels": self.n_levels,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["magnitude"], d["intensity"], d["params"], IntentionLevel(d["intent_label"]), d["n_levels"], d["seed"])


# ------------------------------------------------------------- seed records

def _fmt_time(tp: TimePoint):
    return f"{tp.year:04d}:{tp.month:02d}:{tp.day:02d} {tp.hour:02d}:{tp.minute:02d}:{tp.second:02d}"


def synthesize_original(rid, rng, lexicon=DEFAULT_LEXICON, n_keywords=8, topic=None) -> ImageServiceRecord:
    topic = topic or lexicon.names[int(rng.integers(len(lexicon.names)))]
    concepts = lexicon.topics[topic]
    picks = rng.choice(len(concepts), size=min(n_keywords, len(concepts)), replace=False)
    words = [concepts[i][int(rng.integers(len(concepts[i])))] for i in sorted(picks)]
    city, country = CITIES[int(rng.integers(len(CITIES)))]
    lat = float(rng.uniform(-60.0, 70.0))
    lon = float(rng.uniform(-179.0, 179.0))
    tp = TimePoint(
        int(rng.integers(2005, 2023)),
        int(rng.integers(1, 13)),
        int(rng.integers(1, 29)),
        int(rng.integers(0, 24)),
        int(rng.integers(0, 60)),
        int(rng.integers(0, 60)),
    )
    tags = {
        T.ID: rid,
        T.GPS_LATITUDE: repr(round(lat, 6)),
        T.GPS_LONGITUDE: repr(round(lon, 6)),
        T.CITY: city,
        T.COUNTRY: country,
        T.DATETIME_ORIGINAL: _fmt_time(tp),
        T.DATETIME_DIGITIZED: _fmt_time(tp),
        T.OFFSET_TIME_ORIGINAL: "+00:00",
        T.OFFSET_TIME_DIGITIZED: "+00:00",
        T.KEYWORDS: "; ".join(words),
    }
    return record_from_tags(tags)


# ---------------------------------------------------------------- mutation

def destination(lat, lon, bearing_deg, dist_km, radius_km=EARTH_RADIUS_KM):
    """Point reached travelling ``dist_km`` along a great circle."""
    phi1, lam1, theta = math.radians(lat), math.radians(lon), math.radians(bearing_deg)
    delta = dist_km / radius_km
    phi2 = math.asin(math.sin(phi1) * math.cos(delta) + math.cos(phi1) * math.sin(delta) * math.cos(theta))
    lam2 = lam1 + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(phi1), math.cos(delta) - math.sin(phi1) * math.sin(phi2)
    )
    lon2 = (math.degrees(lam2) + 540.0) % 360.0 - 180.0
    return math.degrees(phi2), lon2


def shift_time(tp: TimePoint, budget: int, sign: int, rng, major: bool) -> TimePoint:
    """Move calendar components in one direction so that the Manhattan
    distance to ``tp`` equals ``budget`` exactly.

    Major shifts always move the year; minor shifts only touch seconds and
    minutes.
    """
    comps = list(tp.components())
    if not major:
        left = budget
        for idx in (5, 4):
            room = (59 - comps[idx]) if sign > 0 else comps[idx]
            step = min(room, left)
            comps[idx] += sign * step
            left -= step
        if left:
            raise ValueError("minor time budget exceeds available room")
        return TimePoint(*comps, utc_offset_minutes=tp.utc_offset_minutes)
    if budget < 1:
        raise ValueError("major time shift needs a budget of at least 1")
    # day kept <= 28 so month changes never invalidate the date
    lo = [None, 1, 1, 0, 0, 0]
    hi = [None, 12, 28, 23, 59, 59]
    shares = rng.dirichlet(np.ones(5)) * (budget - 1)
    moves = [1] + [int(math.floor(s)) for s in shares]
    for idx in range(1, 6):
        room = (hi[idx] - comps[idx]) if sign > 0 else (comps[idx] - lo[idx])
        room = max(0, room)
        if moves[idx] > room:
            moves[0] += moves[idx] - room
            moves[idx] = room
    moves[0] += budget - sum(moves)
    new = [comps[i] + sign * moves[i] for i in range(6)]
    return TimePoint(*new, utc_offset_minutes=tp.utc_offset_minutes)


def _context_words(record):
    return [w for w in record.contextual.keywords]


def make_plan(
    record: ImageServiceRecord,
    level,
    n_levels=4,
    seed=0,
    eta=0.5,
    lexicon=DEFAULT_LEXICON,
    paraphrase_rate=0.5,
    max_tries=10_000,
) -> MutationPlan:
    """Sample a plan whose severity lands within ``eta`` band-widths of the
    centre of ``level``'s band. ``eta`` = 0.5 fills the whole band."""
    level = IntentionLevel(level)
    rng = np.random.default_rng(seed)
    words = _context_words(record)
    n = len(words)
    topic = lexicon.topic_of(words[0]) if words else None
    others = [t for t in lexicon.names if t != topic]
    center = level_center(level, n_levels)
    half = eta / n_levels
    for _ in range(max_tries):
        major = rng.random(3) < 0.5
        magnitude, intensity, params = {}, {}, {}
        # spatial
        bearing = float(rng.uniform(0, 360))
        if major[0]:
            km = float(rng.uniform(0.01, 1.0)) * SPATIAL_MAX_KM
        else:
            km = float(rng.uniform(0.0, MINOR_SPATIAL_KM))
        magnitude["spatial"] = "major" if major[0] else "minor"
        params.update(bearing=bearing, spatial_km=km)
        intensity["spatial"] = km / SPATIAL_MAX_KM
        # temporal
        if major[1]:
            budget = int(rng.integers(1, TEMPORAL_MAX_UNITS + 1))
        else:
            budget = int(rng.integers(0, MINOR_TEMPORAL_UNITS + 1))
        magnitude["temporal"] = "major" if major[1] else "minor"
        params.update(time_budget=budget, time_sign=int(rng.choice([-1, 1])))
        intensity["temporal"] = budget / TEMPORAL_MAX_UNITS
        # contextual
        if n:
            if major[2]:
                k = int(rng.integers(1, n + 1))
                params.update(swap_count=k, swap_topic=others[int(rng.integers(len(others)))])
            else:
                k = 0
                params.update(swap_count=0, swap_topic="")
            params["paraphrase_rate"] = paraphrase_rate
            magnitude["contextual"] = "major" if major[2] else "minor"
            intensity["contextual"] = ideal_context_shift(k, n)
        s = severity(intensity)
        if abs(s - center) <= half and level_for_severity(s, n_levels) == level:
            return MutationPlan(magnitude, intensity, params, level, n_levels, seed)
    raise RuntimeError(f"could not sample a plan for level {level.label}")


def mutate(record: ImageServiceRecord, plan: MutationPlan, new_id=None, lexicon=DEFAULT_LEXICON):
    """Apply ``plan`` to ``record``; returns ``(modified, label)``."""
    rng = np.random.default_rng([plan.seed, 1])
    updates = {T.ID: new_id or f"{record.id}_m{plan.seed}"}
    p = plan.params
    if "spatial" in plan.magnitude:
        s = record.spatial
        if not s.has_gps:
            raise ChannelMissing(f"{record.id}: no GPS for spatial mutation")
        lat, lon = destination(s.gps_latitude, s.gps_longitude, p["bearing"], p["spatial_km"])
        updates[T.GPS_LATITUDE] = repr(lat)
        updates[T.GPS_LONGITUDE] = repr(lon)
        if plan.magnitude["spatial"] == "major":
            city, country = CITIES[int(rng.integers(len(CITIES)))]
            updates[T.CITY] = city
            updates[T.COUNTRY] = country
    if "temporal" in plan.magnitude:
        tp = record.temporal.datetime_original
        if tp is None:
            raise ChannelMissing(f"{record.id}: no DateTimeOriginal for temporal mutation")
        sign = p["time_sign"]
        major = plan.magnitude["temporal"] == "major"
        if not major:
            # pick the direction with room so the budget fits in seconds/minutes
            room_up = (59 - tp.second) + (59 - tp.minute)
            sign = 1 if room_up >= p["time_budget"] else -1
        new_tp = shift_time(tp, p["time_budget"], sign, rng, major)
        updates[T.DATETIME_ORIGINAL] = _fmt_time(new_tp)
        if record.temporal.date_digitized is not None:
            updates[T.DATETIME_DIGITIZED] = _fmt_time(new_tp)
    if "contextual" in plan.magnitude:
        words = _context_words(record)
        if not words:
            raise ChannelMissing(f"{record.id}: no keywords for contextual mutation")
        words = list(words)
        order = rng.permutation(len(words))
        k = p["swap_count"]
        swapped = set(order[:k].tolist())
        if k:
            concepts = lexicon.topics[p["swap_topic"]]
            picks = rng.choice(len(concepts), size=k, replace=k > len(concepts))
            for pos, ci in zip(sorted(swapped), picks):
                group = concepts[int(ci)]
                words[pos] = group[int(rng.integers(len(group)))]
        for pos in range(len(words)):
            if pos in swapped:
                continue
            if rng.random() < p.get("paraphrase_rate", 0.0):
                alts = [w for w in lexicon.synonyms(words[pos]) if w != words[pos]]
                if alts:
                    words[pos] = alts[int(rng.integers(len(alts)))]
        updates[T.KEYWORDS] = "; ".join(words)
    tags = dict(record.raw_tags)
    tags.update(updates)
    return record_from_tags(tags), plan.intent_label


def derive_intensities(original, modified, lexicon=DEFAULT_LEXICON) -> dict:
    """Recover change intensities from two records (closed-loop check)."""
    out = {}
    so, sm = original.spatial, modified.spatial
    if so.has_gps and sm.has_gps:
        out["spatial"] = haversine_km((so.gps_latitude, so.gps_longitude), (sm.gps_latitude, sm.gps_longitude)) / SPATIAL_MAX_KM
    to, tm = original.temporal.datetime_original, modified.temporal.datetime_original
    if to is not None and tm is not None:
        out["temporal"] = temporal_manhattan(to, tm) / TEMPORAL_MAX_UNITS
    wo = [w for w in original.contextual.keywords]
    wm = [w for w in modified.contextual.keywords]
    if wo:
        topic = lexicon.topic_of(tokenize(wo[0])[0])
        k = sum(1 for w in wm if lexicon.topic_of(w) != topic)
        out["contextual"] = ideal_context_shift(k, len(wm))
    return out


def derive_label(original, modified, n_levels=4, lexicon=DEFAULT_LEXICON) -> IntentionLevel:
    return level_for_severity(severity(derive_intensities(original, modified, lexicon)), n_levels)


# ------------------------------------------------------------------ corpora

@dataclass
class LabeledCorpus:
    originals: list
    pairs: list
    labels: list
    plans: list = field(default_factory=list)
    n_levels: int = 4

    @property
    def candidates(self):
        return [p.candidate for p in self.pairs]

    def __len__(self):
        return len(self.pairs)

    def subset(self, idx):
        idx = list(idx)
        return LabeledCorpus(
            self.originals,
            [self.pairs[i] for i in idx],
            [self.labels[i] for i in idx],
            [self.plans[i] for i in idx] if self.plans else [],
            self.n_levels,
        )


def generate_corpus(
    n_records=1000,
    n_levels=4,
    seed=0,
    n_originals=None,
    eta=0.5,
    paraphrase_rate=0.5,
    anchor_fraction=0.0,
    lexicon=DEFAULT_LEXICON,
    id_prefix="img",
    originals=None,
) -> LabeledCorpus:
    """Balanced labeled corpus of mutated records.

    Every record gets an independent child seed from ``seed``.
    ``anchor_fraction`` of the samples are unmodified copies labeled
    well-intention. ``originals`` replaces the synthesized seed records.
    """
    if not 2 <= n_levels <= 5:
        raise ValueError("n_levels must be within 2..5")
    root = np.random.SeedSequence(seed)
    orig_seq, plan_seq, mix_seq = root.spawn(3)
    if originals is None:
        n_originals = n_originals or max(1, n_records // 5)
        originals = [
            synthesize_original(f"{id_prefix}{i:04d}", np.random.default_rng(s), lexicon)
            for i, s in enumerate(orig_seq.spawn(n_originals))
        ]
    else:
        originals = sorted(originals, key=lambda r: r.id)
        n_originals = len(originals)
        if not n_originals:
            raise EmptyCorpus("no original records to mutate")
    mix = np.random.default_rng(mix_seq)
    levels = np.resize(np.arange(n_levels), n_records)
    mix.shuffle(levels)
    anchors = mix.random(n_records) < anchor_fraction
    pairs, labels, plans = [], [], []
    counters = [0] * n_originals
    for i, child in enumerate(plan_seq.spawn(n_records)):
        oi = i % n_originals
        orig = originals[oi]
        cid = f"{orig.id}_m{counters[oi]:03d}"
        counters[oi] += 1
        if anchors[i]:
            tags = dict(orig.raw_tags)
            tags[T.ID] = cid
            pairs.append(ServicePair(orig, record_from_tags(tags)))
            labels.append(IntentionLevel.WELL_INTENTION)
            plans.append(None)
            continue
        plan_seed = int(child.generate_state(1)[0])
        plan = make_plan(orig, int(levels[i]), n_levels, plan_seed, eta, lexicon, paraphrase_rate)
        modified, label = mutate(orig, plan, cid, lexicon)
        pairs.append(ServicePair(orig, modified))
        labels.append(label)
        plans.append(plan)
    return LabeledCorpus(originals, pairs, labels, plans, n_levels)
