"""Reading and writing corpora of originals, candidates and labels.

Two on-disk layouts are understood:

* a directory with ``originals/`` and ``candidates/`` sidecar folders and an
  optional ``labels.csv`` (``record_id,label``); a flat directory of
  sidecars is also accepted, in which case a record whose id extends
  another record's id is treated as a candidate;
* a JSON-lines file, one record per line:
  ``{"id": ..., "role": "original"|"candidate", "label": ..., "tags": {...}}``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MalformedInput, MetaTrustError
from .harness import LabeledCorpus
from .intention import IntentionLevel
from .records import PairingRule, ServicePair, pair_records, parse_sidecar, record_from_tags, serialize_sidecar, validate

log = logging.getLogger(__name__)

SIDECAR_SUFFIXES = {".json": "json-sidecar", ".csv": "csv-row"}
ROLES = ("original", "candidate")


class SkippedFile(UserWarning):
    pass


@dataclass
class Corpus:
    originals: list
    candidates: list
    labels: dict = field(default_factory=dict)  # candidate id -> IntentionLevel
    skipped: list = field(default_factory=list)  # (path, reason)
    manifest: dict = field(default_factory=dict)

    def pairing(self, rule=PairingRule()):
        return pair_records(self.originals, self.candidates, rule)

    def pairs(self, rule=PairingRule()):
        return self.pairing(rule).pairs

    @property
    def n_levels(self):
        if "n_levels" in self.manifest:
            return int(self.manifest["n_levels"])
        return max((int(l) for l in self.labels.values()), default=0) + 1

    def labeled(self, rule=PairingRule()) -> LabeledCorpus:
        pairs = self.pairs(rule)
        missing = [p.id for p in pairs if p.id not in self.labels]
        if missing:
            raise MalformedInput(f"{len(missing)} candidates lack labels, e.g. {missing[0]!r}")
        return LabeledCorpus(self.originals, pairs, [self.labels[p.id] for p in pairs], [], self.n_levels)

    def violations(self):
        out = {}
        for r in sorted(self.originals + self.candidates, key=lambda r: r.id):
            v = validate(r)
            if v:
                out[r.id] = [{"field": x.field, "rule": x.rule, "detail": x.detail} for x in v]
        return out

    @classmethod
    def from_labeled(cls, lc: LabeledCorpus, manifest=None):
        return cls(
            list(lc.originals),
            [p.candidate for p in lc.pairs],
            {p.id: IntentionLevel(l) for p, l in zip(lc.pairs, lc.labels)},
            [],
            dict(manifest or {"n_levels": lc.n_levels}),
        )


def _read_sidecars(folder: Path, strict: bool, skipped: list):
    records = []
    for path in sorted(folder.iterdir()):
        fmt = SIDECAR_SUFFIXES.get(path.suffix.lower())
        if fmt is None or not path.is_file():
            continue
        try:
            records.append(parse_sidecar(path.read_bytes(), fmt))
        except MetaTrustError as exc:
            if strict:
                raise MalformedInput(f"{path}: {exc}") from None
            skipped.append((str(path), str(exc)))
            warnings.warn(f"skipping {path}: {exc}", SkippedFile, stacklevel=3)
    return records


def parse_labels_csv(text) -> dict:
    out = {}
    for row in csv.DictReader(io.StringIO(text)):
        try:
            out[row["record_id"]] = IntentionLevel.parse(row["label"])
        except (KeyError, ValueError) as exc:
            raise MalformedInput(f"bad labels row {row}: {exc}") from None
    return out


def _split_flat(records):
    ids = {r.id for r in records}
    originals, candidates = [], []
    for r in records:
        pieces = r.id.split("_")
        is_cand = any("_".join(pieces[:cut]) in ids for cut in range(1, len(pieces)))
        (candidates if is_cand else originals).append(r)
    return originals, candidates


def read_directory(path, strict=False) -> Corpus:
    root = Path(path)
    skipped = []
    if (root / "originals").is_dir():
        originals = _read_sidecars(root / "originals", strict, skipped)
        cdir = root / "candidates"
        candidates = _read_sidecars(cdir, strict, skipped) if cdir.is_dir() else []
    else:
        originals, candidates = _split_flat(_read_sidecars(root, strict, skipped))
    labels = {}
    if (root / "labels.csv").is_file():
        labels = parse_labels_csv((root / "labels.csv").read_text(encoding="utf-8"))
    manifest = {}
    if (root / "manifest.json").is_file():
        manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    return Corpus(originals, candidates, labels, skipped, manifest)


def read_jsonl(path, strict=True) -> Corpus:
    return parse_jsonl(Path(path).read_text(encoding="utf-8"), strict)


def parse_jsonl(text, strict=True) -> Corpus:
    originals, candidates, labels, skipped = [], [], {}, []
    manifest = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            if obj.get("role") == "manifest":
                manifest = dict(obj.get("manifest", {}))
                continue
            role = obj.get("role")
            if role not in ROLES:
                raise MalformedInput(f"unknown role {role!r}")
            tags = dict(obj["tags"])
            rec = record_from_tags(tags)
            if role == "original":
                originals.append(rec)
            else:
                candidates.append(rec)
                if obj.get("label") is not None:
                    labels[rec.id] = IntentionLevel.parse(obj["label"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, MetaTrustError) as exc:
            if strict:
                raise MalformedInput(f"line {lineno}: {exc}") from None
            skipped.append((f"line {lineno}", str(exc)))
            warnings.warn(f"skipping line {lineno}: {exc}", SkippedFile, stacklevel=2)
    return Corpus(originals, candidates, labels, skipped, manifest)


def load_corpus(path, strict=False) -> Corpus:
    p = Path(path)
    if p.is_dir():
        return read_directory(p, strict)
    if not p.exists():
        raise MalformedInput(f"no such corpus: {path}")
    return read_jsonl(p, strict)


def corpus_to_jsonl(corpus: Corpus) -> str:
    lines = []
    if corpus.manifest:
        lines.append(json.dumps({"role": "manifest", "manifest": corpus.manifest}, sort_keys=True))
    for role, recs in (("original", corpus.originals), ("candidate", corpus.candidates)):
        for r in sorted(recs, key=lambda r: r.id):
            tags = dict(r.raw_tags)
            obj = {"id": r.id, "role": role, "tags": dict(sorted(tags.items()))}
            if role == "candidate" and r.id in corpus.labels:
                obj["label"] = int(corpus.labels[r.id])
            lines.append(json.dumps(obj, sort_keys=True, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def write_directory(corpus: Corpus, path):
    """Sidecar JSON files plus labels.csv and manifest.json."""
    root = Path(path)
    for sub, recs in (("originals", corpus.originals), ("candidates", corpus.candidates)):
        (root / sub).mkdir(parents=True, exist_ok=True)
        for r in recs:
            (root / sub / f"{r.id}.json").write_bytes(serialize_sidecar(r))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["record_id", "label", "label_name"])
    for rid in sorted(corpus.labels):
        lv = corpus.labels[rid]
        w.writerow([rid, int(lv), lv.label])
    (root / "labels.csv").write_text(buf.getvalue(), encoding="utf-8")
    (root / "manifest.json").write_text(json.dumps(corpus.manifest, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def corpus_manifest(corpus: Corpus) -> dict:
    counts = {}
    for lv in corpus.labels.values():
        counts[lv.label] = counts.get(lv.label, 0) + 1
    pairing = corpus.pairing()
    return {
        "originals": len(corpus.originals),
        "candidates": len(corpus.candidates),
        "pairs": len(pairing.pairs),
        "unmatched": pairing.unmatched,
        "labels": dict(sorted(counts.items())),
        "skipped": [{"path": p, "reason": r} for p, r in corpus.skipped],
        "violations": corpus.violations(),
    }


def load_sample_corpus() -> Corpus:
    """Small labeled corpus bundled with the package."""
    from importlib import resources

    text = resources.files("metatrust").joinpath("data", "sample_corpus.jsonl").read_text(encoding="utf-8")
    return parse_jsonl(text)


__all__ = [
    "Corpus",
    "SkippedFile",
    "ServicePair",
    "corpus_manifest",
    "corpus_to_jsonl",
    "load_corpus",
    "load_sample_corpus",
    "read_directory",
    "parse_jsonl",
    "read_jsonl",
    "write_directory",
]
