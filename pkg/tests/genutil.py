"""Seeded random artifact generators for property tests.

Generation is schema driven: every field of every kind can appear, optional
fields are sometimes dropped, and all produced documents parse cleanly.
"""

from __future__ import annotations

import random
from datetime import datetime, timezone

from auditflow.artifacts import (
    ArtifactDocument,
    ArtifactKind,
    ArtifactStatus,
    Choice,
    Count,
    Flag,
    Map,
    Principle,
    ProducerRole,
    Real,
    SCHEMAS,
    Seq,
    Str,
    make_artifact,
)

WORDS = (
    "booth", "camera", "model", "risk", "review", "consent", "group",
    "capture", "record", "policy", "signal", "trigger", "audit", "trail",
    "impact", "register", "test", "probe", "owner", "scope",
)

SAMPLE_PRINCIPLES = [
    Principle("transparency", "Transparency"),
    Principle("privacy", "Privacy"),
    Principle("safety", "Safety"),
]


def rand_text(rng: random.Random, lo: int = 1, hi: int = 6) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(lo, hi)))


def rand_slug(rng: random.Random, prefix: str = "id") -> str:
    return f"{prefix}-{rng.randrange(10 ** 8):08d}"


def rand_timestamp(rng: random.Random) -> str:
    stamp = datetime(
        2026,
        rng.randint(1, 12),
        rng.randint(1, 28),
        rng.randint(0, 23),
        rng.randint(0, 59),
        rng.randint(0, 59),
        tzinfo=timezone.utc,
    )
    return stamp.isoformat()


def gen_value(node, rng: random.Random):
    if isinstance(node, Str):
        return rand_text(rng)
    if isinstance(node, Flag):
        return rng.random() < 0.5
    if isinstance(node, Count):
        lo = node.lo if node.lo is not None else 0
        hi = node.hi if node.hi is not None else lo + 40
        return rng.randint(lo, hi)
    if isinstance(node, Real):
        lo = node.lo if node.lo is not None else -50.0
        hi = node.hi if node.hi is not None else 50.0
        return round(rng.uniform(lo, hi), 4)
    if isinstance(node, Choice):
        return rng.choice(node.values)
    if isinstance(node, Seq):
        return [gen_value(node.item, rng) for _ in range(rng.randint(0, 3))]
    if isinstance(node, Map):
        out = {}
        for name, child in node.fields.items():
            if rng.random() < 0.85:
                out[name] = gen_value(child, rng)
        return out
    raise TypeError(f"bad schema node {node!r}")


def random_body(kind: ArtifactKind, rng: random.Random) -> dict:
    return gen_value(SCHEMAS[kind], rng)


def random_artifact(kind: ArtifactKind, rng: random.Random) -> ArtifactDocument:
    return make_artifact(
        kind,
        rand_slug(rng, "art"),
        random_body(kind, rng),
        status=rng.choice((ArtifactStatus.DRAFT, ArtifactStatus.FINAL)),
        producer=rng.choice(tuple(ProducerRole)),
        version=rng.randint(1, 5),
        created_at=rand_timestamp(rng),
    )
