"""Shared fixtures: corpus builders, random tag generators, and a local
capture-everything chat-completion server."""

from __future__ import annotations

import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from lexviol.bio import OUTSIDE, BioTag, EntityKind, EntitySpan, encode_spans
from lexviol.corpus import LegalDomain, NerRecord, NliLabel, NliRecord

KINDS = list(EntityKind)
ALL_TAGS = [OUTSIDE] + [BioTag.begin(k) for k in KINDS] + [BioTag.inside(k) for k in KINDS]


def random_spans(rng: random.Random, length: int, max_spans: int = 4) -> list[EntitySpan]:
    """Non-overlapping random spans over [0, length)."""
    spans = []
    cursor = 0
    for _ in range(rng.randint(0, max_spans)):
        if cursor >= length:
            break
        start = rng.randint(cursor, length - 1)
        end = rng.randint(start + 1, min(length, start + 5))
        spans.append(EntitySpan(rng.choice(KINDS), start, end))
        cursor = end
    return spans


def random_wellformed_tags(rng: random.Random, length: int) -> list[BioTag]:
    return encode_spans(random_spans(rng, length), length)


def random_tags(rng: random.Random, length: int) -> list[BioTag]:
    """Arbitrary tag sequence, ill-formed sequences included."""
    return [rng.choice(ALL_TAGS) for _ in range(length)]


def make_ner_record(rec_id: str, length: int = 5, tags: list[BioTag] | None = None,
                    coa: str | None = None, industry: str | None = None) -> NerRecord:
    if tags is None:
        tags = [OUTSIDE] * length
    tokens = tuple(f"tok{i}" for i in range(len(tags)))
    return NerRecord(id=rec_id, tokens=tokens, tags=tuple(tags),
                     cause_of_action=coa, industry=industry)


def make_nli_record(rec_id: str, domain: LegalDomain, label: NliLabel = NliLabel.NEUTRAL,
                    premise: str = "a premise", hypothesis: str = "a hypothesis") -> NliRecord:
    return NliRecord(id=rec_id, premise=premise, hypothesis=hypothesis,
                     label=label, domain=domain)


class _CaptureHandler(BaseHTTPRequestHandler):
    def do_POST(self):  # noqa: N802 (http.server API)
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length)) if length else {}
        record = {"path": self.path, "headers": dict(self.headers), "body": body}
        self.server.requests.append(record)
        status, payload = self.server.responder(record, len(self.server.requests))
        data = json.dumps(payload).encode("utf-8") if not isinstance(payload, bytes) else payload
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


def default_responder(record, n):
    return 200, {"choices": [{"message": {"content": "neutral"}}]}


@pytest.fixture
def chat_server():
    """Local chat-completion endpoint capturing every request payload.

    ``server.responder`` may be reassigned per test; it receives the captured
    request and the 1-based request count and returns (status, payload).
    """
    server = ThreadingHTTPServer(("127.0.0.1", 0), _CaptureHandler)
    server.requests = []
    server.responder = default_responder
    server.url = f"http://127.0.0.1:{server.server_address[1]}/v1/chat/completions"
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    thread.join(timeout=5)
