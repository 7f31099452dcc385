"""Surprisal scorers: HTTP client, deterministic mock, and in-process model.

All scorers share one interface — score(text) and score_many(texts) — and a
text→surprisal cache whose hits are returned bitwise-identically, so a warm
cache replays a build with zero service traffic. The wire protocol is an
HTTP POST of {"id": ..., "text": ...} answered by {"id": ..., "surprisal":
...}; a JSON array of such objects is the batch variant.
"""

from __future__ import annotations

import json
import time
import urllib.error
import urllib.request
from pathlib import Path

import numpy as np

from ..corpus.vocab import BOS_ID
from ..errors import ContractError, ProtocolError, ScoringError
from ..models.reps import sequence_logprob

_MAX_ATTEMPTS = 3


class BaseScorer:
    """Caching and batching shared by every scorer implementation."""

    def __init__(self, max_in_flight: int = 8):
        if max_in_flight < 1:
            raise ContractError(f"max_in_flight must be >= 1, got {max_in_flight}")
        self.max_in_flight = max_in_flight
        self.cache: dict[str, float] = {}
        self.n_service_calls = 0

    def _fetch(self, texts: list[str]) -> list[float]:
        raise NotImplementedError

    def _validate(self, text: str, value) -> float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ProtocolError(f"non-numeric surprisal {value!r} for {text!r}")
        value = float(value)
        if not np.isfinite(value) or value < 0:
            raise ProtocolError(f"invalid surprisal {value} for {text!r}")
        return value

    def score(self, text: str) -> float:
        return self.score_many([text])[0]

    def score_many(self, texts: list[str]) -> list[float]:
        for text in texts:
            if not isinstance(text, str) or not text.strip():
                raise ContractError("cannot score empty text")
        missing = []
        for text in texts:
            if text not in self.cache and text not in missing:
                missing.append(text)
        for start in range(0, len(missing), self.max_in_flight):
            chunk = missing[start : start + self.max_in_flight]
            values = self._fetch(chunk)
            if len(values) != len(chunk):
                raise ProtocolError(
                    f"scorer returned {len(values)} values for {len(chunk)} texts"
                )
            for text, value in zip(chunk, values):
                self.cache[text] = self._validate(text, value)
        return [self.cache[text] for text in texts]

    def save_cache(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.cache, fh, sort_keys=True, ensure_ascii=False, indent=0)
            fh.write("\n")

    def load_cache(self, path) -> None:
        if not Path(path).is_file():
            raise ContractError(f"scorer cache file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ProtocolError("scorer cache file must hold a JSON object")
        for text, value in loaded.items():
            self.cache[text] = self._validate(text, value)


class ScorerClient(BaseScorer):
    """Scores text against an HTTP surprisal service.

    Connection failures and timeouts are retried with exponential backoff
    up to 3 attempts; a reply that parses but violates the protocol
    (wrong id, missing field, negative surprisal) fails immediately.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = 30.0,
        max_in_flight: int = 8,
        retry_backoff: float = 0.5,
    ):
        super().__init__(max_in_flight)
        self.endpoint = endpoint
        self.timeout = timeout
        self.retry_backoff = retry_backoff
        self._next_id = 0

    def _post(self, payload) -> object:
        body = json.dumps(payload).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint,
            data=body,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        last_error: Exception | None = None
        for attempt in range(_MAX_ATTEMPTS):
            if attempt:
                time.sleep(self.retry_backoff * 2 ** (attempt - 1))
            try:
                self.n_service_calls += 1
                with urllib.request.urlopen(request, timeout=self.timeout) as reply:
                    raw = reply.read()
                break
            except (urllib.error.URLError, OSError) as exc:
                last_error = exc
        else:
            raise ScoringError(
                f"scoring service unreachable after {_MAX_ATTEMPTS} attempts: "
                f"{last_error}"
            )
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ProtocolError(f"scoring service sent unparseable JSON: {exc}")

    def _fetch(self, texts: list[str]) -> list[float]:
        items = []
        for text in texts:
            items.append({"id": str(self._next_id), "text": text})
            self._next_id += 1
        payload = items[0] if len(items) == 1 else items
        reply = self._post(payload)
        if isinstance(reply, dict):
            reply = [reply]
        if not isinstance(reply, list) or len(reply) != len(items):
            raise ProtocolError(
                f"expected {len(items)} scored items, got {reply!r}"
            )
        by_id = {}
        for obj in reply:
            if not isinstance(obj, dict) or "id" not in obj or "surprisal" not in obj:
                raise ProtocolError(f"malformed scored item {obj!r}")
            by_id[obj["id"]] = obj["surprisal"]
        values = []
        for item in items:
            if item["id"] not in by_id:
                raise ProtocolError(f"service reply missing id {item['id']!r}")
            values.append(by_id[item["id"]])
        return values


class MockScorer(BaseScorer):
    """Deterministic local scorer for tests and dry runs.

    `fn` maps text to a non-negative surprisal; the default is the text's
    character length.
    """

    def __init__(self, fn=None, max_in_flight: int = 8):
        super().__init__(max_in_flight)
        self.fn = fn if fn is not None else lambda text: float(len(text))

    def _fetch(self, texts: list[str]) -> list[float]:
        self.n_service_calls += 1
        return [float(self.fn(text)) for text in texts]


class InProcessScorer(BaseScorer):
    """Scores with a loaded model: surprisal = −(total sequence log-prob).

    With per_token=True the total is divided by the number of predicted
    tokens, for services that normalize by length.
    """

    def __init__(self, state, per_token: bool = False, max_in_flight: int = 64):
        super().__init__(max_in_flight)
        self.state = state
        self.per_token = per_token

    def surprisal(self, text: str) -> float:
        ids = self.state.vocab.encode(text)
        if not ids:
            raise ContractError(f"text {text!r} produced no tokens")
        tokens = np.asarray(
            ([BOS_ID] + ids)[: self.state.tcfg.max_seq_len], dtype=np.int64
        )
        total = -sequence_logprob(self.state, tokens)
        if self.per_token:
            total /= tokens.shape[0] - 1
        return max(total, 0.0)

    def _fetch(self, texts: list[str]) -> list[float]:
        self.n_service_calls += 1
        return [self.surprisal(text) for text in texts]
