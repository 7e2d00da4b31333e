"""Masked-token prediction providers.

The augmentor only sees the small protocol here: a MaskRequest goes in,
ranked per-position candidates come out.  Two implementations ship with
the toolkit: an HTTP client for an external model service, and a
deterministic in-process unigram provider used for tests and offline runs.

Wire protocol (HTTP POST ``{base}/fill``, JSON both ways):

    request  {"tokens": [...], "mask_positions": [...], "top_n": 10}
    response {"candidates": [[{"token": "...", "score": 0.5}, ...], ...]}

Mask positions are whole-token indices; subword handling belongs to the
service behind the protocol, never to this client.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Protocol

import requests

from grafter.corpus import Corpus

logger = logging.getLogger(__name__)

DEFAULT_TOP_N = 10
DEFAULT_TIMEOUT = 30.0
PROVIDER_URL_ENV = "GRAFTER_FILLMASK_URL"


class ProviderError(RuntimeError):
    """Transport failure, timeout or malformed provider response."""


@dataclass(frozen=True)
class Candidate:
    token: str
    score: float


@dataclass(frozen=True)
class MaskRequest:
    """Tokens of one sentence plus the positions to predict."""

    tokens: tuple[str, ...]
    mask_positions: tuple[int, ...]
    top_n: int = DEFAULT_TOP_N

    def __post_init__(self) -> None:
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")
        prev = -1
        for pos in self.mask_positions:
            if not 0 <= pos < len(self.tokens):
                raise ValueError(f"mask position {pos} out of range")
            if pos <= prev:
                raise ValueError("mask positions must be strictly increasing")
            prev = pos

    def to_json(self) -> dict:
        return {
            "tokens": list(self.tokens),
            "mask_positions": list(self.mask_positions),
            "top_n": self.top_n,
        }


@dataclass(frozen=True)
class MaskResponse:
    """One ranked candidate list per requested mask position."""

    candidates: tuple[tuple[Candidate, ...], ...]

    @classmethod
    def from_json(cls, payload: dict) -> "MaskResponse":
        lists = payload["candidates"]
        return cls(
            tuple(
                tuple(Candidate(str(c["token"]), float(c["score"])) for c in lst)
                for lst in lists
            )
        )


def validate_response(request: MaskRequest, response: MaskResponse) -> None:
    """Enforce the provider contract; raises ProviderError on violation.

    One list per position; at most top_n candidates; scores nonnegative
    and non-increasing; candidate tokens nonempty without whitespace.
    Providers may echo the original token -- filtering is the caller's job.
    """
    if len(response.candidates) != len(request.mask_positions):
        raise ProviderError(
            f"expected {len(request.mask_positions)} candidate lists, "
            f"got {len(response.candidates)}"
        )
    for i, candidates in enumerate(response.candidates):
        if len(candidates) > request.top_n:
            raise ProviderError(f"position {i}: more than top_n candidates")
        prev = float("inf")
        for cand in candidates:
            if not cand.token or any(ch.isspace() for ch in cand.token):
                raise ProviderError(
                    f"position {i}: bad candidate token {cand.token!r}"
                )
            if cand.score < 0:
                raise ProviderError(f"position {i}: negative score")
            if cand.score > prev:
                raise ProviderError(f"position {i}: scores not non-increasing")
            prev = cand.score


class FillMaskProvider(Protocol):
    def fill(self, request: MaskRequest) -> MaskResponse: ...


class UnigramProvider:
    """Frequency-table provider: candidates are the most frequent O-tagged
    tokens of a training corpus, identical for every mask position.

    Deterministic and dependency-free; this is what the fast test suite
    and offline runs use instead of a language model.
    """

    def __init__(self, frequencies: dict[str, int]):
        total = sum(frequencies.values())
        ranked = sorted(frequencies.items(), key=lambda kv: (-kv[1], kv[0]))
        self._ranked: tuple[Candidate, ...] = tuple(
            Candidate(token, count / total) for token, count in ranked
        )

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "UnigramProvider":
        counts: Counter[str] = Counter(
            tok.text
            for sentence in corpus.sentences
            for tok in sentence.tokens
            if tok.tag.kind == "O"
        )
        if not counts:
            raise ValueError("corpus has no O-tagged tokens to build unigrams from")
        return cls(dict(counts))

    def fill(self, request: MaskRequest) -> MaskResponse:
        top = self._ranked[: request.top_n]
        return MaskResponse(tuple(top for _ in request.mask_positions))


class HttpFillMask:
    """Stateless client for the HTTP fill-mask protocol.

    No retries: augmentation is offline batch work, so a failed request
    surfaces as ProviderError and the driver skips that sample.
    """

    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT):
        self._url = base_url.rstrip("/") + "/fill"
        self._timeout = timeout

    def fill(self, request: MaskRequest) -> MaskResponse:
        body = json.dumps(request.to_json(), sort_keys=True, separators=(",", ":"))
        try:
            resp = requests.post(
                self._url,
                data=body.encode("utf-8"),
                headers={"Content-Type": "application/json"},
                timeout=self._timeout,
            )
        except requests.RequestException as exc:
            raise ProviderError(f"fill-mask request failed: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderError(
                f"fill-mask service returned {resp.status_code}: {resp.text[:200]}"
            )
        try:
            response = MaskResponse.from_json(resp.json())
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderError(f"malformed fill-mask response: {exc}") from exc
        validate_response(request, response)
        return response
