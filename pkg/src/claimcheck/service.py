"""HTTP verification service: /verify, /claims/{id}, /policies, /chat (SSE).

Request bodies are parsed with exact decimal numbers (never through binary
floats), inline claims are scoped to their request, and chat responses are
always verified server-side after generation -- status never comes from
generator text.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from collections import OrderedDict
from dataclasses import dataclass
from decimal import Decimal
from typing import Any, AsyncIterator, Sequence

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse

from .claims import (
    Claim,
    ClaimIndex,
    ClaimIngestError,
    ClaimSet,
    claim_to_dict,
    claims_from_payload_doc,
    loads_exact,
)
from .crypto import TrustAnchor, claim_provenance_status
from .policy import PRESET_NAMES, PolicyError, PolicySpec, parse_policy, preset_policy
from .render import RenderOptions, render_html
from .verify import document_to_dict, summarize, verify_document

logger = logging.getLogger(__name__)

FALLBACK_RESPONSE = "I do not have scripted data for that question."

# Contract prepended in proxy mode so upstream models bind numbers to claims.
TAGGING_INSTRUCTIONS = (
    "Whenever you state a numeric value obtained from the data tools, wrap it "
    'in a claim tag exactly like <claim id="CLAIM_ID">VALUE</claim>, using the '
    "claim_id delivered alongside the value. Untagged numbers cannot be "
    "verified and will be shown without a verification mark."
)


class GeneratorUnavailable(RuntimeError):
    pass


@dataclass(frozen=True)
class MockScript:
    pattern: str
    response: str
    payload: Any = None

    def matches(self, message: str) -> bool:
        return re.search(self.pattern, message, re.IGNORECASE) is not None


DEFAULT_MOCK_SCRIPTS: tuple[MockScript, ...] = (
    MockScript(
        pattern=r"gdp.*philippines|philippines.*gdp",
        payload={
            "data": [
                {
                    "indicator_id": "NY.GDP.MKTP.KD.ZG",
                    "indicator_name": "GDP growth (annual %)",
                    "data": [
                        {
                            "country": "Philippines",
                            "date": "2024",
                            "value": Decimal("5.69201612823412"),
                            "claim_id": "0328",
                        }
                    ],
                }
            ],
            "note": {"NY.GDP.MKTP.KD.ZG": ""},
        },
        response=(
            "The GDP growth rate of the Philippines in 2024 is projected to be "
            '<claim id="0328">5.69%</claim> (annual %), according to the World '
            "Development Indicators."
        ),
    ),
)


def load_mock_scripts(data: bytes) -> tuple[MockScript, ...]:
    """Parse a mock script file: [{"pattern", "response", "payload"?}, ...]."""
    doc = loads_exact(data, what="mock script file")
    if not isinstance(doc, list):
        raise ClaimIngestError("mock script file must be a JSON array")
    scripts = []
    for position, raw in enumerate(doc):
        if not isinstance(raw, dict) or "pattern" not in raw or "response" not in raw:
            raise ClaimIngestError(
                f"script #{position}: each entry needs 'pattern' and 'response'"
            )
        scripts.append(
            MockScript(
                pattern=str(raw["pattern"]),
                response=str(raw["response"]),
                payload=raw.get("payload"),
            )
        )
    return tuple(scripts)


class MockGenerator:
    """Replays scripted (pattern -> claims payload + response text) pairs."""

    def __init__(self, scripts: Sequence[MockScript] = DEFAULT_MOCK_SCRIPTS) -> None:
        self.scripts = tuple(scripts)

    def generate(self, message: str) -> tuple[str, ClaimSet]:
        for script in self.scripts:
            if script.matches(message):
                claims = (
                    claims_from_payload_doc(script.payload, source_descriptor="mock-generator")
                    if script.payload is not None
                    else ClaimSet(claims=(), source_descriptor="mock-generator")
                )
                return script.response, claims
        return FALLBACK_RESPONSE, ClaimSet(claims=(), source_descriptor="mock-generator")


class ProxyGenerator:
    """Forwards to a chat-completions-compatible endpoint with the tag contract."""

    def __init__(self, url: str, model: str = "default", timeout: float = 60.0) -> None:
        self.url = url
        self.model = model
        self.timeout = timeout

    def generate(self, message: str) -> tuple[str, ClaimSet]:
        import httpx

        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": TAGGING_INSTRUCTIONS},
                {"role": "user", "content": message},
            ],
        }
        try:
            response = httpx.post(self.url, json=body, timeout=self.timeout)
            response.raise_for_status()
            content = response.json()["choices"][0]["message"]["content"]
        except Exception as exc:
            raise GeneratorUnavailable(f"upstream generator failed: {exc}") from exc
        return str(content), ClaimSet(claims=(), source_descriptor="proxy-generator")


class SessionStore:
    """Per-session claim registries with LRU eviction.

    Mirrors the chat aggregation behavior: re-registering a claim_id within a
    session replaces the previous entry (tool messages may refresh claims).
    """

    def __init__(self, capacity: int = 64) -> None:
        self._sessions: OrderedDict[str, dict[str, Claim]] = OrderedDict()
        self._capacity = capacity
        self._lock = threading.Lock()

    def register(self, session_id: str, claims: ClaimSet) -> tuple[Claim, ...]:
        with self._lock:
            store = self._sessions.setdefault(session_id, {})
            for claim in claims:
                store[claim.claim_id] = claim
            self._sessions.move_to_end(session_id)
            while len(self._sessions) > self._capacity:
                self._sessions.popitem(last=False)
            return tuple(store.values())

    def lookup(self, claim_id: str) -> Claim | None:
        with self._lock:
            for store in reversed(self._sessions.values()):
                if claim_id in store:
                    return store[claim_id]
        return None


def _sse_event(event: str, data: Any) -> str:
    return f"event: {event}\ndata: {json.dumps(data)}\n\n"


def _chunks(text: str, size: int = 48) -> list[str]:
    return [text[i : i + size] for i in range(0, len(text), size)] or [""]


def create_app(
    claims: ClaimSet | None = None,
    policy: PolicySpec | None = None,
    anchors: Sequence[TrustAnchor] = (),
    generator: MockGenerator | ProxyGenerator | None = None,
    session_capacity: int = 64,
    extra_policies: dict[str, PolicySpec] | None = None,
) -> FastAPI:
    """Build the verification service around a claim store and default policy.

    extra_policies register additional named policies clients may select by
    name (listed by GET /policies alongside the built-in presets).
    """
    server_claims: dict[str, Claim] = (
        {claim.claim_id: claim for claim in claims} if claims is not None else {}
    )
    default_policy = policy or preset_policy("strict")
    named_policies = dict(extra_policies or {})
    sessions = SessionStore(capacity=session_capacity)
    app = FastAPI(title="claimcheck", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def resolve_policy(raw: Any) -> PolicySpec:
        if raw is None:
            return default_policy
        try:
            if isinstance(raw, str):
                if raw in named_policies:
                    return named_policies[raw]
                return parse_policy(raw)
            if isinstance(raw, dict):
                return parse_policy(json.dumps(raw, default=str))
        except PolicyError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        raise HTTPException(status_code=400, detail="policy must be a name or an object")

    async def read_body(request: Request) -> Any:
        try:
            return loads_exact(await request.body(), what="request body")
        except ClaimIngestError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    def verify_payload_text(
        text: str, extra_claims: tuple[Claim, ...], active_policy: PolicySpec
    ) -> dict[str, Any]:
        merged = dict(server_claims)
        merged.update({claim.claim_id: claim for claim in extra_claims})
        index = ClaimIndex(merged, source_descriptor="service")
        doc = verify_document(text, index, active_policy, anchors=anchors)
        return {
            "annotated_html": render_html(doc, RenderOptions(format="html")),
            "annotated_json": document_to_dict(doc),
            "report": summarize(doc).to_dict(),
        }

    @app.get("/policies")
    def get_policies() -> dict[str, Any]:
        names = list(PRESET_NAMES) + [n for n in named_policies if n not in PRESET_NAMES]
        return {"presets": names, "active": default_policy.name}

    @app.post("/verify")
    async def post_verify(request: Request) -> dict[str, Any]:
        body = await read_body(request)
        if not isinstance(body, dict) or not isinstance(body.get("text"), str):
            raise HTTPException(status_code=400, detail="body must include a 'text' string")
        active_policy = resolve_policy(body.get("policy"))
        extra: tuple[Claim, ...] = ()
        if body.get("claims") is not None:
            try:
                extra = claims_from_payload_doc(
                    body["claims"], source_descriptor="inline"
                ).claims
            except ClaimIngestError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
        return verify_payload_text(body["text"], extra, active_policy)

    @app.get("/claims/{claim_id}")
    def get_claim(claim_id: str) -> dict[str, Any]:
        # sessions shadow the server store, matching the chat verification view
        claim = sessions.lookup(claim_id) or server_claims.get(claim_id)
        if claim is None:
            raise HTTPException(status_code=404, detail=f"unknown claim {claim_id!r}")
        out = claim_to_dict(claim)
        if anchors:
            out["provenance"] = claim_provenance_status(claim, anchors)
        return out

    @app.post("/chat")
    async def post_chat(request: Request) -> StreamingResponse:
        if generator is None:
            raise HTTPException(status_code=503, detail="no generator configured")
        body = await read_body(request)
        if not isinstance(body, dict) or not str(body.get("message", "")):
            raise HTTPException(status_code=400, detail="body must include a 'message'")
        message = str(body["message"])
        session_id = str(body.get("session_id") or "default")
        active_policy = resolve_policy(body.get("policy"))
        try:
            response_text, new_claims = generator.generate(message)
        except GeneratorUnavailable as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc
        session_claims = sessions.register(session_id, new_claims)
        result = verify_payload_text(response_text, session_claims, active_policy)
        bare = result["report"]["bare"]
        if bare:
            logger.info("generator response contains %d untagged numeric spans", bare)

        async def stream() -> AsyncIterator[str]:
            for chunk in _chunks(response_text):
                yield _sse_event("delta", {"text": chunk})
            yield _sse_event("final", result)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
