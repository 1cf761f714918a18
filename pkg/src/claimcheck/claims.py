"""Claim schema, claim-set ingestion, and the identifier index.

Claim values are arbitrary-precision decimals end to end: they are parsed
straight from the JSON text (never through a binary float) and serialized
back as decimal strings, so exact-match verification cannot drift.
"""

from __future__ import annotations

import base64
import decimal
import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from types import MappingProxyType
from typing import Any, Iterator, Mapping

CLAIM_FILE_VERSION = 1

# Units a claim may declare; the empty string means "no unit recorded".
DEFAULT_UNIT_TABLE = frozenset(
    {"%", "USD", "EUR", "GBP", "JPY", "CNY", "PHP", "INR", "people", "years"}
)

# Sanity bound on decimal magnitude (10^±100000): keeps downstream exact
# arithmetic within safe exponent ranges without limiting real data.
MAX_DECIMAL_MAGNITUDE = 100_000


class ClaimIngestError(ValueError):
    """Claim data failed validation; the message names the offending claim or offset."""


def parse_decimal(raw: Any, *, context: str) -> Decimal:
    """Parse a JSON scalar into a finite Decimal without a float round-trip."""
    if isinstance(raw, bool) or raw is None:
        raise ClaimIngestError(f"{context}: value is not numeric: {raw!r}")
    if isinstance(raw, float):
        # Guard against callers that bypassed parse_float=Decimal.
        raise ClaimIngestError(f"{context}: value arrived as binary float; exactness lost")
    try:
        value = raw if isinstance(raw, Decimal) else Decimal(str(raw).strip())
    except InvalidOperation as exc:
        raise ClaimIngestError(f"{context}: value is not a decimal: {raw!r}") from exc
    if not value.is_finite():
        raise ClaimIngestError(f"{context}: value must be finite, got {raw!r}")
    if not value.is_zero() and abs(value.adjusted()) > MAX_DECIMAL_MAGNITUDE:
        raise ClaimIngestError(f"{context}: value magnitude out of range: {raw!r}")
    return value


def canonical_value(value: Decimal) -> str:
    """Canonical plain-text form of a decimal: no exponent, no trailing zeros.

    "5.7", "5.70", and "5.7E0" all canonicalize to "5.7"; any zero becomes "0".
    Lossless at any precision (normalize alone would round to the context).
    """
    if value.is_zero():
        return "0"
    with decimal.localcontext() as ctx:
        ctx.prec = max(len(value.as_tuple().digits), 28)
        return format(value.normalize(), "f")


@dataclass(frozen=True)
class MerkleProof:
    """Inclusion proof for one claim leaf; siblings are (hash, side) bottom-up."""

    leaf_index: int
    siblings: tuple[tuple[bytes, str], ...]
    root: bytes
    root_signature: bytes | None = None

    def __post_init__(self) -> None:
        if self.leaf_index < 0:
            raise ValueError("leaf_index must be non-negative")
        for digest, side in self.siblings:
            if side not in ("left", "right"):
                raise ValueError(f"sibling side must be 'left' or 'right', got {side!r}")
            if len(digest) != 32:
                raise ValueError("sibling hash must be 32 bytes")
        if len(self.root) != 32:
            raise ValueError("root hash must be 32 bytes")


@dataclass(frozen=True)
class Claim:
    """One authoritative structured fact keyed by an opaque claim_id."""

    claim_id: str
    indicator: str = ""
    entity: str = ""
    time: str = ""
    value: Decimal = Decimal(0)
    unit: str = ""
    metadata: Mapping[str, str] = field(default_factory=dict)
    signature: bytes | None = None
    algorithm: str | None = None
    merkle_proof: MerkleProof | None = None

    def __post_init__(self) -> None:
        if not self.claim_id:
            raise ClaimIngestError("claim_id must be non-empty")
        if not isinstance(self.value, Decimal) or not self.value.is_finite():
            raise ClaimIngestError(f"claim {self.claim_id!r}: value must be a finite decimal")
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))


@dataclass(frozen=True)
class ClaimSet:
    """Ordered collection of claims with unique claim_ids."""

    claims: tuple[Claim, ...]
    source_descriptor: str = ""

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for claim in self.claims:
            if claim.claim_id in seen:
                raise ClaimIngestError(f"duplicate claim_id {claim.claim_id!r}")
            seen.add(claim.claim_id)

    def __len__(self) -> int:
        return len(self.claims)

    def __iter__(self) -> Iterator[Claim]:
        return iter(self.claims)


class ClaimIndex:
    """Immutable claim_id -> Claim map giving constant-time span lookups."""

    def __init__(self, claims: Mapping[str, Claim], source_descriptor: str = "") -> None:
        self._by_id = MappingProxyType(dict(claims))
        self.source_descriptor = source_descriptor

    def get(self, claim_id: str) -> Claim | None:
        return self._by_id.get(claim_id)

    def __contains__(self, claim_id: str) -> bool:
        return claim_id in self._by_id

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self) -> Iterator[Claim]:
        return iter(self._by_id.values())


def index_claims(claim_set: ClaimSet) -> ClaimIndex:
    """Index a claim set by claim_id (duplicates were rejected at ingestion)."""
    return ClaimIndex(
        {claim.claim_id: claim for claim in claim_set},
        source_descriptor=claim_set.source_descriptor,
    )


def loads_exact(data: bytes, *, what: str = "document") -> Any:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ClaimIngestError(f"{what} is not UTF-8 at byte {exc.start}") from exc

    def _reject_constant(name: str) -> Any:
        raise ClaimIngestError(f"{what} contains non-finite number {name}")

    try:
        return json.loads(text, parse_float=Decimal, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ClaimIngestError(f"{what} is malformed JSON at offset {exc.pos}: {exc.msg}") from exc


def _parse_metadata(raw: Any, *, context: str) -> dict[str, str]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ClaimIngestError(f"{context}: metadata must be an object")
    meta: dict[str, str] = {}
    for key, value in raw.items():
        if not isinstance(key, str):
            raise ClaimIngestError(f"{context}: metadata keys must be strings")
        meta[key] = value if isinstance(value, str) else str(value)
    return meta


def _parse_merkle_proof(raw: Any, *, context: str) -> MerkleProof:
    if not isinstance(raw, dict):
        raise ClaimIngestError(f"{context}: merkle_proof must be an object")
    try:
        siblings = tuple(
            (bytes.fromhex(entry["hash"]), entry["side"]) for entry in raw.get("siblings", [])
        )
        proof = MerkleProof(
            leaf_index=int(raw["leaf_index"]),
            siblings=siblings,
            root=bytes.fromhex(raw["root"]),
            root_signature=(
                base64.b64decode(raw["root_signature"]) if raw.get("root_signature") else None
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ClaimIngestError(f"{context}: invalid merkle_proof: {exc}") from exc
    return proof


def _parse_claim_entry(raw: Any, *, position: int, units: frozenset[str]) -> Claim:
    if not isinstance(raw, dict):
        raise ClaimIngestError(f"claim #{position}: entry must be an object")
    claim_id = raw.get("claim_id")
    if not isinstance(claim_id, str) or not claim_id:
        raise ClaimIngestError(f"claim #{position}: claim_id must be a non-empty string")
    context = f"claim {claim_id!r}"
    if "value" not in raw:
        raise ClaimIngestError(f"{context}: missing value")
    value = parse_decimal(raw["value"], context=context)
    unit = raw.get("unit", "")
    if not isinstance(unit, str):
        raise ClaimIngestError(f"{context}: unit must be a string")
    if unit and unit not in units:
        raise ClaimIngestError(f"{context}: unknown unit {unit!r}")
    signature_b64 = raw.get("signature")
    signature = None
    if signature_b64 is not None:
        try:
            signature = base64.b64decode(signature_b64, validate=True)
        except (ValueError, TypeError) as exc:
            raise ClaimIngestError(f"{context}: signature is not valid base64") from exc
    merkle_raw = raw.get("merkle_proof")
    return Claim(
        claim_id=claim_id,
        indicator=str(raw.get("indicator", "")),
        entity=str(raw.get("entity", "")),
        time=str(raw.get("time", "")),
        value=value,
        unit=unit,
        metadata=_parse_metadata(raw.get("metadata"), context=context),
        signature=signature,
        algorithm=raw.get("algorithm"),
        merkle_proof=(
            _parse_merkle_proof(merkle_raw, context=context) if merkle_raw is not None else None
        ),
    )


def parse_claim_file(
    data: bytes,
    *,
    source_descriptor: str = "claim-file",
    units: frozenset[str] = DEFAULT_UNIT_TABLE,
) -> ClaimSet:
    """Parse the canonical claim file: {"version": 1, "claims": [...]}."""
    doc = loads_exact(data, what="claim file")
    if not isinstance(doc, dict):
        raise ClaimIngestError("claim file must be a JSON object")
    version = doc.get("version", CLAIM_FILE_VERSION)
    if version != CLAIM_FILE_VERSION:
        raise ClaimIngestError(f"unsupported claim file version {version!r}")
    raw_claims = doc.get("claims")
    if not isinstance(raw_claims, list):
        raise ClaimIngestError("claim file must contain a 'claims' array")
    claims: list[Claim] = []
    seen: set[str] = set()
    for position, raw in enumerate(raw_claims):
        claim = _parse_claim_entry(raw, position=position, units=units)
        if claim.claim_id in seen:
            raise ClaimIngestError(f"duplicate claim_id {claim.claim_id!r}")
        seen.add(claim.claim_id)
        claims.append(claim)
    return ClaimSet(claims=tuple(claims), source_descriptor=source_descriptor)


def ingest_retriever_payload(
    data: bytes,
    *,
    source_descriptor: str = "retriever-payload",
) -> ClaimSet:
    """Flatten a nested retriever payload into a ClaimSet.

    Expected shape: {"data": [{"indicator_id": ..., "data": [{"country", "date",
    "value", "claim_id"}, ...]}, ...]}. Entries without a claim_id are skipped;
    they could never verify anything.
    """
    doc = loads_exact(data, what="retriever payload")
    return claims_from_payload_doc(doc, source_descriptor=source_descriptor)


def claims_from_payload_doc(
    doc: Any,
    *,
    source_descriptor: str = "retriever-payload",
) -> ClaimSet:
    """Ingest an already-parsed retriever payload.

    The document must have been parsed with parse_float=Decimal (as loads_exact
    does); numeric values must never pass through a binary float.
    """
    if not isinstance(doc, dict) or not isinstance(doc.get("data"), list):
        raise ClaimIngestError("retriever payload must be an object with a 'data' array")
    claims: list[Claim] = []
    seen: set[str] = set()
    for indicator in doc["data"]:
        if not isinstance(indicator, dict):
            raise ClaimIngestError("retriever payload: indicator entries must be objects")
        indicator_id = str(indicator.get("indicator_id", ""))
        rows = indicator.get("data", [])
        if not isinstance(rows, list):
            raise ClaimIngestError(
                f"retriever payload: indicator {indicator_id!r} 'data' must be an array"
            )
        metadata = {}
        if indicator.get("indicator_name"):
            metadata["indicator_name"] = str(indicator["indicator_name"])
        for row in rows:
            if not isinstance(row, dict):
                raise ClaimIngestError("retriever payload: data rows must be objects")
            claim_id = row.get("claim_id")
            if not claim_id:
                continue
            claim_id = str(claim_id)
            value = parse_decimal(row.get("value"), context=f"claim {claim_id!r}")
            if claim_id in seen:
                raise ClaimIngestError(f"duplicate claim_id {claim_id!r}")
            seen.add(claim_id)
            claims.append(
                Claim(
                    claim_id=claim_id,
                    indicator=indicator_id,
                    entity=str(row.get("country", "")),
                    time=str(row.get("date", "")),
                    value=value,
                    unit="",
                    metadata=metadata,
                )
            )
    return ClaimSet(claims=tuple(claims), source_descriptor=source_descriptor)


def claim_to_dict(claim: Claim) -> dict[str, Any]:
    """JSON-ready dict for one claim; the value rides as an exact decimal string."""
    out: dict[str, Any] = {
        "claim_id": claim.claim_id,
        "indicator": claim.indicator,
        "entity": claim.entity,
        "time": claim.time,
        "value": str(claim.value),
        "unit": claim.unit,
    }
    if claim.metadata:
        out["metadata"] = dict(claim.metadata)
    if claim.signature is not None:
        out["signature"] = base64.b64encode(claim.signature).decode("ascii")
    if claim.algorithm is not None:
        out["algorithm"] = claim.algorithm
    if claim.merkle_proof is not None:
        proof = claim.merkle_proof
        out["merkle_proof"] = {
            "leaf_index": proof.leaf_index,
            "siblings": [
                {"hash": digest.hex(), "side": side} for digest, side in proof.siblings
            ],
            "root": proof.root.hex(),
        }
        if proof.root_signature is not None:
            out["merkle_proof"]["root_signature"] = base64.b64encode(
                proof.root_signature
            ).decode("ascii")
    return out


def serialize_claim_set(claim_set: ClaimSet) -> bytes:
    """Serialize to the canonical claim file format (round-trips exactly)."""
    doc = {
        "version": CLAIM_FILE_VERSION,
        "claims": [claim_to_dict(claim) for claim in claim_set],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False).encode("utf-8")


def merge_claim_sets(*sets: ClaimSet, source_descriptor: str = "merged") -> ClaimSet:
    """Merge claim sets; an id seen twice must map to an equal claim.

    Re-sending the same payload is idempotent, but a conflicting value for an
    existing id is an error: silently overwriting could change what a token
    verifies against.
    """
    merged: dict[str, Claim] = {}
    for claim_set in sets:
        for claim in claim_set:
            existing = merged.get(claim.claim_id)
            if existing is None:
                merged[claim.claim_id] = claim
            elif existing != claim:
                raise ClaimIngestError(
                    f"conflicting duplicate claim_id {claim.claim_id!r} during merge"
                )
    return ClaimSet(claims=tuple(merged.values()), source_descriptor=source_descriptor)
