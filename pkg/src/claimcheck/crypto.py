"""Tamper-evidence extension: claim signatures and Merkle inclusion proofs.

The signed payload is a deterministic canonical encoding of the claim's
identifying fields; metadata and the provenance fields themselves are
excluded, so re-annotating a claim never invalidates its signature.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .claims import Claim, ClaimIndex, ClaimSet, MerkleProof, canonical_value

__all__ = [
    "ED25519",
    "MerkleProof",
    "ProvenanceError",
    "TrustAnchor",
    "attach_merkle_proofs",
    "build_merkle_tree",
    "canonical_claim_bytes",
    "claim_provenance_status",
    "filter_provenance_valid",
    "generate_keypair",
    "load_keyring",
    "sign_claim",
    "sign_claim_set",
    "verify_claim_signature",
    "verify_merkle_inclusion",
]

ED25519 = "ed25519"


class ProvenanceError(ValueError):
    """Missing or structurally unusable provenance material."""


@dataclass(frozen=True)
class TrustAnchor:
    """A provider's public key and the signature algorithms it may vouch for."""

    provider_id: str
    public_key: bytes
    accepted_algorithms: frozenset[str] = frozenset({ED25519})

    def __post_init__(self) -> None:
        if ED25519 in self.accepted_algorithms:
            try:
                Ed25519PublicKey.from_public_bytes(self.public_key)
            except (ValueError, TypeError) as exc:
                raise ProvenanceError(
                    f"anchor {self.provider_id!r}: malformed ed25519 public key"
                ) from exc


def canonical_claim_bytes(claim: Claim) -> bytes:
    """Deterministic signing payload over the claim's identifying fields.

    Sorted-key compact JSON; the value is canonicalized so "5.7" and "5.70"
    sign identically. metadata, signature, and merkle_proof are excluded.
    """
    doc = {
        "claim_id": claim.claim_id,
        "entity": claim.entity,
        "indicator": claim.indicator,
        "time": claim.time,
        "unit": claim.unit,
        "value": canonical_value(claim.value),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def generate_keypair() -> tuple[bytes, bytes]:
    """Fresh ed25519 keypair as (private_seed, public_key) raw bytes."""
    private = Ed25519PrivateKey.generate()
    return (
        private.private_bytes_raw(),
        private.public_key().public_bytes_raw(),
    )


def _private_key(key: bytes) -> Ed25519PrivateKey:
    try:
        return Ed25519PrivateKey.from_private_bytes(key)
    except (ValueError, TypeError) as exc:
        raise ProvenanceError("invalid ed25519 private key") from exc


def sign_claim(claim: Claim, key: bytes) -> bytes:
    """Sign the canonical claim bytes; verifiable via verify_claim_signature."""
    return _private_key(key).sign(canonical_claim_bytes(claim))


def verify_claim_signature(claim: Claim, anchor: TrustAnchor) -> bool:
    """True iff the claim's signature verifies under the anchor's key.

    Raises ProvenanceError when the claim carries no signature or names an
    algorithm the anchor does not accept.
    """
    if claim.signature is None:
        raise ProvenanceError(f"claim {claim.claim_id!r}: missing signature")
    algorithm = claim.algorithm or ED25519
    if algorithm not in anchor.accepted_algorithms:
        raise ProvenanceError(
            f"claim {claim.claim_id!r}: algorithm {algorithm!r} not accepted by anchor"
        )
    if algorithm != ED25519:
        raise ProvenanceError(f"unsupported signature algorithm {algorithm!r}")
    try:
        Ed25519PublicKey.from_public_bytes(anchor.public_key).verify(
            claim.signature, canonical_claim_bytes(claim)
        )
    except InvalidSignature:
        return False
    return True


def _leaf_hash(claim: Claim) -> bytes:
    return hashlib.sha256(canonical_claim_bytes(claim)).digest()


def _parent(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(left + right).digest()


def build_merkle_tree(
    claims: ClaimSet, signing_key: bytes | None = None
) -> tuple[bytes, dict[str, MerkleProof]]:
    """Balanced binary tree over canonical leaf hashes; the odd node at each
    level is paired with itself. Returns (root, per-claim proof); when a
    signing key is given, each proof carries a root signature."""
    if len(claims) == 0:
        raise ProvenanceError("cannot build a merkle tree over an empty claim set")
    level = [_leaf_hash(claim) for claim in claims]
    paths: list[list[tuple[bytes, str]]] = [[] for _ in level]
    positions = list(range(len(level)))
    while len(level) > 1:
        next_level: list[bytes] = []
        for i in range(0, len(level), 2):
            left = level[i]
            right = level[i + 1] if i + 1 < len(level) else left
            next_level.append(_parent(left, right))
        for leaf, pos in enumerate(positions):
            sibling = pos ^ 1
            if sibling < len(level):
                side = "left" if sibling < pos else "right"
                paths[leaf].append((level[sibling], side))
            else:
                paths[leaf].append((level[pos], "right"))
            positions[leaf] = pos // 2
        level = next_level
    root = level[0]
    root_signature = _private_key(signing_key).sign(root) if signing_key is not None else None
    proofs = {
        claim.claim_id: MerkleProof(
            leaf_index=i,
            siblings=tuple(paths[i]),
            root=root,
            root_signature=root_signature,
        )
        for i, claim in enumerate(claims)
    }
    return root, proofs


def verify_merkle_inclusion(claim: Claim, anchor: TrustAnchor | None = None) -> bool:
    """Recompute the root from the claim's leaf and compare.

    When the proof carries a root signature an anchor is required and the
    signature must verify too. Raises ProvenanceError for a missing proof or
    a leaf index that cannot fit the proof's depth.
    """
    proof = claim.merkle_proof
    if proof is None:
        raise ProvenanceError(f"claim {claim.claim_id!r}: missing merkle proof")
    if proof.leaf_index >= (1 << len(proof.siblings)):
        raise ProvenanceError(
            f"claim {claim.claim_id!r}: leaf index {proof.leaf_index} exceeds proof depth"
        )
    node = _leaf_hash(claim)
    for digest, side in proof.siblings:
        node = _parent(digest, node) if side == "left" else _parent(node, digest)
    if node != proof.root:
        return False
    if proof.root_signature is not None:
        if anchor is None:
            return False
        try:
            Ed25519PublicKey.from_public_bytes(anchor.public_key).verify(
                proof.root_signature, proof.root
            )
        except InvalidSignature:
            return False
    return True


def sign_claim_set(claims: ClaimSet, key: bytes) -> ClaimSet:
    """Return a copy of the claim set with every claim signed."""
    signed = tuple(
        replace(claim, signature=sign_claim(claim, key), algorithm=ED25519) for claim in claims
    )
    return ClaimSet(claims=signed, source_descriptor=claims.source_descriptor)


def attach_merkle_proofs(claims: ClaimSet, signing_key: bytes | None = None) -> ClaimSet:
    """Return a copy of the claim set with inclusion proofs attached."""
    _, proofs = build_merkle_tree(claims, signing_key=signing_key)
    annotated = tuple(replace(claim, merkle_proof=proofs[claim.claim_id]) for claim in claims)
    return ClaimSet(claims=annotated, source_descriptor=claims.source_descriptor)


def load_keyring(data: bytes) -> tuple[TrustAnchor, ...]:
    """Parse a JSON keyring: {"anchors": [{"provider_id", "public_key": hex,
    "algorithms": [...]?}, ...]}."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProvenanceError(f"keyring is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("anchors"), list):
        raise ProvenanceError("keyring must be an object with an 'anchors' array")
    anchors = []
    for position, raw in enumerate(doc["anchors"]):
        if not isinstance(raw, dict) or "public_key" not in raw:
            raise ProvenanceError(f"anchor #{position}: expected an object with a public_key")
        try:
            public_key = bytes.fromhex(raw["public_key"])
        except (TypeError, ValueError) as exc:
            raise ProvenanceError(f"anchor #{position}: public_key must be hex") from exc
        algorithms = raw.get("algorithms", [ED25519])
        anchors.append(
            TrustAnchor(
                provider_id=str(raw.get("provider_id", f"anchor-{position}")),
                public_key=public_key,
                accepted_algorithms=frozenset(algorithms),
            )
        )
    return tuple(anchors)


def serialize_keyring(anchors: Sequence[TrustAnchor]) -> bytes:
    doc = {
        "anchors": [
            {
                "provider_id": anchor.provider_id,
                "public_key": anchor.public_key.hex(),
                "algorithms": sorted(anchor.accepted_algorithms),
            }
            for anchor in anchors
        ]
    }
    return json.dumps(doc, indent=2).encode("utf-8")


def claim_provenance_status(claim: Claim, anchors: Iterable[TrustAnchor]) -> str:
    """Classify as "valid", "invalid", or "unsigned".

    A signature must verify under some anchor. A Merkle proof anchors trust
    only through a signed root: an unsigned root could simply be rebuilt
    around tampered data, so it never counts as valid provenance.
    """
    anchors = tuple(anchors)
    if claim.signature is not None:
        for anchor in anchors:
            try:
                if verify_claim_signature(claim, anchor):
                    return "valid"
            except ProvenanceError:
                continue
        return "invalid"
    if claim.merkle_proof is not None:
        if claim.merkle_proof.root_signature is None:
            return "invalid"
        for anchor in anchors:
            try:
                if verify_merkle_inclusion(claim, anchor):
                    return "valid"
            except ProvenanceError:
                continue
        return "invalid"
    return "unsigned"


def filter_provenance_valid(
    claims: Iterable[Claim], anchors: Iterable[TrustAnchor]
) -> ClaimIndex:
    """Index view containing only claims with valid provenance (fail-closed:
    unsigned claims are excluded, and no anchors means an empty view)."""
    anchors = tuple(anchors)
    kept = {
        claim.claim_id: claim
        for claim in claims
        if claim_provenance_status(claim, anchors) == "valid"
    }
    return ClaimIndex(kept, source_descriptor="provenance-filtered")
