"""Fail-closed verification of claim-bound numeric spans in generated text.

A number shown to a user is either mechanically verified against a
structured claim under an explicit policy, or it visibly carries no
verification mark. Parsing, policy evaluation, rendering, provenance
checks, a CLI, and an HTTP service live in the submodules; the most used
names are re-exported here.
"""

from .claims import (
    Claim,
    ClaimIndex,
    ClaimIngestError,
    ClaimSet,
    MerkleProof,
    canonical_value,
    claim_to_dict,
    index_claims,
    ingest_retriever_payload,
    merge_claim_sets,
    parse_claim_file,
    serialize_claim_set,
)
from .crypto import (
    ProvenanceError,
    TrustAnchor,
    build_merkle_tree,
    canonical_claim_bytes,
    sign_claim,
    verify_claim_signature,
    verify_merkle_inclusion,
)
from .policy import (
    Alias,
    AliasScale,
    Exact,
    MatchResult,
    NormalizedPayload,
    PolicyError,
    PolicySpec,
    Round,
    Tolerance,
    VerificationMode,
    check_alias,
    check_exact,
    check_round,
    check_tolerance,
    evaluate,
    parse_policy,
    preset_policy,
    refines,
)
from .render import RenderOptions, render, render_ansi, render_html, render_json
from .tokenizer import (
    ParseReport,
    Segment,
    SegmentKind,
    detect_qualifier,
    parse_numeric_payload,
    strip_verification_markers,
    tokenize,
)
from .verify import (
    AnnotatedDocument,
    FlagReason,
    Label,
    LabelStatus,
    VerificationReport,
    document_to_dict,
    label_span,
    summarize,
    verify_document,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedDocument",
    "Alias",
    "AliasScale",
    "Claim",
    "ClaimIndex",
    "ClaimIngestError",
    "ClaimSet",
    "Exact",
    "FlagReason",
    "Label",
    "LabelStatus",
    "MatchResult",
    "MerkleProof",
    "NormalizedPayload",
    "ParseReport",
    "PolicyError",
    "PolicySpec",
    "ProvenanceError",
    "RenderOptions",
    "Round",
    "Segment",
    "SegmentKind",
    "Tolerance",
    "TrustAnchor",
    "VerificationMode",
    "VerificationReport",
    "build_merkle_tree",
    "canonical_claim_bytes",
    "canonical_value",
    "check_alias",
    "check_exact",
    "check_round",
    "check_tolerance",
    "claim_to_dict",
    "detect_qualifier",
    "document_to_dict",
    "evaluate",
    "index_claims",
    "ingest_retriever_payload",
    "label_span",
    "merge_claim_sets",
    "parse_claim_file",
    "parse_numeric_payload",
    "parse_policy",
    "preset_policy",
    "refines",
    "render",
    "render_ansi",
    "render_html",
    "render_json",
    "serialize_claim_set",
    "sign_claim",
    "strip_verification_markers",
    "summarize",
    "tokenize",
    "verify_claim_signature",
    "verify_document",
    "verify_merkle_inclusion",
]
