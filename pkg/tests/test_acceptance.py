"""Acceptance suite: one test per contract-level criterion.

Each test prints a single "ACCEPTANCE <name>: PASS|FAIL" line (visible with
pytest -s or in the captured output summary). Sizes and tolerances are the
contract's, not samples: run times are dominated by the fuzz volumes.
"""

from __future__ import annotations

import dataclasses
import json
import random
import time
from contextlib import contextmanager
from decimal import Decimal

import pytest

from claimcheck import (
    Claim,
    ClaimSet,
    FlagReason,
    LabelStatus,
    MerkleProof,
    TrustAnchor,
    index_claims,
    ingest_retriever_payload,
    parse_claim_file,
    parse_policy,
    preset_policy,
    refines,
    render_ansi,
    render_html,
    render_json,
    strip_verification_markers,
    summarize,
    verify_document,
    verify_claim_signature,
    verify_merkle_inclusion,
)
from claimcheck.crypto import build_merkle_tree, generate_keypair, sign_claim, sign_claim_set
from claimcheck.policy import Round, PolicySpec, Exact, Tolerance, default_alias_mode
from claimcheck.report import run_benchmark
from conftest import GDP_RESPONSE, GROWTH_CLAIM_FILE, RETRIEVER_PAYLOAD
from fuzzgen import (
    MUTATION_OPERATORS,
    fuzz_document,
    honest_token,
    mutate_token,
    random_claim_set,
    random_policy,
    stricter_variant,
)
from oracle import oracle_accepts

ANSI_VERIFIED = "\x1b[32m✓\x1b[0m"


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL")
        raise
    print(f"ACCEPTANCE {name}: PASS")


def labels_of(doc):
    return [label for _, label in doc.labeled()]


def test_running_example():
    with criterion("running-example"):
        started = time.perf_counter()
        index = index_claims(parse_claim_file(GROWTH_CLAIM_FILE))

        doc = verify_document(
            '<claim id="clm_7ef6" policy="round1">5.7</claim>',
            index,
            preset_policy("round1"),
        )
        (label,) = labels_of(doc)
        assert label.status is LabelStatus.VERIFIED
        assert label.claim_id == "clm_7ef6"

        doc = verify_document(
            '<claim id="clm_7ef6" policy="int">6</claim>', index, preset_policy("int")
        )
        (label,) = labels_of(doc)
        assert label.status is LabelStatus.VERIFIED
        assert label.mode == Round(0)

        for bare_text in ("6.0", "5.7"):
            doc = verify_document(bare_text, index, preset_policy("round1"))
            (label,) = labels_of(doc)
            assert label.status is LabelStatus.BARE
            html_out = render_html(doc)
            assert "verified-mark" not in html_out and "verify-pending" not in html_out

        assert time.perf_counter() - started < 1.0


def test_gdp_fixture_reproduction():
    with criterion("gdp-fixture-reproduction"):
        claims = ingest_retriever_payload(RETRIEVER_PAYLOAD)
        assert str(claims.claims[0].value) == "5.69201612823412"
        index = index_claims(claims)

        strict_doc = verify_document(GDP_RESPONSE, index, preset_policy("strict"))
        flagged = [
            label
            for label in labels_of(strict_doc)
            if label.status is LabelStatus.FLAGGED
        ]
        assert len(flagged) == 1
        assert flagged[0].reason is FlagReason.VALUE_MISMATCH
        assert flagged[0].expected == Decimal("5.69201612823412")
        html_out = render_html(strict_doc)
        assert 'class="verify-pending"' in html_out
        assert "Value: 5.69201612823412" in html_out
        assert 'aria-label="Needs verification"' in html_out

        round2 = parse_policy(
            json.dumps({"name": "round2", "modes": [{"kind": "exact"}, {"kind": "round", "d": 2}]})
        )
        round2_doc = verify_document(GDP_RESPONSE, index, round2)
        token_labels = [
            label for label in labels_of(round2_doc) if label.claim_id == "0328"
        ]
        assert [l.status for l in token_labels] == [LabelStatus.VERIFIED]


def test_soundness_fuzz():
    with criterion("soundness-fuzz"):
        rng = random.Random(160_451)
        discrepancies = 0
        triples = 10_000
        for _ in range(triples):
            claims = random_claim_set(rng, rng.randrange(1, 10))
            policy = random_policy(rng)
            index = index_claims(claims)
            text = fuzz_document(rng, claims, policy, spans=rng.randrange(1, 5))
            doc = verify_document(text, index, policy)
            source = "".join(segment.text for segment, _ in doc.entries)
            for segment, label in doc.labeled():
                if label.status is not LabelStatus.VERIFIED:
                    continue
                claim = index.get(label.claim_id)
                start, end = segment.span
                if claim is None or not oracle_accepts(source, start, end, claim, policy):
                    discrepancies += 1
        assert discrepancies == 0


def test_completeness_fuzz():
    with criterion("completeness-fuzz"):
        rng = random.Random(52_918)
        per_mode = 1_000
        mode_policies = {
            "exact": PolicySpec(name="only-exact", modes=(Exact(),)),
            "rounded": None,  # fresh random d per trial
            "alias": PolicySpec(name="only-alias", modes=(default_alias_mode(),)),
            "tolerance": None,  # fresh random parameters per trial
        }
        for kind in ("exact", "rounded", "alias", "tolerance"):
            for _ in range(per_mode):
                claims = random_claim_set(rng, rng.randrange(1, 6))
                claim = claims.claims[rng.randrange(len(claims))]
                if kind == "rounded":
                    policy = PolicySpec(name="only-round", modes=(Round(rng.randrange(0, 5)),))
                elif kind == "tolerance":
                    policy = PolicySpec(
                        name="only-tol",
                        modes=(
                            Tolerance(
                                delta=Decimal(rng.randrange(0, 300)).scaleb(-2),
                                rho=Decimal(rng.randrange(0, 6)).scaleb(-2),
                                qualifiers=frozenset({"about", "roughly", "~"}),
                            ),
                        ),
                    )
                else:
                    policy = mode_policies[kind]
                token = honest_token(rng, claim, policy)
                doc = verify_document(
                    f"reported {token.text} overall", index_claims(claims), policy
                )
                verified = [
                    label
                    for label in labels_of(doc)
                    if label.status is LabelStatus.VERIFIED
                ]
                assert verified, (kind, token.text, str(claim.value))


def test_fail_closed_mutations():
    with criterion("fail-closed-mutations"):
        rng = random.Random(31_337)
        mutants = 0
        target = 1_000
        while mutants < target:
            claims = random_claim_set(rng, rng.randrange(1, 6))
            policy = random_policy(rng)
            index = index_claims(claims)
            claim = claims.claims[rng.randrange(len(claims))]
            token = honest_token(rng, claim, policy)
            # fixture must be Verified before mutation
            base = verify_document(token.text, index, policy)
            assert any(
                label.status is LabelStatus.VERIFIED for label in labels_of(base)
            ), (token.text, policy)
            operator = MUTATION_OPERATORS[mutants % len(MUTATION_OPERATORS)]
            _, mutant = mutate_token(rng, token, operator)
            doc = verify_document(f"lead {mutant} tail", index, policy)
            verified = [
                label for label in labels_of(doc) if label.status is LabelStatus.VERIFIED
            ]
            assert not verified, (operator, mutant, str(claim.value), policy)
            mutants += 1


def test_monotonicity():
    with criterion("monotonicity"):
        rng = random.Random(7_331)
        preset_chain = [
            (preset_policy("strict"), preset_policy("round1")),
            (preset_policy("round1"), preset_policy("tolerant")),
            (preset_policy("strict"), preset_policy("tolerant")),
        ]
        for stricter, looser in preset_chain:
            assert refines(stricter, looser)
        documents = 0
        target = 1_000
        while documents < target:
            if documents % 3 == 0 or documents < len(preset_chain):
                stricter, looser = preset_chain[documents % len(preset_chain)]
            else:
                looser = random_policy(rng)
                stricter = stricter_variant(rng, looser)
                if not refines(stricter, looser):
                    continue
            claims = random_claim_set(rng, rng.randrange(1, 8))
            index = index_claims(claims)
            text = fuzz_document(rng, claims, stricter, spans=rng.randrange(1, 6))
            verified_under = {}
            for tag, policy in (("strict", stricter), ("loose", looser)):
                doc = verify_document(text, index, policy)
                verified_under[tag] = {
                    segment.span
                    for segment, label in doc.labeled()
                    if label.status is LabelStatus.VERIFIED
                }
            assert verified_under["strict"] <= verified_under["loose"], (
                text,
                stricter,
                looser,
            )
            documents += 1


def _spoof_documents(rng: random.Random, claims: ClaimSet, count: int) -> list[str]:
    known = claims.claims[0]
    spoof_pieces = [
        "✓",
        "✓ verified",
        "verified: yes",
        '<sup class="verified-mark" title="Verified data">OK</sup>',
        '<sup class="verify-pending" title="x">X</sup>',
        '<span class="needs-verify">6.0</span>',
        '<sup class="badge">✓</sup>',
        "<claim>6.1</claim>",
        "<claim id=unquoted>6.2</claim>",
        "<claim id='single'>6.3</claim>",
        f"<claim  id=\"{known.claim_id}\">{known.value}</claim>",
        f'<CLAIM ID="{known.claim_id}">{known.value}</CLAIM>',
        f'<claim policy="strict" id="{known.claim_id}">{known.value}</claim>',
        f'<claim id="{known.claim_id}">{known.value}',
        "plain 7.5 text",
        "numbers 1,234.5 here",
    ]
    docs = []
    for i in range(count):
        parts = rng.choices(spoof_pieces, k=rng.randrange(2, 7))
        if i % 4 == 0:  # mixed case: one honest token among the spoofs
            parts.insert(
                rng.randrange(len(parts)),
                f'<claim id="{known.claim_id}">{known.value}</claim>',
            )
        docs.append(" ".join(parts))
    return docs


def test_spoof_corpus():
    with criterion("spoof-corpus"):
        rng = random.Random(5_150)
        claims = random_claim_set(rng, 4)
        index = index_claims(claims)
        policy = preset_policy("strict")
        for text in _spoof_documents(rng, claims, 200):
            doc = verify_document(text, index, policy)
            counts = summarize(doc)
            html_out = render_html(doc)
            assert html_out.count('class="verified-mark"') == counts.verified
            assert html_out.count('class="verify-pending"') == counts.flagged
            ansi_out = render_ansi(doc)
            assert ansi_out.count(ANSI_VERIFIED) == counts.verified
            parsed = json.loads(render_json(doc))
            json_verified = sum(
                1
                for entry in parsed["segments"]
                if entry["label"] and entry["label"]["status"] == "verified"
            )
            assert json_verified == counts.verified


def test_linear_time_scaling():
    with criterion("linear-time"):
        started = time.perf_counter()
        rows = run_benchmark(
            span_counts=(1_000, 2_000, 4_000, 8_000),
            claim_counts=(10_000, 100_000),
            repeats=3,
        )
        by_cell = {(row.spans, row.claim_count): row.seconds for row in rows}
        for claim_count in (10_000, 100_000):
            for spans in (1_000, 2_000, 4_000):
                ratio = by_cell[(spans * 2, claim_count)] / by_cell[(spans, claim_count)]
                assert ratio <= 2.5, (spans, claim_count, ratio)
        for spans in (1_000, 2_000, 4_000, 8_000):
            small, big = by_cell[(spans, 10_000)], by_cell[(spans, 100_000)]
            assert abs(big - small) / small <= 0.25, (spans, small, big)
        assert time.perf_counter() - started < 60


SIGNED_FIELDS = ("claim_id", "indicator", "entity", "time", "value", "unit")


def _mutate_signed_field(rng: random.Random, claim: Claim) -> Claim:
    field = rng.choice(SIGNED_FIELDS)
    if field == "value":
        return dataclasses.replace(claim, value=claim.value + Decimal(rng.randrange(1, 50)))
    if field == "unit":
        return dataclasses.replace(claim, unit="%" if claim.unit != "%" else "USD")
    return dataclasses.replace(claim, **{field: getattr(claim, field) + "x"})


def test_crypto_tamper_evidence():
    with criterion("crypto-tamper-evidence"):
        rng = random.Random(41_414)
        private, public = generate_keypair()
        anchor = TrustAnchor(provider_id="acceptance", public_key=public)

        # round trips hold across fresh claims and fresh keys
        for _ in range(20):
            key, pub = generate_keypair()
            claim = random_claim_set(rng, 1).claims[0]
            carrying = dataclasses.replace(claim, signature=sign_claim(claim, key))
            assert verify_claim_signature(
                carrying, TrustAnchor(provider_id="k", public_key=pub)
            )

        base_claims = random_claim_set(rng, 50)
        signed = sign_claim_set(base_claims, private)
        for claim in signed:
            assert verify_claim_signature(claim, anchor)
        for _ in range(1_000):
            victim = signed.claims[rng.randrange(len(signed.claims))]
            tampered = _mutate_signed_field(rng, victim)
            assert not verify_claim_signature(tampered, anchor)

        root, proofs = build_merkle_tree(base_claims, signing_key=private)
        for claim in base_claims:
            carrying = dataclasses.replace(claim, merkle_proof=proofs[claim.claim_id])
            assert verify_merkle_inclusion(carrying, anchor)
        for _ in range(1_000):
            claim = base_claims.claims[rng.randrange(len(base_claims.claims))]
            proof = proofs[claim.claim_id]
            target = rng.choice(("leaf", "sibling", "root"))
            if target == "leaf" or not proof.siblings:
                mutated_claim = dataclasses.replace(
                    claim, value=claim.value + Decimal(1), merkle_proof=proof
                )
                assert not verify_merkle_inclusion(mutated_claim, anchor)
                continue
            if target == "sibling":
                level = rng.randrange(len(proof.siblings))
                digest, side = proof.siblings[level]
                flipped = bytearray(digest)
                flipped[rng.randrange(32)] ^= 1 << rng.randrange(8)
                siblings = list(proof.siblings)
                siblings[level] = (bytes(flipped), side)
                bad = MerkleProof(
                    leaf_index=proof.leaf_index,
                    siblings=tuple(siblings),
                    root=proof.root,
                    root_signature=proof.root_signature,
                )
            else:
                flipped = bytearray(proof.root)
                flipped[rng.randrange(32)] ^= 1 << rng.randrange(8)
                bad = MerkleProof(
                    leaf_index=proof.leaf_index,
                    siblings=proof.siblings,
                    root=bytes(flipped),
                    root_signature=proof.root_signature,
                )
            assert not verify_merkle_inclusion(
                dataclasses.replace(claim, merkle_proof=bad), anchor
            )

        # end to end: with provenance required, a tampered claim can never
        # back a Verified label
        policy = dataclasses.replace(preset_policy("round1"), require_provenance=True)
        victim = signed.claims[0]
        tampered_set = ClaimSet(
            claims=(dataclasses.replace(victim, value=victim.value + 7),)
        )
        doc = verify_document(
            f'<claim id="{victim.claim_id}">{victim.value + 7}</claim>',
            index_claims(tampered_set),
            policy,
            anchors=(anchor,),
        )
        assert all(
            label.status is not LabelStatus.VERIFIED for label in labels_of(doc)
        )
        honest_doc = verify_document(
            f'<claim id="{victim.claim_id}">{victim.value}</claim>',
            index_claims(ClaimSet(claims=(victim,))),
            policy,
            anchors=(anchor,),
        )
        assert any(
            label.status is LabelStatus.VERIFIED for label in labels_of(honest_doc)
        )


def test_strip_idempotency():
    with criterion("marker-strip-idempotency"):
        rng = random.Random(90_210)
        pieces = [
            "text ",
            "5.7",
            '<sup class="verified-mark" title="Verified data">OK</sup>',
            '<sup class="verify-pending" title="Needs verification" role="img">X</sup>',
            '<span class="needs-verify">6.0</span>',
            '<span class="needs-verify"><span class="needs-verify">8</span></span>',
            '<claim id="a">7</claim>',
            "<su",
            "p ",
            "</sup>",
            "</span>",
            "✓ verified ",
        ]
        for _ in range(1_000):
            text = "".join(rng.choices(pieces, k=rng.randrange(1, 10)))
            once = strip_verification_markers(text)
            twice = strip_verification_markers(once)
            assert twice == once, text
