from __future__ import annotations

import json
from pathlib import Path

from click.testing import CliRunner

from claimcheck import (
    RenderOptions,
    index_claims,
    ingest_retriever_payload,
    parse_claim_file,
    preset_policy,
    render,
    verify_document,
)
from claimcheck.cli import main
from conftest import GDP_RESPONSE, GROWTH_CLAIM_FILE, RETRIEVER_PAYLOAD

ROUND2_POLICY = json.dumps(
    {"name": "round2", "modes": [{"kind": "exact"}, {"kind": "round", "d": 2}]}
)


def write(tmp_path: Path, name: str, data: bytes) -> str:
    path = tmp_path / name
    path.write_bytes(data)
    return str(path)


def test_verify_gdp_strict_flags_and_exits_1(tmp_path):
    runner = CliRunner()
    text = write(tmp_path, "response.txt", GDP_RESPONSE.encode())
    claims = write(tmp_path, "payload.json", RETRIEVER_PAYLOAD)
    result = runner.invoke(
        main, ["verify", text, "--claims", claims, "--policy", "strict", "--format", "html"]
    )
    assert result.exit_code == 1
    assert 'class="verify-pending"' in result.output
    assert "5.69201612823412" in result.output


def test_verify_gdp_round2_exits_0(tmp_path):
    runner = CliRunner()
    text = write(tmp_path, "response.txt", GDP_RESPONSE.encode())
    claims = write(tmp_path, "payload.json", RETRIEVER_PAYLOAD)
    policy = write(tmp_path, "round2.json", ROUND2_POLICY.encode())
    result = runner.invoke(main, ["verify", text, "--claims", claims, "--policy", policy])
    assert result.exit_code == 0


def test_verify_empty_input_empty_output(tmp_path):
    runner = CliRunner()
    text = write(tmp_path, "empty.txt", b"")
    result = runner.invoke(main, ["verify", text])
    assert result.exit_code == 0
    assert result.output == ""


def test_verify_stdin(tmp_path):
    runner = CliRunner()
    claims = write(tmp_path, "claims.json", GROWTH_CLAIM_FILE)
    result = runner.invoke(
        main,
        ["verify", "--claims", claims, "--policy", "round1", "--format", "json"],
        input='<claim id="clm_7ef6">5.7</claim>',
    )
    assert result.exit_code == 0
    parsed = json.loads(result.output)
    assert parsed["report"]["verified"] == 1


def test_verify_output_matches_renderer_exactly(tmp_path):
    runner = CliRunner()
    text_path = write(tmp_path, "response.txt", GDP_RESPONSE.encode())
    claims_path = write(tmp_path, "payload.json", RETRIEVER_PAYLOAD)
    result = runner.invoke(
        main,
        ["verify", text_path, "--claims", claims_path, "--format", "html"],
    )
    doc = verify_document(
        GDP_RESPONSE,
        index_claims(ingest_retriever_payload(RETRIEVER_PAYLOAD, source_descriptor=claims_path)),
        preset_policy("strict"),
    )
    assert result.output == render(doc, RenderOptions(format="html"))


def test_verify_writes_report(tmp_path):
    runner = CliRunner()
    text = write(tmp_path, "response.txt", GDP_RESPONSE.encode())
    claims = write(tmp_path, "payload.json", RETRIEVER_PAYLOAD)
    report_path = tmp_path / "report.json"
    result = runner.invoke(
        main, ["verify", text, "--claims", claims, "--report", str(report_path)]
    )
    assert result.exit_code == 1
    report = json.loads(report_path.read_text())
    assert report["flagged"] == 1
    assert report["by_reason"] == {"value_mismatch": 1}


def test_verify_unreadable_file_exits_2(tmp_path):
    runner = CliRunner()
    missing = str(tmp_path / "nope.txt")
    result = runner.invoke(main, ["verify", missing])
    assert result.exit_code == 2
    assert "nope.txt" in result.output


def test_verify_unknown_policy_exits_2(tmp_path):
    runner = CliRunner()
    text = write(tmp_path, "t.txt", b"hello")
    result = runner.invoke(main, ["verify", text, "--policy", "bogus"])
    assert result.exit_code == 2


def test_claims_convert_gdp_payload(tmp_path):
    runner = CliRunner()
    payload = write(tmp_path, "payload.json", RETRIEVER_PAYLOAD)
    out = tmp_path / "claims.json"
    result = runner.invoke(main, ["claims", "convert", payload, "-o", str(out)])
    assert result.exit_code == 0
    converted = parse_claim_file(out.read_bytes())
    assert converted.claims[0].claim_id == "0328"
    assert str(converted.claims[0].value) == "5.69201612823412"


def test_claims_inspect_empty_file(tmp_path):
    runner = CliRunner()
    path = write(tmp_path, "empty.json", b'{"version": 1, "claims": []}')
    result = runner.invoke(main, ["claims", "inspect", path])
    assert result.exit_code == 0
    assert "0 claims" in result.output


def test_keygen_sign_verify_pipeline(tmp_path):
    runner = CliRunner()
    key = str(tmp_path / "key.hex")
    keyring = str(tmp_path / "keyring.json")
    assert runner.invoke(
        main, ["claims", "keygen", "--out-key", key, "--out-keyring", keyring]
    ).exit_code == 0

    claims_path = write(tmp_path, "claims.json", GROWTH_CLAIM_FILE)
    signed_path = str(tmp_path / "signed.json")
    assert runner.invoke(
        main, ["claims", "sign", claims_path, "--key", key, "-o", signed_path]
    ).exit_code == 0

    text = write(tmp_path, "t.txt", '<claim id="clm_7ef6">5.7</claim>'.encode())
    result = runner.invoke(
        main,
        [
            "verify",
            text,
            "--claims",
            signed_path,
            "--policy",
            "round1",
            "--keyring",
            keyring,
            "--require-provenance",
            "--format",
            "json",
        ],
    )
    assert result.exit_code == 0
    assert json.loads(result.output)["report"]["verified"] == 1

    # without the keyring nothing can prove provenance: fail closed
    no_keyring = runner.invoke(
        main,
        ["verify", text, "--claims", signed_path, "--require-provenance", "--format", "json"],
    )
    assert no_keyring.exit_code == 1


def test_claims_merkle_roundtrip(tmp_path):
    runner = CliRunner()
    claims_path = write(tmp_path, "claims.json", GROWTH_CLAIM_FILE)
    out = tmp_path / "merkled.json"
    result = runner.invoke(main, ["claims", "merkle", claims_path, "-o", str(out)])
    assert result.exit_code == 0
    reloaded = parse_claim_file(out.read_bytes())
    assert reloaded.claims[0].merkle_proof is not None


def test_bench_writes_csv_and_figure(tmp_path):
    runner = CliRunner()
    out_dir = tmp_path / "reports"
    result = runner.invoke(
        main,
        [
            "bench",
            "--out-dir",
            str(out_dir),
            "--spans",
            "10,20",
            "--claim-sizes",
            "50",
            "--repeats",
            "1",
        ],
    )
    assert result.exit_code == 0, result.output
    csv_text = (out_dir / "bench.csv").read_text()
    assert csv_text.startswith("spans,claim_count,seconds")
    assert len(csv_text.splitlines()) == 3
    assert (out_dir / "bench.png").stat().st_size > 0
