"""Command-line interface: verify text, manage claims, serve, benchmark.

Exit codes: 0 when nothing is flagged, 1 when at least one span is flagged,
2 for usage or I/O errors. Rendered output on stdout is byte-identical to
the corresponding renderer call.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .claims import (
    ClaimIngestError,
    ClaimSet,
    ingest_retriever_payload,
    merge_claim_sets,
    parse_claim_file,
    serialize_claim_set,
)
from .crypto import (
    ProvenanceError,
    attach_merkle_proofs,
    build_merkle_tree,
    generate_keypair,
    load_keyring,
    serialize_keyring,
    sign_claim_set,
    verify_merkle_inclusion,
    TrustAnchor,
)
from .claims import index_claims
from .policy import PolicyError, PolicySpec, parse_policy
from .render import RenderOptions, render
from .report import (
    render_benchmark_figure,
    run_benchmark,
    write_benchmark_csv,
    write_report,
)
from .verify import summarize, verify_document


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        _fail(f"cannot read {path}: {exc.strerror or exc}")
        raise AssertionError("unreachable")


def _write_bytes(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        _fail(f"cannot write {path}: {exc.strerror or exc}")


def _load_claims(path: str) -> ClaimSet:
    """Accept a canonical claim file or a raw retriever payload."""
    data = _read_bytes(path)
    try:
        head = json.loads(data.decode("utf-8", errors="replace") or "{}")
    except json.JSONDecodeError:
        head = None
    try:
        if isinstance(head, dict) and "data" in head and "claims" not in head:
            return ingest_retriever_payload(data, source_descriptor=path)
        return parse_claim_file(data, source_descriptor=path)
    except ClaimIngestError as exc:
        _fail(f"{path}: {exc}")
        raise AssertionError("unreachable")


def _resolve_policy(spec: str) -> PolicySpec:
    try:
        if Path(spec).is_file():
            return parse_policy(_read_bytes(spec).decode("utf-8"))
        return parse_policy(spec)
    except PolicyError as exc:
        _fail(str(exc))
        raise AssertionError("unreachable")


def _read_key(path: str) -> bytes:
    text = _read_bytes(path).decode("ascii", errors="replace").strip()
    try:
        return bytes.fromhex(text)
    except ValueError:
        _fail(f"{path}: expected a hex-encoded key")
        raise AssertionError("unreachable")


@click.group()
@click.version_option(package_name="claimcheck")
def main() -> None:
    """Verify claim-bound numeric spans in generated text."""


@main.command()
@click.argument("input_path", metavar="[INPUT]", required=False)
@click.option("--claims", "claims_paths", multiple=True, help="Claim file or retriever payload.")
@click.option("--policy", default="strict", show_default=True, help="Preset name, JSON, or file.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["html", "ansi", "json"]),
    default="ansi",
    show_default=True,
)
@click.option("--report", "report_path", default=None, help="Write a JSON report here.")
@click.option("--keyring", "keyring_path", default=None, help="Trust anchor keyring JSON.")
@click.option("--require-provenance", is_flag=True, help="Only provenance-valid claims verify.")
def verify(
    input_path: str | None,
    claims_paths: tuple[str, ...],
    policy: str,
    fmt: str,
    report_path: str | None,
    keyring_path: str | None,
    require_provenance: bool,
) -> None:
    """Verify INPUT (or stdin) against claim files; exit 1 if anything flags."""
    text = (
        _read_bytes(input_path).decode("utf-8", errors="replace")
        if input_path
        else sys.stdin.read()
    )
    spec = _resolve_policy(policy)
    if require_provenance and not spec.require_provenance:
        spec = PolicySpec(name=spec.name, modes=spec.modes, require_provenance=True)
    claim_sets = [_load_claims(path) for path in claims_paths]
    try:
        merged = merge_claim_sets(*claim_sets) if claim_sets else ClaimSet(claims=())
    except ClaimIngestError as exc:
        _fail(str(exc))
        raise AssertionError("unreachable")
    anchors: tuple[TrustAnchor, ...] = ()
    if keyring_path:
        try:
            anchors = load_keyring(_read_bytes(keyring_path))
        except ProvenanceError as exc:
            _fail(f"{keyring_path}: {exc}")
    doc = verify_document(text, index_claims(merged), spec, anchors=anchors)
    sys.stdout.write(render(doc, RenderOptions(format=fmt)))
    sys.stdout.flush()
    summary = summarize(doc)
    if report_path:
        write_report(summary, report_path)
    sys.exit(1 if summary.flagged > 0 else 0)


@main.group()
def claims() -> None:
    """Inspect and prepare claim files."""


@claims.command()
@click.argument("path")
def inspect(path: str) -> None:
    """Print the claims in a file."""
    claim_set = _load_claims(path)
    click.echo(f"{len(claim_set)} claims from {path}")
    for claim in claim_set:
        provenance = []
        if claim.signature is not None:
            provenance.append("signed")
        if claim.merkle_proof is not None:
            provenance.append("merkle")
        suffix = f" [{', '.join(provenance)}]" if provenance else ""
        click.echo(
            f"  {claim.claim_id}: {claim.indicator or '-'} {claim.entity or '-'} "
            f"{claim.time or '-'} = {claim.value}{claim.unit}{suffix}"
        )


@claims.command()
@click.argument("payload_path")
@click.option("--out", "-o", "out_path", required=True)
def convert(payload_path: str, out_path: str) -> None:
    """Convert a retriever payload into a canonical claim file."""
    try:
        claim_set = ingest_retriever_payload(
            _read_bytes(payload_path), source_descriptor=payload_path
        )
    except ClaimIngestError as exc:
        _fail(f"{payload_path}: {exc}")
        raise AssertionError("unreachable")
    _write_bytes(out_path, serialize_claim_set(claim_set))
    click.echo(f"wrote {len(claim_set)} claims to {out_path}", err=True)


@claims.command()
@click.argument("path")
@click.option("--key", "key_path", required=True, help="Hex-encoded ed25519 private seed.")
@click.option("--out", "-o", "out_path", required=True)
def sign(path: str, key_path: str, out_path: str) -> None:
    """Sign every claim in a file."""
    claim_set = _load_claims(path)
    try:
        signed = sign_claim_set(claim_set, _read_key(key_path))
    except ProvenanceError as exc:
        _fail(f"{key_path}: {exc}")
        raise AssertionError("unreachable")
    _write_bytes(out_path, serialize_claim_set(signed))
    click.echo(f"signed {len(signed)} claims into {out_path}", err=True)


@claims.command()
@click.argument("path")
@click.option("--out", "-o", "out_path", required=True)
@click.option("--key", "key_path", default=None, help="Sign the root with this key.")
def merkle(path: str, out_path: str, key_path: str | None) -> None:
    """Attach Merkle inclusion proofs (and optionally a signed root)."""
    claim_set = _load_claims(path)
    key = _read_key(key_path) if key_path else None
    try:
        annotated = attach_merkle_proofs(claim_set, signing_key=key)
        root, _ = build_merkle_tree(claim_set, signing_key=None)
        for claim in annotated:
            if not verify_merkle_inclusion(claim):
                _fail(f"internal error: emitted proof fails for {claim.claim_id}")
    except ProvenanceError as exc:
        _fail(str(exc))
        raise AssertionError("unreachable")
    _write_bytes(out_path, serialize_claim_set(annotated))
    click.echo(f"root {root.hex()} over {len(annotated)} claims -> {out_path}", err=True)


@claims.command()
@click.option("--out-key", required=True, help="Write the hex private seed here.")
@click.option("--out-keyring", required=True, help="Write a keyring JSON here.")
@click.option("--provider", default="local", show_default=True)
def keygen(out_key: str, out_keyring: str, provider: str) -> None:
    """Generate an ed25519 keypair and matching trust-anchor keyring."""
    private_seed, public_key = generate_keypair()
    _write_bytes(out_key, private_seed.hex().encode("ascii") + b"\n")
    anchor = TrustAnchor(provider_id=provider, public_key=public_key)
    _write_bytes(out_keyring, serialize_keyring([anchor]))
    click.echo(f"keypair for {provider}: {out_key}, {out_keyring}", err=True)


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--claims", "claims_paths", multiple=True)
@click.option("--policy", default="strict", show_default=True)
@click.option("--keyring", "keyring_path", default=None)
@click.option(
    "--generator",
    type=click.Choice(["mock", "proxy"]),
    default="mock",
    show_default=True,
)
@click.option("--generator-url", default=None, help="Chat-completions endpoint for proxy mode.")
@click.option("--generator-script", default=None, help="Mock script JSON file.")
@click.option(
    "--extra-policy",
    "extra_policies",
    multiple=True,
    metavar="NAME=FILE",
    help="Register an additional selectable policy.",
)
def serve(
    port: int,
    host: str,
    claims_paths: tuple[str, ...],
    policy: str,
    keyring_path: str | None,
    generator: str,
    generator_url: str | None,
    generator_script: str | None,
    extra_policies: tuple[str, ...],
) -> None:
    """Run the verification service (and chat demo backend)."""
    import uvicorn

    from .service import MockGenerator, ProxyGenerator, create_app, load_mock_scripts

    claim_sets = [_load_claims(path) for path in claims_paths]
    try:
        merged = merge_claim_sets(*claim_sets) if claim_sets else None
    except ClaimIngestError as exc:
        _fail(str(exc))
        raise AssertionError("unreachable")
    anchors: tuple[TrustAnchor, ...] = ()
    if keyring_path:
        try:
            anchors = load_keyring(_read_bytes(keyring_path))
        except ProvenanceError as exc:
            _fail(f"{keyring_path}: {exc}")
    if generator == "proxy":
        if not generator_url:
            _fail("proxy generator requires --generator-url")
        gen: MockGenerator | ProxyGenerator = ProxyGenerator(url=generator_url or "")
    else:
        scripts = (
            load_mock_scripts(_read_bytes(generator_script)) if generator_script else None
        )
        gen = MockGenerator(scripts) if scripts is not None else MockGenerator()
    named = {}
    for entry in extra_policies:
        name, separator, path = entry.partition("=")
        if not separator or not name or not path:
            _fail(f"--extra-policy expects NAME=FILE, got {entry!r}")
        named[name] = _resolve_policy(path)
    app = create_app(
        claims=merged,
        policy=_resolve_policy(policy),
        anchors=anchors,
        generator=gen,
        extra_policies=named,
    )
    try:
        uvicorn.run(app, host=host, port=port)
    except OSError as exc:
        _fail(f"cannot bind {host}:{port}: {exc.strerror or exc}")


@main.command()
@click.option("--out-dir", default="reports", show_default=True)
@click.option("--spans", default="1000,2000,4000,8000", show_default=True)
@click.option("--claim-sizes", default="10000,100000", show_default=True)
@click.option("--policy", default="strict", show_default=True)
@click.option("--repeats", default=3, show_default=True)
def bench(out_dir: str, spans: str, claim_sizes: str, policy: str, repeats: int) -> None:
    """Measure verification throughput; write CSV and a scaling figure."""
    try:
        span_counts = [int(s) for s in spans.split(",") if s]
        claim_counts = [int(s) for s in claim_sizes.split(",") if s]
    except ValueError:
        _fail("--spans and --claim-sizes must be comma-separated integers")
        raise AssertionError("unreachable")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _fail(f"cannot create {out_dir}: {exc.strerror or exc}")
    rows = run_benchmark(
        span_counts=span_counts,
        claim_counts=claim_counts,
        policy=_resolve_policy(policy),
        repeats=repeats,
    )
    csv_path = out / "bench.csv"
    fig_path = out / "bench.png"
    write_benchmark_csv(rows, csv_path)
    render_benchmark_figure(rows, fig_path)
    for row in rows:
        click.echo(
            f"{row.spans:>6} spans / {row.claim_count:>7} claims: "
            f"{row.seconds * 1000:8.2f} ms ({row.spans_per_second:,.0f} spans/s)"
        )
    click.echo(f"wrote {csv_path} and {fig_path}")


if __name__ == "__main__":
    main()
