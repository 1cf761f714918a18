"""Verification relations, policy presets, and the refinement partial order.

All numeric comparison is exact decimal arithmetic; rounding is
half-away-from-zero. A policy is an ordered set of modes and a payload
verifies iff at least one mode accepts it -- ordering only decides which
mode gets reported for a match, never the outcome.
"""

from __future__ import annotations

import decimal
import json
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Union

from .claims import Claim

# Wide default context; operations that must stay exact size their own
# precision from the operands (see _exact_mul/_exact_sub).
_ARITH_CONTEXT = decimal.Context(prec=78)

MAX_ROUND_PLACES = 100_000


def _exact_mul(a: Decimal, b: Decimal) -> Decimal:
    """Multiply without rounding: precision sized to the operands."""
    needed = len(a.as_tuple().digits) + len(b.as_tuple().digits) + 2
    if needed <= _ARITH_CONTEXT.prec:
        return _ARITH_CONTEXT.multiply(a, b)
    with decimal.localcontext() as ctx:
        ctx.prec = needed
        ctx.Emax = decimal.MAX_EMAX
        ctx.Emin = decimal.MIN_EMIN
        return a * b


def _exact_sub(a: Decimal, b: Decimal) -> Decimal:
    """Subtract without rounding: precision spans both operands' digit ranges."""
    a_tup, b_tup = a.as_tuple(), b.as_tuple()
    high = max(a.adjusted(), b.adjusted())
    low = min(a_tup.exponent, b_tup.exponent)
    needed = high - low + 3
    if needed <= _ARITH_CONTEXT.prec:
        return _ARITH_CONTEXT.subtract(a, b)
    with decimal.localcontext() as ctx:
        ctx.prec = needed
        ctx.Emax = decimal.MAX_EMAX
        ctx.Emin = decimal.MIN_EMIN
        return a - b

DEFAULT_SCALE_TABLE: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("1000", ("K", "thousand")),
    ("1000000", ("M", "million", "mn")),
    ("1000000000", ("B", "billion", "bn")),
    ("1000000000000", ("T", "trillion")),
)

DEFAULT_QUALIFIERS: tuple[str, ...] = (
    "about",
    "approximately",
    "roughly",
    "around",
    "nearly",
    "~",
)

PRESET_NAMES = ("strict", "round1", "int", "tolerant")


class PolicyError(ValueError):
    """Raised for unknown presets, malformed policy documents, or bad parameters."""


@dataclass(frozen=True)
class Exact:
    """Accepts iff the payload equals the reference value exactly."""

    kind: str = field(default="exact", init=False)


@dataclass(frozen=True)
class Round:
    """Accepts iff both values agree after rounding to `places` decimals."""

    places: int
    kind: str = field(default="round", init=False)

    def __post_init__(self) -> None:
        if self.places < 0:
            raise PolicyError("round: places must be >= 0")
        if self.places > MAX_ROUND_PLACES:
            raise PolicyError(f"round: places must be <= {MAX_ROUND_PLACES}")


@dataclass(frozen=True)
class AliasScale:
    """One sanctioned scale: a positive multiplier and its surface forms."""

    multiplier: Decimal
    forms: frozenset[str]

    def __post_init__(self) -> None:
        if self.multiplier <= 0:
            raise PolicyError("alias: scale multipliers must be positive")
        object.__setattr__(self, "forms", frozenset(f.casefold() for f in self.forms))


@dataclass(frozen=True)
class Alias:
    """Accepts iff payload * sanctioned scale equals the reference value.

    By default the scale word must appear next to the number; with
    allow_inferred_scale the scale may be inferred from the values alone.
    """

    scales: tuple[AliasScale, ...]
    allow_inferred_scale: bool = False
    kind: str = field(default="alias", init=False)


@dataclass(frozen=True)
class Tolerance:
    """Accepts iff the payload is hedged by a qualifier and lies within
    [ref - max(delta, rho*|ref|), ref + max(delta, rho*|ref|)]."""

    delta: Decimal
    rho: Decimal
    qualifiers: frozenset[str]
    kind: str = field(default="tolerance", init=False)

    def __post_init__(self) -> None:
        if self.delta < 0 or self.rho < 0:
            raise PolicyError("tolerance: delta and rho must be >= 0")
        if not self.qualifiers:
            raise PolicyError("tolerance: qualifier set must be non-empty")
        object.__setattr__(self, "qualifiers", frozenset(q.casefold() for q in self.qualifiers))


VerificationMode = Union[Exact, Round, Alias, Tolerance]


def mode_name(mode: VerificationMode) -> str:
    if isinstance(mode, Round):
        return f"round({mode.places})"
    return mode.kind


@dataclass(frozen=True)
class PolicySpec:
    """Named, ordered set of verification modes; first matching mode is reported."""

    name: str
    modes: tuple[VerificationMode, ...]
    require_provenance: bool = False

    def __post_init__(self) -> None:
        if not self.modes:
            raise PolicyError(f"policy {self.name!r}: at least one mode is required")
        if len(set(self.modes)) != len(self.modes):
            raise PolicyError(f"policy {self.name!r}: duplicate mode")


@dataclass(frozen=True)
class NormalizedPayload:
    """A numeric span after normalization: exact value plus surface context."""

    value: Decimal
    scale_word: str | None = None
    unit_text: str | None = None
    qualifier_present: bool = False

    def __post_init__(self) -> None:
        if not self.value.is_finite():
            raise ValueError("payload value must be finite")


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    mode: VerificationMode | None
    detail: str

    def __post_init__(self) -> None:
        if self.matched != (self.mode is not None):
            raise ValueError("matched is true iff a mode is present")


def default_alias_mode(allow_inferred_scale: bool = False) -> Alias:
    return Alias(
        scales=tuple(
            AliasScale(multiplier=Decimal(mult), forms=frozenset(forms))
            for mult, forms in DEFAULT_SCALE_TABLE
        ),
        allow_inferred_scale=allow_inferred_scale,
    )


def preset_policy(name: str) -> PolicySpec:
    """Build one of the named presets; raises PolicyError for unknown names."""
    if name == "strict":
        return PolicySpec(name="strict", modes=(Exact(),))
    if name == "round1":
        return PolicySpec(name="round1", modes=(Exact(), Round(1)))
    if name == "int":
        return PolicySpec(name="int", modes=(Exact(), Round(0)))
    if name == "tolerant":
        return PolicySpec(
            name="tolerant",
            modes=(
                Exact(),
                Round(1),
                default_alias_mode(),
                Tolerance(
                    delta=Decimal(0),
                    rho=Decimal("0.01"),
                    qualifiers=frozenset(DEFAULT_QUALIFIERS),
                ),
            ),
        )
    raise PolicyError(f"unknown policy preset {name!r} (known: {', '.join(PRESET_NAMES)})")


def _decimal_param(raw: Any, *, context: str) -> Decimal:
    try:
        if isinstance(raw, bool) or raw is None:
            raise decimal.InvalidOperation
        value = raw if isinstance(raw, Decimal) else Decimal(str(raw))
    except decimal.InvalidOperation:
        raise PolicyError(f"{context}: expected a decimal, got {raw!r}") from None
    if not value.is_finite():
        raise PolicyError(f"{context}: must be finite")
    return value


def _mode_from_dict(raw: Any, *, position: int) -> VerificationMode:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise PolicyError(f"mode #{position}: expected an object with a 'kind'")
    kind = raw["kind"]
    if kind == "exact":
        return Exact()
    if kind == "round":
        if "d" not in raw:
            raise PolicyError(f"mode #{position}: round requires 'd'")
        try:
            places = int(raw["d"])
        except (TypeError, ValueError):
            raise PolicyError(f"mode #{position}: round 'd' must be an integer") from None
        return Round(places)
    if kind == "alias":
        scales_raw = raw.get("scales")
        if not isinstance(scales_raw, list) or not scales_raw:
            raise PolicyError(f"mode #{position}: alias requires a non-empty 'scales' array")
        scales = []
        for entry in scales_raw:
            if not isinstance(entry, dict):
                raise PolicyError(f"mode #{position}: alias scales must be objects")
            forms = entry.get("forms")
            if not isinstance(forms, list) or not all(isinstance(f, str) for f in forms):
                raise PolicyError(f"mode #{position}: alias scale 'forms' must be strings")
            scales.append(
                AliasScale(
                    multiplier=_decimal_param(
                        entry.get("multiplier"), context=f"mode #{position} multiplier"
                    ),
                    forms=frozenset(forms),
                )
            )
        return Alias(
            scales=tuple(scales),
            allow_inferred_scale=bool(raw.get("allow_inferred_scale", False)),
        )
    if kind == "tolerance":
        qualifiers = raw.get("qualifiers")
        if not isinstance(qualifiers, list) or not all(isinstance(q, str) for q in qualifiers):
            raise PolicyError(f"mode #{position}: tolerance requires a 'qualifiers' array")
        return Tolerance(
            delta=_decimal_param(raw.get("delta", "0"), context=f"mode #{position} delta"),
            rho=_decimal_param(raw.get("rho", "0"), context=f"mode #{position} rho"),
            qualifiers=frozenset(qualifiers),
        )
    raise PolicyError(f"mode #{position}: unknown kind {kind!r}")


def parse_policy(spec: str) -> PolicySpec:
    """Parse a preset name or an inline JSON policy document."""
    text = spec.strip()
    if not text.startswith("{"):
        return preset_policy(text)
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise PolicyError(f"policy document is malformed JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise PolicyError("policy document must be a JSON object")
    modes_raw = doc.get("modes")
    if not isinstance(modes_raw, list) or not modes_raw:
        raise PolicyError("policy document requires a non-empty 'modes' array")
    modes = tuple(_mode_from_dict(raw, position=i) for i, raw in enumerate(modes_raw))
    return PolicySpec(
        name=str(doc.get("name", "custom")),
        modes=modes,
        require_provenance=bool(doc.get("require_provenance", False)),
    )


def mode_to_dict(mode: VerificationMode) -> dict[str, Any]:
    if isinstance(mode, Exact):
        return {"kind": "exact"}
    if isinstance(mode, Round):
        return {"kind": "round", "d": mode.places}
    if isinstance(mode, Alias):
        return {
            "kind": "alias",
            "scales": [
                {"multiplier": str(scale.multiplier), "forms": sorted(scale.forms)}
                for scale in mode.scales
            ],
            "allow_inferred_scale": mode.allow_inferred_scale,
        }
    return {
        "kind": "tolerance",
        "delta": str(mode.delta),
        "rho": str(mode.rho),
        "qualifiers": sorted(mode.qualifiers),
    }


def policy_to_dict(policy: PolicySpec) -> dict[str, Any]:
    return {
        "name": policy.name,
        "modes": [mode_to_dict(mode) for mode in policy.modes],
        "require_provenance": policy.require_provenance,
    }


def round_half_away_from_zero(value: Decimal, places: int) -> Decimal:
    """Round to `places` decimals with ties going away from zero."""
    if value.as_tuple().exponent >= -places:
        return value  # no digits below the target grid
    if value.adjusted() < -(places + 1):
        return Decimal(0)  # strictly below half an ulp of the grid
    with decimal.localcontext() as ctx:
        ctx.prec = max(value.adjusted() + places + 3, 28)
        ctx.Emax = decimal.MAX_EMAX
        ctx.Emin = decimal.MIN_EMIN
        return value.quantize(Decimal(1).scaleb(-places), rounding=decimal.ROUND_HALF_UP)


def check_exact(payload: NormalizedPayload, claim: Claim) -> bool:
    """Decimal equality, insensitive to surface form ("5.70" equals "5.7")."""
    return payload.value == claim.value


def check_round(payload: NormalizedPayload, claim: Claim, places: int) -> bool:
    if places < 0:
        raise PolicyError("round: places must be >= 0")
    return round_half_away_from_zero(payload.value, places) == round_half_away_from_zero(
        claim.value, places
    )


def check_alias(payload: NormalizedPayload, claim: Claim, mode: Alias) -> bool:
    if payload.scale_word is not None:
        word = payload.scale_word.casefold()
        return any(
            _exact_mul(payload.value, scale.multiplier) == claim.value
            for scale in mode.scales
            if word in scale.forms
        )
    if not mode.allow_inferred_scale:
        return False
    return any(
        _exact_mul(payload.value, scale.multiplier) == claim.value
        for scale in mode.scales
    )


def tolerance_half_width(claim: Claim, delta: Decimal, rho: Decimal) -> Decimal:
    # copy_abs is context-free; abs() would round long values to context precision
    return max(delta, _exact_mul(rho, claim.value.copy_abs()))


def check_tolerance(
    payload: NormalizedPayload, claim: Claim, delta: Decimal, rho: Decimal
) -> bool:
    if delta < 0 or rho < 0:
        raise PolicyError("tolerance: delta and rho must be >= 0")
    if not payload.qualifier_present:
        return False
    half_width = tolerance_half_width(claim, delta, rho)
    return _exact_sub(payload.value, claim.value).copy_abs() <= half_width


def _check_mode(payload: NormalizedPayload, claim: Claim, mode: VerificationMode) -> bool:
    if isinstance(mode, Exact):
        return check_exact(payload, claim)
    if isinstance(mode, Round):
        return check_round(payload, claim, mode.places)
    if isinstance(mode, Alias):
        return check_alias(payload, claim, mode)
    return check_tolerance(payload, claim, mode.delta, mode.rho)


def _miss_distance(payload: NormalizedPayload, claim: Claim, mode: VerificationMode) -> Decimal:
    # Residual used only to pick the most informative miss for reporting.
    value = payload.value
    if isinstance(mode, Round):
        value = round_half_away_from_zero(payload.value, mode.places)
        return _exact_sub(value, round_half_away_from_zero(claim.value, mode.places)).copy_abs()
    if isinstance(mode, Alias):
        distances = [
            _exact_sub(_exact_mul(payload.value, scale.multiplier), claim.value).copy_abs()
            for scale in mode.scales
        ]
        return min(distances) if distances else _exact_sub(value, claim.value).copy_abs()
    return _exact_sub(value, claim.value).copy_abs()


def evaluate(payload: NormalizedPayload, claim: Claim, policy: PolicySpec) -> MatchResult:
    """Return the first mode in policy order that accepts, or the nearest miss."""
    for mode in policy.modes:
        if _check_mode(payload, claim, mode):
            return MatchResult(
                matched=True,
                mode=mode,
                detail=f"{mode_name(mode)}: {payload.value} ~ {claim.value}",
            )
    nearest = min(policy.modes, key=lambda mode: _miss_distance(payload, claim, mode))
    qualifier_note = ""
    if isinstance(nearest, Tolerance) and not payload.qualifier_present:
        qualifier_note = " (no qualifier present)"
    return MatchResult(
        matched=False,
        mode=None,
        detail=(
            f"no mode in policy {policy.name!r} accepts {payload.value} against "
            f"{claim.value}; nearest: {mode_name(nearest)} off by "
            f"{_miss_distance(payload, claim, nearest)}{qualifier_note}"
        ),
    )


def _scale_dominated(scale: AliasScale, other: Alias) -> bool:
    return any(
        scale.multiplier == candidate.multiplier and scale.forms <= candidate.forms
        for candidate in other.scales
    )


def _mode_dominated(stricter: VerificationMode, looser: VerificationMode) -> bool:
    if isinstance(stricter, Exact):
        # Exact payloads always survive rounding; tolerance and alias add
        # conjuncts (qualifier, scale word) an exact payload may lack.
        return isinstance(looser, (Exact, Round))
    if isinstance(stricter, Round):
        # Agreement at d decimals does not imply agreement at fewer decimals
        # (0.45 and 0.54 round to 0.5 at one place but to 0 and 1 at zero),
        # so only the identical rounding mode dominates.
        return isinstance(looser, Round) and looser.places == stricter.places
    if isinstance(stricter, Alias):
        if not isinstance(looser, Alias):
            return False
        if stricter.allow_inferred_scale and not looser.allow_inferred_scale:
            return False
        return all(_scale_dominated(scale, looser) for scale in stricter.scales)
    if isinstance(looser, Tolerance):
        return (
            stricter.delta <= looser.delta
            and stricter.rho <= looser.rho
            and stricter.qualifiers <= looser.qualifiers
        )
    return False


def policy_qualifiers(policy: PolicySpec) -> frozenset[str]:
    """Union of the qualifier vocabularies of the policy's tolerance modes.

    qualifier_present on a payload means "hedged by a word in the policy's Q";
    a policy without tolerance modes has an empty vocabulary.
    """
    words: set[str] = set()
    for mode in policy.modes:
        if isinstance(mode, Tolerance):
            words |= mode.qualifiers
    return frozenset(words)


def policy_scale_forms(policy: PolicySpec) -> frozenset[str]:
    """Union of scale surface forms the policy's alias modes can sanction."""
    forms: set[str] = set()
    for mode in policy.modes:
        if isinstance(mode, Alias):
            for scale in mode.scales:
                forms |= scale.forms
    return frozenset(forms)


def refines(stricter: PolicySpec, looser: PolicySpec) -> bool:
    """Sufficient syntactic check that every span verified under `stricter`
    is verified under `looser` (the refinement partial order)."""
    if looser.require_provenance and not stricter.require_provenance:
        return False
    return all(
        any(_mode_dominated(mode, other) for other in looser.modes) for mode in stricter.modes
    )
