from __future__ import annotations

import json

import pytest

from claimcheck import ClaimSet, index_claims, ingest_retriever_payload, parse_claim_file

RETRIEVER_PAYLOAD = json.dumps(
    {
        "data": [
            {
                "indicator_id": "NY.GDP.MKTP.KD.ZG",
                "indicator_name": "GDP growth (annual %)",
                "data": [
                    {
                        "country": "Philippines",
                        "date": "2024",
                        "value": 5.69201612823412,
                        "claim_id": "0328",
                    }
                ],
            }
        ],
        "note": {"NY.GDP.MKTP.KD.ZG": ""},
    }
).encode("utf-8")

GDP_RESPONSE = (
    "The GDP growth rate of the Philippines in 2024 is projected to be "
    '<claim id="0328">5.69%</claim> (annual %).'
)

GROWTH_CLAIM_FILE = json.dumps(
    {
        "version": 1,
        "claims": [
            {
                "claim_id": "clm_7ef6",
                "indicator": "GDP growth",
                "entity": "PHL",
                "time": "2024",
                "value": "5.7",
                "unit": "%",
            }
        ],
    }
).encode("utf-8")


@pytest.fixture
def growth_claims() -> ClaimSet:
    return parse_claim_file(GROWTH_CLAIM_FILE)


@pytest.fixture
def growth_index(growth_claims):
    return index_claims(growth_claims)


@pytest.fixture
def gdp_claims() -> ClaimSet:
    return ingest_retriever_payload(RETRIEVER_PAYLOAD)


@pytest.fixture
def gdp_index(gdp_claims):
    return index_claims(gdp_claims)
