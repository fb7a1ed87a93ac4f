"""Shared fixtures."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import BASE_TS, corpus_of, rec  # noqa: E402


@pytest.fixture
def ten_record_corpus():
    """10 records, 2 accounts, 2 days (hand-counted in tests)."""
    day1 = BASE_TS
    day2 = BASE_TS + 86400
    records = [
        rec(1, "acct-a", day1, "original", hashtags=["x"]),
        rec(2, "acct-a", day1, "reply", mentions=["acct-b"]),
        rec(3, "acct-a", day1, "retweet", rt_id="9", rt_account="acct-b"),
        rec(4, "acct-a", day2, "original"),
        rec(5, "acct-a", day2, "original"),
        rec(6, "acct-b", day1, "original", hashtags=["x", "y"]),
        rec(7, "acct-b", day1, "original"),
        rec(8, "acct-b", day2, "retweet", rt_id="1", rt_account="acct-a"),
        rec(9, "acct-b", day2, "original"),
        rec(10, "acct-b", day2, "reply", mentions=["acct-a"]),
    ]
    return corpus_of(*records)
