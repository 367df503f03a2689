import pytest
from hypothesis import given
from hypothesis import strategies as st

from ccnacct.analytic import (
    Scheme,
    content_size,
    message_counts,
    overhead_ratio,
    overhead_series,
    pint_size,
    total_overhead,
)
from ccnacct.codec import encode
from ccnacct.core import AcctFlag, ContentObject, Name, PInt

PAYLOADS = [10, 100, 1_000, 10_000, 100_000, 1_000_000]


@pytest.mark.parametrize("scheme,per_gamma", [
    (Scheme.ENCRYPTION, (4, 2)),
    (Scheme.PINT, (2, 1)),
    (Scheme.CACHELESS, (2, 2)),
])
def test_counts_per_scheme(scheme, per_gamma):
    for g in (0, 1, 2, 3, 10, 100):
        c = message_counts(scheme, g)
        assert (c.p_l, c.p_r) == (per_gamma[0] * g, per_gamma[1] * g)


def test_negative_gamma():
    with pytest.raises(ValueError):
        message_counts(Scheme.PINT, -1)


@given(st.integers(1, 10**6))
def test_scheme_relations(g):
    enc, pint, flat = (message_counts(s, g) for s in (Scheme.ENCRYPTION, Scheme.PINT, Scheme.CACHELESS))
    assert enc.p_l == 2 * pint.p_l and enc.p_r == 2 * pint.p_r
    assert flat.p_r > pint.p_r


def test_overhead_golden_at_one_kilobyte():
    # 40-byte name: pInt is 54 bytes, a 1000-byte content object is 1060
    assert pint_size() == 54
    assert content_size(1000) == 1060
    assert overhead_ratio(1000, link_index=2) == 54 / 1060


def test_sizes_match_encoder():
    name = Name((b"n" * 40,))
    assert pint_size() == len(encode(PInt(name, AcctFlag.AGGREGATE, b"", 1)))
    for size in PAYLOADS[:4]:
        co = ContentObject(name, bytes(size), AcctFlag.AGGREGATE, 1)
        assert content_size(size) == len(encode(co))


def test_consumer_link_carries_nothing():
    for n in (2, 3, 4):
        for size in PAYLOADS:
            assert overhead_ratio(size, link_index=1, total_links=n) == 0.0


def test_series_decreasing_in_payload():
    rows = overhead_series([2, 3, 4], PAYLOADS)
    for n in (2, 3, 4):
        for idx in range(2, n + 1):
            ratios = [r for (nl, i, _, r) in rows if nl == n and i == idx]
            assert len(ratios) == len(PAYLOADS)
            assert all(a > b for a, b in zip(ratios, ratios[1:]))


def test_more_links_more_total_overhead():
    for size in PAYLOADS:
        per_link = pint_size() / content_size(size)
        assert total_overhead(4, size) == pytest.approx(3 * per_link)
        assert total_overhead(2, size) == pytest.approx(per_link)
        assert total_overhead(4, size) > total_overhead(2, size)


def test_bad_link_index():
    with pytest.raises(ValueError):
        overhead_ratio(10, link_index=3, total_links=2)
    with pytest.raises(ValueError):
        overhead_ratio(-1)
