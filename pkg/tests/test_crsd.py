import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccnacct.core import Name
from ccnacct.crsd import (
    ACrSD,
    CrSD,
    CrsdForm,
    MacKey,
    NonceStamp,
    ReplayWindow,
    SecCrSD,
    SigningKey,
    Verdict,
    collision_probability,
    collision_probability_exact,
    make_a_crsd,
    make_a_crsd_symmetric,
    make_sec_crsd,
    open_a_crsd,
    open_a_crsd_symmetric,
    parse_payload,
    verify_sec_crsd,
)
from ccnacct.errors import DecryptFailure, MalformedMessage, UnknownKey
from ccnacct.keys import KeyRegistry

A = Name.parse
ALICE = CrSD(CrsdForm.PSEUDONYM, b"alice")


def _key(style):
    return MacKey(b"k" * 32) if style == "mac" else SigningKey(bytes(range(32)))


@pytest.mark.parametrize("style", ["mac", "sign"])
def test_sec_crsd_accept_and_name_binding(style):
    key = _key(style)
    s = make_sec_crsd(ALICE, A("/a"), key, 100, random.Random(1))
    verifier = key if style == "mac" else key.public()
    assert verify_sec_crsd(s, A("/a"), verifier, ReplayWindow()) is Verdict.ACCEPT
    w = ReplayWindow()
    assert verify_sec_crsd(s, A("/b"), verifier, w) is Verdict.BAD_TAG
    assert len(w) == 0


def test_nonces_distinct():
    rng = random.Random(5)
    key = _key("mac")
    nonces = {make_sec_crsd(ALICE, A("/a"), key, 0, rng).nonce for _ in range(2000)}
    assert len(nonces) == 2000
    assert all(len(n) == 16 for n in nonces)


def test_crsd_forms():
    with pytest.raises(ValueError):
        CrSD(CrsdForm.CONSUMER_KEY_DIGEST, b"")
    CrSD(CrsdForm.NONCE_ONLY)


def test_replay_same_window():
    key = _key("mac")
    w = ReplayWindow(300)
    w.advance(1000)
    s = make_sec_crsd(ALICE, A("/a"), key, 1000, random.Random(2))
    assert verify_sec_crsd(s, A("/a"), key, w) is Verdict.ACCEPT
    assert verify_sec_crsd(s, A("/a"), key, w) is Verdict.REPLAY


@pytest.mark.parametrize("delta", [-301, -300, -1, 0, 1, 300, 301, 10_000])
def test_staleness_matches_window_arithmetic(delta):
    key = _key("mac")
    clock, width = 5000, 300
    w = ReplayWindow(width)
    w.advance(clock)
    t = clock + delta
    s = make_sec_crsd(ALICE, A("/a"), key, t, random.Random(delta & 0xFFFF))
    expected = Verdict.ACCEPT if clock - width <= t <= clock + width else Verdict.STALE_TIMESTAMP
    assert verify_sec_crsd(s, A("/a"), key, w) is expected


def test_window_forgets_old_nonces():
    w = ReplayWindow(10)
    w.record(b"n1", 0)
    w.record(b"n2", 8)
    w.advance(15)
    assert not w.seen(b"n1") and w.seen(b"n2")
    w.advance(100)
    assert len(w) == 0


def _flip_all(buf: bytes):
    for i in range(len(buf)):
        for b in range(8):
            out = bytearray(buf)
            out[i] ^= 1 << b
            yield bytes(out)


@pytest.mark.parametrize("style", ["mac", "sign"])
def test_single_bit_flips_never_verify(style):
    key = _key(style)
    verifier = key if style == "mac" else key.public()
    crsd = CrSD(CrsdForm.PSEUDONYM, b"c1")
    name = A("/n")
    s = make_sec_crsd(crsd, name, key, 7, random.Random(0), nonce_bits=16)

    def check(c, nonce, t, n, tag):
        w = ReplayWindow(2**62)
        assert verify_sec_crsd(SecCrSD(c, nonce, t, tag), n, verifier, w) is Verdict.BAD_TAG

    for ident in _flip_all(crsd.identity):
        check(CrSD(crsd.form, ident), s.nonce, s.timestamp, name, s.tag)
    for nonce in _flip_all(s.nonce):
        check(crsd, nonce, s.timestamp, name, s.tag)
    for bit in range(64):
        check(crsd, s.nonce, s.timestamp ^ (1 << bit), name, s.tag)
    for comp in _flip_all(name.components[0]):
        check(crsd, s.nonce, s.timestamp, Name((comp,)), s.tag)
    for tag in _flip_all(s.tag):
        check(crsd, s.nonce, s.timestamp, name, tag)


def test_payload_parsing():
    s = make_sec_crsd(ALICE, A("/a"), _key("mac"), 3, random.Random(0))
    assert parse_payload(s.to_bytes()) == s
    ns = NonceStamp(b"\x01" * 16, 42)
    assert parse_payload(ns.to_bytes()) == ns
    for bad in (b"", b"\x00", s.to_bytes()[:-1], s.to_bytes() + b"x"):
        with pytest.raises(MalformedMessage):
            parse_payload(bad)


def test_a_crsd_round_trip_and_randomisation():
    reg = KeyRegistry.generate([A("/p")], ["alice"], random.Random(9))
    s = make_sec_crsd(ALICE, A("/p/x"), reg.tag_key("alice", A("/p/x")), 1, random.Random(3))
    rng = random.Random(4)
    cts = [make_a_crsd(s, reg.public_key(A("/p")), rng) for _ in range(100)]
    assert len({c.ciphertext for c in cts}) == 100
    for c in cts[:10]:
        assert open_a_crsd(c, reg.secret_key(A("/p"))) == s
    other = KeyRegistry.generate([A("/p")], [], random.Random(10))
    with pytest.raises(DecryptFailure):
        open_a_crsd(cts[0], other.secret_key(A("/p")))
    tampered = bytearray(cts[0].ciphertext)
    tampered[-1] ^= 1
    with pytest.raises(DecryptFailure):
        open_a_crsd(ACrSD(bytes(tampered)), reg.secret_key(A("/p")))


def test_symmetric_a_crsd():
    s = make_sec_crsd(ALICE, A("/p/x"), _key("mac"), 1, random.Random(3))
    key = bytes(range(32))
    a1 = make_a_crsd_symmetric(s, key, b"t1", random.Random(1))
    a2 = make_a_crsd_symmetric(s, key, b"t1", random.Random(2))
    assert a1.symmetric and a1.key_tag == b"t1"
    assert a1.ciphertext != a2.ciphertext
    assert open_a_crsd_symmetric(a1, key) == s
    with pytest.raises(DecryptFailure):
        open_a_crsd_symmetric(a1, bytes(32))


def test_registry_unknown_key_and_text_round_trip(tmp_path):
    reg = KeyRegistry.generate([A("/p")], ["alice", "bob"], random.Random(9), style="sign")
    with pytest.raises(UnknownKey):
        reg.public_key(A("/q"))
    with pytest.raises(UnknownKey):
        reg.tag_key("carol", A("/p/x"))
    path = tmp_path / "keys.txt"
    reg.dump(path)
    again = KeyRegistry.load(path)
    assert again.to_text() == reg.to_text()
    s = make_sec_crsd(ALICE, A("/p/x"), reg.tag_key("alice", A("/p/x")), 0, random.Random(0))
    v = verify_sec_crsd(s, A("/p/x"), again.verify_key("alice", A("/p/x")), ReplayWindow())
    assert v is Verdict.ACCEPT


# -- collision probability ----------------------------------------------------------------


def _enumerate(bits, s):
    space = range(2**bits)
    draws = list(itertools.product(space, repeat=s))
    hits = sum(len(set(d)) < s for d in draws)
    return Fraction(hits, len(draws))


@pytest.mark.parametrize("bits,s", [(1, 2), (2, 2), (2, 3), (3, 3), (2, 4), (2, 5)])
def test_collision_against_enumeration(bits, s):
    exact = _enumerate(bits, s)
    assert collision_probability_exact(bits, s) == exact
    assert collision_probability(bits, s) == pytest.approx(float(exact), abs=1e-15)


def test_collision_edges():
    assert collision_probability(1, 2) == 0.5
    for bits in (1, 8, 128):
        assert collision_probability(bits, 1) == 0.0
        assert collision_probability(bits, 0) == 0.0
    assert collision_probability(8, 257) == 1.0
    assert collision_probability_exact(8, 256) < 1
    assert collision_probability(4, 17) == 1.0


def test_collision_large_s_matches_exact():
    for bits, s in ((16, 300), (20, 5000), (24, 10_000)):
        exact = float(collision_probability_exact(bits, s))
        assert collision_probability(bits, s) == pytest.approx(exact, rel=1e-9)


def test_collision_monte_carlo_n8_s20():
    rng = np.random.default_rng(20)
    trials = 200_000
    draws = rng.integers(0, 256, size=(trials, 20))
    draws.sort(axis=1)
    est = float((np.diff(draws, axis=1) == 0).any(axis=1).mean())
    assert abs(est - collision_probability(8, 20)) < 0.005


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 40), st.integers(0, 3000))
def test_collision_monotone_and_bounded(bits, s):
    p = collision_probability(bits, s)
    assert 0.0 <= p <= 1.0
    assert collision_probability(bits, s + 1) >= p
    assert collision_probability(bits + 1, s) <= p
