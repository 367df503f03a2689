import copy
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccnacct.core import AcctFlag, ContentObject, Interest, Nack, NackReason, Name, PInt
from ccnacct.errors import ConfigError, MissingCrSD
from ccnacct.node import Arrival, FibEntry, Node, PitEntry, generate_pint

A = Name.parse
ROOT = [FibEntry(A("/"), ("up",))]


def co(name="/a", acct=AcctFlag.AGGREGATE, expiry=100):
    return ContentObject(A(name), b"data", acct, expiry)


def test_fib_entry_needs_hops():
    with pytest.raises(ConfigError):
        FibEntry(A("/a"), ())


def test_cache_hit_emits_content_and_pint():
    n = Node("R1", ROOT)
    n.cache_insert(co())
    out = n.on_interest(Interest(A("/a")), "if0")
    assert out[0] == ("if0", co())
    face, p = out[1]
    assert face == "up"
    assert p == PInt(A("/a"), AcctFlag.AGGREGATE, b"R1", 1)
    assert n.metrics["accountable_hits"] == 1


def test_cache_hit_on_unaccounted_content_has_no_pint():
    n = Node("R1", ROOT)
    n.cache_insert(co(acct=AcctFlag.NONE))
    assert n.on_interest(Interest(A("/a")), "if0") == [("if0", co(acct=AcctFlag.NONE))]


def test_pit_hit_collapses():
    n = Node("R1", ROOT)
    assert n.on_interest(Interest(A("/a"), b"p1"), "if1") == [("up", Interest(A("/a"), b"p1"))]
    assert n.on_interest(Interest(A("/a"), b"p3"), "if3") == []
    e = n.pit[A("/a")]
    assert e.arrivals == [Arrival("if1", b"p1", True), Arrival("if3", b"p3", False)]


def test_plain_forward():
    n = Node("R1", [FibEntry(A("/"), ("if9",))])
    assert n.on_interest(Interest(A("/a")), "if2") == [("if9", Interest(A("/a")))]


def test_multicast_forwards_to_all_hops_but_pints_do_not():
    n = Node("R1", [FibEntry(A("/a"), ("if1", "if2"))], multicast=True)
    out = n.on_interest(Interest(A("/a/x")), "if0")
    assert [f for f, _ in out] == ["if1", "if2"]
    p = PInt(A("/a/x"), AcctFlag.AGGREGATE, b"R9", 1)
    assert n.on_pint(p, "if0") == [("if1", p)]


def test_no_route_is_counted():
    n = Node("R1", [FibEntry(A("/b"), ("x",))])
    assert n.on_interest(Interest(A("/a")), "if0") == []
    assert n.on_pint(PInt(A("/a"), AcctFlag.AGGREGATE, b"", 1), "if0") == []
    assert n.metrics["no_route"] == 2
    assert A("/a") not in n.pit


def test_collapsed_content_pint_reports_only_collapsed_arrivals():
    n = Node("R1", ROOT)
    n.on_interest(Interest(A("/a"), b"p2"), 2)
    for face in (3, 5, 6):
        n.on_interest(Interest(A("/a"), f"p{face}".encode()), face)
    out = n.on_content(co(acct=AcctFlag.DISTINCT), 9)
    assert [f for f, m in out if isinstance(m, ContentObject)] == [2, 3, 5, 6]
    pints = [(f, m) for f, m in out if isinstance(m, PInt)]
    assert pints == [("up", PInt(A("/a"), AcctFlag.DISTINCT, b"R1", 3, (b"p3", b"p5", b"p6")))]
    assert A("/a") not in n.pit
    assert A("/a") in n.cs


def test_single_arrival_content_has_no_pint():
    n = Node("R1", ROOT)
    n.on_interest(Interest(A("/a")), 1)
    assert n.on_content(co(), "up") == [(1, co())]


def test_unsolicited_content_dropped():
    n = Node("R1", ROOT)
    assert n.on_content(co(), "up") == []
    assert n.metrics["unsolicited"] == 1
    assert not n.cs


def test_zero_expiry_never_cached():
    n = Node("R1", ROOT)
    n.on_interest(Interest(A("/a")), 1)
    n.on_content(co(expiry=0), "up")
    assert not n.cs
    assert not n.cache_insert(co(expiry=0))


def test_nack_flushes_entry():
    n = Node("R1", ROOT)
    n.on_interest(Interest(A("/a")), 1)
    n.on_interest(Interest(A("/a")), 2)
    nack = Nack(A("/a"), NackReason.MISSING_CRSD, b"")
    assert n.on_nack(nack, "up") == [(1, nack), (2, nack)]
    assert not n.pit


def test_collapsing_disabled_forwards_every_interest():
    n = Node("R1", ROOT, collapsing=False)
    n.on_interest(Interest(A("/a")), 1)
    assert n.on_interest(Interest(A("/a")), 2) == [("up", Interest(A("/a")))]
    out = n.on_content(co(), "up")
    assert not any(isinstance(m, PInt) for _, m in out)


# -- generate_pint --------------------------------------------------------------------


def test_generate_pint_cache_hit_individual():
    p = generate_pint(co(acct=AcctFlag.INDIVIDUAL), Interest(A("/a"), b"abc"), None, b"R", True)
    assert (p.count, p.cdata) == (1, (b"abc",))


def test_generate_pint_collapsed_distinct():
    entry = PitEntry(A("/a"), [Arrival(0, b"w", True), Arrival(1, b"x", False),
                               Arrival(2, b"y", False), Arrival(3, b"z", False)])
    p = generate_pint(co(acct=AcctFlag.DISTINCT), None, entry, b"R", False)
    assert (p.count, p.cdata) == (3, (b"x", b"y", b"z"))


def test_generate_pint_collapsed_aggregate_hand_simulated():
    n = Node("R1", ROOT)
    for face in range(5):
        n.on_interest(Interest(A("/a"), b"pl"), face)
    entry = n.pit[A("/a")]
    p = generate_pint(co(), None, entry, b"R1", False)
    assert (p.count, p.cdata) == (4, ())


def test_generate_pint_preconditions():
    with pytest.raises(ValueError):
        generate_pint(co(acct=AcctFlag.NONE), Interest(A("/a")), None, b"R", True)
    with pytest.raises(ValueError):
        generate_pint(co(), None, None, b"R", True)
    with pytest.raises(ValueError):
        generate_pint(co(), None, PitEntry(A("/a"), [Arrival(0, None, True)]), b"R", False)


def test_missing_payload_policy():
    i = Interest(A("/a"))
    assert generate_pint(co(acct=AcctFlag.DISTINCT), i, None, b"R", True).cdata == (b"",)
    with pytest.raises(MissingCrSD):
        generate_pint(co(acct=AcctFlag.DISTINCT), i, None, b"R", True, strict=True)


# -- content store -------------------------------------------------------------------------


def test_evict_boundary():
    n = Node("R1", ROOT)
    n.cache_insert(co(expiry=10))
    n.clock = 9
    assert n.evict_expired() == 0
    n.clock = 10
    assert n.evict_expired() == 1
    assert not n.cs


def test_evict_against_filter_oracle():
    rng = random.Random(3)
    n = Node("R1", ROOT)
    expiries = {}
    for i in range(100):
        n.clock = rng.randint(0, 50)
        c = co(f"/n{i}", expiry=rng.randint(1, 60))
        n.cache_insert(c)
        expiries[c.name] = n.clock + c.expiry_time
    n.clock = 55
    survivors = {k for k, v in expiries.items() if v > 55}
    removed = n.evict_expired()
    assert set(n.cs) == survivors
    assert removed == 100 - len(survivors)


def test_lru_capacity():
    n = Node("R1", ROOT, cache_capacity=2)
    n.cache_insert(co("/a"))
    n.cache_insert(co("/b"))
    n.cache_lookup(A("/a"))
    n.cache_insert(co("/c"))
    assert list(n.cs) == [A("/a"), A("/c")]


def test_batching_sums_counts_per_window():
    n = Node("R1", ROOT, batch_window=5)
    n.cache_insert(co())
    for t in (0, 1, 2):
        n.clock = t
        out = n.on_interest(Interest(A("/a")), t)
        assert not any(isinstance(m, PInt) for _, m in out)
    assert n.take_timers() == [5]
    n.clock = 4
    assert n.flush_batches() == []
    n.clock = 5
    assert n.flush_batches() == [("up", PInt(A("/a"), AcctFlag.AGGREGATE, b"R1", 3))]


# -- properties ----------------------------------------------------------------------------

ops = st.lists(
    st.tuples(
        st.sampled_from(["interest", "content", "pint"]),
        st.sampled_from(["/a", "/b", "/a/x"]),
        st.integers(0, 3),
        st.sampled_from(list(AcctFlag)),
    ),
    max_size=30,
)


def _snapshot(n: Node):
    return copy.deepcopy((n.cs, n.pit))


@settings(max_examples=200, deadline=None)
@given(ops, st.booleans(), st.booleans())
def test_pint_statelessness_and_unicast(trace, multicast, collapsing):
    n = Node("R1", [FibEntry(A("/"), ("u1", "u2"))], multicast=multicast, collapsing=collapsing)
    for kind, name, face, acct in trace:
        n.clock += 1
        if kind == "interest":
            out = n.on_interest(Interest(A(name), b"p%d" % face), face)
        elif kind == "content":
            out = n.on_content(ContentObject(A(name), b"", acct, 3), "u1")
        else:
            before = _snapshot(n)
            ptype = acct if acct is not AcctFlag.NONE else AcctFlag.AGGREGATE
            out = n.on_pint(PInt(A(name), ptype, b"X", 1, () if ptype is AcctFlag.AGGREGATE else (b"",)), face)
            assert _snapshot(n) == before
        pints = [f for f, m in out if isinstance(m, PInt)]
        assert len(pints) <= 1
        for entry in n.pit.values():
            assert entry.arrivals[0].forwarded
            if collapsing:
                assert sum(a.forwarded for a in entry.arrivals) == 1
                assert len({a.face for a in entry.arrivals}) == len(entry.arrivals)
    assert n.metrics["pints_cache_hit"] == n.metrics["accountable_hits"]
