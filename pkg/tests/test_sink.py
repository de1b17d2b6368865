"""Receiver behavior: in-order delivery, the cache, and the always-ack rule."""

from hypothesis import given, settings
from hypothesis import strategies as st

from oocsim.engine import Simulator
from oocsim.packet import DATA, Packet
from oocsim.sink import CACHING, NON_CACHING, Sink, deliverable_run


class AckRecorder:
    def __init__(self):
        self.acks = []

    def send_reverse(self, pkt):
        self.acks.append(pkt.seq)


def make_sink(policy, capacity=None):
    sim = Simulator()
    path = AckRecorder()
    return Sink(sim, path, policy, cache_capacity=capacity), path


def feed(sink, *seqs):
    for seq in seqs:
        sink.on_data(Packet(kind=DATA, seq=seq))


def delivered_seqs(sink):
    return [s for s, _ in sink.delivered]


def test_deliverable_run_cases():
    assert deliverable_run(1, set()) == []
    assert deliverable_run(1, {1, 2, 3}) == [1, 2, 3]
    assert deliverable_run(2, {2, 3, 5}) == [2, 3]
    assert deliverable_run(4, {1, 2, 3}) == []


def test_in_order_packets_deliver_immediately():
    sink, path = make_sink(NON_CACHING)
    feed(sink, 1, 2, 3)
    assert delivered_seqs(sink) == [1, 2, 3]
    assert sink.expected == 4


def test_non_caching_discards_out_of_order():
    sink, path = make_sink(NON_CACHING)
    feed(sink, 1, 3, 4, 2)
    assert delivered_seqs(sink) == [1, 2]  # 3 and 4 were thrown away
    assert sink.out_of_order_drops == 2
    feed(sink, 3)
    assert delivered_seqs(sink) == [1, 2, 3]


def test_duplicate_of_delivered_data_is_counted():
    sink, path = make_sink(NON_CACHING)
    feed(sink, 1, 1, 2, 1)
    assert delivered_seqs(sink) == [1, 2]
    assert sink.duplicates == 2


def test_caching_sink_fills_gaps_from_cache():
    sink, path = make_sink(CACHING)
    feed(sink, 1, 3, 4)
    assert delivered_seqs(sink) == [1]
    assert set(sink.cache) == {3, 4}
    feed(sink, 2)  # the hole fills; the whole run flushes at once
    assert delivered_seqs(sink) == [1, 2, 3, 4]
    assert sink.cache == {}
    assert sink.expected == 5


def test_duplicate_of_cached_packet_is_counted():
    sink, path = make_sink(CACHING)
    feed(sink, 2, 2)
    assert sink.duplicates == 1
    assert len(sink.cache) == 1


def test_cache_capacity_drops_the_arriving_packet():
    sink, path = make_sink(CACHING, capacity=2)
    feed(sink, 2, 3, 4, 5)
    assert set(sink.cache) == {2, 3}  # nothing evicted; 4 and 5 bounced
    assert sink.cache_full_drops == 2
    assert sink.peak_cache_occupancy == 2
    feed(sink, 1)
    assert delivered_seqs(sink) == [1, 2, 3]


def test_every_arrival_triggers_a_cumulative_ack():
    sink, path = make_sink(NON_CACHING)
    feed(sink, 1, 5, 1, 2)  # delivery, drop, duplicate, delivery
    assert path.acks == [1, 1, 1, 2]


def test_caching_ack_jumps_over_the_filled_gap():
    sink, path = make_sink(CACHING)
    feed(sink, 2, 3, 1)
    assert path.acks == [0, 0, 3]


@given(st.permutations(list(range(1, 13))))
@settings(max_examples=200, deadline=None)
def test_caching_sink_delivers_exact_prefix_in_any_arrival_order(order):
    sink, path = make_sink(CACHING)
    feed(sink, *order)
    assert delivered_seqs(sink) == list(range(1, 13))
    assert sink.duplicates == 0 and sink.out_of_order_drops == 0


@given(
    st.lists(st.integers(min_value=1, max_value=8), min_size=1, max_size=40),
    st.sampled_from([NON_CACHING, CACHING]),
)
@settings(max_examples=200, deadline=None)
def test_delivery_is_always_an_in_order_prefix(seqs, policy):
    """No arrival pattern, duplicates included, can make either sink deliver
    out of order or twice."""
    sink, path = make_sink(policy)
    feed(sink, *seqs)
    got = delivered_seqs(sink)
    assert got == list(range(1, len(got) + 1))
    assert sink.expected == len(got) + 1
    assert len(path.acks) == len(seqs)
    assert all(a <= b for a, b in zip(path.acks, path.acks[1:]))
