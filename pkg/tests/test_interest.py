import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_quality, replay_candidates
from sgim_acts.core import ALL_STRATEGIES, INTRINSIC, Config, Strategy, place, throw
from sgim_acts.interest import InterestMap, SplitCandidate, progress, split_quality, windowed_interest

MIMIC = Strategy("mimic", 2)


def record_splits(imap):
    """Wrap ``choose_split`` so every split can be re-checked against a brute-force scan."""
    log = []
    original = imap.choose_split

    def wrapper(region, strategy, rng):
        s = imap.index[strategy]
        entries = list(region.ledgers[s])
        state = rng.bit_generator.state
        cand, q = original(region, strategy, rng)
        log.append((state, region.low.copy(), region.high.copy(), entries, imap.kappas[s], cand, q))
        return cand, q

    imap.choose_split = wrapper
    return log


def check_splits(log, cfg):
    for state, low, high, entries, kappa, cand, q in log:
        cands = replay_candidates(state, low, high, cfg.m_splits)
        pts = [e.point for e in entries]
        progs = [e.progress for e in entries]
        quals = [brute_quality(pts, progs, j, v, cfg.delta, kappa) for j, v in cands]
        best = int(np.argmax(quals))
        assert q == pytest.approx(quals[best], rel=1e-12, abs=1e-12)
        assert (cand.dim, cand.value) == cands[best]


def check_partition(imap, rng, n_points=200):
    for kind, root in imap.roots.items():
        leaves = [leaf for leaf in imap.leaves if leaf.kind == kind]
        total = sum(leaf.volume for leaf in leaves)
        assert abs(total - root.volume) <= 1e-9 * root.volume
        lows = np.array([leaf.low for leaf in leaves])
        highs = np.array([leaf.high for leaf in leaves])
        assert np.all(lows >= root.low) and np.all(highs <= root.high) and np.all(highs > lows)
        for p in rng.uniform(root.low, root.high, size=(n_points, len(root.low))):
            inside = np.all((lows <= p) & (p < highs), axis=1)
            assert inside.sum() == 1
            assert leaves[int(np.argmax(inside))] is imap.locate(kind, p)


# progress and interest -----------------------------------------------------------

def test_progress_examples():
    assert progress(-0.3, -0.3, 5, 1000) == 0.0
    assert progress(-0.5, -0.499, 1, 1000) == pytest.approx(math.tanh(1.0), abs=1e-9)
    assert math.tanh(1.0) == pytest.approx(0.7616, abs=1e-4)
    assert progress(-0.2, -0.4, 15, 1000) < 0
    with pytest.raises(ValueError):
        progress(0, 0, 0, 1000)


@given(st.floats(-1, 0), st.floats(-1, 0), st.integers(1, 50), st.floats(1, 1e4))
def test_progress_odd_bounded(g1, g2, n, alpha):
    p = progress(g1, g2, n, alpha)
    assert -1 < p < 1
    assert np.sign(p) == np.sign(g2 - g1) or abs(alpha * (g2 - g1) / n) < 1e-300
    assert progress(g2, g1, n, alpha) == -p


def test_windowed_interest_examples():
    assert windowed_interest([], 10, 1) == 0.0
    assert windowed_interest([0.5, 0.7], 10, 2) == pytest.approx(0.3)
    assert windowed_interest([1.0] * 15, 10, 1) == 1.0
    assert windowed_interest([0.0] * 5 + [1.0] * 10, 10, 1) == 1.0


# updates and splits --------------------------------------------------------------

def test_single_update_keeps_leaf(cfg, rng):
    imap = InterestMap(cfg, [INTRINSIC])
    imap.update(throw(0, 1), 0.5, [], INTRINSIC, rng)
    assert len(imap.leaves) == 2
    assert len(imap.roots["throw"].ledgers[0]) == 1
    assert imap.interest(imap.roots["throw"], INTRINSIC) == 0.5


def test_eleventh_entry_splits(cfg, rng):
    imap = InterestMap(cfg, [INTRINSIC])
    for i in range(10):
        imap.add("throw", (i - 5.0, 1.0), 0.1 * i, INTRINSIC, rng)
    assert imap.roots["throw"].is_leaf
    imap.add("throw", (4.0, 2.0), 1.0, INTRINSIC, rng)
    root = imap.roots["throw"]
    assert not root.is_leaf and len(root.children) == 2
    assert imap.leaf_count("throw") == 2
    assert sum(len(c.ledgers[0]) for c in root.children) == 11


def test_routing_by_kind(cfg, rng):
    imap = InterestMap(cfg, [INTRINSIC])
    imap.update(place(0.3), 0.2, [throw(1, 1), place(0.31)], INTRINSIC, rng)
    assert len(imap.roots["throw"].ledgers[0]) == 1
    assert len(imap.roots["place"].ledgers[0]) == 2


def test_out_of_box_points_are_clamped(cfg, rng):
    imap = InterestMap(cfg, [INTRINSIC])
    leaf = imap.add("throw", (42.0, -3.0), 0.0, INTRINSIC, rng)
    assert leaf.ledgers[0][0].point == (10.0, 0.0)


def one_dim_map(**kw):
    cfg = Config(place_box=((0.0, 10.0),), **kw)
    return cfg, InterestMap(cfg, [INTRINSIC], kinds=("place",))


def test_split_separates_progress_clusters():
    cfg, imap = one_dim_map()
    log = record_splits(imap)
    rng = np.random.default_rng(0)
    for x in (1, 2, 3, 4, 4.5):
        imap.add("place", (x,), 1.0, INTRINSIC, rng)
    for x in (5.5, 6, 7, 8, 9, 9.5):
        imap.add("place", (x,), 0.0, INTRINSIC, rng)
    root = imap.roots["place"]
    assert 4.5 < root.split_value <= 5.5
    check_splits(log, cfg)
    # an exhaustive scan over thresholds agrees that this band is optimal
    pts = [e.point for c in root.children for e in c.ledgers[0]]
    progs = [e.progress for c in root.children for e in c.ledgers[0]]
    grid = np.linspace(0.01, 9.99, 999)
    scan = [brute_quality(pts, progs, 0, v, cfg.delta, 1.0) for v in grid]
    assert max(scan) == pytest.approx(30.0)
    assert brute_quality(pts, progs, 0, root.split_value, cfg.delta, 1.0) == pytest.approx(30.0)


def test_split_tie_takes_first_candidate():
    cfg, imap = one_dim_map()
    rng = np.random.default_rng(1)
    state = rng.bit_generator.state
    for x in np.linspace(0.5, 9.5, 11):
        imap.add("place", (float(x),), 0.5, INTRINSIC, rng)  # exact in binary, so every Qual is exactly 0
    first = replay_candidates(state, np.zeros(1), np.full(1, 10.0), cfg.m_splits)[0]
    assert imap.roots["place"].split_value == first[1]


def test_split_of_a_single_point_covers_box():
    cfg, imap = one_dim_map()
    rng = np.random.default_rng(2)
    for i in range(11):
        imap.add("place", (3.0,), 0.1 * i, INTRINSIC, rng)
    c1, c2 = imap.roots["place"].children
    assert c1.low[0] == 0.0 and c1.high[0] == c2.low[0] and c2.high[0] == 10.0
    assert sorted([len(c1.ledgers[0]), len(c2.ledgers[0])]) == [0, 10]  # newest g_max kept


def test_degenerate_region_truncates():
    cfg, imap = one_dim_map()
    rng = np.random.default_rng(3)
    root = imap.roots["place"]
    root.high = root.low.copy()
    for i in range(25):
        imap.add("place", (0.0,), float(i), INTRINSIC, rng)
    assert root.is_leaf
    assert [e.progress for e in root.ledgers[0]][-1] == 24.0
    assert len(root.ledgers[0]) <= cfg.g_max


def test_split_reroutes_every_strategy(cfg, rng):
    imap = InterestMap(cfg, [INTRINSIC, MIMIC])
    for x in np.linspace(-14, 9, 6):
        imap.add("throw", (float(x), 4.0), 0.3, MIMIC, rng)
    for x in np.linspace(-14, 9, 11):
        imap.add("throw", (float(x), 4.0), float(x > 0), INTRINSIC, rng)
    children = imap.roots["throw"].children
    assert sum(len(c.ledgers[1]) for c in children) == 6
    for c in children:
        for s in range(2):
            for e in c.ledgers[s]:
                assert np.all(c.low <= e.point) and np.all(np.asarray(e.point) <= c.high)


def test_split_quality_function():
    pts = np.array([[0.0], [1.0], [2.0], [3.0]])
    progs = np.array([1.0, 1.0, 0.0, 0.0])
    assert split_quality(pts, progs, SplitCandidate(0, 1.5), 10, 1.0) == 4.0
    assert split_quality(pts, progs, SplitCandidate(0, 0.5), 10, 1.0) == pytest.approx(3 * (1 - 1 / 3))
    assert split_quality(pts, progs, SplitCandidate(0, 5.0), 10, 1.0) == 0.0


# selection -----------------------------------------------------------------------

def test_single_pair_mode2(rng):
    cfg = Config(p1=0.0, p2=1.0, p3=0.0)
    imap = InterestMap(cfg, [INTRINSIC], kinds=("place",))
    assert imap.pair_probabilities().tolist() == [[1.0]]
    sel = imap.select(rng)
    assert sel.strategy == INTRINSIC and sel.mode == 2 and sel.goal.kind == "place"


def test_shifted_probabilities():
    imap = InterestMap(Config(), ALL_STRATEGIES[:3], kinds=("place",))
    imap.roots["place"].interest[:] = [2.0, 1.0, 1.0]
    np.testing.assert_allclose(imap.pair_probabilities(), [[1.0, 0.0, 0.0]])
    imap.roots["place"].interest[:] = 0.7
    np.testing.assert_allclose(imap.pair_probabilities(), np.full((1, 3), 1 / 3))


def test_mode1_uniform_strategies(rng):
    cfg = Config(p1=1.0, p2=0.0, p3=0.0)
    imap = InterestMap(cfg, ALL_STRATEGIES)
    n = 10_000
    counts = np.zeros(7)
    for _ in range(n):
        counts[imap.index[imap.select(rng).strategy]] += 1
    p = 1 / 7
    assert np.all(np.abs(counts - n * p) <= 3 * math.sqrt(n * p * (1 - p)))


def test_costly_strategies_are_chosen_less(rng):
    cfg = Config(p1=0.0, p2=1.0, p3=0.0)
    imap = InterestMap(cfg, ALL_STRATEGIES)
    for s in ALL_STRATEGIES:
        for x in (-10.0, 0.0, 5.0):
            imap.add("throw", (x, 1.0), 0.5, s, rng)
        imap.add("place", (0.5,), 0.5, s, rng)
    probs = imap.pair_probabilities()
    i = imap.index[INTRINSIC]
    for leaf_probs in probs:
        assert np.all(leaf_probs[i] >= leaf_probs)


def test_mode3_targets_the_weakest_goal(rng):
    cfg = Config(p1=0.0, p2=0.0, p3=1.0)
    imap = InterestMap(cfg, [INTRINSIC], kinds=("place",))
    imap.add("place", (1.0,), 0.2, INTRINSIC, rng, competence=-0.1)
    imap.add("place", (-2.0,), 0.2, INTRINSIC, rng, competence=-0.6)
    imap.add("place", (2.5,), 0.2, INTRINSIC, rng)  # observed outcome, no competence
    width = 2 * math.pi
    for _ in range(50):
        sel = imap.select(rng)
        assert sel.mode == 3
        assert abs(sel.goal.values[0] + 2.0) <= 0.05 * width


def test_mode3_empty_leaf_is_uniform(rng):
    cfg = Config(p1=0.0, p2=0.0, p3=1.0)
    imap = InterestMap(cfg, [INTRINSIC], kinds=("place",))
    goals = [imap.select(rng).goal.values[0] for _ in range(200)]
    assert min(goals) < -2.5 and max(goals) > 2.5


def test_partition_dump(cfg, rng):
    imap = InterestMap(cfg, [INTRINSIC, MIMIC])
    for x in np.linspace(-14, 9, 11):
        imap.add("throw", (float(x), 1.0), 0.1, INTRINSIC, rng)
    d = imap.to_dict()
    assert d["strategies"] == ["intrinsic", "mimic_t2"]
    tree = d["roots"]["throw"]
    assert tree["split"]["dim"] in (0, 1) and len(tree["children"]) == 2
    assert d["roots"]["place"]["ledger_sizes"] == {"intrinsic": 0, "mimic_t2": 0}


# properties ----------------------------------------------------------------------

ops = st.lists(
    st.tuples(st.sampled_from(["throw", "place"]), st.floats(0, 1), st.floats(0, 1), st.floats(-1, 1),
              st.integers(0, 2)),
    min_size=1, max_size=150,
)


@settings(max_examples=40)
@given(ops, st.integers(0, 2 ** 32 - 1))
def test_partition_and_split_oracle(operations, seed):
    cfg = Config()
    strategies = [INTRINSIC, MIMIC, Strategy("emulate", 1)]
    imap = InterestMap(cfg, strategies)
    log = record_splits(imap)
    rng = np.random.default_rng(seed)
    for kind, u, v, prog, s in operations:
        root = imap.roots[kind]
        point = root.low + np.array([u, v][: len(root.low)]) * (root.high - root.low)
        imap.add(kind, tuple(point), prog, strategies[s], rng)
        for leaf in imap.leaves:
            assert all(len(ledger) <= cfg.g_max for ledger in leaf.ledgers)
    check_partition(imap, np.random.default_rng(seed), n_points=20)
    check_splits(log, cfg)
    p = imap.pair_probabilities()
    assert np.all(p >= 0) and abs(p.sum() - 1) <= 1e-9
    interest = np.array([leaf.interest for leaf in imap.leaves])
    assert interest.ravel()[np.argmax(p)] >= interest.max() - 1e-12


@given(st.lists(st.floats(0, 1), min_size=1, max_size=40), st.lists(st.floats(0, 1), min_size=1, max_size=40))
def test_doubling_cost_never_helps(social_progress, own_progress):
    # holds for non-negative progress, the regime the learner runs in
    def prob(kappa_social):
        cfg = Config(kappa_social=kappa_social)
        imap = InterestMap(cfg, [INTRINSIC, MIMIC], kinds=("place",))
        r = np.random.default_rng(0)
        for p in own_progress:
            imap.add("place", (0.0,), p, INTRINSIC, r)
        for p in social_progress:
            imap.add("place", (0.0,), p, MIMIC, r)
        leaf_interest = {leaf.id: leaf.interest.copy() for leaf in imap.leaves}
        return imap.pair_probabilities()[:, 1].sum(), leaf_interest

    p1, i1 = prob(2.0)
    p2, i2 = prob(4.0)
    assert p2 <= p1 + 1e-12
    for k in i1:
        assert i2[k][1] == pytest.approx(i1[k][1] / 2)
