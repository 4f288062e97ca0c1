import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palmlmdp import evaluation as ev
from palmlmdp.descriptor import Descriptor
from palmlmdp.errors import InputError


def trials(genuine, impostor):
    return [ev.MatchTrial(s, True) for s in genuine] + [ev.MatchTrial(s, False) for s in impostor]


def desc(counts, ident=""):
    counts = np.asarray(counts)
    return Descriptor("lmdp", 16, 1, counts.size, counts, ident)


@pytest.mark.parametrize("genuine, impostor, expected", [
    ([0.1, 0.2], [0.8, 0.9], 0.0),
    ([0.9], [0.1], 1.0),
    ([0.1, 0.6], [0.4, 0.9], 0.5),
])
def test_eer_examples(genuine, impostor, expected):
    eer, roc = ev.compute_eer(trials(genuine, impostor))
    assert eer == pytest.approx(expected, abs=1e-12)


def test_eer_interpolated_hand_value():
    # genuine {1,3,4}, impostor {2,5}
    # t=-inf (0, 1); t=1 (0, 2/3); t=2 (1/2, 2/3); t=3 (1/2, 1/3)
    # d = FAR-FRR: -1, -2/3, -1/6, +1/6 -> crossing halfway between t=2 and t=3
    # EER = 1/2 + 0.5 * (1/2 - 1/2) = 0.5 ; FRR side: 2/3 + 0.5*(1/3-2/3) = 0.5
    eer, _ = ev.compute_eer(trials([1, 3, 4], [2, 5]))
    assert eer == pytest.approx(0.5)


def test_eer_needs_both_classes():
    with pytest.raises(InputError):
        ev.compute_eer(trials([0.1], []))


scores = st.lists(st.integers(0, 30).map(float), min_size=1, max_size=25)


@settings(max_examples=200, deadline=None)
@given(scores, scores)
def test_roc_monotone_and_eer_range(g, i):
    eer, roc = ev.compute_eer(trials(g, i))
    far = [p.far for p in roc]
    frr = [p.frr for p in roc]
    assert all(a <= b for a, b in zip(far, far[1:]))
    assert all(a >= b for a, b in zip(frr, frr[1:]))
    assert 0.0 <= eer <= 1.0
    assert roc.points[-1].far == 1.0 and roc.points[-1].frr == 0.0


@settings(max_examples=200, deadline=None)
@given(scores, scores)
def test_eer_invariant_under_increasing_transform(g, i):
    base, _ = ev.compute_eer(trials(g, i))
    warped, _ = ev.compute_eer(trials([np.sqrt(s) * 7 + 2 for s in g], [np.sqrt(s) * 7 + 2 for s in i]))
    assert warped == pytest.approx(base, abs=1e-12)


def test_all_pairs_counts():
    samples = [("a", desc([1, 0])), ("a", desc([1, 0])), ("b", desc([0, 3]))]
    t = ev.all_pairs_verification(samples)
    assert len(t) == 3
    assert sum(x.genuine for x in t) == 1
    genuine = next(x for x in t if x.genuine)
    assert genuine.score == 0.0
    rng = np.random.default_rng(0)
    many = [(f"p{k % 4}", desc(rng.integers(0, 9, 6))) for k in range(11)]
    serial = ev.all_pairs_verification(many)
    assert len(serial) == 11 * 10 // 2
    assert serial == ev.all_pairs_verification(many, jobs=4)


def test_all_pairs_degenerate():
    with pytest.raises(InputError):
        ev.all_pairs_verification([("a", desc([1]))])
    with pytest.raises(InputError):
        ev.all_pairs_verification([("a", desc([1])), ("a", desc([2]))])


def test_identification():
    a1, a2 = desc([10, 0, 0]), desc([9, 1, 0])
    b1, b2 = desc([0, 0, 10]), desc([0, 1, 9])
    samples = [("a", a1), ("a", a2), ("b", b1), ("b", b2)]
    assert ev.identification(samples, 1) == (1.0, 2)
    # query identical to its template
    assert ev.identification([("a", a1), ("a", a1), ("b", b1), ("b", b1)], 1) == (1.0, 2)
    with pytest.raises(InputError):
        ev.identification(samples, 2)


def test_identification_tie_goes_to_first_template():
    q = desc([1, 1])
    samples = [("a", desc([2, 0])), ("a", desc([5, 5])), ("b", desc([0, 2])), ("b", q)]
    # query [1,1] is equidistant from a's and b's template; a comes first
    acc, n = ev.identification(samples, 1)
    assert n == 2 and acc == 0.5


def test_dpn_distribution_constant(bank):
    stats = ev.dpn_distribution([np.full((32, 32), 100.0)], bank)
    assert stats.pct_dpn0 == 100.0
    assert stats.n_pixels == 1024


def test_dpn_distribution_sums(bank):
    rng = np.random.default_rng(5)
    imgs = [rng.uniform(0, 255, (40, 40)) for _ in range(2)]
    s = ev.dpn_distribution(imgs, bank)
    assert s.pct_dpn0 + s.pct_dpn1 + s.pct_dpn2 + s.pct_dpn3plus == pytest.approx(100.0, abs=0.01)
    with pytest.raises(InputError):
        ev.dpn_distribution([], bank)


def test_output_formats():
    eer, roc = ev.compute_eer(trials([0.1, 0.6], [0.4, 0.9]))
    csv = ev.roc_to_csv(roc).splitlines()
    assert csv[0] == "threshold,far,frr"
    assert csv[1] == "-inf,0.0,1.0"
    assert len(csv) == 1 + 5
    rep = ev.format_report(ev.EvalReport(eer=eer, rank1={1: 1.0}, n_queries={1: 4}), {"method": "lmdp"})
    kv = dict(line.split("=", 1) for line in rep.splitlines())
    assert kv["config.method"] == "lmdp"
    assert float(kv["eer"]) == 0.5
    assert kv["rank1.k1"] == "1.0"
