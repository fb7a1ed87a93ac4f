"""Statistics kernel against independent oracles.

Oracles here deliberately take different routes than the production
code: scipy rank transforms + numpy Pearson for spearman, direct
pair-counting for U and AUC, and full combinatorial enumeration for
exact Mann-Whitney p-values.
"""

import itertools
import math
import random

import numpy as np
import pytest
import scipy.stats

from coordnet.stats import (
    bootstrap_se,
    cohens_kappa,
    column_deltas,
    daily_mean_series,
    kappa_from_table,
    language_mix,
    mann_whitney_u,
    rankdata,
    reshuffle_eval,
    roc_auc,
    spearman,
)

from helpers import corpus_of, rec


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def oracle_spearman(x, y):
    rx = scipy.stats.rankdata(x, method="average")
    ry = scipy.stats.rankdata(y, method="average")
    return float(np.corrcoef(rx, ry)[0, 1])


def oracle_u(a, b):
    """U as a direct pair count: wins + half-ties for sample a."""
    u = 0.0
    for x in a:
        for y in b:
            if x > y:
                u += 1.0
            elif x == y:
                u += 0.5
    return u


def oracle_exact_p(a, b):
    """Two-sided exact p by enumerating every group arrangement."""
    combined = list(a) + list(b)
    n1 = len(a)
    n = len(combined)
    mu = n1 * (n - n1) / 2.0
    d_obs = abs(oracle_u(a, b) - mu)
    hits = 0
    total = 0
    for combo in itertools.combinations(range(n), n1):
        chosen = set(combo)
        aa = [combined[i] for i in combo]
        bb = [combined[i] for i in range(n) if i not in chosen]
        total += 1
        if abs(oracle_u(aa, bb) - mu) >= d_obs - 1e-9:
            hits += 1
    return hits / total


def oracle_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    return oracle_u(pos, neg) / (len(pos) * len(neg))


# ---------------------------------------------------------------------------
# Spearman
# ---------------------------------------------------------------------------


class TestSpearman:
    def test_monotone(self):
        assert spearman([1, 2, 3], [10, 20, 30]).statistic == 1.0

    def test_reversed(self):
        assert spearman([1, 2, 3], [3, 2, 1]).statistic == -1.0

    def test_hand_example_matches_rank_pearson_oracle(self):
        x = [1, 2, 3, 4, 5]
        y = [2, 1, 4, 3, 5]
        expected = oracle_spearman(x, y)  # = 0.8 by hand: 1 - 6*4/120
        assert abs(expected - 0.8) < 1e-12
        assert abs(spearman(x, y).statistic - expected) < 1e-12

    def test_matches_oracle_with_ties_randomized(self):
        rnd = random.Random(11)
        for _ in range(200):
            n = rnd.randint(3, 40)
            x = [rnd.randint(0, 8) / 2.0 for _ in range(n)]
            y = [rnd.randint(0, 8) / 2.0 for _ in range(n)]
            expected = oracle_spearman(x, y)
            got = spearman(x, y).statistic
            if math.isnan(expected):
                assert got is None
            else:
                assert abs(got - expected) < 1e-12

    def test_constant_input_undefined(self):
        res = spearman([1.0, 1.0, 1.0], [1, 2, 3])
        assert res.statistic is None
        assert res.p_value is None

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            spearman([1, 2, 3], [1, 2])

    def test_too_short(self):
        with pytest.raises(ValueError):
            spearman([1, 2], [1, 2])

    def test_p_matches_scipy_t_approximation(self):
        rnd = random.Random(3)
        for _ in range(50):
            n = rnd.randint(4, 30)
            x = [rnd.random() for _ in range(n)]
            y = [rnd.random() for _ in range(n)]
            res = spearman(x, y)
            ref = scipy.stats.spearmanr(x, y)
            assert abs(res.statistic - ref.statistic) < 1e-12
            assert abs(res.p_value - ref.pvalue) < 1e-9

    def test_perfect_rho_gives_zero_p(self):
        assert spearman([1, 2, 3, 4], [2, 4, 6, 8]).p_value == 0.0

    def test_exact_permutation_small_n(self):
        x = [1, 2, 3, 4]
        y = [2, 1, 4, 3]
        res = spearman(x, y, method="exact")
        # enumerate all 24 permutations directly
        rx = rankdata(x)
        hits = 0
        for perm in itertools.permutations(rankdata(y)):
            r = np.corrcoef(rx, perm)[0, 1]
            if abs(r) >= abs(res.statistic) - 1e-12:
                hits += 1
        assert res.p_value == hits / 24

    def test_invariant_under_increasing_transform(self):
        rnd = random.Random(5)
        x = [rnd.random() for _ in range(12)]
        y = [rnd.random() for _ in range(12)]
        base = spearman(x, y)
        warped = spearman([math.exp(v) for v in x], [v**3 for v in y])
        assert warped.statistic == base.statistic
        assert warped.p_value == base.p_value


# ---------------------------------------------------------------------------
# Mann-Whitney U
# ---------------------------------------------------------------------------


class TestMannWhitney:
    def test_complete_separation(self):
        assert mann_whitney_u([1, 2], [3, 4]).statistic == 0.0

    def test_identical_samples_give_half(self):
        for sample in ([1, 2], [3, 3, 3], [1.5, 2.5, 9, 9]):
            res = mann_whitney_u(sample, list(sample))
            assert res.statistic == len(sample) ** 2 / 2.0

    def test_hand_example_interleaved(self):
        res = mann_whitney_u([1, 3, 5], [2, 4])
        assert res.statistic == oracle_u([1, 3, 5], [2, 4]) == 3.0
        assert res.p_value == oracle_exact_p([1, 3, 5], [2, 4]) == 1.0
        assert res.method == "mwu-exact"

    def test_exact_matches_enumeration_all_small_shapes(self):
        rnd = random.Random(23)
        for n1 in range(1, 6):
            for n2 in range(1, 6):
                if n1 + n2 > 8:
                    continue
                for _ in range(5):
                    pool = rnd.sample(range(100), n1 + n2)
                    a = [float(v) for v in pool[:n1]]
                    b = [float(v) for v in pool[n1:]]
                    res = mann_whitney_u(a, b)
                    assert res.method == "mwu-exact"
                    assert abs(res.p_value - oracle_exact_p(a, b)) < 1e-12
                    assert res.statistic == oracle_u(a, b)

    def test_u_statistic_matches_pair_count_with_ties(self):
        rnd = random.Random(29)
        for _ in range(100):
            a = [rnd.randint(0, 5) for _ in range(rnd.randint(1, 20))]
            b = [rnd.randint(0, 5) for _ in range(rnd.randint(1, 20))]
            assert mann_whitney_u(a, b).statistic == oracle_u(a, b)

    def test_ties_fall_back_to_normal(self):
        res = mann_whitney_u([1, 1], [1, 2])
        assert res.method == "mwu-normal"

    def test_exact_refuses_ties(self):
        with pytest.raises(ValueError, match="tied"):
            mann_whitney_u([1, 1], [1, 2], method="exact")

    def test_normal_close_to_exact_when_min_n_at_least_3(self):
        # agreement bound holds from min(n1, n2) >= 3 (max gap 0.0375)
        for n1 in range(3, 6):
            for n2 in range(3, 6):
                if n1 + n2 > 8:
                    continue
                values = list(range(n1 + n2))
                for combo in itertools.combinations(range(n1 + n2), n1):
                    chosen = set(combo)
                    a = [float(values[i]) for i in combo]
                    b = [float(values[i]) for i in range(n1 + n2) if i not in chosen]
                    p_exact = mann_whitney_u(a, b, method="exact").p_value
                    p_norm = mann_whitney_u(a, b, method="normal").p_value
                    assert abs(p_exact - p_norm) < 0.05

    def test_all_values_tied_p_is_one(self):
        assert mann_whitney_u([2, 2], [2, 2, 2]).p_value == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mann_whitney_u([], [1])

    def test_invariant_under_increasing_transform(self):
        a = [0.1, 0.5, 0.5, 2.0]
        b = [0.3, 0.7, 1.1]
        base = mann_whitney_u(a, b)
        warped = mann_whitney_u([math.exp(v) for v in a], [math.exp(v) for v in b])
        assert warped.statistic == base.statistic
        assert warped.p_value == base.p_value

    def test_large_sample_p_matches_scipy(self):
        rnd = random.Random(41)
        a = [rnd.gauss(0, 1) for _ in range(40)]
        b = [rnd.gauss(0.5, 1) for _ in range(35)]
        res = mann_whitney_u(a, b)
        ref = scipy.stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic")
        assert abs(res.statistic - ref.statistic) < 1e-9
        assert abs(res.p_value - ref.pvalue) < 1e-9


# ---------------------------------------------------------------------------
# ROC-AUC
# ---------------------------------------------------------------------------


class TestRocAuc:
    def test_perfect_separation(self):
        assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]).statistic == 1.0

    def test_all_scores_equal(self):
        assert roc_auc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]).statistic == 0.5

    def test_hand_example(self):
        # pairs: (0.9>0.6), (0.9>0.1), (0.4<0.6), (0.4>0.1) -> 3/4
        res = roc_auc([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0])
        assert res.statistic == 0.75
        assert res.statistic == oracle_auc([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0])

    def test_matches_pair_count_oracle_randomized(self):
        rnd = random.Random(17)
        for _ in range(100):
            n = rnd.randint(4, 30)
            scores = [rnd.randint(0, 10) / 10.0 for _ in range(n)]
            labels = [rnd.randint(0, 1) for _ in range(n)]
            if not any(labels) or all(labels):
                continue
            assert abs(roc_auc(scores, labels).statistic - oracle_auc(scores, labels)) < 1e-12

    def test_auc_identity_with_u(self):
        rnd = random.Random(19)
        for _ in range(200):
            n = rnd.randint(4, 25)
            scores = [rnd.randint(0, 6) / 6.0 for _ in range(n)]
            labels = [rnd.randint(0, 1) for _ in range(n)]
            if not any(labels) or all(labels):
                continue
            pos = [s for s, l in zip(scores, labels) if l]
            neg = [s for s, l in zip(scores, labels) if not l]
            u = mann_whitney_u(pos, neg, method="normal").statistic
            assert abs(roc_auc(scores, labels).statistic - u / (len(pos) * len(neg))) < 1e-12

    def test_score_negation_complements(self):
        rnd = random.Random(31)
        for _ in range(50):
            n = rnd.randint(4, 20)
            scores = [rnd.randint(0, 5) / 5.0 for _ in range(n)]
            labels = [rnd.randint(0, 1) for _ in range(n)]
            if not any(labels) or all(labels):
                continue
            auc = roc_auc(scores, labels).statistic
            neg = roc_auc([-s for s in scores], labels).statistic
            assert abs(auc + neg - 1.0) < 1e-12

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="both classes"):
            roc_auc([0.1, 0.9], [1, 1])


class TestReshuffleEval:
    @staticmethod
    def _rows(n, rnd, informative):
        rows = []
        for _ in range(n):
            label = rnd.randint(0, 1)
            score = float(label) if informative else rnd.random()
            rows.append((score, label))
        return rows

    def test_scores_equal_labels(self):
        rnd = random.Random(2)
        rows = self._rows(60, rnd, informative=True)
        res = reshuffle_eval(rows, splits=10, seed=5)
        assert res.statistic == 1.0
        assert res.se == 0.0

    def test_uninformative_scores_near_half(self):
        rnd = random.Random(6)
        rows = self._rows(400, rnd, informative=False)
        res = reshuffle_eval(rows, splits=10, seed=9)
        assert abs(res.statistic - 0.5) <= 3 * res.se

    def test_seed_determinism(self):
        rnd = random.Random(8)
        rows = self._rows(50, rnd, informative=False)
        a = reshuffle_eval(rows, seed=123)
        b = reshuffle_eval(rows, seed=123)
        assert a.statistic == b.statistic and a.se == b.se
        c = reshuffle_eval(rows, seed=124)
        assert c.statistic != a.statistic

    def test_degenerate_splits_counted(self):
        # 5 rows, one positive: held-out halves often single-class
        rows = [(0.9, 1), (0.1, 0), (0.2, 0), (0.3, 0), (0.4, 0)]
        res = reshuffle_eval(rows, splits=20, seed=0)
        skipped = res.n[2]
        assert res.n[1] + skipped == 20
        assert skipped > 0


# ---------------------------------------------------------------------------
# Bootstrap
# ---------------------------------------------------------------------------


class TestBootstrapSE:
    def test_constant_list(self):
        assert bootstrap_se([3.0, 3.0, 3.0, 3.0], b=200, seed=1) == 0.0

    def test_seed_reproducible(self):
        values = [0.1, 0.4, 0.9, 0.2, 0.7]
        assert bootstrap_se(values, b=500, seed=42) == bootstrap_se(values, b=500, seed=42)
        assert bootstrap_se(values, b=500, seed=42) != bootstrap_se(values, b=500, seed=43)

    def test_zero_one_matches_analytic(self):
        # SE of the mean of {0,1}: sd/sqrt(2) = 0.5/sqrt(2) = 0.35355...
        se = bootstrap_se([0.0, 1.0], b=10_000, seed=7)
        assert abs(se - 0.5 / math.sqrt(2)) / (0.5 / math.sqrt(2)) < 0.10

    def test_requires_two_values(self):
        with pytest.raises(ValueError):
            bootstrap_se([1.0], b=10, seed=0)


# ---------------------------------------------------------------------------
# Cohen's kappa
# ---------------------------------------------------------------------------


class TestKappa:
    def test_identical_annotators(self):
        labels = [0, 1, 1, 0, 1]
        assert cohens_kappa([labels, list(labels)]).statistic == 1.0

    def test_perfect_disagreement_balanced(self):
        a = [0, 1, 0, 1]
        b = [1, 0, 1, 0]
        assert cohens_kappa([a, b]).statistic == -1.0

    def test_contingency_table_exact(self):
        # p_o = 0.7, p_e = (25*30 + 25*20)/2500 = 0.5, kappa = 0.4
        assert kappa_from_table([[20, 5], [10, 15]]) == 0.4

    def test_annotator_path_realizes_table(self):
        a = [1] * 25 + [0] * 25
        b = [1] * 20 + [0] * 5 + [1] * 10 + [0] * 15
        assert cohens_kappa([a, b]).statistic == 0.4

    def test_none_entries_restrict_overlap(self):
        a = [1, 0, None, 1, 0, 1, 0, 1]
        b = [1, 0, 1, None, 0, 1, 0, 1]
        assert cohens_kappa([a, b]).statistic == 1.0

    def test_undefined_when_both_constant_equal(self):
        res = cohens_kappa([[1, 1, 1], [1, 1, 1]])
        assert res.statistic is None
        assert res.n[2] == 1  # skipped pair counted

    def test_mean_over_annotator_pairs(self):
        a = [0, 1, 0, 1]
        b = [0, 1, 0, 1]
        c = [1, 0, 1, 0]
        # pairs: (a,b)=1, (a,c)=-1, (b,c)=-1 -> mean -1/3
        res = cohens_kappa([a, b, c])
        assert abs(res.statistic - (-1 / 3)) < 1e-12

    def test_group_mean(self):
        from coordnet.stats import group_mean_kappa

        perfect = [[0, 1, 0, 1], [0, 1, 0, 1]]
        inverted = [[0, 1, 0, 1], [1, 0, 1, 0]]
        out = group_mean_kappa({"x": perfect, "y": inverted})
        assert out["per_characteristic"] == {"x": 1.0, "y": -1.0}
        assert out["mean"] == 0.0

    def test_group_mean_skips_undefined(self):
        from coordnet.stats import group_mean_kappa

        out = group_mean_kappa({"x": [[1, 1], [1, 1]], "y": [[0, 1], [0, 1]]})
        assert out["per_characteristic"]["x"] is None
        assert out["mean"] == 1.0

    def test_matches_scipy_randomized(self):
        rnd = random.Random(13)
        for _ in range(50):
            n = rnd.randint(5, 60)
            a = [rnd.randint(0, 1) for _ in range(n)]
            b = [rnd.randint(0, 1) for _ in range(n)]
            counts = [[0, 0], [0, 0]]
            for x, y in zip(a, b):
                counts[1 - x][1 - y] += 1
            mine = kappa_from_table(counts)
            po = sum(1 for x, y in zip(a, b) if x == y) / n
            pe = (
                (a.count(1) * b.count(1)) + (a.count(0) * b.count(0))
            ) / n**2
            if pe == 1.0:
                assert mine is None
            else:
                assert abs(mine - (po - pe) / (1 - pe)) < 1e-12


# ---------------------------------------------------------------------------
# Column deltas / daily series / language mix
# ---------------------------------------------------------------------------


class TestColumnDeltas:
    def test_same_sample_zero_delta_high_p(self):
        base = np.array([[0.2], [0.4], [0.6], [0.8], [0.5], [0.3]])
        out = column_deltas(base, base.copy(), b=200, seed=0)
        assert out[0]["delta"] == 0.0
        assert out[0]["p"] > 0.9

    def test_extreme_separation(self):
        cl = np.ones((30, 2))
        bl = np.zeros((40, 2))
        out = column_deltas(cl, bl, b=200, seed=0)
        for col in out:
            assert col["delta"] == 1.0
            assert col["p"] < 1e-9
            assert col["se"] == 0.0

    def test_seed_and_column_order_stable(self):
        rnd = np.random.default_rng(3)
        cl = rnd.random((20, 3))
        bl = rnd.random((25, 3))
        a = column_deltas(cl, bl, b=300, seed=11)
        b = column_deltas(cl, bl, b=300, seed=11)
        assert a == b
        # delta is non-random; SE streams are derived per column index
        single = column_deltas(cl[:, 1:2], bl[:, 1:2], b=300, seed=11)
        assert single[0]["delta"] == a[1]["delta"]
        assert single[0]["se"] != a[1]["se"]


class TestDailySeries:
    def test_fills_gaps_with_none(self):
        series = daily_mean_series(
            [("2017-05-01", 0.4), ("2017-05-01", 0.6), ("2017-05-03", 1.0)]
        )
        assert series == [
            ("2017-05-01", 0.5),
            ("2017-05-02", None),
            ("2017-05-03", 1.0),
        ]

    def test_empty(self):
        assert daily_mean_series([]) == []

    def test_planted_peak_day_is_argmax(self):
        # low everywhere, 0.9 planted on one date: the series must peak there
        import io

        from coordnet.sociolinguistics import (
            CHARACTERISTICS,
            characteristic_index,
            load_confidences,
        )
        from coordnet.stats import daily_mean_confidence

        rnd = random.Random(14)
        peak_day = "2017-05-07"
        day_seconds = {"2017-05-01": 1493596800, "2017-05-04": 1493856000, "2017-05-07": 1494115200}
        records = []
        lines = ["tweet_id," + ",".join(CHARACTERISTICS)]
        col = characteristic_index("vote_for")
        tid = 0
        for day, base_ts in day_seconds.items():
            for _ in range(20):
                tid += 1
                records.append(rec(tid, f"a{tid % 5}", base_ts + rnd.randint(0, 86_399)))
                values = ["0"] * len(CHARACTERISTICS)
                values[col] = "0.9" if day == peak_day else str(round(rnd.uniform(0.0, 0.4), 3))
                lines.append(f"{tid}," + ",".join(values))
        table = load_confidences(io.StringIO("\n".join(lines) + "\n"))
        series = daily_mean_confidence(table, records, "vote_for")
        defined = [(day, v) for day, v in series if v is not None]
        assert max(defined, key=lambda dv: dv[1])[0] == peak_day


class TestLanguageMix:
    def test_all_french(self):
        corpus = corpus_of(*(rec(i, "a", language="fr") for i in range(3)))
        assert language_mix(corpus) == {"a": {"fr": 1.0}}

    def test_three_one_split(self):
        corpus = corpus_of(
            rec(1, "a", language="fr"),
            rec(2, "a", language="fr"),
            rec(3, "a", language="fr"),
            rec(4, "a", language="en"),
        )
        assert language_mix(corpus)["a"] == {"en": 0.25, "fr": 0.75}

    def test_fractions_sum_to_one(self):
        rnd = random.Random(9)
        records = [
            rec(i, f"acct{rnd.randint(0, 3)}", language=rnd.choice(["fr", "en", "und"]))
            for i in range(40)
        ]
        mix = language_mix(corpus_of(*records))
        for account, fractions in mix.items():
            assert abs(sum(fractions.values()) - 1.0) < 1e-12
