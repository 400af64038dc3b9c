"""Discernibility clauses, all-reducts enumeration, and the brute-force oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qosbroker import (
    AttributeSpec,
    DecisionSystem,
    InformationSystem,
    ProviderProfile,
    TooManyAttributes,
    ValidationError,
)
from qosbroker.reducts import (
    ClauseSet,
    FuzzyClause,
    Reduct,
    ReductConfig,
    brute_force_reducts_oracle,
    build_clause_set,
    enumerate_all_reducts,
    pair_discernibility,
    project_to_rds,
    select_best_reduct,
    subset_satisfies,
)


def decision_system(matrix, labels, categorical=()):
    matrix = np.asarray(matrix, dtype=float)
    names = [f"a{j}" for j in range(matrix.shape[1])]
    schema = tuple(
        AttributeSpec(
            name=n,
            category="Cost",
            kind="static",
            scale="categorical" if j in categorical else "numeric",
        )
        for j, n in enumerate(names)
    )
    providers = tuple(
        ProviderProfile(id=f"p{i}", display_name=f"p{i}", values=dict(zip(names, row)))
        for i, row in enumerate(matrix)
    )
    base = InformationSystem(schema=schema, providers=providers)
    return DecisionSystem(base=base, labels={f"p{i}": int(l) for i, l in enumerate(labels)})


def clause_set(degree_rows, threshold):
    degree_rows = np.asarray(degree_rows, dtype=float)
    names = tuple(f"a{j}" for j in range(degree_rows.shape[1]))
    pairs = tuple((f"x{i}", f"y{i}") for i in range(degree_rows.shape[0]))
    return ClauseSet(attributes=names, threshold=threshold, pairs=pairs, degrees=degree_rows)


def names(reducts):
    return {r.sorted_names() for r in reducts}


class TestPairDiscernibility:
    def test_numeric_absolute_difference(self):
        spec = AttributeSpec(name="x", category="Cost", kind="static")
        assert pair_discernibility(spec, 0.2, 0.7) == pytest.approx(0.5)

    def test_categorical_equal(self):
        spec = AttributeSpec(name="x", category="Security", kind="static", scale="categorical")
        assert pair_discernibility(spec, 8, 8) == 0.0

    def test_categorical_different(self):
        spec = AttributeSpec(name="x", category="Security", kind="static", scale="categorical")
        assert pair_discernibility(spec, 8, 2) == 1.0

    @given(st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=200)
    def test_degree_stays_in_unit_interval(self, x, y):
        spec = AttributeSpec(name="x", category="Cost", kind="static")
        assert 0.0 <= pair_discernibility(spec, x, y) <= 1.0


class TestBuildClauseSet:
    def test_same_label_pairs_excluded(self):
        ds = decision_system([[0.0], [1.0], [0.5]], labels=[1, 1, 2])
        cs = build_clause_set(ds, ReductConfig(alpha=1.0))
        assert set(cs.pairs) == {("p0", "p2"), ("p1", "p2")}

    def test_alpha_one_keeps_everything(self):
        ds = decision_system([[0.0], [1.0]], labels=[1, 2])
        cs = build_clause_set(ds, ReductConfig(alpha=1.0))
        assert cs.threshold == 0.0
        assert cs.degrees.shape[0] == 1

    def test_weak_clause_dropped_by_keep_rule(self):
        # degrees (0.3, 0.4) sum to 0.7 < 0.85, so the pair is indiscernible
        # at alpha = 0.15 and produces no clause
        ds = decision_system(
            [[0.0, 0.0], [0.3, 0.4], [1.0, 1.0]], labels=[1, 2, 1]
        )
        cs = build_clause_set(ds, ReductConfig(alpha=0.15))
        assert ("p0", "p1") not in cs.pairs
        assert ("p1", "p2") in cs.pairs  # degrees (0.7, 0.6) reach the threshold

    def test_alpha_out_of_range(self):
        with pytest.raises(ValidationError, match=r"alpha out of \[0,1\]"):
            ReductConfig(alpha=1.5)

    def test_degrees_cover_unit_interval_only(self, case_study_ds):
        cs = build_clause_set(case_study_ds, ReductConfig(alpha=0.15))
        assert cs.degrees.min() >= 0.0
        assert cs.degrees.max() <= 1.0
        for clause in cs.clauses[:5]:
            assert case_study_ds.labels[clause.pair[0]] != case_study_ds.labels[clause.pair[1]]


class TestSubsetSatisfies:
    def test_single_strong_attribute(self):
        clause = FuzzyClause(pair=("x", "y"), degrees={"a": 0.9, "b": 0.2})
        assert subset_satisfies(clause, {"a"}, 0.85)

    def test_bounded_sum_caps_at_one(self):
        clause = FuzzyClause(pair=("x", "y"), degrees={"a": 0.6, "b": 0.5})
        assert not subset_satisfies(clause, {"a"}, 0.85)
        assert subset_satisfies(clause, {"a", "b"}, 0.85)

    def test_empty_subset_with_zero_threshold(self):
        clause = FuzzyClause(pair=("x", "y"), degrees={"a": 0.6})
        assert subset_satisfies(clause, set(), 0.0)

    @given(
        st.dictionaries(st.sampled_from("abcde"), st.floats(0, 1), min_size=1),
        st.floats(0, 1),
    )
    @settings(max_examples=200)
    def test_satisfaction_is_monotone(self, degrees, threshold):
        clause = FuzzyClause(pair=("x", "y"), degrees=degrees)
        keys = sorted(degrees)
        for cut in range(len(keys)):
            small, large = set(keys[:cut]), set(keys)
            if subset_satisfies(clause, small, threshold):
                assert subset_satisfies(clause, large, threshold)


class TestEnumerateAllReducts:
    def test_both_attributes_needed(self):
        cs = clause_set([[0.6, 0.5]], threshold=0.85)
        assert names(enumerate_all_reducts(cs)) == {("a0", "a1")}

    def test_complementary_pairs(self):
        cs = clause_set([[0.9, 0.1], [0.1, 0.9]], threshold=0.85)
        assert names(enumerate_all_reducts(cs)) == {("a0", "a1")}

    def test_empty_clause_set_falls_back_to_full_set(self):
        cs = clause_set(np.zeros((0, 3)), threshold=0.85)
        assert names(enumerate_all_reducts(cs)) == {("a0", "a1", "a2")}

    def test_zero_threshold_falls_back_to_full_set(self):
        cs = clause_set([[0.5, 0.5, 0.5]], threshold=0.0)
        assert names(enumerate_all_reducts(cs)) == {("a0", "a1", "a2")}

    def test_singletons_found(self):
        cs = clause_set([[1.0, 0.9], [0.9, 1.0]], threshold=0.85)
        assert names(enumerate_all_reducts(cs)) == {("a0",), ("a1",)}

    def test_attribute_guard(self):
        cs = clause_set(np.ones((1, 25)), threshold=0.5)
        with pytest.raises(TooManyAttributes):
            enumerate_all_reducts(cs)

    def test_minimality_and_coverage(self, case_study_ds):
        cs = build_clause_set(case_study_ds, ReductConfig(alpha=0.15))
        reducts = enumerate_all_reducts(cs)
        assert reducts
        for reduct in list(reducts)[:25]:
            for clause in cs.clauses:
                assert subset_satisfies(clause, reduct.attributes, cs.threshold)
            for dropped in reduct.attributes:
                remainder = reduct.attributes - {dropped}
                assert any(
                    not subset_satisfies(clause, remainder, cs.threshold)
                    for clause in cs.clauses
                )


class TestOracleEquivalence:
    def test_matches_on_spec_examples(self):
        for rows, threshold in [
            ([[0.6, 0.5]], 0.85),
            ([[0.9, 0.1], [0.1, 0.9]], 0.85),
            (np.zeros((0, 2)), 0.85),
        ]:
            cs = clause_set(rows, threshold)
            assert enumerate_all_reducts(cs) == brute_force_reducts_oracle(cs)

    def test_single_attribute_system(self):
        cs = clause_set([[0.9]], threshold=0.85)
        assert names(brute_force_reducts_oracle(cs)) == {("a0",)}

    def test_random_systems_agree(self):
        rng = np.random.default_rng(2718)
        for _ in range(60):
            n_attrs = int(rng.integers(1, 7))
            n_objects = int(rng.integers(2, 11))
            alpha = float(rng.uniform(0, 1))
            matrix = rng.random((n_objects, n_attrs))
            labels = rng.integers(1, 4, size=n_objects)
            cat = tuple(j for j in range(n_attrs) if rng.random() < 0.3)
            if cat:
                matrix[:, cat] = rng.integers(1, 11, size=(n_objects, len(cat)))
            ds = decision_system(matrix, labels, categorical=cat)
            cs = build_clause_set(ds, ReductConfig(alpha=alpha))
            assert enumerate_all_reducts(cs) == brute_force_reducts_oracle(cs)

    def test_oracle_guard(self):
        cs = clause_set(np.ones((1, 15)), threshold=0.5)
        with pytest.raises(TooManyAttributes):
            brute_force_reducts_oracle(cs)

    def test_alpha_grid_counts_match_oracle_on_subschema(self, case_study_ds):
        # the precision sweep's per-alpha counts, re-checked against the
        # 2^m oracle on a 12-attribute restriction of the case study
        base = case_study_ds.base
        schema = base.schema[:12]
        keep = {s.name for s in schema}
        providers = tuple(
            type(p)(id=p.id, display_name=p.display_name,
                    values={k: v for k, v in p.values.items() if k in keep})
            for p in base.providers
        )
        sub = DecisionSystem(
            base=InformationSystem(schema=schema, providers=providers),
            labels=dict(case_study_ds.labels),
        )
        for i in range(1, 21):
            alpha = round(0.05 * i, 10)
            cs = build_clause_set(sub, ReductConfig(alpha=alpha))
            fast = enumerate_all_reducts(cs)
            oracle = brute_force_reducts_oracle(cs)
            assert len(fast) == len(oracle)
            assert fast == oracle


class TestSelectBestReduct:
    def test_overlap_dominates(self, case_study_request, case_study_is):
        small = Reduct(frozenset({"Memory", "Security"}))
        large = Reduct(frozenset({"Memory", "Security", "Availability"}))
        best = select_best_reduct([small, large], case_study_request, case_study_is.schema)
        assert best == large

    def test_dynamic_count_breaks_ties(self, case_study_request, case_study_is):
        # equal overlap (4 requested attributes each); second holds 2 dynamic
        static_heavy = Reduct(frozenset({"Security", "Support", "Storage Cost", "vCPU Cost"}))
        dynamic_heavy = Reduct(frozenset({"Security", "Support", "Memory", "vCPU Count"}))
        best = select_best_reduct(
            [static_heavy, dynamic_heavy], case_study_request, case_study_is.schema
        )
        assert best == dynamic_heavy

    def test_residual_tie_is_lexicographic(self, case_study_request, case_study_is, baseline_reduct):
        # the four published candidates tie on overlap (7) and dynamic count (7);
        # the deterministic pick is the first one, matching the published choice
        candidates = [
            baseline_reduct,
            Reduct(baseline_reduct.attributes - {"Accountability"} | {"vCPU Count"}),
            Reduct(baseline_reduct.attributes - {"Data In Cost"} | {"Security"}),
            Reduct(
                baseline_reduct.attributes
                - {"Accountability", "Data In Cost"}
                | {"vCPU Count", "Security"}
            ),
        ]
        for reduct in candidates:
            assert len(reduct.attributes & case_study_request.attributes) == 7
            dynamic = {s.name for s in case_study_is.schema if s.is_dynamic}
            assert len(reduct.attributes & dynamic) == 7
        best = select_best_reduct(candidates, case_study_request, case_study_is.schema)
        assert best == baseline_reduct


class TestProjectToRds:
    def test_published_reduct_projects_to_eleven_attributes(self, case_study_ds, baseline_reduct):
        rds = project_to_rds(case_study_ds, baseline_reduct)
        assert len(rds.base.schema) == 11
        assert "Down Time" in rds.base.attribute_names  # appended network QoS
        assert rds.labels == dict(case_study_ds.labels)
        # schema order preserved from the information system
        original = [n for n in case_study_ds.base.attribute_names
                    if n in rds.base.attribute_names]
        assert list(rds.base.attribute_names) == original

    def test_projection_is_idempotent_union(self, case_study_ds):
        network = frozenset(
            s.name for s in case_study_ds.base.schema if s.network_layer
        )
        reduct = Reduct(frozenset({"Memory"}) | network)
        rds = project_to_rds(case_study_ds, reduct)
        assert set(rds.base.attribute_names) == set(reduct.attributes)

    def test_full_reduct_is_identity(self, case_study_ds):
        reduct = Reduct(frozenset(case_study_ds.base.attribute_names))
        rds = project_to_rds(case_study_ds, reduct)
        assert rds.base == case_study_ds.base


class TestInvariance:
    def test_order_invariance_of_reducts(self):
        rng = np.random.default_rng(99)
        matrix = rng.random((8, 5))
        labels = rng.integers(1, 3, size=8)
        ds = decision_system(matrix, labels)
        cs = build_clause_set(ds, ReductConfig(alpha=0.3))
        baseline = names(enumerate_all_reducts(cs))

        perm = rng.permutation(8)
        ds_perm = decision_system(matrix[perm], labels[perm])
        cs_perm = build_clause_set(ds_perm, ReductConfig(alpha=0.3))
        assert names(enumerate_all_reducts(cs_perm)) == baseline

        cols = rng.permutation(5)
        renamed = decision_system(matrix[:, cols], labels)
        # map the shuffled column names back before comparing
        inverse = {f"a{j}": f"a{cols[j]}" for j in range(5)}
        shuffled = {
            tuple(sorted(inverse[n] for n in r.attributes))
            for r in enumerate_all_reducts(
                build_clause_set(renamed, ReductConfig(alpha=0.3))
            )
        }
        assert shuffled == baseline
