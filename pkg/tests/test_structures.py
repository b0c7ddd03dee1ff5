import itertools
import random

import pytest

from ramseykit.generators import chain, conv_equiv, random_ordered_graph
from ramseykit.structures import (
    FinStructure,
    Signature,
    StructureMap,
    are_isomorphic,
    dumps_canonical,
    enumerate_copies,
    induced_substructure,
    is_embedding,
    map_from_json,
    map_to_json,
    qftp,
    reduct,
    same_qftp,
    structure_from_json,
    structure_to_json,
)

SIG_R = Signature((("R", 2),))


def path3():
    # ordered path: vertices 0 < 1 < 2, edges {0,1} and {1,2}
    return FinStructure.build(SIG_R, 3, {"R": [(0, 1), (1, 0), (1, 2), (2, 1)]})


def edge_pair():
    return FinStructure.build(SIG_R, 2, {"R": [(0, 1), (1, 0)]})


def bare_pair():
    return FinStructure.build(SIG_R, 2, {})


class TestSignature:
    def test_order_implicit(self):
        sig = Signature()
        assert sig.names == ("<",)
        assert sig.arity("<") == 2

    def test_rejects_duplicates_and_bad_arity(self):
        with pytest.raises(ValueError):
            Signature((("R", 2), ("R", 3)))
        with pytest.raises(ValueError):
            Signature((("R", 0),))
        with pytest.raises(ValueError):
            Signature((("<", 2),))

    def test_sorted_normalization(self):
        sig = Signature((("Z", 1), ("A", 2)))
        assert sig.symbols == (("A", 2), ("Z", 1))


class TestQftp:
    def test_chain_pair_is_pure_order(self):
        ty = qftp(chain(3), (0, 2))
        assert ty.pattern == (0, 1)
        assert ty.facts == frozenset()

    def test_equiv_pair_in_one_class(self):
        ty = qftp(conv_equiv(2, 2), (0, 1))
        assert ty.pattern == (0, 1)
        assert ("E", (0, 1)) in ty.facts

    def test_equiv_pair_across_classes(self):
        ty = qftp(conv_equiv(2, 2), (0, 2))
        assert ty.pattern == (0, 1)
        assert ("E", (0, 1)) not in ty.facts

    def test_repeats_recorded_in_pattern(self):
        assert qftp(chain(3), (1, 1)).pattern == (0, 0)
        assert qftp(chain(3), (2, 1)).pattern == (1, 0)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            qftp(chain(2), (0, 5))


class TestSameQftp:
    def test_order_isomorphic_pairs(self):
        assert same_qftp(chain(4), (0, 1), (2, 3))

    def test_pattern_differs(self):
        assert not same_qftp(chain(4), (0, 1), (1, 0))

    def test_equiv_distinguishes(self):
        assert not same_qftp(conv_equiv(2, 2), (0, 1), (0, 2))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            same_qftp(chain(4), (0, 1), (0, 1, 2))

    def test_matches_induced_isomorphism(self):
        # type equality of increasing tuples is exactly isomorphism of the
        # induced substructures (the order bijection is the only candidate)
        for s in (chain(5), conv_equiv(2, 2), path3()):
            doms = list(range(s.size))
            for m in range(1, min(s.size, 4) + 1):
                for t1 in itertools.combinations(doms, m):
                    for t2 in itertools.combinations(doms, m):
                        lhs = same_qftp(s, t1, t2)
                        rhs = are_isomorphic(
                            induced_substructure(s, t1)[0],
                            induced_substructure(s, t2)[0],
                        )
                        assert lhs == rhs


class TestInducedSubstructure:
    def test_chain_restriction(self):
        sub, inc = induced_substructure(chain(5), (1, 3))
        assert sub == chain(2)
        assert inc.images == (1, 3)
        assert "embedding" in inc.checked_flags

    def test_path_loses_edge(self):
        sub, _ = induced_substructure(path3(), (0, 2))
        assert sub.tables["R"] == frozenset()

    def test_full_domain_is_identity(self):
        s = path3()
        sub, inc = induced_substructure(s, (0, 1, 2))
        assert sub == s
        assert inc.images == (0, 1, 2)

    def test_rejects_non_increasing(self):
        with pytest.raises(ValueError):
            induced_substructure(chain(4), (2, 1))


class TestIsEmbedding:
    def test_identity(self):
        s = chain(3)
        assert is_embedding(StructureMap(s, s, (0, 1, 2)))

    def test_edge_lookup(self):
        assert not is_embedding(StructureMap(edge_pair(), path3(), (0, 2)))
        assert is_embedding(StructureMap(bare_pair(), path3(), (0, 2)))

    def test_order_must_be_preserved(self):
        assert not is_embedding(StructureMap(chain(2), chain(3), (2, 0)))

    def test_disjoint_nonorder_signatures_rejected(self):
        other = FinStructure.build(Signature((("S", 1),)), 2, {})
        with pytest.raises(ValueError):
            is_embedding(StructureMap(edge_pair(), other, (0, 1)))


class TestEnumerateCopies:
    def test_chain_pairs(self):
        assert enumerate_copies(chain(4), chain(2)) == [
            (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)
        ]

    def test_single_edge_in_path(self):
        assert enumerate_copies(path3(), edge_pair()) == [(0, 1), (1, 2)]

    def test_equiv_pairs(self):
        a = conv_equiv(1, 2)
        assert enumerate_copies(conv_equiv(2, 2), a) == [(0, 1), (2, 3)]

    def test_binomial_counts(self):
        from math import comb

        for n in range(9):
            for m in range(n + 1):
                assert len(enumerate_copies(chain(n), chain(m))) == comb(n, m)

    def test_agrees_with_embedding_oracle(self):
        rng = random.Random(20250810)
        for _ in range(25):
            nb = rng.randint(1, 6)
            na = rng.randint(0, nb)
            b = random_ordered_graph(nb, rng.randrange(2**32))
            a = random_ordered_graph(na, rng.randrange(2**32))
            expected = [
                t
                for t in itertools.combinations(range(nb), na)
                if is_embedding(StructureMap(a, b, t))
            ]
            assert enumerate_copies(b, a) == expected


class TestAreIsomorphic:
    def test_reflexive_case(self):
        assert are_isomorphic(chain(3), chain(3))

    def test_tables_matter(self):
        empty3 = FinStructure.build(SIG_R, 3, {})
        assert not are_isomorphic(path3(), empty3)

    def test_total_equivalence_vs_tagged_chain(self):
        total = FinStructure.build(
            Signature((("E", 2),)), 2, {"E": [(0, 0), (0, 1), (1, 0), (1, 1)]}
        )
        assert are_isomorphic(conv_equiv(1, 2), total)

    def test_equivalence_relation(self):
        pool = [random_ordered_graph(3, seed) for seed in range(12)]
        for a in pool:
            assert are_isomorphic(a, a)
            for b in pool:
                assert are_isomorphic(a, b) == are_isomorphic(b, a)
                for c in pool:
                    if are_isomorphic(a, b) and are_isomorphic(b, c):
                        assert are_isomorphic(a, c)


class TestReduct:
    def test_drop_to_order(self):
        assert are_isomorphic(
            reduct(conv_equiv(2, 2), {"<"}), chain(4)
        )

    def test_full_keep_is_identity(self):
        s = path3()
        assert reduct(s, {"R", "<"}) == s

    def test_unknown_symbol(self):
        with pytest.raises(ValueError):
            reduct(chain(2), {"nope"})

    def test_commutes_with_induced_substructure(self):
        s = conv_equiv(3, 2)
        for subset in itertools.combinations(range(s.size), 3):
            lhs = reduct(induced_substructure(s, subset)[0], {"<"})
            rhs = induced_substructure(reduct(s, {"<"}), subset)[0]
            assert lhs == rhs


class TestJson:
    def test_structure_roundtrip(self):
        for s in (chain(0), chain(3), path3(), conv_equiv(2, 2)):
            assert structure_from_json(structure_to_json(s)) == s

    def test_map_roundtrip(self):
        m = StructureMap(chain(2), chain(4), (1, 3))
        again = map_from_json(map_to_json(m), chain(2), chain(4))
        assert again.images == (1, 3)

    def test_malformed_rejected(self):
        with pytest.raises(ValueError):
            structure_from_json({"size": 2})

    def test_canonical_dump_is_stable(self):
        s = path3()
        assert dumps_canonical(structure_to_json(s)) == dumps_canonical(
            structure_to_json(structure_from_json(structure_to_json(s)))
        )
