import pytest

from limitlab.catalog import Family, parse_structure, realize
from limitlab.sigma1 import (
    Sigma2Metadata,
    classify_family,
    embeds,
    parse_formula,
    sat_catalog,
    sat_fragment,
    sigma1_leq,
    solid_witnesses,
)

from _oracles import brute_age_inclusion, brute_embeds_structure


def S(key):
    return parse_structure(key)


class TestInclusionFacts:
    def test_omega_pair_equivalent(self):
        assert sigma1_leq(S("omega"), S("omega_star"))
        assert sigma1_leq(S("omega_star"), S("omega"))

    def test_padded_chains_strictly_increase(self):
        assert sigma1_leq(S("tilde(chain(3))"), S("tilde(chain(4))"))
        assert not sigma1_leq(S("tilde(chain(4))"), S("tilde(chain(3))"))

    def test_padded_chains_below_padded_omega(self):
        assert sigma1_leq(S("tilde(chain(5))"), S("tilde(omega)"))
        assert not sigma1_leq(S("tilde(omega)"), S("tilde(chain(5))"))

    def test_finite_posets_below_infinite_one(self):
        for k in range(1, 5):
            assert sigma1_leq(
                S("tilde(poset_p(%d))" % k), S("tilde(poset_p(0))")
            )
            assert not sigma1_leq(
                S("tilde(poset_p(0))"), S("tilde(poset_p(%d))" % k)
            )

    def test_cycle_complements_incomparable(self):
        assert not sigma1_leq(S("cyc_comp(3)"), S("cyc_comp(4)"))
        assert not sigma1_leq(S("cyc_comp(4)"), S("cyc_comp(3)"))

    def test_bounded_mode_agrees_with_brute_force(self):
        pairs = [
            ("omega", "omega_star"),
            ("chain(4)", "omega"),
            ("cyc_comp(3)", "cyc_comp(5)"),
            ("poset_p(2)", "poset_p(0)"),
            ("ray(4)", "ray"),
        ]
        for a_key, b_key in pairs:
            a, b = S(a_key), S(b_key)
            assert sigma1_leq(a, b, max_size=5) == brute_age_inclusion(
                a, b, 5
            )


class TestFormulas:
    def test_parse_round_trip(self):
        phi = parse_formula("embeds(chain(4)) | embeds(cycle(3))")
        assert str(phi) == "embeds(chain(4)) | embeds(cycle(3))"

    def test_embeds_requires_finite(self):
        with pytest.raises(ValueError):
            embeds("omega")

    def test_catalog_truth(self):
        phi = embeds("cycle(3)")
        assert not sat_catalog(phi, S("cyc_comp(3)"))
        assert sat_catalog(phi, S("cyc_comp(4)"))
        assert sat_catalog(phi, S("du(cycle(3),iso_inf)"))
        assert not sat_catalog(phi, S("du(cycle(4),iso_inf)"))

    def test_fragment_truth_monotone(self):
        phi = embeds("chain(3)")
        seen_true = False
        for s in range(40):
            frag = realize(S("omega"), 4, s)
            now = sat_fragment(phi, frag)
            if seen_true:
                assert now
            seen_true = seen_true or now
        assert seen_true

    def test_chain_witness_false_in_shorter_padded_chain(self):
        phi = embeds("chain(4)")
        target = S("tilde(chain(3))")
        for s in range(0, 101, 10):
            assert not sat_fragment(phi, realize(target, 2, s))
        assert not sat_catalog(phi, target)
        assert sat_catalog(phi, S("tilde(chain(4))"))


class TestClassifier:
    def test_cycles_strong_antichain(self):
        fam = Family(
            (S("du(cycle(3),iso_inf)"), S("du(cycle(4),iso_inf)")),
        )
        cls = classify_family(fam)
        assert cls.level == "StrongAntichain"
        assert set(cls.strong_witnesses) == {0, 1}

    def test_cycle_complements_antichain(self):
        fam = Family(tuple(S("cyc_comp(%d)" % n) for n in range(3, 7)))
        cls = classify_family(fam)
        assert cls.is_antichain
        assert cls.level in ("Antichain", "StrongAntichain")

    def test_omega_pair_not_partial_order(self):
        cls = classify_family(Family((S("omega"), S("omega_star"))))
        assert cls.level == "NotPartialOrder"
        assert cls.solid == "n/a"

    def test_padded_chains_partial_order_solid_inconclusive(self):
        fam = Family(
            tuple(S("tilde(chain(%d))" % n) for n in range(2, 9))
            + (S("tilde(omega)"),)
        )
        cls = classify_family(fam)
        assert cls.level == "PartialOrder"
        assert cls.is_partial_order and not cls.is_antichain
        assert cls.solid == "inconclusive"

    def test_tilde_chain_pair_solid(self):
        fam = Family((S("tilde(chain(3))"), S("tilde(chain(4))")))
        cls = classify_family(fam)
        assert cls.is_partial_order
        assert cls.solid == "yes"
        assert cls.level == "SolidPartialOrder"

    def test_witnesses_separate_for_real(self):
        fam = Family(
            (S("du(cycle(3),iso_inf)"), S("du(cycle(4),iso_inf)")),
        )
        cls = classify_family(fam)
        members = list(fam)
        for (i, j), w in cls.witnesses.items():
            assert sat_catalog(w, members[i])
            assert not sat_catalog(w, members[j])
            for d in w.disjuncts:
                assert brute_embeds_structure(d, members[i])
        for i, w in cls.strong_witnesses.items():
            assert sat_catalog(w, members[i])
            for j in range(len(members)):
                if j != i:
                    assert not sat_catalog(w, members[j])

    def test_declared_cycle_witnesses_valid(self):
        # the obvious witnesses for the cycle pair check out against the
        # brute-force oracle, whatever the search itself returns
        c3, c4 = S("du(cycle(3),iso_inf)"), S("du(cycle(4),iso_inf)")
        phi3, phi4 = embeds("cycle(3)"), embeds("cycle(4)")
        assert brute_embeds_structure(phi3.disjuncts[0], c3)
        assert not brute_embeds_structure(phi3.disjuncts[0], c4)
        assert brute_embeds_structure(phi4.disjuncts[0], c4)
        assert not brute_embeds_structure(phi4.disjuncts[0], c3)

    def test_solid_witnesses_helper(self):
        fam = Family((S("tilde(chain(3))"), S("tilde(chain(4))")))
        ws = solid_witnesses(fam)
        assert ws is not None
        assert sat_catalog(ws[1], S("tilde(chain(4))"))
        assert not sat_catalog(ws[1], S("tilde(chain(3))"))


class TestSigma2Metadata:
    def test_declared_statuses(self):
        meta = Sigma2Metadata()
        fstar = [S("tilde(omega)"), S("tilde(omega_star)"), S("tilde(chain(3))")]
        assert meta.antichain_status(fstar) is True
        assert meta.antichain_status([S("omega"), S("zeta")]) is False
        assert meta.antichain_status([S("omega"), S("omega_star")]) is True
        assert meta.antichain_status([S("ray"), S("zeta")]) is None
