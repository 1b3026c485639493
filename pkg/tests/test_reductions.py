import pytest

from limitlab.catalog import Family, Presentation, parse_structure
from limitlab.learners import ConfigurationError
from limitlab.pairing import pair
from limitlab.reductions import (
    GammaErange,
    GammaErangeToE3,
    GammaFinToEqnat,
    GammaFinToEqnatTotal,
    OutputPrefix,
    check_prefix,
    run_operator,
    unary_decode,
    unary_encode,
    verify_reduction,
)
from limitlab import harness as H


def S(key):
    return parse_structure(key)


class TestUnaryCodec:
    def test_frozen_trace(self):
        assert unary_encode([2, 1]).values == (0, 0, 1, 0, 1)

    def test_round_trip(self):
        for values in ([], [0], [3, 0, 2], list(range(6))):
            encoded = unary_encode(values)
            assert unary_decode(encoded).values == tuple(values)

    def test_rejects_non_bits(self):
        with pytest.raises(ValueError):
            unary_decode(OutputPrefix((0, 2, 1)))


class TestCheckPrefix:
    def test_id_first_mismatch(self):
        a = OutputPrefix((1, 2, 3))
        b = OutputPrefix((1, 5, 3))
        v = check_prefix("Id", a, b)
        assert v.kind == "DefinitelyDistinct" and v.position == 1

    def test_id_consistent(self):
        v = check_prefix("Id", OutputPrefix((1, 2)), OutputPrefix((1, 2, 9)))
        assert v.kind == "ConsistentSoFar"

    def test_eqnat_settles_on_first_value(self):
        same = check_prefix("eqnat", OutputPrefix((4, 0)), OutputPrefix((4, 9)))
        assert same.kind == "EquivalentByRule"
        diff = check_prefix("eqnat", OutputPrefix((4,)), OutputPrefix((5,)))
        assert diff.kind == "DefinitelyDistinct" and diff.position == 0

    def test_e0_counts_mismatches(self):
        a = OutputPrefix((0, 1, 0, 1))
        b = OutputPrefix((0, 0, 0, 0))
        v = check_prefix("E0", a, b)
        assert v.kind == "ConsistentSoFar"
        assert v.payload["mismatches"] == 2

    def test_erange_distinct_outside_closed_range(self):
        a = OutputPrefix((0, 7))
        b = OutputPrefix((0, 0))
        v = check_prefix("Erange", a, b, closed_range_a={0, 7},
                         closed_range_b={0})
        assert v.kind == "DefinitelyDistinct"

    def test_erange_equal_ranges_equivalent(self):
        a = OutputPrefix((0, 1))
        b = OutputPrefix((1, 0, 1))
        v = check_prefix("Erange", a, b, closed_range_a={0, 1},
                         closed_range_b={0, 1})
        assert v.kind == "EquivalentByRule"

    def test_unknown_relation(self):
        with pytest.raises(ValueError):
            check_prefix("E9", OutputPrefix(()), OutputPrefix(()))


class TestGammaFinToEqnat:
    def test_constant_correct_code(self):
        fam = H.get_family("cycles")
        op = H.GAMMAS["gamma_fin_to_eqnat"](fam)
        for code in (0, 1):
            prefix = run_operator(op, Presentation(fam.members[code], 3), 80)
            assert prefix.values
            assert set(prefix.values) == {code}
            assert op.declared_range(code) == {code}

    def test_total_variant_defaults(self):
        fam = H.get_family("cycles")
        op = GammaFinToEqnatTotal(fam, H.LEARNERS["fin"](fam), patience=10)
        # a stream of isolated points never commits; output defaults
        builder_fam = Family((S("iso_inf"),))
        prefix = run_operator(op, Presentation(S("iso_inf"), 1), 40)
        assert len(prefix) >= 1
        assert set(prefix.values) == {0}

    def test_verify_passes(self):
        fam = H.get_family("cycles")
        op = H.GAMMAS["gamma_fin_to_eqnat"](fam)
        report = verify_reduction(op, fam, horizon=60)
        assert report["passed"]


class TestGammaErange:
    def test_rejects_equal_theories(self):
        with pytest.raises(ConfigurationError):
            H.GAMMAS["gamma_erange"](H.get_family("omega_pair"))

    def test_separation_value_on_chain_pair(self):
        fam = H.get_family("tilde_chains")
        op = H.GAMMAS["gamma_erange"](fam)
        big = run_operator(op, Presentation(fam.members[1], 1), 100)
        small = run_operator(op, Presentation(fam.members[0], 1), 100)
        # member 1 strictly above member 0: the (1,0) marker value
        # appears only on member-1 streams
        marker = pair(1, 0)
        assert marker in big.range_set()
        assert marker not in small.range_set()
        assert big.range_set() <= op.declared_range(1)
        assert small.range_set() <= op.declared_range(0)

    def test_output_is_continuous(self):
        fam = H.get_family("tilde_chains")
        op = H.GAMMAS["gamma_erange"](fam)
        pres = Presentation(fam.members[1], 2)
        frags = [pres.restrict(s) for s in range(60)]
        short = op.prefix(frags[:30])
        full = op.prefix(frags)
        assert full.values[: len(short)] == short.values

    def test_verify_passes(self):
        fam = H.get_family("tilde_chains")
        op = H.GAMMAS["gamma_erange"](fam)
        report = verify_reduction(op, fam, horizon=100)
        assert report["passed"]


class TestGammaErangeToE3:
    def test_column_flips_once(self):
        fam = H.get_family("tilde_chains")
        op = H.GAMMAS["gamma_erange_to_e3"](fam)
        prefix = run_operator(op, Presentation(fam.members[1], 1), 120)
        col = prefix.column(pair(1, 0))
        assert 1 in col
        first = col.index(1)
        assert all(b == 1 for b in col[first:])
        assert all(b == 0 for b in col[:first])

    def test_verify_passes(self):
        fam = H.get_family("tilde_chains")
        op = H.GAMMAS["gamma_erange_to_e3"](fam)
        report = verify_reduction(op, fam, horizon=120)
        assert report["passed"]
