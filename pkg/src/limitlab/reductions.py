"""Continuous reduction operators and equivalence-relation prefix checkers.

Operators consume a fragment stream stage by stage and append values to an
output sequence; they never rewrite what they emitted, which is the whole
continuity contract.  Columnar outputs live in the same flat sequence via
the Cantor pairing, column m row r at position pair(m, r).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .pairing import pair, unpair, triple
from .sigma1 import sat_catalog, sat_fragment, sigma1_leq
from .learners import QUESTION, ConfigurationError


@dataclass(frozen=True)
class OutputPrefix:
    values: tuple
    columnar: bool = False

    def __len__(self):
        return len(self.values)

    def column(self, m):
        out = []
        r = 0
        while pair(m, r) < len(self.values):
            out.append(self.values[pair(m, r)])
            r += 1
        return tuple(out)

    def range_set(self):
        return set(self.values)


@dataclass(frozen=True)
class PrefixVerdict:
    kind: str  # ConsistentSoFar | DefinitelyDistinct | EquivalentByRule
    position: int | None = None
    payload: dict = field(default_factory=dict)


class ReductionOperator:
    """Base operator: `initial()` and `step(state, fragment)` returning
    (state, newly emitted values)."""

    tag = None
    columnar = False

    def initial(self):
        raise NotImplementedError

    def step(self, state, fragment):
        raise NotImplementedError

    def prefix(self, fragments):
        state, out = self.initial(), []
        for frag in fragments:
            state, new = self.step(state, frag)
            out.extend(new)
        return OutputPrefix(tuple(out), self.columnar)

    def declared_range(self, code):
        """Limiting range on streams of the given member, when the target
        relation makes that meaningful."""
        return None


class GammaFinToEqnat(ReductionOperator):
    """Empty output until the one-shot learner commits, then the constant
    sequence of the committed code."""

    tag = "eqnat"

    def __init__(self, family, fin):
        self.family = family
        self.fin = fin

    def initial(self):
        return (self.fin.initial_state(), None, 0)

    def step(self, state, fragment):
        fin_state, committed, emitted = state
        fin_state, hyp = self.fin.step(fin_state, fragment)
        if committed is None and hyp != QUESTION:
            committed = hyp
        new = []
        if committed is not None:
            stage = fragment.size - 1
            while emitted <= stage:
                new.append(committed)
                emitted += 1
        return (fin_state, committed, emitted), tuple(new)

    def declared_range(self, code):
        return {code}


class GammaFinToEqnatTotal(GammaFinToEqnat):
    """Total extension: if the learner has not committed within the
    patience bound, the output defaults to the zero sequence forever."""

    def __init__(self, family, fin, patience=64):
        super().__init__(family, fin)
        self.patience = patience

    def step(self, state, fragment):
        fin_state, committed, emitted = state
        stage = fragment.size - 1
        if committed is None and emitted == 0 and stage >= self.patience:
            committed = 0
            new = []
            while emitted <= stage:
                new.append(0)
                emitted += 1
            # the inner learner is abandoned once the default fires
            return (fin_state, committed, emitted), tuple(new)
        if committed is not None and emitted > 0:
            new = []
            while emitted <= stage:
                new.append(committed)
                emitted += 1
            return (fin_state, committed, emitted), tuple(new)
        return super().step(state, fragment)


class _TriggerTracker:
    """Shared machinery: first stage at which each pair formula holds on
    the stream, updated with the rooted incremental search."""

    def __init__(self, witnesses):
        self.witnesses = dict(witnesses)

    def initial(self):
        return {}

    def update(self, first_sat, fragment):
        s = fragment.size - 1
        required = None if s == 0 else s
        out = dict(first_sat)
        for key, w in self.witnesses.items():
            if key not in out and sat_fragment(w, fragment, required):
                out[key] = s
        return out


def _require_partial_order(family):
    members = list(family)
    n = len(members)
    leq = [
        [sigma1_leq(members[i], members[j]) for j in range(n)]
        for i in range(n)
    ]
    for i in range(n):
        for j in range(n):
            if i != j and leq[i][j] and leq[j][i]:
                raise ConfigurationError(
                    "members %d and %d have equal existential theories" % (i, j)
                )
    return leq


class GammaErange(ReductionOperator):
    """Position (s, i, j) carries the code pair(i, j) once the (i, j)
    separating formula holds at stage s, else 0; 0 is always in range."""

    tag = "Erange"

    def __init__(self, family, witnesses):
        self.family = family
        leq = _require_partial_order(family)
        members = list(family)
        n = len(members)
        defined = {}
        for i in range(n):
            for j in range(n):
                if i != j and not leq[i][j]:
                    w = witnesses.get((i, j))
                    if w is None:
                        raise ConfigurationError(
                            "missing witness for pair (%d,%d)" % (i, j)
                        )
                    defined[(i, j)] = w
        self.tracker = _TriggerTracker(defined)

    def initial(self):
        return (self.tracker.initial(), 0)

    def step(self, state, fragment):
        first_sat, emitted = state
        first_sat = self.tracker.update(first_sat, fragment)
        s = fragment.size - 1
        # every flat position below (s+1, 0, 0) has stage coordinate <= s,
        # so its value is already settled
        top = triple(s + 1, 0, 0)
        new = []
        for q in range(emitted, top):
            s2, rest = unpair(q)
            i, j = unpair(rest)
            value = 0
            if (i, j) in self.tracker.witnesses:
                t = first_sat.get((i, j))
                if t is not None and s2 >= t:
                    value = pair(i, j)
            new.append(value)
        return (first_sat, top), tuple(new)

    def declared_range(self, code):
        member = self.family.members[code]
        out = {0}
        for (i, j), w in self.tracker.witnesses.items():
            if sat_catalog(w, member):
                out.add(pair(i, j))
        return out


class GammaErangeToE3(ReductionOperator):
    """Column pair(i, j) flips 0 to 1 at the stage the (i, j) formula
    first holds; comparable or diagonal pairs stay all-0."""

    tag = "E3"
    columnar = True

    def __init__(self, family, witnesses):
        self.family = family
        leq = _require_partial_order(family)
        members = list(family)
        n = len(members)
        defined = {}
        for i in range(n):
            for j in range(n):
                if i != j and not leq[i][j]:
                    w = witnesses.get((i, j))
                    if w is None:
                        raise ConfigurationError(
                            "missing witness for pair (%d,%d)" % (i, j)
                        )
                    defined[(i, j)] = w
        self.tracker = _TriggerTracker(defined)

    def initial(self):
        return (self.tracker.initial(), 0)

    def step(self, state, fragment):
        first_sat, emitted = state
        first_sat = self.tracker.update(first_sat, fragment)
        s = fragment.size - 1
        # every flat position below pair(0, s+1) has row <= s, so its
        # value is already settled
        top = pair(0, s + 1)
        new = []
        for q in range(emitted, top):
            col, row = unpair(q)
            i, j = unpair(col)
            value = 0
            if (i, j) in self.tracker.witnesses:
                t = first_sat.get((i, j))
                if t is not None and row >= t:
                    value = 1
            new.append(value)
        return (first_sat, top), tuple(new)


def unary_encode(prefix):
    """0^{p(0)} 1 0^{p(1)} 1 ...; injective and prefix-monotone."""
    values = prefix.values if isinstance(prefix, OutputPrefix) else prefix
    bits = []
    for v in values:
        bits.extend([0] * v)
        bits.append(1)
    return OutputPrefix(tuple(bits))


def unary_decode(prefix):
    values = []
    zeros = 0
    for b in prefix.values:
        if b == 1:
            values.append(zeros)
            zeros = 0
        elif b == 0:
            zeros += 1
        else:
            raise ValueError("unary encoding is over bits, got %r" % (b,))
    return OutputPrefix(tuple(values))


def check_prefix(rel, a, b, closed_range_a=None, closed_range_b=None):
    """Compare two output prefixes under the named relation.

    DefinitelyDistinct is only produced when no extension can restore
    equivalence: a flat mismatch for Id, differing first values for =N, or
    a range value outside the other side's declared closed range.  The
    almost-everywhere relations (E_0, E_3, E_set) never settle at a finite
    stage; their verdicts carry agreement statistics instead.
    """
    if a.columnar != b.columnar:
        raise ValueError("prefix shapes differ")
    k = min(len(a), len(b))
    if rel == "Id":
        for p in range(k):
            if a.values[p] != b.values[p]:
                return PrefixVerdict("DefinitelyDistinct", p)
        return PrefixVerdict("ConsistentSoFar", payload={"agreed": k})
    if rel == "eqnat":
        if len(a) and len(b):
            if a.values[0] != b.values[0]:
                return PrefixVerdict("DefinitelyDistinct", 0)
            return PrefixVerdict("EquivalentByRule")
        return PrefixVerdict("ConsistentSoFar", payload={"agreed": 0})
    if rel == "E0":
        diffs = [p for p in range(k) if a.values[p] != b.values[p]]
        return PrefixVerdict(
            "ConsistentSoFar",
            payload={
                "mismatches": len(diffs),
                "last_mismatch": diffs[-1] if diffs else None,
            },
        )
    if rel == "E3":
        cols = {}
        m = 0
        while pair(m, 0) < k:
            ca, cb = a.column(m), b.column(m)
            r = min(len(ca), len(cb))
            diffs = [p for p in range(r) if ca[p] != cb[p]]
            if diffs:
                cols[m] = {
                    "mismatches": len(diffs),
                    "last_mismatch": diffs[-1],
                }
            m += 1
        return PrefixVerdict("ConsistentSoFar", payload={"columns": cols})
    if rel == "Erange":
        ra, rb = a.range_set(), b.range_set()
        if closed_range_b is not None:
            for p in range(len(a)):
                if a.values[p] not in closed_range_b:
                    return PrefixVerdict("DefinitelyDistinct", p)
        if closed_range_a is not None:
            for p in range(len(b)):
                if b.values[p] not in closed_range_a:
                    return PrefixVerdict("DefinitelyDistinct", p)
        if (
            closed_range_a is not None
            and closed_range_b is not None
            and closed_range_a == closed_range_b
        ):
            return PrefixVerdict("EquivalentByRule")
        return PrefixVerdict(
            "ConsistentSoFar",
            payload={"delta": sorted((ra - rb) | (rb - ra))},
        )
    if rel == "Eset":
        sets_a = _column_sets(a)
        sets_b = _column_sets(b)
        delta = [sorted(s) for s in sets_a ^ sets_b]
        return PrefixVerdict("ConsistentSoFar", payload={"delta": delta})
    raise ValueError("unknown relation tag: %r" % rel)


def _column_sets(prefix):
    out = set()
    m = 0
    while pair(m, 0) < len(prefix):
        col = prefix.column(m)
        if col:
            out.add(frozenset(col))
        m += 1
    return out


def run_operator(operator, presentation, horizon):
    """The operator's output prefix over the first `horizon` stages, with
    the append-only contract asserted at every step."""
    state, out = operator.initial(), []
    for s in range(horizon):
        state, new = operator.step(state, presentation.restrict(s))
        out.extend(new)
    return OutputPrefix(tuple(out), operator.columnar)


def _separation_evidence(rel, verdict, pa, pb):
    if verdict.kind == "DefinitelyDistinct":
        return True
    if rel == "Id":
        return False
    if rel == "eqnat":
        return False
    if rel == "E0":
        return verdict.payload["mismatches"] >= 3
    if rel == "E3":
        return any(
            c["mismatches"] >= 3 for c in verdict.payload["columns"].values()
        )
    if rel == "Erange":
        return bool(verdict.payload["delta"])
    if rel == "Eset":
        return bool(verdict.payload["delta"])
    return False


def verify_reduction(operator, family, horizon=100, seeds=(1, 2, 3)):
    """Sample same-member and cross-member copy pairs and score the
    operator's outputs under its target relation.

    Same-member pairs must never be definitely distinct; cross pairs must
    accumulate the relation-appropriate separation evidence by horizon.
    """
    from .catalog import Presentation

    rel = operator.tag
    members = list(family)
    prefixes = {}
    for i, m in enumerate(members):
        for seed in seeds:
            h = horizon
            size = m.size()
            if size is not None:
                h = min(h, size)
            prefixes[(i, seed)] = run_operator(
                operator, Presentation(m, seed), h
            )
    cells = []
    ok = True
    for i in range(len(members)):
        for si in range(len(seeds)):
            for j in range(i, len(members)):
                for sj in range(len(seeds)):
                    if j == i and sj <= si:
                        continue
                    pa = prefixes[(i, seeds[si])]
                    pb = prefixes[(j, seeds[sj])]
                    kwargs = {}
                    if rel == "Erange":
                        kwargs = {
                            "closed_range_a": operator.declared_range(i),
                            "closed_range_b": operator.declared_range(j),
                        }
                    verdict = check_prefix(rel, pa, pb, **kwargs)
                    if i == j:
                        passed = verdict.kind != "DefinitelyDistinct"
                    else:
                        passed = _separation_evidence(rel, verdict, pa, pb)
                    ok = ok and passed
                    cells.append(
                        {
                            "pair": [i, j],
                            "seeds": [seeds[si], seeds[sj]],
                            "verdict": verdict.kind,
                            "position": verdict.position,
                            "passed": passed,
                        }
                    )
    return {"relation": rel, "passed": ok, "cells": cells}
