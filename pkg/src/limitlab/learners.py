"""Learners over fragment streams.

Every learner exposes `initial_state()` and `step(state, fragment)`
returning `(state, hypothesis)`, where a hypothesis is either an integer
code into the active family or the question mark.  Steps are pure in
(state, fragment), so identical streams give identical transcripts.
"""

from __future__ import annotations

from .pairing import pair, unpair
from .catalog import canonical_fragment, fragment_embeds, strict_order_relation
from .sigma1 import sat_catalog, sat_fragment, sigma1_leq

QUESTION = "?"


class ConfigurationError(ValueError):
    pass


class WitnessInconsistencyError(RuntimeError):
    pass


class Learner:
    def __init__(self, family):
        self.family = family

    def initial_state(self):
        raise NotImplementedError

    def step(self, state, fragment):
        raise NotImplementedError


def run(learner, presentation, horizon):
    """The transcript of the learner on stages 0..horizon-1."""
    state = learner.initial_state()
    transcript = []
    for s in range(horizon):
        state, hyp = learner.step(state, presentation.restrict(s))
        transcript.append(hyp)
    return transcript


def run_on_stream(learner, fragments):
    state = learner.initial_state()
    transcript = []
    for frag in fragments:
        state, hyp = learner.step(state, frag)
        transcript.append(hyp)
    return transcript


class ExMinMaxLearner(Learner):
    """Distinguishes the increasing from the decreasing infinite chain by
    comparing how long the current least and greatest elements have held
    their role."""

    def __init__(self, family):
        super().__init__(family)
        keys = [m.key() for m in family]
        if sorted(keys) != ["omega", "omega_star"]:
            raise ConfigurationError(
                "this learner is specific to the two infinite chains"
            )
        self.code_up = keys.index("omega")
        self.code_down = keys.index("omega_star")

    def initial_state(self):
        # per-element counts of being min / being max, plus an incremental
        # endpoint tracker (tuple log position, in-set, out-set)
        return ({}, {}, 0, set(), set())

    def step(self, state, fragment):
        count_min, count_max, done, has_in, has_out = state
        tuples = fragment.tuples()
        if done > len(tuples):
            done, has_in, has_out = 0, set(), set()
        for _, (a, b) in tuples[done:]:
            has_out.add(a)
            has_in.add(b)
        done = len(tuples)
        lo = min(
            (e for e in range(fragment.size) if e not in has_in), default=0
        )
        hi = min(
            (e for e in range(fragment.size) if e not in has_out), default=0
        )
        count_min = dict(count_min)
        count_max = dict(count_max)
        count_min[lo] = count_min.get(lo, 0) + 1
        count_max[hi] = count_max.get(hi, 0) + 1
        c_min, c_max = count_min[lo], count_max[hi]
        if c_min > c_max:
            hyp = self.code_up
        elif c_min < c_max:
            hyp = self.code_down
        else:
            hyp = QUESTION
        return (count_min, count_max, done, has_in, has_out), hyp


class FinLearner(Learner):
    """Waits for a stage where exactly one member's separating formula
    holds, then commits forever."""

    def __init__(self, family, strong_witnesses):
        super().__init__(family)
        members = list(family)
        for i, a in enumerate(members):
            w = strong_witnesses.get(i)
            if w is None:
                raise ConfigurationError("missing witness for code %d" % i)
            if not sat_catalog(w, a):
                raise ConfigurationError("witness %d fails on its member" % i)
            for j, b in enumerate(members):
                if j != i and sat_catalog(w, b):
                    raise ConfigurationError(
                        "witness %d is not separating (holds on %d)" % (i, j)
                    )
        self.witnesses = dict(strong_witnesses)

    def initial_state(self):
        return None  # committed code, if any

    def step(self, state, fragment):
        if state is not None:
            return state, state
        hits = [
            i for i in range(len(self.family))
            if sat_fragment(self.witnesses[i], fragment)
        ]
        if len(hits) > 1:
            raise WitnessInconsistencyError(
                "several separating formulas hold at once: %s" % hits
            )
        if hits:
            return hits[0], hits[0]
        return None, QUESTION


class CoLearner(Learner):
    """Output slot (i, t) carries code i exactly when member i was refuted
    by stage t (the fragment satisfies a formula true in some other member
    and false in member i).  On a member's own stream its code never
    appears and every other code does."""

    def __init__(self, family, pairwise):
        super().__init__(family)
        members = list(family)
        n = len(members)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                w = pairwise.get((i, j))
                if w is None:
                    raise ConfigurationError(
                        "missing witness for pair (%d,%d): comparable "
                        "theories or exhausted search" % (i, j)
                    )
                if not sat_catalog(w, members[i]) or sat_catalog(w, members[j]):
                    raise ConfigurationError(
                        "pair witness (%d,%d) fails verification" % (i, j)
                    )
        self.pairwise = dict(pairwise)

    def initial_state(self):
        return tuple([None] * len(self.family))  # first trigger stage per code

    def step(self, state, fragment):
        n = len(self.family)
        s = fragment.size - 1
        # copies absent at the previous stage must pass through the newest
        # element, so later stages only search rooted there
        required = None if s == 0 else s
        triggers = list(state)
        for i in range(n):
            if triggers[i] is None and any(
                sat_fragment(self.pairwise[(j, i)], fragment, required)
                for j in range(n)
                if j != i
            ):
                triggers[i] = s
        i, t = unpair(s)
        hyp = QUESTION
        if i < n and triggers[i] is not None and t >= triggers[i]:
            hyp = i
        return tuple(triggers), hyp


class IdToCoLearner(Learner):
    """Refutes member i the first time the operator's output on the stream
    is inconsistent with its output on member i's canonical stream; each
    refuted code is emitted once, least first."""

    def __init__(self, family, operator):
        super().__init__(family)
        self.operator = operator

    def initial_state(self):
        n = len(self.family)
        return {
            "mine": (self.operator.initial(), ()),
            "refs": tuple(
                (self.operator.initial(), ()) for _ in range(n)
            ),
            "emitted": frozenset(),
        }

    def _advance(self, run_state, fragment):
        op_state, out = run_state
        op_state, new = self.operator.step(op_state, fragment)
        return op_state, out + tuple(new)

    def step(self, state, fragment):
        s = fragment.size - 1
        mine = self._advance(state["mine"], fragment)
        refs = []
        for i, member in enumerate(self.family):
            size = member.size()
            if size is not None and s + 1 > size:
                refs.append(state["refs"][i])
                continue
            refs.append(
                self._advance(
                    state["refs"][i], canonical_fragment(member, s + 1)
                )
            )
        emitted = state["emitted"]
        hyp = QUESTION
        for i in range(len(self.family)):
            if i in emitted:
                continue
            a, b = mine[1], refs[i][1]
            k = min(len(a), len(b))
            if a[:k] != b[:k]:
                hyp = i
                emitted = emitted | {i}
                break
        return {"mine": mine, "refs": tuple(refs), "emitted": emitted}, hyp


class NusLearner(Learner):
    """Keeps its conjecture while the stream's existential facts stay
    inside the conjectured theory; otherwise moves to the least candidate
    whose theory contains the fragment and whose own formula already
    holds.  The true code, once emitted, is never abandoned."""

    def __init__(self, family, solid_witnesses):
        super().__init__(family)
        members = list(family)
        n = len(members)
        leq = [
            [sigma1_leq(members[i], members[j]) for j in range(n)]
            for i in range(n)
        ]
        for i in range(n):
            w = solid_witnesses.get(i)
            if w is None:
                raise ConfigurationError("missing witness for code %d" % i)
            if not sat_catalog(w, members[i]):
                raise ConfigurationError("witness %d fails on its member" % i)
            for j in range(n):
                if j != i and leq[j][i] and not leq[i][j]:
                    if sat_catalog(w, members[j]):
                        raise ConfigurationError(
                            "witness %d holds strictly below (%d)" % (i, j)
                        )
        self.witnesses = dict(solid_witnesses)

    def initial_state(self):
        return (QUESTION, True)  # (current hypothesis, first stage flag)

    def step(self, state, fragment):
        current, first = state
        if first:
            return (QUESTION, False), QUESTION
        members = list(self.family)
        inside = [fragment_embeds(fragment, m) for m in members]
        candidates = [
            i
            for i in range(len(members))
            if inside[i] and sat_fragment(self.witnesses[i], fragment)
        ]
        if not candidates:
            return (current, False), current
        if current != QUESTION and inside[current]:
            return (current, False), current
        new = min(candidates)
        return (new, False), new


def _decisive_step(h, prev_in, seen, prev_out, first):
    """One step of the abandon-return-free rewrite: pass a value through
    when it matches the current output, or when it is both a change of the
    input and brand new; otherwise hold the current output."""
    if first:
        return h
    if h == prev_out or (h != prev_in and h not in seen):
        return h
    return prev_out


def decisive_stream(hypotheses):
    out = []
    seen = set()
    prev_in = None
    for s, h in enumerate(hypotheses):
        prev_out = out[-1] if out else None
        out.append(_decisive_step(h, prev_in, seen, prev_out, s == 0))
        seen.add(h)
        prev_in = h
    return out


class DecisiveTransform(Learner):
    """Wraps a learner so that no hypothesis is ever returned to after
    being abandoned, on any stream."""

    def __init__(self, inner):
        super().__init__(inner.family)
        self.inner = inner

    def initial_state(self):
        # (inner state, previous input, inputs seen, output, any steps yet)
        return (self.inner.initial_state(), None, frozenset(), None, True)

    def step(self, state, fragment):
        inner_state, prev_in, seen, prev_out, first = state
        inner_state, h = self.inner.step(inner_state, fragment)
        out = _decisive_step(h, prev_in, seen, prev_out, first)
        return (inner_state, h, seen | {h}, out, False), out


class PlFromPairwiseEx(Learner):
    """Round-robin slots (i, k): code i is emitted when every pairwise
    duel against the first k' competitors has conjectured i more often
    than this learner has."""

    def __init__(self, family, duels):
        super().__init__(family)
        n = len(family)
        for i in range(n):
            for j in range(i + 1, n):
                if (i, j) not in duels:
                    raise ConfigurationError("missing duel (%d,%d)" % (i, j))
        self.duels = {k: duels[k] for k in duels}

    def initial_state(self):
        duel_states = {k: d.initial_state() for k, d in self.duels.items()}
        # per duel, per code, cumulative count history indexed by stage
        histories = {k: {k[0]: [], k[1]: []} for k in self.duels}
        own = [0] * len(self.family)
        return (duel_states, histories, own)

    def _duel_count(self, histories, i, j, code, stage):
        key = (min(i, j), max(i, j))
        hist = histories[key][code]
        if stage >= len(hist):
            stage = len(hist) - 1
        return hist[stage] if stage >= 0 else 0

    def step(self, state, fragment):
        duel_states, histories, own = state
        duel_states = dict(duel_states)
        histories = {
            k: {c: list(v) for c, v in h.items()} for k, h in histories.items()
        }
        own = list(own)
        for key, duel in self.duels.items():
            duel_states[key], h = duel.step(duel_states[key], fragment)
            for code in key:
                prev = histories[key][code][-1] if histories[key][code] else 0
                histories[key][code].append(prev + (1 if h == code else 0))
        s = fragment.size - 1
        n = len(self.family)
        i, k = unpair(s)
        hyp = QUESTION
        if i < n and k > 0:
            if n == 1:
                hyp = 0
            else:
                c_l = own[i]
                for k_prime in range(1, k):
                    if c_l >= k_prime:
                        continue
                    if all(
                        c_l < self._duel_count(histories, i, j, i, k)
                        for j in range(min(k_prime, n - 1) + 1)
                        if j != i and j < n
                    ):
                        hyp = i
                        break
        if hyp != QUESTION:
            own[hyp] += 1
        return (duel_states, histories, own), hyp


class PlFromE3(Learner):
    """Emits code i for the n-th time once, against every competitor, some
    tail of the precomputed disagreement positions shows n consecutive
    agreements between the operator's output on the stream and on member
    i's canonical stream."""

    def __init__(self, family, operator, depth=64, max_column=16):
        super().__init__(family)
        self.operator = operator
        self.depth = depth
        members = list(family)
        n = len(members)
        # offline reference runs, long enough to fill the tables
        horizon = pair(max_column, depth) + 1
        self.refs = []
        for m in members:
            state, out = operator.initial(), []
            size = m.size()
            top = horizon if size is None else min(horizon, size)
            for s in range(top):
                state, new = operator.step(
                    state, canonical_fragment(m, s + 1)
                )
                out.extend(new)
            self.refs.append(tuple(out))
        self.d = {}
        self.p = {}
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                best = None
                for col in range(max_column):
                    rows = []
                    for row in range(depth):
                        flat = pair(col, row)
                        if flat < len(self.refs[i]) and flat < len(
                            self.refs[j]
                        ):
                            if self.refs[i][flat] != self.refs[j][flat]:
                                rows.append(row)
                    if rows and (best is None or len(rows) > len(best[1])):
                        best = (col, rows)
                if best is not None:
                    self.d[(i, j)] = best[0]
                    self.p[(i, j)] = best[1]

    def initial_state(self):
        return ((self.operator.initial(), ()), tuple([0] * len(self.family)))

    def step(self, state, fragment):
        (op_state, out), counts = state
        op_state, new = self.operator.step(op_state, fragment)
        out = out + tuple(new)
        counts = list(counts)
        n = len(self.family)
        hyp = QUESTION
        for i in range(n):
            target = counts[i] + 1
            ok = True
            for m in range(n):
                if m == i:
                    continue
                if (i, m) not in self.d:
                    ok = False  # table exhausted: degrade, never guess
                    break
                col, positions = self.d[(i, m)], self.p[(i, m)]
                found = False
                for k in range(len(positions) - target + 1):
                    good = True
                    for t in range(target):
                        flat = pair(col, positions[k + t])
                        if flat >= len(out) or flat >= len(self.refs[i]):
                            good = False
                            break
                        if out[flat] != self.refs[i][flat]:
                            good = False
                            break
                    if good:
                        found = True
                        break
                if not found:
                    ok = False
                    break
            if ok:
                hyp = i
                counts[i] += 1
                break
        return ((op_state, out), tuple(counts)), hyp


def _longest_chain(fragment):
    """Length of the longest chain, and the endpoints of the comparable
    part (least/greatest under the strict order, least index on ties)."""
    below = strict_order_relation(fragment) or {}
    above = {}
    comp = set()
    for a, succ in below.items():
        comp.add(a)
        for b in succ:
            comp.update((b,))
            above.setdefault(b, set()).add(a)
    if not comp:
        return 0, None, None
    # longest path in the Hasse DAG == largest |down-set chain|; since the
    # relation is transitively closed, chain length = 1 + max over
    # predecessors, computable in increasing order of |below|
    length = {}
    for e in sorted(comp, key=lambda e: len(above.get(e, ()))):
        length[e] = 1 + max(
            (length[p] for p in above.get(e, ()) if p in length), default=0
        )
    lo = min((e for e in comp if not above.get(e)), default=None)
    hi = min((e for e in comp if not below.get(e)), default=None)
    return max(length.values()), lo, hi


class PlFstarLearner(Learner):
    """For the padded chains plus the two padded infinite chains: tracks
    the longest chain; while it is stable a finite code is conjectured,
    and across growth the endpoint stability counters arbitrate between
    the two infinite limits."""

    def __init__(self, family, max_chain):
        super().__init__(family)
        keys = [m.key() for m in family]
        if "tilde(omega)" not in keys or "tilde(omega_star)" not in keys:
            raise ConfigurationError("both padded infinite chains required")
        self.code_up = keys.index("tilde(omega)")
        self.code_down = keys.index("tilde(omega_star)")
        self.chain_codes = {}
        for n in range(2, max_chain + 1):
            key = "tilde(chain(%d))" % n
            if key in keys:
                self.chain_codes[n] = keys.index(key)

    def initial_state(self):
        return (None, {}, {})  # previous chain length, min counts, max counts

    def step(self, state, fragment):
        prev_n, count_min, count_max = state
        n, lo, hi = _longest_chain(fragment)
        count_min = dict(count_min)
        count_max = dict(count_max)
        if lo is not None:
            count_min[lo] = count_min.get(lo, 0) + 1
        if hi is not None:
            count_max[hi] = count_max.get(hi, 0) + 1
        if prev_n is None:
            return (n, count_min, count_max), self.code_up
        if n == prev_n and n in self.chain_codes:
            hyp = self.chain_codes[n]
        else:
            c_min = count_min.get(lo, 0)
            c_max = count_max.get(hi, 0)
            hyp = self.code_up if c_min >= c_max else self.code_down
        return (n, count_min, count_max), hyp


class ExPosetLearner(Learner):
    """For the padded ladder posets: conjectures the infinite member while
    some element behaves like its root (everything comparable except one
    strict predecessor sits above it), otherwise the least finite member
    the fragment embeds into."""

    def __init__(self, family):
        super().__init__(family)
        self.codes = {}
        for idx, m in enumerate(family):
            key = m.key()
            if not (key.startswith("tilde(poset_p(") and key.endswith("))")):
                raise ConfigurationError("unexpected member %s" % key)
            self.codes[int(key[len("tilde(poset_p("):-2])] = idx
        if 0 not in self.codes:
            raise ConfigurationError("the infinite member is required")

    def initial_state(self):
        return None

    def _guard(self, fragment):
        below = strict_order_relation(fragment)
        if below is None:
            return False
        above = {}
        comp = set()
        for a, succ in below.items():
            comp.add(a)
            for b in succ:
                comp.add(b)
                above.setdefault(b, set()).add(a)
        for b in comp:
            rest = comp - below.get(b, set()) - {b}
            if len(rest) == 1:
                a = next(iter(rest))
                if b in below.get(a, ()):
                    return True
        return False

    def step(self, state, fragment):
        if self._guard(fragment):
            return state, self.codes[0]
        for k in sorted(self.codes):
            if k > 0 and fragment_embeds(fragment, self.family.members[
                self.codes[k]
            ]):
                return state, self.codes[k]
        return state, QUESTION


class ExMinEmbedLearner(Learner):
    """For a family ordered compatibly with theory inclusion: conjecture
    the least member the fragment embeds into.  Mind changes are bounded
    by the family size minus one."""

    def __init__(self, family):
        super().__init__(family)
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
                        "members %d and %d have equal theories" % (i, j)
                    )
                if leq[i][j] and i > j:
                    raise ConfigurationError(
                        "member order violates theory inclusion "
                        "(%d below %d)" % (i, j)
                    )

    def initial_state(self):
        return None

    def step(self, state, fragment):
        for i, m in enumerate(self.family):
            if fragment_embeds(fragment, m):
                return state, i
        return state, QUESTION


class ExFromPlPair(Learner):
    """Projects a partial learner's transcript onto a two-member pair:
    pass its output through when it names either member, else repeat the
    last such output."""

    def __init__(self, pl, pair_codes):
        super().__init__(pl.family)
        self.pl = pl
        self.pair_codes = frozenset(pair_codes)

    def initial_state(self):
        return (self.pl.initial_state(), QUESTION)

    def step(self, state, fragment):
        pl_state, last = state
        pl_state, h = self.pl.step(pl_state, fragment)
        if h in self.pair_codes:
            last = h
        return (pl_state, last), last
