"""Finite-horizon criterion checkers, registries and the experiment
matrix.

Limit statements get finite surrogates: "eventually" becomes tail
stability, "infinitely often" becomes window recurrence over the final
half, "finitely often" becomes a plateau over the final half.  Verdicts
that a timeout alone cannot justify come back INCONCLUSIVE, never FAIL.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import Family, Presentation, parse_structure
from .sigma1 import classify_family, solid_witnesses
from . import learners as L
from . import reductions as R
from . import adversaries as A
from .adversaries import FailureCertificate
from .learners import QUESTION, ConfigurationError

DEFAULT_HORIZON = 512
DEFAULT_TAIL = 64
DEFAULT_WINDOW = 50

CRITERIA = ("Ex", "Fin", "AlphaFin", "Co", "PL", "NUs", "Dec")


@dataclass(frozen=True)
class CriterionSpec:
    kind: str
    horizon: int = DEFAULT_HORIZON
    tail: int = DEFAULT_TAIL
    window: int = DEFAULT_WINDOW
    budget: int | None = None

    def __post_init__(self):
        if self.kind not in CRITERIA:
            raise ValueError("unknown criterion: %r" % self.kind)
        if not (self.horizon > self.window > 0):
            raise ValueError("need horizon > window > 0")
        if self.kind == "AlphaFin" and self.budget is None:
            raise ValueError("AlphaFin needs a mind-change budget")


@dataclass(frozen=True)
class Verdict:
    status: str  # PASS | FAIL | INCONCLUSIVE | SKIPPED
    certificate: FailureCertificate | None = None
    reason: str = ""

    def __post_init__(self):
        if self.status == "FAIL":
            assert self.certificate is not None

    def to_json(self):
        return {
            "status": self.status,
            "certificate": (
                self.certificate.to_json() if self.certificate else None
            ),
            "reason": self.reason,
        }


def _fail(kind, spec, details, excerpt=()):
    return Verdict(
        "FAIL",
        FailureCertificate(
            kind, "criterion:%s" % spec.kind, "", 0, spec.horizon,
            details, tuple(excerpt),
        ),
    )


def _mind_changes(transcript):
    changes = 0
    prev = None
    for h in transcript:
        if h != QUESTION:
            if prev is not None and h != prev:
                changes += 1
            prev = h
    return changes


def _abandon_return(transcript):
    """The first (code, abandon stage, return stage) pattern, or None."""
    last_non_q = None
    abandoned = {}
    for s, h in enumerate(transcript):
        if h == QUESTION:
            continue
        if h in abandoned:
            return (h, abandoned[h], s)
        if last_non_q is not None and h != last_non_q[1]:
            abandoned[last_non_q[1]] = s
        last_non_q = (s, h)
    return None


def _check_ex(spec, transcript, truth):
    tail = transcript[spec.horizon - spec.tail: spec.horizon]
    if all(h == truth for h in tail):
        return Verdict("PASS")
    if all(h == tail[0] for h in tail):
        return _fail(
            "StuckWrong", spec,
            {"final_hypothesis": tail[0], "truth_code": truth},
            [(spec.horizon - 1, tail[-1])],
        )
    return _fail(
        "InfinitelyManyMindChanges", spec,
        {"tail_values": sorted(set(map(str, tail))), "truth_code": truth},
    )


def check(spec, transcript, truth, family):
    """Score a transcript against a criterion; total on any transcript of
    at least horizon length."""
    try:
        if len(transcript) < spec.horizon:
            return Verdict(
                "INCONCLUSIVE",
                reason="transcript shorter than horizon",
            )
        transcript = list(transcript[: spec.horizon])
        if spec.kind == "Ex":
            return _check_ex(spec, transcript, truth)
        if spec.kind == "Fin":
            values = [h for h in transcript if h != QUESTION]
            distinct = sorted(set(values))
            if not values:
                return _fail("NeverCommits", spec, {"truth_code": truth})
            if len(distinct) > 1:
                return _fail(
                    "CommitRevised", spec,
                    {"values": distinct, "truth_code": truth},
                )
            if values[0] != truth:
                return _fail(
                    "StuckWrong", spec,
                    {"final_hypothesis": values[0], "truth_code": truth},
                )
            return Verdict("PASS")
        if spec.kind == "AlphaFin":
            changes = _mind_changes(transcript)
            if changes > spec.budget:
                return _fail(
                    "MindChangeBudgetExceeded", spec,
                    {"changes": changes, "budget": spec.budget},
                )
            return _check_ex(spec, transcript, truth)
        if spec.kind == "Co":
            present = set(h for h in transcript if h != QUESTION)
            if truth in present:
                return _fail(
                    "CorrectCodeEmitted", spec,
                    {"code": truth, "stage": transcript.index(truth)},
                )
            missing = [
                c for c in range(len(family))
                if c != truth and c not in present
            ]
            if missing:
                return _fail("MissingCode", spec, {"codes": missing})
            return Verdict("PASS")
        if spec.kind == "PL":
            half = spec.horizon // 2
            for start in range(half, spec.horizon - spec.window + 1):
                if truth not in transcript[start:start + spec.window]:
                    return _fail(
                        "RecurrenceGap", spec,
                        {"window_start": start, "truth_code": truth},
                    )
            late = [
                h for h in transcript[half:]
                if h != QUESTION and h != truth
            ]
            if late:
                return _fail(
                    "WrongCodeRecurs", spec,
                    {"codes": sorted(set(late))},
                )
            return Verdict("PASS")
        if spec.kind == "NUs":
            if truth in transcript:
                first = transcript.index(truth)
                for s in range(first, spec.horizon):
                    if transcript[s] != truth:
                        return _fail(
                            "AbandonedTruth", spec,
                            {"first": first, "abandoned_at": s},
                        )
            return _check_ex(spec, transcript, truth)
        if spec.kind == "Dec":
            pattern = _abandon_return(transcript)
            if pattern is not None:
                code, left, right = pattern
                return _fail(
                    "AbandonReturn", spec,
                    {"code": code, "stages": [left, right]},
                )
            return _check_ex(spec, transcript, truth)
        return Verdict("INCONCLUSIVE", reason="unknown criterion")
    except Exception as exc:  # checker totality
        return Verdict("INCONCLUSIVE", reason="checker error: %s" % exc)


# ---------------------------------------------------------------------------
# registries


def _family_omega_pair():
    return Family(
        (parse_structure("omega"), parse_structure("omega_star")),
        name="omega_pair",
    )


def _family_cycles():
    return Family(
        (
            parse_structure("du(cycle(3),iso_inf)"),
            parse_structure("du(cycle(4),iso_inf)"),
        ),
        name="cycles",
    )


def _family_cyc_comp():
    return Family(
        tuple(parse_structure("cyc_comp(%d)" % n) for n in range(3, 7)),
        name="cyc_comp",
        truncated_from="all single-cycle complements",
    )


def _family_tilde_chains():
    return Family(
        (
            parse_structure("tilde(chain(3))"),
            parse_structure("tilde(chain(4))"),
        ),
        name="tilde_chains",
    )


def _family_fstar():
    return Family(
        (
            parse_structure("tilde(omega)"),
            parse_structure("tilde(omega_star)"),
        )
        + tuple(parse_structure("tilde(chain(%d))" % n) for n in range(2, 7)),
        name="fstar",
        truncated_from="all padded finite chains",
    )


def _family_padded_chains():
    return Family(
        tuple(parse_structure("tilde(chain(%d))" % n) for n in range(2, 9))
        + (parse_structure("tilde(omega)"),),
        name="padded_chains",
        truncated_from="all padded finite chains",
    )


FAMILIES = {
    "omega_pair": _family_omega_pair,
    "cycles": _family_cycles,
    "cyc_comp": _family_cyc_comp,
    "tilde_chains": _family_tilde_chains,
    "fstar": _family_fstar,
    "padded_chains": _family_padded_chains,
    "rays": A.rays_family,
    "posets": A.poset_family,
}


def get_family(name):
    if name in FAMILIES:
        return FAMILIES[name]()
    # fall back to a comma-separated list of structure expressions
    members = tuple(parse_structure(p) for p in name.split(","))
    return Family(members, name=name)


def _make_fin(family):
    cls = classify_family(family)
    if cls.strong != "yes":
        raise ConfigurationError(
            "family is not a verified strong antichain (%s)" % cls.strong
        )
    return L.FinLearner(family, cls.strong_witnesses)


def _make_co(family):
    cls = classify_family(family)
    return L.CoLearner(family, cls.witnesses)


def _make_nus(family):
    witnesses = solid_witnesses(family)
    if witnesses is None:
        raise ConfigurationError("solid witness search exhausted")
    return L.NusLearner(family, witnesses)


def _make_pl_pairwise(family):
    keys = sorted(m.key() for m in family)
    duels = {}
    n = len(family)
    for i in range(n):
        for j in range(i + 1, n):
            pair_fam = Family((family.members[i], family.members[j]))
            if keys == ["omega", "omega_star"]:
                inner = L.ExMinMaxLearner(pair_fam)
            else:
                inner = L.ExMinEmbedLearner(pair_fam)
            duels[(i, j)] = _PairAdapter(inner, (i, j))
    return L.PlFromPairwiseEx(family, duels)


class _PairAdapter(L.Learner):
    """Lifts a two-member learner's codes {0,1} to global family codes."""

    def __init__(self, inner, codes):
        super().__init__(inner.family)
        self.inner = inner
        self.codes = codes

    def initial_state(self):
        return self.inner.initial_state()

    def step(self, state, fragment):
        state, h = self.inner.step(state, fragment)
        if h == QUESTION:
            return state, h
        return state, self.codes[h]


LEARNERS = {
    "ex_minmax": L.ExMinMaxLearner,
    "fin": _make_fin,
    "co": _make_co,
    "nus": _make_nus,
    "dec_nus": lambda fam: L.DecisiveTransform(_make_nus(fam)),
    "pl_pairwise": _make_pl_pairwise,
    "pl_fstar": lambda fam: L.PlFstarLearner(fam, max_chain=16),
    "ex_poset": L.ExPosetLearner,
    "dec_ex_poset": lambda fam: L.DecisiveTransform(L.ExPosetLearner(fam)),
    "ex_min_embed": L.ExMinEmbedLearner,
    "id_to_co": lambda fam: L.IdToCoLearner(
        fam, R.GammaFinToEqnat(fam, _make_fin(fam))
    ),
}


GAMMAS = {
    "gamma_fin_to_eqnat": lambda fam: R.GammaFinToEqnat(fam, _make_fin(fam)),
    "gamma_fin_to_eqnat_total": lambda fam: R.GammaFinToEqnatTotal(
        fam, _make_fin(fam)
    ),
    "gamma_erange": lambda fam: R.GammaErange(
        fam, classify_family(fam).witnesses
    ),
    "gamma_erange_to_e3": lambda fam: R.GammaErangeToE3(
        fam, classify_family(fam).witnesses
    ),
}


def run_cell(family, learner, spec, member_code, seed):
    presentation = Presentation(family.members[member_code], seed)
    transcript = L.run(learner, presentation, spec.horizon)
    return check(spec, transcript, member_code, family)


def run_matrix(cells):
    """cells: iterable of dicts with keys family, learner, criterion and
    optional member, seeds, horizon, tail, window, budget."""
    rows = []
    for cell in cells:
        family = get_family(cell["family"])
        spec = CriterionSpec(
            cell["criterion"],
            horizon=cell.get("horizon", DEFAULT_HORIZON),
            tail=cell.get("tail", DEFAULT_TAIL),
            window=cell.get("window", DEFAULT_WINDOW),
            budget=cell.get("budget"),
        )
        try:
            learner = LEARNERS[cell["learner"]](family)
        except (ConfigurationError, KeyError) as exc:
            rows.append(
                {
                    "cell": cell,
                    "member": None,
                    "seed": None,
                    "verdict": Verdict("SKIPPED", reason=str(exc)),
                }
            )
            continue
        members = (
            [cell["member"]]
            if "member" in cell
            else list(range(len(family)))
        )
        for code in members:
            for seed in cell.get("seeds", [1]):
                verdict = run_cell(family, learner, spec, code, seed)
                rows.append(
                    {
                        "cell": cell,
                        "member": code,
                        "seed": seed,
                        "verdict": verdict,
                    }
                )
    return rows


ADVERSARIES = (
    "adv_vs_ex_rays",
    "adv_vs_nus_poset",
    "adv_vs_co_comparable",
    "adv_vs_fin",
    "adv_vs_total_id_operator",
    "adv_vs_e3_operator_fstar",
)

ADVERSARY_DEFAULT_FAMILY = {
    "adv_vs_ex_rays": "rays",
    "adv_vs_nus_poset": "posets",
    "adv_vs_co_comparable": "tilde_chains",
    "adv_vs_fin": "cycles",
    "adv_vs_total_id_operator": "cycles",
    "adv_vs_e3_operator_fstar": "tilde_chains",
}


def run_duel(adversary, opponent, family_name=None, seed=0):
    """Pit a registered adversary against a registered learner or
    operator; returns (replayable presentation, certificate)."""
    if adversary not in ADVERSARIES:
        raise KeyError("unknown adversary: %r" % adversary)
    family = get_family(family_name or ADVERSARY_DEFAULT_FAMILY[adversary])
    if opponent in LEARNERS:
        obj = LEARNERS[opponent](family)
    elif opponent in GAMMAS:
        obj = GAMMAS[opponent](family)
    else:
        raise KeyError("unknown learner or operator: %r" % opponent)
    if adversary == "adv_vs_ex_rays":
        return A.adv_vs_ex_rays(obj, seed)
    if adversary == "adv_vs_nus_poset":
        return A.adv_vs_nus_poset(obj, seed)
    if adversary == "adv_vs_co_comparable":
        return A.adv_vs_co_comparable(
            obj, (family.members[0], family.members[1]), seed
        )
    if adversary == "adv_vs_fin":
        return A.adv_vs_fin(
            obj, (family.members[0], family.members[1]), seed
        )
    if adversary == "adv_vs_total_id_operator":
        return A.adv_vs_total_id_operator(obj, family, seed)
    return A.adv_vs_e3_operator_fstar(obj, seed)


def row_to_json(row):
    return {
        "cell": row["cell"],
        "member": row["member"],
        "seed": row["seed"],
        "verdict": row["verdict"].to_json(),
    }


def _verdict_summary(v):
    if isinstance(v, Verdict):
        v = v.to_json()
    extra = ""
    if v["status"] == "FAIL" and v["certificate"]:
        extra = " (%s)" % v["certificate"]["kind"]
    elif v.get("reason"):
        extra = " (%s)" % v["reason"]
    return v["status"], extra


def render_table(rows):
    lines = []
    header = "%-14s %-14s %-8s %-7s %-5s %s" % (
        "family", "learner", "crit", "member", "seed", "verdict"
    )
    lines.append(header)
    lines.append("-" * len(header))
    for row in rows:
        cell = row["cell"]
        status, extra = _verdict_summary(row["verdict"])
        lines.append(
            "%-14s %-14s %-8s %-7s %-5s %s%s" % (
                cell["family"], cell["learner"], cell["criterion"],
                "-" if row["member"] is None else row["member"],
                "-" if row["seed"] is None else row["seed"],
                status, extra,
            )
        )
    return "\n".join(lines)


def matrix_exit_code(rows):
    for row in rows:
        status, _ = _verdict_summary(row["verdict"])
        if status == "FAIL":
            return 1
    return 0
