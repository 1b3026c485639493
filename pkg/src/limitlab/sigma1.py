"""Existential formulas over fragments, theory comparison and the family
classifier.

A formula here is a finite disjunction of "an induced copy of this finite
fragment occurs" statements.  Satisfaction is monotone under fragment
extension, and truth in a catalog structure reduces to age membership.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .structures import SignatureMismatchError, embed_finite, embed_map
from .catalog import (
    CatalogStructure,
    UnsupportedOracleError,
    canonical_fragment,
    fragment_embeds,
    parse_structure,
)

WITNESS_SIZE_BOUND = 8


@dataclass(frozen=True)
class FormulaWitness:
    """A finite disjunction of induced-copy statements.

    Each disjunct is a finite fragment; labels keep the textual form
    readable when a disjunct came from a named finite structure.
    """

    disjuncts: tuple
    labels: tuple = ()

    def __post_init__(self):
        if not self.disjuncts:
            raise ValueError("a formula needs at least one disjunct")
        object.__setattr__(self, "disjuncts", tuple(self.disjuncts))
        labels = self.labels or tuple(
            "fragment[%d]" % d.size for d in self.disjuncts
        )
        object.__setattr__(self, "labels", tuple(labels))

    def __or__(self, other):
        return FormulaWitness(
            self.disjuncts + other.disjuncts, self.labels + other.labels
        )

    def __str__(self):
        return " | ".join("embeds(%s)" % l for l in self.labels)

    def to_json(self):
        return str(self)


def embeds(expr):
    """`embeds("chain(4)")`: the statement that the named finite structure
    occurs as an induced substructure."""
    structure = parse_structure(expr) if isinstance(expr, str) else expr
    size = structure.size()
    if size is None:
        raise ValueError("embed targets must be finite: %s" % structure.key())
    return FormulaWitness(
        (canonical_fragment(structure, size),), (structure.key(),)
    )


def parse_formula(text):
    """Parse `embeds(chain(4)) | embeds(cycle(3))`."""
    parts = [p.strip() for p in text.split("|")]
    formula = None
    for part in parts:
        if not (part.startswith("embeds(") and part.endswith(")")):
            raise ValueError("expected embeds(...), got %r" % part)
        atom = embeds(part[len("embeds("):-1])
        formula = atom if formula is None else formula | atom
    return formula


def sat_fragment(formula, fragment, required=None):
    """True iff some disjunct occurs in the fragment; monotone in the
    fragment.

    `required` restricts the search to copies through one element of the
    fragment; callers tracking a growing stream use it to re-check only
    against the newest element.
    """
    for d in formula.disjuncts:
        if d.signature != fragment.signature:
            raise SignatureMismatchError("formula over a different signature")
        if embed_map(d, fragment, required=required) is not None:
            return True
    return False


def sat_catalog(formula, structure):
    """True iff some disjunct is in the age of the catalog structure."""
    if not isinstance(structure, CatalogStructure):
        raise UnsupportedOracleError("not a catalog structure: %r" % structure)
    return any(fragment_embeds(d, structure) for d in formula.disjuncts)


def _saturation_bound(a, b):
    return 2 * (a.param() + b.param()) + 8


def sigma1_leq(a, b, max_size=None):
    """Existential-theory inclusion, decided as age inclusion.

    With max_size set, only substructures of `a` up to that many elements
    are required to embed into `b` (a matched-depth comparison for use
    against bounded brute-force oracles); the default checks a canonical
    prefix large enough to exhibit every distinguishing feature of the
    catalog pair.
    """
    if not isinstance(a, CatalogStructure) or not isinstance(b, CatalogStructure):
        raise UnsupportedOracleError("catalog structures required")
    if max_size is None:
        n = _saturation_bound(a, b)
        size = a.size()
        if size is not None:
            n = min(n, size)
        return fragment_embeds(canonical_fragment(a, n), b)
    n = 2 * max_size + a.param() + 4
    size = a.size()
    if size is not None:
        n = min(n, size)
    prefix = canonical_fragment(a, n)
    seen = set()
    import itertools

    for k in range(1, min(max_size, n) + 1):
        for subset in itertools.combinations(range(n), k):
            sub = prefix.induced(subset)
            key = (sub.size, sub.tuple_set())
            if key in seen:
                continue
            seen.add(key)
            if not fragment_embeds(sub, b):
                return False
    return True


def _witness_candidates(a, bound):
    """Small fragments from the age of `a`, smallest first: canonical
    prefixes, their comparable cores, and their connected components."""
    from .catalog import _nonisolated_part, graph_components

    top = 2 * bound + 4
    size = a.size()
    if size is not None:
        top = min(top, size)
    out = []
    seen = set()

    def add(frag):
        if 1 <= frag.size <= bound:
            key = (frag.size, frag.tuple_set())
            if key not in seen:
                seen.add(key)
                out.append(frag)

    for m in range(1, top + 1):
        prefix = canonical_fragment(a, m)
        add(prefix)
        core = _nonisolated_part(prefix)
        add(core)
        for comp in graph_components(prefix):
            add(prefix.induced(comp))
    out.sort(key=lambda f: (f.size, len(f.tuples())))
    return out


def _find_separating_witness(a, others, bound):
    """A fragment in the age of `a` embedding into none of `others`, or
    None when the bounded search exhausts."""
    for cand in _witness_candidates(a, bound):
        if all(not fragment_embeds(cand, o) for o in others):
            label = "prefix(%s)[%d]" % (a.key(), cand.size)
            return FormulaWitness((cand,), (label,))
    return None


@dataclass
class Sigma1Classification:
    level: str
    is_partial_order: bool
    is_antichain: bool
    strong: str  # "yes" | "no" | "inconclusive"
    solid: str  # "yes" | "no" | "inconclusive" | "n/a"
    leq: tuple = ()
    witnesses: dict = field(default_factory=dict)
    strong_witnesses: dict = field(default_factory=dict)
    inconclusive_pairs: tuple = ()

    def __post_init__(self):
        # the implication chain must hold on every output
        if self.level == "StrongAntichain":
            assert self.is_antichain and self.is_partial_order
        if self.is_antichain:
            assert self.is_partial_order

    def to_json(self):
        return {
            "level": self.level,
            "is_partial_order": self.is_partial_order,
            "is_antichain": self.is_antichain,
            "strong": self.strong,
            "solid": self.solid,
            "leq": [list(row) for row in self.leq],
            "witnesses": {
                "%d,%d" % k: str(w) for k, w in self.witnesses.items()
            },
            "strong_witnesses": {
                str(k): str(w) for k, w in self.strong_witnesses.items()
            },
            "inconclusive_pairs": [list(p) for p in self.inconclusive_pairs],
        }


def classify_family(family, bound=WITNESS_SIZE_BOUND):
    """The pairwise theory-inclusion digraph plus the antichain / strong
    antichain / partial order / solid flags.

    Definite verdicts come from the exact inclusion oracle; witness
    searches that exhaust the size bound report "inconclusive", never a
    negative claim.
    """
    members = list(family)
    n = len(members)
    leq = tuple(
        tuple(sigma1_leq(members[i], members[j]) for j in range(n))
        for i in range(n)
    )
    distinct = all(
        not (leq[i][j] and leq[j][i]) for i in range(n) for j in range(n)
        if i != j
    )
    antichain = distinct and all(
        not leq[i][j] for i in range(n) for j in range(n) if i != j
    )

    witnesses = {}
    inconclusive_pairs = []
    for i in range(n):
        for j in range(n):
            if i != j and not leq[i][j]:
                w = _find_separating_witness(members[i], [members[j]], bound)
                if w is not None:
                    witnesses[(i, j)] = w
                else:
                    inconclusive_pairs.append((i, j))

    strong_witnesses = {}
    if not antichain:
        strong = "no"
    else:
        strong = "yes"
        for i in range(n):
            others = [members[j] for j in range(n) if j != i]
            w = _find_separating_witness(members[i], others, bound)
            if w is None:
                strong = "inconclusive"
                break
            strong_witnesses[i] = w

    if not distinct:
        solid = "n/a"
    else:
        solid = "yes"
        for i in range(n):
            cone = [
                members[j]
                for j in range(n)
                if j != i and leq[j][i] and not leq[i][j]
            ]
            if not cone:
                continue
            w = _find_separating_witness(members[i], cone, bound)
            if w is None:
                solid = "inconclusive"
                break

    if not distinct:
        level = "NotPartialOrder"
    elif strong == "yes":
        level = "StrongAntichain"
    elif antichain:
        level = "Antichain"
    elif solid == "yes":
        level = "SolidPartialOrder"
    else:
        level = "PartialOrder"

    return Sigma1Classification(
        level=level,
        is_partial_order=distinct,
        is_antichain=antichain,
        strong=strong,
        solid=solid,
        leq=leq,
        witnesses=witnesses,
        strong_witnesses=strong_witnesses,
        inconclusive_pairs=tuple(inconclusive_pairs),
    )


def solid_witnesses(family, bound=WITNESS_SIZE_BOUND):
    """Per-member formulas true in the member and false throughout its
    strict lower cone, or None when the bounded search exhausts."""
    members = list(family)
    n = len(members)
    leq = [
        [sigma1_leq(members[i], members[j]) for j in range(n)]
        for i in range(n)
    ]
    out = {}
    for i in range(n):
        cone = [
            members[j]
            for j in range(n)
            if j != i and leq[j][i] and not leq[i][j]
        ]
        w = _find_separating_witness(members[i], cone, bound)
        if w is None:
            return None
        out[i] = w
    return out


def _is_fstar_key(key):
    if key in ("tilde(omega)", "tilde(omega_star)"):
        return True
    return key.startswith("tilde(chain(") and key.endswith("))")


class Sigma2Metadata:
    """Declared second-level comparability facts for specific catalog
    families.  These are consumed as given and never inferred.
    """

    def antichain_status(self, members):
        """True / False / None (unknown) for "this family is a second-level
        antichain"."""
        keys = {m.key() for m in members}
        if all(_is_fstar_key(k) for k in keys):
            return True
        if {"omega", "zeta"} <= keys:
            return False
        if keys <= {"omega", "omega_star"}:
            return True
        return None
