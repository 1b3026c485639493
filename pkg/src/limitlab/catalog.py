"""Symbolic catalog of target structures and their seeded presentations.

Every structure is a countable (finite or infinite) object with a single
binary relation: strict partial orders (transitively closed) or symmetric
graphs.  A structure exposes a canonical enumeration of its abstract
elements; presentations reveal those elements in a seeded fair order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .structures import BINARY, FiniteFragment

_SCHEDULE_WINDOW = 4


class ConstructionError(ValueError):
    pass


class UnsupportedOracleError(ValueError):
    pass


class CatalogStructure:
    """Base class; subclasses define a canonical element enumeration and the
    relation on abstract tokens."""

    style = "order"  # "order" | "graph" | "any"

    def __init__(self):
        self._enum_cache = []
        self._enum_iter = None
        self._exhausted = False

    def _enumerate(self):
        raise NotImplementedError

    def key(self):
        raise NotImplementedError

    def related(self, x, y):
        raise NotImplementedError

    def size(self):
        """Number of elements, or None when infinite."""
        return None

    @property
    def is_infinite(self):
        return self.size() is None

    def param(self):
        """Largest numeric parameter, used for saturation bounds."""
        return 3

    def element(self, i):
        while len(self._enum_cache) <= i and not self._exhausted:
            if self._enum_iter is None:
                self._enum_iter = self._enumerate()
            try:
                self._enum_cache.append(next(self._enum_iter))
            except StopIteration:
                self._exhausted = True
        if i >= len(self._enum_cache):
            raise IndexError("structure %s has only %d elements" % (
                self.key(), len(self._enum_cache)))
        return self._enum_cache[i]

    def __repr__(self):
        return self.key()

    def __eq__(self, other):
        return isinstance(other, CatalogStructure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


class OmegaOrder(CatalogStructure):
    def _enumerate(self):
        i = 0
        while True:
            yield i
            i += 1

    def key(self):
        return "omega"

    def related(self, x, y):
        return x < y


class OmegaStarOrder(CatalogStructure):
    """The reverse of omega; token i is the i-th element from the top."""

    def _enumerate(self):
        i = 0
        while True:
            yield i
            i += 1

    def key(self):
        return "omega_star"

    def related(self, x, y):
        return x > y


class ZetaOrder(CatalogStructure):
    """Integers; enumerated 0, 1, -1, 2, -2, ..."""

    def _enumerate(self):
        yield 0
        i = 1
        while True:
            yield i
            yield -i
            i += 1

    def key(self):
        return "zeta"

    def related(self, x, y):
        return x < y


class FiniteChain(CatalogStructure):
    def __init__(self, n):
        super().__init__()
        if n < 2:
            raise ValueError("chains need at least 2 elements")
        self.n = n

    def _enumerate(self):
        return iter(range(self.n))

    def key(self):
        return "chain(%d)" % self.n

    def size(self):
        return self.n

    def param(self):
        return self.n

    def related(self, x, y):
        return x < y


class Ray(CatalogStructure):
    """The one-way infinite path, as an undirected graph."""

    style = "graph"

    def _enumerate(self):
        i = 0
        while True:
            yield i
            i += 1

    def key(self):
        return "ray"

    def related(self, x, y):
        return abs(x - y) == 1


class FiniteRay(Ray):
    def __init__(self, n):
        super().__init__()
        if n < 2:
            raise ValueError("finite rays need at least 2 elements")
        self.n = n

    def _enumerate(self):
        return iter(range(self.n))

    def key(self):
        return "ray(%d)" % self.n

    def size(self):
        return self.n

    def param(self):
        return self.n


class Cycle(CatalogStructure):
    style = "graph"

    def __init__(self, n):
        super().__init__()
        if n < 3:
            raise ValueError("cycles need at least 3 elements")
        self.n = n

    def _enumerate(self):
        return iter(range(self.n))

    def key(self):
        return "cycle(%d)" % self.n

    def size(self):
        return self.n

    def param(self):
        return self.n

    def related(self, x, y):
        d = abs(x - y)
        return d == 1 or d == self.n - 1


class IsolatedInfinite(CatalogStructure):
    style = "any"

    def _enumerate(self):
        i = 0
        while True:
            yield i
            i += 1

    def key(self):
        return "iso_inf"

    def related(self, x, y):
        return False


class IsolatedFinite(CatalogStructure):
    style = "any"

    def __init__(self, n):
        super().__init__()
        if n < 0:
            raise ValueError("negative size")
        self.n = n

    def _enumerate(self):
        return iter(range(self.n))

    def key(self):
        return "iso(%d)" % self.n

    def size(self):
        return self.n

    def param(self):
        return max(self.n, 1)

    def related(self, x, y):
        return False


class PosetP(CatalogStructure):
    """The ladder-like posets: evens form a chain, odds sit on top.

    For k > 0 the domain is {0..2k+1} with 2i below 2i+2 (i < k) and 2i
    below 2i+1 (i <= k).  For k = 0 the domain is all of N with 2i below
    2i+2 and 2j below 2j-1 for j > 0.  Tokens are the domain elements and
    the relation is the strict order with the transitive closure
    materialized.
    """

    def __init__(self, k):
        super().__init__()
        if k < 0:
            raise ValueError("negative parameter")
        self.k = k

    def _enumerate(self):
        if self.k == 0:
            i = 0
            while True:
                yield i
                i += 1
        else:
            yield from range(2 * self.k + 2)

    def key(self):
        return "poset_p(%d)" % self.k

    def size(self):
        return None if self.k == 0 else 2 * self.k + 2

    def param(self):
        return 2 * self.k + 2 if self.k else 4

    def related(self, x, y):
        # strictly below, after closing under transitivity
        if x == y:
            return False
        if self.k == 0:
            if x % 2 == 1:
                return False
            i = x // 2
            if y % 2 == 0:
                return i < y // 2
            return i <= (y + 1) // 2
        if x % 2 == 1:
            return False
        i = x // 2
        if y % 2 == 0:
            return i < y // 2
        return i <= y // 2


class CycleComplement(CatalogStructure):
    """Disjoint union of every cycle except the named one; tokens are
    (cycle size, position), enumerated by increasing cycle size."""

    style = "graph"

    def __init__(self, n):
        super().__init__()
        if n < 3:
            raise ValueError("cycle sizes start at 3")
        self.n = n

    def _enumerate(self):
        m = 3
        while True:
            if m != self.n:
                for p in range(m):
                    yield (m, p)
            m += 1

    def key(self):
        return "cyc_comp(%d)" % self.n

    def param(self):
        return self.n

    def related(self, x, y):
        (m, p), (m2, q) = x, y
        if m != m2:
            return False
        d = abs(p - q)
        return d == 1 or d == m - 1


class Tilde(CatalogStructure):
    """A partial order plus infinitely many pairwise incomparable fresh
    elements; odd enumeration slots carry the inner structure."""

    def __init__(self, inner):
        super().__init__()
        if inner.style == "graph":
            raise ValueError("tilde applies to partial orders")
        self.inner = inner

    def _enumerate(self):
        inner_iter = self.inner._enumerate()
        pad = 0
        j = 0
        while True:
            took = False
            if j % 2 == 1:
                try:
                    yield ("x", next(inner_iter))
                    took = True
                except StopIteration:
                    pass
            if not took:
                yield ("p", pad)
                pad += 1
            j += 1

    def key(self):
        return "tilde(%s)" % self.inner.key()

    def param(self):
        return self.inner.param()

    def related(self, x, y):
        if x[0] == "x" and y[0] == "x":
            return self.inner.related(x[1], y[1])
        return False


class DisjointUnion(CatalogStructure):
    def __init__(self, left, right):
        super().__init__()
        styles = {left.style, right.style} - {"any"}
        if len(styles) > 1:
            raise ValueError("cannot mix orders and graphs in a union")
        self.left = left
        self.right = right
        self.style = styles.pop() if styles else "any"

    def _enumerate(self):
        iters = [self.left._enumerate(), self.right._enumerate()]
        tags = ["l", "r"]
        alive = [True, True]
        j = 0
        while any(alive):
            side = j % 2
            for attempt in (side, 1 - side):
                if alive[attempt]:
                    try:
                        yield (tags[attempt], next(iters[attempt]))
                        break
                    except StopIteration:
                        alive[attempt] = False
            j += 1

    def key(self):
        return "du(%s,%s)" % (self.left.key(), self.right.key())

    def size(self):
        ls, rs = self.left.size(), self.right.size()
        if ls is None or rs is None:
            return None
        return ls + rs

    def param(self):
        return max(self.left.param(), self.right.param())

    def related(self, x, y):
        if x[0] != y[0]:
            return False
        side = self.left if x[0] == "l" else self.right
        return side.related(x[1], y[1])


# ---------------------------------------------------------------------------
# textual syntax


def parse_structure(text):
    """Parse the CLI syntax, e.g. `tilde(chain(3))` or `du(cycle(4), iso_inf)`."""

    text = text.strip()

    def parse(s):
        s = s.strip()
        if "(" not in s:
            atom = {
                "omega": OmegaOrder,
                "omega_star": OmegaStarOrder,
                "zeta": ZetaOrder,
                "ray": Ray,
                "iso_inf": IsolatedInfinite,
            }.get(s)
            if atom is None:
                raise ValueError("unknown structure: %r" % s)
            return atom()
        head, rest = s.split("(", 1)
        if not rest.endswith(")"):
            raise ValueError("unbalanced parentheses in %r" % s)
        body = rest[:-1]
        head = head.strip()
        if head in ("tilde",):
            return Tilde(parse(body))
        if head == "du":
            depth = 0
            for i, ch in enumerate(body):
                if ch == "(":
                    depth += 1
                elif ch == ")":
                    depth -= 1
                elif ch == "," and depth == 0:
                    return DisjointUnion(parse(body[:i]), parse(body[i + 1:]))
            raise ValueError("du needs two arguments: %r" % s)
        n = int(body)
        maker = {
            "chain": FiniteChain,
            "ray": FiniteRay,
            "cycle": Cycle,
            "iso": IsolatedFinite,
            "poset_p": PosetP,
            "cyc_comp": CycleComplement,
        }.get(head)
        if maker is None:
            raise ValueError("unknown structure: %r" % s)
        return maker(n)

    return parse(text)


# ---------------------------------------------------------------------------
# fragment shape analysis helpers


def strict_order_relation(fragment):
    """The successor-set map of a strict partial order fragment, or None if
    the fragment is not one (irreflexive, antisymmetric, transitive)."""
    below = {}
    for _, (a, b) in fragment.tuples():
        if a == b:
            return None
        below.setdefault(a, set()).add(b)
    for a, succ in below.items():
        for b in succ:
            if a in below.get(b, ()):  # antisymmetry
                return None
            if not below.get(b, set()) <= succ:  # transitivity
                return None
    return below


def is_symmetric_graph(fragment):
    tuples = fragment.tuple_set()
    for _, (a, b) in tuples:
        if a == b or (0, (b, a)) not in tuples:
            return False
    return True


def graph_components(fragment):
    """Connected components of the undirected view, as lists of elements."""
    parent = list(range(fragment.size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for _, args in fragment.tuples():
        a = find(args[0])
        for b in args[1:]:
            parent[find(b)] = a
    comps = {}
    for e in range(fragment.size):
        comps.setdefault(find(e), []).append(e)
    return list(comps.values())


def _component_path_or_cycle(fragment, comp):
    """Classify an undirected component: 'path', 'cycle' or None."""
    comp_set = set(comp)
    edges = set()
    degree = {e: 0 for e in comp}
    for e in comp:
        for _, (a, b) in fragment.tuples_of(e):
            if a in comp_set and b in comp_set and a < b:
                edges.add((a, b))
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1
    if any(d > 2 for d in degree.values()):
        return None
    if len(edges) == len(comp) - 1:
        return "path"
    if len(edges) == len(comp) and len(comp) >= 3 and all(
        d == 2 for d in degree.values()
    ):
        return "cycle"
    return None


def _is_total_chain(fragment):
    below = strict_order_relation(fragment)
    if below is None:
        return False
    pairs = sum(len(s) for s in below.values())
    n = fragment.size
    return pairs == n * (n - 1) // 2


def _nonisolated_part(fragment):
    used = set()
    for _, args in fragment.tuples():
        used.update(args)
    return fragment.induced(sorted(used))


def canonical_fragment(structure, n):
    """The induced fragment on the first n canonical elements."""
    chain = _canonical_chains.setdefault(structure.key(), [structure, []])
    structure = chain[0]
    frags = chain[1]
    if not frags:
        frags.append(FiniteFragment(BINARY, 0))
    while len(frags) <= n:
        s = len(frags) - 1  # new element index
        try:
            tok = structure.element(s)
        except IndexError:
            raise ValueError(
                "structure %s has fewer than %d elements" % (structure.key(), n)
            )
        new = []
        for j in range(s):
            if structure.related(structure.element(j), tok):
                new.append((0, (j, s)))
            if structure.related(tok, structure.element(j)):
                new.append((0, (s, j)))
        frags.append(frags[-1].extended(s + 1, new))
    return frags[n]


_canonical_chains = {}


def fragment_embeds(fragment, structure):
    """Age membership: does the fragment embed into the structure as an
    induced substructure?  Decided structurally per catalog class, with a
    generic saturated-restriction fallback."""
    from .structures import embed_finite

    if fragment.size == 0:
        return True

    if structure.style == "any":
        # isolated structures embed exactly the tuple-free fragments that fit
        size = structure.size()
        return not fragment.tuples() and (
            size is None or fragment.size <= size
        )
    if structure.style == "order" and strict_order_relation(fragment) is None:
        return False
    if structure.style == "graph" and not is_symmetric_graph(fragment):
        return False

    if isinstance(structure, (OmegaOrder, OmegaStarOrder, ZetaOrder)):
        return _is_total_chain(fragment)
    if isinstance(structure, FiniteChain):
        return fragment.size <= structure.n and _is_total_chain(fragment)
    if isinstance(structure, Cycle):
        comps = graph_components(fragment)
        kinds = [_component_path_or_cycle(fragment, c) for c in comps]
        if any(k is None for k in kinds):
            return False
        if "cycle" in kinds:
            return len(comps) == 1 and fragment.size == structure.n
        return fragment.size + len(comps) <= structure.n
    if isinstance(structure, FiniteRay):
        comps = graph_components(fragment)
        if any(_component_path_or_cycle(fragment, c) != "path" for c in comps):
            return False
        return fragment.size + len(comps) - 1 <= structure.n
    if isinstance(structure, Ray):
        comps = graph_components(fragment)
        return all(
            _component_path_or_cycle(fragment, c) == "path" for c in comps
        )
    if isinstance(structure, CycleComplement):
        comps = graph_components(fragment)
        cycle_sizes = []
        for c in comps:
            kind = _component_path_or_cycle(fragment, c)
            if kind is None:
                return False
            if kind == "cycle":
                cycle_sizes.append(len(c))
        # one copy of each cycle size is available, except the missing one;
        # path components always fit somewhere as sizes are unbounded
        return len(set(cycle_sizes)) == len(cycle_sizes) and (
            structure.n not in cycle_sizes
        )
    if isinstance(structure, PosetP) and structure.k == 0:
        # g embeds iff the non-maximal elements are totally ordered: evens
        # form a chain, odds are maximal with prefix down-sets that can be
        # spread arbitrarily far apart
        below = strict_order_relation(fragment)
        non_maximal = sorted(below.keys())
        return _is_total_chain(fragment.induced(non_maximal))
    if isinstance(structure, Tilde):
        return fragment_embeds(_nonisolated_part(fragment), structure.inner)
    if isinstance(structure, DisjointUnion):
        left, right = structure.left, structure.right
        if isinstance(right, IsolatedInfinite):
            return fragment_embeds(_nonisolated_part(fragment), left)
        if isinstance(left, IsolatedInfinite):
            return fragment_embeds(_nonisolated_part(fragment), right)

    # generic fallback: embed into a saturated canonical restriction
    size = structure.size()
    bound = 2 * fragment.size + 8
    if size is not None:
        bound = min(bound, size)
    if size is not None and fragment.size > size:
        return False
    return embed_finite(fragment, canonical_fragment(structure, bound))


# ---------------------------------------------------------------------------
# presentations


class Presentation:
    """A deterministic, seeded, fair stage-wise stream of fragments
    isomorphic (in the limit) to the target.

    The schedule alternates "reveal the least unrevealed canonical element"
    (which guarantees fairness outright) with a seeded pick from the lowest
    few unrevealed ones.
    """

    def __init__(self, target, seed):
        self.target = target
        self.seed = seed
        self._rng = random.Random("%s|%d" % (target.key(), seed))
        self._fragments = [None]
        self._tokens = []
        self._buffer = []
        self._next_canonical = 0
        self._exhausted = False

    def _refill(self):
        while len(self._buffer) < _SCHEDULE_WINDOW and not self._exhausted:
            try:
                self._buffer.append(self.target.element(self._next_canonical))
                self._next_canonical += 1
            except IndexError:
                self._exhausted = True

    def restrict(self, s):
        size = self.target.size()
        if size is not None and s >= size:
            raise ConstructionError(
                "%s has only %d elements" % (self.target.key(), size)
            )
        while len(self._tokens) <= s:
            i = len(self._tokens)
            self._refill()
            if not self._buffer:
                raise ConstructionError("ran out of elements")
            if i % 2 == 0:
                tok = self._buffer.pop(0)
            else:
                tok = self._buffer.pop(self._rng.randrange(len(self._buffer)))
            new = []
            for j, other in enumerate(self._tokens):
                if self.target.related(other, tok):
                    new.append((0, (j, i)))
                if self.target.related(tok, other):
                    new.append((0, (i, j)))
            self._tokens.append(tok)
            prev = self._fragments[-1]
            if prev is None:
                prev = FiniteFragment(BINARY, 0)
                self._fragments = []
            self._fragments.append(prev.extended(i + 1, new))
        return self._fragments[s]


def realize(target, seed, s):
    """The stage-s fragment of the seeded presentation of target."""
    return Presentation(target, seed).restrict(s)


class AdversarialPresentation:
    """A presentation driven by a stage rule instead of a catalog target.

    Fairness is not guaranteed by construction; monotonicity is checked at
    every step.
    """

    def __init__(self, builder, label="adversarial"):
        self.builder = builder
        self.label = label
        self._fragments = []

    def restrict(self, s):
        while len(self._fragments) <= s:
            i = len(self._fragments)
            frag = self.builder(i)
            if frag.size != i + 1:
                raise ConstructionError(
                    "stage %d fragment has size %d" % (i, frag.size)
                )
            if self._fragments and not frag.extends(self._fragments[-1]):
                raise ConstructionError("builder step is not monotone")
            self._fragments.append(frag)
        return self._fragments[s]


class ReplayPresentation(AdversarialPresentation):
    """Replays an explicit list of fragments (one per stage)."""

    def __init__(self, fragments, label="replay"):
        super().__init__(lambda s: fragments[s], label)


def adversarial_presentation(builder, label="adversarial"):
    return AdversarialPresentation(builder, label)


def audit_shape(fragment, shapes):
    """True iff the fragment is isomorphic to a finite induced substructure
    of one of the listed templates."""
    return any(fragment_embeds(fragment, shape) for shape in shapes)


@dataclass(frozen=True)
class Family:
    """An ordered list of members; conjecture codes are list positions."""

    members: tuple
    name: str = ""
    truncated_from: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        keys = [m.key() for m in self.members]
        if len(set(keys)) != len(keys):
            raise ValueError("family members must be pairwise distinct")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def code_of(self, structure):
        for i, m in enumerate(self.members):
            if m == structure:
                return i
        raise ValueError("%s is not in the family" % structure.key())
