"""Group quotients of the free group and word-level membership tools.

A quotient is specified by the images of the d generators in a target group
G; N is the kernel of the induced homomorphism F_d -> G. Downstream code only
needs a handful of primitives: evaluating words, membership in N, the period
(gcd of lengths of cyclically admissible N-words), balls in the image group,
and first-return words (nonempty N-words with no proper nonempty prefix in N).

Three target models are supported:

* finite groups given by a full multiplication table,
* free abelian groups Z^k given by integer image vectors,
* free quotients obtained by killing a subset of the generators; the image
  is the free group on the surviving generators and images of words are
  freely reduced there.

Elements are plain hashable values (int index, tuple of ints, reduced letter
tuple respectively).
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import ResourceError, ValidationError
from .words import Alphabet, concat_reduce, inverse_word

MAX_FINITE_ORDER = 10_000


@dataclass(frozen=True)
class PeriodResult:
    """gcd of cyclically admissible identity-word lengths.

    ``stabilized`` means the gcd either provably cannot change (value 1) or
    did not change over the last half of the searched range. ``lengths``
    lists the lengths at which witnesses were found (empty for the exact
    graph-based route used by finite quotients).
    """

    value: int
    stabilized: bool
    lengths: tuple = ()


class Quotient(ABC):
    """Shared word-level machinery over an abstract image group."""

    def __init__(self, alphabet):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(alphabet)
        self.alphabet = alphabet
        self._period_cache = {}

    @property
    def d(self):
        return self.alphabet.d

    # --- image group interface -------------------------------------------

    @property
    @abstractmethod
    def identity(self):
        ...

    @abstractmethod
    def multiply(self, a, b):
        ...

    @abstractmethod
    def invert(self, a):
        ...

    @abstractmethod
    def letter_image(self, letter):
        ...

    @abstractmethod
    def sort_key(self, elem):
        """Total order on elements, for deterministic listings."""

    @abstractmethod
    def min_steps_to_identity(self, elem):
        """Lower bound on the number of letter images needed to bring
        ``elem`` back to the identity. Used only to prune bounded searches,
        so it must never overestimate."""

    @abstractmethod
    def describe(self):
        ...

    def element_name(self, elem):
        return repr(elem)

    # --- word-level derived operations -----------------------------------

    def eval_word(self, letters):
        g = self.identity
        for letter in letters:
            g = self.multiply(g, self.letter_image(letter))
        return g

    def is_in_N(self, letters):
        return self.eval_word(letters) == self.identity

    def period(self, n_search=24, max_states=5_000_000):
        key = (n_search, max_states)
        if key not in self._period_cache:
            self._period_cache[key] = self._period_search(n_search, max_states)
        return self._period_cache[key]

    def _period_search(self, n_search, max_states):
        """Bounded search: DP over (first letter, last letter, element),
        pruned by min_steps_to_identity. Exact within the bound."""
        ident = self.identity
        size = self.alphabet.size
        images = [self.letter_image(l) for l in range(size)]
        states = set()
        lengths = []
        gcd_val, last_change = 0, 0
        for n in range(1, n_search + 1):
            if n == 1:
                states = {(l, l, images[l]) for l in range(size)}
            else:
                nxt = set()
                remaining = n_search - n
                for first, last, g in states:
                    forbidden = last ^ 1
                    for l in range(size):
                        if l == forbidden:
                            continue
                        h = self.multiply(g, images[l])
                        if self.min_steps_to_identity(h) <= remaining:
                            nxt.add((first, l, h))
                states = nxt
            if len(states) > max_states:
                raise ResourceError(
                    "period search state space exceeded budget",
                    required=len(states), budget=max_states)
            if any(g == ident and first != (last ^ 1)
                   for first, last, g in states):
                lengths.append(n)
                new_gcd = math.gcd(gcd_val, n)
                if new_gcd != gcd_val:
                    gcd_val, last_change = new_gcd, n
                if gcd_val == 1:
                    break
        if not lengths:
            raise ResourceError(
                f"no cyclically admissible identity word of length <= "
                f"{n_search} found; increase n_search", required=n_search + 1,
                budget=n_search)
        stabilized = gcd_val == 1 or last_change <= (n_search + 1) // 2
        return PeriodResult(gcd_val, stabilized, tuple(lengths))

    def ball(self, radius, max_elements=5_000_000):
        """All elements reachable from the identity by at most ``radius``
        letter images, sorted by sort_key."""
        if radius < 0:
            raise ValidationError(f"radius must be >= 0, got {radius}")
        images = [self.letter_image(l) for l in range(self.alphabet.size)]
        seen = {self.identity}
        frontier = [self.identity]
        for _ in range(radius):
            nxt = []
            for g in frontier:
                for img in images:
                    h = self.multiply(g, img)
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
            if len(seen) > max_elements:
                raise ResourceError(
                    "ball exceeded element budget",
                    required=len(seen), budget=max_elements)
            frontier = nxt
        return sorted(seen, key=self.sort_key)

    def first_return_words(self, max_length, max_nodes=5_000_000):
        """Nonempty N-words of length <= max_length with no proper nonempty
        prefix in N, ordered by (length, letters).

        These are the edge words of the induced system on the identity
        fiber: every N-word factors uniquely into first returns (splitting
        at each prefix that lands on the identity).
        """
        ident = self.identity
        size = self.alphabet.size
        images = [self.letter_image(l) for l in range(size)]
        results = []
        visited = 0
        word = []
        prods = [ident]

        def descend():
            nonlocal visited
            forbidden = (word[-1] ^ 1) if word else -1
            for l in range(size):
                if l == forbidden:
                    continue
                visited += 1
                if visited > max_nodes:
                    raise ResourceError(
                        "first-return enumeration exceeded node budget",
                        required=visited, budget=max_nodes)
                g = self.multiply(prods[-1], images[l])
                word.append(l)
                prods.append(g)
                if g == ident:
                    # descendants all have this proper prefix in N:terminal
                    results.append(tuple(word))
                elif len(word) < max_length:
                    descend()
                word.pop()
                prods.pop()

        descend()
        return sorted(results, key=lambda w: (len(w), w))


class FiniteQuotient(Quotient):
    """Quotient onto a finite group given by its multiplication table.

    ``table[i, j]`` is the index of the product of elements i and j;
    ``generator_images`` gives the image index of each of the d generators
    (inverse letters map to the table inverses). Validation proves the table
    is a group (Latin square + two-sided identity + inverses + Light's
    associativity test over the generating set) and that the images generate.
    """

    def __init__(self, alphabet, table, identity_index, generator_images):
        super().__init__(alphabet)
        self.table = np.asarray(table, dtype=np.int64)
        self.identity_index = int(identity_index)
        self.generator_images = tuple(int(i) for i in generator_images)
        self._validate()
        self._inv = self._inverse_table()
        self._letter_images = []
        for k in range(self.d):
            g = self.generator_images[k]
            self._letter_images.append(g)
            self._letter_images.append(int(self._inv[g]))
        self._dist = None

    # -- group axioms -------------------------------------------------------

    def _validate(self):
        t = self.table
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValidationError(f"multiplication table must be square, "
                                  f"got shape {t.shape}")
        order = t.shape[0]
        if order == 0:
            raise ValidationError("empty multiplication table")
        if order > MAX_FINITE_ORDER:
            raise ValidationError(
                f"finite quotient of order {order} exceeds supported cap "
                f"{MAX_FINITE_ORDER}")
        if t.min() < 0 or t.max() >= order:
            raise ValidationError("table entries out of range")
        e = self.identity_index
        if not 0 <= e < order:
            raise ValidationError(f"identity index {e} out of range")
        idx = np.arange(order)
        if not (np.array_equal(t[e], idx) and np.array_equal(t[:, e], idx)):
            raise ValidationError(
                f"element {e} is not a two-sided identity")
        # Latin square: every row and column is a permutation
        srt = np.sort(t, axis=1)
        if not np.array_equal(srt, np.tile(idx, (order, 1))):
            raise ValidationError("some row is not a permutation")
        srt = np.sort(t, axis=0)
        if not np.array_equal(srt, np.tile(idx[:, None], (1, order))):
            raise ValidationError("some column is not a permutation")
        if len(self.generator_images) != self.d:
            raise ValidationError(
                f"need {self.d} generator images, got "
                f"{len(self.generator_images)}")
        for g in self.generator_images:
            if not 0 <= g < order:
                raise ValidationError(f"generator image {g} out of range")
        inv = self._inverse_table()
        # generation (surjectivity of the induced homomorphism)
        gens = set(self.generator_images) | {int(inv[g])
                                             for g in self.generator_images}
        reached = {e}
        frontier = [e]
        while frontier:
            nxt = []
            for a in frontier:
                for s in gens:
                    b = int(t[a, s])
                    if b not in reached:
                        reached.add(b)
                        nxt.append(b)
            frontier = nxt
        if len(reached) != order:
            raise ValidationError(
                f"generator images generate only {len(reached)} of "
                f"{order} elements")
        # Light's associativity test: with a Latin square and generation it
        # suffices to check (x s) y == x (s y) for s in the generating set
        for s in sorted(gens):
            left = t[t[:, s], :]
            right = t[:, t[s, :]]
            if not np.array_equal(left, right):
                raise ValidationError(
                    f"multiplication table is not associative "
                    f"(fails at generator image {s})")

    def _inverse_table(self):
        order = self.table.shape[0]
        rows, cols = np.nonzero(self.table == self.identity_index)
        inv = np.full(order, -1, dtype=np.int64)
        inv[rows] = cols
        if (inv < 0).any():
            raise ValidationError("some element has no right inverse")
        # two-sidedness
        if not np.array_equal(self.table[inv, np.arange(order)],
                              np.full(order, self.identity_index)):
            raise ValidationError("some right inverse is not a left inverse")
        return inv

    @classmethod
    def from_file(cls, alphabet, path, generator_images):
        """Load from a plain-text table file.

        First line: ``order identity_index``; then ``order`` lines of
        ``order`` whitespace-separated indices, line i holding the products
        of element i with every element. Blank lines and ``#`` comments are
        ignored.
        """
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    rows.append(line.split())
        if not rows:
            raise ValidationError(f"{path}: empty table file")
        try:
            header = [int(x) for x in rows[0]]
        except ValueError as exc:
            raise ValidationError(f"{path}: bad header: {exc}") from None
        if len(header) != 2:
            raise ValidationError(
                f"{path}: header must be 'order identity_index'")
        order, identity_index = header
        body = rows[1:]
        if len(body) != order:
            raise ValidationError(
                f"{path}: expected {order} table rows, got {len(body)}")
        try:
            table = [[int(x) for x in row] for row in body]
        except ValueError as exc:
            raise ValidationError(f"{path}: bad table entry: {exc}") from None
        for i, row in enumerate(table):
            if len(row) != order:
                raise ValidationError(
                    f"{path}: row {i} has {len(row)} entries, expected "
                    f"{order}")
        return cls(alphabet, table, identity_index, generator_images)

    # -- group interface ----------------------------------------------------

    @property
    def identity(self):
        return self.identity_index

    def multiply(self, a, b):
        return int(self.table[a, b])

    def invert(self, a):
        return int(self._inv[a])

    def letter_image(self, letter):
        self.alphabet.check(letter)
        return self._letter_images[letter]

    def sort_key(self, elem):
        return elem

    def min_steps_to_identity(self, elem):
        if self._dist is None:
            # BFS from the identity along inverse steps; letter images come
            # in inverse pairs so forward and backward distances agree
            order = self.table.shape[0]
            dist = {self.identity_index: 0}
            frontier = [self.identity_index]
            steps = set(self._letter_images)
            r = 0
            while frontier and len(dist) < order:
                r += 1
                nxt = []
                for a in frontier:
                    for s in steps:
                        b = int(self.table[a, s])
                        if b not in dist:
                            dist[b] = r
                            nxt.append(b)
                frontier = nxt
            self._dist = dist
        return self._dist.get(elem, math.inf)

    def describe(self):
        return (f"finite group of order {self.table.shape[0]}, generator "
                f"images {list(self.generator_images)}")

    def element_name(self, elem):
        return str(elem)

    # -- exact period via the identity-fiber cycle structure ----------------

    def _period_search(self, n_search, max_states):
        """Cycle lengths through the identity fiber of the letter-by-letter
        graph on (letter, element) are exactly the lengths of cyclically
        admissible N-words, so the gcd is the period of that graph. BFS
        levels give it exactly, with no search bound."""
        size = self.alphabet.size
        order = self.table.shape[0]

        def node(letter, g):
            return letter * order + g

        succs = [[] for _ in range(size * order)]
        preds = [[] for _ in range(size * order)]
        for letter in range(size):
            for g in range(order):
                u = node(letter, g)
                for l2 in range(size):
                    if l2 == (letter ^ 1):
                        continue
                    v = node(l2, int(self.table[g, self._letter_images[l2]]))
                    succs[u].append(v)
                    preds[v].append(u)

        seed = node(0, self.identity_index)
        fwd = _bfs_set(seed, succs)
        bwd = _bfs_set(seed, preds)
        scc = fwd & bwd
        if not all(node(l, self.identity_index) in scc for l in range(size)):
            # fall back to the generic bounded word search
            return super()._period_search(n_search, max_states)
        level = {seed: 0}
        frontier = [seed]
        while frontier:
            nxt = []
            for u in frontier:
                for v in succs[u]:
                    if v in scc and v not in level:
                        level[v] = level[u] + 1
                        nxt.append(v)
            frontier = nxt
        g = 0
        for u in scc:
            for v in succs[u]:
                if v in scc:
                    g = math.gcd(g, level[u] + 1 - level[v])
        return PeriodResult(abs(g), True, ())


def _bfs_set(seed, adj):
    seen = {seed}
    frontier = [seed]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return seen


class FreeAbelianQuotient(Quotient):
    """Quotient onto (a subgroup of) Z^rank via integer image vectors.

    ``generator_vectors`` has one length-``rank`` integer vector per
    generator; inverse letters map to the negated vectors. N is the kernel,
    i.e. words whose image vectors sum to zero.
    """

    def __init__(self, alphabet, rank, generator_vectors):
        super().__init__(alphabet)
        if rank < 1:
            raise ValidationError(f"rank must be >= 1, got {rank}")
        self.rank = int(rank)
        vecs = [tuple(int(x) for x in v) for v in generator_vectors]
        if len(vecs) != self.d:
            raise ValidationError(
                f"need {self.d} generator vectors, got {len(vecs)}")
        for v in vecs:
            if len(v) != self.rank:
                raise ValidationError(
                    f"vector {v} has length {len(v)}, expected rank "
                    f"{self.rank}")
        self.generator_vectors = tuple(vecs)
        self._letter_images = []
        for v in vecs:
            self._letter_images.append(v)
            self._letter_images.append(tuple(-x for x in v))
        self._max_step = max((sum(abs(x) for x in v) for v in vecs),
                             default=0)

    @property
    def identity(self):
        return (0,) * self.rank

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def invert(self, a):
        return tuple(-x for x in a)

    def letter_image(self, letter):
        self.alphabet.check(letter)
        return self._letter_images[letter]

    def sort_key(self, elem):
        return elem

    def min_steps_to_identity(self, elem):
        l1 = sum(abs(x) for x in elem)
        if l1 == 0:
            return 0
        if self._max_step == 0:
            return math.inf
        return -(-l1 // self._max_step)

    def describe(self):
        return (f"free abelian rank {self.rank}, generator vectors "
                f"{[list(v) for v in self.generator_vectors]}")

    def element_name(self, elem):
        return "(" + ", ".join(str(x) for x in elem) + ")"


class FreeKillQuotient(Quotient):
    """Quotient that kills a subset of the generators.

    The image group is the free group on the surviving generators; a word's
    image is itself with killed letters deleted, freely reduced. Elements
    are reduced letter tuples over the surviving letters.
    """

    def __init__(self, alphabet, killed):
        super().__init__(alphabet)
        killed = frozenset(int(k) for k in killed)
        if not killed:
            raise ValidationError(
                "free-kill quotient needs at least one killed generator "
                "(otherwise N is trivial)")
        if not killed <= set(range(self.d)):
            raise ValidationError(
                f"killed generators {sorted(killed)} out of range for "
                f"d={self.d}")
        self.killed = killed
        self.survivor_letters = tuple(
            l for l in range(self.alphabet.size) if l // 2 not in killed)
        self.killed_letters = tuple(
            l for l in range(self.alphabet.size) if l // 2 in killed)

    @property
    def identity(self):
        return ()

    def multiply(self, a, b):
        return concat_reduce(a, b)

    def invert(self, a):
        return inverse_word(a)

    def letter_image(self, letter):
        self.alphabet.check(letter)
        if letter // 2 in self.killed:
            return ()
        return (letter,)

    def sort_key(self, elem):
        return (len(elem), elem)

    def min_steps_to_identity(self, elem):
        return len(elem)

    def describe(self):
        names = [f"g{k + 1}" for k in sorted(self.killed)]
        return f"free quotient killing {{{', '.join(names)}}}"

    def element_name(self, elem):
        return self.alphabet.word_name(elem) or "id"
