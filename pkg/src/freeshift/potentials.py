"""Locally constant potentials and their Birkhoff sup-sums.

A depth-k potential assigns a value to every admissible k-window; its value
on an infinite sequence is the value on the first k letters. The Birkhoff
sum over a finite word w takes the supremum over all infinite admissible
completions, so the last k-1 positions contribute the best value their
partially-visible windows can attain. Depth 1 has no boundary effect and
the sup-sum is a plain sum over letters.

Geometric potentials are strictly negative everywhere (log contraction
ratios bounded away from 0); they are the denominators of the free-energy
root problem and the spectrum's slope variable.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .words import enumerate_words, inverse_word

_window_cache = {}


def window_states(d, m):
    """All admissible m-windows in lexicographic order plus an index map."""
    key = (d, m)
    if key not in _window_cache:
        windows = list(enumerate_words(d, m))
        _window_cache[key] = (windows, {w: i for i, w in enumerate(windows)})
    return _window_cache[key]


@dataclass(frozen=True, eq=False)
class Potential:
    """Depth-k potential as a dense value table over admissible k-windows.

    ``values`` is aligned with the lexicographic window order of
    ``window_states(d, depth)``.
    """

    d: int
    depth: int
    values: np.ndarray
    _index: dict = field(repr=False, default=None)

    def __post_init__(self):
        if self.d < 2:
            raise ValidationError(f"free rank must be >= 2, got {self.d}")
        if self.depth < 1:
            raise ValidationError(f"depth must be >= 1, got {self.depth}")
        windows, index = window_states(self.d, self.depth)
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(windows),):
            raise ValidationError(
                f"value table has {vals.shape} entries, expected "
                f"{len(windows)} windows")
        if not np.isfinite(vals).all():
            raise ValidationError("potential values must be finite")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_index", index)

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, d, c, depth=1):
        windows, _ = window_states(d, depth)
        return cls(d, depth, np.full(len(windows), float(c)))

    @classmethod
    def from_letter_values(cls, d, values):
        values = list(values)
        if len(values) != 2 * d:
            raise ValidationError(
                f"need {2 * d} per-letter values, got {len(values)}")
        return cls(d, 1, np.asarray(values, dtype=float))

    @classmethod
    def from_table(cls, d, depth, mapping):
        windows, index = window_states(d, depth)
        vals = np.empty(len(windows))
        seen = set()
        for w, v in mapping.items():
            w = tuple(w)
            if w not in index:
                raise ValidationError(f"{w} is not an admissible "
                                      f"{depth}-window for d={d}")
            vals[index[w]] = float(v)
            seen.add(w)
        if len(seen) != len(windows):
            missing = next(w for w in windows if w not in seen)
            raise ValidationError(
                f"table incomplete: {len(seen)} of {len(windows)} windows, "
                f"e.g. missing {missing}")
        return cls(d, depth, vals)

    # -- access -------------------------------------------------------------

    def value(self, window):
        window = tuple(window)
        if window not in self._index:
            raise ValidationError(f"{window} is not an admissible "
                                  f"{self.depth}-window for d={self.d}")
        return float(self.values[self._index[window]])

    @property
    def max(self):
        return float(self.values.max())

    @property
    def min(self):
        return float(self.values.min())

    def as_depth(self, depth):
        """Lift to a (not smaller) depth; the lifted table reads the first
        ``self.depth`` letters of each window. Sup-sums are unchanged."""
        if depth < self.depth:
            raise ValidationError(
                f"cannot lower depth {self.depth} to {depth}")
        if depth == self.depth:
            return self
        windows, _ = window_states(self.d, depth)
        vals = np.array([self.values[self._index[w[:self.depth]]]
                         for w in windows])
        return Potential(self.d, depth, vals)

    def is_inverse_symmetric(self, tol=0.0):
        """True when the table is invariant under word inversion of the
        windows (letter involution composed with reversal). This is the
        checkable sufficient condition used as a precondition by the
        symmetry-dependent inequalities."""
        for w in self._index:
            if abs(self.value(w) - self.value(inverse_word(w))) > tol:
                return False
        return True

    def __mul__(self, c):
        return Potential(self.d, self.depth, self.values * float(c))

    __rmul__ = __mul__


class GeometricPotential(Potential):
    """Potential of log contraction ratios: values <= log s < 0."""

    def __post_init__(self):
        super().__post_init__()
        if self.values.max() >= 0:
            raise ValidationError(
                "geometric potential must be strictly negative "
                f"(max value {self.values.max():g})")

    @classmethod
    def from_ratios(cls, d, ratios):
        ratios = list(ratios)
        if len(ratios) != 2 * d:
            raise ValidationError(
                f"need {2 * d} contraction ratios, got {len(ratios)}")
        for r in ratios:
            if not 0 < r < 1:
                raise ValidationError(
                    f"contraction ratios must lie in (0, 1), got {r}")
        return cls(d, 1, np.log(np.asarray(ratios, dtype=float)))

    @property
    def contraction_bound(self):
        """The s with all values <= log s < 0."""
        return math.exp(self.max)

    def scaled_copy(self, c):
        # scaling by a positive constant keeps negativity
        if c <= 0:
            raise ValidationError("scale must be positive")
        return GeometricPotential(self.d, self.depth, self.values * c)


def combine(*terms):
    """Linear combination sum(coef * pot) materialized at the largest depth.

    ``terms`` are (coef, potential) pairs over one alphabet. Returns a plain
    Potential; sup-sums of the combination agree with the combination of
    interior sums plus its own boundary completion.
    """
    terms = [(float(c), p) for c, p in terms]
    if not terms:
        raise ValidationError("combine needs at least one term")
    d = terms[0][1].d
    if any(p.d != d for _, p in terms):
        raise ValidationError("potentials live over different alphabets")
    depth = max(p.depth for _, p in terms)
    total = np.zeros(len(window_states(d, depth)[0]))
    for c, p in terms:
        total += c * p.as_depth(depth).values
    return Potential(d, depth, total)


def birkhoff_sup_sum(pot, word):
    """S_w f: supremum over infinite admissible completions of the sum of
    the first |w| window values. Empty word gives 0."""
    word = tuple(word)
    n = len(word)
    if n == 0:
        return 0.0
    k = pot.depth
    size = 2 * pot.d
    total = 0.0
    for i in range(0, n - k + 1):
        total += pot.values[pot._index[word[i:i + k]]]
    if k == 1:
        return float(total)
    # boundary: maximize the k-1 trailing partial windows over completions
    state = word[-(k - 1):] if n >= k - 1 else word
    best = {state: 0.0}
    for j in range(1, k):
        nxt = {}
        completes = n - k + j >= 0
        for st, acc in best.items():
            forbidden = st[-1] ^ 1 if st else -1
            for l in range(size):
                if l == forbidden:
                    continue
                st2 = (st + (l,))[-(k - 1):] if k > 1 else ()
                acc2 = acc
                if completes:
                    win = (st + (l,))[-k:]
                    acc2 = acc + pot.values[pot._index[win]]
                if st2 not in nxt or acc2 > nxt[st2]:
                    nxt[st2] = acc2
        best = nxt
    return float(total + max(best.values()))


def distortion_constant(pot):
    """(k-1) (max f - min f): bounds the gap between the sup-sum and any
    single completion's sum, uniformly over words."""
    return (pot.depth - 1) * (pot.max - pot.min)


def boundary_completion(pot, suffix):
    """Best total of the trailing partial windows of a word ending with
    ``suffix`` (k-1 letters, or the whole word when shorter). Fiber
    recursions add this to interior sums to read off exact sup-sums."""
    word = tuple(suffix)
    if pot.depth == 1 or not word:
        return 0.0
    return birkhoff_sup_sum(pot, word) - _interior_sum(pot, word)


def _interior_sum(pot, word):
    k = pot.depth
    return sum(pot.values[pot._index[word[i:i + k]]]
               for i in range(0, len(word) - k + 1))


def random_inverse_symmetric(d, seed, low=-1.0, high=1.0):
    """Seeded depth-1 potential with f(l) = f(l^{-1}) (inverse-symmetric)."""
    rng = np.random.default_rng(seed)
    per_gen = rng.uniform(low, high, size=d)
    vals = np.repeat(per_gen, 2)
    return Potential(d, 1, vals)


# ---------------------------------------------------------------------------
# CSV table format: header w1,...,wk,value; one row per admissible window

def save_potential_csv(pot, path):
    windows, _ = window_states(pot.d, pot.depth)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow([f"w{i + 1}" for i in range(pot.depth)] + ["value"])
        for w in windows:
            wr.writerow(list(w) + [repr(float(pot.values[pot._index[w]]))])


def load_potential_csv(d, path, geometric=False):
    with open(path, "r", newline="", encoding="utf-8") as fh:
        rd = csv.reader(fh)
        try:
            header = next(rd)
        except StopIteration:
            raise ValidationError(f"{path}: empty potential file") from None
        depth = len(header) - 1
        if depth < 1 or header[-1].strip().lower() != "value":
            raise ValidationError(
                f"{path}: header must be w1,...,wk,value")
        mapping = {}
        for lineno, row in enumerate(rd, start=2):
            if not row:
                continue
            if len(row) != depth + 1:
                raise ValidationError(
                    f"{path}:{lineno}: expected {depth + 1} columns")
            try:
                w = tuple(int(x) for x in row[:-1])
                v = float(row[-1])
            except ValueError as exc:
                raise ValidationError(
                    f"{path}:{lineno}: {exc}") from None
            if w in mapping:
                raise ValidationError(
                    f"{path}:{lineno}: duplicate window {w}")
            mapping[w] = v
    cls = GeometricPotential if geometric else Potential
    pot = Potential.from_table(d, depth, mapping)
    if geometric:
        return GeometricPotential(d, depth, pot.values)
    return pot
