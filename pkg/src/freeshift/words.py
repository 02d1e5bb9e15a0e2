"""Reduced words over the alphabet of a rank-d free group.

The alphabet has 2d letters: letter 2k stands for the (k+1)-th generator,
letter 2k+1 for its inverse, so the involution is ``letter ^ 1``. A word is
admissible (freely reduced) when no two adjacent letters are inverse to each
other. Admissible words of length n are exactly the length-n cylinders of
the subshift; there are 2d(2d-1)^(n-1) of them.

Words travel through the library as plain tuples of ints. ReducedWord is a
thin validated wrapper for user-facing construction.
"""

from dataclasses import dataclass

from .errors import ValidationError


def involute(letter):
    """Index of the inverse letter."""
    return letter ^ 1


def is_reduced(letters):
    """True when no adjacent pair multiplies to the identity."""
    return all(letters[i + 1] != (letters[i] ^ 1)
               for i in range(len(letters) - 1))


def concat_reduce(v, w):
    """Concatenate two reduced words, cancelling at the junction only.

    Both inputs must already be reduced; the result is then reduced as
    well (cancellation cannot propagate past the first surviving pair).
    """
    i, j = len(v), 0
    while i > 0 and j < len(w) and w[j] == (v[i - 1] ^ 1):
        i -= 1
        j += 1
    return tuple(v[:i]) + tuple(w[j:])


def inverse_word(w):
    """Group inverse: reverse the word and involute every letter."""
    return tuple(l ^ 1 for l in reversed(w))


def count_words(d, n):
    """|Sigma^n| as an exact int: 1 for n=0, else 2d(2d-1)^(n-1)."""
    if d < 2:
        raise ValidationError(f"free rank must be >= 2, got {d}")
    if n < 0:
        raise ValidationError(f"word length must be >= 0, got {n}")
    if n == 0:
        return 1
    return 2 * d * (2 * d - 1) ** (n - 1)


def enumerate_words(d, n):
    """Yield all admissible length-n words as tuples, lexicographically.

    Streaming: constant memory in the number of words. n=0 yields the
    empty word once.
    """
    if d < 2:
        raise ValidationError(f"free rank must be >= 2, got {d}")
    if n < 0:
        raise ValidationError(f"word length must be >= 0, got {n}")
    if n == 0:
        yield ()
        return
    size = 2 * d
    word = [0] * n
    for i in range(1, n):
        word[i] = 1 if word[i - 1] == 1 else 0
    while True:
        yield tuple(word)
        # odometer: bump the deepest position that still has headroom,
        # skipping the single letter forbidden by its predecessor
        pos = n - 1
        while pos >= 0:
            nxt = word[pos] + 1
            if pos > 0 and nxt == (word[pos - 1] ^ 1):
                nxt += 1
            if nxt < size:
                word[pos] = nxt
                for i in range(pos + 1, n):
                    word[i] = 1 if word[i - 1] == 1 else 0
                break
            pos -= 1
        else:
            return


@dataclass(frozen=True)
class Alphabet:
    """The 2d-letter alphabet of the rank-d free group."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValidationError(f"free rank must be >= 2, got {self.d}")

    @property
    def size(self):
        return 2 * self.d

    def involute(self, letter):
        self.check(letter)
        return letter ^ 1

    def check(self, letter):
        if not 0 <= letter < 2 * self.d:
            raise ValidationError(
                f"letter {letter} out of range for 2d={2 * self.d}")

    def letter_name(self, letter):
        self.check(letter)
        gen = letter // 2 + 1
        return f"g{gen}" if letter % 2 == 0 else f"g{gen}^-1"

    def letter_from_name(self, name):
        """Parse 'g3' or 'g3^-1' (also bare integer letter indices)."""
        name = name.strip()
        if name.lstrip("-").isdigit():
            letter = int(name)
            self.check(letter)
            return letter
        base, inv_mark = name, False
        if name.endswith("^-1"):
            base, inv_mark = name[:-3], True
        if not base.startswith("g") or not base[1:].isdigit():
            raise ValidationError(f"cannot parse letter name {name!r}")
        gen = int(base[1:])
        if not 1 <= gen <= self.d:
            raise ValidationError(
                f"generator {name!r} out of range for d={self.d}")
        return 2 * (gen - 1) + (1 if inv_mark else 0)

    def word_name(self, letters):
        return " ".join(self.letter_name(l) for l in letters)


@dataclass(frozen=True)
class ReducedWord:
    """A validated admissible word over an alphabet."""

    alphabet: Alphabet
    letters: tuple

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        for l in self.letters:
            self.alphabet.check(l)
        if not is_reduced(self.letters):
            raise ValidationError(
                f"word {self.letters} is not freely reduced")

    def __len__(self):
        return len(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def concat(self, other):
        if other.alphabet != self.alphabet:
            raise ValidationError("alphabet mismatch in concat")
        return ReducedWord(self.alphabet,
                           concat_reduce(self.letters, other.letters))

    def inverse(self):
        return ReducedWord(self.alphabet, inverse_word(self.letters))

    def __str__(self):
        return self.alphabet.word_name(self.letters) or "(empty)"
