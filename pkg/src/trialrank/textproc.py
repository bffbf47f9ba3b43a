"""Lexical pipeline shared by indexing and querying.

tokenize -> remove_stopwords -> stem.  Keyword extraction stops before
stemming because embeddings need surface forms.
"""
from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every non-alphanumeric character."""
    return _TOKEN_RE.findall(text.lower())


def load_stoplist(path: str | Path | None = None) -> frozenset[str]:
    """Read a stoplist file (one lowercase word per line, UTF-8).

    With no path, the bundled English list is returned.
    """
    if path is None:
        return default_stoplist()
    text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


@lru_cache(maxsize=1)
def default_stoplist() -> frozenset[str]:
    text = resources.files("trialrank.data").joinpath("stopwords.txt").read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def remove_stopwords(tokens: Iterable[str], stoplist: frozenset[str] | None = None) -> list[str]:
    if stoplist is None:
        stoplist = default_stoplist()
    return [t for t in tokens if t not in stoplist]


# Porter stemmer. Follows the author's reference implementation, including its
# two documented departures from the 1980 algorithm description ("bli" -> "ble", "logi" -> "log").

_VOWELS = frozenset("aeiou")


class _Word:
    __slots__ = ("b", "k", "j")

    def __init__(self, word: str):
        self.b = list(word)
        self.k = len(word) - 1
        self.j = 0

    def cons(self, i: int) -> bool:
        ch = self.b[i]
        if ch in _VOWELS:
            return False
        if ch == "y":
            return True if i == 0 else not self.cons(i - 1)
        return True

    def m(self) -> int:
        """Number of VC sequences in b[0..j]."""
        n = 0
        i = 0
        j = self.j
        while True:
            if i > j:
                return n
            if not self.cons(i):
                break
            i += 1
        i += 1
        while True:
            while True:
                if i > j:
                    return n
                if self.cons(i):
                    break
                i += 1
            i += 1
            n += 1
            while True:
                if i > j:
                    return n
                if not self.cons(i):
                    break
                i += 1
            i += 1

    def vowel_in_stem(self) -> bool:
        return any(not self.cons(i) for i in range(self.j + 1))

    def double_c(self, j: int) -> bool:
        if j < 1 or self.b[j] != self.b[j - 1]:
            return False
        return self.cons(j)

    def cvc(self, i: int) -> bool:
        if i < 2 or not self.cons(i) or self.cons(i - 1) or not self.cons(i - 2):
            return False
        return self.b[i] not in "wxy"

    def ends(self, s: str) -> bool:
        n = len(s)
        if n > self.k + 1:
            return False
        if "".join(self.b[self.k - n + 1 : self.k + 1]) != s:
            return False
        self.j = self.k - n
        return True

    def setto(self, s: str) -> None:
        self.b[self.j + 1 :] = list(s)
        self.k = self.j + len(s)

    def r(self, s: str) -> None:
        if self.m() > 0:
            self.setto(s)

    def text(self) -> str:
        return "".join(self.b[: self.k + 1])


def _step1ab(z: _Word) -> None:
    b = z.b
    if b[z.k] == "s":
        if z.ends("sses"):
            z.k -= 2
        elif z.ends("ies"):
            z.setto("i")
        elif b[z.k - 1] != "s":
            z.k -= 1
    if z.ends("eed"):
        if z.m() > 0:
            z.k -= 1
    elif (z.ends("ed") or z.ends("ing")) and z.vowel_in_stem():
        z.k = z.j
        if z.ends("at"):
            z.setto("ate")
        elif z.ends("bl"):
            z.setto("ble")
        elif z.ends("iz"):
            z.setto("ize")
        elif z.double_c(z.k):
            if b[z.k - 1] not in "lsz":
                z.k -= 1
        elif z.m() == 1 and z.cvc(z.k):
            z.setto("e")


def _step1c(z: _Word) -> None:
    if z.ends("y") and z.vowel_in_stem():
        z.b[z.k] = "i"


_STEP2 = {
    "a": (("ational", "ate"), ("tional", "tion")),
    "c": (("enci", "ence"), ("anci", "ance")),
    "e": (("izer", "ize"),),
    "l": (("bli", "ble"), ("alli", "al"), ("entli", "ent"), ("eli", "e"), ("ousli", "ous")),
    "o": (("ization", "ize"), ("ation", "ate"), ("ator", "ate")),
    "s": (("alism", "al"), ("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous")),
    "t": (("aliti", "al"), ("iviti", "ive"), ("biliti", "ble")),
    "g": (("logi", "log"),),
}

_STEP3 = {
    "e": (("icate", "ic"), ("ative", ""), ("alize", "al")),
    "i": (("iciti", "ic"),),
    "l": (("ical", "ic"), ("ful", "")),
    "s": (("ness", ""),),
}

_STEP4 = {
    "a": ("al",),
    "c": ("ance", "ence"),
    "e": ("er",),
    "i": ("ic",),
    "l": ("able", "ible"),
    "n": ("ant", "ement", "ment", "ent"),
    "o": ("ion", "ou"),
    "s": ("ism",),
    "t": ("ate", "iti"),
    "u": ("ous",),
    "v": ("ive",),
    "z": ("ize",),
}


def _replace_first(z: _Word, rules) -> None:
    # first matching suffix wins, whether or not its measure condition holds
    for suffix, repl in rules:
        if z.ends(suffix):
            z.r(repl)
            return


def _step2(z: _Word) -> None:
    if z.k < 1:
        return
    rules = _STEP2.get(z.b[z.k - 1])
    if rules:
        _replace_first(z, rules)


def _step3(z: _Word) -> None:
    rules = _STEP3.get(z.b[z.k])
    if rules:
        _replace_first(z, rules)


def _step4(z: _Word) -> None:
    if z.k < 1:
        return
    suffixes = _STEP4.get(z.b[z.k - 1])
    if not suffixes:
        return
    for suffix in suffixes:
        if z.ends(suffix):
            if suffix == "ion" and not (z.j >= 0 and z.b[z.j] in "st"):
                continue
            break
    else:
        return
    if z.m() > 1:
        z.k = z.j


def _step5(z: _Word) -> None:
    z.j = z.k
    if z.b[z.k] == "e":
        a = z.m()
        if a > 1 or (a == 1 and not z.cvc(z.k - 1)):
            z.k -= 1
    if z.b[z.k] == "l" and z.double_c(z.k) and z.m() > 1:
        z.k -= 1


@lru_cache(maxsize=200_000)
def stem(token: str) -> str:
    """Porter stem of a lowercase token."""
    if len(token) <= 2:
        return token
    z = _Word(token)
    _step1ab(z)
    if z.k > 0:
        _step1c(z)
        _step2(z)
        _step3(z)
        _step4(z)
        _step5(z)
    return z.text()


def analyze(text: str, stoplist: frozenset[str] | None = None) -> list[str]:
    """Full index/query pipeline: tokenize, drop stopwords, stem."""
    return [stem(t) for t in remove_stopwords(tokenize(text), stoplist)]
