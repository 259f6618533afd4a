"""Finitely presented groups with canonical normal forms.

Supported families are the ones whose word problem has a well-known
rewriting solution: cyclic groups, dihedral groups, the infinite dihedral
group, free groups, the integers, and free products of any of these.

A :class:`Word` is a tuple of letters ``(generator_index, sign)`` written
left to right.  Products follow the left-multiplication convention: the
word ``uv`` is the concatenation of ``u`` followed by ``v``, and in any
action context the rightmost letter acts first.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import MalformedWordError, UnsupportedOperationError

Letter = tuple[int, int]


@dataclass(frozen=True)
class Word:
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        if not isinstance(self.letters, tuple):
            object.__setattr__(self, "letters", tuple(tuple(l) for l in self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def concat(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def formal_inverse(self) -> "Word":
        return Word(tuple((i, -s) for i, s in reversed(self.letters)))

    def __repr__(self) -> str:
        if not self.letters:
            return "Word(e)"
        body = " ".join(f"{i}" if s > 0 else f"{i}'" for i, s in self.letters)
        return f"Word({body})"


IDENTITY = Word()


def _reduce_cyclic_product(letters: Iterable[Letter], orders: Sequence[int]) -> tuple[Letter, ...]:
    """Normal form in a free product of cyclic groups.

    ``orders[i]`` is the order of generator ``i`` (0 means infinite).
    Syllables ``x_i^k`` are kept with ``0 < k < n`` for finite order and
    ``k != 0`` otherwise; adjacent syllables always differ.
    """
    stack: list[list[int]] = []
    for i, s in letters:
        n = orders[i]
        if stack and stack[-1][0] == i:
            exp = stack[-1][1] + s
            if n:
                exp %= n
            if exp == 0:
                stack.pop()
            else:
                stack[-1][1] = exp
        else:
            exp = s % n if n else s
            if exp != 0:
                stack.append([i, exp])
    out: list[Letter] = []
    for i, exp in stack:
        sign = 1 if exp > 0 else -1
        out.extend([(i, sign)] * abs(exp))
    return tuple(out)


class GroupPresentation:
    """Base class: subclasses provide ``generators``, ``relators`` and ``_reduce``."""

    family: str = "abstract"
    generators: tuple[str, ...] = ()

    # -- subclass hooks -------------------------------------------------
    def _reduce(self, letters: tuple[Letter, ...]) -> tuple[Letter, ...]:
        raise NotImplementedError

    @property
    def relators(self) -> tuple[Word, ...]:
        return ()

    def order(self) -> int | None:
        return None

    def params(self) -> dict:
        return {}

    # -- validation -----------------------------------------------------
    def _check_symbols(self) -> None:
        syms = self.generators
        if len(set(syms)) != len(syms):
            raise ValueError(f"generator symbols must be distinct: {syms}")
        for s in syms:
            if not s or re.search(r"[\s^()*]", s) or s[0].isdigit() or s == "e":
                raise ValueError(f"invalid generator symbol {s!r}")

    def validate(self, w: Word) -> Word:
        if not isinstance(w, Word):
            raise MalformedWordError(f"expected a Word, got {type(w).__name__}")
        n = len(self.generators)
        for letter in w.letters:
            if (
                len(letter) != 2
                or not isinstance(letter[0], int)
                or not 0 <= letter[0] < n
                or letter[1] not in (1, -1)
            ):
                raise MalformedWordError(f"letter {letter!r} is not over {self.generators}")
        return w

    # -- group law ------------------------------------------------------
    @property
    def identity(self) -> Word:
        return IDENTITY

    @property
    def rank(self) -> int:
        return len(self.generators)

    def gen(self, i: int | str, sign: int = 1) -> Word:
        if isinstance(i, str):
            i = self.generators.index(i)
        return self.normal_form(Word(((i, sign),)))

    def normal_form(self, w: Word) -> Word:
        self.validate(w)
        return Word(self._reduce(w.letters))

    def multiply(self, u: Word, v: Word) -> Word:
        self.validate(u)
        self.validate(v)
        return Word(self._reduce(u.letters + v.letters))

    def invert(self, w: Word) -> Word:
        return self.normal_form(self.validate(w).formal_inverse())

    def product(self, *words: Word) -> Word:
        letters: tuple[Letter, ...] = ()
        for w in words:
            letters += self.validate(w).letters
        return Word(self._reduce(letters))

    def equal(self, u: Word, v: Word) -> bool:
        return self.normal_form(u) == self.normal_form(v)

    # -- enumeration ----------------------------------------------------
    def ball(self, radius: int) -> tuple[Word, ...]:
        """Distinct normal forms of all words of letter-length <= radius, in BFS order."""
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        seen = {IDENTITY: None}
        frontier = [IDENTITY]
        steps = [(i, s) for i in range(self.rank) for s in (1, -1)]
        for _ in range(radius):
            nxt = []
            for w in frontier:
                for letter in steps:
                    nf = Word(self._reduce(w.letters + (letter,)))
                    if nf not in seen:
                        seen[nf] = None
                        nxt.append(nf)
            if not nxt:
                break
            frontier = nxt
        return tuple(seen)

    def elements(self) -> tuple[Word, ...]:
        """All elements of a finite group (BFS order)."""
        n = self.order()
        if n is None:
            raise UnsupportedOperationError(f"{self.family} is infinite")
        radius = 0
        while True:
            b = self.ball(radius)
            if len(b) == n:
                return b
            radius += 1

    def diameter(self) -> int:
        n = self.order()
        if n is None:
            raise UnsupportedOperationError(f"{self.family} is infinite")
        radius = 0
        while len(self.ball(radius)) < n:
            radius += 1
        return radius

    def is_finite(self) -> bool:
        return self.order() is not None

    # -- text -----------------------------------------------------------
    def _symbol_pattern(self) -> re.Pattern:
        syms = sorted(self.generators, key=len, reverse=True)
        alt = "|".join(re.escape(s) for s in syms)
        return re.compile(rf"\s*(?:(?P<sym>{alt})(?:\^(?P<exp>-?\d+))?|(?P<unit>e)(?![A-Za-z0-9_]))")

    def word(self, text: str | Word | Sequence) -> Word:
        """Parse ``"ab^2a"``, ``"s r^-1"``, ``"e"`` (or pass a Word through).

        The result is *not* reduced; use :meth:`element` for the normal form.
        """
        if isinstance(text, Word):
            return self.validate(text)
        if not isinstance(text, str):
            return self.validate(Word(tuple(tuple(l) for l in text)))
        text = text.strip()
        if text in ("", "e", "1"):
            return IDENTITY
        pat = self._symbol_pattern()
        letters: list[Letter] = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            m = pat.match(text, pos)
            if not m or m.end() == pos:
                raise MalformedWordError(f"cannot parse {text[pos:]!r} over {self.generators}")
            pos = m.end()
            if m.group("unit"):
                continue
            i = self.generators.index(m.group("sym"))
            exp = int(m.group("exp") or 1)
            sign = 1 if exp > 0 else -1
            letters.extend([(i, sign)] * abs(exp))
        return Word(tuple(letters))

    def element(self, text: str | Word) -> Word:
        return self.normal_form(self.word(text))

    def format(self, w: Word) -> str:
        if not w.letters:
            return "e"
        sep = "" if all(len(s) == 1 for s in self.generators) else " "
        parts = []
        run_letter, run = None, 0
        for letter in list(w.letters) + [None]:
            if letter == run_letter:
                run += 1
                continue
            if run_letter is not None:
                sym = self.generators[run_letter[0]]
                k = run * run_letter[1]
                parts.append(sym if k == 1 else f"{sym}^{k}")
            run_letter, run = letter, 1
        return sep.join(parts)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.params()})"

    def to_json(self) -> dict:
        return {"family": self.family, **self.params()}


@dataclass(frozen=True, repr=False)
class Cyclic(GroupPresentation):
    """``C_n = <a | a^n>``; normal forms ``a^k`` with ``0 <= k < n``."""

    n: int
    symbol: str = "a"
    family = "cyclic"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("Cyclic requires n >= 1")
        self._check_symbols()

    @property
    def generators(self):
        return (self.symbol,)

    @property
    def relators(self):
        return (Word(((0, 1),) * self.n),)

    def _reduce(self, letters):
        return _reduce_cyclic_product(letters, (self.n,))

    def order(self):
        return self.n

    def power(self, k: int) -> Word:
        return Word(((0, 1),) * (k % self.n))

    def exponent(self, w: Word) -> int:
        return len(self.normal_form(w))

    def params(self):
        return {"n": self.n, "symbol": self.symbol}


@dataclass(frozen=True, repr=False)
class Integers(GroupPresentation):
    """``Z = <a | >``; normal forms ``a^k`` for every integer ``k``."""

    symbol: str = "a"
    family = "integers"

    def __post_init__(self):
        self._check_symbols()

    @property
    def generators(self):
        return (self.symbol,)

    def _reduce(self, letters):
        return _reduce_cyclic_product(letters, (0,))

    def from_int(self, n: int) -> Word:
        return Word(((0, 1 if n > 0 else -1),) * abs(int(n)))

    def to_int(self, w: Word) -> int:
        return sum(s for _, s in self.validate(w).letters)

    def params(self):
        return {"symbol": self.symbol}


@dataclass(frozen=True, repr=False)
class FreeGroup(GroupPresentation):
    """Free group of the given rank; normal forms are freely reduced words."""

    rank_: int
    symbols: tuple[str, ...] | None = None
    family = "free"

    def __post_init__(self):
        if self.rank_ < 1:
            raise ValueError("FreeGroup requires rank >= 1")
        if self.symbols is None:
            default = ("a", "b")[: self.rank_] if self.rank_ <= 2 else tuple(f"a{i + 1}" for i in range(self.rank_))
            object.__setattr__(self, "symbols", default)
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(self.symbols) != self.rank_:
            raise ValueError("need one symbol per generator")
        self._check_symbols()

    @property
    def generators(self):
        return self.symbols

    def _reduce(self, letters):
        return _reduce_cyclic_product(letters, (0,) * self.rank_)

    def params(self):
        return {"rank": self.rank_, "symbols": list(self.generators)}


@dataclass(frozen=True, repr=False)
class InfiniteDihedral(GroupPresentation):
    """``D_inf = <a, b | a^2, b^2>``; normal forms alternate the two letters."""

    symbols: tuple[str, str] = ("a", "b")
    family = "infinite_dihedral"

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        self._check_symbols()

    @property
    def generators(self):
        return self.symbols

    @property
    def relators(self):
        return (Word(((0, 1), (0, 1))), Word(((1, 1), (1, 1))))

    def _reduce(self, letters):
        return _reduce_cyclic_product(letters, (2, 2))

    def params(self):
        return {"symbols": list(self.symbols)}


@dataclass(frozen=True, repr=False)
class Dihedral(GroupPresentation):
    """``D_{2n} = <r, s | r^n, s^2, (sr)^2>`` of order ``2n``.

    Normal forms are ``s^eps r^k`` with ``eps in {0, 1}`` and ``0 <= k < n``.
    Generator 0 is ``r``, generator 1 is ``s``.
    """

    n: int
    symbols: tuple[str, str] = ("r", "s")
    family = "dihedral"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("Dihedral requires n >= 1")
        object.__setattr__(self, "symbols", tuple(self.symbols))
        self._check_symbols()

    @property
    def generators(self):
        return self.symbols

    @property
    def relators(self):
        r, s = (0, 1), (1, 1)
        return (Word((r,) * self.n), Word((s, s)), Word((s, r, s, r)))

    def _reduce(self, letters):
        eps, k = 0, 0
        for i, sign in letters:
            if i == 0:
                k += sign
            else:
                # s^eps r^k s = s^(eps+1) r^(-k)
                eps ^= 1
                k = -k
        k %= self.n
        return ((1, 1),) * eps + ((0, 1),) * k

    def element_from(self, eps: int, k: int) -> Word:
        return Word(((1, 1),) * (eps % 2) + ((0, 1),) * (k % self.n))

    def coordinates(self, w: Word) -> tuple[int, int]:
        """``(eps, k)`` with ``w = s^eps r^k``."""
        nf = self.normal_form(w).letters
        eps = sum(1 for i, _ in nf if i == 1)
        return eps, len(nf) - eps

    def order(self):
        return 2 * self.n

    def params(self):
        return {"n": self.n, "symbols": list(self.symbols)}


@dataclass(frozen=True, repr=False)
class FreeProduct(GroupPresentation):
    """``G * H`` with generators ``S + T`` and relators ``R + Q``.

    Right-factor generator indices are shifted by ``left.rank``.
    """

    left: GroupPresentation
    right: GroupPresentation
    family = "free_product"

    def __post_init__(self):
        if set(self.left.generators) & set(self.right.generators):
            raise ValueError("free product factors need disjoint generator symbols")
        self._check_symbols()

    @property
    def generators(self):
        return self.left.generators + self.right.generators

    @property
    def offset(self) -> int:
        return self.left.rank

    @property
    def relators(self):
        shifted = tuple(
            Word(tuple((i + self.offset, s) for i, s in r.letters)) for r in self.right.relators
        )
        return tuple(self.left.relators) + shifted

    def _side(self, i: int) -> tuple[int, int]:
        return (0, i) if i < self.offset else (1, i - self.offset)

    def _reduce(self, letters):
        factors = (self.left, self.right)
        stack: list[tuple[int, tuple[Letter, ...]]] = []
        for i, s in letters:
            side, local = self._side(i)
            if stack and stack[-1][0] == side:
                merged = factors[side]._reduce(stack[-1][1] + ((local, s),))
                if merged:
                    stack[-1] = (side, merged)
                else:
                    stack.pop()
            else:
                syl = factors[side]._reduce(((local, s),))
                if syl:
                    stack.append((side, syl))
        out: list[Letter] = []
        for side, syl in stack:
            shift = 0 if side == 0 else self.offset
            out.extend((j + shift, s) for j, s in syl)
        return tuple(out)

    def order(self):
        lo, ro = self.left.order(), self.right.order()
        if lo == 1:
            return ro
        if ro == 1:
            return lo
        return None

    def inject(self, w: Word, which: str) -> Word:
        if which == "left":
            return Word(self.left.normal_form(w).letters)
        shift = self.offset
        return Word(tuple((i + shift, s) for i, s in self.right.normal_form(w).letters))

    def params(self):
        return {"left": self.left.to_json(), "right": self.right.to_json()}


# ---------------------------------------------------------------------------
# module-level operations


def normal_form(w: Word, P: GroupPresentation) -> Word:
    return P.normal_form(w)


def multiply(u: Word, v: Word, P: GroupPresentation) -> Word:
    """The element ``uv`` (``v`` acts first in any action context)."""
    return P.multiply(u, v)


def invert_word(w: Word, P: GroupPresentation) -> Word:
    return P.invert(w)


def ball(P: GroupPresentation, radius: int) -> tuple[Word, ...]:
    return P.ball(radius)


def project_free_factor(w: Word, which: str, P: GroupPresentation) -> Word:
    """Image of ``w`` under the canonical projection onto one free factor.

    Letters of the other factor are sent to the identity; the result is a
    word over the factor's own generators, in its normal form.
    """
    if not isinstance(P, FreeProduct):
        raise UnsupportedOperationError(f"{P.family} is not a free product")
    if which not in ("left", "right"):
        raise ValueError("which must be 'left' or 'right'")
    P.validate(w)
    keep = 0 if which == "left" else 1
    factor = P.left if keep == 0 else P.right
    letters = []
    for i, s in w.letters:
        side, local = P._side(i)
        if side == keep:
            letters.append((local, s))
    return factor.normal_form(Word(tuple(letters)))


def translate_word(w: Word, source: GroupPresentation, target: GroupPresentation) -> Word:
    """Send each generator of ``source`` to the same-named generator of ``target``.

    This is the canonical morphism between two presentations on the same
    symbols; the result is in ``target``'s normal form.
    """
    source.validate(w)
    index = {s: i for i, s in enumerate(target.generators)}
    try:
        letters = tuple((index[source.generators[i]], s) for i, s in w.letters)
    except KeyError as exc:
        raise UnsupportedOperationError(f"symbol {exc} missing from target presentation") from None
    return target.normal_form(Word(letters))


def presentation_from_json(spec: dict) -> GroupPresentation:
    family = spec.get("family")
    if family == "cyclic":
        return Cyclic(int(spec["n"]), spec.get("symbol", "a"))
    if family == "dihedral":
        return Dihedral(int(spec["n"]), tuple(spec.get("symbols", ("r", "s"))))
    if family == "infinite_dihedral":
        return InfiniteDihedral(tuple(spec.get("symbols", ("a", "b"))))
    if family == "free":
        syms = spec.get("symbols")
        return FreeGroup(int(spec["rank"]), tuple(syms) if syms else None)
    if family == "integers":
        return Integers(spec.get("symbol", "a"))
    if family == "free_product":
        return FreeProduct(presentation_from_json(spec["left"]), presentation_from_json(spec["right"]))
    raise ValueError(f"unknown group family {family!r}")
