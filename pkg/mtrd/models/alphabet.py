from dataclasses import dataclass
from itertools import product
from typing import Sequence, Tuple

from mtrd.core.exceptions import InputError


@dataclass(frozen=True)
class Alphabet:
    """Finite ordered alphabet. Symbol order is the declaration order."""

    name: str
    symbols: Tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "symbols", tuple(str(s) for s in self.symbols))
        if not self.symbols:
            raise InputError(f"Alphabet '{self.name}' must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise InputError(f"Alphabet '{self.name}' has duplicate symbols")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(str(symbol))
        except ValueError:
            raise InputError(f"Symbol '{symbol}' not in alphabet '{self.name}'") from None

    @classmethod
    def range(cls, name: str, size: int) -> "Alphabet":
        return cls(name, tuple(str(i) for i in range(size)))

    @classmethod
    def product(cls, alphabets: Sequence["Alphabet"]) -> "Alphabet":
        """Product alphabet in C order, symbols joined with '|'."""
        if len(alphabets) == 1:
            return alphabets[0]
        name = ",".join(a.name for a in alphabets)
        symbols = tuple("|".join(combo) for combo in product(*(a.symbols for a in alphabets)))
        return cls(name, symbols)

    def words(self, n: int) -> "Alphabet":
        """Alphabet of length-n words, used by explicit per-blocklength tables."""
        symbols = tuple("".join(w) for w in product(self.symbols, repeat=n))
        if len(set(symbols)) != len(symbols):
            symbols = tuple(" ".join(w) for w in product(self.symbols, repeat=n))
        return Alphabet(f"{self.name}^{n}", symbols)

    def same_symbols(self, other: "Alphabet") -> bool:
        return self.symbols == other.symbols
