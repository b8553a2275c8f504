"""Core representations: dense truth tables, lazy compositions, partial
assignments, box certificates, and the on-disk file formats.

Conventions used throughout the package:

- A function maps ({0} u Sigma)^n -> Gamma where Sigma = {1, ..., q-1} for a
  uniform per-coordinate input alphabet of size q.  Symbol 0 is always index 0.
- Points are tuples of symbols.  Coordinate 0 is the least significant digit
  of the mixed-radix table index (``encode``/``decode`` below).
- "Boolean" means input and output alphabet sizes are both 2.

All objects are immutable after construction and safe to share.
"""

from __future__ import annotations

import json
import math
from itertools import product

import numpy as np

# Hard limit on dense materialization.  Beyond this only lazy evaluation is
# allowed and exact table-scanning operations refuse with BudgetExceeded.
DENSE_TABLE_LIMIT = 1 << 24

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


class InvalidInput(ValueError):
    """Bad argument or value supplied by a caller."""


class BudgetExceeded(RuntimeError):
    """A requested computation does not fit the configured size budget."""


class FunctionFormatError(InvalidInput):
    """A function or collection file failed to parse or validate."""


def encode(point, alphabet_size: int) -> int:
    """Mixed-radix index of a point; coordinate 0 is least significant."""
    idx = 0
    for sym in reversed(tuple(point)):
        if not 0 <= sym < alphabet_size:
            raise InvalidInput(f"symbol {sym} out of range for alphabet size {alphabet_size}")
        idx = idx * alphabet_size + sym
    return idx


def decode(index: int, arity: int, alphabet_size: int) -> tuple[int, ...]:
    """Inverse of ``encode``; raises on indices outside the table."""
    if not 0 <= index < alphabet_size**arity:
        raise InvalidInput(f"index {index} out of range for {arity} coordinates over {alphabet_size} symbols")
    out = []
    for _ in range(arity):
        index, sym = divmod(index, alphabet_size)
        out.append(sym)
    return tuple(out)


def coordinate_digits(count: int, coord: int, alphabet_size: int) -> np.ndarray:
    """Digit of each table index 0..count-1 at the given coordinate."""
    idx = np.arange(count, dtype=np.int64)
    return ((idx // alphabet_size**coord) % alphabet_size).astype(np.uint8)


def box_mask(sets, alphabet_size: int, arity: int) -> np.ndarray:
    """Boolean membership mask over the full table for a product-of-sets box."""
    size = alphabet_size**arity
    mask = np.ones(size, dtype=bool)
    idx = np.arange(size, dtype=np.int64)
    for coord, allowed in enumerate(sets):
        if len(allowed) == alphabet_size:
            continue
        digits = (idx // alphabet_size**coord) % alphabet_size
        mask &= np.isin(digits, np.fromiter(sorted(allowed), dtype=np.int64))
    return mask


class Function:
    """Base class for evaluable functions over a uniform alphabet."""

    arity: int
    input_alphabet_size: int
    output_alphabet_size: int
    name: str

    @property
    def table_size(self) -> int:
        return self.input_alphabet_size**self.arity

    @property
    def is_boolean(self) -> bool:
        return self.input_alphabet_size == 2 and self.output_alphabet_size == 2

    def evaluate(self, point) -> int:
        raise NotImplementedError

    def __call__(self, point) -> int:
        return self.evaluate(point)

    def dense(self, limit: int | None = None) -> "DenseFunction":
        """Materialize the full truth table, guarded by the dense budget."""
        raise NotImplementedError

    def _check_dense_budget(self, limit: int | None) -> None:
        limit = DENSE_TABLE_LIMIT if limit is None else limit
        if self.table_size > limit:
            raise BudgetExceeded(
                f"{self.name}: dense table would need {self.table_size} entries (limit {limit})"
            )

    def weighted_output_counts(self, input_weights) -> list[int]:
        """Exact count of inputs per output value, with each input point
        weighted by the product of per-symbol multiplicities.

        ``input_weights[s]`` is the multiplicity of symbol ``s``.  With all
        multiplicities 1 this is the plain output histogram.  Computed
        structurally for compositions, so it works on functions far beyond
        the dense budget as long as every dense node is small.
        """
        raise NotImplementedError

    def output_counts(self) -> list[int]:
        return self.weighted_output_counts([1] * self.input_alphabet_size)

    def reachable_outputs(self, sets) -> frozenset[int]:
        """Exact set of output values attained on a product-of-sets box."""
        raise NotImplementedError

    def _validate_point(self, point) -> tuple[int, ...]:
        pt = tuple(point)
        if len(pt) != self.arity:
            raise InvalidInput(f"{self.name}: point has {len(pt)} coordinates, expected {self.arity}")
        return pt


class DenseFunction(Function):
    """Explicit truth table, mixed-radix indexed."""

    __slots__ = ("arity", "input_alphabet_size", "output_alphabet_size", "table", "name")

    def __init__(self, arity, input_alphabet_size, output_alphabet_size, table, name=""):
        if arity < 0 or input_alphabet_size < 1 or output_alphabet_size < 1:
            raise InvalidInput("arity and alphabet sizes must be positive")
        if output_alphabet_size > 255:
            raise InvalidInput("output alphabets above 255 symbols are not supported")
        table = np.asarray(table, dtype=np.uint8)
        if table.shape != (input_alphabet_size**arity,):
            raise InvalidInput(
                f"table has {table.size} entries, expected {input_alphabet_size**arity}"
            )
        if table.size and int(table.max()) >= output_alphabet_size:
            raise InvalidInput("table entry out of range for the output alphabet")
        self.arity = arity
        self.input_alphabet_size = input_alphabet_size
        self.output_alphabet_size = output_alphabet_size
        self.table = table
        self.table.setflags(write=False)
        self.name = name or f"f{arity}"

    @classmethod
    def from_callable(cls, fn, arity, input_alphabet_size, output_alphabet_size, name=""):
        points = product(range(input_alphabet_size), repeat=arity)
        # itertools.product iterates the LAST coordinate fastest; index order
        # needs coordinate 0 fastest, so reverse each point.
        table = np.fromiter(
            (fn(pt[::-1]) for pt in points), dtype=np.uint8, count=input_alphabet_size**arity
        )
        return cls(arity, input_alphabet_size, output_alphabet_size, table, name)

    @classmethod
    def boolean_from_bits(cls, arity: int, bits: int, name="") -> "DenseFunction":
        """Boolean function from a packed integer; bit i = value on decode(i)."""
        size = 1 << arity
        if not 0 <= bits < (1 << size):
            raise InvalidInput("packed table out of range")
        raw = np.frombuffer(bits.to_bytes((size + 7) // 8, "little"), dtype=np.uint8)
        table = np.unpackbits(raw, bitorder="little")[:size]
        return cls(arity, 2, 2, table, name)

    def packed_bits(self) -> int:
        if not self.is_boolean:
            raise InvalidInput("packed_bits is only defined for Boolean functions")
        return int.from_bytes(np.packbits(self.table, bitorder="little").tobytes(), "little")

    def evaluate(self, point) -> int:
        pt = self._validate_point(point)
        return int(self.table[encode(pt, self.input_alphabet_size)])

    def evaluate_index(self, index: int) -> int:
        return int(self.table[index])

    def dense(self, limit=None) -> "DenseFunction":
        return self

    def restrict(self, fixed: dict[int, int]) -> "DenseFunction":
        """Subfunction on the free coordinates after fixing ``fixed``."""
        q = self.input_alphabet_size
        for coord, sym in fixed.items():
            if not 0 <= coord < self.arity:
                raise InvalidInput(f"coordinate {coord} out of range")
            if not 0 <= sym < q:
                raise InvalidInput(f"symbol {sym} out of range")
        free = [c for c in range(self.arity) if c not in fixed]
        new_size = q ** len(free)
        old_idx = np.full(new_size, sum(sym * q**c for c, sym in fixed.items()), dtype=np.int64)
        new_idx = np.arange(new_size, dtype=np.int64)
        for j, c in enumerate(free):
            old_idx += ((new_idx // q**j) % q) * q**c
        return DenseFunction(
            len(free),
            q,
            self.output_alphabet_size,
            self.table[old_idx],
            name=f"{self.name}|restricted",
        )

    def weighted_output_counts(self, input_weights) -> list[int]:
        q = self.input_alphabet_size
        if len(input_weights) != q:
            raise InvalidInput("one multiplicity per input symbol is required")
        counts = [0] * self.output_alphabet_size
        if all(w == 1 for w in input_weights):
            for value, cnt in enumerate(np.bincount(self.table, minlength=self.output_alphabet_size)):
                counts[value] = int(cnt)
            return counts
        if self.table_size > (1 << 18):
            raise BudgetExceeded(f"{self.name}: weighted counting over {self.table_size} entries refused")
        for idx, value in enumerate(self.table):
            weight = 1
            rem = idx
            for _ in range(self.arity):
                rem, sym = divmod(rem, q)
                weight *= input_weights[sym]
            counts[int(value)] += weight
        return counts

    def reachable_outputs(self, sets) -> frozenset[int]:
        if len(sets) != self.arity:
            raise InvalidInput("one symbol set per coordinate is required")
        self._check_dense_budget(None)
        mask = box_mask(sets, self.input_alphabet_size, self.arity)
        return frozenset(int(v) for v in np.unique(self.table[mask]))

    def __eq__(self, other):
        return (
            isinstance(other, DenseFunction)
            and self.arity == other.arity
            and self.input_alphabet_size == other.input_alphabet_size
            and self.output_alphabet_size == other.output_alphabet_size
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.arity, self.input_alphabet_size, self.table.tobytes()))

    def __repr__(self):
        return (
            f"DenseFunction({self.name!r}, arity={self.arity}, "
            f"q={self.input_alphabet_size}, out={self.output_alphabet_size})"
        )


class ComposedFunction(Function):
    """Lazy blockwise composition outer(inner(block 1), ..., inner(block n)).

    Covers outer composition of Boolean functions, weighted composition over
    larger alphabets, weight-realizer substitution and booleanization; the
    outer function consumes one symbol per inner block.
    """

    __slots__ = ("arity", "input_alphabet_size", "output_alphabet_size", "name", "outer", "inner")

    def __init__(self, outer: Function, inner: Function, name=""):
        if inner.output_alphabet_size != outer.input_alphabet_size:
            raise InvalidInput(
                f"inner output alphabet {inner.output_alphabet_size} does not match "
                f"outer input alphabet {outer.input_alphabet_size}"
            )
        self.outer = outer
        self.inner = inner
        self.arity = outer.arity * inner.arity
        self.input_alphabet_size = inner.input_alphabet_size
        self.output_alphabet_size = outer.output_alphabet_size
        self.name = name or f"{outer.name}.{inner.name}"

    def evaluate(self, point) -> int:
        pt = self._validate_point(point)
        m = self.inner.arity
        values = [self.inner.evaluate(pt[j * m : (j + 1) * m]) for j in range(self.outer.arity)]
        return self.outer.evaluate(values)

    def dense(self, limit=None) -> DenseFunction:
        self._check_dense_budget(limit)
        inner = self.inner.dense(limit)
        outer = self.outer.dense(limit)
        q = self.input_alphabet_size
        m = inner.arity
        block_size = q**m
        idx = np.arange(self.table_size, dtype=np.int64)
        outer_idx = np.zeros(self.table_size, dtype=np.int64)
        scale = 1
        for j in range(outer.arity):
            block = (idx // block_size**j) % block_size
            outer_idx += inner.table[block].astype(np.int64) * scale
            scale *= outer.input_alphabet_size
        return DenseFunction(
            self.arity,
            q,
            self.output_alphabet_size,
            outer.table[outer_idx],
            name=self.name,
        )

    def weighted_output_counts(self, input_weights) -> list[int]:
        inner_counts = self.inner.weighted_output_counts(input_weights)
        return self.outer.weighted_output_counts(inner_counts)

    def reachable_outputs(self, sets) -> frozenset[int]:
        if len(sets) != self.arity:
            raise InvalidInput("one symbol set per coordinate is required")
        m = self.inner.arity
        value_sets = [
            self.inner.reachable_outputs(sets[j * m : (j + 1) * m])
            for j in range(self.outer.arity)
        ]
        return self.outer.reachable_outputs(value_sets)

    def __repr__(self):
        return f"ComposedFunction({self.name!r}, arity={self.arity})"


class CallableFunction(Function):
    """Lazy function backed by an arbitrary evaluation callable."""

    __slots__ = ("arity", "input_alphabet_size", "output_alphabet_size", "name", "_fn")

    def __init__(self, fn, arity, input_alphabet_size, output_alphabet_size, name=""):
        self._fn = fn
        self.arity = arity
        self.input_alphabet_size = input_alphabet_size
        self.output_alphabet_size = output_alphabet_size
        self.name = name or "lazy"

    def evaluate(self, point) -> int:
        pt = self._validate_point(point)
        for sym in pt:
            if not 0 <= sym < self.input_alphabet_size:
                raise InvalidInput(f"symbol {sym} out of range")
        return self._fn(pt)

    def dense(self, limit=None) -> DenseFunction:
        self._check_dense_budget(limit)
        return DenseFunction.from_callable(
            lambda pt: self._fn(pt),
            self.arity,
            self.input_alphabet_size,
            self.output_alphabet_size,
            name=self.name,
        )


class PartialAssignment:
    """A {0,1,*}-string describing a Boolean subcube."""

    __slots__ = ("pattern", "fixed_mask", "value_mask")

    def __init__(self, pattern: str):
        if any(ch not in "01*" for ch in pattern):
            raise InvalidInput(f"pattern may only contain 0, 1 and *: {pattern!r}")
        self.pattern = pattern
        fixed = value = 0
        for i, ch in enumerate(pattern):
            if ch != "*":
                fixed |= 1 << i
                if ch == "1":
                    value |= 1 << i
        self.fixed_mask = fixed
        self.value_mask = value

    @classmethod
    def from_fixed(cls, n: int, fixed: dict[int, int]) -> "PartialAssignment":
        chars = ["*"] * n
        for coord, bit in fixed.items():
            if not 0 <= coord < n:
                raise InvalidInput(f"coordinate {coord} out of range")
            chars[coord] = "01"[bool(bit)]
        return cls("".join(chars))

    @property
    def n(self) -> int:
        return len(self.pattern)

    @property
    def size(self) -> int:
        return bin(self.fixed_mask).count("1")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, ch in enumerate(self.pattern) if ch != "*")

    @property
    def fixed(self) -> dict[int, int]:
        return {i: int(ch) for i, ch in enumerate(self.pattern) if ch != "*"}

    def consistent(self, other: "PartialAssignment") -> bool:
        common = self.fixed_mask & other.fixed_mask
        return (self.value_mask ^ other.value_mask) & common == 0

    def union(self, other: "PartialAssignment") -> "PartialAssignment":
        if self.n != other.n:
            raise InvalidInput("assignments have different lengths")
        if not self.consistent(other):
            raise InvalidInput("assignments are inconsistent; union undefined")
        merged = [
            a if a != "*" else b
            for a, b in zip(self.pattern, other.pattern)
        ]
        return PartialAssignment("".join(merged))

    def matches_index(self, index: int) -> bool:
        return (index & self.fixed_mask) == self.value_mask

    def point_indices(self) -> np.ndarray:
        """Indices of all points in the subcube, ascending."""
        free = [i for i in range(self.n) if not (self.fixed_mask >> i) & 1]
        count = 1 << len(free)
        out = np.full(count, self.value_mask, dtype=np.int64)
        sub = np.arange(count, dtype=np.int64)
        for j, coord in enumerate(free):
            out |= ((sub >> j) & 1) << coord
        return np.sort(out)

    def point_count(self) -> int:
        return 1 << (self.n - self.size)

    def repeat(self, times: int) -> "PartialAssignment":
        return PartialAssignment(self.pattern * times)

    def as_box(self, alphabet_size: int = 2) -> "BoxCertificate":
        full = frozenset(range(alphabet_size))
        sets = tuple(
            full if ch == "*" else frozenset((int(ch),)) for ch in self.pattern
        )
        return BoxCertificate(sets, alphabet_size)

    def __eq__(self, other):
        return isinstance(other, PartialAssignment) and self.pattern == other.pattern

    def __lt__(self, other):
        return self.pattern < other.pattern

    def __hash__(self):
        return hash(self.pattern)

    def __repr__(self):
        return f"PartialAssignment({self.pattern!r})"


class BoxCertificate:
    """A cartesian product of per-coordinate symbol sets."""

    __slots__ = ("sets", "alphabet_size")

    def __init__(self, sets, alphabet_size: int):
        sets = tuple(frozenset(s) for s in sets)
        for s in sets:
            if not s:
                raise InvalidInput("certificate coordinate sets must be non-empty")
            if any(not 0 <= sym < alphabet_size for sym in s):
                raise InvalidInput("certificate symbol out of alphabet range")
        self.sets = sets
        self.alphabet_size = alphabet_size

    @property
    def arity(self) -> int:
        return len(self.sets)

    @property
    def size(self) -> int:
        return sum(1 for s in self.sets if len(s) != self.alphabet_size)

    @property
    def is_simple(self) -> bool:
        for s in self.sets:
            if len(s) == self.alphabet_size:
                continue
            if len(s) == 1 and 0 not in s:
                continue
            return False
        return True

    def contains_point(self, point) -> bool:
        return all(sym in s for sym, s in zip(point, self.sets))

    def consistent(self, other: "BoxCertificate") -> bool:
        """True iff the two boxes intersect as point sets."""
        return all(a & b for a, b in zip(self.sets, other.sets))

    def point_count(self) -> int:
        return math.prod(len(s) for s in self.sets)

    def mask(self) -> np.ndarray:
        return box_mask(self.sets, self.alphabet_size, self.arity)

    def to_lists(self) -> list[list[int]]:
        return [sorted(s) for s in self.sets]

    def __eq__(self, other):
        return (
            isinstance(other, BoxCertificate)
            and self.sets == other.sets
            and self.alphabet_size == other.alphabet_size
        )

    def __hash__(self):
        return hash((self.sets, self.alphabet_size))

    def __repr__(self):
        parts = ["*" if len(s) == self.alphabet_size else "".join(map(str, sorted(s))) for s in self.sets]
        return "Box[" + "|".join(parts) + "]"


def write_function(fn: DenseFunction, path) -> None:
    """Write a dense function in the JSON function-file format."""
    doc = {
        "name": fn.name,
        "arity": fn.arity,
        "input_alphabet_size": fn.input_alphabet_size,
        "output_alphabet_size": fn.output_alphabet_size,
    }
    if fn.is_boolean:
        doc["table_hex"] = format(fn.packed_bits(), "x")
    else:
        if fn.output_alphabet_size > len(_DIGITS):
            raise InvalidInput("output alphabet too large for the digit encoding")
        doc["table"] = "".join(_DIGITS[v] for v in fn.table)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def read_function(path) -> DenseFunction:
    """Read a function file, validating shape and symbol ranges."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FunctionFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    for key in ("name", "arity", "input_alphabet_size", "output_alphabet_size"):
        if key not in doc:
            raise FunctionFormatError(f"{path}: missing header field {key!r}")
    arity = doc["arity"]
    q = doc["input_alphabet_size"]
    out = doc["output_alphabet_size"]
    if not (isinstance(arity, int) and isinstance(q, int) and isinstance(out, int)):
        raise FunctionFormatError(f"{path}: header fields must be integers")
    size = q**arity
    if "table_hex" in doc:
        if q != 2 or out != 2:
            raise FunctionFormatError(f"{path}: table_hex is only valid for Boolean functions")
        try:
            bits = int(doc["table_hex"], 16)
        except ValueError as exc:
            raise FunctionFormatError(f"{path}: table_hex is not hexadecimal") from exc
        if bits >= (1 << size):
            raise FunctionFormatError(f"{path}: table_hex has more than {size} bits")
        return DenseFunction.boolean_from_bits(arity, bits, name=doc["name"])
    if "table" not in doc:
        raise FunctionFormatError(f"{path}: missing table")
    text = doc["table"]
    if len(text) != size:
        raise FunctionFormatError(f"{path}: table has {len(text)} digits, expected {size}")
    codes = np.frombuffer(text.encode("ascii", errors="replace"), dtype=np.uint8)
    table = np.where(codes >= ord("a"), codes - ord("a") + 10, codes - ord("0")).astype(np.int16)
    if table.size and (table.min() < 0 or table.max() >= out):
        offset = int(np.argmax((table < 0) | (table >= out)))
        raise FunctionFormatError(f"{path}: table digit at offset {offset} out of range")
    return DenseFunction(arity, q, out, table.astype(np.uint8), name=doc["name"])


def write_collection(certs, path, labels=None) -> None:
    """Write box certificates as a JSON list of per-coordinate symbol lists."""
    items = []
    for i, cert in enumerate(certs):
        if isinstance(cert, PartialAssignment):
            cert = cert.as_box()
        entry = {"sets": cert.to_lists()}
        if labels is not None and labels[i] is not None:
            entry["label"] = labels[i]
        items.append(entry)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(items, fh, sort_keys=True)
        fh.write("\n")


def read_collection(path, alphabet_size: int) -> list[BoxCertificate]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            items = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FunctionFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(items, list):
        raise FunctionFormatError(f"{path}: expected a JSON list of certificates")
    certs = []
    for i, entry in enumerate(items):
        sets = entry["sets"] if isinstance(entry, dict) else entry
        try:
            certs.append(BoxCertificate([frozenset(s) for s in sets], alphabet_size))
        except (TypeError, InvalidInput) as exc:
            raise FunctionFormatError(f"{path}: certificate {i}: {exc}") from exc
    return certs
