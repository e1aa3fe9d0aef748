"""Binary AIFV-m code trees, their validation, enumeration and coding procedures.

An AIFV-m code is a tuple ``(T_0, ..., T_{m-1})`` of binary code trees.
Codewords may sit on internal nodes ("master" nodes), and after a symbol is
coded with a master of degree ``d`` the coder switches to tree ``T_d``.

Node kinds:

* complete  -- two children, no symbol
* inter0    -- only a 0-child, no symbol
* inter1    -- only a 1-child, no symbol
* master    -- carries a symbol; degree 0 is a leaf, degree ``d >= 1`` has a
  single 0-child and exactly ``d`` consecutive inter0 nodes below it.

A type-``k`` tree with ``k >= 1`` must have an inter1 node at ``0^k``.
"""
from __future__ import annotations

import enum
import itertools
import json
import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .core import StateSpec, dyadic_exponent, to_rational
from .errors import DecodeError, InputError


class NodeKind(str, enum.Enum):
    COMPLETE = "complete"
    INTER0 = "inter0"
    INTER1 = "inter1"
    MASTER = "master"


@dataclass(frozen=True)
class Node:
    kind: NodeKind
    zero: "Node | None" = None
    one: "Node | None" = None
    symbol: str | None = None
    degree: int = 0

    def child(self, bit: str) -> "Node | None":
        return self.zero if bit == "0" else self.one


def complete(zero: Node, one: Node) -> Node:
    return Node(NodeKind.COMPLETE, zero, one)


def inter0(zero: Node) -> Node:
    return Node(NodeKind.INTER0, zero=zero)


def inter1(one: Node) -> Node:
    return Node(NodeKind.INTER1, one=one)


def master(symbol: str, degree: int = 0, child: Node | None = None) -> Node:
    return Node(NodeKind.MASTER, zero=child, symbol=symbol, degree=degree)


def master_chain(symbol: str, degree: int, below: Node) -> Node:
    """Master of ``degree`` followed by ``degree`` inter0 nodes and then ``below``."""
    node = below
    for _ in range(degree):
        node = inter0(node)
    return master(symbol, degree, node)


@dataclass(frozen=True)
class AifvTree:
    root: Node
    k: int

    def iter_nodes(self) -> Iterator[tuple[str, Node]]:
        """Preorder walk (node, then 0-subtree, then 1-subtree) with paths."""
        stack = [("", self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            if node.one is not None:
                stack.append((path + "1", node.one))
            if node.zero is not None:
                stack.append((path + "0", node.zero))

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    def codewords(self) -> dict[str, tuple[str, int]]:
        """symbol -> (codeword, master degree)."""
        return {
            node.symbol: (path, node.degree)
            for path, node in self.iter_nodes()
            if node.kind is NodeKind.MASTER
        }

    def symbols(self) -> list[str]:
        return [n.symbol for _, n in self.iter_nodes() if n.kind is NodeKind.MASTER]

    def to_records(self) -> list[dict]:
        records = []
        for path, node in self.iter_nodes():
            rec = {"path": path, "kind": node.kind.value}
            if node.kind is NodeKind.MASTER:
                rec["degree"] = node.degree
                rec["symbol"] = node.symbol
            records.append(rec)
        return records

    @classmethod
    def from_records(cls, records: Sequence[dict], k: int) -> "AifvTree":
        by_path = {}
        for rec in records:
            try:
                path = rec["path"]
                kind = NodeKind(rec["kind"])
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"bad node record {rec!r}: {exc}") from None
            if not isinstance(path, str) or set(path) - {"0", "1"}:
                raise InputError(f"bad node path {path!r}")
            if path in by_path:
                raise InputError(f"duplicate node path {path!r}")
            by_path[path] = (kind, rec)
        if "" not in by_path:
            raise InputError("tree has no root record")
        for path in by_path:
            if path and path[:-1] not in by_path:
                raise InputError(f"node {path!r} has no parent")

        def build(path: str) -> Node:
            kind, rec = by_path[path]
            zero = build(path + "0") if path + "0" in by_path else None
            one = build(path + "1") if path + "1" in by_path else None
            if kind is NodeKind.MASTER:
                degree = rec.get("degree", 0)
                symbol = rec.get("symbol")
                if not isinstance(degree, int) or isinstance(degree, bool):
                    raise InputError(f"bad degree at {path!r}")
                if not isinstance(symbol, str):
                    raise InputError(f"master at {path!r} needs a string symbol")
                return Node(kind, zero, one, symbol, degree)
            return Node(kind, zero, one)

        return cls(build(""), k)

    def canonical_key(self) -> str:
        return json.dumps(self.to_records(), sort_keys=True, separators=(",", ":"))


def validate_tree(
    tree: AifvTree,
    k: int,
    m: int,
    n: int | None = None,
    symbols: Sequence[str] | None = None,
) -> list[str]:
    """All ways in which ``tree`` fails to be a type-``k`` AIFV-``m`` tree.

    An empty list means the tree is valid.  ``symbols`` (or just ``n``)
    pins the alphabet that must appear exactly once.
    """
    problems = []
    if not 0 <= k < m:
        problems.append(f"type index {k} out of range for m={m}")
    nodes = dict(tree.iter_nodes())
    for path, node in nodes.items():
        where = f"node {path or '<root>'!r}"
        has0, has1 = node.zero is not None, node.one is not None
        if node.kind is not NodeKind.MASTER and node.symbol is not None:
            problems.append(f"{where}: {node.kind.value} node carries symbol {node.symbol!r}")
        if node.kind is NodeKind.COMPLETE:
            if not (has0 and has1):
                problems.append(f"{where}: complete node needs both children")
        elif node.kind is NodeKind.INTER0:
            if not has0 or has1:
                problems.append(f"{where}: inter0 node needs exactly a 0-child")
        elif node.kind is NodeKind.INTER1:
            if has0 or not has1:
                problems.append(f"{where}: inter1 node needs exactly a 1-child")
        else:
            d = node.degree
            if node.symbol is None:
                problems.append(f"{where}: master without symbol")
            if not 0 <= d < m:
                problems.append(f"{where}: master degree {d} outside [0, {m})")
                continue
            if has1:
                problems.append(f"{where}: master node has a 1-child")
            if d == 0:
                if has0:
                    problems.append(f"{where}: degree-0 master must be a leaf")
                continue
            if not has0:
                problems.append(f"{where}: degree-{d} master needs a 0-child")
                continue
            for t in range(1, d + 1):
                below = nodes.get(path + "0" * t)
                if below is None or below.kind is not NodeKind.INTER0:
                    problems.append(f"{where}: {path + '0' * t!r} should be inter0 for degree {d}")
                    break
            else:
                after = nodes.get(path + "0" * (d + 1))
                if after is None:
                    problems.append(f"{where}: missing node below the degree-{d} inter0 run")
                elif after.kind is NodeKind.INTER0:
                    problems.append(f"{where}: degree {d} but inter0 run is longer")
    if k >= 1:
        node = nodes.get("0" * k)
        if node is None or node.kind is not NodeKind.INTER1:
            problems.append(f"node {'0' * k!r} must be inter1 in a type-{k} tree")
    found = tree.symbols()
    dupes = sorted({s for s in found if found.count(s) > 1})
    if dupes:
        problems.append(f"symbols assigned more than once: {dupes}")
    if symbols is not None:
        missing = sorted(set(symbols) - set(found))
        extra = sorted(set(found) - set(symbols))
        if missing:
            problems.append(f"symbols missing: {missing}")
        if extra:
            problems.append(f"unknown symbols: {extra}")
    elif n is not None and len(set(found)) != n:
        problems.append(f"tree holds {len(set(found))} symbols, expected {n}")
    return problems


# -- exhaustive enumeration --------------------------------------------------
#
# Shapes are nested tuples with unlabelled masters:
#   ("C", zero, one) ("I0", zero) ("I1", one) ("M", degree, child_or_None)
# Contexts: "any", "noi0" (node may not be inter0) and ("path", r, noi0),
# meaning the node r zero-steps below must be inter1.


@lru_cache(maxsize=None)
def _shapes(ctx, budget: int, s: int, m: int) -> tuple:
    if budget <= 0 or s <= 0:
        return ()
    out = []
    if ctx in ("any", "noi0"):
        if s == 1:
            out.append((("M", 0, None), 1))
        for s0 in range(1, s):
            for a, na in _shapes("any", budget - 2, s0, m):
                for b, nb in _shapes("any", budget - 1 - na, s - s0, m):
                    out.append((("C", a, b), 1 + na + nb))
        if ctx == "any":
            for a, na in _shapes("any", budget - 1, s, m):
                out.append((("I0", a), 1 + na))
        for a, na in _shapes("any", budget - 1, s, m):
            out.append((("I1", a), 1 + na))
        if s >= 2:
            for d in range(1, m):
                for a, na in _shapes("noi0", budget - 1 - d, s - 1, m):
                    out.append((_chain_shape(d, a), 1 + d + na))
        return tuple(out)
    _, r, noi0 = ctx
    if r == 0:
        for a, na in _shapes("any", budget - 1, s, m):
            out.append((("I1", a), 1 + na))
        return tuple(out)
    for s0 in range(1, s):
        for a, na in _shapes(("path", r - 1, False), budget - 2, s0, m):
            for b, nb in _shapes("any", budget - 1 - na, s - s0, m):
                out.append((("C", a, b), 1 + na + nb))
    if not noi0:
        for a, na in _shapes(("path", r - 1, False), budget - 1, s, m):
            out.append((("I0", a), 1 + na))
    if s >= 2:
        for d in range(1, r):
            for a, na in _shapes(("path", r - d - 1, True), budget - 1 - d, s - 1, m):
                out.append((_chain_shape(d, a), 1 + d + na))
    return tuple(out)


@lru_cache(maxsize=None)
def _shape_counts(ctx, budget: int, s: int, m: int) -> tuple[int, ...]:
    """Number of shapes produced by :func:`_shapes` with exactly ``j`` nodes, for j <= budget."""
    out = [0] * (budget + 1) if budget >= 0 else []
    if budget <= 0 or s <= 0:
        return tuple(out)

    def add_unary(extra, child_ctx, child_s):
        for j, c in enumerate(_shape_counts(child_ctx, budget - extra, child_s, m)):
            if c:
                out[j + extra] += c

    def add_pairs(ctx0, ctx1):
        for s0 in range(1, s):
            left = _shape_counts(ctx0, budget - 2, s0, m)
            for na, ca in enumerate(left):
                if not ca:
                    continue
                for nb, cb in enumerate(_shape_counts(ctx1, budget - 1 - na, s - s0, m)):
                    if cb:
                        out[1 + na + nb] += ca * cb

    if ctx in ("any", "noi0"):
        if s == 1:
            out[1] += 1
        add_pairs("any", "any")
        if ctx == "any":
            add_unary(1, "any", s)
        add_unary(1, "any", s)
        if s >= 2:
            for d in range(1, m):
                add_unary(1 + d, "noi0", s - 1)
        return tuple(out)
    _, r, noi0 = ctx
    if r == 0:
        add_unary(1, "any", s)
        return tuple(out)
    add_pairs(("path", r - 1, False), "any")
    if not noi0:
        add_unary(1, ("path", r - 1, False), s)
    if s >= 2:
        for d in range(1, r):
            add_unary(1 + d, ("path", r - d - 1, True), s - 1)
    return tuple(out)


def count_shapes(k: int, m: int, n: int, max_nodes: int) -> int:
    """Number of unlabelled type-``k`` shapes with at most ``max_nodes`` nodes (labellings: times n!)."""
    return sum(_shape_counts(root_context(k), max_nodes, n, m))


def _chain_shape(d: int, below):
    node = below
    for _ in range(d):
        node = ("I0", node)
    return ("M", d, node)


def root_context(k: int):
    return "any" if k == 0 else ("path", k, False)


def _label(shape, symbols: Iterator[str]) -> Node:
    tag = shape[0]
    if tag == "M":
        sym = next(symbols)
        child = None if shape[2] is None else _label(shape[2], symbols)
        return Node(NodeKind.MASTER, zero=child, symbol=sym, degree=shape[1])
    if tag == "C":
        zero = _label(shape[1], symbols)
        return Node(NodeKind.COMPLETE, zero, _label(shape[2], symbols))
    if tag == "I0":
        return Node(NodeKind.INTER0, zero=_label(shape[1], symbols))
    return Node(NodeKind.INTER1, one=_label(shape[1], symbols))


def default_symbols(n: int) -> list[str]:
    return [f"s{i}" for i in range(1, n + 1)]


def enumerate_trees(
    k: int, m: int, n: int, max_nodes: int, symbols: Sequence[str] | None = None
) -> list[AifvTree]:
    """Every valid type-``k`` tree with at most ``max_nodes`` nodes, in canonical order.

    Exhaustive, so only practical for very small ``n`` and ``max_nodes``.
    """
    if max_nodes < 1:
        raise InputError("max_nodes must be >= 1")
    if not 0 <= k < m:
        raise InputError(f"type index {k} out of range for m={m}")
    symbols = list(symbols) if symbols is not None else default_symbols(n)
    if len(symbols) != n or len(set(symbols)) != n:
        raise InputError("need n distinct symbols")
    trees = []
    for shape, _ in _shapes(root_context(k), max_nodes, n, m):
        for perm in itertools.permutations(symbols):
            trees.append(AifvTree(_label(shape, iter(perm)), k))
    trees.sort(key=AifvTree.canonical_key)
    return trees


# -- sources and tree statistics ---------------------------------------------


@dataclass(frozen=True)
class SourceDistribution:
    symbols: tuple[str, ...]
    probs: tuple[Fraction, ...]
    b: int

    def __post_init__(self):
        symbols = tuple(self.symbols)
        probs = tuple(to_rational(p) for p in self.probs)
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "probs", probs)
        if not symbols:
            raise InputError("source needs at least one symbol")
        if len(symbols) != len(probs):
            raise InputError("symbols and probs differ in length")
        if len(set(symbols)) != len(symbols):
            raise InputError("duplicate source symbols")
        if not all(isinstance(s, str) and s and not any(c.isspace() for c in s) for s in symbols):
            raise InputError("symbols must be nonempty strings without whitespace")
        if not isinstance(self.b, int) or self.b < 0:
            raise InputError(f"bad precision b={self.b!r}")
        if any(p <= 0 for p in probs):
            raise InputError("probabilities must be positive")
        if sum(probs) != 1:
            raise InputError(f"probabilities sum to {sum(probs)}, not 1")
        for p in probs:
            e = dyadic_exponent(p)
            if e is None or e > self.b:
                raise InputError(f"probability {p} is not a multiple of 2^-{self.b}")

    @property
    def n(self) -> int:
        return len(self.symbols)

    def prob(self, symbol: str) -> Fraction:
        return self.probs[self.symbols.index(symbol)]

    @classmethod
    def from_weights(cls, weights: Sequence[int], b: int, symbols: Sequence[str] | None = None):
        """Build from integer numerators over ``2**b``."""
        symbols = symbols if symbols is not None else [chr(ord("a") + i) for i in range(len(weights))]
        return cls(tuple(symbols), tuple(Fraction(w, 2 ** b) for w in weights), b)


def tree_to_state(tree: AifvTree, source: SourceDistribution, m: int) -> StateSpec:
    """Average codeword length and degree distribution of ``tree`` as a chain state."""
    words = tree.codewords()
    if sorted(words) != sorted(source.symbols) or len(tree.symbols()) != source.n:
        raise InputError("tree symbols do not match the source alphabet")
    reward = Fraction(0)
    q = [Fraction(0)] * m
    for sym, p in zip(source.symbols, source.probs):
        word, degree = words[sym]
        if not 0 <= degree < m:
            raise InputError(f"master degree {degree} outside [0, {m})")
        reward += p * len(word)
        q[degree] += p
    return StateSpec(reward, tuple(q))


# -- codes, encoding and decoding --------------------------------------------


@dataclass(frozen=True)
class AifvCode:
    trees: tuple[AifvTree, ...]

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))

    @property
    def m(self) -> int:
        return len(self.trees)

    @property
    def symbols(self) -> list[str]:
        return sorted(self.trees[0].symbols())

    def violations(self) -> list[str]:
        out = []
        alphabet = self.trees[0].symbols()
        for k, tree in enumerate(self.trees):
            if tree.k != k:
                out.append(f"tree {k} is declared as type {tree.k}")
            out += [f"T_{k}: {v}" for v in validate_tree(tree, k, self.m, symbols=alphabet)]
        return out

    def validate(self) -> "AifvCode":
        problems = self.violations()
        if problems:
            raise InputError("invalid AIFV code: " + "; ".join(problems))
        return self

    def tables(self) -> list[dict[str, tuple[str, int]]]:
        return [t.codewords() for t in self.trees]

    def to_json(self) -> str:
        doc = {
            "format": "aifv-code",
            "m": self.m,
            "symbols": self.symbols,
            "trees": [t.to_records() for t in self.trees],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str, validate: bool = True) -> "AifvCode":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"code file is not valid JSON: {exc}") from None
        if not isinstance(doc, dict) or not isinstance(doc.get("trees"), list):
            raise InputError("code file needs a 'trees' list")
        m = doc.get("m", len(doc["trees"]))
        if m != len(doc["trees"]) or m < 2:
            raise InputError(f"code file declares m={m} but holds {len(doc['trees'])} trees")
        code = cls(tuple(AifvTree.from_records(recs, k) for k, recs in enumerate(doc["trees"])))
        if validate:
            code.validate()
        return code


def encode(code: AifvCode, symbols: Sequence[str]) -> str:
    tables = code.tables()
    out = []
    t = 0
    for sym in symbols:
        try:
            word, degree = tables[t][sym]
        except KeyError:
            raise InputError(f"unknown symbol {sym!r}") from None
        out.append(word)
        t = degree
    return "".join(out)


def decode(code: AifvCode, bits: str, num_symbols: int) -> list[str]:
    """Decode exactly ``num_symbols`` symbols, taking the longest master prefix each time.

    Every bit must be consumed; leftover bits are an error.
    """
    if set(bits) - {"0", "1"}:
        raise InputError("bit string may only contain '0' and '1'")
    if num_symbols < 0:
        raise InputError("num_symbols must be nonnegative")
    out = []
    pos = 0
    t = 0
    for i in range(num_symbols):
        node = code.trees[t].root
        j = pos
        hit = (j, node) if node.kind is NodeKind.MASTER else None
        while j < len(bits):
            node = node.child(bits[j])
            if node is None:
                break
            j += 1
            if node.kind is NodeKind.MASTER:
                hit = (j, node)
        if hit is None:
            raise DecodeError(f"no codeword of T_{t} at bit {pos} (symbol {i + 1})")
        pos, found = hit
        out.append(found.symbol)
        t = found.degree
    if pos != len(bits):
        raise DecodeError(f"{len(bits) - pos} bits left over after {num_symbols} symbols")
    return out


def pack_bits(bits: str, num_symbols: int) -> bytes:
    """Container: 8-byte big-endian symbol count, 1 byte of padding length, then the
    bits MSB-first and zero padded to a whole byte.

    The padding length is needed because longest-prefix decoding could otherwise
    read padding zeros as the tail of a longer codeword.
    """
    pad = -len(bits) % 8
    padded = bits + "0" * pad
    body = bytes(int(padded[i:i + 8], 2) for i in range(0, len(padded), 8))
    return struct.pack(">QB", num_symbols, pad) + body


def unpack_bits(blob: bytes) -> tuple[int, str]:
    """Inverse of :func:`pack_bits`: (symbol count, bits without padding)."""
    if len(blob) < 9:
        raise DecodeError("container shorter than its 9-byte header")
    count, pad = struct.unpack(">QB", blob[:9])
    bits = "".join(f"{byte:08b}" for byte in blob[9:])
    if pad > 7 or pad > len(bits):
        raise DecodeError(f"bad padding length {pad}")
    if pad:
        if set(bits[-pad:]) != {"0"}:
            raise DecodeError("padding bits are not zero")
        bits = bits[:-pad]
    return count, bits
