import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aifvmc.aifv import aifv_problem
from aifvmc.codec import (
    AifvCode,
    AifvTree,
    Node,
    NodeKind,
    SourceDistribution,
    complete,
    decode,
    encode,
    enumerate_trees,
    inter0,
    inter1,
    master,
    master_chain,
    pack_bits,
    tree_to_state,
    unpack_bits,
    validate_tree,
)
from aifvmc.errors import DecodeError, InputError
from aifvmc.io import read_code
from aifvmc.oracle import brute_enumerate_trees, exhaustive_roundtrip
from aifvmc.solver import solve_iterative

from conftest import DATA


def tree(root, k=0):
    return AifvTree(root, k)


# -- validation ----------------------------------------------------------------


def test_single_leaf_is_a_valid_type0_tree():
    assert validate_tree(tree(master("a")), 0, 2, n=1) == []


def test_single_leaf_is_not_a_type1_tree():
    problems = validate_tree(tree(master("a"), 1), 1, 2, n=1)
    assert any("inter1" in p for p in problems)


def test_minimal_type1_tree():
    t = tree(inter0(inter1(master("a"))), 1)
    assert validate_tree(t, 1, 2, n=1) == []
    assert t.codewords() == {"a": ("01", 0)}


def test_degree_run_boundaries():
    ok = master_chain("a", 1, complete(master("b"), master("c")))
    assert validate_tree(tree(ok), 0, 2, n=3) == []
    too_long = master("a", 1, inter0(inter0(complete(master("b"), master("c")))))
    assert any("longer" in p for p in validate_tree(tree(too_long), 0, 2, n=3))
    too_short = master("a", 2, inter0(complete(master("b"), master("c"))))
    assert any("inter0" in p for p in validate_tree(tree(too_short), 0, 3, n=3))
    assert any("outside" in p for p in validate_tree(tree(ok), 0, 1 + 0, n=3))


def test_structural_violations_are_reported():
    bad_complete = Node(NodeKind.COMPLETE, zero=master("a"))
    assert any("both children" in p for p in validate_tree(tree(bad_complete), 0, 2))
    leaf_with_child = master("a", 0, master("b"))
    assert any("leaf" in p for p in validate_tree(tree(leaf_with_child), 0, 2))
    dup = complete(master("a"), master("a"))
    assert any("more than once" in p for p in validate_tree(tree(dup), 0, 2))
    assert any("missing" in p for p in validate_tree(tree(master("a")), 0, 2, symbols=["a", "b"]))
    assert any("expected 2" in p for p in validate_tree(tree(master("a")), 0, 2, n=2))


def test_type1_root_cannot_be_a_master():
    t = tree(master("a", 1, inter0(inter1(master("b")))), 1)
    assert validate_tree(t, 1, 2, n=2)


# -- enumeration ----------------------------------------------------------------


def test_enumeration_examples():
    assert len(enumerate_trees(0, 2, 1, 1)) == 1
    assert enumerate_trees(1, 2, 1, 2) == []
    (only,) = enumerate_trees(1, 2, 1, 3)
    assert only.canonical_key() == tree(inter0(inter1(master("s1"))), 1).canonical_key()
    with pytest.raises(InputError):
        enumerate_trees(0, 2, 1, 0)


@pytest.mark.parametrize("m", [2, 3])
def test_enumerators_agree_on_small_caps(m):
    for k in range(m):
        for n in (1, 2, 3):
            for cap in range(1, 8):
                fast = [t.canonical_key() for t in enumerate_trees(k, m, n, cap)]
                slow = [t.canonical_key() for t in brute_enumerate_trees(k, m, n, cap)]
                assert fast == slow, (k, n, cap)
                assert len(set(fast)) == len(fast)


def test_enumerated_trees_are_valid_and_capped():
    for k in range(3):
        for t in enumerate_trees(k, 3, 3, 9):
            assert validate_tree(t, k, 3, n=3) == []
            assert t.node_count <= 9


# -- tree statistics -----------------------------------------------------------


def test_tree_to_state_examples():
    src = SourceDistribution.from_weights([1, 1], 1)
    s = tree_to_state(tree(complete(master("a"), master("b"))), src, 2)
    assert s.reward == 1 and s.q == (1, 0)
    t = tree(master_chain("a", 1, master("b")))
    s = tree_to_state(t, src, 2)
    assert t.codewords()["a"] == ("", 1)
    assert s.reward == F(1, 2) * 2 and s.q == (F(1, 2), F(1, 2))


def test_tree_to_state_rejects_foreign_symbols():
    src = SourceDistribution.from_weights([1, 1], 1)
    with pytest.raises(InputError):
        tree_to_state(tree(complete(master("a"), master("z"))), src, 2)


def _walk(node, depth, out):
    # depth-first recomputation kept separate from AifvTree.codewords
    if node is None:
        return
    if node.kind is NodeKind.MASTER:
        out[node.symbol] = (depth, node.degree)
    _walk(node.zero, depth + 1, out)
    _walk(node.one, depth + 1, out)


def test_tree_to_state_matches_recursive_walk():
    rng = random.Random(2)
    src = SourceDistribution.from_weights([3, 2, 2, 1], 3, symbols=["s1", "s2", "s3", "s4"])
    for k in range(3):
        trees = enumerate_trees(k, 3, 4, 8)
        for t in rng.sample(trees, min(40, len(trees))):
            depth = {}
            _walk(t.root, 0, depth)
            reward = sum(p * depth[s][0] for s, p in zip(src.symbols, src.probs))
            q = [sum(p for s, p in zip(src.symbols, src.probs) if depth[s][1] == j) for j in range(3)]
            state = tree_to_state(t, src, 3)
            assert state.reward == reward and list(state.q) == q
            assert state.q[0] > 0


# -- encoding and decoding -----------------------------------------------------


def test_example_code_encodes_and_decodes(example_code):
    assert example_code.violations() == []
    tables = example_code.tables()
    assert tables[0]["c"] == ("000", 0) and tables[0]["b"] == ("1", 2)
    assert tables[2]["a"] == ("", 1) and tables[1]["b"][0] == "010"
    bits = encode(example_code, "c b a b".split())
    assert bits == "0001010"
    assert decode(example_code, bits, 4) == ["c", "b", "a", "b"]


def test_trivial_encodings(example_code):
    assert encode(example_code, []) == ""
    assert decode(example_code, "", 0) == []
    assert encode(example_code, ["d"]) == "1000"


def test_decode_errors(example_code):
    with pytest.raises(DecodeError):
        decode(example_code, "0001010", 3)
    with pytest.raises(DecodeError):
        decode(example_code, "000", 2)
    with pytest.raises(InputError):
        decode(example_code, "0x1", 1)
    with pytest.raises(InputError):
        encode(example_code, ["zz"])


def _aifv2_code():
    src = SourceDistribution.from_weights([2, 1, 1], 2)
    ap = aifv_problem(src, 2)
    return ap.code(solve_iterative(ap.problem).chain)


def test_aifv2_code_roundtrips_exhaustively():
    code = _aifv2_code()
    assert code.violations() == []
    report = exhaustive_roundtrip(code, 6)
    assert report.ok and report.checked == sum(3 ** i for i in range(7))


@settings(max_examples=200)
@given(st.lists(st.sampled_from("abcd"), max_size=30))
def test_example_code_roundtrips_random_messages(msg):
    code = read_code(DATA / "aifv3_example.json")
    bits = encode(code, msg)
    assert decode(code, bits, len(msg)) == msg
    count, unpacked = unpack_bits(pack_bits(bits, len(msg)))
    assert count == len(msg)
    assert decode(code, unpacked, count) == msg


def test_code_json_roundtrip_is_byte_identical(example_code):
    text = example_code.to_json()
    assert AifvCode.from_json(text).to_json() == text


def test_code_json_rejects_invalid(data_dir):
    with pytest.raises(InputError):
        AifvCode.from_json((data_dir / "aifv3_mutated.json").read_text())
    with pytest.raises(InputError):
        AifvCode.from_json("{not json")
    with pytest.raises(InputError):
        AifvCode.from_json('{"trees": [[{"path": "0", "kind": "master"}], []]}')


def test_mutated_code_breaks_roundtrip(data_dir):
    code = AifvCode.from_json((data_dir / "aifv3_mutated.json").read_text(), validate=False)
    report = exhaustive_roundtrip(code, 4)
    assert not report.ok and report.counterexample is not None


def test_source_validation():
    with pytest.raises(InputError):
        SourceDistribution(("a", "b"), (F(1, 3), F(2, 3)), 2)
    with pytest.raises(InputError):
        SourceDistribution(("a", "a"), (F(1, 2), F(1, 2)), 1)
    with pytest.raises(InputError):
        SourceDistribution(("a", "b"), (F(1, 4), F(1, 2)), 2)
    with pytest.raises(InputError):
        SourceDistribution(("a", "b"), (F(1, 4), F(3, 4)), 1)


def test_container_layout():
    blob = pack_bits("1", 1)
    assert blob[:8] == (1).to_bytes(8, "big") and blob[8] == 7 and blob[9:] == bytes([0b10000000])
    with pytest.raises(DecodeError):
        unpack_bits(blob[:5])
    with pytest.raises(DecodeError):
        unpack_bits(blob[:9] + bytes([0b10000001]))
