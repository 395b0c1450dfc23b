import random

import pytest
from hypothesis import given, settings, strategies as st

from cdmpm import Mode, Params, build_multilevel, expand, flatten, grammar_dump, infer_alphabet
from cdmpm.analysis import level_stats
from cdmpm.transform import S, trace_text, walk_entries

from oracle import naive_expand, naive_transform


def tokens(rep, level):
    seq = rep.levels[level]
    if level == 0:
        return bytes(seq.tokens).decode("latin-1")
    return ["s*" if f else ("s" if t == S else t) for t, f in zip(seq.tokens, seq.forced)]


def coded(rep):
    return [(e.level, e.token) for e in flatten(rep).coded()]


def test_ababab_fixture():
    rep = build_multilevel(b"ababab", Params(2, 1))
    one, zero = rep.levels[1], rep.levels[0]
    assert one.blocks == [b"ab", b"ab", b"ab"]
    assert one.contexts == [b"aa", b"ab", b"ab"]
    assert one.labels == [1, 2, 2]
    assert tokens(rep, 1) == ["s*", "s*", 1]
    assert zero.blocks == [b"a", b"b", b"a", b"b"]
    assert zero.contexts == [b"a", b"a", b"b", b"a"]
    assert tokens(rep, 0) == "abab"


def test_abab_identical_blocks_in_different_classes():
    rep = build_multilevel(b"abab", Params(2, 1))
    assert tokens(rep, 1) == ["s*", "s*"]


def test_abab_mpm_repeats():
    rep = build_multilevel(b"abab", Params(2, 1, Mode.MPM))
    assert tokens(rep, 1) == ["s*", 1]
    assert tokens(rep, 0) == "ab"


def test_aa_single_block():
    rep = build_multilevel(b"aa", Params(2, 1))
    assert tokens(rep, 1) == ["s*"]
    assert tokens(rep, 0) == "aa"
    assert rep.levels[0].contexts == [b"a", b"a"]
    assert coded(rep) == [(0, 97), (0, 97)]


def test_ababab_flat_stream():
    stream = flatten(build_multilevel(b"ababab", Params(2, 1)))
    a, b = ord("a"), ord("b")
    assert [tuple(e)[:1] + tuple(e)[2:] for e in stream.entries] == [
        (1, 1, S, True), (0, a, a, False), (0, a, b, False),
        (1, 2, S, True), (0, b, a, False), (0, a, b, False),
        (1, 2, 1, False),
    ]
    assert [(e.level, e.token) for e in stream.coded()] == [(0, a), (0, b), (0, a), (0, b), (1, 1)]


def test_grammar_dump():
    g = grammar_dump(build_multilevel(b"ababab", Params(2, 1)))
    assert g.render().splitlines() == [
        "start -> N(1,g1,1) N(1,g2,1) N(1,g2,1)",
        "N(1,g1,1) -> a b",
        "N(1,g2,1) -> a b",
    ]
    assert g.expand() == b"ababab"
    assert grammar_dump(build_multilevel(b"aa", Params(2, 1))).render() == "start -> N(1,g1,1)\nN(1,g1,1) -> a a"
    assert grammar_dump(build_multilevel(b"", Params(2, 1))).render() == "start -> eps"


def test_expand_examples():
    assert expand(build_multilevel(b"ababab", Params(2, 1))) == b"ababab"
    assert expand(build_multilevel(b"aa", Params(2, 1))) == b"aa"
    x = random.Random(4).randbytes(4096)
    rep = build_multilevel(x, Params(2, 8))
    assert expand(rep) == x
    assert grammar_dump(rep).expand() == x


def test_expand_rejects_dangling_repeat():
    rep = build_multilevel(b"abababab", Params(2, 1))
    seq = rep.levels[1]
    j = next(j for j, t in enumerate(seq.tokens) if t != S)
    seq.tokens[j] = 7
    with pytest.raises(AssertionError):
        expand(rep)


def test_symbol_outside_alphabet():
    from cdmpm import Alphabet, InputValidationError
    with pytest.raises(InputValidationError):
        build_multilevel(b"abc", Params(2, 1), Alphabet(b"ab"))


def test_trace_golden():
    assert trace_text(build_multilevel(b"ababab", Params(2, 1))) == (
        "n=6 r=2 levels=1 mode=cdmpm alphabet=ab\n"
        "level 1 | X: ab ab ab | C: 1 2 2 | T: s* s* 1\n"
        "level 0 | X: a b a b | C: a a b a | T: a b a b\n"
        "L: a b a b 1\n"
    )


inputs = st.one_of(
    st.binary(max_size=200),
    st.text("ab", max_size=200).map(str.encode),
    st.builds(lambda u, k: u * k, st.text("abc", min_size=1, max_size=5).map(str.encode), st.integers(0, 60)),
)


def agree_with_oracle(x, params):
    rep = build_multilevel(x, params)
    levels, order = naive_transform(x, params.r, params.levels, params.mode is Mode.MPM,
                                    a1=rep.alphabet.first)
    assert sorted(levels) == list(range(rep.top + 1))
    for i, rows in levels.items():
        seq = rep.levels[i]
        assert seq.blocks == [row["block"] for row in rows]
        if i:
            assert seq.labels == [row["label"] for row in rows]
            assert tokens(rep, i) == [row["token"] for row in rows]
        else:
            assert list(seq.tokens) == [row["token"] for row in rows]
            assert list(seq.labels) == [row["context"] for row in rows]
    assert coded(rep) == order
    assert naive_expand(levels, params.r) == x
    return rep


def test_fixture_matches_oracle():
    agree_with_oracle(b"ababab", Params(2, 1))


@settings(max_examples=300, deadline=None)
@given(inputs, st.integers(2, 4), st.integers(0, 8), st.sampled_from(list(Mode)))
def test_matches_naive_reference(x, r, levels, mode):
    agree_with_oracle(x, Params(r, levels, mode))


@settings(max_examples=300, deadline=None)
@given(inputs, st.integers(2, 4), st.integers(1, 8), st.sampled_from(list(Mode)))
def test_structure_invariants(x, r, levels, mode):
    rep = build_multilevel(x, Params(r, levels, mode))
    assert expand(rep) == x
    lengths = rep.level_lengths
    for i in range(rep.top, -1, -1):
        seq = rep.levels[i]
        above = rep.levels[i + 1].s_count if i < rep.top else 0
        assert len(seq) == r * above + lengths[rep.top - i] // r ** i
        if i == 0:
            continue
        seen = set()
        for j, (label, tok, forced) in enumerate(zip(seq.labels, seq.tokens, seq.forced)):
            first = label not in seen
            seen.add(label)
            assert forced == first
            if first:
                assert tok == S
            if tok != S:
                assert rep.classes[i][label].first_index[tok - 1] < j


@settings(max_examples=200, deadline=None)
@given(inputs, st.integers(2, 4), st.integers(1, 8), st.sampled_from(list(Mode)))
def test_context_available_in_depth_first_order(x, r, levels, mode):
    """Replay the flat stream knowing only what earlier entries produced."""
    rep = build_multilevel(x, Params(r, levels, mode))
    known = [dict() for _ in rep.levels]

    def resolve(i, j):
        return known[i].get(j)

    pending = []
    for level, j, _, tok, _ in walk_entries(rep):
        if level > 0 and j > 0 and mode is Mode.CDMPM:
            assert resolve(level, j - 1) is not None, f"context of block {j} at level {level} unknown"
        pending.append((level, j))
        # blocks complete bottom-up once their last symbol is known
        seq = rep.levels[level]
        if level == 0:
            known[0][j] = seq.blocks[j]
        elif tok != S:
            known[level][j] = seq.blocks[j]
        while pending:
            i, k = pending[-1]
            if k in known[i]:
                pending.pop()
                continue
            base = rep.levels[i].child_base[k]
            kids = [resolve(i - 1, base + c) for c in range(r)]
            if any(c is None for c in kids):
                break
            known[i][k] = b"".join(kids)
            pending.pop()
    assert all(len(known[i]) == len(seq) for i, seq in enumerate(rep.levels))


def test_all_distinct_blocks_give_only_forced_s():
    x = bytes(range(64))
    rep = build_multilevel(x, Params(2, 5))
    for i in range(1, rep.top + 1):
        assert all(rep.levels[i].forced)
        assert all(len(c.distinct_blocks) == 1 for c in rep.classes[i].values())


def test_mpm_forced_s_count_is_one_per_level():
    x = bytes(random.Random(9).choice(b"ab") for _ in range(500))
    rep = build_multilevel(x, Params(2, 6, Mode.MPM))
    for i in range(1, rep.top + 1):
        assert sum(rep.levels[i].forced) == 1
        assert len(rep.classes[i]) == 1


def test_level_stats_fixture():
    stats = {s.level: s for s in level_stats(build_multilevel(b"ababab", Params(2, 1)))}
    assert stats[1].l == 1 and stats[1].f_s == 2
    assert stats[0].l == 4


def test_alphabet_override_sets_initial_context():
    x = b"bbbb"
    rep = build_multilevel(x, Params(2, 1), infer_alphabet(b"ab"))
    assert rep.levels[1].contexts[0] == b"aa"
