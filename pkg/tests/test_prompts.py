import hashlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kphrase.catalog import Axis, PhraseType, build_catalog, describe
from kphrase.errors import ConfigError, ParseError
from kphrase.prompts import (
    DEFAULT_SEED,
    Prompt,
    format_pattern,
    format_suite,
    gen_atomic,
    gen_repetitive,
    gen_sequential,
    gen_simultaneous,
    generate_suite,
    mutually_exclusive,
    parse_pattern,
    read_suite,
    render_text,
    sequential_pool,
    simultaneous_pool,
    write_suite,
)
from kphrase.skeleton import JOINT_INDEX

CAT = build_catalog()
J = JOINT_INDEX


@pytest.fixture(scope="module")
def suite():
    return generate_suite()


def _types(prompts):
    return {CAT[pid].ptype for p in prompts for pid, _ in p.targets}


def test_atomic():
    atomic = gen_atomic()
    assert len(atomic) == 252
    assert _types(atomic) == {PhraseType.PP, PhraseType.PDP, PhraseType.LAP, PhraseType.GVP}
    assert "left hand moves upwards" in {p.text for p in atomic}
    order = [p.targets[0] for p in atomic]
    assert order == sorted(order, key=lambda t: (t[0], t[1]))


def test_repetitive():
    rep = gen_repetitive()
    assert len(rep) == 492
    assert _types(rep) == {PhraseType.PP, PhraseType.PDP, PhraseType.LAP}
    texts = {p.text for p in rep}
    assert "left arm bends twice" in texts
    assert "left arm bends three times" in texts
    assert {p.reps for p in rep} == {2, 3}


def test_sequential():
    seq = gen_sequential()
    assert len(seq) == 3912
    assert all(p.targets[0][0] != p.targets[1][0] for p in seq)
    assert all(", then " in p.text for p in seq)
    arm_l = next(d.id for d in CAT.by_type[PhraseType.LAP] if d.label == "left arm")
    arm_r = next(d.id for d in CAT.by_type[PhraseType.LAP] if d.label == "right arm")
    assert render_text("sequential", ((arm_l, -1), (arm_r, -1))) == "left arm bends, then right arm bends"


def test_simultaneous():
    sim = gen_simultaneous()
    assert len(sim) == 3120
    assert all(not mutually_exclusive(*p.targets) for p in sim)
    assert all(", and simultaneously, " in p.text for p in sim)


def test_pools():
    assert len(sequential_pool()) == 252 * 250
    assert len(simultaneous_pool()) == 252 * 250 // 2


def test_mutual_exclusion():
    up = CAT.lookup(PhraseType.PP, (J["l_wrist"],), Axis.UP).id
    fwd = CAT.lookup(PhraseType.PP, (J["l_wrist"],), Axis.FORWARD).id
    assert mutually_exclusive((up, 1), (up, -1))
    assert not mutually_exclusive((up, 1), (fwd, -1))
    pool = simultaneous_pool()
    assert ((up, -1), (up, 1)) not in pool and ((up, 1), (up, -1)) not in pool


def test_suite_counts_and_unique_texts(suite):
    assert suite.counts == {"atomic": 252, "repetitive": 492, "sequential": 3912, "simultaneous": 3120}
    assert len(suite) == 7776
    assert len({p.text for p in suite}) == 7776
    assert len({p.id for p in suite}) == 7776
    assert suite.seed == DEFAULT_SEED


def test_no_zero_categories(suite):
    assert all(c != 0 for p in suite for _, c in p.targets)


def test_text_round_trip(suite):
    for p in suite:
        assert render_text(p.kind, p.targets, p.reps) == p.text
        parts = [describe(pid, c) for pid, c in p.targets]
        assert all(part in p.text for part in parts)


def test_same_seed_same_bytes(suite):
    again = format_suite(generate_suite(seed=DEFAULT_SEED))
    assert hashlib.sha256(again.encode()).digest() == hashlib.sha256(format_suite(suite).encode()).digest()


def test_other_seed_differs(suite):
    other = generate_suite(seed=7)
    assert [p.targets for p in other.by_kind("atomic")] == [p.targets for p in suite.by_kind("atomic")]
    assert [p.targets for p in other.by_kind("sequential")] != [p.targets for p in suite.by_kind("sequential")]


def test_sample_size_guard():
    with pytest.raises(ConfigError):
        gen_sequential(n=10**6)


def test_file_round_trip(tmp_path, suite):
    path = tmp_path / "kpg.tsv"
    write_suite(suite, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 7776
    assert lines[0].split("\t")[:2] == ["atomic-0000", "atomic"]
    back = read_suite(path)
    assert back.prompts == suite.prompts


@pytest.mark.parametrize(
    "line",
    ["x\tatomic\ttext", "x\tatomic\ttext\t12", "x\tbogus\ttext\t12:+1", "x\tsequential\ttext\t12:+1>12:-1", "x\tatomic\tt\t3:0"],
)
def test_read_suite_rejects_bad_lines(tmp_path, line):
    path = tmp_path / "bad.tsv"
    path.write_text(line + "\n")
    with pytest.raises(ParseError, match="line 1"):
        read_suite(path)


@settings(max_examples=100, deadline=None)
@given(
    kind=st.sampled_from(["atomic", "repetitive", "sequential", "simultaneous"]),
    a=st.integers(0, 391),
    b=st.integers(0, 391),
    ca=st.sampled_from([-1, 1]),
    cb=st.sampled_from([-1, 1]),
    reps=st.sampled_from([2, 3]),
)
def test_pattern_round_trip(kind, a, b, ca, cb, reps):
    targets = ((a, ca),) if kind in ("atomic", "repetitive") else ((a, ca), (b, cb))
    r = reps if kind == "repetitive" else None
    assert parse_pattern(kind, format_pattern(kind, targets, r)) == (targets, r)


def test_pattern_examples():
    assert format_pattern("atomic", ((12, 1),)) == "12:+1"
    assert format_pattern("repetitive", ((12, 1),), 2) == "12:+1*2"
    assert format_pattern("sequential", ((12, 1), (40, -1))) == "12:+1>40:-1"
    assert format_pattern("simultaneous", ((12, 1), (40, -1))) == "12:+1&40:-1"


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="atomic", targets=((1, 0),)),
        dict(kind="atomic", targets=((1, 1), (2, 1))),
        dict(kind="sequential", targets=((1, 1), (1, -1))),
        dict(kind="repetitive", targets=((1, 1),)),
        dict(kind="atomic", targets=((1, 1),), reps=2),
        dict(kind="dance", targets=((1, 1),)),
    ],
)
def test_prompt_invariants(kwargs):
    with pytest.raises(ValueError):
        Prompt(id="p", text="", **kwargs)
