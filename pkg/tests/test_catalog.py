from itertools import combinations

import pytest

from kphrase.catalog import (
    LINKED_PAIRS,
    Axis,
    PhraseType,
    build_catalog,
    describe,
)
from kphrase.skeleton import EYES, JOINT_INDEX, JOINT_NAMES, MIRROR_JOINT, NUM_JOINTS

J = JOINT_INDEX


@pytest.fixture(scope="module")
def catalog():
    return build_catalog()


@pytest.mark.parametrize(
    "ptype, n",
    [(PhraseType.PP, 34), (PhraseType.PRPP, 242), (PhraseType.PDP, 81), (PhraseType.LAP, 8), (PhraseType.LOP, 24), (PhraseType.GVP, 3)],
)
def test_family_counts(catalog, ptype, n):
    assert catalog.count(ptype) == n


def test_total(catalog):
    assert catalog.total == len(catalog) == 392
    assert len(PhraseType) == 6


def test_count_arithmetic():
    # PP: 12 joints x 3 axes minus the two shoulder/right phrases
    assert 12 * 3 - 2 == 34
    # PRPP: all pairs x axes, minus linked pairs, eye pairs and four triplets
    pairs = list(combinations(range(NUM_JOINTS), 2))
    eye_pairs = [p for p in pairs if (p[0] in EYES or p[1] in EYES) and p != (EYES[0], EYES[1])]
    assert len(pairs) == 136 and len(eye_pairs) == 30 and len(LINKED_PAIRS) == 24
    assert 136 * 3 - 24 * 3 - 30 * 3 - 4 == 242
    # PDP: pairs of the 15 non-eye joints minus the 24 linked pairs
    assert len(list(combinations(range(15), 2))) - 24 == 81


def test_ids_contiguous_and_sorted(catalog):
    ids = [d.id for d in catalog]
    assert ids == list(range(392))
    keys = [(d.ptype, d.joints, -1 if d.axis is None else int(d.axis)) for d in catalog]
    assert keys == sorted(keys)


def test_keys_unique(catalog):
    assert len({d.key for d in catalog}) == 392


def test_descriptor_shapes(catalog):
    for d in catalog:
        assert all(0 <= j < NUM_JOINTS for j in d.joints)
        if d.ptype == PhraseType.PP:
            assert len(d.joints) == 1 and d.joints[0] != J["pelvis"] and d.axis is not None
        elif d.ptype in (PhraseType.PRPP, PhraseType.PDP):
            assert len(d.joints) == 2 and d.joints[0] < d.joints[1]
            assert (d.axis is None) == (d.ptype == PhraseType.PDP)
        elif d.ptype == PhraseType.LAP:
            assert len(d.joints) == 3 and d.axis is None
        elif d.ptype == PhraseType.LOP:
            assert len(d.joints) == 2 and d.axis is not None
        else:
            assert d.joints == (J["pelvis"],) and d.axis is not None


def test_pp_exclusions(catalog):
    keys = {(d.joints[0], d.axis) for d in catalog.by_type[PhraseType.PP]}
    assert (J["l_shoulder"], Axis.RIGHT) not in keys
    assert (J["r_shoulder"], Axis.RIGHT) not in keys
    assert (J["l_shoulder"], Axis.UP) in keys
    for name in ("pelvis", "l_eye", "r_eye", "l_hip", "r_hip"):
        assert all(d.joints[0] != J[name] for d in catalog.by_type[PhraseType.PP])


def test_pdp_has_no_eyes(catalog):
    for d in catalog.by_type[PhraseType.PDP]:
        assert not set(d.joints) & set(EYES)
        assert d.joints not in LINKED_PAIRS


def test_prpp_example_exclusion(catalog):
    with pytest.raises(KeyError):
        catalog.lookup(PhraseType.PRPP, (J["r_hip"], J["l_knee"]), Axis.RIGHT)
    assert catalog.lookup(PhraseType.PRPP, (J["r_hip"], J["l_knee"]), Axis.FORWARD)
    assert catalog.lookup(PhraseType.PRPP, (J["l_eye"], J["r_eye"]), Axis.UP)


def test_lap_chains_are_hinges(catalog):
    names = sorted(d.label for d in catalog.by_type[PhraseType.LAP])
    assert names == sorted(
        ["left arm", "right arm", "left leg", "right leg", "left shoulder", "right shoulder", "left hip", "right hip"]
    )
    arm = next(d for d in catalog.by_type[PhraseType.LAP] if d.label == "left arm")
    assert arm.joints == (J["l_elbow"], J["l_shoulder"], J["l_wrist"])


def test_lop_covers_fifteen_limbs(catalog):
    limbs = {d.joints for d in catalog.by_type[PhraseType.LOP]}
    assert len(limbs) <= 15
    # 15 limbs x 3 axes minus 21 exclusions
    assert 15 * 3 - 21 == catalog.count(PhraseType.LOP)


def test_mirror_closure(catalog):
    for d in catalog:
        mirrored = tuple(MIRROR_JOINT[j] for j in d.joints)
        if d.ptype in (PhraseType.PRPP, PhraseType.PDP):
            mirrored = tuple(sorted(mirrored))
        other = catalog.lookup(d.ptype, mirrored, d.axis)
        mid, sign = catalog.mirror_of(d.id)
        assert mid == other.id
        assert sign in (-1, 1)
        # mirroring twice returns home with the sign squared away
        back, sign2 = catalog.mirror_of(mid)
        assert back == d.id and sign * sign2 == 1


def test_mirror_signs(catalog):
    lw, rw = J["l_wrist"], J["r_wrist"]
    pp_r = catalog.lookup(PhraseType.PP, (lw,), Axis.RIGHT)
    pp_u = catalog.lookup(PhraseType.PP, (lw,), Axis.UP)
    assert catalog.mirror_of(pp_r.id) == (catalog.lookup(PhraseType.PP, (rw,), Axis.RIGHT).id, -1)
    assert catalog.mirror_of(pp_u.id) == (catalog.lookup(PhraseType.PP, (rw,), Axis.UP).id, 1)
    # the pair swaps order under mirroring, which flips the sign a second time
    fwd = catalog.lookup(PhraseType.PRPP, (lw, rw), Axis.FORWARD)
    right = catalog.lookup(PhraseType.PRPP, (lw, rw), Axis.RIGHT)
    assert catalog.mirror_of(fwd.id) == (fwd.id, -1)
    assert catalog.mirror_of(right.id) == (right.id, 1)


def test_deterministic():
    build_catalog.cache_clear()
    a = build_catalog().export_rows()
    build_catalog.cache_clear()
    assert build_catalog().export_rows() == a


def test_unknown_id(catalog):
    for bad in (-1, 392, "3", True):
        with pytest.raises(KeyError):
            catalog[bad]
    with pytest.raises(KeyError):
        describe(392, 1)
    with pytest.raises(ValueError):
        describe(0, 2)


def test_describe_examples(catalog):
    lw, rw = J["l_wrist"], J["r_wrist"]
    assert describe(catalog.lookup(PhraseType.PP, (lw,), Axis.UP).id, 1) == "left hand moves upwards"
    arm = next(d for d in catalog.by_type[PhraseType.LAP] if d.label == "left arm")
    assert describe(arm.id, -1) == "left arm bends"
    assert describe(catalog.lookup(PhraseType.PDP, (lw, rw)).id, 0) == "left hand and right hand keep their distance"
    prpp = catalog.lookup(PhraseType.PRPP, (lw, rw), Axis.FORWARD)
    assert describe(prpp.id, -1) == "left hand is behind right hand"
    assert describe(prpp.id, 1) == "left hand is in front of right hand"


def test_describe_strings_distinct(catalog):
    texts = [describe(d.id, c) for d in catalog for c in (-1, 0, 1)]
    assert len(set(texts)) == 392 * 3


def test_export(tmp_path, catalog):
    path = tmp_path / "catalog.tsv"
    catalog.export(path)
    lines = path.read_text().splitlines()
    assert lines[0].split("\t") == ["id", "type", "joints", "axis", "name"]
    assert len(lines) == 393
    first = lines[1].split("\t")
    assert first[1] == "PP" and first[2] in JOINT_NAMES
    files = catalog.export_per_type(tmp_path / "kp")
    assert sorted(p.name for p in files) == sorted(["pp.txt", "prpp.txt", "pdp.txt", "lap.txt", "lop.txt", "gvp.txt"])
    assert sum(len(p.read_text().splitlines()) - 1 for p in files) == 392
