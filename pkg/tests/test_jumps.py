import pytest

from exseq.jumps import (
    DragnetProfile,
    HorizonError,
    affine_odd,
    dragnet,
    enumerate_jumps,
    explicit,
    factorial,
    geometric,
    interval_geometry,
    linear,
    make_rule,
    monomial,
    parse_family,
    parse_rule,
)


def test_enumerate_squares():
    rule = make_rule(monomial(2), 20)
    assert enumerate_jumps(rule, 20) == [1, 4, 9, 16]


def test_enumerate_factorials():
    rule = make_rule(factorial(), 30)
    assert enumerate_jumps(rule, 30) == [1, 2, 6, 24]


def test_enumerate_linear():
    rule = make_rule(linear(2), 7)
    assert enumerate_jumps(rule, 7) == [2, 4, 6]


@pytest.mark.parametrize(
    "name,horizon,expected",
    [
        ("square", 30, (1, 4, 9, 16, 25)),
        ("cube", 30, (1, 8, 27)),
        ("pow:4", 100, (1, 16, 81)),
        ("odd", 10, (1, 3, 5, 7, 9)),
        ("linear:3", 10, (3, 6, 9)),
        ("geom:2", 40, (2, 4, 8, 16, 32)),
        ("explicit:[2,5,11]", 20, (2, 5, 11)),
    ],
)
def test_parse_rule_families(name, horizon, expected):
    assert parse_rule(name, horizon).distances == expected


def test_rule_label_round_trip():
    for name in ("square", "cube", "pow:5", "odd", "linear:2", "factorial", "geom:3"):
        assert parse_family(name).label() == name


def test_explicit_rejects_bad_lists():
    with pytest.raises(ValueError):
        explicit([3, 3, 5])
    with pytest.raises(ValueError):
        explicit([5, 2])
    with pytest.raises(ValueError):
        explicit([0, 1])
    with pytest.raises(ValueError):
        explicit([])


def test_unknown_rule_name():
    with pytest.raises(ValueError):
        parse_family("pentagon")
    with pytest.raises(ValueError):
        parse_family("linear:x")


def test_dragnet_examples():
    rule = parse_rule("square", 100)
    assert dragnet(rule, 1) == set()
    assert dragnet(rule, 17) == {16, 13, 8, 1}
    assert dragnet(rule, 5) == {4, 1}


def test_dragnet_size_matches_enumeration():
    # the two code paths must agree: |dragnet(j)| == #jumps <= j-1
    for name in ("square", "cube", "odd", "factorial", "geom:2", "linear:3"):
        rule = parse_rule(name, 400)
        for j in range(1, 400):
            assert rule.dragnet_size(j) == len(dragnet(rule, j))
            assert rule.dragnet_size(j) == len(enumerate_jumps(rule, j - 1)) if j > 1 else True


def test_square_cardinality_closed_form():
    from math import isqrt

    rule = parse_rule("square", 5000)
    for j in (1, 2, 5, 17, 100, 1000, 5000):
        assert rule.dragnet_size(j) == isqrt(j - 1)


def test_interval_geometry_square_examples():
    rule = parse_rule("square", 10000)
    geom = interval_geometry(rule, 10, 5)
    assert geom[4][0] == 197  # fifth interval starts at (10+5-1)^2 + 1
    geom4 = interval_geometry(rule, 4, 1)
    assert geom4[0][1] == (17, 25)
    assert geom4[0][2] == 9
    geom5 = interval_geometry(rule, 5, 2)
    assert geom5[1][2] == 13  # l_2 = 2(5+2) - 1


def test_interval_geometry_matches_cardinality_scan():
    # spans must coincide with a brute scan of the c(j) step function
    for d in range(2, 26):
        rule = parse_rule("square", (d + 51) ** 2)
        prof = DragnetProfile(rule, d)
        intervals = prof.intervals(50)
        for iv in intervals:
            assert prof.cardinality(iv.start) == d + iv.index - 1
            assert prof.cardinality(iv.end) == d + iv.index - 1
            assert prof.cardinality(iv.start - 1) == d + iv.index - 2
            assert prof.cardinality(iv.end + 1) == d + iv.index


def test_square_interval_lengths_step_by_two():
    rule = parse_rule("square", 20000)
    for d in (2, 5, 10, 25):
        prof = DragnetProfile(rule, d)
        lengths = [iv.length for iv in prof.intervals(30)]
        for a, b in zip(lengths, lengths[1:]):
            assert b == a + 2
        assert prof.first_block_site == d * d + 1


def test_interval_geometry_generic_rule():
    # for any rule, interval i spans {f(d+i-1)+1 .. f(d+i)}
    rule = parse_rule("factorial", 10**6)
    prof = DragnetProfile(rule, 3)
    iv = prof.interval(1)
    assert (iv.start, iv.end) == (7, 24)
    iv2 = prof.interval(2)
    assert (iv2.start, iv2.end) == (25, 120)


def test_horizon_is_hard():
    rule = parse_rule("square", 100)
    with pytest.raises(HorizonError):
        enumerate_jumps(rule, 101)
    with pytest.raises(HorizonError):
        rule.dragnet_size(102)
    with pytest.raises(HorizonError):
        DragnetProfile(rule, 10).interval(1)  # needs f(11) = 121 > horizon
    assert rule.with_horizon(200).horizon == 200


def test_geometric_base_and_monomial_validation():
    with pytest.raises(ValueError):
        geometric(1)
    with pytest.raises(ValueError):
        monomial(0)
    with pytest.raises(ValueError):
        linear(0)
    assert affine_odd().label() == "odd"


def test_membership():
    rule = parse_rule("square", 100)
    assert rule.is_jump(16)
    assert not rule.is_jump(15)
    assert rule.is_jump(1)
    with pytest.raises(HorizonError):
        rule.is_jump(101)


def test_iter_values_mod_matches_direct():
    for fam in (monomial(2), linear(3), affine_odd(), factorial(), geometric(2)):
        direct = []
        for n, v in zip(range(12), fam.iter_values()):
            direct.append(v % 7)
        modded = []
        for n, v in zip(range(12), fam.iter_values_mod(7)):
            modded.append(v)
        assert direct == modded
