import pytest

from exseq.genrand import (
    GenConfig,
    SplitMix64,
    Status,
    Variant,
    format_symbols,
    generate,
    generate_lex,
    generate_v20,
    generate_v21,
    parse_symbols,
    sample_seed,
    validate,
)
from exseq.jumps import parse_rule
from exseq.stats import staircase_floor

from oracles import exact_halt_pmf, plain_validate

# the documented stream contract: SplitMix64 from seed 1234567891011
SPLITMIX_REFERENCE = [
    5979551039428449045,
    12112870221386166246,
    16517995202442044525,
    2655658470387179931,
    4807272115425212521,
    12000955817396599527,
    9761720100966930097,
    6951670778055829044,
    8170064542586385680,
    9254001519157879975,
]


def test_splitmix_reference_stream():
    rng = SplitMix64(1234567891011)
    assert [rng.next_word() for _ in range(10)] == SPLITMIX_REFERENCE


def test_sample_seed_is_xor():
    assert sample_seed(0b1100, 0b1010) == 0b0110
    assert sample_seed(2**64 - 1, 1) == 2**64 - 2


@pytest.mark.parametrize(
    "seq,rule_name,expected",
    [
        ("1212", "odd", True),
        ("11", "square", False),
        ("123123", "geom:2", True),
        ("1213", "square", True),
        ("12131", "square", False),  # distance 4 repeat
    ],
)
def test_validate_examples(seq, rule_name, expected):
    symbols = parse_symbols(seq)
    rule = parse_rule(rule_name, max(len(symbols) - 1, 1))
    assert validate(symbols, rule) is expected


def test_symbol_formatting():
    assert format_symbols((1, 2, 3), 4) == "123"
    assert format_symbols((1, 12, 3), 12) == "1,12,3"
    assert parse_symbols("1,12,3") == (1, 12, 3)
    assert parse_symbols("123") == (1, 2, 3)


def test_v20_binary_always_halts_at_five():
    rule = parse_rule("square", 100)
    for seed in range(500):
        out = generate_v20(GenConfig(d=2, rule=rule, max_len=100, seed=seed))
        assert out.status is Status.HALTED
        assert out.halt_site == 5
        assert validate(out.sequence, rule)


def test_v20_never_halts_before_first_block_site():
    # dragnets below d^2 + 1 cannot cover the alphabet for the square rule
    rule = parse_rule("square", 64)
    for seed in range(300):
        out = generate_v20(GenConfig(d=4, rule=rule, max_len=16, seed=seed))
        assert out.status is Status.FULL_LENGTH
        assert len(out.sequence) == 16


def test_v20_matches_exact_tree_distribution_d3():
    # the scalar generator's halting law equals the exhaustively enumerated one
    rule = parse_rule("square", 50)
    pmf, full_mass = exact_halt_pmf(3, 50, [1, 4, 9, 16, 25, 36, 49])
    assert full_mass == 0
    n = 20000
    counts: dict[int, int] = {}
    for seed in range(n):
        out = generate_v20(GenConfig(d=3, rule=rule, max_len=50, seed=sample_seed(7, seed)), False)
        counts[out.halt_site] = counts.get(out.halt_site, 0) + 1
    assert set(counts) <= set(pmf)
    for j, p in pmf.items():
        exp = float(p) * n
        se = (float(p) * (1 - float(p)) * n) ** 0.5
        assert abs(counts.get(j, 0) - exp) <= 4 * se + 1


def test_determinism_same_config_same_outcome():
    rule = parse_rule("square", 2000)
    cfg = GenConfig(d=6, rule=rule, max_len=2000, seed=99)
    a = generate_v20(cfg)
    b = generate_v20(cfg)
    assert a == b
    cfg21 = GenConfig(d=6, rule=rule, max_len=600, seed=99, variant=Variant.V21)
    assert generate_v21(cfg21) == generate_v21(cfg21)


@pytest.mark.parametrize(
    "d,rule_name,max_len",
    [
        (4, "square", 200),
        (3, "geom:2", 200),
        (4, "factorial", 200),
        (5, "square", 300),
    ],
)
def test_generated_prefixes_always_validate(d, rule_name, max_len):
    rule = parse_rule(rule_name, max_len)
    for seed in range(2500):
        out = generate(GenConfig(d=d, rule=rule, max_len=max_len, seed=sample_seed(17, seed)))
        assert plain_validate(out.sequence, rule.distances)
        out21 = generate(
            GenConfig(d=d, rule=rule, max_len=max_len, seed=sample_seed(17, seed), variant=Variant.V21)
        )
        assert plain_validate(out21.sequence, rule.distances)


def test_v21_records_satisfy_staircase_bound():
    rule = parse_rule("square", 600)
    for seed in range(2000):
        out = generate_v21(GenConfig(d=5, rule=rule, max_len=600, seed=seed, variant=Variant.V21), False)
        assert out.status is Status.HALTED
        i, n = out.terminal
        assert i >= staircase_floor(5, n)
        assert out.halt_site == i + rule.distances[n - 1]
        assert out.halt_site <= 600


def test_v21_binary_terminal_site_at_most_four():
    rule = parse_rule("square", 50)
    for seed in range(300):
        out = generate_v21(GenConfig(d=2, rule=rule, max_len=50, seed=seed, variant=Variant.V21), False)
        i, n = out.terminal
        assert i <= 4


def test_v21_halts_left_of_v20():
    # the first-emptied-site record precedes the empty-candidate halt
    rule = parse_rule("square", 500)
    n = 4000
    mean20 = 0.0
    mean21 = 0.0
    for seed in range(n):
        o20 = generate_v20(GenConfig(d=4, rule=rule, max_len=500, seed=seed), False)
        o21 = generate_v21(GenConfig(d=4, rule=rule, max_len=500, seed=seed, variant=Variant.V21), False)
        mean20 += o20.halt_site
        mean21 += o21.terminal[0]
    assert mean21 / n < mean20 / n


def test_lex_odd_rule_alternates():
    rule = parse_rule("odd", 100)
    out = generate_lex(GenConfig(d=2, rule=rule, max_len=100, variant=Variant.LEX))
    assert out.status is Status.FULL_LENGTH
    assert out.sequence == tuple([1, 2] * 50)


def test_lex_linear_rule_halts():
    rule = parse_rule("linear:3", 1000)
    out = generate_lex(GenConfig(d=3, rule=rule, max_len=1000, variant=Variant.LEX))
    assert out.status is Status.HALTED
    assert validate(out.sequence, rule)


def test_lex_generate_dispatch():
    rule = parse_rule("square", 100)
    cfg = GenConfig(d=3, rule=rule, max_len=100, variant=Variant.LEX)
    assert generate(cfg) == generate_lex(cfg)


def test_config_validation():
    rule = parse_rule("square", 100)
    with pytest.raises(ValueError):
        GenConfig(d=1, rule=rule, max_len=10)
    with pytest.raises(ValueError):
        GenConfig(d=3, rule=rule, max_len=0)
    with pytest.raises(ValueError):
        GenConfig(d=3, rule=rule, max_len=102)  # horizon 100 < 101
