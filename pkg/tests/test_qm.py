import pytest
from hypothesis import given, strategies as st

from conftest import nonempty_words, words
from ggqm.cocycle import TorusBraid, TorusClass
from ggqm.qm import (
    BrooksPattern,
    QuasimorphismSpec,
    brooks_eval,
    defect_estimate,
    homogenize,
    inversion_automorphisms,
    normal_vanishing_check,
    symmetrize_eval,
)
from ggqm.words import (
    EMPTY,
    Presentation,
    WordError,
    concat,
    invert,
    parse_word,
    power,
    surface_relator,
)

patterns = nonempty_words(2, 3)


def spec_for(p, **kw):
    return QuasimorphismSpec(Presentation.free(2), (BrooksPattern(p, 1.0),), **kw)


def commutator(k):
    return power(parse_word("x1 x2 X1 X2"), k)


@given(words(2, 10), patterns)
def test_raw_count_matches_brute_force(w, p):
    s, q = w.letters, p.letters
    qi = invert(p).letters
    pos = sum(s[i : i + len(q)] == q for i in range(len(s)))
    neg = sum(s[i : i + len(qi)] == qi for i in range(len(s)))
    assert brooks_eval(BrooksPattern(p), w) == pos - neg


@given(words(2, 8), patterns, st.integers(-6, 6))
def test_homogeneous_exactly_linear_in_powers(g, p, k):
    phi = spec_for(p)
    assert phi(power(g, k)) == k * phi(g)


@given(words(2, 8), words(2, 8), patterns)
def test_conjugacy_invariance(g, h, p):
    phi = spec_for(p)
    assert phi(concat(concat(h, g), invert(h))) == phi(g)


@given(nonempty_words(2, 6), patterns)
def test_homogenization_is_limit_of_raw_counts(g, p):
    # phi_bar(g) = lim phi(g^N)/N; the cyclic count is the exact limit
    phi = spec_for(p)
    raw = [brooks_eval(BrooksPattern(p), power(g, n)) / n for n in (64, 128)]
    assert abs(raw[1] - phi(g)) <= abs(raw[0] - phi(g)) + 1e-12
    assert abs(raw[1] - phi(g)) <= 2 * len(p) / 128


def test_homomorphism_has_zero_defect():
    spec = QuasimorphismSpec.brooks("x1")
    assert defect_estimate(spec, 2000, seed=3).max_observed == 0.0


def test_defect_estimate_positive_and_deterministic():
    spec = QuasimorphismSpec.brooks("x1 x2")
    a = defect_estimate(spec, 3000, seed=1)
    b = defect_estimate(spec, 3000, seed=1, workers=2)
    assert a == b
    assert a.max_observed > 0
    assert a.witness is not None


@given(st.integers(-10, 10), patterns)
def test_symmetrized_vanishes_on_commutator_powers(k, p):
    phi = spec_for(p, symmetrized=True)
    assert phi(commutator(k)) == 0.0
    assert symmetrize_eval(phi, commutator(k)) == 0.0


@given(words(2, 8), patterns)
def test_symmetrized_invariant_under_inversions(g, p):
    phi = spec_for(p, symmetrized=True)
    for s in inversion_automorphisms():
        assert phi(s(g)) == phi(g)


def test_symmetrized_nonzero_example():
    # found by brute force over patterns of length <= 4
    phi = QuasimorphismSpec.brooks("x1 x1 x2 x1", symmetrized=True)
    assert phi(parse_word("x1 x1 x2 x1 x2 x2")) == 0.25


@given(words(2, 8), st.integers(-5, 5), st.integers(-5, 5), patterns)
def test_central_coordinate_ignored(w, m, n, p):
    phi = spec_for(p, symmetrized=True, pre_map="torus_relative")
    g = TorusBraid((1, 2), w)
    c = TorusBraid((m, n), EMPTY)
    assert phi(g * c) == phi(g)
    assert normal_vanishing_check(phi, [(g, c)]).ok


@given(words(4, 10))
def test_retract_composition(w):
    phi = QuasimorphismSpec.brooks("x1", pre_map="handlebody_retract")
    a = sum(1 if x == 1 else -1 if x == -1 else 0 for x in w)
    assert phi(w) == a
    assert phi(surface_relator(2)) == 0


def test_torus_class_projection():
    phi = QuasimorphismSpec.brooks("x2", coefficient=2.0)
    assert phi(TorusClass(3, -4)) == -8.0
    with pytest.raises(WordError):
        QuasimorphismSpec.brooks("x1 x2")(TorusClass(1, 1))


def test_spec_validation():
    with pytest.raises(WordError):
        QuasimorphismSpec(Presentation.surface(2))
    with pytest.raises(WordError):
        QuasimorphismSpec(Presentation.free(3), symmetrized=True)
    with pytest.raises(WordError):
        QuasimorphismSpec(Presentation.free(3), pre_map="torus_relative")
    with pytest.raises(WordError):
        QuasimorphismSpec(Presentation.free(2), pre_map="nope")
    with pytest.raises(WordError):
        BrooksPattern(EMPTY)


def test_homogenize_pattern_and_spec_agree():
    g = parse_word("x1 x2 x1 x2 X1")
    p = BrooksPattern(parse_word("x1 x2"))
    spec = QuasimorphismSpec(Presentation.free(2), (p,))
    assert homogenize(p, g) == homogenize(spec, g) == spec(g)


def test_describe_roundtrip():
    spec = QuasimorphismSpec.brooks("x1 X2", 0.5, symmetrized=True)
    d = spec.describe()
    assert d == {"base_rank": 2, "terms": [["x1 X2", 0.5]], "symmetrized": True, "pre_map": "identity"}
