import random
from itertools import combinations, permutations, product

import pytest

from hybridmu.annotation import (ASeq, Name, SafRule, aseq, ann_less, below, check_saf_instance,
                                 check_thinning, meet, names_theory, parse_name, restrict,
                                 saf_premises, show_aseq, subseq, trim_control,
                                 wellformed_problem)
from hybridmu.calculus import RuleError
from hybridmu.syntax import At, Box, Or, dependency_order, neq, parse

x0, x1, x2, y0, y1 = Name("x", 0), Name("x", 1), Name("x", 2), Name("y", 0), Name("y", 1)
PHI = parse("nu x. [](x \\/ []x)")
PSI = parse("nu y. <>(y /\\ nu x. [](x \\/ []x))")
# x < y by first occurrence
ORDER = dependency_order(Or(PHI, PSI))


def at(i, f):
    return At(i, parse(f) if isinstance(f, str) else f)


def test_names():
    assert parse_name("x.0") == x0 and str(y1) == "y.1"
    for bad in ("x", "x.", ".1", "x.a"):
        with pytest.raises(ValueError):
            parse_name(bad)


def test_restrict():
    assert ORDER.less("x", "y")
    assert restrict((x0, y0), "x", ORDER) == (x0,)
    assert restrict((), "x", ORDER) == ()
    assert restrict((x0, x1, y0), "y", ORDER) == (x0, x1, y0)
    assert below((x0, x1), "x", ORDER) and not below((x0, y0), "x", ORDER)


def test_restrict_idempotent_and_monotone():
    a = (x0, y0, x1, y1)
    subs = [tuple(a[i] for i in c) for k in range(5) for c in combinations(range(4), k)]
    for b in subs:
        for v in ("x", "y"):
            assert restrict(restrict(b, v, ORDER), v, ORDER) == restrict(b, v, ORDER)
            for c in subs:
                if subseq(b, c):
                    assert subseq(restrict(b, v, ORDER), restrict(c, v, ORDER))


def test_subseq_examples():
    assert subseq("xy", "xzy")
    assert subseq("", "abc")
    assert not subseq("yx", "xy")


def test_meet_examples():
    assert meet("xzy", "xy") == tuple("xy")
    assert meet("ab", "ba") is None
    assert meet("a", "") == ()


def _common(a, b):
    return {w for k in range(len(a) + 1) for w in combinations(a, k) if subseq(w, b)}


def _check_meet(a, b):
    m = meet(a, b)
    common = _common(a, b)
    longest = max(map(len, common))
    assert (m is None) == (sum(len(w) == longest for w in common) > 1)
    if m is not None:
        assert subseq(m, a) and subseq(m, b)
        assert all(subseq(w, m) for w in common)
    return m


def test_meet_is_greatest_lower_bound():
    # for two subsequences of one non-repeating word (a control) the common
    # subsequences are directed, so meet is defined and is their join
    ctl = tuple("abcdef")
    subs = sorted(_common(ctl, ctl))
    assert len(subs) == 64
    for a in subs:
        for b in subs:
            assert _check_meet(a, b) is not None


def test_meet_unique_longest_is_not_always_a_bound():
    # outside one control the unique longest common subsequence need not lie
    # above every common subsequence
    assert meet("abc", "bca") == tuple("bc")
    assert not subseq("a", "bc")
    words = [w for n in range(5) for w in permutations("abcd", n)]
    for a in words:
        for b in words:
            m = meet(a, b)
            longest = max(map(len, _common(a, b)))
            assert m is None or len(m) == longest


def test_ann_less_examples():
    o = dependency_order(PHI)
    assert ann_less((x0,), (), (x0,), o)
    assert ann_less((x0,), (x1,), (x0, x1), o)
    assert not ann_less((x1,), (x0,), (x0, x1), o)
    assert not ann_less((x0,), (x0,), (x0,), o)
    # clause 1 only counts greatest fixpoint variables
    m = dependency_order(parse("mu x. <>x"))
    assert not ann_less((x0,), (), (x0,), m)
    with pytest.raises(ValueError):
        ann_less((x1,), (), (x0,), o)


@pytest.mark.parametrize("text", ["nu x. nu y. <>(x /\\ y)", "mu x. nu y. <>(x /\\ y)",
                                  "nu x. mu y. <>(x /\\ y)"])
def test_ann_less_is_strict_partial_order(text):
    o = dependency_order(parse(text))
    a = (x0, y0, x1, y1)
    subs = [tuple(a[i] for i in c) for k in range(5) for c in combinations(range(4), k)]
    less = {(b, c) for b in subs for c in subs if ann_less(b, c, a, o)}
    assert all((b, b) not in less for b in subs)
    assert all((c, b) not in less for b, c in less)
    assert all((b, d) in less for b, c in less for c2, d in less if c == c2)


def test_ann_less_total_on_nondecreasing_nu_annotations():
    o = dependency_order(parse("nu x. nu y. <>(x /\\ y)"))
    a = (x0, y0, x1, y1)
    subs = [tuple(a[i] for i in c) for k in range(5) for c in combinations(range(4), k)]
    nd = [w for w in subs if all(o.rank(u.var) <= o.rank(v.var) for u, v in zip(w, w[1:]))]
    for b in nd:
        for c in nd:
            if b != c:
                assert ann_less(b, c, a, o) != ann_less(c, b, a, o)


def test_wellformed():
    assert wellformed_problem(aseq((x0, y0), [(at("j", PHI), (x0,))]), ORDER) is None
    assert "repeats" in wellformed_problem(aseq((x0, x0), []), ORDER)
    assert "decreasing" in wellformed_problem(aseq((y0, x0), [(at("j", PHI), (y0, x0))]), ORDER)
    assert "subsequence" in wellformed_problem(aseq((x0,), [(at("j", PHI), (x1,))]), ORDER)


def test_rec_example():
    concl = aseq((x0,), [(at("j", PHI), (x0,)), (at("j", Box(PHI)), (x0,))])
    rule = SafRule("rec", (at("j", PHI), (x0,)), name=x1)
    full, = saf_premises(concl, rule, ORDER)
    assert check_saf_instance(concl, rule, [full], order=ORDER)
    target = aseq((x0, x1), [(at("j", "[]((nu x. [](x \\/ []x)) \\/ []nu x. [](x \\/ []x))"),
                              (x0, x1)),
                             (at("j", Box(PHI)), (x0,))])
    # the expected label, after weakening away the principal
    assert check_saf_instance(full, SafRule("weak"), [target])
    assert show_aseq(target) == \
        "x.0 x.1 |- @'j []((nu x. [](x \\/ []x)) \\/ []nu x. [](x \\/ []x)) ^ x.0 x.1, " \
        "@'j []nu x. [](x \\/ []x) ^ x.0"


def test_rec_side_conditions():
    concl = aseq((x0,), [(at("j", PHI), (x0,))])
    with pytest.raises(RuleError, match="not fresh"):
        saf_premises(concl, SafRule("rec", (at("j", PHI), (x0,)), name=x0), ORDER)
    with pytest.raises(RuleError, match="name of the unfolded"):
        saf_premises(concl, SafRule("rec", (at("j", PHI), (x0,)), name=y0), ORDER)
    high = aseq((x0, y0), [(at("j", PHI), (x0, y0))])
    with pytest.raises(RuleError, match="not <="):
        saf_premises(high, SafRule("rec", (at("j", PHI), (x0, y0)), name=x1), ORDER)
    with pytest.raises(RuleError, match="not <="):
        saf_premises(high, SafRule("eta", (at("j", PHI), (x0, y0))), ORDER)


def test_reset_then_exp_example():
    g = at("k", Or(PHI, Box(PHI)))
    concl = aseq((x0, x1), [(g, (x0, x1))])
    rule = SafRule("reset", name=x0)
    mid, = saf_premises(concl, rule, ORDER)
    assert mid == aseq((x0, x1), [(g, (x0,))])
    assert check_saf_instance(concl, rule, [mid], order=ORDER)
    last = aseq(trim_control(mid.control, mid.members), mid.members)
    assert last == aseq((x0,), [(g, (x0,))])
    assert check_saf_instance(mid, SafRule("exp"), [last])
    # the annotation may not shrink past the meet with the new control
    with pytest.raises(RuleError):
        check_saf_instance(mid, SafRule("exp"), [aseq((x0,), [(g, ())])])


def test_reset_side_conditions():
    g = at("k", Or(PHI, Box(PHI)))
    h = at("k", PHI)
    with pytest.raises(RuleError, match="not in control"):
        saf_premises(aseq((x0,), [(g, (x0,))]), SafRule("reset", name=x1), ORDER)
    # x.0 in an annotation not extended by another name of x
    bad = aseq((x0, x1), [(g, (x0, x1)), (h, (x0,))])
    with pytest.raises(RuleError, match="does not extend"):
        saf_premises(bad, SafRule("reset", name=x0), ORDER)
    # several extensions merge to the same prefix
    two = aseq((x0, x1, x2), [(g, (x0, x1)), (h, (x0, x2))])
    p, = saf_premises(two, SafRule("reset", name=x0), ORDER)
    assert p == aseq((x0, x1, x2), [(g, (x0,)), (h, (x0,))])


def test_thinning_example():
    concl = aseq((x0, y0), [(at("j", PHI), (x0,)), (at("j", Box(PHI)), (x0,)),
                            (at("j", PHI), (y0,))])
    prem = aseq((x0,), [(at("j", PHI), (x0,)), (at("j", Box(PHI)), (x0,))])
    assert check_thinning(concl, prem, ORDER)
    assert check_saf_instance(concl, SafRule("thin"), [prem], order=ORDER)
    # keeping the larger annotation is wrong
    wrong = aseq((y0,), [(at("j", PHI), (y0,)), (at("j", Box(PHI)), (x0,))])
    with pytest.raises(RuleError):
        check_thinning(concl, wrong, ORDER)
    with pytest.raises(RuleError, match="larger one"):
        check_thinning(concl, aseq((x0, y0), [(at("j", PHI), (y0,)),
                                               (at("j", Box(PHI)), (x0,))]), ORDER)
    # untrimmed control
    with pytest.raises(RuleError, match="trimmed"):
        check_thinning(concl, aseq((x0, y0), prem.members), ORDER)
    # equal annotations cannot be thinned
    same = ASeq((x0,), frozenset({(at("j", PHI), (x0,))}))
    with pytest.raises(RuleError):
        check_thinning(same, aseq((x0,), []), ORDER)


def test_names_theory():
    s = aseq((x0, y0), [(at("j", PHI), (x0,)), (at("j", Box(PHI)), (x0,)),
                        (at("j", PSI), (y0,))])
    assert names_theory(s, x0) == {at("j", PHI), at("j", Box(PHI))}
    assert names_theory(s, y0) == {at("j", PSI)}
    assert names_theory(s, x1) == set()


def test_plain_rules():
    f = at("i", "p \\/ q")
    concl = aseq((x0,), [(f, (x0,))])
    p, = saf_premises(concl, SafRule("or", (f, (x0,))), ORDER)
    assert p.members == concl.members | {(at("i", "p"), (x0,)), (at("i", "q"), (x0,))}
    with pytest.raises(RuleError, match="takes 2"):
        check_saf_instance(aseq((), [(at("i", "p /\\ q"), ())]),
                           SafRule("and", (at("i", "p /\\ q"), ())), [concl], order=ORDER)
    e = aseq((), [(at("i", "p"), ()), (neq("i", "j"), (x0,))])
    p, = saf_premises(e, SafRule("eq", (at("i", "p"), ()), (neq("i", "j"), (x0,))), ORDER)
    assert (at("j", "p"), ()) in p.members
    p, = saf_premises(e, SafRule("com", (neq("i", "j"), (x0,))), ORDER)
    assert (neq("j", "i"), (x0,)) in p.members


def test_mod_instance():
    c = aseq((x0,), [(at("i", "[]p"), (x0,)), (at("i", "<>q"), ())])
    r = SafRule("mod", (at("i", "[]p"), (x0,)), nominal="k")
    p = aseq((x0,), set(c.members) | {(at("k", "p"), (x0,)), (at("k", "q"), ())})
    assert check_saf_instance(c, r, [p])
    with pytest.raises(RuleError, match="not fresh"):
        check_saf_instance(c, SafRule("mod", r.principal, nominal="i"), [p])
    # a diamond witness must keep its own annotation
    bad = aseq((x0,), set(c.members) | {(at("k", "p"), (x0,)), (at("k", "q"), (x0,))})
    with pytest.raises(RuleError, match="unexpected"):
        check_saf_instance(c, r, [bad])
