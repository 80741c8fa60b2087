from hypothesis import assume, given, settings
from hypothesis import strategies as st
from helpers import CORPUS, load

from conspd.analysis import Analysis, CallClass, classify_call, embeds, is_renaming, select_call, term_embeds
from conspd.kernel import FALSE, NIL, TRUE, ZERO, Ctor, Var, VarSupply, cons, rename_term, succ
from conspd.syntax import Call

NANDO = load("bool_first_nando")
PLAIN = load("bool_first_plain")
TYPECHECK = load("typecheck_hand")
x, s, fm, y, a, b, t, n = (Var(5000 + i, h) for i, h in enumerate(["x", "s", "fm", "y", "a", "b", "t", "n"]))


TC_CALL = Call("typechecko", (NIL, Var(6000, "term"), Ctor("some", (Ctor("integer"),))))


def ev(s_, f, r):
    return Call("evalo", (s_, f, r))


def test_renaming_examples():
    assert is_renaming((ev(s, x, TRUE),), (ev(s, fm, TRUE),)) == {s: s, x: fm}
    c = (ev(s, x, TRUE), Call("elemo", (x, s, y)))
    assert is_renaming(c, c) == {s: s, x: x, y: y}
    assert is_renaming((ev(s, x, TRUE),), (ev(s, x, FALSE),)) is None


def test_renaming_must_be_bijective():
    assert is_renaming((ev(s, x, TRUE),), (ev(s, s, TRUE),)) is None
    assert is_renaming((ev(s, s, TRUE),), (ev(s, x, TRUE),)) is None


def test_embedding_examples():
    assert embeds((ev(s, x, TRUE),), (ev(s, x, TRUE), ev(s, y, TRUE)))
    c = (ev(s, x, TRUE),)
    assert embeds(c, c)
    assert not embeds((Call("appendo", (x, y, t)),), (ev(x, s, TRUE),))


def test_embedding_is_order_preserving():
    c1 = (Call("p", (x,)), Call("q", (x,)))
    assert embeds(c1, (Call("p", (x,)), Call("r", ()), Call("q", (y,))))
    assert not embeds(c1, (Call("q", (x,)), Call("p", (x,))))


def test_term_embedding_diving_and_coupling():
    assert term_embeds(ZERO, succ(ZERO))
    assert term_embeds(x, succ(y))
    assert term_embeds(cons(ZERO, NIL), cons(succ(ZERO), cons(TRUE, NIL)))
    assert not term_embeds(succ(ZERO), ZERO)
    assert not term_embeds(ZERO, x)


def test_classification_examples():
    sup = VarSupply(10_000)
    an = Analysis(NANDO.program)
    # The connectives are non-recursive, so they are Static, which outranks
    # the single-conjunct (and) and three-of-four (nand) unfoldings.
    assert an.classify(Call("ando", (a, b, TRUE)), sup) == CallClass.STATIC
    assert an.unfold_count(Call("ando", (a, b, TRUE)), sup) == 1
    assert an.classify(Call("nando", (a, b, TRUE)), sup) == CallClass.STATIC
    assert an.unfold_count(Call("nando", (a, b, TRUE)), sup) == 3
    assert an.classify(ev(s, x, y), sup) == CallClass.UNSAFE
    assert an.classify(ev(s, Ctor("neg", (x,)), y), sup) == CallClass.DETERMINISTIC
    assert an.classify(Call("elemo", (ZERO, s, y)), sup) == CallClass.DETERMINISTIC
    assert an.classify(Call("elemo", (n, s, TRUE)), sup) == CallClass.UNSAFE
    tc = Analysis(TYPECHECK.program)
    assert tc.classify(TC_CALL, sup) == CallClass.LESS_BRANCHING


def test_branch_limits_override():
    # A caller-provided limit changes what counts as less branching.
    conf = (TC_CALL,)
    assert classify_call(TYPECHECK.program, None, conf, 0) == CallClass.LESS_BRANCHING
    limit = Analysis(TYPECHECK.program).unfold_count(TC_CALL, VarSupply(10_000))
    assert classify_call(TYPECHECK.program, {"typechecko": limit}, conf, 0) == CallClass.UNSAFE


def test_selection_examples():
    conf = (ev(s, x, a), ev(s, y, b), Call("ando", (a, b, TRUE)))
    assert select_call(NANDO.program, None, conf) == 2
    assert select_call(PLAIN.program, None, conf) == 2
    assert select_call(PLAIN.program, None, (Call("elemo", (x, s, TRUE)),)) is None


def test_selection_prefers_class_then_leftmost():
    el = Call("elemo", (ZERO, s, y))
    assert select_call(PLAIN.program, None, (ev(s, x, y), el, Call("ando", (a, b, TRUE)))) == 2
    assert select_call(PLAIN.program, None, (ev(s, x, y), el, el)) == 1
    tc = select_call(TYPECHECK.program, None, (Call("lookupo", (x, n, t)), TC_CALL))
    assert tc == 1


def test_static_never_on_a_cycle():
    for p in CORPUS.glob("*.mk"):
        an = Analysis(load(p.stem).program)
        for rel in an.recursive:
            assert not an.is_static(rel)
            call = Call(rel, tuple(Var(90_000 + i) for i in range(an.program[rel].arity)))
            assert an.classify(call, VarSupply(100_000)) != CallClass.STATIC


# Generated configurations ---------------------------------------------------

VARS = [Var(7000 + i, f"v{i}") for i in range(4)]
RELS = {"p": 1, "q": 2, "r": 2}


def terms():
    return st.recursive(
        st.sampled_from(VARS + [ZERO, NIL]),
        lambda sub: st.one_of(st.builds(succ, sub), st.builds(cons, sub, sub)),
        max_leaves=4,
    )


@st.composite
def calls(draw):
    rel = draw(st.sampled_from(sorted(RELS)))
    return Call(rel, tuple(draw(terms()) for _ in range(RELS[rel])))


confs = st.lists(calls(), min_size=1, max_size=3).map(tuple)


def rename(conf, offset):
    m = {v: Var(v.idx + offset, v.hint) for v in VARS}
    return tuple(Call(c.rel, tuple(rename_term(a, m) for a in c.args)) for c in conf)


@settings(max_examples=200, deadline=None)
@given(confs, confs)
def test_renaming_is_an_equivalence(c1, c2):
    c1b = rename(c1, 100)
    assert is_renaming(c1, c1) is not None
    r = is_renaming(c1, c1b)
    assert r is not None and is_renaming(c1b, c1) is not None
    if is_renaming(c1b, c2) is not None:
        assert is_renaming(c1, c2) is not None
    # Applying the stored bijection maps one onto the other.
    assert rename(c1, 100) == tuple(Call(c.rel, tuple(rename_term(x_, r) for x_ in c.args)) for c in c1)


@settings(max_examples=200, deadline=None)
@given(confs, confs, confs)
def test_embedding_reflexive_transitive(c1, c2, c3):
    assert embeds(c1, c1)
    if embeds(c1, c2) and embeds(c2, c3):
        assert embeds(c1, c3)


@settings(max_examples=200, deadline=None)
@given(confs, calls(), st.integers(0, 3), st.data())
def test_embedding_under_growth(c1, extra, pos, data):
    # Inserting calls and replacing a variable by a bigger term keep embedding.
    # Variables only embed into variables, so the bigger term must contain one.
    grown = c1[:pos] + (extra,) + c1[pos:]
    assert embeds(c1, grown)
    v = data.draw(st.sampled_from(VARS))
    bigger = data.draw(terms())
    assume(v in {w for c in c1 for w in _vars(c)} and _vars(Call("t", (bigger,))))
    replaced = tuple(Call(c.rel, tuple(rename_term(a_, {v: succ(bigger)}) for a_ in c.args)) for c in c1)
    assert embeds(c1, replaced)


def _vars(c):
    from conspd.kernel import vars_of

    return vars_of(c.args)


@settings(max_examples=100, deadline=None)
@given(st.lists(calls(), min_size=1, max_size=60))
def test_whistle_bounds_non_embedding_chains(seq):
    # Greedy chain in which no element embeds an earlier one.
    chain = []
    for c in seq:
        conf = (c,)
        if not any(embeds(p, conf) for p in chain):
            chain.append(conf)
    assert len(chain) <= 40
