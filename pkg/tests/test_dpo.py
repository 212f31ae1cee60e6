"""Double-pushout steps on small hosts, worked out by hand."""

import pytest

from tgr.dpo import (
    Match,
    derive,
    derive_rational,
    find_matches,
    induced_parallel_redex,
    pushout,
    pushout_complement,
    track_substitution,
)
from tgr.graphs import RationalTerm, TermGraph, unravel
from tgr.parallel import enumerate_occurrences
from tgr.rules import (
    TGRS,
    EvaluationRule,
    RewriteRule,
    graph_of_rule,
    graph_trs,
)
from tgr.terms import BOTTOM, Signature, parse_term, var

SIG = Signature.of(
    {"a": 0, "b": 0, "f": 1, "g": 1, "cdr": 1, "cons": 2, "p": 2}
)


def t(text):
    return parse_term(SIG, text)


def g_rule(name, lhs, rhs):
    return graph_of_rule(RewriteRule.of(name, t(lhs), t(rhs)), SIG)


R_F = g_rule("Rf", "f(x)", "g(x)")
R_CDR = g_rule("Rcdr", "cdr(cons(x, y))", "y")
R_FGG = g_rule("Rfgg", "f(x)", "g(g(x))")
R_FST = g_rule("Rfst", "p(x, y)", "x")


def graph(nodes, labels, succs):
    return TermGraph.of(nodes, labels, succs)


def the_match(rule, host, at):
    found = [m for m in find_matches(host, rule) if m.root_image == at]
    assert len(found) == 1
    return found[0]


# ---------------------------------------------------------------------------
# Matching


def test_find_matches_ordered_by_rule_then_node():
    host = graph(
        ["n1", "n2", "n3"], {"n1": "f", "n2": "f", "n3": "a"},
        {"n1": ("n2",), "n2": ("n3",)},
    )
    r_a = g_rule("Ra", "f(x)", "g(x)")
    r_b = g_rule("Rb", "f(x)", "a")
    ms = find_matches(host, TGRS(SIG, (r_b, r_a)))
    assert [(m.rule.name, m.root_image) for m in ms] == [
        ("Ra", "n1"), ("Ra", "n2"), ("Rb", "n1"), ("Rb", "n2"),
    ]


def test_match_maps_the_whole_lhs():
    host = graph(
        ["r", "k", "u", "v"], {"r": "cdr", "k": "cons", "u": "a"},
        {"r": ("k",), "k": ("u", "v")},
    )
    (m,) = find_matches(host, R_CDR)
    assert m.g.mapping == {"l": "r", "l.1": "k", "x": "u", "y": "v"}


def test_variables_may_match_labelled_nodes():
    host = graph(["r", "c"], {"r": "f", "c": "a"}, {"r": ("c",)})
    (m,) = find_matches(host, R_F)
    assert m.g.mapping["x"] == "c"


# ---------------------------------------------------------------------------
# Pushout complement


def test_pushout_complement_erases_only_the_root_content():
    host = graph(["r", "c"], {"r": "f", "c": "a"}, {"r": ("c",)})
    D, d = pushout_complement(the_match(R_F, host, "r"))
    assert set(D.nodes) == {"r", "c"}
    assert D.is_empty_node("r")
    assert D.labels["c"] == "a"
    assert d.mapping == {"l": "r", "x": "c"}


def test_pushout_complement_identification_condition():
    loop = graph(["n"], {"n": "f"}, {"n": ("n",)})
    r_ff = g_rule("Rff", "f(f(x))", "a")
    (m,) = find_matches(loop, r_ff)  # root and inner f both land on n
    with pytest.raises(ValueError, match="identification"):
        pushout_complement(m)


def test_variable_on_root_image_is_fine():
    # a variable (unlabelled in L) may share the root's image: cdr over
    # its own result, the step that produces a hole.
    host = graph(
        ["c", "k", "u"], {"c": "cdr", "k": "cons", "u": "a"},
        {"c": ("k",), "k": ("u", "c")},
    )
    m = the_match(R_CDR, host, "c")
    assert m.g.mapping["y"] == "c"
    D, _ = pushout_complement(m)
    assert D.is_empty_node("c")


# ---------------------------------------------------------------------------
# Pushout


def test_pushout_square_commutes_and_covers():
    host = graph(["r", "c"], {"r": "f", "c": "a"}, {"r": ("c",)})
    m = the_match(R_F, host, "r")
    D, d = pushout_complement(m)
    H, h, b = pushout(R_F, D, d)
    for n in R_F.K.nodes:
        assert h.mapping[R_F.r[n]] == b.mapping[d.mapping[n]]
    assert set(h.mapping.values()) | set(b.mapping.values()) == set(H.nodes)


def test_pushout_fresh_nodes_for_new_structure():
    host = graph(["r", "c"], {"r": "f", "c": "a"}, {"r": ("c",)})
    drv = derive(the_match(R_FGG, host, "r"))
    assert set(drv.H.nodes) == {"r", "c", "h#0"}
    assert drv.H.labels["r"] == "g"
    assert drv.H.succs["r"] == ("h#0",)
    assert drv.H.labels["h#0"] == "g"
    assert drv.H.succs["h#0"] == ("c",)


def test_pushout_merges_keep_least_host_id():
    # cdr(cons(a, b)): the root is glued onto the second argument, so the
    # class {r, yb} keeps id r but inherits yb's label.
    host = graph(
        ["r", "k", "xa", "yb"], {"r": "cdr", "k": "cons", "xa": "a", "yb": "b"},
        {"r": ("k",), "k": ("xa", "yb")},
    )
    drv = derive(the_match(R_CDR, host, "r"))
    assert drv.track["yb"] == "r"
    assert drv.H.labels["r"] == "b"
    assert drv.H.succs["k"] == ("xa", "r")
    assert unravel(drv.H, "r", 4) == t("b")


def test_pushout_conflicting_content_rejected():
    # a hand-built rule whose right leg identifies both variables forces
    # a and b onto one node.
    L = graph(["l", "x", "y"], {"l": "p"}, {"l": ("x", "y")})
    K = graph(["l", "x", "y"], {}, {})
    R = graph(["v"], {}, {})
    er = EvaluationRule("bad", L, "l", K, R, {"l": "v", "x": "v", "y": "v"})
    host = graph(
        ["r", "u", "w"], {"r": "p", "u": "a", "w": "b"},
        {"r": ("u", "w")},
    )
    m = the_match(er, host, "r")
    D, d = pushout_complement(m)
    with pytest.raises(ValueError, match="conflicting"):
        pushout(er, D, d)


# ---------------------------------------------------------------------------
# Derivations


def test_derive_simple_step():
    host = graph(["r", "c"], {"r": "f", "c": "a"}, {"r": ("c",)})
    drv = derive(the_match(R_F, host, "r"))
    assert unravel(drv.H, "r", 4) == t("g(a)")
    assert drv.track == {"r": "r", "c": "c"}


def test_derive_inside_a_cycle():
    host = graph(
        ["c", "k", "u"], {"c": "cdr", "k": "cons", "u": "a"},
        {"c": ("k",), "k": ("u", "c")},
    )
    drv = derive(the_match(R_CDR, host, "c"))
    assert drv.H.is_empty_node("c")
    assert drv.H.succs["k"] == ("u", "c")
    assert drv.track == {"c": "c", "k": "k", "u": "u"}


def test_track_substitution_variables_and_holes():
    host = graph(["r", "v"], {"r": "f"}, {"r": ("v",)})
    drv = derive(the_match(R_F, host, "r"))
    assert track_substitution(drv) == {"v": var("v")}

    cyc = graph(
        ["c", "k", "u"], {"c": "cdr", "k": "cons", "u": "a"},
        {"c": ("k",), "k": ("u", "c")},
    )
    drv = derive(the_match(R_CDR, cyc, "c"))
    assert track_substitution(drv) == {"c": BOTTOM}


def test_track_substitution_respects_existing_holes():
    host = graph(["r", "v"], {"r": "f"}, {"r": ("v",)})
    drv = derive(the_match(R_F, host, "r"))
    assert track_substitution(drv, frozenset(["v"])) == {"v": BOTTOM}


def test_track_substitution_rejects_identified_variables():
    L = graph(["l", "x", "y"], {"l": "p"}, {"l": ("x", "y")})
    K = graph(["l", "x", "y"], {}, {})
    R = graph(["v"], {}, {})
    er = EvaluationRule("bad", L, "l", K, R, {"l": "v", "x": "v", "y": "v"})
    host = graph(["r", "u", "w"], {"r": "p"}, {"r": ("u", "w")})
    drv = derive(the_match(er, host, "r"))
    with pytest.raises(ValueError, match="same node"):
        track_substitution(drv)


def test_derive_rational_propagates_point_and_names():
    host = graph(["r", "v"], {"r": "f"}, {"r": ("v",)})
    rt = RationalTerm(host, "r", frozenset(), (("v", "acc"),))
    drv, after = derive_rational(rt, the_match(R_F, host, "r"))
    assert after.point == "r"
    assert after.var_names == (("v", "acc"),)
    assert after.unravel(4) == t("g(acc)")


def test_derive_rational_collapse_to_hole():
    host = graph(
        ["c", "k", "u"], {"c": "cdr", "k": "cons", "u": "a"},
        {"c": ("k",), "k": ("u", "c")},
    )
    rt = RationalTerm(host, "c")
    _, after = derive_rational(rt, the_match(R_CDR, host, "c"))
    assert after.point == "c"
    assert after.bottoms == frozenset(["c"])
    assert after.unravel(8) == BOTTOM


def test_derive_rational_rejects_foreign_host():
    host = graph(["r", "c"], {"r": "f", "c": "a"}, {"r": ("c",)})
    other = graph(["r", "c"], {"r": "f", "c": "b"}, {"r": ("c",)})
    m = the_match(R_F, other, "r")
    with pytest.raises(ValueError, match="carrier"):
        derive_rational(RationalTerm(host, "r"), m)


def test_induced_parallel_redex_on_a_loop():
    loop = graph(["n"], {"n": "f"}, {"n": ("n",)})
    rt = RationalTerm(loop, "n")
    (m,) = find_matches(loop, R_F)
    rs = induced_parallel_redex(rt, m, SIG)
    assert not rs.is_finite()
    assert rs.count_below(3) == 3  # (), (1,), (1, 1)


def test_induced_parallel_redex_finite_host():
    host = graph(
        ["n1", "n2", "n3"], {"n1": "f", "n2": "f", "n3": "a"},
        {"n1": ("n2",), "n2": ("n3",)},
    )
    rt = RationalTerm(host, "n1")
    m = the_match(R_F, host, "n2")
    rs = induced_parallel_redex(rt, m, SIG)
    assert rs.is_finite()
    assert enumerate_occurrences(rs, maxlen=8) == [(1,)]
