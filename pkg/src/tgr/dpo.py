"""Graph rewriting by double pushout, with node tracking.

A rewrite step at a match ``g : L -> G`` of an evaluation rule L <- K -> R:

1. *Pushout complement*: D is G with the label and successors removed at the
   image of the root.  This requires the identification condition — no other
   labelled node of L may share the root's image — which holds automatically
   for matches of non-self-overlapping rules.
2. *Pushout*: H glues R and D along K, identifying r(n) with g(n) for every
   node n of K.  The gluing is computed with a union-find; merged classes
   keep the least involved D-node id, classes built only from R get fresh
   ids.

Because D keeps every node of G, the D-to-H leg of the pushout is a total
*track* function on G's nodes: it says where each old node went.  Collapsing
rules can merge several old nodes into one (for instance a self-application
collapsing onto itself), and the track function records exactly that.

`track_substitution` recovers the term-level substitution relating the
unravelings before and after a step: each variable of H is either a tracked
variable of G or undefined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Sequence, Tuple, Union

from .graphs import (
    GraphMorphism,
    NodeId,
    RationalTerm,
    TermGraph,
    check_morphism,
    find_tree_morphisms,
    node_key,
)
from .parallel import RationalRedexSet
from .rules import TGRS, EvaluationRule, unravel_rule
from .terms import BOTTOM, FiniteTerm, Signature, var


# ---------------------------------------------------------------------------
# Matching


@dataclass(frozen=True)
class Match:
    """An occurrence of a rule's left-hand side in a host graph."""

    rule: EvaluationRule
    g: GraphMorphism  # L -> G

    @property
    def host(self) -> TermGraph:
        return self.g.dst

    @property
    def root_image(self) -> NodeId:
        return self.g.mapping[self.rule.root]

    def describe(self) -> str:
        return f"{self.rule.name} at {self.root_image}"


def find_matches(
    G: TermGraph, rules: Union[EvaluationRule, TGRS, Sequence[EvaluationRule]]
) -> List[Match]:
    """All matches of the given rule(s) in G.

    Sorted by rule name, then by root image; a tree left-hand side has at
    most one match per root image, so this order is total.
    """
    if isinstance(rules, EvaluationRule):
        rule_list: Sequence[EvaluationRule] = [rules]
    elif isinstance(rules, TGRS):
        rule_list = rules.rules
    else:
        rule_list = rules
    out = []
    for rule in sorted(rule_list, key=lambda r: r.name):
        for f in find_tree_morphisms(rule.L, rule.root, G):
            out.append(Match(rule, f))
    out.sort(key=lambda m: (m.rule.name, node_key(m.root_image)))
    return out


# ---------------------------------------------------------------------------
# The two pushouts


def pushout_complement(match: Match) -> Tuple[TermGraph, GraphMorphism]:
    """The host minus the matched root's content, with the K-to-D morphism.

    Raises ValueError if the match violates the identification condition
    (another labelled node of L mapped onto the root's image), in which case
    no pushout complement exists.
    """
    rule, g = match.rule, match.g
    hub = match.root_image
    for n in rule.L.labels:
        if n != rule.root and g.mapping[n] == hub:
            raise ValueError(
                f"match of {rule.name} at {hub} violates the identification "
                f"condition: labelled node {n} shares the root's image"
            )
    G = match.host
    D = TermGraph.of(
        G.nodes,
        {n: l for n, l in G.labels.items() if n != hub},
        {n: s for n, s in G.succs.items() if n != hub},
    )
    d = GraphMorphism(rule.K, D, dict(g.mapping))
    return D, d


class _UnionFind:
    def __init__(self):
        self.parent: Dict[Tuple[str, NodeId], Tuple[str, NodeId]] = {}

    def find(self, x: Tuple[str, NodeId]) -> Tuple[str, NodeId]:
        root = x
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while self.parent.get(x, x) != x:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: Tuple[str, NodeId], b: Tuple[str, NodeId]) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def pushout(
    rule: EvaluationRule, D: TermGraph, d: GraphMorphism
) -> Tuple[TermGraph, GraphMorphism, GraphMorphism]:
    """Glue R and D along K; returns (H, h : R -> H, b : D -> H).

    Node ids: a class containing D nodes keeps its least D id; classes from R
    alone get fresh ids h#0, h#1, ... (skipping ids D already uses), assigned
    in order of their least R member.
    """
    uf = _UnionFind()
    for n in rule.K.nodes:
        uf.union(("r", rule.r[n]), ("d", d.mapping[n]))

    classes: Dict[Tuple[str, NodeId], List[Tuple[str, NodeId]]] = {}
    for side, graph in (("d", D), ("r", rule.R)):
        for n in graph.nodes:
            classes.setdefault(uf.find((side, n)), []).append((side, n))

    used = set(D.nodes)
    fresh = 0
    names: Dict[Tuple[str, NodeId], NodeId] = {}
    ordered = sorted(
        classes.items(),
        key=lambda kv: min(
            (0 if side == "d" else 1, node_key(n)) for side, n in kv[1]
        ),
    )
    for key, members in ordered:
        d_ids = [n for side, n in members if side == "d"]
        if d_ids:
            names[key] = min(d_ids, key=node_key)
        else:
            while f"h#{fresh}" in used:
                fresh += 1
            names[key] = f"h#{fresh}"
            fresh += 1

    def node_of(side: str, n: NodeId) -> NodeId:
        return names[uf.find((side, n))]

    labels: Dict[NodeId, str] = {}
    succs: Dict[NodeId, Tuple[NodeId, ...]] = {}
    for key, members in ordered:
        nid = names[key]
        for side, n in members:
            graph = D if side == "d" else rule.R
            lbl = graph.labels.get(n)
            if lbl is None:
                continue
            ss = tuple(node_of(side, s) for s in graph.succs[n])
            if nid in labels and (labels[nid], succs[nid]) != (lbl, ss):
                raise ValueError(
                    f"pushout is not a term graph: node {nid} receives "
                    f"conflicting content {labels[nid]}{succs[nid]} vs {lbl}{ss}"
                )
            labels[nid], succs[nid] = lbl, ss

    H = TermGraph.of(names.values(), labels, succs)
    h = GraphMorphism(rule.R, H, {n: node_of("r", n) for n in rule.R.nodes})
    b = GraphMorphism(D, H, {n: node_of("d", n) for n in D.nodes})
    return H, h, b


# ---------------------------------------------------------------------------
# Direct derivations


@dataclass(frozen=True)
class DirectDerivation:
    """One double-pushout step G => H with its full diagram."""

    match: Match
    D: TermGraph
    d: GraphMorphism  # K -> D
    H: TermGraph
    h: GraphMorphism  # R -> H
    b: GraphMorphism  # D -> H

    @property
    def G(self) -> TermGraph:
        return self.match.host

    @property
    def rule(self) -> EvaluationRule:
        return self.match.rule

    @property
    def track(self) -> Dict[NodeId, NodeId]:
        """Where each host node went (D and G share their node set)."""
        return self.b.mapping

    def describe(self) -> str:
        return self.match.describe()


def derive(match: Match) -> DirectDerivation:
    """Perform one rewrite step at the given match."""
    check_morphism(match.g)
    D, d = pushout_complement(match)
    H, h, b = pushout(match.rule, D, d)
    check_morphism(h)
    check_morphism(b)
    return DirectDerivation(match, D, d, H, h, b)


def track_substitution(
    drv: DirectDerivation, host_bottoms: FrozenSet[NodeId] = frozenset()
) -> Dict[str, FiniteTerm]:
    """The substitution σ with U_G[n] = U_H[track n]·σ on unravelings.

    Keys are the empty nodes of H (as variable names).  An H variable that is
    the track image of a live G variable maps to that variable; every other H
    variable maps to the undefined term (it arose by emptying the root or
    from a hole).  At most one G variable can track to a given H node; a
    violation would mean the step identified two distinct variables, which no
    well-formed rule can do, so it raises.
    """
    track = drv.track
    sources: Dict[NodeId, List[NodeId]] = {}
    for n in drv.G.nodes:
        if drv.G.is_empty_node(n) and n not in host_bottoms:
            sources.setdefault(track[n], []).append(n)
    out: Dict[str, FiniteTerm] = {}
    for m in drv.H.nodes:
        if drv.H.is_labelled(m):
            continue
        srcs = sources.get(m, [])
        if len(srcs) > 1:
            raise ValueError(
                f"step {drv.describe()} tracks variables {sorted(srcs)} "
                f"to the same node {m}"
            )
        out[m] = var(srcs[0]) if srcs else BOTTOM
    return out


def derive_rational(rt: RationalTerm, match: Match) -> Tuple[DirectDerivation, RationalTerm]:
    """Rewrite a pointed host, propagating the point, holes, and names.

    The result's point is the track image of the old point; empty result
    nodes keep the rendered name of the variable tracked onto them and become
    holes when no live variable arrives (per `track_substitution`).
    """
    if match.host is not rt.graph and match.host != rt.graph:
        raise ValueError("match host differs from the term's carrier")
    drv = derive(match)
    sigma = track_substitution(drv, rt.bottoms)
    renaming = rt.renaming()
    bottoms = []
    names = []
    for m, t in sigma.items():
        if t.is_bottom:
            bottoms.append(m)
        else:
            names.append((m, renaming.get(t.symbol, t.symbol)))
    out = RationalTerm(
        drv.H,
        drv.track[rt.point],
        frozenset(bottoms),
        tuple(sorted(names, key=lambda kv: node_key(kv[0]))),
    )
    return drv, out


def induced_parallel_redex(
    rt: RationalTerm, match: Match, sig: Signature
) -> RationalRedexSet:
    """The set of term-level redexes a graph match stands for.

    A single matched node unravels to every occurrence of that node reachable
    from the point, so one graph step corresponds to a (possibly infinite,
    always rational) parallel term rewrite.
    """
    rule = unravel_rule(match.rule, sig)
    return RationalRedexSet(
        rt.graph, rt.point, match.root_image, rule, rt.bottoms, rt.var_names
    )
