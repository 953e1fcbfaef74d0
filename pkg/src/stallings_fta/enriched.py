"""Enriched Stallings automata for subgroups of F_n x A.

An enriched automaton is an involutive pointed automaton whose positive arcs
carry two abelian labels (lab1 at the origin end, lab2 at the target end) and
whose basepoint carries a subgroup L of A.  Crossing an arc forward reads
x t^(lab2 - lab1); the inverse arc implicitly carries (-lab2, -lab1).  The
subgroup recognized by the automaton consists of the labels of basepoint
walks, with elements of L freely insertable at the basepoint.

The construction pipeline (flower -> enriched folding -> core -> canonical
renumbering -> tree normalization with canonical label representatives
modulo L) produces one automaton value per subgroup, so value equality
decides subgroup equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterator, Optional, Sequence

from .abelian import (
    INFINITY,
    AbelianSpec,
    AbelianSubgroup,
    Vector,
    vec_add,
    vec_neg,
    vec_sub,
)
from .words import (
    Automaton,
    SpanningTree,
    Word,
    _compact,
    _core_keep,
    _fold_events,
    canonical_renumber,
    check_order,
    default_order,
    free_reduce,
    invert,
    is_saturated,
    multiply,
    recognizes,
    schreier_transversal,
    spanning_tree_by_order,
    word_str,
)

ArcLabel = tuple[Vector, Vector]  # (lab1, lab2) of a positive arc


@dataclass(frozen=True)
class Ambient:
    """The ambient group F_n x A."""

    n: int
    abelian: AbelianSpec

    @property
    def m(self) -> int:
        return self.abelian.m

    def zero(self) -> Vector:
        return self.abelian.zero()

    def element(self, word: Sequence[int], vec: Sequence[int] = ()) -> "GroupElement":
        vec = tuple(vec) if vec else self.zero()
        return GroupElement(free_reduce(word), self.abelian.canonicalize(vec))

    def multiply(self, g: "GroupElement", h: "GroupElement") -> "GroupElement":
        return self.element(multiply(g.word, h.word), vec_add(g.vec, h.vec))

    def invert(self, g: "GroupElement") -> "GroupElement":
        return self.element(invert(g.word), vec_neg(g.vec))

    def identity(self) -> "GroupElement":
        return GroupElement((), self.zero())


@dataclass(frozen=True)
class GroupElement:
    """Normal form w * t^a of an element of F_n x A."""

    word: Word
    vec: Vector

    def is_identity(self) -> bool:
        return not self.word and not any(self.vec)

    def __str__(self) -> str:
        w = word_str(self.word) if self.word else ""
        t = "t^(" + ",".join(str(a) for a in self.vec) + ")" if any(self.vec) else ""
        return (w + " " + t).strip() or "1"


@dataclass(frozen=True)
class SubgroupBasis:
    """Free-part elements u_i t^{a_i} plus the abelian part H & A."""

    free_part: tuple[GroupElement, ...]
    abelian_part: AbelianSubgroup

    def rank(self) -> int:
        return len(self.free_part) + self.abelian_part.rank()


@dataclass(frozen=True)
class EnrichedAutomaton:
    ambient: Ambient
    skeleton: Automaton
    labels: tuple[ArcLabel, ...]
    base: AbelianSubgroup

    def __post_init__(self):
        if len(self.labels) != len(self.skeleton.arcs):
            raise ValueError("one label pair per positive arc required")
        if self.base.spec != self.ambient.abelian:
            raise ValueError("basepoint subgroup lives in the wrong group")

    def arc_contribution(self, arc_idx: int, direction: int) -> Vector:
        """Abelian part read when crossing the arc in the given direction."""
        lab1, lab2 = self.labels[arc_idx]
        diff = vec_sub(lab2, lab1)
        return diff if direction == 1 else vec_neg(diff)


def enriched_flower(ambient: Ambient, gens: Sequence[GroupElement]) -> EnrichedAutomaton:
    """Petals for generators with nonempty word; purely abelian generators
    populate the basepoint subgroup; identities are dropped."""
    zero = ambient.zero()
    arcs = []
    labels = []
    abelian_gens = []
    num = 1
    for g in gens:
        if len(g.vec) != ambient.m:
            raise ValueError("abelian part has the wrong length")
        if not g.word:
            if any(g.vec):
                abelian_gens.append(g.vec)
            continue
        here = 0
        last = len(g.word) - 1
        for i, l in enumerate(g.word):
            nxt = 0 if i == last else num
            if nxt:
                num += 1
            vec = g.vec if i == last else zero
            if l > 0:
                arcs.append((here, l, nxt))
                labels.append((zero, vec))
            else:
                # the petal crosses this positive arc backwards, reading
                # x^-1 t^(lab1 - lab2); lab1 = vec makes that x^-1 t^vec
                arcs.append((nxt, -l, here))
                labels.append((vec, zero))
            here = nxt
    return EnrichedAutomaton(
        ambient,
        Automaton(ambient.n, num, 0, tuple(arcs)),
        tuple(labels),
        AbelianSubgroup.from_generators(ambient.abelian, abelian_gens),
    )


def vertex_transformation(e: EnrichedAutomaton, v: int, c: Sequence[int]) -> EnrichedAutomaton:
    """Add c to every abelian label in the neighborhood of v."""
    if not (0 <= v < e.skeleton.num_vertices):
        raise ValueError("no such vertex")
    c = tuple(c)
    labels = []
    for (o, _, t), (lab1, lab2) in zip(e.skeleton.arcs, e.labels):
        labels.append((
            vec_add(lab1, c) if o == v else lab1,
            vec_add(lab2, c) if t == v else lab2,
        ))
    return replace(e, labels=tuple(labels))


def arc_transformation(e: EnrichedAutomaton, arc_idx: int, c: Sequence[int]) -> EnrichedAutomaton:
    """Add c to both abelian labels of one arc."""
    if not (0 <= arc_idx < len(e.labels)):
        raise ValueError("no such arc")
    c = tuple(c)
    lab1, lab2 = e.labels[arc_idx]
    labels = list(e.labels)
    labels[arc_idx] = (vec_add(lab1, c), vec_add(lab2, c))
    return replace(e, labels=tuple(labels))


def _check_fold_pair(e: EnrichedAutomaton, i: int, j: int) -> None:
    oi, ki, _ = e.skeleton.arcs[i]
    oj, kj, _ = e.skeleton.arcs[j]
    if i == j or ki != kj or oi != oj:
        raise ValueError("foldable arcs must be distinct, same letter, same origin")


def closed_fold(e: EnrichedAutomaton, i: int, j: int) -> EnrichedAutomaton:
    """Delete arc j and grow L by -lab2(i) + lab1(i) - lab1(j) + lab2(j)."""
    _check_fold_pair(e, i, j)
    if e.skeleton.arcs[i][2] != e.skeleton.arcs[j][2]:
        raise ValueError("closed fold needs parallel arcs")
    a1, b1 = e.labels[i]
    a2, b2 = e.labels[j]
    gained = vec_add(vec_sub(a1, b1), vec_sub(b2, a2))
    arcs = tuple(arc for idx, arc in enumerate(e.skeleton.arcs) if idx != j)
    labels = tuple(lab for idx, lab in enumerate(e.labels) if idx != j)
    return EnrichedAutomaton(
        e.ambient,
        replace(e.skeleton, arcs=arcs),
        labels,
        AbelianSubgroup.from_generators(
            e.ambient.abelian, e.base.lattice_basis + (gained,)
        ),
    )


def open_fold(e: EnrichedAutomaton, i: int, j: int) -> EnrichedAutomaton:
    """Match labels of arc j to arc i by an arc and a vertex transformation,
    then identify the targets and delete arc j."""
    _check_fold_pair(e, i, j)
    ti, tj = e.skeleton.arcs[i][2], e.skeleton.arcs[j][2]
    if ti == tj:
        raise ValueError("open fold needs distinct targets")
    e = arc_transformation(e, j, vec_sub(e.labels[i][0], e.labels[j][0]))
    e = vertex_transformation(e, tj, vec_sub(e.labels[i][1], e.labels[j][1]))
    assert e.labels[i] == e.labels[j]
    merged, removed = (ti, tj) if ti < tj else (tj, ti)

    def mv(v: int) -> int:
        if v == removed:
            return merged
        return v - 1 if v > removed else v

    arcs = []
    labels = []
    for idx, ((o, k, t), lab) in enumerate(zip(e.skeleton.arcs, e.labels)):
        if idx == j:
            continue
        arcs.append((mv(o), k, mv(t)))
        labels.append(lab)
    skeleton = Automaton(
        e.skeleton.n,
        e.skeleton.num_vertices - 1,
        mv(e.skeleton.basepoint),
        tuple(arcs),
    )
    return EnrichedAutomaton(e.ambient, skeleton, tuple(labels), e.base)


def _reduce_layers(
    n: int,
    num_vertices: int,
    basepoint: int,
    arcs: Sequence[tuple[int, int, int]],
    layers: Sequence[Sequence[ArcLabel]],
    order: Sequence[int],
):
    """Shared engine: enriched folding, core pruning, canonical renumbering.

    layers is a list of independent (lab1, lab2) systems riding on the arcs;
    returns (skeleton, per-layer labels, per-layer closed-fold vectors).
    """
    work = [list(arc) for arc in arcs]
    labs = [[list(map(tuple, pair)) for pair in layer] for layer in layers]
    gained: list[list[Vector]] = [[] for _ in layers]

    def directed(layer, idx, d):
        lab1, lab2 = labs[layer][idx]
        return (lab1, lab2) if d == 1 else (vec_neg(lab2), vec_neg(lab1))

    uf = None
    for event, kept, dropped, d, uf in _fold_events(num_vertices, work):
        if event == "closed":
            for li in range(len(labs)):
                l1e, l2e = directed(li, kept, d)
                l1f, l2f = directed(li, dropped, d)
                gained[li].append(vec_add(vec_sub(l1e, l2e), vec_sub(l2f, l1f)))
            continue
        # open fold: match directed labels of `dropped` to `kept`
        w_f = uf.find(work[dropped][2] if d == 1 else work[dropped][0])
        for li in range(len(labs)):
            l1e, _ = directed(li, kept, d)
            l1f, _ = directed(li, dropped, d)
            c1 = vec_scale_dir(d, vec_sub(l1e, l1f))
            pair = labs[li][dropped]
            labs[li][dropped] = [vec_add(pair[0], c1), vec_add(pair[1], c1)]
            _, l2e = directed(li, kept, d)
            _, l2f = directed(li, dropped, d)
            c2 = vec_scale_dir(d, vec_sub(l2e, l2f))
            if any(c2):
                for idx, arc in enumerate(work):
                    if arc[1] == 0:
                        continue
                    p = labs[li][idx]
                    if uf.find(arc[0]) == w_f:
                        p[0] = vec_add(p[0], c2)
                    if uf.find(arc[2]) == w_f:
                        p[1] = vec_add(p[1], c2)
    if uf is None:
        uf = _UnionFindStub(num_vertices)

    resolved_arcs = []
    resolved_labels: list[list[ArcLabel]] = [[] for _ in layers]
    for idx, (o, k, t) in enumerate(work):
        if k == 0:
            continue
        resolved_arcs.append((uf.find(o), k, uf.find(t)))
        for li in range(len(labs)):
            resolved_labels[li].append(tuple(map(tuple, labs[li][idx])))
    bp = uf.find(basepoint)

    kept_vertices, kept_idx = _core_keep(num_vertices, bp, resolved_arcs)
    resolved_arcs = [resolved_arcs[i] for i in kept_idx]
    resolved_labels = [[layer[i] for i in kept_idx] for layer in resolved_labels]

    skeleton = _compact(n, num_vertices, bp, resolved_arcs)
    skeleton, _, arc_map = canonical_renumber(skeleton, order)
    resolved_labels = [tuple(layer[i] for i in arc_map) for layer in resolved_labels]
    return skeleton, resolved_labels, gained


def vec_scale_dir(d: int, v: Vector) -> Vector:
    return v if d == 1 else vec_neg(v)


class _UnionFindStub:
    def __init__(self, n: int):
        pass

    def find(self, v: int) -> int:
        return v


def reduce(e: EnrichedAutomaton, order: Optional[Sequence[int]] = None) -> EnrichedAutomaton:
    """Fold to a deterministic core enriched automaton, canonically numbered.

    Closed folds feed the basepoint subgroup; pruned hanging arcs may carry
    labels, which is sound because no reduced basepoint walk crosses them.
    """
    order = check_order(order, e.ambient.n) if order is not None else default_order(e.ambient.n)
    skeleton, layers, gained = _reduce_layers(
        e.ambient.n,
        e.skeleton.num_vertices,
        e.skeleton.basepoint,
        e.skeleton.arcs,
        [e.labels],
        order,
    )
    base = AbelianSubgroup.from_generators(
        e.ambient.abelian, e.base.lattice_basis + tuple(gained[0])
    )
    return EnrichedAutomaton(e.ambient, skeleton, layers[0], base)


def normalize(e: EnrichedAutomaton, tree: SpanningTree) -> EnrichedAutomaton:
    """Concentrate abelian mass on the heads of non-tree arcs.

    After this, lab1 = 0 everywhere, lab2 = 0 on tree arcs, and each
    non-tree lab2 is the canonical representative of its coset modulo L.
    """
    phi = _tree_potentials(e.skeleton, tree, e.labels)
    labels = _normalized_labels(e.skeleton, tree, e.labels, phi, e.base.reduce_mod)
    return replace(e, labels=labels)


def _tree_potentials(
    skeleton: Automaton, tree: SpanningTree, labels: Sequence[ArcLabel]
) -> list[Vector]:
    """Vertex transformation vectors zeroing all tree-arc labels."""
    m = len(labels[0][0]) if labels else 0
    zero = (0,) * m
    phi: list[Optional[Vector]] = [None] * skeleton.num_vertices
    phi[tree.root] = zero
    for v in tree.vertex_age:
        if v == tree.root:
            continue
        arc_idx, d = tree.parent[v]
        o, _, t = skeleton.arcs[arc_idx]
        lab1, lab2 = labels[arc_idx]
        if d == 1:  # stored o(parent) -> t(=v)
            phi[v] = vec_add(phi[o], vec_sub(lab1, lab2))
        else:  # stored o(=v) -> t(parent)
            phi[v] = vec_add(phi[t], vec_sub(lab2, lab1))
    return phi


def _normalized_labels(skeleton, tree, labels, phi, reduce_mod):
    zero = tuple(0 for _ in phi[tree.root])
    out = []
    for idx, ((o, _, t), (lab1, lab2)) in enumerate(zip(skeleton.arcs, labels)):
        if idx in tree.tree_arcs:
            out.append((zero, zero))
        else:
            val = vec_sub(vec_add(lab2, phi[t]), vec_add(lab1, phi[o]))
            out.append((zero, reduce_mod(val)))
    return tuple(out)


def stallings(
    ambient: Ambient,
    gens: Sequence[GroupElement],
    order: Optional[Sequence[int]] = None,
) -> EnrichedAutomaton:
    """The canonical enriched Stallings automaton of <gens>.

    Value equality of outputs is equivalent to equality of the subgroups.
    """
    e = reduce(enriched_flower(ambient, gens), order)
    tree = spanning_tree_by_order(e.skeleton, order)
    return normalize(e, tree)


def completion(e: EnrichedAutomaton, w: Sequence[int]):
    """The coset b + L of vectors a with w t^a recognized, or None.

    Returns (b, L) with b canonical modulo L; absent iff the skeleton does
    not recognize w.
    """
    walk = recognizes(e.skeleton, w)
    if walk is None:
        return None
    total = e.ambient.zero()
    for arc_idx, d in walk:
        total = vec_add(total, e.arc_contribution(arc_idx, d))
    return e.base.reduce_mod(total), e.base


def member(e: EnrichedAutomaton, g: GroupElement) -> bool:
    """Subgroup membership of w t^a via its completion."""
    result = completion(e, g.word)
    if result is None:
        return False
    b, base = result
    return base.contains(vec_sub(g.vec, b))


def basis(e: EnrichedAutomaton, tree: Optional[SpanningTree] = None) -> SubgroupBasis:
    """Enriched labels of the positive tree petals plus the basepoint subgroup."""
    if tree is None:
        tree = spanning_tree_by_order(e.skeleton)
        e = normalize(e, tree)
    free = []
    for arc_idx in tree.petal_arcs:
        word = _petal_word(e.skeleton, tree, arc_idx)
        free.append(GroupElement(word, e.ambient.abelian.canonicalize(e.labels[arc_idx][1])))
    return SubgroupBasis(tuple(free), e.base)


def _petal_word(skeleton: Automaton, tree: SpanningTree, arc_idx: int) -> Word:
    o, k, t = skeleton.arcs[arc_idx]
    return tree.word_to(skeleton, o) + (k,) + invert(tree.word_to(skeleton, t))


def index_report(e: EnrichedAutomaton):
    """(free index, abelian index, total), each finite or INFINITY."""
    free = e.skeleton.num_vertices if is_saturated(e.skeleton) else INFINITY
    ab = e.base.index()
    total = INFINITY if free is INFINITY or ab is INFINITY else free * ab
    return free, ab, total


def transversal_stream(
    e: EnrichedAutomaton, budget: Optional[int] = None
) -> Iterator[GroupElement]:
    """Right-coset representatives v t^c, graded by |v| + sum|c|.

    Within a grade, smaller abelian weight first; ties follow the underlying
    Schreier and abelian streams.  Complete when the total index is finite.
    """
    _, _, total = index_report(e)
    words = _graded_buffer(schreier_transversal(e.skeleton), len)
    vecs = _graded_buffer(e.base.transversal(), lambda v: sum(abs(a) for a in v))
    emitted = 0
    for level in itertools.count():
        for ab_weight in range(level + 1):
            for vec in vecs.of_grade(ab_weight):
                for word in words.of_grade(level - ab_weight):
                    yield GroupElement(word, vec)
                    emitted += 1
                    if emitted == total or (budget is not None and emitted >= budget):
                        return
        if words.exhausted and vecs.exhausted and level >= words.max_grade + vecs.max_grade:
            return


class _graded_buffer:
    """Buffers a stream emitted in nondecreasing grade, queryable by grade."""

    def __init__(self, source, grade):
        self._source = source
        self._grade = grade
        self._by_grade: dict[int, list] = {}
        self._ahead = None
        self.exhausted = False
        self.max_grade = 0

    def _pull_through(self, g: int) -> None:
        while not self.exhausted:
            if self._ahead is not None:
                item, gr = self._ahead
                if gr > g:
                    return
                self._by_grade.setdefault(gr, []).append(item)
                self._ahead = None
            try:
                item = next(self._source)
            except StopIteration:
                self.exhausted = True
                return
            gr = self._grade(item)
            self.max_grade = max(self.max_grade, gr)
            self._ahead = (item, gr)

    def of_grade(self, g: int) -> list:
        if g < 0:
            return []
        self._pull_through(g)
        return self._by_grade.get(g, [])


def finite_index_factor_extension(
    e: EnrichedAutomaton, order: Optional[Sequence[int]] = None
) -> EnrichedAutomaton:
    """Saturate the skeleton with zero-labelled arcs and complete L to finite
    index; the input subgroup is a factor of the finite-index result."""
    skeleton = e.skeleton
    zero = e.ambient.zero()
    arcs = list(skeleton.arcs)
    labels = list(e.labels)
    for k in range(1, e.ambient.n + 1):
        have_out = {o for o, kk, _ in arcs if kk == k}
        have_in = {t for _, kk, t in arcs if kk == k}
        missing_out = sorted(set(range(skeleton.num_vertices)) - have_out)
        missing_in = sorted(set(range(skeleton.num_vertices)) - have_in)
        for o, t in zip(missing_out, missing_in):
            arcs.append((o, k, t))
            labels.append((zero, zero))
    extended = EnrichedAutomaton(
        e.ambient,
        replace(skeleton, arcs=tuple(arcs)),
        tuple(labels),
        e.base.finite_index_completion(),
    )
    # re-canonicalize: the new arcs change the spanning tree
    skeleton2, _, arc_map = canonical_renumber(extended.skeleton, order)
    relabeled = tuple(extended.labels[i] for i in arc_map)
    out = EnrichedAutomaton(e.ambient, skeleton2, relabeled, extended.base)
    tree = spanning_tree_by_order(skeleton2, order)
    return normalize(out, tree)


def completion_table(e: EnrichedAutomaton, max_len: int) -> dict[Word, Vector]:
    """Completions of every recognized word of length <= max_len.

    Depth-first over reduced basepoint walks; used by oracle-style tests and
    kept here because it only relies on automaton internals.
    """
    out: dict[Word, Vector] = {}
    skeleton = e.skeleton
    zero = e.ambient.zero()

    def rec(v: int, word: tuple[int, ...], acc: Vector, last: int):
        if v == skeleton.basepoint:
            out[word] = e.base.reduce_mod(acc)
        if len(word) == max_len:
            return
        for s in default_order(skeleton.n):
            if last and s == -last:
                continue
            nxt = skeleton.step(v, s)
            if nxt is None:
                continue
            w, arc_idx, d = nxt
            rec(w, word + (s,), vec_add(acc, e.arc_contribution(arc_idx, d)), s)

    rec(skeleton.basepoint, (), zero, 0)
    return out


def to_dot(e: EnrichedAutomaton, name: str = "enriched") -> str:
    """DOT rendering with arc labels [lab1|x_k|lab2] and L at the basepoint."""
    base_rows = ",".join(str(list(r)) for r in e.base.lattice_basis) or "0"
    lines = [
        f"digraph {name} {{",
        "  rankdir=LR;",
        "  node [shape=circle, label=\"\"];",
        f"  v{e.skeleton.basepoint} [shape=doublecircle, xlabel=\"L=<{base_rows}>\"];",
    ]
    for v in range(e.skeleton.num_vertices):
        if v != e.skeleton.basepoint:
            lines.append(f"  v{v};")
    for (o, k, t), (lab1, lab2) in zip(e.skeleton.arcs, e.labels):
        l1 = ",".join(map(str, lab1))
        l2 = ",".join(map(str, lab2))
        lines.append(f"  v{o} -> v{t} [label=\"({l1})|x{k}|({l2})\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"
