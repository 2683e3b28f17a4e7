"""Filtration of finite transitive models and the untangling construction.

The standard filtration collapses worlds that agree on every formula of a
subformula-closed set, then takes the transitive closure of the induced
relation.  The refined variant additionally separates worlds that see
different collections of maximal clusters, which keeps the quotient locally
n-connected when the source is.

Untangling breaks each quotient cluster into a nucleus plus degenerate
satellites so that tangle formulas become true exactly where they were true
in the source.  The nucleus is chosen through a critical point: a source
world whose false tangles each have a member avoided by everything the
world sees inside the cluster.  On finite transitive inputs a critical
point always exists, so a failed search signals a broken precondition.

The characteristic-formula toolkit builds, for a finite atom alphabet, the
formulas that describe atomic types, maximal clusters, which clusters a
world sees, and path components of successor sets.  Their defining
properties are checked on the given model; the sharp forms only hold when
distinct maximal clusters carry distinct type sets, so the report records
which checks were applicable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .formula import (
    And,
    Atom,
    ClosureSet,
    Dia,
    Formula,
    Neg,
    Top,
    box_star,
    conj,
    dia_star,
    disj,
    pretty,
)
from .kripke import (
    Evaluator,
    Frame,
    KripkeModel,
    NonTransitiveError,
    _components,
    cluster_decomposition,
    closures,
    min_local_connectedness,
    path_components,
    relation_properties,
)

__all__ = [
    "FiltrationResult",
    "UntangleResult",
    "CriticalPointError",
    "ReductionReport",
    "AtomicTypeData",
    "CharacteristicReport",
    "FrameProfile",
    "PreservationReport",
    "filtrate",
    "untangle",
    "verify_reduction",
    "reduction_conditions",
    "characteristic_formulas",
    "defining_formula",
    "preservation_report",
]


class CriticalPointError(ValueError):
    """No world of a quotient cluster satisfied the avoidance condition."""


# ---------------------------------------------------------------------------
# Filtration


@dataclass(frozen=True)
class FiltrationResult:
    """Quotient of a finite transitive model by agreement on a closure set.

    ``classes[i]`` lists the source worlds mapped to ``quotient_worlds[i]``;
    ``r_phi`` is the transitive closure of the induced relation ``r_lambda``.
    ``maximal_clusters`` and ``sees_maximal`` describe the source model and
    are recorded in both modes; only refined mode folds them into the
    quotient signature.
    """

    mode: str
    closure: ClosureSet
    quotient_worlds: tuple[str, ...]
    classes: tuple[tuple[str, ...], ...]
    quotient_map: dict[str, str]
    r_lambda: frozenset[tuple[str, str]]
    r_phi: frozenset[tuple[str, str]]
    quotient_val: dict[str, tuple[str, ...]]
    source_truth: dict[Formula, frozenset[str]]
    maximal_clusters: tuple[frozenset[str], ...]
    sees_maximal: dict[str, tuple[int, ...]]

    def filtered_frame(self) -> Frame:
        return Frame(self.quotient_worlds, self.r_phi)

    def filtered_model(self) -> KripkeModel:
        return KripkeModel(self.filtered_frame(), self.quotient_val)

    def realized(self, phi: Formula) -> frozenset[str]:
        """Quotient worlds whose class members make ``phi`` true."""
        if phi not in self.source_truth:
            raise KeyError(pretty(phi))
        return frozenset(self.quotient_map[x] for x in self.source_truth[phi])


def _maximal_cluster_data(
    frame: Frame,
) -> tuple[tuple[frozenset[str], ...], dict[str, tuple[int, ...]]]:
    """All maximal clusters, and per world the indices of those it wholly sees."""
    dec = cluster_decomposition(frame)
    with_exit = {i for (i, _) in dec.order}
    maximal = tuple(
        dec.clusters[i] for i in range(len(dec.clusters)) if i not in with_exit
    )
    sees: dict[str, tuple[int, ...]] = {}
    for w in frame.worlds:
        succ = frame.successors(w)
        sees[w] = tuple(i for i, c in enumerate(maximal) if c <= succ)
    return maximal, sees


def filtrate(
    m: KripkeModel, closure: ClosureSet, mode: str = "standard"
) -> FiltrationResult:
    """Collapse ``m`` by agreement on ``closure``.

    In ``standard`` mode two worlds are identified when they make exactly
    the same closure members true.  In ``refined`` mode they must also see
    exactly the same maximal clusters.  The quotient relation is the
    transitive closure of the image of the source relation, so the result
    is always transitive.  Open fixpoint variables in closure members are
    read as atoms, false wherever the valuation is silent.
    """
    if mode not in ("standard", "refined"):
        raise ValueError(f"unknown filtration mode {mode!r}")
    if not relation_properties(m.frame).transitive:
        raise NonTransitiveError("filtration needs a transitive source model")

    ev = Evaluator(m.frame)
    masks = ev.valuation_masks(m.val)
    ordered = closure.sorted()
    source_truth = {f: ev.unmask(ev.extension(f, masks)) for f in ordered}
    maximal, sees = _maximal_cluster_data(m.frame)

    def signature(w: str):
        profile = tuple(w in source_truth[f] for f in ordered)
        return (profile, sees[w]) if mode == "refined" else profile

    quotient_map: dict[str, str] = {}
    classes: list[list[str]] = []
    ids: dict[object, int] = {}
    for w in m.frame.worlds:
        sig = signature(w)
        if sig not in ids:
            ids[sig] = len(classes)
            classes.append([])
        classes[ids[sig]].append(w)
        quotient_map[w] = f"c{ids[sig]}"

    quotient_worlds = tuple(f"c{i}" for i in range(len(classes)))
    r_lambda = frozenset(
        (quotient_map[x], quotient_map[y]) for (x, y) in m.frame.rel
    )
    r_phi = closures(Frame(quotient_worlds, r_lambda)).transitive.rel
    quotient_val = {
        a: tuple(
            w
            for w in quotient_worlds
            if any(x in source_truth[Atom(a)] for x in classes[int(w[1:])])
        )
        for a in sorted(closure.atoms)
    }
    return FiltrationResult(
        mode=mode,
        closure=closure,
        quotient_worlds=quotient_worlds,
        classes=tuple(tuple(c) for c in classes),
        quotient_map=quotient_map,
        r_lambda=r_lambda,
        r_phi=r_phi,
        quotient_val=quotient_val,
        source_truth=source_truth,
        maximal_clusters=maximal,
        sees_maximal=sees,
    )


def _check_inputs(fr: FiltrationResult, m: KripkeModel, closure: ClosureSet) -> None:
    if set(fr.quotient_map) != set(m.frame.worlds):
        raise ValueError("filtration was built from a different model")
    if closure.formulas != fr.closure.formulas:
        raise ValueError("filtration was built from a different closure set")


# ---------------------------------------------------------------------------
# Untangling


@dataclass(frozen=True)
class UntangleResult:
    """Refinement of the quotient relation that restores tangle truth.

    ``clusters``, ``critical_points`` and ``nuclei`` are aligned: entry i
    holds one quotient cluster, the source world chosen for it, and the
    quotient worlds the critical point sees inside it.  Degenerate clusters
    always get an empty nucleus.  In ``reflexive_mode`` the worlds outside
    each nucleus keep their self-loop instead of becoming degenerate.
    """

    reflexive_mode: bool
    quotient_worlds: tuple[str, ...]
    clusters: tuple[frozenset[str], ...]
    critical_points: tuple[str, ...]
    nuclei: tuple[frozenset[str], ...]
    r_t: frozenset[tuple[str, str]]

    def untangled_frame(self) -> Frame:
        return Frame(self.quotient_worlds, self.r_t)

    def untangled_model(self, fr: FiltrationResult) -> KripkeModel:
        return KripkeModel(self.untangled_frame(), fr.quotient_val)


def untangle(
    fr: FiltrationResult,
    m: KripkeModel,
    closure: ClosureSet,
    reflexive_mode: bool = False,
) -> UntangleResult:
    """Split each quotient cluster into a nucleus and satellites.

    For every cluster of the filtered frame the search walks the source
    worlds mapped into it, in model order, and keeps the first critical
    point: a world such that each tangle member of the closure that is
    false at it has some member formula realised at none of the quotient
    worlds it sees inside the cluster.  The nucleus collects exactly those
    seen quotient worlds, and the new relation keeps all inter-cluster
    pairs, relates the whole cluster to its nucleus, and nothing else,
    except that ``reflexive_mode`` keeps self-loops outside the nucleus.
    """
    _check_inputs(fr, m, closure)
    quotient = fr.filtered_frame()
    dec = cluster_decomposition(quotient)
    member_realized = {
        g: fr.realized(g) for f in closure.tangle_members for g in f.members
    }
    succ_q = {w: frozenset(fr.quotient_map[z] for z in m.frame.successors(w))
              for w in m.frame.worlds}

    clusters: list[frozenset[str]] = []
    critical: list[str] = []
    nuclei: list[frozenset[str]] = []
    for cluster in dec.clusters:
        chosen = None
        for y in m.frame.worlds:
            if fr.quotient_map[y] not in cluster:
                continue
            inside = succ_q[y] & cluster
            if all(
                any(not (member_realized[g] & inside) for g in f.members)
                for f in closure.tangle_members
                if y not in fr.source_truth[f]
            ):
                chosen = y
                break
        if chosen is None:
            raise CriticalPointError(
                "no critical point for cluster {" + ", ".join(sorted(cluster)) + "}; "
                "the source model is not a transitive model of this closure"
            )
        clusters.append(cluster)
        critical.append(chosen)
        nuclei.append(succ_q[chosen] & cluster)

    index_of = {w: i for i, c in enumerate(clusters) for w in c}
    r_t = set()
    for (u, v) in fr.r_phi:
        if index_of[u] != index_of[v]:
            r_t.add((u, v))
        elif v in nuclei[index_of[u]]:
            r_t.add((u, v))
        elif reflexive_mode and u == v:
            r_t.add((u, v))
    return UntangleResult(
        reflexive_mode=reflexive_mode,
        quotient_worlds=fr.quotient_worlds,
        clusters=tuple(clusters),
        critical_points=tuple(critical),
        nuclei=tuple(nuclei),
        r_t=frozenset(r_t),
    )


# ---------------------------------------------------------------------------
# Reduction checks


@dataclass(frozen=True)
class ReductionReport:
    """Outcome of replaying the closure on the untangled quotient.

    ``failure`` holds the first mismatch as (formula, source world,
    truth in the source, truth at its quotient image); ``checked`` counts
    the world-formula pairs examined before stopping.
    """

    ok: bool
    checked: int
    failure: tuple[Formula, str, bool, bool] | None


def verify_reduction(
    fr: FiltrationResult,
    ut: UntangleResult,
    m: KripkeModel,
    closure: ClosureSet,
) -> ReductionReport:
    """Check that closure members are true on the untangled model exactly
    at the images of the source worlds where they are true."""
    _check_inputs(fr, m, closure)
    model_t = ut.untangled_model(fr)
    ev = Evaluator(model_t.frame)
    masks = ev.valuation_masks(model_t.val)
    checked = 0
    for f in closure.sorted():
        ext = ev.unmask(ev.extension(f, masks))
        for x in m.frame.worlds:
            checked += 1
            expected = x in fr.source_truth[f]
            actual = fr.quotient_map[x] in ext
            if expected != actual:
                return ReductionReport(False, checked, (f, x, expected, actual))
    return ReductionReport(True, checked, None)


def reduction_conditions(
    fr: FiltrationResult, m: KripkeModel, closure: ClosureSet
) -> list[str]:
    """Violations of the quotient bookkeeping conditions, as messages.

    Checks the valuation agreement, class coherence, relation image,
    truth transfer along the quotient relation, the cardinality bound,
    and that quotient cluster mates realise the same tangle and diamond
    members.  An empty list means the construction is sound.
    """
    _check_inputs(fr, m, closure)
    out: list[str] = []
    truth = fr.source_truth

    for a in sorted(closure.atoms):
        held = frozenset(fr.quotient_val.get(a, ()))
        for x in m.frame.worlds:
            if (x in truth[Atom(a)]) != (fr.quotient_map[x] in held):
                out.append(
                    f"valuation of {a} disagrees between {x} and its class"
                )
    for cls in fr.classes:
        rep = cls[0]
        for x in cls[1:]:
            if any((rep in truth[f]) != (x in truth[f]) for f in closure):
                out.append(f"class of {rep} mixes worlds with different profiles")
                break
    for (x, y) in m.frame.rel:
        if (fr.quotient_map[x], fr.quotient_map[y]) not in fr.r_phi:
            out.append(f"edge {x}->{y} is lost in the quotient")

    # truth transfer: tangles seen across the quotient relation stay true
    # at the earlier world, and so do diamonds whose body holds later
    tangles = closure.tangle_members
    diamonds = [f for f in closure.diamond_members if isinstance(f, Dia)]
    for x in m.frame.worlds:
        for y in m.frame.worlds:
            if (fr.quotient_map[x], fr.quotient_map[y]) not in fr.r_phi:
                continue
            for f in tangles:
                if y in truth[f] and x not in truth[f]:
                    out.append(
                        f"{pretty(f)} holds at {y} but not at {x} across the quotient"
                    )
            for f in diamonds:
                if (y in truth[f] or y in truth[f.sub]) and x not in truth[f]:
                    out.append(
                        f"{pretty(f)} fails at {x} despite its body holding from {y}"
                    )

    bound = 2 ** len(closure)
    if fr.mode == "refined":
        bound *= 2 ** len(fr.maximal_clusters)
    if len(fr.quotient_worlds) > bound:
        out.append(
            f"{len(fr.quotient_worlds)} quotient worlds exceed the bound {bound}"
        )

    dec = cluster_decomposition(fr.filtered_frame())
    watched = tuple(tangles) + tuple(closure.diamond_members)
    for cluster in dec.clusters:
        reps = sorted(cluster)
        first = frozenset(f for f in watched if reps[0] in fr.realized(f))
        for w in reps[1:]:
            got = frozenset(f for f in watched if w in fr.realized(f))
            if got != first:
                out.append(
                    f"cluster of {reps[0]} mixes worlds realising different"
                    " tangle or diamond members"
                )
                break
    return out


# ---------------------------------------------------------------------------
# Characteristic formulas


@dataclass(frozen=True)
class CharacteristicReport:
    """Which defining properties of the characteristic formulas held.

    The type-level checks hold on every finite transitive model.  The
    sharp checks identify clusters rather than type sets and are only
    meaningful when distinct maximal clusters have distinct type sets;
    the component check additionally needs every reachable world to have
    a successor, otherwise a world with no successors falsifies every
    diamond that is supposed to locate its component.  Inapplicable
    checks are reported as None and explained in ``notes``.
    """

    types_distinct: bool
    reachable_serial: bool
    type_description_ok: bool
    maximal_membership_by_type: bool
    cluster_scope_by_type: bool
    component_cover_ok: bool
    maximal_membership_sharp: bool | None
    cluster_scope_sharp: bool | None
    class_formula_sharp: bool | None
    component_formula_sharp: bool | None
    notes: tuple[str, ...]

    @property
    def ok(self) -> bool:
        """True when every applicable check passed."""
        values = (
            self.type_description_ok,
            self.maximal_membership_by_type,
            self.cluster_scope_by_type,
            self.component_cover_ok,
            self.maximal_membership_sharp,
            self.cluster_scope_sharp,
            self.class_formula_sharp,
            self.component_formula_sharp,
        )
        return all(v is not False for v in values)


@dataclass(frozen=True)
class AtomicTypeData:
    """Atomic types of a model and the formulas they induce.

    The alphabet holds the closure atoms plus one diamond tracking whether
    a world has any successor.  ``type_of`` maps each world to the
    alphabet members true there.  ``cluster_formula[i]`` is true at a
    maximal world exactly when its cluster realises the same type set as
    maximal cluster i; ``sees_cluster_formula[i]`` locates the worlds that
    see some cluster with that type set.  ``class_formula[x]`` conjoins
    the closure profile of x with its view of the maximal clusters, and
    ``component_formulas[x]`` pairs each path component of the successor
    set of x with the disjunction intended to define it there.
    """

    alphabet: tuple[Formula, ...]
    type_of: dict[str, frozenset[Formula]]
    cluster_types: tuple[frozenset[frozenset[Formula]], ...]
    maximal_clusters: tuple[int, ...]
    sees_maximal: dict[str, tuple[int, ...]]
    cluster_formula: dict[int, Formula]
    sees_cluster_formula: dict[int, Formula]
    profile_formula: dict[str, Formula]
    view_formula: dict[str, Formula]
    class_formula: dict[str, Formula]
    component_formulas: dict[str, tuple[tuple[frozenset[str], Formula], ...]]
    report: CharacteristicReport

    def type_formula(self, s: Iterable[Formula]) -> Formula:
        """Conjunction asserting exactly the alphabet members in ``s``."""
        chosen = frozenset(s)
        stray = chosen - frozenset(self.alphabet)
        if stray:
            raise ValueError(f"not in the alphabet: {pretty(next(iter(stray)))}")
        return conj(a if a in chosen else Neg(a) for a in self.alphabet)


def _subsets(alphabet: tuple[Formula, ...]) -> Iterable[frozenset[Formula]]:
    for bits in range(1 << len(alphabet)):
        yield frozenset(a for i, a in enumerate(alphabet) if bits >> i & 1)


def characteristic_formulas(m: KripkeModel, closure: ClosureSet) -> AtomicTypeData:
    """Build the type alphabet of ``m`` over ``closure`` and its formulas.

    The construction is exponential in the alphabet, which is capped at
    ten members.  All defining properties are evaluated on ``m`` and the
    outcomes collected in the report; nothing is raised for a failed
    check, since the sharp ones can legitimately fail when two maximal
    clusters carry the same type set.
    """
    if not relation_properties(m.frame).transitive:
        raise NonTransitiveError("characteristic formulas need a transitive model")
    alphabet: tuple[Formula, ...] = tuple(
        sorted((Atom(a) for a in closure.atoms), key=pretty)
    ) + (Dia(Top()),)
    if len(alphabet) > 10:
        raise ValueError(
            f"an alphabet of {len(alphabet)} members would need"
            f" {2 ** len(alphabet)} conjuncts per cluster formula"
        )

    ev = Evaluator(m.frame)
    masks = ev.valuation_masks(m.val)
    ext = {a: ev.unmask(ev.extension(a, masks)) for a in alphabet}
    type_of = {
        w: frozenset(a for a in alphabet if w in ext[a]) for w in m.frame.worlds
    }

    dec = cluster_decomposition(m.frame)
    cluster_types = tuple(
        frozenset(type_of[w] for w in c) for c in dec.clusters
    )
    with_exit = {i for (i, _) in dec.order}
    maximal = tuple(i for i in range(len(dec.clusters)) if i not in with_exit)
    sees_maximal = {
        w: tuple(i for i in maximal if dec.clusters[i] <= m.frame.successors(w))
        for w in m.frame.worlds
    }

    def chi(s: frozenset[Formula]) -> Formula:
        return conj(a if a in s else Neg(a) for a in alphabet)

    def alpha(i: int) -> Formula:
        return conj(
            dia_star(chi(s)) if s in cluster_types[i] else Neg(dia_star(chi(s)))
            for s in _subsets(alphabet)
        )

    cluster_formula = {i: alpha(i) for i in maximal}
    sees_cluster_formula = {i: Dia(box_star(cluster_formula[i])) for i in maximal}

    closure_truth = {
        f: ev.unmask(ev.extension(f, masks)) for f in closure.sorted()
    }
    profile_formula = {
        w: conj(
            f if w in closure_truth[f] else Neg(f) for f in closure.sorted()
        )
        for w in m.frame.worlds
    }
    view_formula = {
        w: conj(
            sees_cluster_formula[i]
            if i in sees_maximal[w]
            else Neg(sees_cluster_formula[i])
            for i in maximal
        )
        for w in m.frame.worlds
    }
    class_formula = {
        w: And(profile_formula[w], view_formula[w]) for w in m.frame.worlds
    }

    # path components of each successor set, using only edges inside it
    component_formulas: dict[str, tuple[tuple[frozenset[str], Formula], ...]] = {}
    for x in m.frame.worlds:
        succ = m.frame.successors(x)
        inner = [(u, v) for (u, v) in m.frame.rel if u in succ and v in succ]
        comps = _components(sorted(succ, key=m.frame.worlds.index), inner)
        entries = []
        for comp in comps:
            in_comp = tuple(i for i in maximal if dec.clusters[i] <= comp)
            entries.append((comp, disj(sees_cluster_formula[i] for i in in_comp)))
        component_formulas[x] = tuple(entries)

    signature_of = {
        w: (
            frozenset(f for f in closure_truth if w in closure_truth[f]),
            sees_maximal[w],
        )
        for w in m.frame.worlds
    }
    report = _verify_characteristics(
        m,
        ev,
        masks,
        alphabet,
        type_of,
        chi,
        dec,
        cluster_types,
        maximal,
        sees_maximal,
        cluster_formula,
        sees_cluster_formula,
        class_formula,
        component_formulas,
        signature_of,
    )
    return AtomicTypeData(
        alphabet=alphabet,
        type_of=type_of,
        cluster_types=cluster_types,
        maximal_clusters=maximal,
        sees_maximal=sees_maximal,
        cluster_formula=cluster_formula,
        sees_cluster_formula=sees_cluster_formula,
        profile_formula=profile_formula,
        view_formula=view_formula,
        class_formula=class_formula,
        component_formulas=component_formulas,
        report=report,
    )


def _verify_characteristics(
    m: KripkeModel,
    ev: Evaluator,
    masks: Mapping[str, int],
    alphabet: tuple[Formula, ...],
    type_of: Mapping[str, frozenset[Formula]],
    chi,
    dec,
    cluster_types,
    maximal: tuple[int, ...],
    sees_maximal: Mapping[str, tuple[int, ...]],
    cluster_formula: Mapping[int, Formula],
    sees_cluster_formula: Mapping[int, Formula],
    class_formula: Mapping[str, Formula],
    component_formulas,
    signature_of: Mapping[str, object],
) -> CharacteristicReport:
    def holds(f: Formula) -> frozenset[str]:
        return ev.unmask(ev.extension(f, masks))

    notes: list[str] = []
    types_distinct = len({cluster_types[i] for i in maximal}) == len(maximal)
    reachable = {y for (_, y) in m.frame.rel}
    reachable_serial = all(m.frame.successors(y) for y in reachable)

    type_description_ok = all(
        holds(chi(s)) == frozenset(w for w in m.frame.worlds if type_of[w] == s)
        for s in _subsets(alphabet)
    )

    maximal_worlds = frozenset(
        w for i in maximal for w in dec.clusters[i]
    )
    by_type = True
    sharp_membership = True
    for i in maximal:
        got = holds(cluster_formula[i]) & maximal_worlds
        same_type = frozenset(
            w
            for j in maximal
            if cluster_types[j] == cluster_types[i]
            for w in dec.clusters[j]
        )
        if got != same_type:
            by_type = False
        if got != dec.clusters[i]:
            sharp_membership = False

    scope_by_type = True
    sharp_scope = True
    for i in maximal:
        got = holds(sees_cluster_formula[i])
        same_type = frozenset(
            w
            for w in m.frame.worlds
            if any(
                cluster_types[j] == cluster_types[i] for j in sees_maximal[w]
            )
        )
        exact = frozenset(w for w in m.frame.worlds if i in sees_maximal[w])
        if got != same_type:
            scope_by_type = False
        if got != exact:
            sharp_scope = False

    sharp_class = all(
        holds(class_formula[x])
        == frozenset(
            y for y in m.frame.worlds if signature_of[y] == signature_of[x]
        )
        for x in m.frame.worlds
    )

    cover_ok = True
    sharp_component = True
    for x in m.frame.worlds:
        succ = m.frame.successors(x)
        for comp, f in component_formulas[x]:
            got = holds(f) & succ
            if not all(y in got for y in comp if m.frame.successors(y)):
                cover_ok = False
            if got != comp:
                sharp_component = False

    if not types_distinct:
        notes.append(
            "two maximal clusters share a type set, so formulas can only"
            " identify type sets, not individual clusters"
        )
    if not reachable_serial:
        notes.append(
            "a reachable world has no successors, so no diamond can place"
            " it in its path component"
        )
    applicable = types_distinct
    return CharacteristicReport(
        types_distinct=types_distinct,
        reachable_serial=reachable_serial,
        type_description_ok=type_description_ok,
        maximal_membership_by_type=by_type,
        cluster_scope_by_type=scope_by_type,
        component_cover_ok=cover_ok,
        maximal_membership_sharp=sharp_membership if applicable else None,
        cluster_scope_sharp=sharp_scope if applicable else None,
        class_formula_sharp=sharp_class if applicable else None,
        component_formula_sharp=(
            sharp_component if applicable and reachable_serial else None
        ),
        notes=tuple(notes),
    )


def defining_formula(
    fr: FiltrationResult, data: AtomicTypeData, subset: Iterable[str]
) -> Formula:
    """Formula true at a source world iff its image lies in ``subset``.

    Standard mode only needs the closure profiles; refined mode also pins
    the view of the maximal clusters, which is exact when the report says
    ``class_formula_sharp``.  The empty subset yields falsum.
    """
    chosen = frozenset(subset)
    stray = chosen - frozenset(fr.quotient_worlds)
    if stray:
        raise ValueError(f"not a quotient world: {sorted(stray)[0]}")
    table = (
        data.class_formula if fr.mode == "refined" else data.profile_formula
    )
    reps = [
        fr.classes[i][0]
        for i, w in enumerate(fr.quotient_worlds)
        if w in chosen
    ]
    return disj(table[r] for r in reps)


# ---------------------------------------------------------------------------
# Preservation


@dataclass(frozen=True)
class FrameProfile:
    """Structural summary of one frame."""

    serial: bool
    reflexive: bool
    connected: bool
    path_component_count: int
    local_connectedness: int


def _profile(frame: Frame) -> FrameProfile:
    props = relation_properties(frame)
    comps = path_components(frame)
    return FrameProfile(
        serial=props.serial,
        reflexive=props.reflexive,
        connected=len(comps) == 1,
        path_component_count=len(comps),
        local_connectedness=min_local_connectedness(frame),
    )


@dataclass(frozen=True)
class PreservationReport:
    """How much frame structure survived filtration and untangling.

    The ``*_preserved`` fields are None when the source lacks the
    property.  ``path_components_equal`` and ``common_successor_ok``
    compare the filtered and untangled frames and are None when the
    closure misses the successor-tracking diamond, since the guarantees
    ride on it; the reason is then listed in ``warnings``.
    """

    source: FrameProfile
    filtered: FrameProfile
    untangled: FrameProfile
    serial_preserved: bool | None
    reflexive_preserved: bool | None
    connected_preserved: bool | None
    sees_reflexive: bool | None
    path_components_equal: bool | None
    common_successor_ok: bool | None
    locally_n_connected_for: tuple[int, ...]
    warnings: tuple[str, ...]


def preservation_report(
    fr: FiltrationResult, ut: UntangleResult, m: KripkeModel
) -> PreservationReport:
    source = _profile(m.frame)
    filtered = _profile(fr.filtered_frame())
    untangled = _profile(ut.untangled_frame())
    warnings: list[str] = []

    tracks_successors = Dia(Top()) in fr.closure
    if not tracks_successors:
        warnings.append(
            "closure lacks <>true, so path components and joins of the"
            " two quotients need not match"
        )
    if fr.mode != "refined":
        warnings.append(
            "standard mode does not keep distinct maximal clusters apart,"
            " so local connectedness may degrade"
        )
    missing = {
        a for a in m.val if m.val[a]
    } - fr.closure.atoms
    if missing:
        warnings.append(
            "closure misses valued atoms ("
            + ", ".join(sorted(missing))
            + "), so the type alphabet cannot separate all maximal clusters"
        )

    serial_preserved = None
    sees_reflexive = None
    if source.serial:
        serial_preserved = filtered.serial and untangled.serial
        rt = ut.r_t
        reflexive_worlds = {w for w in ut.quotient_worlds if (w, w) in rt}
        sees_reflexive = all(
            any((w, v) in rt for v in reflexive_worlds)
            for w in ut.quotient_worlds
        )
    reflexive_preserved = None
    if source.reflexive:
        reflexive_preserved = filtered.reflexive and untangled.reflexive
    connected_preserved = None
    if source.connected:
        connected_preserved = filtered.connected and untangled.connected

    path_components_equal = None
    common_successor_ok = None
    if tracks_successors:
        path_components_equal = set(path_components(fr.filtered_frame())) == set(
            path_components(ut.untangled_frame())
        )
        rt = ut.r_t
        common_successor_ok = all(
            any((u, w) in rt and (v, w) in rt for w in ut.quotient_worlds)
            for (u, v) in fr.r_phi
            if (u, v) not in rt and (v, u) not in rt
        )

    top = max(
        source.local_connectedness,
        filtered.local_connectedness,
        untangled.local_connectedness,
    )
    floor = max(filtered.local_connectedness, untangled.local_connectedness)
    locally_for = tuple(n for n in range(1, top + 1) if n >= floor)

    return PreservationReport(
        source=source,
        filtered=filtered,
        untangled=untangled,
        serial_preserved=serial_preserved,
        reflexive_preserved=reflexive_preserved,
        connected_preserved=connected_preserved,
        sees_reflexive=sees_reflexive,
        path_components_equal=path_components_equal,
        common_successor_ok=common_successor_ok,
        locally_n_connected_for=locally_for,
        warnings=tuple(warnings),
    )
