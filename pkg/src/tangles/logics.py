"""Hilbert-system building blocks: axiom schemas, logic profiles as frame
condition bundles, exhaustive frame validity, and bounded model search.

Nothing here decides theoremhood.  A profile names a frame class; validity is
checked by brute force over valuations, and satisfiability by brute force over
small frames of that class.  Both searches carry explicit budgets so that
"too big to try" is never conflated with "no".
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .formula import (
    And,
    Atom,
    Box,
    BoxD,
    Dia,
    Exists,
    Forall,
    Formula,
    Implies,
    Neg,
    Tangle,
    Top,
    box_star,
    conj,
    dia_star,
    disj,
    free_atoms,
    pretty,
)
from .kripke import (
    Evaluator,
    Frame,
    KripkeModel,
    locally_n_connected,
    path_components,
    relation_properties,
)


class SchemaError(ValueError):
    """Unknown schema id or arguments that do not fit its arity."""


class ProfileError(ValueError):
    """A logic name that does not parse."""


class BudgetExceededError(RuntimeError):
    """The search was cut off before it could finish; the question is open."""


# ---------------------------------------------------------------------------
# Axiom schemas


def _neg(phi: Formula) -> Formula:
    """Negate, collapsing a double negation."""
    return phi.sub if isinstance(phi, Neg) else Neg(phi)


def _exclusive(parts: Sequence[Formula], i: int) -> Formula:
    """The i-th member of a pairwise exclusion family: parts[i] and not the
    others.  Duplicate conjuncts (as arise when one part is the negation of
    another) are dropped, so the single-atom instances come out in their
    familiar short form."""
    seen: set[str] = set()
    kept: list[Formula] = []
    for f in [parts[i]] + [_neg(parts[j]) for j in range(len(parts)) if j != i]:
        key = pretty(f)
        if key not in seen:
            seen.add(key)
            kept.append(f)
    return conj(kept)


_G_RE = re.compile(r"^G([1-9]\d*)(d?)$")

#: Schema ids with fixed arity; G1, G2, ... and G1d are recognised by pattern.
BASE_SCHEMAS = ("K", "4", "T", "D", "U", "C", "Fix", "Ind", "4t", "Tt")


def _members_arg(args: tuple, schema: str) -> tuple[Formula, ...]:
    if not args or isinstance(args[0], Formula):
        raise SchemaError(f"schema '{schema}' wants a set of member formulas first")
    members = tuple(args[0])
    if not members or not all(isinstance(f, Formula) for f in members):
        raise SchemaError(f"schema '{schema}' wants a non-empty set of formulas")
    return members


def _formulas(args: tuple, k: int, schema: str) -> tuple[Formula, ...]:
    if len(args) != k or not all(isinstance(f, Formula) for f in args):
        noun = "formula" if k == 1 else "formulas"
        raise SchemaError(f"schema '{schema}' takes exactly {k} {noun}")
    return args


def instantiate(schema: str, *args) -> Formula:
    """Build one instance of a named axiom schema.

    Plain schemas take formulas: K(a, b), 4(a), T(a), U(a), C(a), D().
    Tangle schemas take a member set first: Fix(members, gamma=None),
    Ind(members, a), 4t(members), Tt(members).  Gn takes n+1 formulas
    (default: atoms p0..pn); G1d is the derivative-language variant.
    """
    if schema == "K":
        a, b = _formulas(args, 2, schema)
        return Implies(Box(Implies(a, b)), Implies(Box(a), Box(b)))
    if schema == "4":
        (a,) = _formulas(args, 1, schema)
        return Implies(Dia(Dia(a)), Dia(a))
    if schema == "T":
        (a,) = _formulas(args, 1, schema)
        return Implies(Box(a), a)
    if schema == "D":
        if args:
            raise SchemaError("schema 'D' takes no arguments")
        return Dia(Top())
    if schema == "U":
        (a,) = _formulas(args, 1, schema)
        return Implies(Forall(a), Box(a))
    if schema == "C":
        (a,) = _formulas(args, 1, schema)
        return Implies(
            Forall(disj([box_star(a), box_star(Neg(a))])),
            disj([Forall(a), Forall(Neg(a))]),
        )
    if schema == "Fix":
        members = _members_arg(args, schema)
        t = Tangle(members)
        if len(args) == 2:
            gamma = args[1]
            if not isinstance(gamma, Formula):
                raise SchemaError("schema 'Fix' wants a single member formula second")
            return Implies(t, Dia(And(gamma, t)))
        if len(args) != 1:
            raise SchemaError("schema 'Fix' takes a member set and optionally one member")
        return conj([Implies(t, Dia(And(g, t))) for g in t.members])
    if schema == "Ind":
        members = _members_arg(args, schema)
        if len(args) != 2 or not isinstance(args[1], Formula):
            raise SchemaError("schema 'Ind' takes a member set and one formula")
        phi = args[1]
        t = Tangle(members)
        step = Implies(phi, conj([Dia(And(g, phi)) for g in t.members]))
        return Implies(box_star(step), Implies(phi, t))
    if schema == "4t":
        members = _members_arg(args, schema)
        if len(args) != 1:
            raise SchemaError("schema '4t' takes just a member set")
        t = Tangle(members)
        return Implies(Dia(t), t)
    if schema == "Tt":
        members = _members_arg(args, schema)
        if len(args) != 1:
            raise SchemaError("schema 'Tt' takes just a member set")
        t = Tangle(members)
        return Implies(conj(t.members), t)

    m = _G_RE.match(schema)
    if m:
        n = int(m.group(1))
        derivative = bool(m.group(2))
        if derivative and n != 1:
            raise SchemaError("only G1 has a derivative-language form")
        parts: tuple[Formula, ...]
        if args:
            parts = _formulas(args, n + 1, schema)
        else:
            parts = tuple(Atom(f"p{i}") for i in range(n + 1))
        qs = [_exclusive(parts, i) for i in range(n + 1)]
        if derivative:
            return Implies(
                BoxD(disj([Box(q) for q in qs])),
                disj([BoxD(_neg(q)) for q in qs]),
            )
        return Implies(
            conj([Dia(q) for q in qs]),
            Dia(conj([dia_star(_neg(q)) for q in qs])),
        )
    raise SchemaError(f"unknown schema '{schema}'")


@dataclass(frozen=True)
class SchemaInstance:
    """A schema id, the arguments it was applied to, and the result."""

    schema: str
    args: tuple
    formula: Formula


def schema_instance(schema: str, *args) -> SchemaInstance:
    formula = instantiate(schema, *args)
    recorded = tuple(tuple(a) if not isinstance(a, Formula) else a for a in args)
    return SchemaInstance(schema, recorded, formula)


# ---------------------------------------------------------------------------
# Logic profiles

_PROFILE_RE = re.compile(r"^(K4|KD4|S4)(?:G([1-9]\d*))?(t)?(?:\.U(C)?)?$")


@dataclass(frozen=True)
class LogicProfile:
    """A logic name resolved to frame conditions and a language fragment.

    Transitivity is common to every profile.  The fragment records which
    connectives the logic's language is meant to carry; nothing downstream
    enforces it, but reports quote it.
    """

    name: str
    fragment: str
    serial: bool = False
    reflexive: bool = False
    connected: bool = False
    local_connectedness: int | None = None

    def conditions(self) -> dict:
        return {
            "transitive": True,
            "serial": self.serial,
            "reflexive": self.reflexive,
            "connected": self.connected,
            "locally_n_connected": self.local_connectedness,
        }

    @property
    def schemas(self) -> tuple[str, ...]:
        """The schema ids this profile's Hilbert system adds on top of K."""
        out = ["K", "4"]
        if self.serial:
            out.append("D")
        if self.reflexive:
            out.append("T")
        if self.local_connectedness is not None:
            out.append(f"G{self.local_connectedness}")
        if "tangle" in self.fragment:
            out += ["Fix", "Ind"]
        if "universal" in self.fragment:
            out.append("U")
        if self.connected:
            out.append("C")
        return tuple(out)

    def frame_violations(self, frame: Frame) -> tuple[str, ...]:
        props = relation_properties(frame)
        out = []
        if not props.transitive:
            out.append("transitive")
        if self.serial and not props.serial:
            out.append("serial")
        if self.reflexive and not props.reflexive:
            out.append("reflexive")
        if self.connected and len(path_components(frame)) > 1:
            out.append("connected")
        n = self.local_connectedness
        if n is not None and not locally_n_connected(frame, n):
            out.append(f"locally_{n}_connected")
        return tuple(out)

    def frame_ok(self, frame: Frame) -> bool:
        return not self.frame_violations(frame)


def parse_profile(name: str) -> LogicProfile:
    """Resolve a logic name like K4t, KD4G1.U or S4t.UC to a profile."""
    text = name.strip()
    if text in ("S4mu", "S4μ"):
        return LogicProfile(name="S4mu", fragment="mu", reflexive=True)
    m = _PROFILE_RE.match(text)
    if not m:
        raise ProfileError(f"cannot parse logic name '{name}'")
    base, g, t, c = m.groups()
    fragment = "tangle" if t else "modal"
    if ".U" in text:
        fragment += "+universal"
    return LogicProfile(
        name=text,
        fragment=fragment,
        serial=base == "KD4",
        reflexive=base == "S4",
        connected=bool(c),
        local_connectedness=int(g) if g else None,
    )


# ---------------------------------------------------------------------------
# Frame enumeration

#: Isomorphism pruning is exact up to this many worlds; larger frames are
#: enumerated labeled.  24 permutations per candidate is cheap, 120 is not.
_CANONICAL_LIMIT = 4


def _canonical(rows: Sequence[int], n: int) -> bool:
    """Is this adjacency matrix the lexicographically least among its
    relabelings?  Sound de-duplication: every isomorphism class keeps
    exactly one representative."""
    base = _matrix_key(rows, range(n), n)
    for perm in itertools.permutations(range(n)):
        if _matrix_key(rows, perm, n) < base:
            return False
    return True


def _matrix_key(rows: Sequence[int], perm: Sequence[int], n: int) -> int:
    key = 0
    for i in perm:
        for j in perm:
            key = key << 1 | rows[i] >> j & 1
    return key


def enumerate_frames(
    n: int,
    *,
    serial: bool = False,
    reflexive: bool = False,
    connected: bool = False,
    local_connectedness: int | None = None,
    up_to_iso: bool = True,
) -> Iterator[Frame]:
    """All transitive frames on worlds w0..w{n-1} meeting the given
    conditions, in ascending row-major adjacency order.

    Transitivity is enforced incrementally during the row search; the other
    conditions prune rows (serial, reflexive) or filter at the leaf
    (connected, local connectedness).  With up_to_iso, isomorphic duplicates
    are dropped for n <= 4 via a lexicographic canonicity test.
    """
    if n < 1:
        raise ValueError("frame size must be at least 1")
    worlds = tuple(f"w{i}" for i in range(n))
    candidates = []
    for i in range(n):
        opts = range(1, 1 << n) if serial or reflexive else range(1 << n)
        if reflexive:
            opts = [m for m in opts if m >> i & 1]
        candidates.append(list(opts))
    rows: list[int] = []

    def consistent(m: int) -> bool:
        i = len(rows)
        for j in range(i):
            if m >> j & 1 and rows[j] & ~m:
                return False
            if rows[j] >> i & 1 and m & ~rows[j]:
                return False
        return True

    def search() -> Iterator[Frame]:
        if len(rows) == n:
            if up_to_iso and n <= _CANONICAL_LIMIT and not _canonical(rows, n):
                return
            rel = frozenset(
                (worlds[i], worlds[j])
                for i in range(n)
                for j in range(n)
                if rows[i] >> j & 1
            )
            frame = Frame(worlds, rel)
            if connected and len(path_components(frame)) > 1:
                return
            if local_connectedness is not None and not locally_n_connected(
                frame, local_connectedness
            ):
                return
            yield frame
            return
        for m in candidates[len(rows)]:
            if consistent(m):
                rows.append(m)
                yield from search()
                rows.pop()

    return search()


# ---------------------------------------------------------------------------
# Validity and bounded satisfiability

#: Valuation budget for frame_validates: at most this many valuations.
VALUATION_BUDGET = 1 << 22
#: Work budget for bounded_sat: at most this many frame/valuation pairs.
SEARCH_BUDGET = 1 << 21


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of an exhaustive validity check on one frame.

    On failure the witness names a refuting valuation (atom -> worlds) and
    the world where the formula comes out false.
    """

    valid: bool
    checked: int
    witness_valuation: dict | None = None
    witness_world: str | None = None


def _valuation_masks(atoms: Sequence[str], n: int) -> Iterator[dict[str, int]]:
    # atom-major ascending: the first atom's mask varies slowest
    for combo in itertools.product(range(1 << n), repeat=len(atoms)):
        yield dict(zip(atoms, combo))


def _masks_to_val(masks: Mapping[str, int], worlds: Sequence[str]) -> dict[str, tuple[str, ...]]:
    return {
        a: tuple(w for i, w in enumerate(worlds) if m >> i & 1)
        for a, m in masks.items()
    }


def frame_validates(frame: Frame, phi: Formula, budget: int = VALUATION_BUDGET) -> ValidityReport:
    """Check phi at every world under every valuation of its free atoms.

    Only the atoms occurring free in phi are varied; others cannot affect
    its truth.  Raises BudgetExceededError when the valuation space is
    larger than the budget.
    """
    atoms = sorted(free_atoms(phi))
    n = len(frame.worlds)
    space = 1 << (len(atoms) * n)
    if space > budget:
        raise BudgetExceededError(
            f"{space} valuations exceed the budget of {budget}"
        )
    ev = Evaluator(frame)
    checked = 0
    for masks in _valuation_masks(atoms, n):
        checked += 1
        ext = ev.extension(phi, masks)
        if ext != ev.full:
            bad = next(i for i in range(n) if not ext >> i & 1)
            return ValidityReport(
                valid=False,
                checked=checked,
                witness_valuation=_masks_to_val(masks, frame.worlds),
                witness_world=frame.worlds[bad],
            )
    return ValidityReport(valid=True, checked=checked)


def bounded_sat(
    phi: Formula,
    profile: LogicProfile,
    max_worlds: int,
    budget: int = SEARCH_BUDGET,
) -> KripkeModel | None:
    """Search for a model of phi on a frame of the profile's class.

    Frames are enumerated by size, then adjacency order, then valuations
    atom-major ascending; the first hit is therefore the least witness, and
    the same one on every run.  None means no model within max_worlds;
    BudgetExceededError means the search was cut short, which is a weaker
    statement.
    """
    if max_worlds < 1:
        raise ValueError("max_worlds must be at least 1")
    atoms = sorted(free_atoms(phi))
    spent = 0
    for n in range(1, max_worlds + 1):
        per_frame = 1 << (len(atoms) * n)
        for frame in enumerate_frames(
            n,
            serial=profile.serial,
            reflexive=profile.reflexive,
            connected=profile.connected,
            local_connectedness=profile.local_connectedness,
        ):
            spent += per_frame
            if spent > budget:
                raise BudgetExceededError(
                    f"search budget {budget} exhausted on {n}-world frames"
                )
            ev = Evaluator(frame)
            for masks in _valuation_masks(atoms, n):
                if ev.extension(phi, masks):
                    return KripkeModel(frame, _masks_to_val(masks, frame.worlds))
    return None


# ---------------------------------------------------------------------------
# Fixtures


def figure3_model(m: int) -> KripkeModel:
    """The m-th initial segment of the fence model: spine worlds a0..am, each
    seeing the two fence posts below it (an sees bn and b(n+1)), reflexive
    closure.  Posts carry r, g, b in rotation and pi on the posts b(3i),
    b(3i+1), so no post satisfies two distinct pi and no world sees all
    three colours.  The segment ends on a post so that every spine world
    keeps both its posts.
    """
    if m < 0:
        raise ValueError("m must be at least 0")
    spine = [f"a{k}" for k in range(m + 1)]
    posts = [f"b{k}" for k in range(m + 2)]
    worlds = tuple(spine + posts)
    rel = {(w, w) for w in worlds}
    for k in range(m + 1):
        rel.add((f"a{k}", f"b{k}"))
        rel.add((f"a{k}", f"b{k + 1}"))
    colours = ("r", "g", "b")
    val: dict[str, set[str]] = {c: set() for c in colours}
    for k in range(m + 2):
        val[colours[k % 3]].add(f"b{k}")
    i = 0
    while 3 * i <= m + 1:
        val[f"p{i}"] = {f"b{k}" for k in (3 * i, 3 * i + 1) if k <= m + 1}
        i += 1
    return KripkeModel(Frame(worlds, frozenset(rel)), val)


def figure3_constraints(max_index: int) -> tuple[Formula, ...]:
    """The colour-separation constraints the fence fixture is built to
    satisfy, for post families p0..p{max_index}: somewhere a world sees pi
    together with both r and g; no world sees two distinct pi; no world sees
    all three colours; and seeing pi while avoiding b propagates ◇pi to all
    successors."""
    if max_index < 0:
        raise ValueError("max_index must be at least 0")
    ps = [Atom(f"p{i}") for i in range(max_index + 1)]
    r, g, b = Atom("r"), Atom("g"), Atom("b")
    out: list[Formula] = []
    for p in ps:
        out.append(Exists(conj([Dia(p), Dia(r), Dia(g)])))
    for i, p in enumerate(ps):
        for q in ps[i + 1 :]:
            out.append(Forall(Neg(And(Dia(p), Dia(q)))))
    out.append(Forall(Neg(conj([Dia(r), Dia(g), Dia(b)]))))
    for p in ps:
        out.append(Forall(Implies(And(Dia(p), Box(Neg(b))), Box(Dia(p)))))
    return tuple(out)


def named_frames() -> dict[str, Frame]:
    """Small frames that defeat one axiom each once its condition is
    dropped: T and Tt on the irreflexive point, D on the successorless
    point, C on two disconnected reflexive points, the local-connectedness
    axiom on the fork with an irreflexive root, and 4 (and the tangle
    transfer axiom, read via its fixpoint encoding) on a chain missing its
    composed edge."""
    loop = lambda *ws: frozenset((w, w) for w in ws)
    return {
        "irreflexive_point": Frame(("w0",), frozenset()),
        "successorless_point": Frame(("w0",), frozenset()),
        "two_islands": Frame(("w0", "w1"), loop("w0", "w1")),
        "fork": Frame(("r", "x", "y"), frozenset({("r", "x"), ("r", "y")}) | loop("x", "y")),
        "broken_chain": Frame(("a", "b", "c"), frozenset({("a", "b"), ("b", "c"), ("c", "c")})),
    }
