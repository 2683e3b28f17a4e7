"""Translations between the tangle language, the mu-calculus, and the
derivative fragment.

``to_mu`` rewrites each tangle into its greatest-fixpoint unfolding: a fresh
variable ``q`` and the conjunction, over the member formulas, of ``<>(member
& q)`` (with ``<d>`` in place of ``<>`` for the derivative tangle).  The
result is equivalent on every transitive Kripke model and on every
topological model.

``to_d`` eliminates the closure modalities in favour of derivative ones:
``[]phi`` becomes ``phi & [d]phi``, ``<>phi`` becomes ``phi | <d>phi`` and
``<t>{D}`` becomes ``conj(D) | <d>conj(D) | <dt>{D}`` (members translated).
The result is equivalent on reflexive Kripke models, and on a topological
space exactly when every point derivative is closed.

``star`` is the reflexive-transitive reading of the box-and-fixpoint
fragment: ``[]phi`` becomes ``nu q. (phi & []q)``.  Evaluating the result
over a frame equals evaluating the input over the frame's
reflexive-transitive closure.

Fresh variables are ``_g0, _g1, ...``, skipping every identifier of the
input formula, allocated one per rewritten node in depth-first order.
"""

from __future__ import annotations

from typing import Iterator

from .formula import (
    And,
    Atom,
    Bot,
    Box,
    BoxD,
    Dia,
    DiaD,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Mu,
    Neg,
    Nu,
    Or,
    Tangle,
    TangleD,
    Top,
    all_names,
    conj,
    fresh_names,
)


class TranslationError(ValueError):
    """The input lies outside the fragment a translation is defined on."""


def to_mu(phi: Formula) -> Formula:
    """Replace every tangle by its greatest-fixpoint encoding."""
    fresh = fresh_names(all_names(phi))

    def walk(f: Formula) -> Formula:
        if isinstance(f, (Atom, Top, Bot)):
            return f
        if isinstance(f, Neg):
            return Neg(walk(f.sub))
        if isinstance(f, And):
            return And(walk(f.left), walk(f.right))
        if isinstance(f, Or):
            return Or(walk(f.left), walk(f.right))
        if isinstance(f, Implies):
            return Implies(walk(f.left), walk(f.right))
        if isinstance(f, Iff):
            return Iff(walk(f.left), walk(f.right))
        if isinstance(f, Box):
            return Box(walk(f.sub))
        if isinstance(f, Dia):
            return Dia(walk(f.sub))
        if isinstance(f, BoxD):
            return BoxD(walk(f.sub))
        if isinstance(f, DiaD):
            return DiaD(walk(f.sub))
        if isinstance(f, Forall):
            return Forall(walk(f.sub))
        if isinstance(f, Exists):
            return Exists(walk(f.sub))
        if isinstance(f, Mu):
            return Mu(f.var, walk(f.body))
        if isinstance(f, Nu):
            return Nu(f.var, walk(f.body))
        if isinstance(f, (Tangle, TangleD)):
            q = next(fresh)
            step = Dia if isinstance(f, Tangle) else DiaD
            body = conj(step(And(walk(m), Atom(q))) for m in f.members)
            return Nu(q, body)
        raise TypeError(f"not a formula: {f!r}")

    return walk(phi)


def to_d(phi: Formula) -> Formula:
    """Rewrite closure modalities into derivative ones."""

    def walk(f: Formula) -> Formula:
        if isinstance(f, (Atom, Top, Bot)):
            return f
        if isinstance(f, Neg):
            return Neg(walk(f.sub))
        if isinstance(f, And):
            return And(walk(f.left), walk(f.right))
        if isinstance(f, Or):
            return Or(walk(f.left), walk(f.right))
        if isinstance(f, Implies):
            return Implies(walk(f.left), walk(f.right))
        if isinstance(f, Iff):
            return Iff(walk(f.left), walk(f.right))
        if isinstance(f, Box):
            sub = walk(f.sub)
            return And(sub, BoxD(sub))
        if isinstance(f, Dia):
            sub = walk(f.sub)
            return Or(sub, DiaD(sub))
        if isinstance(f, BoxD):
            return BoxD(walk(f.sub))
        if isinstance(f, DiaD):
            return DiaD(walk(f.sub))
        if isinstance(f, Forall):
            return Forall(walk(f.sub))
        if isinstance(f, Exists):
            return Exists(walk(f.sub))
        if isinstance(f, Mu):
            return Mu(f.var, walk(f.body))
        if isinstance(f, Nu):
            return Nu(f.var, walk(f.body))
        if isinstance(f, Tangle):
            members = tuple(walk(m) for m in f.members)
            body = conj(members)
            return Or(Or(body, DiaD(body)), TangleD(members))
        if isinstance(f, TangleD):
            return TangleD(tuple(walk(m) for m in f.members))
        raise TypeError(f"not a formula: {f!r}")

    return walk(phi)


def star(phi: Formula) -> Formula:
    """Reflexive-transitive rewriting of the box/fixpoint fragment.

    Defined on formulas built from atoms, constants, boolean connectives,
    the plain box and diamond, and the fixpoint binders; anything else
    raises :class:`TranslationError`.
    """
    fresh = fresh_names(all_names(phi))

    def walk(f: Formula) -> Formula:
        if isinstance(f, (Atom, Top, Bot)):
            return f
        if isinstance(f, Neg):
            return Neg(walk(f.sub))
        if isinstance(f, And):
            return And(walk(f.left), walk(f.right))
        if isinstance(f, Or):
            return Or(walk(f.left), walk(f.right))
        if isinstance(f, Implies):
            return Implies(walk(f.left), walk(f.right))
        if isinstance(f, Iff):
            return Iff(walk(f.left), walk(f.right))
        if isinstance(f, Box):
            q = next(fresh)
            return Nu(q, And(walk(f.sub), Box(Atom(q))))
        if isinstance(f, Dia):
            # diamond is the negated box of the negation
            return Neg(walk(Box(Neg(f.sub))))
        if isinstance(f, Mu):
            return Mu(f.var, walk(f.body))
        if isinstance(f, Nu):
            return Nu(f.var, walk(f.body))
        raise TranslationError(
            f"operator outside the box/fixpoint fragment: {f}"
        )

    return walk(phi)
