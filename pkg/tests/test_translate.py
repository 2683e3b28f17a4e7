"""Translations: fixpoint unfolding of tangles, derivative rewriting,
reflexive-transitive star."""

import random

import pytest

from tangles import (
    And,
    Atom,
    Box,
    BoxD,
    Dia,
    DiaD,
    FiniteSpace,
    Forall,
    KripkeModel,
    Neg,
    Nu,
    Or,
    Tangle,
    TangleD,
    TopoModel,
    TranslationError,
    closures,
    model_check,
    star,
    to_d,
    to_mu,
    topo_model_check,
)
from gen import random_formula, random_model, random_space, random_tangle_formula

p, q = Atom("p"), Atom("q")
g0, g1 = Atom("_g0"), Atom("_g1")


# ---------------------------------------------------------------------------
# to_mu


def test_to_mu_structure():
    assert to_mu(Tangle((p, q))) == Nu(
        "_g0", And(Dia(And(p, g0)), Dia(And(q, g0)))
    )
    assert to_mu(TangleD((p,))) == Nu("_g0", DiaD(And(p, g0)))
    # tangle-free input comes back unchanged
    phi = Box(Or(p, Neg(q)))
    assert to_mu(phi) == phi


def test_to_mu_freshness():
    # _g0 already occurs, so the binder moves to _g1
    phi = And(Tangle((p,)), g0)
    assert to_mu(phi) == And(Nu("_g1", Dia(And(p, g1))), g0)


@pytest.mark.parametrize("seed", range(100))
def test_to_mu_agrees_on_transitive_models(seed):
    rng = random.Random(seed)
    model = random_model(rng, 6, kind="transitive")
    phi = (
        random_tangle_formula(rng)
        if seed % 2
        else random_formula(rng, rng.randint(1, 4), tangles=True, fixpoints=True)
    )
    assert model_check(model, phi) == model_check(model, to_mu(phi))


@pytest.mark.parametrize("seed", range(60))
def test_to_mu_agrees_on_spaces(seed):
    rng = random.Random(1000 + seed)
    model = random_space(rng)
    phi = random_formula(
        rng, rng.randint(1, 4), tangles=True, fixpoints=True, derivative=True
    )
    assert topo_model_check(model, phi) == topo_model_check(model, to_mu(phi))


# ---------------------------------------------------------------------------
# to_d


def test_to_d_structure():
    assert to_d(Box(p)) == And(p, BoxD(p))
    assert to_d(Dia(p)) == Or(p, DiaD(p))
    inner = And(p, BoxD(p))
    assert to_d(Box(Box(p))) == And(inner, BoxD(inner))
    body = And(p, q)
    assert to_d(Tangle((p, q))) == Or(Or(body, DiaD(body)), TangleD((p, q)))
    # derivative operators pass through
    assert to_d(DiaD(Box(p))) == DiaD(And(p, BoxD(p)))


@pytest.mark.parametrize("seed", range(80))
def test_to_d_agrees_on_reflexive_models(seed):
    rng = random.Random(2000 + seed)
    model = random_model(rng, 6, kind="reflexive")
    phi = random_formula(
        rng, rng.randint(1, 4), tangles=True, fixpoints=True, universal=True
    )
    assert model_check(model, phi) == model_check(model, to_d(phi))


def test_to_d_on_spaces():
    # Sierpinski has closed point derivatives, so the rewriting is faithful
    sierp = FiniteSpace(
        ("x", "y"),
        frozenset({frozenset(), frozenset({"x"}), frozenset({"x", "y"})}),
    )
    model = TopoModel(sierp, {"p": {"x"}})
    for phi in (Box(p), Dia(p), Tangle((p,)), Tangle((p, Dia(p)))):
        assert topo_model_check(model, phi) == topo_model_check(model, to_d(phi))
    # the indiscrete doubleton is not that kind of space, and the tangle
    # of {p, <d>p} with p a singleton tells the two readings apart
    indiscrete = FiniteSpace(
        ("a", "b"), frozenset({frozenset(), frozenset({"a", "b"})})
    )
    m = TopoModel(indiscrete, {"p": {"a"}})
    phi = Tangle((p, DiaD(p)))
    assert "a" in topo_model_check(m, phi)
    assert "a" not in topo_model_check(m, to_d(phi))


# ---------------------------------------------------------------------------
# star


def test_star_structure():
    assert star(Box(p)) == Nu("_g0", And(p, Box(g0)))
    assert star(Dia(p)) == Neg(Nu("_g0", And(Neg(p), Box(g0))))
    assert star(And(p, q)) == And(p, q)


@pytest.mark.parametrize(
    "phi",
    [Forall(p), Tangle((p,)), BoxD(p), DiaD(q), TangleD((p,))],
)
def test_star_fragment(phi):
    with pytest.raises(TranslationError):
        star(phi)
    with pytest.raises(TranslationError):
        star(And(p, Box(phi)))


@pytest.mark.parametrize("seed", range(80))
def test_star_is_closure_semantics(seed):
    rng = random.Random(3000 + seed)
    model = random_model(rng, 6, kind="general")
    starred = KripkeModel(
        closures(model.frame).reflexive_transitive, model.val
    )
    phi = random_formula(
        rng, rng.randint(1, 4), tangles=False, fixpoints=True
    )
    assert model_check(model, star(phi)) == model_check(starred, phi)


@pytest.mark.parametrize("seed", range(30))
def test_translations_compose(seed):
    # untangling after derivative rewriting still matches on reflexive models
    rng = random.Random(4000 + seed)
    model = random_model(rng, 5, kind="reflexive")
    phi = random_tangle_formula(rng)
    assert model_check(model, phi) == model_check(model, to_mu(to_d(phi)))
