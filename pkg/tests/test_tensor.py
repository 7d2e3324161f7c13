from itertools import permutations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projquant.tensor import (
    SymContra,
    SymCov,
    canonical_indices,
    contract,
    inner_r,
    pairing,
    sym_product,
)


def rand_cov(rng, m, p):
    return SymCov.from_function(m, p, lambda idx: float(rng.uniform(-1, 1)))


def rand_contra(rng, m, p):
    return SymContra.from_function(m, p, lambda idx: float(rng.uniform(-1, 1)))


def dense_symmetrize(a: np.ndarray) -> np.ndarray:
    p = a.ndim
    perms = list(permutations(range(p)))
    return sum(np.transpose(a, perm) for perm in perms) / len(perms)


def same(a, b, tol=1e-12):
    return np.allclose(a.to_full(), b.to_full(), rtol=tol, atol=tol)


dx = SymCov.from_full(np.array([1.0, 0.0]))
dy = SymCov.from_full(np.array([0.0, 1.0]))


def test_dx_squared():
    t = sym_product(dx, dx)
    assert (t[0, 0], t[0, 1], t[1, 1]) == (1.0, 0.0, 0.0)


def test_dx_dy():
    # [DERIVED] (dx (x) dy + dy (x) dx)/2 has (1,2)-component 1/2
    t = sym_product(dx, dy)
    assert t[0, 1] == t[1, 0] == 0.5
    assert t[0, 0] == t[1, 1] == 0.0


def test_scalar_unit():
    a = rand_cov(np.random.default_rng(0), 3, 2)
    assert same(sym_product(a, SymCov.scalar(2.5, 3)), a * 2.5)


def test_contract_diagonal_pick():
    r = SymCov.from_full(np.eye(2))
    s = SymContra(2, 2, {(0, 0): 1.0})
    assert contract(r, s).scalar_value == 1.0


def test_contract_scalar():
    s = rand_contra(np.random.default_rng(1), 2, 3)
    assert same(contract(SymCov.scalar(3.0, 2), s), s * 3.0)


def test_contract_matches_dense_loop():
    # [DERIVED] naive loop over full arrays
    rng = np.random.default_rng(2)
    t, s = rand_cov(rng, 2, 2), rand_contra(rng, 2, 2)
    T, S = t.to_full(), s.to_full()
    naive = sum(T[a, b] * S[a, b] for a in range(2) for b in range(2))
    assert contract(t, s).scalar_value == pytest.approx(naive, rel=1e-14)
    assert pairing(s, t) == pytest.approx(naive, rel=1e-14)


def test_contract_partial_dense():
    rng = np.random.default_rng(3)
    t, s = rand_cov(rng, 3, 1), rand_contra(rng, 3, 3)
    expect = np.einsum("a,abc->bc", t.to_full(), s.to_full())
    assert np.allclose(contract(t, s).to_full(), expect, rtol=1e-14)


def test_contract_degree_error():
    with pytest.raises(ValueError):
        contract(SymCov.zeros(2, 3), SymContra.zeros(2, 2))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        sym_product(SymCov.zeros(2, 1), SymCov.zeros(3, 1))


def test_inner_r_zero():
    s = rand_contra(np.random.default_rng(4), 2, 3)
    out = inner_r(SymCov.zeros(2, 2), s)
    assert out.degree == 1 and all(v == 0 for v in out.entries.values())


def test_inner_r_direct():
    # [DERIVED] sum r_ab S^ab with only r_11 S^11 nonzero: 2 * 1
    r = SymCov(2, 2, {(0, 0): 2.0})
    s = SymContra(2, 2, {(0, 0): 1.0})
    assert inner_r(r, s).scalar_value == 2.0


def test_inner_r_degree_error():
    with pytest.raises(ValueError):
        inner_r(SymCov.zeros(2, 2), SymContra.zeros(2, 1))


def test_inner_r_is_contract():
    rng = np.random.default_rng(5)
    r, s = rand_cov(rng, 3, 2), rand_contra(rng, 3, 4)
    assert inner_r(r, s).entries == contract(r, s).entries


def test_storage_is_canonical():
    t = SymCov.from_full(dense_symmetrize(np.random.default_rng(6).normal(size=(3, 3, 3))))
    assert set(t.entries) == set(canonical_indices(3, 3))
    assert t[2, 0, 1] == t[0, 1, 2]


# --- properties -------------------------------------------------------------

dims = st.integers(2, 4)
degrees = st.integers(0, 3)
seeds = st.integers(0, 2 ** 32 - 1)


@settings(max_examples=40, deadline=None)
@given(m=dims, p=degrees, q=degrees, seed=seeds)
def test_sym_product_is_dense_symmetrization(m, p, q, seed):
    rng = np.random.default_rng(seed)
    a, b = rand_cov(rng, m, p), rand_cov(rng, m, q)
    dense = dense_symmetrize(np.multiply.outer(a.to_full(), b.to_full())) if p + q else a.to_full() * b.to_full()
    assert np.allclose(sym_product(a, b).to_full(), dense, rtol=1e-12, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(m=dims, p=degrees, q=degrees, r=degrees, seed=seeds)
def test_sym_product_algebra(m, p, q, r, seed):
    rng = np.random.default_rng(seed)
    a, b, c = rand_cov(rng, m, p), rand_cov(rng, m, q), rand_cov(rng, m, r)
    assert same(sym_product(a, b), sym_product(b, a))
    assert same(sym_product(sym_product(a, b), c), sym_product(a, sym_product(b, c)))
    a2 = rand_cov(rng, m, p)
    assert same(sym_product(a + a2 * 2.0, b), sym_product(a, b) + sym_product(a2, b) * 2.0)


@settings(max_examples=40, deadline=None)
@given(m=dims, p=degrees, q=degrees, seed=seeds)
def test_diagonal_identity(m, p, q, seed):
    rng = np.random.default_rng(seed)
    a, b = rand_cov(rng, m, p), rand_cov(rng, m, q)
    x = rng.normal(size=m)
    lhs = sym_product(a, b).evaluate_diagonal(x)
    assert lhs == pytest.approx(a.evaluate_diagonal(x) * b.evaluate_diagonal(x), rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(m=dims, p=st.integers(0, 2), q=st.integers(0, 2), extra=st.integers(0, 2), seed=seeds)
def test_contract_associativity(m, p, q, extra, seed):
    rng = np.random.default_rng(seed)
    a, b = rand_cov(rng, m, p), rand_cov(rng, m, q)
    s = rand_contra(rng, m, p + q + extra)
    assert same(contract(sym_product(a, b), s), contract(a, contract(b, s)))


@settings(max_examples=30, deadline=None)
@given(m=dims, p=degrees, seed=seeds)
def test_contract_linear(m, p, seed):
    rng = np.random.default_rng(seed)
    t = rand_cov(rng, m, p)
    s1, s2 = rand_contra(rng, m, p + 1), rand_contra(rng, m, p + 1)
    assert same(contract(t, s1 + s2 * 3.0), contract(t, s1) + contract(t, s2) * 3.0)


def test_pairing_is_full_index_sum():
    rng = np.random.default_rng(7)
    t, s = rand_cov(rng, 3, 3), rand_contra(rng, 3, 3)
    full = sum(t.to_full()[i] * s.to_full()[i] for i in product(range(3), repeat=3))
    assert pairing(s, t) == pytest.approx(full, rel=1e-13)
