from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from paralex.errors import DomainError, NonFiniteError, TensorError
from paralex.frame import canonical_metric, catalog_lookup
from paralex.connections import integrability
from paralex.curvature import _primary
from paralex.tensor import (
    CENTRAL4,
    Box,
    FDConfig,
    TensorValue,
    contract,
    fd_derivative,
    raise_lower,
    tensor_product,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_trace_of_identity():
    delta = TensorValue(np.eye(3), ("u", "l"))
    out = contract(delta, 0, 1)
    assert out.rank == 0
    assert float(out.entries) == 3.0


def test_contraction_reproduces_matrix_product():
    rng = np.random.default_rng(0)
    for _ in range(10):
        A, B = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
        AB = tensor_product(TensorValue(A, ("u", "l")), TensorValue(B, ("u", "l")))
        out = contract(AB, 1, 2)
        assert out.signature == ("u", "l")
        np.testing.assert_allclose(out.entries, A @ B, atol=1e-14)


def test_heisenberg_primary_contraction_vanishes():
    I = integrability(catalog_lookup("heisenberg3"), [0.3, -0.2, 0.1]).entries
    T = tensor_product(TensorValue(I, ("u", "l", "l")), TensorValue(I, ("u", "l", "l")))
    # I^a_{kj} I^i_{ar}: contract slot 0 of the first factor with slot 4 of the second
    S = contract(T, 0, 4)
    assert np.all(S.entries == 0.0)


@settings(max_examples=50, deadline=None)
@given(arrays(float, (3, 3), elements=finite), arrays(float, (3, 3), elements=finite), finite)
def test_contraction_is_linear(A, B, s):
    a, b = TensorValue(A, ("u", "l")), TensorValue(B, ("u", "l"))
    lhs = contract(a + b * s, 0, 1).entries
    rhs = contract(a, 0, 1).entries + s * contract(b, 0, 1).entries
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs))


def test_contract_errors():
    t = TensorValue(np.eye(2), ("u", "u"))
    with pytest.raises(TensorError):
        contract(t, 0, 1)
    with pytest.raises(TensorError):
        contract(TensorValue(np.eye(2), ("u", "l")), 0, 5)
    with pytest.raises(TensorError):
        contract(TensorValue(np.eye(2), ("u", "l")), 1, 1)


def test_signature_validation():
    with pytest.raises(TensorError):
        TensorValue(np.zeros((2, 2)), ("u",))
    with pytest.raises(TensorError):
        TensorValue(np.zeros((2, 3)), ("u", "l"))
    with pytest.raises(TensorError):
        TensorValue(np.zeros(2), ("x",))
    t = TensorValue(np.eye(2), ("u", "l"))
    with pytest.raises(ValueError):
        t.entries[0, 0] = 5.0


def test_lower_with_delta_is_identity():
    rng = np.random.default_rng(1)
    t = TensorValue(rng.normal(size=(3, 3, 3)), ("u", "l", "l"))
    d = TensorValue(np.eye(3), ("l", "l"))
    di = TensorValue(np.eye(3), ("u", "u"))
    out = raise_lower(t, 0, d, di)
    assert out.signature == ("l", "l", "l")
    np.testing.assert_array_equal(out.entries, t.entries)


def test_raise_then_lower_roundtrip():
    g, gi = canonical_metric(catalog_lookup("heisenberg3"), [0.7, -0.3, 0.2])
    rng = np.random.default_rng(2)
    t = TensorValue(rng.normal(size=(3, 3, 3)), ("u", "l", "u"))
    for slot in range(3):
        back = raise_lower(raise_lower(t, slot, g, gi), slot, g, gi)
        assert back.signature == t.signature
        np.testing.assert_allclose(back.entries, t.entries, atol=1e-12)


def test_lowering_primary_matches_loop_oracle():
    p = catalog_lookup("affine2")
    x = [0.4, -0.6]
    I = integrability(p, x).entries
    g, gi = canonical_metric(p, x)
    S = TensorValue(_primary(I), ("u", "l", "l", "l"))
    low = raise_lower(S, 0, g, gi).entries  # slots [i, k, j, r] with i lowered
    n = 2
    oracle = np.zeros((n,) * 4)
    for i in range(n):
        for k in range(n):
            for j in range(n):
                for r in range(n):
                    for a in range(n):
                        oracle[i, k, j, r] += g.entries[i, a] * S.entries[a, k, j, r]
    np.testing.assert_allclose(low, oracle, atol=1e-14)
    assert np.max(np.abs(low)) > 0.1


def test_raise_lower_rejects_bad_metric():
    t = TensorValue(np.ones((2, 2)), ("u", "l"))
    bad = TensorValue(np.array([[1.0, 2.0], [0.0, 1.0]]), ("l", "l"))
    with pytest.raises(TensorError):
        raise_lower(t, 0, bad, TensorValue(np.eye(2), ("u", "u")))
    indefinite = TensorValue(np.diag([1.0, -1.0]), ("l", "l"))
    with pytest.raises(TensorError):
        raise_lower(t, 0, indefinite, TensorValue(np.diag([1.0, -1.0]), ("u", "u")))


def test_fd_polynomial():
    d = fd_derivative(lambda x: x[0] ** 2, [1.0], FDConfig(step=1e-5))
    assert abs(d[0] - 2.0) <= 1e-9


def test_fd_heisenberg_entry():
    p = catalog_lookup("heisenberg3")
    d = fd_derivative(lambda x: p.w(x)[2, 1], [0.2, 0.3, -0.1])
    assert abs(d[0] - 1.0) <= 1e-9
    assert abs(d[1]) <= 1e-9 and abs(d[2]) <= 1e-9


def test_fd_fourth_order_sin():
    d = fd_derivative(lambda x: np.sin(x[0]), [0.0], FDConfig(step=1e-3, scheme=CENTRAL4))
    assert abs(d[0] - 1.0) <= 1e-11


def test_fd_richardson_improves():
    f = lambda x: np.exp(x[0])  # noqa: E731
    plain = fd_derivative(f, [0.5], FDConfig(step=1e-2))[0]
    rich = fd_derivative(f, [0.5], FDConfig(step=1e-2, richardson=True))[0]
    assert abs(rich - np.exp(0.5)) < abs(plain - np.exp(0.5)) / 100


def test_fd_tensor_gets_lower_slot():
    field = lambda x: TensorValue(np.outer(x, x), ("u", "u"))  # noqa: E731
    d = fd_derivative(field, [1.0, 2.0])
    assert d.signature == ("u", "u", "l")
    # d_r (x_i x_j) = delta_ir x_j + x_i delta_jr
    x = np.array([1.0, 2.0])
    oracle = np.einsum("ir,j->ijr", np.eye(2), x) + np.einsum("i,jr->ijr", x, np.eye(2))
    np.testing.assert_allclose(d.entries, oracle, atol=1e-8)


def test_fd_errors():
    box = Box((0.0,), (1.0,))
    with pytest.raises(DomainError):
        fd_derivative(lambda x: x[0], [1.0], domain=box)
    with pytest.raises(NonFiniteError):
        fd_derivative(lambda x: np.array([np.inf]), [1.0])
    with pytest.raises(ValueError):
        FDConfig(step=-1.0)
    with pytest.raises(ValueError):
        FDConfig(scheme="forward")


def test_nested_config():
    cfg = FDConfig().nested()
    assert cfg.step == pytest.approx(1e-3) and cfg.scheme == CENTRAL4
    assert FDConfig(step=1e-4).nested().step == pytest.approx(1e-2)
