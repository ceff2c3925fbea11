import numpy as np
import pytest

from weaksym.errors import (
    IndefiniteChargeError,
    ValidationError,
    WeaksymError,
)
from weaksym.model import build_aklt_model, spin1_operators
from weaksym.symmetry import (
    GroupTable,
    SymmetryAction,
    VirtualRep,
    cocycle_commutator,
    endpoint_charge,
    extract_virtual_rep,
    verify_transformation_law,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0 + 0j, -1.0])


# --- group table -------------------------------------------------------------

def test_klein_four_group_axioms():
    group = build_aklt_model(0.3).group
    group.validate()
    assert group.identity == "1"
    assert set(group.labels) == {"1", "R_x", "R_y", "R_z"}
    for g in group.labels:
        assert group.inverse(g) == g
        assert group.order(g) == (1 if g == "1" else 2)
        for h in group.labels:
            assert group.commutes(g, h)
    assert group.multiply("R_x", "R_y") == "R_z"


def test_group_table_rejects_broken_closure():
    with pytest.raises(ValidationError):
        GroupTable.from_table(["e", "a"], [["e", "a"], ["a", "b"]])


def test_group_table_rejects_missing_identity():
    with pytest.raises(ValidationError):
        GroupTable.from_table(["e", "a"], [["a", "e"], ["a", "e"]])


# --- transformation law --------------------------------------------------------

def test_law_residual_small_for_extracted_rep():
    model = build_aklt_model(0.3)
    act = model.action("R_z")
    rep, theta = extract_virtual_rep(model.lpdo, act)
    assert verify_transformation_law(model.lpdo, act, rep, theta=theta) < 1e-10


def test_law_identity_is_exact():
    model = build_aklt_model(0.3)
    act = model.action("1")
    rep = VirtualRep("1", np.eye(2))
    assert verify_transformation_law(model.lpdo, act, rep, theta=0.0) < 1e-14


def test_law_rejects_wrong_representative():
    """sigma_x is not the R_z representative; the residual is order one."""
    model = build_aklt_model(0.3)
    act = model.action("R_z")
    rep = VirtualRep("R_z", SX)
    assert verify_transformation_law(model.lpdo, act, rep, theta=0.0) > 0.1


# --- extraction ---------------------------------------------------------------

def test_extract_pure_point_rz_gives_sigma_z():
    model = build_aklt_model(0.0)
    rep, theta = extract_virtual_rep(model.lpdo, model.action("R_z"))
    assert abs(abs(np.trace(rep.v @ SZ)) - 2.0) < 1e-8
    assert np.abs(np.exp(1j * theta) - 1.0) < 1e-8


def test_extract_gauge_makes_peak_entry_real_positive():
    model = build_aklt_model(0.3)
    for g in ("R_x", "R_y", "R_z"):
        rep, _ = extract_virtual_rep(model.lpdo, model.action(g))
        flat = rep.v.ravel()
        peak = flat[np.argmax(np.abs(flat))]
        assert peak.real > 0 and abs(peak.imag) < 1e-10
        np.testing.assert_allclose(rep.v.conj().T @ rep.v, np.eye(2), atol=1e-10)


def test_extract_expected_representatives():
    """Gauge-fixed virtual representations of the Klein group on AKLT."""
    model = build_aklt_model(0.3)
    expected = {
        "1": np.eye(2),
        "R_x": SX,
        "R_y": np.array([[0.0, 1.0], [-1.0, 0.0]]),
        "R_z": SZ,
    }
    for g, v in expected.items():
        rep, _ = extract_virtual_rep(model.lpdo, model.action(g))
        np.testing.assert_allclose(rep.v, v, atol=1e-8)


def test_extract_identity_trivial():
    model = build_aklt_model(0.4)
    rep, theta = extract_virtual_rep(model.lpdo, model.action("1"))
    np.testing.assert_allclose(rep.v, np.eye(2), atol=1e-10)
    assert abs(theta) < 1e-10


def test_extract_succeeds_at_critical_point():
    """Extraction runs on T(1), which stays gapped at p = 1/2."""
    model = build_aklt_model(0.5)
    rep, theta = extract_virtual_rep(model.lpdo, model.action("R_x"))
    assert verify_transformation_law(model.lpdo, model.action("R_x"), rep, theta=theta) < 1e-8


def test_extract_rejects_non_symmetry():
    model = build_aklt_model(0.3)
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    bogus = SymmetryAction(element="R_z", u=q, ua=model.action("R_z").ua)
    with pytest.raises(WeaksymError):
        extract_virtual_rep(model.lpdo, bogus)


# --- cocycles and charges -------------------------------------------------------

def test_cocycle_pauli_pairs():
    rx = VirtualRep("x", SX)
    ry = VirtualRep("y", SY)
    rz = VirtualRep("z", SZ)
    ident = VirtualRep("1", np.eye(2))
    assert abs(cocycle_commutator(rx, rz) - (-1)) < 1e-14
    assert abs(cocycle_commutator(rx, ry) - (-1)) < 1e-14
    assert abs(cocycle_commutator(ident, rz) - 1) < 1e-14


def test_endpoint_charges_under_rz():
    ops = spin1_operators()
    model = build_aklt_model(0.3)
    act = model.action("R_z")
    assert abs(endpoint_charge(ops["S_x"], act) - (-1)) < 1e-12
    assert abs(endpoint_charge(ops["S_y"], act) - (-1)) < 1e-12
    assert abs(endpoint_charge(ops["S_z"], act) - 1) < 1e-12
    assert abs(endpoint_charge(ops["S_0"], act) - 1) < 1e-12


def test_endpoint_charge_rejects_mixed_charge():
    ops = spin1_operators()
    model = build_aklt_model(0.3)
    with pytest.raises(IndefiniteChargeError):
        endpoint_charge(ops["S_x"] + ops["S_z"], model.action("R_z"))
