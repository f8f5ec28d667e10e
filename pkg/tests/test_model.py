import numpy as np
import pytest

from sepbf.model import (
    QAM4_SYMBOLS,
    AntipodalSpec,
    BeamVector,
    Constellation,
    RealBeamMatrix,
    WiretapSystem,
    validate_system,
)

from conftest import SETUP1_HB, SETUP1_HE


def test_setup1_valid():
    sys = WiretapSystem(SETUP1_HB, SETUP1_HE, 0.01, 0.01, 1.0)
    assert validate_system(sys) == []
    assert sys.n_tx == 2
    np.testing.assert_allclose(sys.gram_b, np.array(SETUP1_HB).T @ np.array(SETUP1_HB))


def test_column_mismatch():
    sys = WiretapSystem(np.ones((2, 2)), np.ones((2, 3)), 0.01, 0.01, 1.0)
    problems = validate_system(sys)
    assert any("column" in p for p in problems)
    with pytest.raises(ValueError):
        sys.check()


@pytest.mark.parametrize("field", ["n_b", "n_e", "power"])
def test_positivity(field):
    kw = dict(h_b=np.eye(2), h_e=np.eye(2), n_b=0.01, n_e=0.01, power=1.0)
    kw[field] = 0.0
    problems = validate_system(WiretapSystem(**kw))
    assert any(field in p for p in problems)


def test_non_finite():
    h = np.eye(2)
    h[0, 0] = np.nan
    assert validate_system(WiretapSystem(h, np.eye(2), 0.01, 0.01, 1.0))


def test_validate_does_not_mutate():
    sys = WiretapSystem(np.eye(2), np.eye(2), 0.01, 0.01, 1.0)
    before = sys.h_b.copy()
    validate_system(sys)
    np.testing.assert_array_equal(sys.h_b, before)


def test_antipodal_spec():
    with pytest.raises(ValueError):
        AntipodalSpec(0.0, 0.3)
    with pytest.raises(ValueError):
        AntipodalSpec(1.0, 0.6)
    assert AntipodalSpec(2j, 0.0).amplitude == 2j


def test_constellation():
    c = Constellation(QAM4_SYMBOLS)
    assert (c.m, c.length) == (4, 2)
    with pytest.raises(ValueError):
        Constellation([[1.0], [1.0]])
    with pytest.raises(ValueError):
        Constellation([[1.0]])
    sys = WiretapSystem(np.ones((1, 2)), np.ones((1, 2)), 0.01, 0.01, 1.0)
    with pytest.raises(ValueError):
        c.check_against(sys)


def test_beamvector_roundtrip():
    rng = np.random.default_rng(0)
    w_bar = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    w_bar /= 1.5 * np.linalg.norm(w_bar)
    b = BeamVector(w_bar, 2.5)
    again = BeamVector.from_w(b.w, 2.5)
    assert np.linalg.norm(again.w_bar - w_bar) <= 1e-12
    with pytest.raises(ValueError):
        BeamVector(np.array([1.0, 1.0]), 1.0)


def test_real_beam_matrix_budget():
    RealBeamMatrix(np.eye(2) * np.sqrt(0.5), 1.0)
    with pytest.raises(ValueError):
        RealBeamMatrix(np.eye(2), 1.0)
