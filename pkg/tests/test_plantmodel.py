import numpy as np
import pytest
from numpy.testing import assert_allclose

from perimc.errors import InvalidPlant
from perimc.plantmodel import (DelayedRationalPlant, validate_plant,
                               require_valid, eval_plant,
                               inverse_numerator_realization,
                               denominator_coefficients, plant_state_space,
                               stabilize_plant, perturb_plant,
                               plant_step_response, plant_from_config,
                               plant_to_config)
from conftest import RIG_NUMERATOR, RIG_DENOMINATOR


def test_rig_plant_validation(rig_plant):
    raw = DelayedRationalPlant(RIG_NUMERATOR, RIG_DENOMINATOR, 0.2)
    report = validate_plant(raw)
    assert report.is_proper
    assert report.numerator_hurwitz
    assert not report.denominator_hurwitz
    assert report.relative_degree == 4
    assert report.worst_real_part > 0
    assert not report.accepted

    stable = validate_plant(rig_plant)
    assert stable.accepted
    assert stable.relative_degree == 4


def test_stabilize_keeps_magnitude(rig_plant):
    raw = DelayedRationalPlant(RIG_NUMERATOR, RIG_DENOMINATOR, 0.0)
    w = np.array([0.5, 3.0, 12.0, 80.0])
    mirrored = DelayedRationalPlant(rig_plant.numerator,
                                    rig_plant.denominator, 0.0)
    assert_allclose(np.abs(eval_plant(mirrored, 1j * w)),
                    np.abs(eval_plant(raw, 1j * w)), rtol=1e-8)
    assert rig_plant.denominator[-1] == pytest.approx(1.0)


def test_rejected_plants():
    with pytest.raises(InvalidPlant):
        require_valid(DelayedRationalPlant((1.0,), (-1.0, 1.0)))
    with pytest.raises(InvalidPlant):
        require_valid(DelayedRationalPlant((-1.0, 0.0, 1.0), (1.0, 2.0, 1.0)))
    with pytest.raises(InvalidPlant):
        require_valid(DelayedRationalPlant((1.0,), (1.0, 1.0), -0.1))
    with pytest.raises(InvalidPlant):
        DelayedRationalPlant((1.0,), (1.0, 0.0))
    report = validate_plant(DelayedRationalPlant((1.0, 1.0, 1.0), (1.0, 1.0)))
    assert not report.is_proper


def test_eval_plant_dc_gain():
    p = DelayedRationalPlant(RIG_NUMERATOR, RIG_DENOMINATOR, 0.2)
    assert eval_plant(p, 0.0) == pytest.approx(1.031e6 / 3e9)
    s = 2j
    expected = (1.0 / (s + 1.0)) * np.exp(-0.1 * s)
    assert eval_plant(DelayedRationalPlant((1.0,), (1.0, 1.0), 0.1), s) == \
        pytest.approx(expected)


def test_inverse_numerator_realization(rig_plant):
    inv = inverse_numerator_realization(rig_plant)
    assert inv.order == 2
    poles = inv.poles()
    poles = poles[np.argsort(poles.imag)]
    expected = np.roots([1258.0, 4991.0, 1.031e6])
    expected = expected[np.argsort(expected.imag)]
    assert_allclose(poles, expected, rtol=1e-10)
    for s in (-1.0 + 2j, -0.3 - 5j):
        assert inv.response(s) * (1.031e6 + 4991.0 * s + 1258.0 * s * s) == \
            pytest.approx(1.0, rel=1e-9)


def test_inverse_numerator_static_and_nonminimum_phase():
    inv = inverse_numerator_realization(DelayedRationalPlant((4.0,), (1.0, 1.0)))
    assert inv.order == 0
    assert inv.D == pytest.approx(0.25)
    with pytest.raises(InvalidPlant):
        inverse_numerator_realization(DelayedRationalPlant((-1.0, 1.0),
                                                           (1.0, 2.0, 1.0)))


def test_denominator_descending():
    p = DelayedRationalPlant(RIG_NUMERATOR, RIG_DENOMINATOR)
    assert_allclose(denominator_coefficients(p),
                    (1, 4.2, 5764, 5.2e4, 8.4e6, 3.3e7, 3e9))


def test_plant_state_space_matches_transfer(rig_plant):
    model = plant_state_space(rig_plant)
    assert model.order == 6
    for s in (-1.0 + 1j, 2.0 + 30j, 0.5j):
        assert model.response(s) == pytest.approx(
            eval_plant(DelayedRationalPlant(rig_plant.numerator,
                                            rig_plant.denominator), s),
            rel=1e-8)


def test_perturb_plant(small_plant):
    p = perturb_plant(small_plant, 0.9, 0.05)
    assert p.tau == small_plant.tau
    assert p.beta == 2
    assert eval_plant(p, 0.0) == pytest.approx(0.9)
    q = perturb_plant(small_plant, 1.0, 0.0, tau=0.3)
    assert q.denominator == small_plant.denominator
    assert q.tau == 0.3


def test_step_response_first_order(small_plant):
    t, y = plant_step_response(small_plant, 1e-3, 2.0)
    assert y[0] == 0.0
    delay = 100
    assert np.all(y[:delay + 1] == 0.0)
    k = 1100
    assert y[k] == pytest.approx(1.0 - np.exp(-(t[k] - 0.1)), rel=1e-9)


def test_config_round_trip():
    section = {'numerator': [1.0], 'denominator': [2.0, 1.0], 'tau_s': 0.25}
    p = plant_from_config(section)
    assert p.tau == 0.25
    assert plant_to_config(p) == section
    with pytest.raises(InvalidPlant):
        plant_from_config({'numerator': [1.0]})
    flipped = plant_from_config({'numerator': [1.0], 'denominator': [-2.0, 1.0],
                                 'stabilize': True})
    assert validate_plant(flipped).denominator_hurwitz
