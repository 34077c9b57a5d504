import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from perimc.errors import (CausalityViolation, InvalidPlant, MissingFile,
                           ConfigError)
from perimc.numkernel import eigenvalues
from perimc.plantmodel import DelayedRationalPlant, polynomial_roots
from perimc.filtersynth import FilterDesignSpec, filter_response
from perimc.imcassembly import (controller_delay, assemble_controller,
                                design_controller,
                                build_controller, controller_response,
                                controller_poles, controller_to_dict,
                                controller_from_dict, save_controller,
                                load_controller)


def _match(found, expected, tol):
    rest = list(found)
    for r in expected:
        i = int(np.argmin([abs(x - r) for x in rest]))
        assert abs(rest[i] - r) <= tol * max(1.0, abs(r))
        rest.pop(i)
    assert not rest


def test_controller_delay():
    theta, l_b = controller_delay(0.2, 4 * np.pi)
    assert theta == pytest.approx(0.3)
    assert l_b == 1
    theta, l_b = controller_delay(0.5, 4 * np.pi)
    assert l_b == 2
    assert theta == pytest.approx(0.5)
    theta, l_b = controller_delay(0.0, 2 * np.pi)
    assert (theta, l_b) == (pytest.approx(1.0), 1)
    with pytest.raises(InvalidPlant):
        controller_delay(-0.1, 2 * np.pi)


def test_rig_controller(rig_design, rig_plant):
    f, c = rig_design
    assert c.order == 23
    assert c.theta == pytest.approx(0.3)
    assert c.l_b == 1
    assert c.D == 0.0
    assert c.transfer_check_passed
    assert len(c.provenance) == 64
    expected = np.concatenate([eigenvalues(f.A),
                               polynomial_roots(rig_plant.numerator)])
    _match(controller_poles(c), expected, 1e-6)
    assert np.max(controller_poles(c).real) < 0


def test_small_controller(small_design, small_plant):
    f, c = small_design
    assert c.order == 6
    assert c.theta == pytest.approx(0.9)
    assert c.D == 0.0
    omega = np.array([0.5, 2 * np.pi, 7.0])
    expected = filter_response(f, omega) * (1j * omega + 1.0) * \
        np.exp(-1j * omega * c.theta)
    assert_allclose(controller_response(c, omega), expected, rtol=1e-7)


def test_biproper_controller(small_plant, small_harmonics):
    spec = FilterDesignSpec(small_harmonics, n_r=1, Q=100.0, R=1.0)
    f, c = design_controller(spec, small_plant)
    assert c.order == f.n == 5
    expected = -(f.C @ f.B)[0, 0]
    assert abs(expected) > 1e-3
    assert c.D == pytest.approx(expected, rel=1e-12)
    omega = np.array([0.3, 2 * np.pi, 4 * np.pi, 50.0])
    assert_allclose(controller_response(c, omega),
                    filter_response(f, omega) * (1j * omega + 1.0) *
                    np.exp(-1j * omega * c.theta), rtol=1e-7)


def test_causality_violation(small_design):
    f, _ = small_design
    plant = DelayedRationalPlant((1.0,), (1.0, 3.0, 3.0, 1.0), 0.1)
    with pytest.raises(CausalityViolation):
        build_controller(f, plant)
    with pytest.raises(InvalidPlant):
        assemble_controller(f, DelayedRationalPlant((1.0,), (-1.0, 1.0)), 0.5)


def test_controller_file(small_design, tmp_path):
    _, c = small_design
    path = str(tmp_path / 'controller.json')
    save_controller(c, path)
    loaded = load_controller(path)
    assert_allclose(loaded.A, c.A)
    assert_allclose(loaded.B, c.B)
    assert_allclose(loaded.C, c.C)
    assert loaded.D == c.D
    assert loaded.theta == c.theta
    assert loaded.l_b == c.l_b
    assert loaded.provenance == c.provenance
    assert loaded.filter.report.passed
    assert loaded.filter.harmonics == c.filter.harmonics
    assert controller_to_dict(loaded) == json.loads(json.dumps(controller_to_dict(c)))


def test_controller_file_errors(small_design, tmp_path):
    _, c = small_design
    with pytest.raises(MissingFile):
        load_controller(str(tmp_path / 'nothing.json'))
    broken = tmp_path / 'broken.json'
    broken.write_text('{not json')
    with pytest.raises(ConfigError):
        load_controller(str(broken))
    d = controller_to_dict(c)
    del d['filter']
    with pytest.raises(ConfigError):
        controller_from_dict(d)
