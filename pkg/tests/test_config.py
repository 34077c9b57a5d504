import os

import numpy as np
import pytest
import yaml
from numpy.testing import assert_allclose

from perimc.errors import ConfigError, CausalityViolation, MissingFile
from perimc.plantmodel import validate_plant
from perimc.imcConfig import ToolkitConfig, load_config, dump_config


def _minimal():
    return {'plant': {'numerator': [1.0], 'denominator': [1.0, 1.0],
                      'tau_s': 0.1},
            'design': {'period_s': 1.0, 'harmonics': 2}}


def test_rig_config(data_dir):
    cfg = load_config(os.path.join(data_dir, 'rig.yml'))
    assert cfg.plant['stabilize']
    assert validate_plant(cfg.plant_model()).accepted
    spec = cfg.filter_spec()
    assert spec.harmonics.k == 8
    assert spec.n_r == 5
    assert spec.order == 21
    assert_allclose(spec.Q, 1000 * np.eye(17))
    region = cfg.region()
    assert (region.re_min, region.re_max, region.step) == (-60.0, 5.0, 0.05)
    m = cfg.mismatch()
    assert m.plant.numerator[0] == pytest.approx(0.9 * m.model.numerator[0])
    assert cfg.output['directory'] == 'rig_out'


def test_minimal_config_defaults(data_dir):
    cfg = load_config(os.path.join(data_dir, 'minimal.yml'))
    assert cfg.design['omega_b_rad_s'] == pytest.approx(2 * np.pi)
    assert cfg.design['relative_degree'] == 2
    assert cfg.simulation['window_post_s'] == [12.0, 14.0]
    assert cfg.simulation['use_mismatch'] is False
    assert cfg.analysis['hinf_band_hz'] == [0.01, 200.0]
    region = cfg.region()
    assert region.re_min == pytest.approx(-15.0)
    assert region.im_max == pytest.approx(8 * np.pi)
    assert region.step == pytest.approx(0.05)


def test_relative_degree_default_and_causality():
    cfg = ToolkitConfig.from_dict(_minimal())
    assert cfg.design['relative_degree'] == 1
    raw = _minimal()
    raw['plant']['denominator'] = [1.0, 2.0, 1.0]
    raw['design']['relative_degree'] = 1
    with pytest.raises(CausalityViolation):
        ToolkitConfig.from_dict(raw)


def test_config_errors():
    raw = _minimal()
    raw['design']['omega_b_rad_s'] = 1.0
    with pytest.raises(ConfigError):
        ToolkitConfig.from_dict(raw)
    raw = _minimal()
    raw['design']['Q'] = np.eye(3).tolist()
    with pytest.raises(ConfigError):
        ToolkitConfig.from_dict(raw)
    raw = _minimal()
    raw['design']['relative_degree'] = 3
    raw['design']['aux_poles'] = [-1.0]
    with pytest.raises(ConfigError):
        ToolkitConfig.from_dict(raw)
    raw = _minimal()
    raw['analysis'] = {'probe': {'lo': 2.0, 'hi': 1.0}}
    with pytest.raises(ConfigError):
        ToolkitConfig.from_dict(raw)
    raw = _minimal()
    raw['simulation'] = {'h_s': 0.0}
    with pytest.raises(ConfigError):
        ToolkitConfig.from_dict(raw)
    with pytest.raises(ConfigError):
        ToolkitConfig.from_dict({'plant': _minimal()['plant']})


def test_aux_poles_and_mismatch_plant():
    raw = _minimal()
    raw['design'].update({'relative_degree': 3, 'aux_poles': [[-5.0, 1.0], [-5.0, -1.0]],
                          'frequencies_rad_s': [2 * np.pi, 6 * np.pi]})
    del raw['design']['harmonics']
    raw['analysis'] = {'mismatch': {'plant': {'numerator': [2.0],
                                              'denominator': [1.0, 1.0],
                                              'tau_s': 0.12}}}
    cfg = ToolkitConfig.from_dict(raw)
    spec = cfg.filter_spec()
    assert spec.harmonics.gammas == (1, 3)
    assert spec.aux_poles == (complex(-5, 1), complex(-5, -1))
    m = cfg.mismatch()
    assert m.plant.tau == 0.12
    assert m.model.tau == 0.1


def test_dump_and_reload(data_dir, tmp_path):
    cfg = load_config(os.path.join(data_dir, 'rig.yml'))
    path = str(tmp_path / 'copy.yml')
    dump_config(cfg, path)
    assert load_config(path) == cfg


def test_load_errors(tmp_path):
    with pytest.raises(MissingFile):
        load_config(str(tmp_path / 'none.yml'))
    bad = tmp_path / 'list.yml'
    bad.write_text(yaml.safe_dump([1, 2]))
    with pytest.raises(ConfigError):
        load_config(str(bad))
    broken = tmp_path / 'broken.yml'
    broken.write_text('plant: [1, 2\n')
    with pytest.raises(ConfigError):
        load_config(str(broken))
