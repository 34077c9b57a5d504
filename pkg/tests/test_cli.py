import os
import json
import shutil

import pytest
import yaml

from perimc import (runDesign, runAnalyze, runSpectrum, runSimulate,
                    runBatch, runImc, checkConfig)
from perimc.errors import EXIT_OK, EXIT_VALIDATION, VerificationFailed
from perimc.runLog import RunLog


def _run(main, argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    return info.value.code


def _read_json(path):
    with open(path) as f:
        return json.load(f)


def _write_config(path, cfg):
    with open(path, 'w') as out:
        yaml.safe_dump(cfg, out)
    return str(path)


@pytest.fixture(scope='module')
def minimal_design(tmp_path_factory, data_dir):
    out = str(tmp_path_factory.mktemp('minimal'))
    config = os.path.join(data_dir, 'minimal.yml')
    code = _run(runDesign.main, ['--config', config, '--out', out])
    return config, out, code


def test_design_command(minimal_design):
    _, out, code = minimal_design
    assert code == EXIT_OK
    assert os.path.exists(os.path.join(out, 'controller.json'))
    assert os.path.exists(os.path.join(out, 'design_log.txt'))
    report = _read_json(os.path.join(out, 'design_report.json'))
    assert report['filter_order'] == 6
    assert report['controller_order'] == 6
    assert report['l_b'] == 1
    assert report['verification']['passed']
    assert report['plant']['accepted']


def test_analyze_command(minimal_design):
    config, out, _ = minimal_design
    assert _run(runAnalyze.main, ['--config', config, '--out', out]) == EXIT_OK
    report = _read_json(os.path.join(out, 'analysis_report.json'))
    assert report['ideal']['max_harmonic_magnitude'] < 1e-7
    assert report['ideal']['hinf_limit'] == 2.0
    assert report['ideal']['hinf_below_limit'] == (report['ideal']['hinf'] < 2.0)
    assert 'small_gain_margin' in report['perturbed']
    with open(os.path.join(out, 'sensitivity.csv')) as f:
        header = f.readline().strip().split(',')
    assert header[:4] == ['omega_rad_s', 'f_hz', 'ideal_mag', 'ideal_phase_rad']
    assert 'perturbed_mag' in header


def test_simulate_command(minimal_design):
    config, out, _ = minimal_design
    assert _run(runSimulate.main, ['--config', config, '--out', out]) == EXIT_OK
    report = _read_json(os.path.join(out, 'simulation_report.json'))
    assert report['samples'] == 14000
    assert report['nominal_plant']
    assert report['min_attenuation_db'] >= 40.0
    assert [row['gamma'] for row in report['harmonics']] == [1, 2]
    assert os.path.exists(os.path.join(out, 'trace.csv'))


def test_spectrum_command(minimal_design, tmp_path):
    config, out, _ = minimal_design
    with open(config) as f:
        cfg = yaml.safe_load(f)
    cfg['analysis'] = {'region': {'re_min': -2.0, 're_max': 1.0, 'im_min': 0.0,
                                  'im_max': 15.0, 'step': 0.02}}
    scanConfig = _write_config(tmp_path / 'scan.yml', cfg)
    code = _run(runSpectrum.main, ['--config', scanConfig, '--out', out,
                                   '--cpu', '1'])
    assert code == EXIT_OK
    report = _read_json(os.path.join(out, 'spectrum_report.json'))
    zeros = report['ideal_zero']
    assert zeros['count'] == zeros['argument_principle']
    assert max(zeros['harmonic_zero_distance']) < 1e-6
    assert report['ideal_pole_count'] == 6
    assert 'perturbed_pole' not in report


def test_design_single_harmonic(tmp_path):
    cfg = {'plant': {'numerator': [1.0], 'denominator': [1.0, 1.0],
                     'tau_s': 0.1},
           'design': {'period_s': 1.0, 'harmonics': 1}}
    config = _write_config(tmp_path / 'single.yml', cfg)
    out = str(tmp_path / 'out')
    assert _run(runDesign.main, ['--config', config, '--out', out]) == EXIT_OK
    report = _read_json(os.path.join(out, 'design_report.json'))
    assert report['filter_order'] == 3
    assert report['aux_poles'] == []


def test_design_rejects_unstable_plant(tmp_path):
    cfg = {'plant': {'numerator': [1.0], 'denominator': [-1.0, 1.0]},
           'design': {'period_s': 1.0, 'harmonics': 1}}
    config = _write_config(tmp_path / 'unstable.yml', cfg)
    out = str(tmp_path / 'out')
    assert _run(runDesign.main, ['--config', config, '--out', out]) == EXIT_VALIDATION
    error = _read_json(os.path.join(out, 'design_error.json'))
    assert error['error'] == 'InvalidPlant'


def test_missing_config(tmp_path):
    out = str(tmp_path / 'out')
    code = _run(runDesign.main, ['--config', str(tmp_path / 'none.yml'),
                                 '--out', out])
    assert code == EXIT_VALIDATION
    assert os.path.exists(os.path.join(out, 'design_error.json'))


def test_check_command(data_dir, tmp_path):
    assert checkConfig.cmd_check(os.path.join(data_dir, 'rig.yml')) == []
    with open(os.path.join(data_dir, 'rig.yml')) as f:
        cfg = yaml.safe_load(f)
    cfg['plant']['stabilize'] = False
    cfg['simulation']['h_s'] = 0.0007
    warnings = checkConfig.cmd_check(_write_config(tmp_path / 'raw.yml', cfg))
    assert any('stabilize' in w for w in warnings)
    assert any('whole number of samples' in w for w in warnings)


def test_batch_command(data_dir, tmp_path):
    folder = tmp_path / 'configs'
    folder.mkdir()
    shutil.copy(os.path.join(data_dir, 'minimal.yml'), str(folder))
    _write_config(folder / 'unstable.yml',
                  {'plant': {'numerator': [1.0], 'denominator': [-1.0, 1.0]},
                   'design': {'period_s': 1.0, 'harmonics': 1}})
    (folder / 'notes.txt').write_text('not a config')
    out = str(tmp_path / 'batch')
    results = runBatch.cmd_batch(str(folder), out, cpu=2)
    codes = {name: code for name, code, _, _ in results}
    assert codes == {'minimal': EXIT_OK, 'unstable': EXIT_VALIDATION}
    assert os.path.exists(os.path.join(out, 'minimal', 'controller.json'))
    assert os.path.exists(os.path.join(out, 'unstable', 'design_error.json'))
    with open(os.path.join(out, 'failed.txt')) as f:
        assert f.read().startswith('unstable\t2\tInvalidPlant')
    with open(os.path.join(out, 'runtime_design.txt')) as f:
        assert len(f.readlines()) == 2


def test_batch_missing_folder(tmp_path):
    code = _run(runBatch.main, ['--input', str(tmp_path / 'none'),
                                '--out', str(tmp_path / 'out')])
    assert code == EXIT_VALIDATION


def test_dispatcher(capsys):
    assert _run(runImc.main, []) == 0
    assert 'Usage: perimc' in capsys.readouterr().out
    assert _run(runImc.main, ['--version']) == 0
    assert _run(runImc.main, ['tune']) == 1
    assert 'unknown command tune' in capsys.readouterr().err


def test_run_log_closed_on_error(minimal_design, tmp_path):
    config, _, _ = minimal_design
    out = str(tmp_path / 'out')
    code = _run(runSimulate.main, ['--config', config, '--out', out,
                                   '--controller', str(tmp_path / 'none.json')])
    assert code == EXIT_VALIDATION
    with open(os.path.join(out, 'simulate_log.txt')) as f:
        text = f.read()
    assert '*** ERROR: MissingFile' in text
    assert 'Done!' not in text
    with pytest.raises(VerificationFailed):
        with RunLog(out, 'design') as log:
            raise VerificationFailed('filter off')
    assert log.log.closed


def test_run_log_progress(tmp_path):
    with RunLog(str(tmp_path), 'spectrum', silent=True) as log:
        assert log.progress(range(3), total=3).disable
    with RunLog(str(tmp_path), 'spectrum', silent=False) as log:
        assert not log.progress(range(3), total=3).disable
    assert log.log.closed
    with open(os.path.join(str(tmp_path), 'spectrum_log.txt')) as f:
        assert f.read().rstrip().endswith('Done! Results are ready to use!')
