import io
import json
import math

import pandas as pd

from samplesched.cli import EXIT_ERROR, EXIT_OK, main, parse_args
from samplesched.distributions import Exponential, UniformInterval
from samplesched.instance import Instance, Job, dump_instance


def write_instance(tmp_path, inst, name='jobs.json'):
    path = str(tmp_path / name)
    dump_instance(inst, path)
    return path


def test_parse_args():
    cfg = parse_args(['example2', '--Ms', '100,1000', '--format', 'json', '--log-level', 'info'])
    assert cfg.command == 'example2'
    assert cfg.Ms == (100.0, 1000.0)
    assert cfg.eps == 1e-3
    assert cfg.format == 'json' and cfg.log_level == 'INFO'
    cfg = parse_args(['verify', '--class', 'translated', '--nonunit-weights'])
    assert cfg.class_name == 'translated' and cfg.unit_weights is False
    assert parse_args(['verify', '--class', 'symmetric']).unit_weights is None
    assert parse_args(['simulate', '--instance', 'x.json']).trials == 100_000


def test_example2_to_stdout(capsys):
    assert main(['example2']) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    r = frame[(frame.quantity == 'rog_sam') & (frame.method == 'exact-enumeration')].value.iloc[0]
    assert abs(r - 0.99) <= 0.01


def test_analyze_file(tmp_path, capsys):
    path = write_instance(tmp_path, Instance((Job(1.0, UniformInterval(0.0, 2.0)),
                                              Job(1.0, UniformInterval(1.0, 3.0)))))
    out = str(tmp_path / 'report.csv')
    assert main(['analyze', '--instance', path, '--out', out]) == EXIT_OK
    frame = pd.read_csv(out)
    assert list(frame.columns)[:5] == ['n', 'L', 'H', 'cost', 'rog']
    assert math.isclose(frame.rog.iloc[0], 1 / 8, abs_tol=1e-9)


def test_json_output(tmp_path):
    path = write_instance(tmp_path, Instance((Job(1.0, Exponential(2.0)), Job(1.0, Exponential(1.0)))))
    out = str(tmp_path / 'report.json')
    assert main(['analyze', '--instance', path, '--out', out, '--format', 'json']) == EXIT_OK
    with open(out) as f:
        doc = json.load(f)
    assert doc['command'] == 'analyze' and doc['passed']
    assert math.isclose(doc['rows'][0]['alpha'], 2.0)


def test_usage_errors(tmp_path, capsys):
    assert main(['verify']) == EXIT_ERROR
    assert main(['example1', '--M', '2']) == EXIT_ERROR
    assert main(['example1', '--n', '1']) == EXIT_ERROR
    assert main(['sweep-alpha', '--alphas', '0.5']) == EXIT_ERROR
    assert main(['sweep-alpha', '--alphas', 'one,two']) == EXIT_ERROR
    assert main(['analyze', '--instance', str(tmp_path / 'missing.json')]) == EXIT_ERROR
    assert main(['frobnicate']) == EXIT_ERROR
    assert 'error' in capsys.readouterr().err


def test_bad_instance_file(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text('{"jobs": [{"weight": -1, "dist": {"type": "deterministic", "value": 1}}]}')
    assert main(['analyze', '--instance', str(path)]) == EXIT_ERROR
    path.write_text('not json')
    assert main(['analyze', '--instance', str(path)]) == EXIT_ERROR


def test_verify_nonunit_translated(capsys):
    assert main(['verify', '--class', 'translated', '--nonunit-weights', '--count', '3', '--seed', '2']) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert frame.instance.iloc[-1] == 'counterexample'


def test_example1_variants(tmp_path):
    assert parse_args(['example1']).variant == 'discrete'
    cfg = parse_args(['example1', '--variant', 'swapped', '--M', '1000'])
    assert cfg.variant == 'swapped' and cfg.M == 1000.0
    out = str(tmp_path / 'swapped.csv')
    assert main(['example1', '--variant', 'swapped', '--M', '1000', '--out', out]) == EXIT_OK
    frame = pd.read_csv(out)
    r = frame[frame.quantity == 'rog_sam'].value.iloc[0]
    assert math.isclose(r, 1 - 1 / 1000, rel_tol=1e-12)
    assert main(['example1', '--variant', 'continuous', '--out', str(tmp_path / 'c.csv')]) == EXIT_OK
    assert main(['example1', '--variant', 'bogus']) == EXIT_ERROR
