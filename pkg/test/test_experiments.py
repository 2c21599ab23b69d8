import json
import logging
import math

import pandas as pd
import pytest

from samplesched.distributions import Exponential, FiniteDiscrete
from samplesched.experiments import (RunConfig, analysis_report, kappa_bound_holds, run, run_analyze,
                                     run_example1, run_example2, run_simulate, run_sweep_alpha,
                                     run_verify)
from samplesched.instance import Instance, Job, dump_instance
from samplesched.pairwise import pairwise_matrix
from samplesched.reports import METHODS, Report, agree, rel_error, write_report


def rows_of(report, **match):
    return [row for row in report.rows if all(row.get(k) == v for k, v in match.items())]


@pytest.fixture
def exponential_file(tmp_path):
    path = str(tmp_path / 'two.json')
    dump_instance(Instance((Job(1.0, Exponential(2.0)), Job(1.0, Exponential(1.0)))), path)
    return path


@pytest.fixture
def discrete_file(tmp_path):
    path = str(tmp_path / 'discrete.json')
    dump_instance(Instance((Job(1.0, FiniteDiscrete(((1.0, 0.5), (3.0, 0.5)))),
                            Job(2.0, FiniteDiscrete(((0.0, 0.25), (2.0, 0.5), (5.0, 0.25)))))), path)
    return path


def test_config_validation(exponential_file):
    bad = [dict(command='plot'),
           dict(command='analyze'),
           dict(command='analyze', instance_path=exponential_file, policy='wspt'),
           dict(command='simulate', instance_path=exponential_file, trials=0),
           dict(command='example1', M=2.0),
           dict(command='example1', n=1),
           dict(command='example2', eps=0.0),
           dict(command='example2', Ms=(100.0, 1.5)),
           dict(command='verify'),
           dict(command='verify', class_name='cauchy'),
           dict(command='sweep-alpha', alphas=(0.5, 2.0)),
           dict(command='sweep-alpha', alphas=()),
           dict(command='example1', format='xml'),
           dict(command='example1', policy='lpt'),
           dict(command='example1', count=0),
           dict(command='example1', tol=0.0),
           dict(command='example1', log_level='LOUD'),
           dict(command='example1', variant='bogus')]
    for kwargs in bad:
        with pytest.raises(ValueError):
            RunConfig(**kwargs)
    cfg = RunConfig(command='sweep-alpha', alphas=[1, 2])
    assert cfg.alphas == (1.0, 2.0)
    assert cfg.quadrature.rel_tol == 1e-9


def test_analyze(exponential_file):
    rep = run_analyze(RunConfig(command='analyze', instance_path=exponential_file))
    assert math.isclose(rep.rog, 1 / 3, rel_tol=1e-12)
    report = analysis_report(rep)
    assert report.passed
    assert report.rows[0]['L'] == 2.0 and report.rows[0]['H'] == 2.5
    rnd = run_analyze(RunConfig(command='analyze', instance_path=exponential_file, policy='rnd'))
    assert math.isclose(rnd.rog, 0.5, abs_tol=1e-12)


def test_simulate(discrete_file):
    report = run_simulate(RunConfig(command='simulate', instance_path=discrete_file, trials=50_000, seed=3))
    assert report.passed
    assert {row['method'] for row in report.rows} <= set(METHODS)
    assert len(rows_of(report, quantity='cost', method='exact-pairwise')) == 1
    assert len(rows_of(report, quantity='regret', method='exact-enumeration')) == 1
    assert all(row['agrees'] for row in rows_of(report, method='monte-carlo') if row['quantity'] != 'rog')
    again = run_simulate(RunConfig(command='simulate', instance_path=discrete_file, trials=50_000, seed=3))
    assert again.rows == report.rows


def test_simulate_without_exact_regret(exponential_file):
    report = run_simulate(RunConfig(command='simulate', instance_path=exponential_file,
                                    policy='wspt', trials=10_000, seed=1))
    assert report.passed
    assert rows_of(report, quantity='regret')[0]['value'] == 0.0
    assert not rows_of(report, method='exact-enumeration')


def test_example1():
    report = run_example1(RunConfig(command='example1', n=5, M=100.0, eps=1e-6))
    assert report.passed
    exact = {row['quantity']: row for row in rows_of(report, method='exact-enumeration')}
    assert exact['cost_sam']['rel_error'] <= 1e-3
    assert exact['regret_sam']['rel_error'] <= 1e-2
    assert exact['gap_sam_rnd']['rel_error'] <= 1e-2
    assert math.isclose(exact['cost_sam']['value'],
                        rows_of(report, quantity='cost_sam', method='exact-pairwise')[0]['value'], rel_tol=1e-9)


def test_example1_monte_carlo():
    report = run_example1(RunConfig(command='example1', n=3, M=20.0, eps=1e-6, trials=100_000, seed=5))
    assert report.passed
    assert len(rows_of(report, method='monte-carlo')) == 3


def test_example1_continuous():
    report = run_example1(RunConfig(command='example1', n=5, M=100.0, eps=1e-6, variant='continuous'))
    assert report.passed
    assert not rows_of(report, method='exact-enumeration')
    assert not rows_of(report, quantity='regret_sam')
    cost = rows_of(report, quantity='cost_sam', method='exact-pairwise')
    assert len(cost) == 1
    assert abs(cost[0]['value'] - 496) <= 1e-3 * 496
    assert any(note.startswith('continuous variant') for note in report.notes)


def test_example1_continuous_monte_carlo():
    report = run_example1(RunConfig(command='example1', n=3, M=20.0, eps=1e-6, variant='continuous',
                                    trials=100_000, seed=5))
    assert report.passed
    mc = {row['quantity']: row for row in rows_of(report, method='monte-carlo')}
    assert set(mc) == {'cost_sam', 'regret_sam', 'cost_rnd'}
    # no exact regret: the row carries the large-M limit instead
    assert mc['regret_sam']['limit'] == 2 * 19.0
    assert mc['cost_sam']['limit'] is None


def test_example1_swapped():
    for n, M in ((2, 10.0), (5, 1000.0)):
        report = run_example1(RunConfig(command='example1', n=n, M=M, variant='swapped'))
        assert report.passed
        for row in report.rows:
            assert row['rel_error'] <= 1e-9, row
        rog_row = rows_of(report, quantity='rog_sam', method='exact-enumeration')[0]
        assert math.isclose(rog_row['value'], 1 - 1 / M, rel_tol=1e-12)
    report = run_example1(RunConfig(command='example1', n=4, M=50.0, variant='swapped', trials=100_000, seed=2))
    assert report.passed
    assert len(rows_of(report, method='monte-carlo')) == 3


def test_example2_sweep():
    report = run_example2(RunConfig(command='example2', Ms=(10.0, 100.0, 1000.0), eps=1e-3))
    assert report.passed
    rogs = [row['value'] for row in rows_of(report, quantity='rog_sam', method='exact-enumeration')]
    assert rogs == sorted(rogs)
    for M, r in zip((10.0, 100.0, 1000.0), rogs):
        assert math.isclose(r, 1 - 1 / M, abs_tol=1e-9)
    assert not any('not monotone' in note for note in report.notes)


def test_verify_passes():
    for cls in ('symmetric', 'exponential'):
        report = run_verify(RunConfig(command='verify', class_name=cls, count=5, seed=1))
        assert report.passed, cls
        assert len(report.rows) == 6
        assert len(rows_of(report, instance='tightness')) == 1
        assert all(row['kappa_bound_ok'] for row in report.rows)


def test_verify_tightness_row():
    for cls in ('symmetric', 'shape-uniform', 'exponential'):
        report = run_verify(RunConfig(command='verify', class_name=cls, count=3, seed=4))
        assert report.passed, cls
        row = rows_of(report, instance='tightness')[0]
        assert 0.49 <= row['rog'] <= row['bound'] + 1e-8, (cls, row)
        assert row['kappa_bound_ok']
        assert any(note.startswith('tightness') for note in report.notes)
    report = run_verify(RunConfig(command='verify', class_name='translated', count=3, seed=4))
    assert not rows_of(report, instance='tightness')


def test_violations_log_lazily(caplog):
    inst = Instance((Job(1.0, Exponential(2.0)), Job(1.0, Exponential(1.0))))
    report = Report('analyze')
    with caplog.at_level(logging.WARNING, logger='samplesched.experiments'):
        assert not kappa_bound_holds(report, 'two', inst, pairwise_matrix(inst), 0.9)
    assert not report.passed
    record = caplog.records[-1]
    assert '%s' in record.msg and record.args
    assert 'two: rog above 1 - kappa' in record.getMessage()


def test_verify_translated_with_weights_is_not_claimed():
    report = run_verify(RunConfig(command='verify', class_name='translated', count=3, seed=1, unit_weights=False))
    assert report.passed
    assert any('not claimed' in note for note in report.notes)
    last = report.rows[-1]
    assert last['instance'] == 'counterexample'
    assert last['rog'] > 0.5


def test_sweep_alpha():
    report = run_sweep_alpha(RunConfig(command='sweep-alpha', alphas=(1.0, 2.0, 4.0, 8.0), count=5, seed=2))
    assert report.passed
    two = rows_of(report, kind='two-job')
    for row, expected in zip(two, (0.5, 1 / 3, 0.2, 1 / 9)):
        assert math.isclose(row['rog'], expected, abs_tol=1e-9)
    for row in rows_of(report, kind='separated-max'):
        assert row['rog'] <= row['bound'] + 1e-9


def test_run_dispatch(exponential_file):
    assert run(RunConfig(command='analyze', instance_path=exponential_file)).command == 'analyze'
    assert run(RunConfig(command='example2')).command == 'example2'


def test_write_report(tmp_path):
    report = Report('sweep-alpha')
    report.add(alpha=1.0, rog=0.5, bound=0.5, extra=math.inf)
    report.add(alpha=2.0, rog=1 / 3, bound=1 / 3, extra=None)
    report.note('two rows')
    csv_path = str(tmp_path / 'r.csv')
    write_report(report, csv_path, 'csv')
    frame = pd.read_csv(csv_path)
    assert list(frame.columns) == ['alpha', 'rog', 'bound', 'extra']
    assert len(frame) == 2
    json_path = str(tmp_path / 'r.json')
    write_report(report, json_path, 'json')
    with open(json_path) as f:
        doc = json.load(f)
    assert doc['passed'] and doc['notes'] == ['two rows']
    assert doc['rows'][0]['extra'] == math.inf
    assert doc['rows'][1]['extra'] is None
    with pytest.raises(ValueError):
        write_report(report, None, 'xml')


def test_report_helpers():
    assert agree(1.0, 0.1, 1.3)
    assert not agree(1.0, 0.1, 1.5)
    assert agree(2.0, 0.0, 2.0)
    assert rel_error(99.0, 100.0) == 0.01
    assert rel_error(0.5, 0.0) == 0.5
