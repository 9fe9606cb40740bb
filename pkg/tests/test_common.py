"""共通のミックスインとプロトコルをテストします。"""

from src.common import LogDensity, LoggingMixin, ProgressMixin, ProgressReporter
from src.services.calibration import CalibrationPosterior
from src.services.simulator import SceneSimulator

from .helpers import indexed, interior_configs


class RecordingReporter:
    def __init__(self):
        self.calls = []

    def report(self, stage: str, done: int, total: int) -> None:
        self.calls.append((stage, done, total))


class Worker(LoggingMixin, ProgressMixin):
    pass


def test_progress_is_sent_to_reporter():
    """報告先を設定すると進捗がそのまま渡されることをテストします。"""
    reporter = RecordingReporter()
    assert isinstance(reporter, ProgressReporter)
    worker = Worker()
    worker.set_reporter(reporter)
    worker.report_progress("calibration", 3, 10)
    assert reporter.calls == [("calibration", 3, 10)]

    worker.set_reporter(None)
    worker.report_progress("calibration", 4, 10)
    assert len(reporter.calls) == 1


def test_logging_mixin_uses_module_logger():
    worker = Worker()
    assert worker.logger.name == __name__
    assert worker.logger is worker.logger


def test_posterior_is_a_log_density(noiseless_scene):
    simulator = SceneSimulator(noiseless_scene)
    dataset = simulator.build_dataset(indexed(interior_configs(noiseless_scene.chain_nominal, 6, seed=4)))
    initial, _ = simulator.initial_registration(dataset)
    assert isinstance(CalibrationPosterior(dataset, noiseless_scene.chain_nominal, initial), LogDensity)
