from threading import Thread

import pytest

from backend import TraceRecorder
from common.variants import StepKind


def test_when_recording_cycles_then_number_them_and_accumulate_flops() -> None:
    recorder = TraceRecorder()
    recorder.record_cycle(error=2.0, rho=1.0, delta=0.5, flops=10, kind=StepKind.PLAIN, predicted_gain=1.0)
    record = recorder.record_cycle(error=1.0, rho=0.25, delta=0.2, flops=15, kind=StepKind.LINE_SEARCH,
                                   gamma=0.225, s_under=1.125, predicted_gain=0.253125)

    assert len(recorder) == 2
    assert record.cycle == 1
    assert record.cum_flops == 25
    assert recorder.cum_flops == 25


def test_when_getting_records_then_return_copy() -> None:
    recorder = TraceRecorder()
    recorder.record_cycle(error=1.0, rho=1.0, delta=1.0, flops=1, kind=StepKind.PLAIN)
    records = recorder.get_records()
    records.clear()

    assert len(recorder.get_records()) == 1


def test_when_recording_from_threads_then_no_cycle_is_lost() -> None:
    recorder = TraceRecorder()

    def record_many() -> None:
        for _ in range(200):
            recorder.record_cycle(error=None, rho=0.0, delta=0.0, flops=2, kind=StepKind.PLAIN)

    threads = [Thread(target=record_many) for _ in range(4)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    assert len(recorder) == 800
    assert recorder.cum_flops == 1600
    assert sorted(record.cycle for record in recorder.get_records()) == list(range(800))


def test_when_passing_unknown_field_then_raise_type_error() -> None:
    with pytest.raises(TypeError):
        TraceRecorder().record_cycle(error=None, rho=0.0, delta=0.0, flops=1, kind=StepKind.PLAIN, unknown=1)
