"""Temporal-parallel pipeline execution over bounded row queues.

``run_pipeline`` executes a stage chain twice: sequentially (each stage
drains the whole stream before the next starts) and pipelined (one thread
per stage, connected by single-producer single-consumer queues bounded at
two rows).  The pipelined result must be bit-identical to the sequential
one; both wall times and per-stage latencies are reported.
"""

from __future__ import annotations

import queue
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import PipelineError
from .stages import Stage

QUEUE_ROWS = 2
_SENTINEL = object()


@dataclass
class StageReport:
    name: str
    latency_samples: int   # samples consumed before the first emission
    samples_in: int
    samples_out: int
    throughput: float      # samples emitted per sample consumed
    wall_serial_s: float
    wall_pipelined_s: float = 0.0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "latency_samples": self.latency_samples,
            "samples_in": self.samples_in,
            "samples_out": self.samples_out,
            "throughput": self.throughput,
            "wall_serial_s": self.wall_serial_s,
            "wall_pipelined_s": self.wall_pipelined_s,
        }


@dataclass
class PipelineRun:
    output: np.ndarray
    reports: list[StageReport] = field(default_factory=list)
    serial_seconds: float = 0.0
    pipelined_seconds: float = 0.0

    @property
    def speedup(self) -> float:
        return self.serial_seconds / max(self.pipelined_seconds, 1e-12)


def _samples(item) -> int:
    if isinstance(item, tuple):
        item = item[0]
    return int(np.asarray(item).size)


def _as_rows(image) -> list:
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ValueError("run_pipeline expects a 2-D image")
    return [arr[i] for i in range(arr.shape[0])]


def _assemble(rows: list) -> np.ndarray:
    return np.stack(rows)


def _run_sequential(stages: list[Stage], rows: list) -> tuple[list, list[StageReport]]:
    reports = []
    stream = rows
    for stage in stages:
        stage.reset()
        consumed = 0
        latency = None
        out_rows = []
        t0 = time.perf_counter()
        for row in stream:
            consumed += _samples(row)
            emitted = stage.feed(row)
            if emitted and latency is None:
                latency = consumed
            out_rows.extend(emitted)
        emitted = stage.finish()
        if emitted and latency is None:
            latency = consumed
        out_rows.extend(emitted)
        wall = time.perf_counter() - t0
        produced = sum(_samples(r) for r in out_rows)
        reports.append(
            StageReport(
                name=stage.name,
                latency_samples=latency if latency is not None else consumed,
                samples_in=consumed,
                samples_out=produced,
                throughput=produced / max(consumed, 1),
                wall_serial_s=wall,
            )
        )
        stream = out_rows
    return stream, reports


def _run_pipelined(stages: list[Stage], rows: list) -> tuple[list, list[float], float]:
    queues = [queue.Queue(maxsize=QUEUE_ROWS) for _ in range(len(stages) + 1)]
    busy = [0.0] * len(stages)
    errors: list[BaseException] = []

    def worker(idx: int, stage: Stage) -> None:
        inq, outq = queues[idx], queues[idx + 1]
        try:
            while True:
                item = inq.get()
                if item is _SENTINEL:
                    break
                t0 = time.perf_counter()
                emitted = stage.feed(item)
                busy[idx] += time.perf_counter() - t0
                for out in emitted:
                    outq.put(out)
            t0 = time.perf_counter()
            emitted = stage.finish()
            busy[idx] += time.perf_counter() - t0
            for out in emitted:
                outq.put(out)
        except BaseException as exc:  # propagate to the caller
            errors.append(exc)
        finally:
            outq.put(_SENTINEL)

    for stage in stages:
        stage.reset()
    threads = [
        threading.Thread(target=worker, args=(i, s), daemon=True)
        for i, s in enumerate(stages)
    ]
    t_start = time.perf_counter()
    for t in threads:
        t.start()

    def feeder() -> None:
        for row in rows:
            queues[0].put(row)
        queues[0].put(_SENTINEL)

    feed_thread = threading.Thread(target=feeder, daemon=True)
    feed_thread.start()

    out_rows = []
    while True:
        item = queues[-1].get()
        if item is _SENTINEL:
            break
        out_rows.append(item)
    wall = time.perf_counter() - t_start
    feed_thread.join()
    for t in threads:
        t.join()
    if errors:
        raise PipelineError(f"pipelined stage failed: {errors[0]!r}") from errors[0]
    return out_rows, busy, wall


def run_pipeline(stages: list[Stage], image: np.ndarray) -> PipelineRun:
    """Run a chain both ways, verify bit-identical output, report timings."""
    rows = _as_rows(image)

    t0 = time.perf_counter()
    serial_rows, reports = _run_sequential(stages, rows)
    serial_wall = time.perf_counter() - t0

    pipelined_rows, busy, pipelined_wall = _run_pipelined(stages, rows)

    if len(serial_rows) != len(pipelined_rows):
        raise PipelineError("pipelined run produced a different number of rows")
    for a, b in zip(serial_rows, pipelined_rows):
        if not np.array_equal(a, b):
            raise PipelineError("pipelined output differs from sequential output")

    for rep, b in zip(reports, busy):
        rep.wall_pipelined_s = b
    return PipelineRun(
        output=_assemble(serial_rows),
        reports=reports,
        serial_seconds=serial_wall,
        pipelined_seconds=pipelined_wall,
    )


def run_chain(stages: list[Stage], image: np.ndarray) -> np.ndarray:
    """Sequential-only execution when timing is not needed."""
    rows, _ = _run_sequential(stages, _as_rows(image))
    return _assemble(rows)
