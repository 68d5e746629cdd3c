"""Trace and trajectory file formats.

Binary traces use a self-describing container:

    bytes 0-7   magic "TACT0001"
    bytes 8-11  little-endian u32 sample rate (Hz)
    bytes 12-19 little-endian u64 sample count
    then        count little-endian float32 samples

CSV twins exist for inspection: traces as ``time,amplitude`` rows and
height trajectories as ``time,z_mm`` rows.
"""

import csv
import struct
from pathlib import Path

import numpy as np

from fingertip.errors import FingertipError
from fingertip.signals import VibrationTrace, ZTrajectory

TRACE_MAGIC = b"TACT0001"
_HEADER = struct.Struct("<8sIQ")


class TraceFormatError(FingertipError, ValueError):
    """A trace file is corrupt or not in the expected container format."""


def write_trace(path, trace: VibrationTrace) -> None:
    path = Path(path)
    samples = trace.samples.astype("<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(TRACE_MAGIC, int(round(trace.sample_rate)), len(trace)))
        fh.write(samples.tobytes())


def read_trace(path) -> VibrationTrace:
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise TraceFormatError(f"{path}: truncated header")
        magic, rate, count = _HEADER.unpack(header)
        if magic != TRACE_MAGIC:
            raise TraceFormatError(f"{path}: bad magic {magic!r}")
        payload = fh.read(count * 4)
        if len(payload) != count * 4:
            raise TraceFormatError(
                f"{path}: expected {count} samples, file is truncated"
            )
    samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    return VibrationTrace(samples=samples, sample_rate=float(rate))


def write_trace_csv(path, trace: VibrationTrace) -> None:
    times = trace.times()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "amplitude"])
        for t, a in zip(times, trace.samples):
            writer.writerow([repr(float(t)), repr(float(a))])


def read_trace_csv(path) -> VibrationTrace:
    times, amps = _read_two_column_csv(path, ("time", "amplitude"))
    if times.size < 2:
        raise TraceFormatError(f"{path}: need at least 2 samples to infer rate")
    rate = 1.0 / float(np.median(np.diff(times)))
    return VibrationTrace(samples=amps, sample_rate=rate, start_time=float(times[0]))


def write_ztrajectory_csv(path, z: ZTrajectory) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "z_mm"])
        for t, height in zip(z.times, z.z_mm):
            writer.writerow([repr(float(t)), repr(float(height))])


def read_ztrajectory_csv(path) -> ZTrajectory:
    times, z_mm = _read_two_column_csv(path, ("time", "z_mm"))
    return ZTrajectory(times=times, z_mm=z_mm)


def _read_two_column_csv(path, expected_header):
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError(f"{path}: empty file") from None
        if [h.strip() for h in header] != list(expected_header):
            raise TraceFormatError(
                f"{path}: expected header {','.join(expected_header)}, got {header}"
            )
        first, second = [], []
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                first.append(float(row[0]))
                second.append(float(row[1]))
            except (IndexError, ValueError) as exc:
                raise TraceFormatError(f"{path}:{row_number}: bad row {row}") from exc
    return np.asarray(first), np.asarray(second)
