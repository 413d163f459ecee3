"""CSV artifacts: chain, summary, trajectory, scaling, and benchmark tables.

All floats are serialized with 17 significant digits so values round-trip
through text exactly; writers stage to a temporary path and rename, so a
failed run never leaves a partial file behind.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from typing import Sequence

import numpy as np

from .dynamics import Trajectory
from .kernels import Chain, TransitionInfo

Array = np.ndarray


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write_text(path: str, text: str):
    """Write text to `path` via a temp file in the same directory + rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def chain_csv_text(chain: Chain, chain_index: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    dim = chain.dim
    writer.writerow(
        ["chain", "iter", "accepted", "divergent", "delta_h"]
        + [f"q{i + 1}" for i in range(dim)]
    )
    for k, (state, info) in enumerate(zip(chain.states, chain.infos)):
        writer.writerow(
            [chain_index, k, int(info.accepted), int(info.divergent), fmt(info.delta_h)]
            + [fmt(v) for v in state]
        )
    return buf.getvalue()


def write_chain_csv(path: str, chain: Chain, chain_index: int):
    atomic_write_text(path, chain_csv_text(chain, chain_index))


def read_chain_csv(path: str):
    """Read a chain CSV back as (chain_index, states, accepted, divergent, delta_h)."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        expected = ["chain", "iter", "accepted", "divergent", "delta_h"]
        if header[: len(expected)] != expected or len(header) <= len(expected):
            raise ValueError(f"{path}: not a chain CSV (header {header})")
        dim = len(header) - len(expected)
        states, accepted, divergent, delta_h = [], [], [], []
        index = 0
        for row in reader:
            index = int(row[0])
            accepted.append(bool(int(row[2])))
            divergent.append(bool(int(row[3])))
            delta_h.append(float(row[4]))
            states.append([float(v) for v in row[5 : 5 + dim]])
    return index, np.asarray(states), accepted, divergent, np.asarray(delta_h)


def chain_from_csv(path: str) -> Chain:
    index, states, accepted, divergent, delta_h = read_chain_csv(path)
    infos = [
        TransitionInfo(a, d_h, d, states[k])
        for k, (a, d, d_h) in enumerate(zip(accepted, divergent, delta_h))
    ]
    return Chain(states[0], states, infos, seed=None, label=f"chain{index}")


SUMMARY_HEADER = ["chain", "coord", "accept_rate", "divergences", "rho1", "ess"]


def summary_csv_text(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in rows:
        writer.writerow([
            row["chain"], row["coord"],
            fmt(row["accept_rate"]), row["divergences"],
            fmt(row["rho1"]), fmt(row["ess"]),
        ])
    return buf.getvalue()


def trajectory_csv_text(traj: Trajectory) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    dim = traj.qs.shape[1]
    writer.writerow(
        ["step", "h"]
        + [f"q{i + 1}" for i in range(dim)]
        + [f"p{i + 1}" for i in range(dim)]
    )
    for k in range(len(traj)):
        writer.writerow(
            [k, fmt(traj.energies[k])]
            + [fmt(v) for v in traj.qs[k]]
            + [fmt(v) for v in traj.ps[k]]
        )
    return buf.getvalue()


def write_trajectory_csv(path: str, traj: Trajectory):
    atomic_write_text(path, trajectory_csv_text(traj))


def read_trajectory_csv(path: str):
    """Read back (energies, qs, ps) from a trajectory CSV."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header[:2] != ["step", "h"] or (len(header) - 2) % 2 != 0:
            raise ValueError(f"{path}: not a trajectory CSV (header {header})")
        dim = (len(header) - 2) // 2
        hs, qs, ps = [], [], []
        for row in reader:
            hs.append(float(row[1]))
            qs.append([float(v) for v in row[2 : 2 + dim]])
            ps.append([float(v) for v in row[2 + dim :]])
    return np.asarray(hs), np.asarray(qs), np.asarray(ps)


SCALING_HEADER = ["dim", "integrator", "accept_rate"]


def scaling_csv_text(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCALING_HEADER)
    for row in rows:
        writer.writerow([row["dim"], row["integrator"], fmt(row["accept_rate"])])
    return buf.getvalue()


BENCH_HEADER = ["kernel", "f", "rho1", "ess", "accept_rate", "divergences"]


def bench_csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    for row in rows:
        writer.writerow([
            row.kernel, row.f, fmt(row.rho1), fmt(row.ess),
            fmt(row.accept_rate), row.divergences,
        ])
    return buf.getvalue()
