"""Artifact files: CIR text and binary tables, path-loss profile, statistics.

All floats are written with 17 significant digits so they round-trip
exactly.  Binary CIR layout: no header, consecutive little-endian float64
records of 7 values ``(t_s, p, q, tap_index, delay_s, gain_re, gain_im)``,
ordered by time, p, q, tap.
"""
from __future__ import annotations

import hashlib
import os
from typing import Dict

import numpy as np

CIR_COLUMNS = ("t_s", "p", "q", "tap_index", "delay_s", "gain_re", "gain_im")
PL_COLUMNS = ("t_s", "distance_m", "elevation_rad", "c1_db", "c2_db", "pl_los_db", "pl_ngs_db",
              "sf_db", "pl_nlos_db")


def fmt(x) -> str:
    return format(float(x), ".17g")


def _write_table(path, columns, rows: np.ndarray, int_cols=()):
    """Write a numeric table; ``int_cols`` are column indices printed as integers."""
    rows = np.asarray(rows, float)
    cols = []
    for j in range(rows.shape[1] if rows.ndim == 2 else 0):
        if j in int_cols:
            cols.append(rows[:, j].astype(np.int64).astype(str))
        else:
            cols.append(np.char.mod("%.17g", rows[:, j]))
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        if cols:
            body = cols[0]
            for c in cols[1:]:
                body = np.char.add(np.char.add(body, ","), c)
            fh.write("\n".join(body.tolist()))
            fh.write("\n")


def cir_rows(frames: Dict[int, object]) -> np.ndarray:
    """Rows (n, 7) of all frames in canonical order."""
    out = []
    for i in sorted(frames):
        f = frames[i]
        P, Q, L = f.delays.shape
        pp, qq, ll = np.meshgrid(np.arange(P), np.arange(Q), np.arange(L), indexing="ij")
        out.append(np.column_stack([np.full(P * Q * L, f.t), pp.ravel(), qq.ravel(), ll.ravel(),
                                    f.delays.ravel(), f.gains.real.ravel(), f.gains.imag.ravel()]))
    return np.vstack(out) if out else np.zeros((0, 7))


def write_cir_csv(path, frames):
    _write_table(path, CIR_COLUMNS, cir_rows(frames), int_cols=(1, 2, 3))


def write_cir_binary(path, frames):
    cir_rows(frames).astype("<f8").tofile(path)


def read_cir_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def read_cir_binary(path) -> np.ndarray:
    return np.fromfile(path, dtype="<f8").reshape(-1, 7)


def write_pl_profile(path, realization):
    ls = realization.large
    kin = realization.kinematics
    rows = np.column_stack([realization.times, kin.distance, kin.elevation, ls.c1, ls.c2, ls.pl_los,
                            ls.pl_ngs, ls.shadow, ls.pl_nlos])
    _write_table(path, PL_COLUMNS, rows)


def write_stats(directory, report):
    """One CSV per metric plus ``report.txt``; returns the written paths."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name, cols in report.metrics.items():
        path = os.path.join(directory, f"{name}.csv")
        _write_table(path, list(cols), np.column_stack([np.asarray(v, float) for v in cols.values()]))
        paths.append(path)
    path = os.path.join(directory, "report.txt")
    with open(path, "w") as fh:
        fh.write(report.to_text())
    paths.append(path)
    return paths


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
