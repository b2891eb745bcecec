"""CSV, Matrix Market and key-value exports.

Floats are written with 17 significant digits so files round-trip exactly
and are byte-identical across runs.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .geometry import CLASS_NAMES


def fmt(value):
    if value is None:
        return ""
    value = float(value)
    if np.isnan(value):
        return "nan"
    return format(value, ".17g")


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def write_field_csv(path, grid, values, nodes=None):
    """Columns ``node_index, x, z, re, im``."""
    values = np.asarray(values, dtype=complex)
    nodes = np.arange(grid.n_nodes) if nodes is None else np.asarray(nodes)
    x, z = grid.x[nodes], grid.z[nodes]
    rows = ([str(int(p)), x[a], z[a], values[a].real, values[a].imag]
            for a, p in enumerate(nodes))
    return write_csv(path, ["node_index", "x", "z", "re", "im"], rows)


def read_field_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0].astype(np.int64), data[:, 3] + 1j * data[:, 4]


def write_history_csv(path, history):
    J = len(history.errors[0]) if history.errors else 0
    header = (["n", "interface_residual_2norm", "global_residual_2norm"]
              + [f"err_maxnorm_{j}" for j in range(1, J + 1)] + ["gamma_hat"])
    rows = []
    for n in range(len(history.interface_residual)):
        errs = history.errors[n] if history.errors else []
        rows.append([str(n), history.interface_residual[n], history.global_residual[n],
                     *errs, history.gamma_hat[n]])
    return write_csv(path, header, rows)


def write_decomposition_csv(path, grid, subdomains, pou):
    J = len(subdomains)
    member = [[] for _ in range(grid.n_nodes)]
    for sd in subdomains:
        for p in sd.nodes:
            member[p].append(str(sd.id))
    classes = grid.classes
    x, z = grid.x, grid.z
    rows = ([str(p), x[p], z[p], CLASS_NAMES[int(classes[p])], ";".join(member[p]),
             *pou.chi[:, p]] for p in range(grid.n_nodes))
    header = ["node_index", "x", "z", "class", "subdomain_memberships"] + [
        f"chi_{j}" for j in range(1, J + 1)]
    return write_csv(path, header, rows)


def write_max_modulus_csv(path, entries):
    rows = ([str(e.n), str(e.j), e.max_interior, e.max_interface, e.ratio_K,
             "true" if e.violation else "false"] for e in entries)
    return write_csv(path, ["n", "j", "max_interior", "max_interface", "ratio_K",
                            "violation_flag"], rows)


def write_matrix_market(path, matrix, comment=None):
    """Write a sparse complex matrix in coordinate format with 1-based indices."""
    coo = matrix.tocoo()
    order = np.lexsort((coo.row, coo.col))
    rows, cols = coo.row[order], coo.col[order]
    data = np.asarray(coo.data, dtype=complex)[order]
    path = Path(path)
    with path.open("w") as fh:
        fh.write("%%MatrixMarket matrix coordinate complex general\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {data.size}\n")
        for r, c, v in zip(rows, cols, data):
            fh.write(f"{r + 1} {c + 1} {fmt(v.real)} {fmt(v.imag)}\n")
    return path


def write_manifest(path, items):
    """Key-value text, one ``key = value`` per line, in the given order."""
    path = Path(path)
    with path.open("w") as fh:
        for key, value in items:
            if isinstance(value, float):
                value = fmt(value)
            fh.write(f"{key} = {value}\n")
    return path


def read_manifest(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.strip() and not line.lstrip().startswith("#"):
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
