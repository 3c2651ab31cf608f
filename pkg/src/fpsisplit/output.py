"""CSV tables, legacy ASCII VTK snapshots and run manifests."""

from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np

FLOAT_FMT = "{:.8e}"


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows, footer=None) -> Path:
    """Comma separated, '.' decimal, floats with 9 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([_cell(v) for v in r])
        if footer is not None:
            wr.writerow([_cell(v) for v in footer])
    return path


def read_csv(path) -> tuple[list, list]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_vtk(path, points, triangles, point_data: dict, title: str = "fpsisplit") -> Path:
    """Legacy ASCII (version 2.0) unstructured grid of triangles.

    ``point_data`` values are length-n scalars or (n, 2) vectors.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pts = np.asarray(points, float)
    tri = np.asarray(triangles, dtype=np.int64)
    n = pts.shape[0]
    out = ["# vtk DataFile Version 2.0", title.replace("\n", " ")[:255], "ASCII",
           "DATASET UNSTRUCTURED_GRID", f"POINTS {n} double"]
    out += [f"{FLOAT_FMT.format(x)} {FLOAT_FMT.format(y)} 0" for x, y in pts[:, :2]]
    out.append(f"CELLS {tri.shape[0]} {4 * tri.shape[0]}")
    out += [f"3 {a} {b} {c}" for a, b, c in tri]
    out.append(f"CELL_TYPES {tri.shape[0]}")
    out += ["5"] * tri.shape[0]
    if point_data:
        out.append(f"POINT_DATA {n}")
    for name, val in point_data.items():
        val = np.asarray(val, float)
        if val.shape[0] != n:
            raise ValueError(f"field {name!r} has {val.shape[0]} values for {n} points")
        if val.ndim == 1:
            out += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            out += [FLOAT_FMT.format(v) for v in val]
        else:
            out.append(f"VECTORS {name} double")
            out += [f"{FLOAT_FMT.format(a)} {FLOAT_FMT.format(b)} 0" for a, b in val[:, :2]]
    path.write_text("\n".join(out) + "\n")
    return path


def fluid_vtk(path, disc, state) -> Path:
    """Fluid pressure, velocity and speed on the P1 vertices of the fluid mesh."""
    Pf, Uf = disc.Pf, disc.Uf
    row, col = np.divmod(np.arange(Pf.n_nodes), disc.mesh.ncol)
    un = 2 * row * (2 * disc.mesh.nx + 1) + 2 * col
    u = np.column_stack([state.u[un], state.u[un + Uf.n_nodes]])
    return write_vtk(path, Pf.coords, Pf.cells, {
        "pi": state.pi, "u": u, "speed": np.hypot(u[:, 0], u[:, 1])}, f"fluid t={state.t:.8e}")


def structure_vtk(path, disc, state) -> Path:
    """Thick-layer pressure and displacement."""
    nb = disc.nb
    eta = np.column_stack([state.eta[:nb], state.eta[nb:]])
    return write_vtk(path, disc.Sb.coords, disc.Sb.cells, {
        "p": state.p, "eta": eta}, f"thick layer t={state.t:.8e}")


def write_manifest(path, command: str, settings: dict, extra: dict | None = None) -> Path:
    """JSON record of the resolved configuration; contains no timestamps so reruns compare equal."""
    import scipy

    from . import __version__
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"command": command, "package_version": __version__,
           "numpy": np.__version__, "scipy": scipy.__version__,
           "python": platform.python_version(), "settings": settings}
    if extra:
        doc["extra"] = extra
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    return path
