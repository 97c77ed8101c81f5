"""Field dumps: one raw little-endian complex128 file per component plus a
JSON sidecar.

For a component with key K the pair is ``<stem>.bin`` / ``<stem>.json``.
The binary holds ``points_per_axis ** (2 * complex_dim)`` values in
row-major (C) order over axes x_1, ..., x_{2n}.  The sidecar carries
``complex_dim``, ``points_per_axis``, ``half_width``, ``degree`` and
``component_key`` (a list of 1-based indices, empty for functions).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .grid import FormField, GridSpec, ScalarField

__all__ = ["write_field", "read_field", "read_component"]

_DTYPE = np.dtype("<c16")


def _stem(base: Path, key) -> Path:
    suffix = "".join(str(k) for k in key)
    return base.with_name(f"{base.name}_{suffix}") if suffix else base


def write_field(field, path) -> list[Path]:
    """Write a ScalarField or FormField; returns the files created."""
    base = Path(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    form = field.as_form() if isinstance(field, ScalarField) else field
    grid = form.grid
    written = []
    for key, data in zip(form.keys, form.data):
        stem = _stem(base, key)
        np.ascontiguousarray(data, dtype=_DTYPE).tofile(stem.with_suffix(".bin"))
        meta = {
            "complex_dim": grid.complex_dim,
            "points_per_axis": grid.points_per_axis,
            "half_width": grid.half_width,
            "degree": form.degree,
            "component_key": list(key),
        }
        stem.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")
        written += [stem.with_suffix(".bin"), stem.with_suffix(".json")]
    return written


def read_component(path) -> tuple[GridSpec, int, tuple, np.ndarray]:
    """Read one ``.bin``/``.json`` pair (either suffix or the bare stem)."""
    stem = Path(path)
    if stem.suffix in (".bin", ".json"):
        stem = stem.with_suffix("")
    meta = json.loads(stem.with_suffix(".json").read_text())
    grid = GridSpec(meta["complex_dim"], meta["points_per_axis"], meta["half_width"])
    data = np.fromfile(stem.with_suffix(".bin"), dtype=_DTYPE)
    if data.size != grid.size:
        raise ValueError(f"{stem}.bin holds {data.size} values, sidecar implies {grid.size}")
    return grid, int(meta["degree"]), tuple(meta["component_key"]), data.reshape(grid.shape)


def read_field(path, degree: int | None = None):
    """Reassemble a field written by :func:`write_field` from its base path."""
    base = Path(path)
    if degree is None:
        probe = sorted(base.parent.glob(base.name + "*.json"))
        if not probe:
            raise FileNotFoundError(f"no sidecar matching {base}*.json")
        degree = json.loads(probe[0].read_text())["degree"]
    if degree == 0:
        grid, _, _, data = read_component(base)
        return ScalarField(grid, data)
    from .grid import form_keys

    parts = []
    grid = None
    for probe in sorted(base.parent.glob(base.name + "_*.json")):
        g, q, key, data = read_component(probe)
        if q == degree:
            grid = g
            parts.append((key, data))
    if grid is None:
        raise FileNotFoundError(f"no degree-{degree} components for {base}")
    lookup = dict(parts)
    keys = form_keys(grid.complex_dim, degree)
    missing = [k for k in keys if k not in lookup]
    if missing:
        raise FileNotFoundError(f"missing components {missing} for {base}")
    return FormField(grid, degree, np.stack([lookup[k] for k in keys]))
