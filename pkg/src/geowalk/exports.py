"""CSV/JSON writers for command-line runs.

Every file starts with a two-line comment header carrying the package
version and the full run configuration, so any output can be reproduced
from its own first lines.  Values are written with ``repr`` round-tripping
and LF line endings; nothing time- or host-dependent goes into the files,
which keeps reruns byte-identical.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from . import __version__


def _config_line(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(", ", ": "))


def _format_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, config: dict, fieldnames, rows) -> None:
    """Write one CSV file with the standard header comment block.

    ``rows`` yields sequences aligned with ``fieldnames``.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# geowalk {__version__}\n")
        fh.write(f"# config: {_config_line(config)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])


def write_json(path, config: dict, payload: dict) -> None:
    doc = {"geowalk_version": __version__, "config": config}
    doc.update(payload)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _coordinate_names(m: int) -> list:
    return [f"x{i}" for i in range(m)]


def ensemble_to_csv(path, ensemble, config: dict) -> None:
    """One row per sample: index, endpoint coordinates, final distance."""
    m = ensemble.endpoints.shape[1]
    names = ["sample_index"] + _coordinate_names(m) + ["distance"]
    rows = (
        [i, *ensemble.endpoints[i], ensemble.distances[i, -1]]
        for i in range(ensemble.endpoints.shape[0])
    )
    write_csv(path, config, names, rows)


def histogram_to_csv(path, edges, counts, config: dict) -> None:
    rows = (
        [edges[i], edges[i + 1], int(counts[i])]
        for i in range(len(counts))
    )
    write_csv(path, config, ["bin_left", "bin_right", "count"], rows)


def cf_to_csv(path, ts, values, stderr, config: dict) -> None:
    """Empirical characteristic-function table: t, re, im, stderr."""
    rows = (
        [ts[i], values[i].real, values[i].imag, stderr[i]]
        for i in range(len(ts))
    )
    write_csv(path, config, ["t", "re", "im", "stderr"], rows)


def cf_table_to_csv(path, ts, values, analytic, stderr, config: dict) -> None:
    """Empirical vs analytic characteristic function, one row per t."""
    rows = (
        [ts[i], values[i].real, values[i].imag,
         analytic[i].real, analytic[i].imag, stderr[i]]
        for i in range(len(ts))
    )
    write_csv(path, config,
              ["t", "re", "im", "analytic_re", "analytic_im", "stderr"], rows)


def spectrum_to_csv(path, result, config: dict) -> None:
    """One row per dual mode: index vector, |k*|·r, eigenvalue, quad error."""
    modes = result.modes
    d = modes.shape[1]
    names = [f"k{i}" for i in range(d)] + ["rho", "lambda", "quad_error"]
    rows = (
        [*modes[i], result.rho[i], result.eigenvalues[i], result.quad_error[i]]
        for i in range(modes.shape[0])
    )
    write_csv(path, config, names, rows)


def scan_to_json(path, summary, config: dict) -> None:
    write_json(path, config, {"scan": summary.as_dict()})


def certificates_to_json(path, certificates, config: dict) -> None:
    write_json(path, config,
               {"certificates": [c.as_dict() for c in certificates]})


def toponogov_to_csv(path, alphas, bounds, constructed, config: dict) -> None:
    rows = (
        [alphas[i], bounds[i], constructed[i],
         abs(bounds[i] - constructed[i])]
        for i in range(len(alphas))
    )
    write_csv(path, config,
              ["alpha", "bound", "constructed", "abs_diff"], rows)
