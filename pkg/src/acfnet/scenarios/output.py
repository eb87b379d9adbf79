"""
Flat-file outputs: CSV (or JSON) data plus a JSON sidecar holding the
resolved configuration.  Feeding the sidecar back to the CLI reruns the
scenario; the number formatting is fixed so reruns are byte-identical.
"""

import csv
import dataclasses
import json
import math
import os
from typing import Any, Dict, List

import numpy as np

from .. import __version__
from .config import ScenarioConfig
from .runners import SweepResult, TableResult, TraceResult

T_FORMAT = ".12g"
VALUE_FORMAT = ".15g"


def _num(x, spec=VALUE_FORMAT) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else format(x, spec)


def _trace_rows(trace: TraceResult):
    header = ["t"] + list(trace.columns)
    rows = []
    for i, t in enumerate(trace.times):
        rows.append([_num(t, T_FORMAT)] + [_num(col[i]) for col in trace.columns.values()])
    return header, rows


def _sweep_rows(result: SweepResult):
    header = ["axis1", "axis2", "population", "residual"]
    rows = []
    for i, v1 in enumerate(result.grid1):
        for j, v2 in enumerate(result.grid2):
            rows.append([_num(v1), _num(v2), _num(result.population[i, j]), _num(result.residual[i, j], ".6e")])
    return header, rows


def _table_rows(rows: List[Dict[str, Any]]):
    header = list(rows[0])
    return header, [[_num(r[k]) if isinstance(r[k], float) else str(r[k]) for k in header] for r in rows]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, list):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and math.isnan(x):
        return None
    return x


def provenance(config: ScenarioConfig, result) -> Dict[str, Any]:
    info: Dict[str, Any] = {
        "package_version": __version__,
        "resolved_params": {k: _jsonable(list(v) if isinstance(v, tuple) else v)
                            for k, v in dataclasses.asdict(config.system_params()).items()},
        "column_axes": None,
    }
    if isinstance(result, SweepResult):
        info["column_axes"] = {"axis1": result.axes[0], "axis2": result.axes[1]}
        info["errors"] = result.errors
    if isinstance(result, TableResult):
        info["final"] = result.rows
        info["warnings"] = result.warnings
    trace = result.trace if isinstance(result, TableResult) else result
    if isinstance(trace, TraceResult):
        info["diagnostics"] = trace.diagnostics
    return info


def write_outputs(config: ScenarioConfig, result, out_dir: str, fmt: str = "csv") -> List[str]:
    """Write data files and the sidecar; return the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, config.id)
    written = []
    sidecar = config.to_dict()
    sidecar["provenance"] = provenance(config, result)

    if fmt == "csv":
        if isinstance(result, SweepResult):
            _write_csv(base + ".csv", *_sweep_rows(result))
        elif isinstance(result, TableResult):
            _write_csv(base + ".csv", *_trace_rows(result.trace))
            _write_csv(base + "_final.csv", *_table_rows(result.rows))
            written.append(base + "_final.csv")
        else:
            _write_csv(base + ".csv", *_trace_rows(result))
        written.insert(0, base + ".csv")
    elif fmt == "json":
        if isinstance(result, SweepResult):
            data = {
                "axis1": result.axes[0], "axis2": result.axes[1],
                "grid1": result.grid1, "grid2": result.grid2,
                "population": _jsonable(result.population), "residual": _jsonable(result.residual),
            }
        else:
            trace = result.trace if isinstance(result, TableResult) else result
            data = {"t": _jsonable(trace.times), "columns": {k: _jsonable(v) for k, v in trace.columns.items()}}
            if isinstance(result, TableResult):
                data["final"] = result.rows
        with open(base + ".json", "w") as fh:
            json.dump(data, fh, indent=1)
        written.append(base + ".json")
    else:
        raise ValueError(f"unknown output format {fmt!r}")

    with open(base + ".config.json", "w") as fh:
        json.dump(_jsonable(sidecar), fh, indent=2)
    written.append(base + ".config.json")
    return written
