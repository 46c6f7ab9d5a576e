"""
sicbench file I/O

Reading and writing of state files, count tables, circuit descriptions and
command output. JSON is written with indent 2 and Python's shortest
round-trip float representation, which never needs more than 17
significant digits and reads back to the same double; CSV goes through
pandas with '%.17g'. Output files are replaced atomically.
"""

import io
import json
import logging
import os
import sys
import tempfile
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .exceptions import ConfigError
from .optical_bench import PhotonicCircuit
from .quantum_core import DensityMatrix, Ket
from .schemas import CircuitFileModel, StateFileModel, parse_model
from .tomography import CountRecord, ReconstructionMethod, ReconstructionResult

# Configure logging
logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def matrix_to_rows(matrix) -> List[List[List[float]]]:
    """Complex matrix as nested rows of [re, im] pairs"""
    m = np.asarray(matrix, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def rows_to_matrix(rows: Sequence[Sequence[Sequence[float]]]) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def vector_to_pairs(vector) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(vector, dtype=complex)]


def pairs_to_vector(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


def to_jsonable(obj: Any) -> Any:
    """Convert numpy scalars and arrays inside nested containers to plain Python"""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, ensure_ascii=False) + "\n"


def frame_to_csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return buffer.getvalue()


def write_atomic(path: str, text: str):
    """
    Write text to ``path`` through a temporary file in the same directory

    Args:
        path: Destination file
        text: Full file content
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".sicbench-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.info(f"wrote {path}")


def emit(text: str, output: Optional[str] = None):
    """Standard out by default, atomic file write when ``output`` is given"""
    if output:
        write_atomic(output, text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON", [f"line {e.lineno}: {e.msg}"])


def state_from_record(record: Dict[str, Any]) -> DensityMatrix:
    """Validated DensityMatrix from a parsed state-file dictionary"""
    model = parse_model(StateFileModel, record, "state file")
    if model.kind == "pure":
        vector = pairs_to_vector(model.amplitudes)
        if vector.size != model.dim:
            raise ConfigError("state file", [f"amplitudes: expected {model.dim} entries, got {vector.size}"])
        return Ket(vector).to_density()
    matrix = rows_to_matrix(model.rows)
    if matrix.shape != (model.dim, model.dim):
        raise ConfigError("state file", [f"rows: expected a {model.dim}x{model.dim} matrix, got {matrix.shape}"])
    return DensityMatrix(matrix)


def load_state(path: str) -> DensityMatrix:
    return state_from_record(load_json(path))


def state_to_record(rho: DensityMatrix) -> Dict[str, Any]:
    return {'dim': rho.dim, 'kind': 'mixed', 'rows': matrix_to_rows(rho.matrix)}


def ket_to_record(ket: Ket) -> Dict[str, Any]:
    return {'dim': ket.dim, 'kind': 'pure', 'amplitudes': vector_to_pairs(ket.amplitudes)}


def counts_to_frame(record: CountRecord) -> pd.DataFrame:
    """Counts table with header port,result,count"""
    rows = []
    for label, count in zip(record.labels, record.counts):
        port, result = label.split(",")
        rows.append({'port': int(port), 'result': int(result), 'count': int(count)})
    return pd.DataFrame(rows, columns=['port', 'result', 'count'])


def counts_from_frame(frame: pd.DataFrame, pom_id: str = "") -> CountRecord:
    missing = [c for c in ('port', 'result', 'count') if c not in frame.columns]
    if missing:
        raise ConfigError("counts table", [f"missing column {c}" for c in missing])
    labels = [f"{int(p)},{int(r)}" for p, r in zip(frame['port'], frame['result'])]
    counts = frame['count'].astype("int64").to_numpy()
    if np.any(counts < 0):
        raise ConfigError("counts table", ["count: values must be non-negative"])
    return CountRecord(pom_id, labels, counts)


def load_counts(path: str) -> CountRecord:
    """Counts from CSV (port,result,count) or JSON ({"pom", "counts": {label: n}})"""
    if path.lower().endswith(".json"):
        record = load_json(path)
        if not isinstance(record, dict) or not isinstance(record.get('counts'), dict):
            raise ConfigError(f"{path}", ["counts: expected a mapping from 'port,result' to count"])
        labels = list(record['counts'].keys())
        try:
            counts = [int(record['counts'][label]) for label in labels]
        except (TypeError, ValueError):
            raise ConfigError(f"{path}", ["counts: values must be integers"])
        if any(c < 0 for c in counts):
            raise ConfigError(f"{path}", ["counts: values must be non-negative"])
        return CountRecord(str(record.get('pom', "")), labels, np.array(counts, dtype=np.int64))
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigError(f"{path} is not a valid counts table", [str(e)])
    return counts_from_frame(frame)


def load_circuit(path: str) -> PhotonicCircuit:
    record = load_json(path)
    model = parse_model(CircuitFileModel, record, "circuit file")
    return PhotonicCircuit.from_dict(model.model_dump(exclude_none=True))


def matrix_to_frame(matrix, name: str) -> pd.DataFrame:
    """Long-form table (name,row,col,re,im) for CSV output of matrices"""
    m = np.asarray(matrix, dtype=complex)
    rows = [{'name': name, 'row': i, 'col': j, 're': float(m[i, j].real), 'im': float(m[i, j].imag)}
            for i in range(m.shape[0]) for j in range(m.shape[1])]
    return pd.DataFrame(rows, columns=['name', 'row', 'col', 're', 'im'])


def _flatten(value: Any, prefix: str, rows: List[Dict[str, Any]]):
    if isinstance(value, dict):
        for key, item in value.items():
            _flatten(item, f"{prefix}.{key}" if prefix else str(key), rows)
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _flatten(item, f"{prefix}.{i}" if prefix else str(i), rows)
    else:
        rows.append({'field': prefix, 'value': value})


def record_to_frame(record: Dict[str, Any]) -> pd.DataFrame:
    """
    Long-form (field,value) table holding every leaf of a JSON record

    Nested keys and list positions are joined with dots, so an estimate
    entry reads ``estimate.<row>.<col>.<0 for re, 1 for im>``.
    """
    rows: List[Dict[str, Any]] = []
    _flatten(to_jsonable(record), "", rows)
    return pd.DataFrame(rows, columns=['field', 'value'])


def reconstruction_to_record(result: ReconstructionResult) -> Dict[str, Any]:
    """JSON-ready view of a ReconstructionResult"""
    record: Dict[str, Any] = {
        'method': result.method.value,
        'estimate': matrix_to_rows(result.estimate),
        'physical': result.is_physical,
        'min_eigenvalue': float(result.min_eigenvalue),
        'iterations': int(result.iterations),
        'converged': bool(result.converged),
        'max_probability_deviation': float(result.max_probability_deviation),
    }
    if result.method is ReconstructionMethod.MLE:
        record['log_likelihood_delta'] = result.log_likelihood_delta
        record['diluted_steps'] = int(result.diluted_steps)
    if result.trace_distance is not None:
        record['fidelity'] = result.fidelity
        record['trace_distance'] = result.trace_distance
    if result.elapsed_ms is not None:
        record['elapsed_ms'] = result.elapsed_ms
    return record
