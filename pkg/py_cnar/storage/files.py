"""File-based storage for networks, panels and results of a run directory."""

import io
import json
import os
import re
import tempfile
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel

from ..core.model import PanelSeries
from ..core.net import AdjacencyMatrix
from ..exceptions import CnarValidationError

_HEADER = re.compile(r"#\s*(.*)")
_FIELD = re.compile(r"(\w+)\s*=\s*(\d+)")
_SEPARATOR = re.compile(r"[,\s]+")


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path``, then rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def _header_fields(line: str) -> dict[str, int]:
    match = _HEADER.match(line.strip())
    if not match:
        return {}
    return {key: int(value) for key, value in _FIELD.findall(match.group(1))}


def _format_matrix(mat: NDArray[np.float64]) -> str:
    buffer = io.StringIO()
    if mat.size:
        np.savetxt(buffer, mat, fmt="%.17g", delimiter=",")
    return buffer.getvalue()


class RunStorage:
    """Reads and writes the files of one run directory.

    Layout:
        adjacency.txt   edge list "i j" (0-based) with an optional "# n=N" header
        membership.txt  one community index per line
        y.csv           T rows x N columns
        z.csv           "# T=.. N=.. p=.." header, then T*N rows x p columns (time-major)
        signal.csv      T rows x N columns
        *.json          truth, fit and error-covariance records
    """

    def __init__(self, root_dir: str | Path, create: bool = False):
        """Initialize storage.

        Args:
            root_dir: Run directory holding all files
            create: Create the directory if it does not exist
        """
        self.root_dir = Path(root_dir)
        if create:
            self.root_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.root_dir / name

    def exists(self, name: str) -> bool:
        return self.path(name).exists()

    def _require(self, name: str) -> Path:
        path = self.path(name)
        if not path.exists():
            raise CnarValidationError(f"Required file not found: {path}")
        return path

    # -- networks ---------------------------------------------------------

    def save_adjacency(self, adjacency: AdjacencyMatrix, name: str = "adjacency.txt") -> Path:
        lines = [f"# n={adjacency.n}"]
        lines.extend(f"{i} {j}" for i, j in adjacency.edges())
        return atomic_write_text(self.path(name), "\n".join(lines) + "\n")

    def load_adjacency(self, name: str = "adjacency.txt", n: int | None = None) -> AdjacencyMatrix:
        """Load an edge list (``.txt``) or a dense 0/1 matrix (``.csv``).

        The node count comes from ``n``, else the ``# n=N`` header, else the largest index.
        """
        path = self._require(name)
        if path.suffix == ".csv":
            try:
                dense = np.loadtxt(path, delimiter=",", ndmin=2)
            except ValueError as e:
                raise CnarValidationError(f"{path}: cannot parse dense adjacency: {e}") from e
            return AdjacencyMatrix(dense)

        header_n: int | None = None
        edges: list[tuple[int, int]] = []
        with open(path) as f:
            for lineno, raw in enumerate(f, start=1):
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    header_n = _header_fields(line).get("n", header_n)
                    continue
                parts = [p for p in _SEPARATOR.split(line) if p]
                if len(parts) < 2:
                    raise CnarValidationError(f"{path}:{lineno}: expected 'i j', got {line!r}")
                try:
                    edges.append((int(parts[0]), int(parts[1])))
                except ValueError as e:
                    raise CnarValidationError(f"{path}:{lineno}: non-integer node index") from e

        largest = max((max(e) for e in edges), default=-1) + 1
        size = n if n is not None else (header_n if header_n is not None else largest)
        if size < largest:
            raise CnarValidationError(f"{path}: node index {largest - 1} exceeds n={size}")
        return AdjacencyMatrix.from_edges(size, edges)

    def save_membership(self, labels: Any, name: str = "membership.txt") -> Path:
        labels = np.asarray(labels, dtype=int).reshape(-1)
        return atomic_write_text(self.path(name), "".join(f"{c}\n" for c in labels.tolist()))

    def load_membership(self, name: str = "membership.txt") -> NDArray[np.int64]:
        path = self._require(name)
        try:
            return np.loadtxt(path, dtype=np.int64, comments="#", ndmin=1)
        except ValueError as e:
            raise CnarValidationError(f"{path}: cannot parse community labels: {e}") from e

    # -- panels -----------------------------------------------------------

    def save_matrix(self, name: str, mat: Any) -> Path:
        return atomic_write_text(self.path(name), _format_matrix(np.asarray(mat, dtype=float)))

    def load_matrix(self, name: str) -> NDArray[np.float64]:
        path = self._require(name)
        try:
            return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        except ValueError as e:
            raise CnarValidationError(f"{path}: cannot parse numeric matrix: {e}") from e

    def save_covariates(self, z: Any, name: str = "z.csv") -> Path:
        z = np.asarray(z, dtype=float)
        t_len, n, p = z.shape
        header = f"# T={t_len} N={n} p={p}\n"
        return atomic_write_text(self.path(name), header + _format_matrix(z.reshape(t_len * n, p)))

    def load_covariates(self, t_len: int, n: int, name: str = "z.csv") -> NDArray[np.float64]:
        path = self._require(name)
        with open(path) as f:
            fields = _header_fields(f.readline())
        if fields and (fields.get("T"), fields.get("N")) != (t_len, n):
            raise CnarValidationError(
                f"{path}: header says T={fields.get('T')} N={fields.get('N')}, "
                f"but y.csv is {t_len} x {n}"
            )
        p = fields.get("p")
        if p == 0:
            return np.zeros((t_len, n, 0))
        flat = self.load_matrix(name)
        if flat.shape[0] != t_len * n or (p is not None and flat.shape[1] != p):
            raise CnarValidationError(
                f"{path}: expected {t_len * n} rows x {p if p is not None else 'p'} columns, "
                f"got {flat.shape[0]} x {flat.shape[1]}"
            )
        return flat.reshape(t_len, n, flat.shape[1])

    def save_panel(self, panel: PanelSeries) -> list[Path]:
        written = [self.save_matrix("y.csv", panel.y), self.save_covariates(panel.z)]
        if panel.signal is not None:
            written.append(self.save_matrix("signal.csv", panel.signal))
        return written

    def load_panel(self, expected_p: int | None = None) -> PanelSeries:
        """Load y.csv with z.csv and signal.csv when present.

        Raises:
            CnarValidationError: If z.csv is missing although ``expected_p`` > 0, or
                its covariate count differs from ``expected_p``
        """
        y = self.load_matrix("y.csv")
        t_len, n = y.shape
        if self.exists("z.csv"):
            z = self.load_covariates(t_len, n)
        elif expected_p:
            raise CnarValidationError(
                f"Required file not found: {self.path('z.csv')} (p={expected_p} covariates)"
            )
        else:
            z = np.zeros((t_len, n, 0))
        if expected_p is not None and z.shape[2] != expected_p:
            raise CnarValidationError(
                f"{self.path('z.csv')} holds p={z.shape[2]} covariates, expected {expected_p}"
            )
        signal = self.load_matrix("signal.csv") if self.exists("signal.csv") else None
        return PanelSeries(y=y, z=z, signal=signal)

    # -- records ----------------------------------------------------------

    def save_json(self, name: str, data: BaseModel | dict[str, Any] | str) -> Path:
        if isinstance(data, BaseModel):
            text = data.model_dump_json(indent=2)
        elif isinstance(data, str):
            text = data
        else:
            text = json.dumps(data, indent=2)
        return atomic_write_text(self.path(name), text.rstrip("\n") + "\n")

    def load_json(self, name: str) -> dict[str, Any]:
        path = self._require(name)
        try:
            with open(path) as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise CnarValidationError(f"{path}:{e.lineno}: invalid JSON: {e.msg}") from e
        if not isinstance(data, dict):
            raise CnarValidationError(f"{path}: expected a JSON object")
        return data
