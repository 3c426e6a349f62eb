"""Text codecs for diagrams, point clouds, features, models and reports.

Every codec works on strings; ``ArtifactStore`` moves them through a
``FileSystemService``. Floats are written with ``repr`` so values survive a
write/read cycle exactly and repeated runs produce identical bytes.
"""

import csv
import io
import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import DiagramFormatError, FeaturizerError, InvalidDiagramError, LearningError
from ..models.diagram import PersistenceDiagram
from ..models.featurizer_config import ColumnKey, FeatureMatrix, Featurizer, featurizer_from_dict
from ..models.learning import RidgeModel
from ..models.point_cloud import PointCloud
from ..utils.path_utils import diagram_path, find_diagram_files, parse_diagram_path
from .filesystem_service import FileSystemService, default_fs_service

logger = logging.getLogger(__name__)

DIAGRAM_HEADER = ("birth", "death", "multiplicity")
FEATURES_NAME = "features.csv"
LABELS_NAME = "labels.csv"
FEATURIZER_NAME = "featurizer.json"
MODEL_NAME = "model.json"
SCORES_NAME = "scores.csv"
PREDICTIONS_NAME = "predictions.csv"
BIFURCATION_NAME = "bifurcation.csv"
ZERO_ONE_NAME = "zero_one.csv"
CONFIG_ECHO_NAME = "config.json"

Cell = Union[str, int, float]


def format_value(value: Any) -> str:
    """Render one CSV cell; floats use ``repr`` for an exact round trip."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _write_rows(header: Optional[Sequence[str]], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(cell) for cell in row])
    return buffer.getvalue()


def _data_lines(text: str) -> List[Tuple[int, List[str]]]:
    """Non-blank, non-comment CSV rows with their 1-based line numbers."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rows.append((lineno, [cell.strip() for cell in next(csv.reader([stripped]))]))
    return rows


def _is_header(cells: Sequence[str]) -> bool:
    try:
        [float(cell) for cell in cells]
        return False
    except ValueError:
        return True


def _json_dump(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# Diagrams


def diagram_to_csv(diagram: PersistenceDiagram) -> str:
    return _write_rows(
        DIAGRAM_HEADER,
        ((p.birth, p.death, p.multiplicity) for p in diagram.points),
    )


def diagram_from_csv(
    text: str, homology_dimension: int = 0, source: str = "<diagram>"
) -> PersistenceDiagram:
    """Parse ``birth,death[,multiplicity]`` rows; ``#`` lines and a header are skipped.

    Raises:
        DiagramFormatError: On malformed rows or points off the open wedge
    """
    pairs: List[Tuple[float, float]] = []
    mults: List[int] = []
    for position, (lineno, cells) in enumerate(_data_lines(text)):
        if position == 0 and _is_header(cells):
            continue
        if len(cells) not in (2, 3):
            raise DiagramFormatError(
                f"{source}:{lineno}: expected 2 or 3 columns, got {len(cells)}"
            )
        try:
            birth, death = float(cells[0]), float(cells[1])
            mult_value = float(cells[2]) if len(cells) == 3 else 1.0
        except ValueError as e:
            raise DiagramFormatError(f"{source}:{lineno}: {e}") from e
        if not mult_value.is_integer() or mult_value < 1:
            raise DiagramFormatError(f"{source}:{lineno}: bad multiplicity {cells[2]!r}")
        pairs.append((birth, death))
        mults.append(int(mult_value))
    try:
        return PersistenceDiagram.from_pairs(pairs, mults, homology_dimension)
    except InvalidDiagramError as e:
        raise DiagramFormatError(f"{source}: {e}") from e


# Point clouds and series


def point_cloud_to_csv(cloud: PointCloud) -> str:
    return _write_rows(None, cloud.points.tolist())


def point_cloud_from_csv(text: str, source: str = "<points>") -> PointCloud:
    """One point per row, comma-separated coordinates.

    Raises:
        DiagramFormatError: On non-numeric cells or rows of unequal length
    """
    rows = []
    for lineno, cells in _data_lines(text):
        try:
            rows.append([float(cell) for cell in cells])
        except ValueError as e:
            raise DiagramFormatError(f"{source}:{lineno}: {e}") from e
    if not rows:
        raise DiagramFormatError(f"{source}: no points")
    if len({len(row) for row in rows}) != 1:
        raise DiagramFormatError(f"{source}: rows have different numbers of coordinates")
    return PointCloud(np.array(rows))


def series_to_csv(series: Sequence[float]) -> str:
    return _write_rows(("x",), ([value] for value in np.asarray(series, dtype=float)))


def series_from_csv(text: str, source: str = "<series>") -> np.ndarray:
    values = []
    for position, (lineno, cells) in enumerate(_data_lines(text)):
        if position == 0 and _is_header(cells):
            continue
        try:
            values.append(float(cells[0]))
        except ValueError as e:
            raise DiagramFormatError(f"{source}:{lineno}: {e}") from e
    return np.array(values)


# Features, labels and featurizers


def feature_matrix_to_csv(matrix: FeatureMatrix) -> str:
    row_ids = matrix.row_ids or tuple(str(k) for k in range(matrix.rows))
    return _write_rows(
        ["item_id"] + matrix.column_names,
        ([row_id] + list(values) for row_id, values in zip(row_ids, matrix.values.tolist())),
    )


def feature_matrix_from_csv(text: str, source: str = FEATURES_NAME) -> FeatureMatrix:
    rows = _data_lines(text)
    if not rows:
        raise FeaturizerError(f"{source}: missing header")
    header = rows[0][1]
    has_ids = bool(header) and header[0] == "item_id"
    columns = tuple(ColumnKey.parse(name) for name in header[1 if has_ids else 0 :])
    ids = []
    values = []
    for lineno, cells in rows[1:]:
        if len(cells) != len(header):
            raise FeaturizerError(f"{source}:{lineno}: expected {len(header)} cells")
        if has_ids:
            ids.append(cells[0])
            cells = cells[1:]
        try:
            values.append([float(cell) for cell in cells])
        except ValueError as e:
            raise FeaturizerError(f"{source}:{lineno}: {e}") from e
    array = np.array(values, dtype=float).reshape(len(values), len(columns))
    return FeatureMatrix(array, columns, tuple(ids) if has_ids else None)


def labels_to_csv(item_ids: Sequence[str], labels: Sequence[Any]) -> str:
    return _write_rows(("item_id", "label"), zip(item_ids, labels))


def labels_from_csv(text: str, source: str = LABELS_NAME) -> Tuple[List[str], List[str]]:
    ids: List[str] = []
    labels: List[str] = []
    for position, (lineno, cells) in enumerate(_data_lines(text)):
        if position == 0 and cells[:2] == ["item_id", "label"]:
            continue
        if len(cells) != 2:
            raise LearningError(f"{source}:{lineno}: expected item_id,label")
        ids.append(cells[0])
        labels.append(cells[1])
    return ids, labels


def featurizers_to_json(featurizers: Mapping[int, Featurizer]) -> str:
    return _json_dump({f"h{dim}": featurizers[dim].to_dict() for dim in sorted(featurizers)})


def featurizers_from_json(text: str) -> Dict[int, Featurizer]:
    try:
        data = json.loads(text)
        return {int(key[1:]): featurizer_from_dict(value) for key, value in data.items()}
    except (ValueError, KeyError, TypeError, AttributeError) as e:
        raise FeaturizerError(f"Malformed featurizer description: {e}") from e


# Models


def model_to_json(model: RidgeModel) -> str:
    return _json_dump(model.to_dict())


def model_from_json(text: str) -> RidgeModel:
    try:
        data = json.loads(text)
    except ValueError as e:
        raise LearningError(f"Malformed model JSON: {e}") from e
    return RidgeModel.from_dict(data)


# Reports


@dataclass(frozen=True)
class ScoreRow:
    experiment: str
    run: Union[int, str]
    split: str
    metric: str
    value: float


SCORE_HEADER = ("experiment", "run", "split", "metric", "value")


def scores_to_csv(rows: Iterable[ScoreRow]) -> str:
    return _write_rows(
        SCORE_HEADER, ((r.experiment, r.run, r.split, r.metric, r.value) for r in rows)
    )


def scores_from_csv(text: str) -> List[ScoreRow]:
    rows = []
    for position, (lineno, cells) in enumerate(_data_lines(text)):
        if position == 0 and tuple(cells) == SCORE_HEADER:
            continue
        experiment, run, split, metric, value = cells
        rows.append(
            ScoreRow(experiment, int(run) if run.isdigit() else run, split, metric, float(value))
        )
    return rows


@dataclass(frozen=True)
class PredictionRow:
    run: int
    split: str
    index: str
    true: Cell
    predicted: Cell


def predictions_to_csv(rows: Iterable[PredictionRow]) -> str:
    return _write_rows(
        ("run", "split", "index", "true", "predicted"),
        ((r.run, r.split, r.index, r.true, r.predicted) for r in rows),
    )


def predictions_from_csv(text: str) -> List[PredictionRow]:
    rows = []
    for position, (_, cells) in enumerate(_data_lines(text)):
        if position == 0 and cells[0] == "run":
            continue
        run, split, index, true, predicted = cells
        rows.append(PredictionRow(int(run), split, index, true, predicted))
    return rows


def coefficient_grid_to_csv(
    i_values: Sequence[int], j_values: Sequence[int], values: np.ndarray
) -> str:
    """Heatmap CSV: first row ``i\\j`` and the j indices, then one row per i."""
    return _write_rows(
        ["i\\j"] + [str(j) for j in j_values],
        ([i] + list(row) for i, row in zip(i_values, np.asarray(values).tolist())),
    )


def bifurcation_to_csv(points: Iterable[Tuple[float, float]]) -> str:
    return _write_rows(("alpha", "extremum_value"), points)


def zero_one_to_csv(rows: Iterable[Tuple[float, float, str]]) -> str:
    return _write_rows(("alpha", "score", "label"), rows)


# File access


class ArtifactStore:
    """Reads and writes artifacts through a file system service."""

    def __init__(self, fs_service: Optional[FileSystemService] = None) -> None:
        self.fs_service = default_fs_service(fs_service)

    def write_text(self, path: str, content: str) -> str:
        if not self.fs_service.write_file(path, content):
            raise OSError(f"Cannot write {path}")
        logger.debug(f"Wrote {path}")
        return path

    def read_text(self, path: str) -> str:
        return self.fs_service.read_file(path)

    def write_json(self, path: str, data: Any) -> str:
        return self.write_text(path, _json_dump(data))

    def read_json(self, path: str) -> Any:
        text = self.read_text(path)
        try:
            return json.loads(text)
        except ValueError as e:
            raise DiagramFormatError(f"{path}: malformed JSON: {e}") from e

    def write_diagram(self, prefix: str, diagram: PersistenceDiagram) -> str:
        return self.write_text(
            diagram_path(prefix, diagram.homology_dimension), diagram_to_csv(diagram)
        )

    def read_diagram(self, path: str) -> PersistenceDiagram:
        _, dim = parse_diagram_path(path)
        return diagram_from_csv(self.read_text(path), dim, source=path)

    def read_diagrams(
        self, directory: str, prefix: Optional[str] = None
    ) -> Dict[int, PersistenceDiagram]:
        """All ``*_h<dim>.csv`` diagrams of a directory keyed by dimension."""
        found = find_diagram_files(self.fs_service.list_files(directory), prefix)
        diagrams: Dict[int, PersistenceDiagram] = {}
        for dim, path in found:
            if dim in diagrams:
                raise DiagramFormatError(f"Several H{dim} diagrams in {directory}")
            diagrams[dim] = self.read_diagram(path)
        return diagrams

    def write_point_cloud(self, path: str, cloud: PointCloud) -> str:
        return self.write_text(path, point_cloud_to_csv(cloud))

    def read_point_cloud(self, path: str) -> PointCloud:
        return point_cloud_from_csv(self.read_text(path), source=path)

    def write_series(self, path: str, series: Sequence[float]) -> str:
        return self.write_text(path, series_to_csv(series))

    def read_series(self, path: str) -> np.ndarray:
        return series_from_csv(self.read_text(path), source=path)

    def write_features(
        self,
        directory: str,
        matrix: FeatureMatrix,
        featurizers: Mapping[int, Featurizer],
        labels: Optional[Sequence[Any]] = None,
    ) -> List[str]:
        paths = [
            self.write_text(os.path.join(directory, FEATURES_NAME), feature_matrix_to_csv(matrix)),
            self.write_text(
                os.path.join(directory, FEATURIZER_NAME), featurizers_to_json(featurizers)
            ),
        ]
        if labels is not None:
            ids = matrix.row_ids or tuple(str(k) for k in range(matrix.rows))
            paths.append(
                self.write_text(os.path.join(directory, LABELS_NAME), labels_to_csv(ids, labels))
            )
        return paths

    def read_features(
        self, directory: str
    ) -> Tuple[FeatureMatrix, Dict[int, Featurizer], Optional[List[str]]]:
        """Feature matrix, featurizers and (if present) labels aligned to the matrix rows."""
        matrix = feature_matrix_from_csv(
            self.read_text(os.path.join(directory, FEATURES_NAME)),
            source=os.path.join(directory, FEATURES_NAME),
        )
        featurizer_path = os.path.join(directory, FEATURIZER_NAME)
        featurizers = featurizers_from_json(self.read_text(featurizer_path))
        labels_path = os.path.join(directory, LABELS_NAME)
        if not self.fs_service.is_file(labels_path):
            return matrix, featurizers, None
        ids, labels = labels_from_csv(self.read_text(labels_path), source=labels_path)
        if matrix.row_ids is not None:
            by_id = dict(zip(ids, labels))
            missing = [row_id for row_id in matrix.row_ids if row_id not in by_id]
            if missing:
                raise LearningError(f"{labels_path}: no label for items {missing[:5]}")
            labels = [by_id[row_id] for row_id in matrix.row_ids]
        elif len(labels) != matrix.rows:
            raise LearningError(f"{labels_path}: {len(labels)} labels for {matrix.rows} rows")
        return matrix, featurizers, labels

    def write_model(self, path: str, model: RidgeModel) -> str:
        return self.write_text(path, model_to_json(model))

    def read_model(self, path: str) -> RidgeModel:
        return model_from_json(self.read_text(path))
