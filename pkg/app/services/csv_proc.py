"""Point files: one tuple per row, columns named after projection selectors."""
import io
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import pandas as pd
from fastapi import UploadFile

from app.core.errors import DimensionError
from app.services.reports import atomic_write_text

Point = Tuple[int, ...]


def points_frame(points: Sequence[Sequence[int]], columns: Sequence[str]) -> pd.DataFrame:
    df = pd.DataFrame([list(p) for p in points], columns=list(columns))
    if len(df):
        df = df.sort_values(list(columns), kind="mergesort").reset_index(drop=True)
    return df.astype("int64")


def points_to_csv(points: Sequence[Sequence[int]], columns: Sequence[str]) -> str:
    return points_frame(points, columns).to_csv(index=False, lineterminator="\n")


def write_points_csv(path: Union[str, Path], points: Sequence[Sequence[int]], columns: Sequence[str]) -> Path:
    return atomic_write_text(path, points_to_csv(points, columns))


def parse_points_csv(contents: bytes) -> Tuple[List[str], List[Point]]:
    try:
        df = pd.read_csv(io.BytesIO(contents), sep=",", encoding="utf-8")
    except UnicodeDecodeError:
        df = pd.read_csv(io.BytesIO(contents), sep=",", encoding="latin1")
    df.columns = [str(c).strip() for c in df.columns]
    if df.isna().any().any():
        raise DimensionError("point file has empty cells")
    try:
        numeric = df.apply(pd.to_numeric)
    except (TypeError, ValueError):
        raise DimensionError("point file must hold integers only") from None
    if not (numeric == numeric.round()).all().all():
        raise DimensionError("point file has non-integral cells")
    values = numeric.astype("int64").values.tolist()
    return list(df.columns), [tuple(int(x) for x in row) for row in values]


def read_points_csv(path: Union[str, Path]) -> Tuple[List[str], List[Point]]:
    return parse_points_csv(Path(path).read_bytes())


def read_points_upload(file: UploadFile) -> Tuple[List[str], List[Point]]:
    if not file.filename or not file.filename.endswith(".csv"):
        raise DimensionError("El archivo de puntos debe ser CSV")
    return parse_points_csv(file.file.read())
