import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, List, Sequence, Union

from .._compat import BaseModel, model_dump
from ..encoders import jsonable_encoder


log = logging.getLogger(__name__)

PathLike = Union[str, Path]


def dumps_json(document: Any) -> str:
    return json.dumps(jsonable_encoder(document), indent=2, ensure_ascii=False) + "\n"


def write_json(path: PathLike, document: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(document), encoding="utf-8")
    log.info("Wrote %s", path)
    return path


def _flatten(row: Union[BaseModel, dict]) -> dict:
    data = model_dump(row) if isinstance(row, BaseModel) else dict(row)
    return {key: value for key, value in jsonable_encoder(data).items()}


def dumps_csv(rows: Sequence[Union[BaseModel, dict]]) -> str:
    """One CSV row per record; columns follow the first record's fields."""
    flat = [_flatten(row) for row in rows]
    columns: List[str] = list(flat[0]) if flat else []
    for row in flat[1:]:
        columns.extend(key for key in row if key not in columns)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in flat:
        writer.writerow({key: "" if row.get(key) is None else row.get(key) for key in columns})
    return buffer.getvalue()


def write_csv(path: PathLike, rows: Sequence[Union[BaseModel, dict]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_csv(rows), encoding="utf-8")
    log.info("Wrote %s rows to %s", len(rows), path)
    return path
