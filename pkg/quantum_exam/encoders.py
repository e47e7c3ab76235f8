"""
This file adapted from FastAPI's encoders.

Licensed under the MIT License (MIT).

Copyright (c) 2018 Sebastián Ramírez

Permission is hereby granted, free of charge, to any person obtaining a copy
of this software and associated documentation files (the "Software"), to deal
in the Software without restriction, including without limitation the rights
to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
copies of the Software, and to permit persons to whom the Software is
furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in
all copies or substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN
THE SOFTWARE.
"""

import dataclasses
from enum import Enum
from pathlib import PurePath
from types import GeneratorType
from typing import Any, Callable, Dict

import numpy as np
from ulid import ULID

from ._compat import BaseModel, model_dump


def encode_complex(value: complex) -> str:
    """Encode a complex number so that ``complex(text)`` restores it exactly."""
    return repr(complex(value))


ENCODERS_BY_TYPE: Dict[Any, Callable[[Any], Any]] = {
    complex: encode_complex,
    np.complexfloating: encode_complex,
    np.integer: int,
    np.floating: float,
    np.bool_: bool,
    ULID: str,
}


def jsonable_encoder(
    obj: Any,
    exclude_none: bool = False,
    custom_encoder: Dict[Any, Callable[[Any], Any]] = {},  # noqa: B006
) -> Any:
    """Convert models, dataclasses, enums and numpy values into JSON-ready data.

    Dict key order is preserved, which keeps transcript lines and reports stable
    across runs with the same seed.
    """
    if custom_encoder:
        for encoder_type, encoder in custom_encoder.items():
            if isinstance(obj, encoder_type):
                return encoder(obj)

    if isinstance(obj, BaseModel):
        return jsonable_encoder(
            model_dump(obj), exclude_none=exclude_none, custom_encoder=custom_encoder
        )
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return jsonable_encoder(
            {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)},
            exclude_none=exclude_none,
            custom_encoder=custom_encoder,
        )
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, PurePath):
        return str(obj)
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (str, int, float)):
        return obj
    if isinstance(obj, dict):
        encoded_dict = {}
        for key, value in obj.items():
            if value is None and exclude_none:
                continue
            encoded_dict[jsonable_encoder(key)] = jsonable_encoder(
                value, exclude_none=exclude_none, custom_encoder=custom_encoder
            )
        return encoded_dict
    if isinstance(obj, np.ndarray):
        return [jsonable_encoder(item) for item in obj.tolist()]
    if isinstance(obj, (list, set, frozenset, GeneratorType, tuple)):
        return [
            jsonable_encoder(
                item, exclude_none=exclude_none, custom_encoder=custom_encoder
            )
            for item in obj
        ]

    for encoder_type, encoder in ENCODERS_BY_TYPE.items():
        if isinstance(obj, encoder_type):
            return encoder(obj)

    raise ValueError(f"Object of type {type(obj).__name__} is not JSON encodable")
