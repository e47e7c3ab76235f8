from typing import Any, Dict, Type, TypeVar

from pydantic.version import VERSION as PYDANTIC_VERSION


PYDANTIC_V2 = PYDANTIC_VERSION.startswith("2.")

_M = TypeVar("_M")

if PYDANTIC_V2:

    def use_pydantic_2_plus():
        return True

    from pydantic import BaseModel, ConfigDict
    from pydantic import ValidationError as ValidationError
    from pydantic import field_validator

    def validator(*fields: str, pre: bool = False):
        return field_validator(*fields, mode="before" if pre else "after")

    def model_dump(model: BaseModel) -> Dict[str, Any]:
        return model.model_dump()

    def model_load(cls: Type[_M], data: Dict[str, Any]) -> _M:
        return cls.model_validate(data)  # type: ignore[attr-defined]

else:
    from pydantic import BaseModel, ValidationError
    from pydantic import validator as _v1_validator

    ConfigDict = dict  # type: ignore

    def use_pydantic_2_plus():
        return False

    def validator(*fields: str, pre: bool = False):  # type: ignore[no-redef]
        return _v1_validator(*fields, pre=pre, allow_reuse=True)

    def model_dump(model: BaseModel) -> Dict[str, Any]:  # type: ignore[no-redef]
        return model.dict()

    def model_load(cls: Type[_M], data: Dict[str, Any]) -> _M:  # type: ignore[no-redef]
        return cls.parse_obj(data)  # type: ignore[attr-defined]


class ExamModel(BaseModel):
    """Base for the package's validated records."""

    if PYDANTIC_V2:
        model_config = ConfigDict(
            arbitrary_types_allowed=True, extra="forbid", validate_assignment=True
        )
    else:

        class Config:
            arbitrary_types_allowed = True
            extra = "forbid"
            validate_assignment = True
