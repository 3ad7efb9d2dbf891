from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

Table = Union[Dict[str, float], List[Any]]


class AlphabetSpec(BaseModel):
    name: str
    symbols: List[str] = Field(..., min_length=1)


class SourceModelSpec(BaseModel):
    """Source model file.

    ``alphabets`` declares the variables in order, terminals first. For
    ``kind="mixed"`` the ``joint`` field is a two-element list of component
    tables; ``kind="explicit"`` uses ``tables`` keyed by blocklength, each over
    the length-n word alphabets.
    """

    alphabets: List[AlphabetSpec] = Field(..., min_length=1)
    kind: Literal["iid", "mixed", "explicit"] = "iid"
    joint: Optional[Table] = None
    alpha: Optional[float] = Field(None, gt=0, lt=1)
    side_info: Optional[str] = None
    tables: Optional[Dict[int, Table]] = None

    @model_validator(mode="after")
    def kind_fields(self) -> "SourceModelSpec":
        names = [a.name for a in self.alphabets]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be distinct")
        if self.side_info is not None and self.side_info not in names:
            raise ValueError(f"side_info '{self.side_info}' is not a declared variable")
        if self.kind == "iid" and self.joint is None:
            raise ValueError("iid models need 'joint'")
        if self.kind == "mixed":
            if self.alpha is None:
                raise ValueError("mixed models need 'alpha'")
            if not isinstance(self.joint, list) or len(self.joint) != 2:
                raise ValueError("mixed models need 'joint' as a list of two component tables")
        if self.kind == "explicit" and not self.tables:
            raise ValueError("explicit models need 'tables'")
        return self


class MeasureSpec(BaseModel):
    name: str = ""
    table: List[Any]
    recon_alphabets: Optional[List[AlphabetSpec]] = None
    additive: bool = True


class DistortionSpec(BaseModel):
    """Distortion file: measures over the model's terminal alphabets."""

    measures: List[MeasureSpec] = Field(..., min_length=1)
