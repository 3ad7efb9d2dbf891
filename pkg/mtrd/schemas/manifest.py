from datetime import datetime
from typing import List, Optional

from pydantic import BaseModel


class RunManifest(BaseModel):
    """Written last; its presence means the run completed."""

    command: str
    argv: List[str]
    config_path: Optional[str] = None
    seed: Optional[int] = None
    version: str
    outputs: List[str]
    started_at: datetime
    wall_clock_seconds: float
