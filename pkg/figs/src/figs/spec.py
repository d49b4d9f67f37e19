"""Figure requests: input tables, a figure kind, an output image path."""

import os
from dataclasses import dataclass
from enum import Enum


class FigureError(ValueError):
    """Unusable figure request or input table."""


class FigureKind(Enum):
    CREEP_OVERLAY = "CreepOverlay"
    RATE_FIT = "RateFit"
    PROFILES = "Profiles"


@dataclass(frozen=True)
class FigureSpec:
    """What to draw, from which files, into which image.

    `inputs` are CSV or snapshot paths produced by the simulation CLI;
    they must exist at construction time.  `output` is the image path
    the renderer will write (format chosen by its extension).
    """

    inputs: tuple
    kind: FigureKind
    output: str

    def __post_init__(self):
        paths = tuple(str(p) for p in self.inputs)
        object.__setattr__(self, "inputs", paths)
        object.__setattr__(self, "output", str(self.output))
        if not paths:
            raise FigureError("a figure needs at least one input file")
        if not isinstance(self.kind, FigureKind):
            raise FigureError(f"unknown figure kind {self.kind!r}")
        if not self.output:
            raise FigureError("output path must be non-empty")
        for path in paths:
            if not os.path.isfile(path):
                raise FigureError(f"input {path} does not exist")
