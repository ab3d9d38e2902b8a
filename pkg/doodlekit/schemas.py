"""
File and report schemas.
"""

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field


class DiagramFile(BaseModel):
    """On-disk form of a Diagram. Keys are emitted in field order."""
    crossings: List[List[int]] = Field(description="Per crossing, its darts in counterclockwise order")
    edges: List[Tuple[int, int]] = Field(description="Dart pairs joined by an edge")
    dart_directions: Dict[int, Literal["in", "out"]]
    free_circles: int = Field(default=0, ge=0)
    regions: Optional[Dict[int, int]] = Field(
        default=None,
        description="Complement region of the face right of each dart; optional for one-piece diagrams",
    )
    markers: Optional[List[str]] = None


class ForwardReport(BaseModel):
    trials: int
    passes: int
    failures: List[str] = Field(default_factory=list)


class BucketReport(BaseModel):
    code: str = Field(description="Canonical code of the reduced closure, hex encoded")
    members: List[str]
    connected_pairs: int
    inconclusive_pairs: List[Tuple[str, str]] = Field(default_factory=list)


class ReverseReport(BaseModel):
    buckets: List[BucketReport]

    @property
    def pair_count(self) -> int:
        return sum(b.connected_pairs + len(b.inconclusive_pairs) for b in self.buckets)

    @property
    def connected_count(self) -> int:
        return sum(b.connected_pairs for b in self.buckets)


class ExperimentReport(BaseModel):
    seed: int
    caps: Dict[str, int]
    forward: ForwardReport
    reverse: ReverseReport


class SuiteResult(BaseModel):
    name: str
    cases: int
    violations: List[str] = Field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations
