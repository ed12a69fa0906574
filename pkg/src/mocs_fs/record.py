"""Per-run result record shared by both optimizers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .data import BitMask
from .evaluation import Objectives


@dataclass
class RunRecord:
    """Everything one optimization run reports.

    ``hv_trace`` holds one ``(nfc, train hypervolume)`` point per
    iteration/generation, starting with the initial population; the nfc
    column is strictly increasing and its successive differences equal the
    number of evaluations spent per iteration.  ``termination_reason`` is
    ``"budget"`` or ``"converged"``.
    """

    algorithm: str
    seed: int
    hv_trace: list[tuple[int, float]] = field(default_factory=list)
    train_front: list[tuple[Objectives, BitMask]] = field(default_factory=list)
    test_front: list[Objectives] = field(default_factory=list)
    wall_time_s: float = 0.0
    termination_reason: str = ""
    final_nfc: int = 0
