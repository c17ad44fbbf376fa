"""Compute planning for adaptive-pretraining phases.

Step accounting treats one document as one training sequence:
steps = ceil(docs * epochs / batch), where the batch is 256 for corpora
under 5,000 documents and 2048 otherwise. DAPT runs a single pass over a
large corpus and is conventionally budgeted at a fixed 12,500 steps;
DAPT_THEN_TAPT is the sum of its two parts.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import DataError
from .fileio import atomic_write

PHASES = ("DAPT", "TAPT", "KNN_TAPT", "RAND_TAPT", "CURATED_TAPT", "DAPT_THEN_TAPT")

SMALL_CORPUS_BATCH = 256
LARGE_CORPUS_BATCH = 2048
SMALL_CORPUS_LIMIT = 5000
DAPT_FIXED_STEPS = 12_500
DEFAULT_EPOCHS = 100

# Display notch: a step count rounds up to the next 0.1K only within this
# many steps of it; otherwise it rounds down.
_DISPLAY_SLACK = 25

_PHASE_WITH_K = re.compile(r"^(KNN_TAPT|RAND_TAPT)\((\d+)\)$")


def format_steps(steps: int) -> str:
    """Steps in thousands with one decimal, e.g. 9034 -> "9.0K".

    Rounds down to the nearest 0.1K unless the count is within 25 steps
    of the next notch, in which case it rounds up.
    """
    if steps < 0:
        raise DataError(f"steps must be >= 0, got {steps}")
    tenths = (steps + _DISPLAY_SLACK) // 100
    return f"{tenths / 10:.1f}K"


def batch_for(docs: int) -> int:
    return SMALL_CORPUS_BATCH if docs < SMALL_CORPUS_LIMIT else LARGE_CORPUS_BATCH


def steps_for(docs: int, epochs: int, batch: int) -> int:
    return math.ceil(docs * epochs / batch)


@dataclass
class PhasePlan:
    phase: str
    docs: int
    epochs: int
    batch: int
    steps: int
    storage_bytes: int

    @property
    def steps_display(self) -> str:
        return format_steps(self.steps)

    def to_dict(self) -> dict:
        return {
            "phase": self.phase,
            "docs": self.docs,
            "epochs": self.epochs,
            "batch": self.batch,
            "steps": self.steps,
            "steps_display": self.steps_display,
            "storage_bytes": self.storage_bytes,
        }


def _phase_label(phase: str, k: int | None) -> str:
    if phase in ("KNN_TAPT", "RAND_TAPT"):
        if k is None:
            raise DataError(f"phase {phase} requires k")
        return f"{phase}({k})"
    if k is not None:
        raise DataError(f"phase {phase} does not take k")
    return phase


def plan_phase(
    phase: str,
    docs: int,
    epochs: int | None = None,
    storage_bytes: int = 0,
    k: int | None = None,
    overrides: Mapping[str, object] | None = None,
) -> PhasePlan:
    """Step plan for one phase.

    docs is the phase corpus size in documents (for DAPT_THEN_TAPT, the
    DAPT corpus; the TAPT corpus size comes in overrides["task_docs"]).
    DAPT forces epochs to 1 and defaults to the fixed 12,500-step budget;
    pass overrides={"fixed_steps": None} to get the formula instead.
    """
    if phase not in PHASES:
        raise DataError(f"unknown phase '{phase}' (expected one of {', '.join(PHASES)})")
    if docs < 1:
        raise DataError(f"docs must be >= 1, got {docs}")
    if storage_bytes < 0:
        raise DataError(f"storage_bytes must be >= 0, got {storage_bytes}")
    ov = dict(overrides or {})

    if phase == "DAPT_THEN_TAPT":
        task_docs = ov.pop("task_docs", None)
        if not isinstance(task_docs, int) or task_docs < 1:
            raise DataError("DAPT_THEN_TAPT requires overrides['task_docs'] >= 1")
        task_epochs = ov.pop("task_epochs", DEFAULT_EPOCHS)
        dapt = plan_phase("DAPT", docs, overrides=ov)
        tapt = plan_phase("TAPT", task_docs, epochs=task_epochs)
        return PhasePlan(
            phase="DAPT_THEN_TAPT",
            docs=docs,
            epochs=tapt.epochs,
            batch=dapt.batch,
            steps=dapt.steps + tapt.steps,
            storage_bytes=storage_bytes,
        )

    if phase == "DAPT":
        if epochs not in (None, 1):
            raise DataError("DAPT runs a single epoch")
        epochs = 1
        fixed = ov.pop("fixed_steps", DAPT_FIXED_STEPS)
    else:
        if epochs is None:
            epochs = DEFAULT_EPOCHS
        if epochs < 1:
            raise DataError(f"epochs must be >= 1, got {epochs}")
        fixed = ov.pop("fixed_steps", None)
    if ov:
        raise DataError(f"unknown overrides: {', '.join(sorted(ov))}")
    if fixed is not None and (not isinstance(fixed, int) or fixed < 1):
        raise DataError("fixed_steps override must be a positive integer")

    batch = batch_for(docs)
    steps = fixed if fixed is not None else steps_for(docs, epochs, batch)
    return PhasePlan(
        phase=_phase_label(phase, k),
        docs=docs,
        epochs=epochs,
        batch=batch,
        steps=steps,
        storage_bytes=storage_bytes,
    )


def compare_plans(plans: Sequence[PhasePlan]) -> dict:
    """Cost table: plans sorted by steps, ratios against the cheapest."""
    if len(plans) < 2:
        raise DataError("compare_plans needs at least two plans")
    ordered = sorted(plans, key=lambda p: (p.steps, p.phase))
    base = ordered[0].steps
    if base < 1:
        raise DataError("cheapest plan has zero steps; nothing to compare")
    return {
        "baseline": ordered[0].phase,
        "rows": [
            {
                "phase": p.phase,
                "steps": p.steps,
                "steps_display": p.steps_display,
                "ratio": p.steps / base,
            }
            for p in ordered
        ],
    }


def write_plan_json(path: str | Path, plan: PhasePlan) -> None:
    with atomic_write(path) as handle:
        json.dump(plan.to_dict(), handle, sort_keys=True, indent=2)
        handle.write("\n")


def read_plan_json(path: str | Path) -> PhasePlan:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    obj = json.loads(path.read_text("utf-8"))
    try:
        plan = PhasePlan(
            phase=obj["phase"],
            docs=obj["docs"],
            epochs=obj["epochs"],
            batch=obj["batch"],
            steps=obj["steps"],
            storage_bytes=obj["storage_bytes"],
        )
    except (KeyError, TypeError) as exc:
        raise DataError(f"{path}: not a phase plan ({exc})") from exc
    base = plan.phase.split("(")[0]
    if base not in PHASES or (
        "(" in plan.phase and not _PHASE_WITH_K.match(plan.phase)
    ):
        raise DataError(f"{path}: unknown phase '{plan.phase}'")
    return plan


def write_compare_json(path: str | Path, report: dict) -> None:
    with atomic_write(path) as handle:
        json.dump(report, handle, sort_keys=True, indent=2)
        handle.write("\n")
