"""Per-scheme gradient comparison tables."""

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np
import pandas as pd


@dataclass
class SensitivityReport:
    table: pd.DataFrame       # i, scheme, grad_value
    deviations: pd.DataFrame  # scheme, l2, linf (against the reference)

    def write(self, directory: Union[str, Path]) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.table.to_csv(directory / "sensitivity.csv", index=False, float_format="%.17g")
        self.deviations.to_csv(directory / "sensitivity_deviation.csv", index=False, float_format="%.17g")


def sensitivity_report(
    gradients: Mapping[str, np.ndarray],
    reference: Optional[Union[str, np.ndarray]] = None,
) -> SensitivityReport:
    """Long-format table of gradients per scheme plus L2/Linf deviations from ``reference``.

    ``reference`` is either a key of ``gradients`` or an explicit array; by
    default the first entry is the reference.
    """
    if not gradients:
        raise ValueError("no gradients to compare")
    lengths = {len(np.ravel(g)) for g in gradients.values()}
    if len(lengths) != 1:
        raise ValueError("gradients have different lengths")

    if reference is None:
        reference = next(iter(gradients))
    ref = np.ravel(gradients[reference] if isinstance(reference, str) else reference).astype(float)

    frames = []
    rows = []
    for scheme, grad in gradients.items():
        g = np.ravel(grad).astype(float)
        frames.append(pd.DataFrame({"i": np.arange(len(g)), "scheme": scheme, "grad_value": g}))
        diff = g - ref
        rows.append({"scheme": scheme, "l2": float(np.linalg.norm(diff)), "linf": float(np.abs(diff).max(initial=0.0))})
    return SensitivityReport(
        table=pd.concat(frames, ignore_index=True),
        deviations=pd.DataFrame(rows, columns=["scheme", "l2", "linf"]),
    )
