from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd

from archsearch_mip.harness.bo_loop import BoRunRecord


def format_mean_sd(mean: float, sd: float, digits: int = 3) -> str:
    """``mean(sd)``, the layout used in kernel comparison tables."""
    return f"{mean:.{digits}f}({sd:.{digits}f})"


def incumbent_frame(runs: Sequence[Sequence[BoRunRecord]]) -> pd.DataFrame:
    """Long table of (run, seed, iteration, val_error, test_error) incumbents."""
    rows = [
        {
            "run": index,
            "seed": record.seed,
            "iteration": record.iteration,
            "val_error": record.incumbent_val_error,
            "test_error": record.incumbent_test_error,
        }
        for index, run in enumerate(runs)
        for record in run
    ]
    return pd.DataFrame(rows, columns=["run", "seed", "iteration", "val_error", "test_error"])


def regret_curve(runs: Sequence[Sequence[BoRunRecord]], optimum: Optional[float] = None) -> pd.DataFrame:
    """Median and sd of the incumbent errors per iteration across runs.

    Runs that stopped early keep their last incumbent. With ``optimum`` the validation
    columns hold regret (incumbent error minus the optimum).
    """
    frame = incumbent_frame(runs)
    if frame.empty:
        return pd.DataFrame(columns=["iteration", "median", "sd", "test_median", "test_sd"])
    last = int(frame["iteration"].max())
    columns: List[pd.DataFrame] = []
    for name in ("val_error", "test_error"):
        wide = frame.pivot(index="iteration", columns="run", values=name).reindex(range(last + 1)).ffill()
        if name == "val_error" and optimum is not None:
            wide = wide - optimum
        columns.append(wide)
    val, test = columns
    curve = pd.DataFrame(
        {
            "iteration": val.index.to_numpy(),
            "median": val.median(axis=1).to_numpy(),
            "sd": val.std(axis=1, ddof=0).to_numpy(),
            "test_median": test.median(axis=1).to_numpy(),
            "test_sd": test.std(axis=1, ddof=0).to_numpy(),
        }
    )
    return curve


def write_regret_csv(curve: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    curve.to_csv(path, index=False, float_format="%.6g")
    return path
