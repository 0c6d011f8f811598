"""
Key-value reports and CSV tables for command output.
"""

from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence, TextIO, Union

import pandas as pd


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_report(report: Mapping[str, Any]) -> str:
    """One ``key=value`` line per entry, in insertion order."""
    return "\n".join(f"{key}={format_value(value)}" for key, value in report.items())


def print_report(report: Mapping[str, Any], stream: TextIO) -> None:
    stream.write(format_report(report) + "\n")


def write_table(
    rows: Iterable[Sequence[Any]],
    columns: Sequence[str],
    path: Optional[Union[str, Path]] = None,
    stream: Optional[TextIO] = None,
) -> None:
    """Write rows as CSV with a header to ``path``, or to ``stream`` when no path is given."""
    frame = pd.DataFrame(list(rows), columns=list(columns))
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
    elif stream is not None:
        stream.write(frame.to_csv(index=False))
