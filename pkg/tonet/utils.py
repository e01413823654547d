import logging
import sys
from pathlib import Path
from typing import Annotated, Any, Dict, Mapping, Optional, Union

import pandas as pd

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

SavePathType = Annotated[Union[str, Path, None], "File path to save data. If None, data is not saved."]


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Root handler on stderr; DEBUG with verbose, WARNING with quiet, INFO otherwise."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)


def save_output(data: pd.DataFrame, tag: str, save_path: SavePathType = None, float_format: Optional[str] = None) -> None:
    if save_path:
        Path(save_path).parent.mkdir(parents=True, exist_ok=True)
        data.to_csv(save_path, index=False, float_format=float_format, lineterminator="\n")
        logger.info("%s saved to %s", tag, save_path)


def _format_value(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def echo_config(
    out_dir: Union[str, Path], sections: Mapping[str, Mapping[str, Any]], name: str = "config.txt"
) -> Path:
    """Write the effective configuration as `[section]` blocks of key=value lines to `out_dir/name`."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for section, values in sections.items():
        lines.append(f"[{section}]")
        lines.extend(f"{key}={_format_value(value)}" for key, value in values.items())
        lines.append("")
    path = out_dir / name
    path.write_text("\n".join(lines))
    return path


def flat_dict(values: Mapping[str, Any]) -> Dict[str, Any]:
    """Drop None entries (unset CLI flags)."""
    return {k: v for k, v in values.items() if v is not None}
