import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Union

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    """
    Provenance of one command-line run, written next to its outputs.

    Attributes:
        command (str): Subcommand name.
        args (dict[str, Any]): Every parsed argument.
        seeds (list[int]): Seeds the run drew randomness from.
        input_hashes (dict[str, str]): Content hash per input file.
        artifacts (list[str]): Paths of the files written.
        duration_seconds (float): Wall-clock duration.
        version (str): Library version.
    """

    command: str
    args: dict[str, Any]
    version: str
    seeds: list[int] = field(default_factory=list)
    input_hashes: dict[str, str] = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    duration_seconds: float = 0.0

    def write(self, out_dir: Union[str, Path]) -> Path:
        """
        Write the manifest as 'manifest.json' in the output directory.

        Args:
            out_dir (Union[str, Path]): The output directory.

        Returns:
            Path: The manifest path.
        """
        path = Path(out_dir) / MANIFEST_NAME
        path.write_text(json.dumps(asdict(self), indent=2, default=str))
        return path
