"""
File-based store for run artifacts.
"""
import asyncio
from pathlib import Path
from typing import Dict, List, Mapping, Union

import aiofiles

from ..config.logging_config import LoggerMixin

Artifact = Union[str, bytes]


class RunStore(LoggerMixin):
    """One run directory; artifacts are written asynchronously."""

    def __init__(self, run_dir: Union[str, Path]):
        """
        Initialize the store, creating the directory if needed.

        Args:
            run_dir: Directory holding this run's artifacts
        """
        self.run_dir = Path(run_dir)
        self.run_dir.mkdir(parents=True, exist_ok=True)

    @property
    def checkpoint_dir(self) -> Path:
        return self.run_dir / "checkpoint"

    def path(self, name: str) -> Path:
        return self.run_dir / name

    def exists(self, name: str) -> bool:
        return self.path(name).exists()

    async def write(self, name: str, content: Artifact) -> Path:
        """
        Write one artifact.

        Args:
            name: File name relative to the run directory
            content: Text (UTF-8) or raw bytes

        Returns:
            Path of the written file
        """
        target = self.path(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(content, bytes):
            async with aiofiles.open(target, "wb") as f:
                await f.write(content)
        else:
            async with aiofiles.open(target, "w", encoding="utf-8", newline="") as f:
                await f.write(content)
        self.logger.debug("artifact_written", name=name, bytes=len(content))
        return target

    async def write_all(self, artifacts: Mapping[str, Artifact]) -> List[Path]:
        """Write several artifacts concurrently."""
        paths = await asyncio.gather(*(self.write(name, content) for name, content in artifacts.items()))
        self.logger.info("artifacts_written", run_dir=str(self.run_dir), count=len(paths))
        return list(paths)

    def write_all_sync(self, artifacts: Dict[str, Artifact]) -> List[Path]:
        """Blocking wrapper for callers outside an event loop (worker threads included)."""
        return asyncio.run(self.write_all(artifacts))
