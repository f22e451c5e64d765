import functools
import json
import os
from contextlib import contextmanager
from os import path as osp

import aiofiles
from loguru import logger
from pydantic import BaseModel

from geonoether.base import get_import_path


def log_formatter(record: dict, *, colorize: bool = True) -> str:
    """Format log messages. Used by both the console and the per-table log handlers."""
    extra = record["extra"]
    if colorize:
        result = (
            "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
            "<level>{level: <8}</level> | "
            "<cyan>{file}</cyan>:<cyan>{line}</cyan> | "
        )
        if "scenario" in extra:
            result += "<magenta>{extra[scenario]}</magenta> | "
        if "row" in extra:
            result += "<blue>{extra[row]}</blue> | "
        result += "<level>{message}</level>\n{exception}"
    else:
        result = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {file}:{line} | "
        if "scenario" in extra:
            result += "{extra[scenario]} | "
        if "row" in extra:
            result += "{extra[row]} | "
        result += "{message}\n{exception}"
    return result


class Recorder:
    """Artifacts of one report table under `save_dir/<name>/`."""

    def __init__(self, save_dir: str, name: str):
        self.save_dir = save_dir
        self.name = name
        self.item_dir = osp.join(save_dir, name)
        os.makedirs(self.item_dir, exist_ok=True)

    def _log_filter(self, record: dict) -> bool:
        return record["extra"].get("scenario") == self.name

    @contextmanager
    def logging(self):
        log_path = osp.join(self.item_dir, "report.log")
        handler_id = logger.add(
            log_path, format=functools.partial(log_formatter, colorize=False), filter=self._log_filter, level="DEBUG"
        )
        try:
            yield
        finally:
            logger.remove(handler_id)

    async def save_text(self, filename: str, content: str) -> str | None:
        save_path = osp.join(self.item_dir, filename)
        try:
            os.makedirs(osp.dirname(save_path), exist_ok=True)
            async with aiofiles.open(save_path, "w", newline="") as f:
                await f.write(content)
            return save_path
        except Exception:
            logger.opt(exception=True).error(f"Failed to save {filename} to: {save_path}")
            return None

    async def save_result(self, result: BaseModel) -> str | None:
        dic = {"_target_": get_import_path(type(result)), **result.model_dump(mode="json", exclude_none=True)}
        return await self.save_text("result.json", json.dumps(dic, indent=2, ensure_ascii=False) + "\n")
