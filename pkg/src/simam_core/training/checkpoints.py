# -*- coding: utf-8 -*-
"""
Checkpoint archives (``.ckpt``): a zip with ``architecture.json``,
``state.json`` and one TEN4 entry per parameter or buffer. Entry order,
timestamps and permissions are fixed, so equal weights give equal bytes.
"""
import codecs
import json
import logging
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

from .. import schema
from ..errors import DataError
from ..nn import ArchitectureConfig, Network

logger = logging.getLogger(__name__)

ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)
TENSOR_PREFIX = "tensors/"


@dataclass
class CheckpointState:
    epoch: int
    step: int
    dtype: str
    tensors: List[str]
    metrics: Dict[str, float] = field(default_factory=dict)


def _entry(name):
    info = zipfile.ZipInfo(name, date_time=ZIP_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    return info


def save_checkpoint(path, net, epoch, step, metrics=None):
    path = Path(path)
    state = net.state_dict()
    meta = CheckpointState(
        epoch=epoch,
        step=step,
        dtype=net.dtype,
        tensors=list(state),
        metrics=dict(metrics or {}),
    )

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with zipfile.ZipFile(tmp, "w") as archive:
        archive.writestr(_entry("architecture.json"), schema.dumps(net.config))
        archive.writestr(_entry("state.json"), schema.dumps(meta))
        for name, array in state.items():
            archive.writestr(
                _entry(TENSOR_PREFIX + name + ".ten4"), codecs.encode(array, "ten4")
            )
    tmp.replace(path)
    logger.debug("saved checkpoint %s (epoch %d, step %d)", path, epoch, step)
    return path


def load_checkpoint(path):
    """Rebuild the network stored in `path`; returns `(network, state)`."""
    path = Path(path)
    try:
        with zipfile.ZipFile(path) as archive:
            config = schema.from_dict(
                ArchitectureConfig,
                json.loads(archive.read("architecture.json")),
                path="architecture.json",
            )
            meta = schema.from_dict(
                CheckpointState, json.loads(archive.read("state.json")), path="state.json"
            )
            arrays = {
                name: codecs.decode(archive.read(TENSOR_PREFIX + name + ".ten4"), "ten4")
                for name in meta.tensors
            }
    except (zipfile.BadZipFile, KeyError, ValueError) as exc:
        raise DataError(f"{path}: unreadable checkpoint ({exc})") from exc

    net = Network(config, dtype=meta.dtype)
    try:
        net.load_state_dict(arrays)
    except (KeyError, ValueError) as exc:
        detail = exc.args[0] if exc.args else exc
        raise DataError(f"{path}: checkpoint does not fit its architecture ({detail})") from exc
    return net, meta

