# -*- coding: utf-8 -*-
import os
from decouple import config

CACHE_DIR = config(
    "SIMAM_CACHE_DIR",
    default=os.path.expanduser("~/.cache/py-simam-core"),
)


if not os.path.exists(CACHE_DIR):
    os.makedirs(CACHE_DIR)


#: Storage dtype of freshly built tensors and networks.
DEFAULT_DTYPE = config("SIMAM_DTYPE", default="float64")

#: Storage dtype used by the training engine.
TRAIN_DTYPE = config("SIMAM_TRAIN_DTYPE", default="float32")

LOG_LEVEL = config("SIMAM_LOG_LEVEL", default="INFO")

#: Number of batches prepared ahead of the model update.
PREFETCH = config("SIMAM_PREFETCH", cast=int, default=2)
WORKERS = config("SIMAM_WORKERS", cast=int, default=2)
