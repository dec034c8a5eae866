from __future__ import annotations

import sys
from abc import ABC, abstractmethod
from argparse import Namespace
from dataclasses import dataclass, field, replace
from typing import (
    Any,
    Callable,
    ClassVar,
    Dict,
    Iterable,
    Iterator,
    List,
    Literal,
    Optional,
    Sequence,
    Tuple,
    Type,
    TypeVar,
    Union,
    overload,
)

import numpy as np
import numpy.typing as npt
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

FloatArray = npt.NDArray[np.float64]
"""A numpy array of float64 values."""
ComplexArray = npt.NDArray[np.complex128]
"""A numpy array of complex128 values."""
ArrayLike = npt.ArrayLike
"""Anything numpy can turn into an array."""
