"""Exact delta-method experiments for diagonal cubic forms over F_q(t)."""

__version__ = "0.1.0"

from ffcubes.fields import CycNum, FFElem, FieldCtx

__all__ = ["CycNum", "FFElem", "FieldCtx", "__version__"]
