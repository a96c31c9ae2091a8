"""Daily cash flow diagnostics: summaries, hypothesis tests, transformations
and the cross-validated Trivial/Linear/Non-linear label."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
