"""Energy-optimal A/C control: prediction model, identification, NMPC and test harness."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
