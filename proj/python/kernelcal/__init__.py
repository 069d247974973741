"""Kernel-space calibration: path measures, thermodynamic ledgers, frozen-kernel
fixed points, and the bloom monitoring simulator, backed by the C++ core."""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __version__, bloom, fixedpoints, harness, paths, thermo  # noqa: F401
except ImportError:
    # Development layout: the extension sits on sys.path instead of inside
    # the package (ctest points PYTHONPATH at the build tree).
    from _core import *  # noqa: F401,F403
    from _core import __version__, bloom, fixedpoints, harness, paths, thermo  # noqa: F401
