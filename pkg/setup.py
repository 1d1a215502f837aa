"""Builds the optional compiled kernels.

The package works without them (pure-Python fallbacks are selected at
import time), so any failure here degrades to a pure install instead of
aborting.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("reflectmt._speedups", ["src/reflectmt/_speedups.pyx"])],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"warning: compiled kernels skipped ({exc}); using pure-Python fallback")
    ext_modules = []

setup(ext_modules=ext_modules)
