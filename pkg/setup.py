"""Builds the optional compiled token-scan kernels.

The package is fully functional without the extension (grafter._kernels
falls back to the pure-Python implementation at import time), so a missing
Cython toolchain only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [Extension("grafter._speedups", ["src/grafter/_speedups.pyx"])]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": 3})
    if cythonize is not None
    else [],
)
