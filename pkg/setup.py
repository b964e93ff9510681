"""Build script: compiles the native resampling kernels when a toolchain is
available, otherwise installs the pure-NumPy fallback only."""

import numpy
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/mpilab/_kernels/_native.pyx"],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(
    ext_modules=ext_modules,
    include_dirs=[numpy.get_include()],
)
