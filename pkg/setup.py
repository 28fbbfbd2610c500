"""Build script: compiles the optional Cython kernel extension.

The extension is marked optional; if Cython or a C compiler is missing the
install still succeeds and the package falls back to the pure-Python kernels.
Build in place for development with:

    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "netprotect._kernels._fast",
                ["src/netprotect/_kernels/_fast.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
