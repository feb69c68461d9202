"""Builds the optional compiled kernel core.

The extension is marked optional: if Cython or a C compiler is missing the
install still succeeds and the package falls back to the numpy kernels at
import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "vwaakelm.backends._kernels_cy",
                ["src/vwaakelm/backends/_kernels_cy.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
