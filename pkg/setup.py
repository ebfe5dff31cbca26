"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure numpy
backend is selected at import time), so a failed or skipped extension
build must never break installation.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "eigenuq._kernels._fast",
                ["src/eigenuq/_kernels/_fast.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython/numpy at build time: ship pure-Python only.
    ext_modules = []

setup(ext_modules=ext_modules)
