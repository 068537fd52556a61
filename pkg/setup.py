"""Build script for the compiled trajectory kernel.

The Cython extension is optional: set UNRAVEL_SKIP_EXT=1 to install the
pure-Python package only (the stepping loop then runs on the numpy
fallback selected at import time).
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("UNRAVEL_SKIP_EXT"):
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "unravel._kernel",
                sources=["src/unravel/_kernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
