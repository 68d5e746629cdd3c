"""Build script for the optional compiled kernels.

The package is fully functional without the extension: fingertip._backend
falls back to the numpy implementations in fingertip._kernels_py. Building
with Cython just makes the 44.1 kHz sample-level kernels faster.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = [
        Extension(
            "fingertip._kernels",
            ["src/fingertip/_kernels.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
    ]
    ext_modules = cythonize(extensions, language_level=3)
except ImportError as exc:
    sys.stderr.write(f"fingertip: building without compiled kernels ({exc})\n")

setup(ext_modules=ext_modules)
