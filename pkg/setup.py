"""Build script for the compiled pitch kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile is not fatal for pure-Python installs:
build with ``pip install -e . --no-build-isolation``.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    import numpy

    ext_modules = cythonize(
        [
            Extension(
                "vocalrisk._yin_c",
                ["src/vocalrisk/_yin_c.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
