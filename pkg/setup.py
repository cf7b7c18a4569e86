"""Build script: compiles the optional kernel extension when Cython is available.

Set AMOCBOOT_PURE=1 to skip the extension and install the pure-Python package;
the runtime falls back to the numpy kernels automatically when the extension
is absent.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("AMOCBOOT_PURE") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("amocboot._kernels", ["src/amocboot/_kernels.pyx"])],
            language_level=3,
        )

setup(ext_modules=ext_modules)
