"""Build shim: compiles the optional Cython engine kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a failed build only costs speed.
"""

from setuptools import setup, Extension

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "nmx._engine_c",
                sources=["src/nmx/_engine_c.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
