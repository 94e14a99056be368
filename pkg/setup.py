"""Build script for the optional compiled simulation kernel.

The package is fully functional without the extension (a pure-Python
twin of the kernel is selected at import time); building it just makes
long simulation runs roughly two orders of magnitude faster:

    python setup.py build_ext --inplace
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension(
            "fibage.sim._kernel",
            ["src/fibage/sim/_kernel.pyx"],
            # keep float expressions unfused so the compiled kernel is
            # bit-identical to the pure-Python one
            extra_compile_args=["-O2", "-ffp-contract=off"],
        )],
        language_level=3,
    )
except ImportError:
    pass  # no Cython: install the pure-Python package

setup(ext_modules=ext_modules)
