"""Build script for the optional compiled pairing kernel.

The package is pure Python except for one Cython extension holding the hot
chain-by-form evaluation loop.  If Cython or a C compiler is unavailable the
extension is skipped and the package falls back to the numpy implementation
selected at import time in ``dirachains._kernels``.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "dirachains._kernels._pairing_cy",
                ["src/dirachains/_kernels/_pairing_cy.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    warnings.warn("Cython not available; installing with the pure-python kernel only")

setup(ext_modules=ext_modules)
