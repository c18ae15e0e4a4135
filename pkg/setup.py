"""Build hook for the optional compiled transportation kernel.

The package works without the extension (a pure NumPy/Python kernel is
selected at import time); set WASSQUANT_NO_EXT=1 to skip compilation.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("WASSQUANT_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "wassquant.solver._transport_cy",
                    ["src/wassquant/solver/_transport_cy.pyx"],
                    include_dirs=[numpy.get_include()],
                )
            ],
            compiler_directives={"language_level": "3", "boundscheck": False},
        )
    except Exception:
        ext_modules = []

setup(ext_modules=ext_modules)
