"""Build script: compiles the mutation kernel extension when Cython is present.

The package works without the extension (a pure-Python kernel is selected at
import time); the compiled kernel is what makes the big breadth-first searches
fast.  ``pip install -e . --no-build-isolation`` builds it in place.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("wquiv._kernel_cy", ["src/wquiv/_kernel_cy.pyx"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
