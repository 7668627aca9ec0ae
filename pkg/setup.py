from setuptools import Extension, setup

# The compiled mask-scan kernel is optional: without Cython (or a compiler)
# the package falls back to the pure-numpy implementation at import time.
try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension("hadcert._scan_cy", sources=["src/hadcert/_scan_cy.pyx"])],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
