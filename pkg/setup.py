"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure-numpy fallback is selected at
import time), so any failure here degrades gracefully to the slow path.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/geodesicnf/_kernels.pyx",
        compiler_directives={"language_level": 3},
    )
    for ext in ext_modules:
        ext.include_dirs = [numpy.get_include()]
        ext.extra_compile_args = ["-O3"]
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"geodesicnf: skipping Cython extension ({exc}); pure-python kernels will be used")

setup(ext_modules=ext_modules)
