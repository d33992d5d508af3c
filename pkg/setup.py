"""Build script: compiles the optional Cython core.

The package works without the extension (a pure-Python backend is selected
at import time), so any build failure here should not be fatal for users
who only need small inputs.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "latentcloud._core._speedups",
                ["src/latentcloud/_core/_speedups.pyx"],
                language="c++",
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-std=c++17"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
