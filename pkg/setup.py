"""Build the optional compiled kernels.

The package works without them; when Cython or a C++ compiler is missing
the pure-Python kernels are used instead.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("THINBANDS_NO_EXT", "") not in ("1", "true", "yes"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "thinbands._kernels._ckernels",
                    sources=["src/thinbands/_kernels/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    language="c++",
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level="3",
        )

setup(ext_modules=ext_modules)
