import os

import numpy as np
from setuptools import Extension, setup

ext = []
if os.environ.get("EPSAPPROX_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize

        ext = cythonize(
            [Extension(
                "epsapprox._ckernels",
                ["src/epsapprox/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext = []

setup(ext_modules=ext)
