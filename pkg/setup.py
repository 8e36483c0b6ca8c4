"""Build script: compiles the optional Cython kernel extension.

The extension is an accelerator only. If Cython (or a C compiler) is not
available the package installs pure-Python and selects the numpy fallback
at import time. Set LIFTCODEC_NO_EXT=1 to skip the extension on purpose.

The -ffp-contract=off flag matters: the compiled kernels must produce
bit-identical doubles to the numpy fallback, so FMA contraction is
disabled (and no -ffast-math anywhere).
"""

import os

from setuptools import setup


def _extensions():
    if os.environ.get("LIFTCODEC_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "liftcodec._kernels",
        ["src/liftcodec/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
