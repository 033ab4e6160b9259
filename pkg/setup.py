import ctypes.util
import platform

import numpy as np
from setuptools import Extension, setup

# glibc's vector math library gives an AVX2 sin, selected at run time.
if platform.machine() == "x86_64" and ctypes.util.find_library("mvec"):
    vsin_macros, vsin_libs = [("FS_USE_MVEC", "1")], ["mvec", "m"]
else:
    vsin_macros, vsin_libs = [], ["m"]

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; kernels fall back to numpy
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "freqspiral._kernels",
                ["src/freqspiral/_kernels.pyx"],
                include_dirs=[np.get_include(), "src/freqspiral"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")] + vsin_macros,
                libraries=vsin_libs,
                depends=["src/freqspiral/_vsin.h"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
